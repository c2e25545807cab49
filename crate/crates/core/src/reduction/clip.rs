use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modem::CarrierMap;
use crate::numerics::{fft_unitary, ifft_unitary, padded_index, TimeSignal};

/// Clipping ratio in dB relative to the signal RMS, and the number of
/// clip-then-filter passes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipConfig {
    pub cr_db: f64,
    pub iterations: usize,
}

impl Default for ClipConfig {
    fn default() -> Self {
        Self {
            cr_db: 4.0,
            iterations: 1,
        }
    }
}

/// Limit every sample magnitude to `A = rms(x) * 10^(cr_db/20)`, keeping phase.
pub fn clip_signal(x: &TimeSignal, cr_db: f64) -> Result<TimeSignal> {
    let power = x.mean_power();
    if power == 0.0 {
        return Err(Error::UndefinedPapr);
    }
    let limit = power.sqrt() * 10f64.powf(cr_db / 20.0);
    Ok(x.map(|z| {
        let mag = z.norm();
        if mag > limit {
            z * (limit / mag)
        } else {
            z
        }
    }))
}

/// Zero every bin of the length-`L*N` spectrum that is not the oversampled
/// image of an occupied carrier.
pub fn filter_out_of_band(x: &TimeSignal, map: &CarrierMap) -> Result<TimeSignal> {
    let n = map.n_total();
    let l = x.oversampling();
    if x.n_nominal() != n {
        return Err(Error::Input(format!(
            "signal of nominal size {} against a {n}-carrier map",
            x.n_nominal()
        )));
    }
    let mut spectrum = x.samples().to_vec();
    fft_unitary(&mut spectrum)?;
    let mut keep = vec![false; spectrum.len()];
    for &k in map.occupied() {
        keep[padded_index(k, n, l)] = true;
    }
    for (bin, keep) in spectrum.iter_mut().zip(keep) {
        if !keep {
            *bin = num_complex::Complex64::new(0.0, 0.0);
        }
    }
    ifft_unitary(&mut spectrum)?;
    Ok(x.with_samples(spectrum))
}

/// Recursive clipping and filtering: `iterations` rounds of
/// [`clip_signal`] followed by [`filter_out_of_band`].
pub fn clip_and_filter(x: &TimeSignal, cfg: &ClipConfig, map: &CarrierMap) -> Result<TimeSignal> {
    let mut y = x.clone();
    for _ in 0..cfg.iterations {
        y = clip_signal(&y, cfg.cr_db)?;
        y = filter_out_of_band(&y, map)?;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::RandomStream;
    use crate::modem::{generate_bits, map_to_subcarriers, qpsk_modulate};
    use crate::numerics::{forward_transform, oversampled_synthesis};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_symbol(map: &CarrierMap, l: usize, id: u64) -> TimeSignal {
        let mut rng = RandomStream::new(99, id);
        let bits = generate_bits(&mut rng, 2 * map.n_used());
        let block = map_to_subcarriers(&qpsk_modulate(&bits).unwrap(), map).unwrap();
        oversampled_synthesis(&block, l).unwrap()
    }

    #[test]
    fn clip_examples() {
        let x = TimeSignal::new(vec![c(2., 0.), c(0., 0.), c(0., 0.), c(0., 0.)], 1).unwrap();
        let y = clip_signal(&x, 0.0).unwrap();
        assert!((y.samples()[0] - c(1., 0.)).norm() < 1e-12);
        assert!(y.samples()[1..].iter().all(|z| z.norm() == 0.0));

        // rms 2.5 and cr 0 dB puts A at 2.5; 3+4j has magnitude 5
        let r = 2.5f64;
        let other = (4.0 * r * r - 25.0f64).sqrt();
        let x = TimeSignal::new(vec![c(3., 4.), c(other, 0.), c(0., 0.), c(0., 0.)], 1).unwrap();
        assert!((x.mean_power().sqrt() - 2.5).abs() < 1e-12);
        let y = clip_signal(&x, 0.0).unwrap();
        assert!((y.samples()[0] - c(1.5, 2.)).norm() < 1e-12);
        assert!(matches!(
            clip_signal(&x.map(|_| c(0., 0.)), 3.0),
            Err(Error::UndefinedPapr)
        ));
    }

    #[test]
    fn large_ratio_leaves_symbols_untouched() {
        let map = CarrierMap::centered(512, 301).unwrap();
        for id in 0..20 {
            let x = random_symbol(&map, 6, id);
            let rms = x.mean_power().sqrt();
            assert!(x.samples().iter().all(|z| z.norm() < 10.0 * rms));
            assert_eq!(clip_signal(&x, 20.0).unwrap(), x);
        }
    }

    #[test]
    fn peak_bound_after_clipping() {
        let map = CarrierMap::centered(64, 37).unwrap();
        for id in 0..10 {
            let x = random_symbol(&map, 4, id);
            let limit = x.mean_power().sqrt() * 10f64.powf(0.2);
            let y = clip_signal(&x, 4.0).unwrap();
            assert!(y
                .samples()
                .iter()
                .all(|z| z.norm() <= limit * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn filter_passes_in_band_and_removes_out_of_band() {
        let map = CarrierMap::centered(16, 9).unwrap();
        let l = 4;
        let in_band = random_symbol(&map, l, 1);
        let y = filter_out_of_band(&in_band, &map).unwrap();
        for (a, b) in y.samples().iter().zip(in_band.samples()) {
            assert!((a - b).norm() < 1e-10);
        }

        // bin 30 of the 64-point spectrum is far outside the padded band
        let m = 16 * l;
        let tone: Vec<_> = (0..m)
            .map(|n| {
                Complex64::from_polar(0.3, 2.0 * std::f64::consts::PI * 30.0 * n as f64 / m as f64)
            })
            .collect();
        let tone = TimeSignal::new(tone, l).unwrap();
        let y = filter_out_of_band(&tone, &map).unwrap();
        assert!(y.samples().iter().all(|z| z.norm() < 1e-10));

        let mixed = in_band.with_samples(
            in_band
                .samples()
                .iter()
                .zip(tone.samples())
                .map(|(a, b)| a + b)
                .collect(),
        );
        let y = filter_out_of_band(&mixed, &map).unwrap();
        for (a, b) in y.samples().iter().zip(in_band.samples()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_iterations_is_identity() {
        let map = CarrierMap::centered(64, 37).unwrap();
        let x = random_symbol(&map, 2, 5);
        let cfg = ClipConfig {
            cr_db: 0.0,
            iterations: 0,
        };
        assert_eq!(clip_and_filter(&x, &cfg, &map).unwrap(), x);

        let cfg = ClipConfig {
            cr_db: 40.0,
            iterations: 1,
        };
        let y = clip_and_filter(&x, &cfg, &map).unwrap();
        for (a, b) in y.samples().iter().zip(x.samples()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn out_of_band_energy_is_removed() {
        let map = CarrierMap::centered(64, 37).unwrap();
        let l = 4;
        let mask: Vec<bool> = {
            let mut m = vec![false; 64 * l];
            for &k in map.occupied() {
                m[padded_index(k, 64, l)] = true;
            }
            m
        };
        for iterations in 1..=3 {
            let x = random_symbol(&map, l, iterations as u64);
            let y = clip_and_filter(
                &x,
                &ClipConfig {
                    cr_db: 2.0,
                    iterations,
                },
                &map,
            )
            .unwrap();
            let rms = y.mean_power().sqrt();
            let spec = forward_transform(&y).unwrap();
            for (bin, in_band) in spec.bins().iter().zip(&mask) {
                if !in_band {
                    assert!(bin.norm() <= 1e-10 * rms);
                }
            }
        }
    }
}
