//! Block-level Alamouti space-time code for two transmit antennas.
//!
//! Two frequency blocks `S1`, `S2` are sent over two symbol periods:
//!
//! | antenna | period 1 | period 2  |
//! |---------|----------|-----------|
//! | 1       | `S1`     | `-conj(S2)` |
//! | 2       | `S2`     | `conj(S1)`  |
//!
//! Conjugating a spectrum conjugates and time-reverses its synthesis, which
//! leaves the PAPR unchanged. Peak reduction therefore only has to look at
//! period 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{FrequencyBlock, TimeSignal};

/// `blocks[antenna][period]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlamoutiCodeword {
    blocks: [[FrequencyBlock; 2]; 2],
}

impl AlamoutiCodeword {
    pub fn block(&self, antenna: usize, period: usize) -> &FrequencyBlock {
        &self.blocks[antenna][period]
    }

    pub fn blocks(&self) -> &[[FrequencyBlock; 2]; 2] {
        &self.blocks
    }
}

pub fn alamouti_encode(s1: &FrequencyBlock, s2: &FrequencyBlock) -> Result<AlamoutiCodeword> {
    if s1.len() != s2.len() || s1.n_nominal() != s2.n_nominal() {
        return Err(Error::Input(format!(
            "Alamouti blocks differ in length: {} vs {}",
            s1.len(),
            s2.len()
        )));
    }
    Ok(AlamoutiCodeword {
        blocks: [[s1.clone(), s2.map(|z| -z.conj())], [s2.clone(), s1.conj()]],
    })
}

/// Time-domain counterpart of conjugating a spectrum: `conj(x[(-n) mod M])`.
pub fn conjugate_spectrum(signal: &TimeSignal) -> TimeSignal {
    let x = signal.samples();
    let m = x.len();
    signal.with_samples((0..m).map(|n| x[(m - n) % m].conj()).collect())
}

/// The Alamouti arrangement applied directly to period-1 time signals,
/// `[antenna][period]`. Equivalent to encoding the spectra of `x1`, `x2`
/// and synthesizing each block.
pub fn alamouti_encode_time(x1: &TimeSignal, x2: &TimeSignal) -> Result<[[TimeSignal; 2]; 2]> {
    if x1.len() != x2.len() || x1.oversampling() != x2.oversampling() {
        return Err(Error::Input("Alamouti signals differ in shape".into()));
    }
    let neg_conj2 = conjugate_spectrum(x2).map(|z| -z);
    let conj1 = conjugate_spectrum(x1);
    Ok([[x1.clone(), neg_conj2], [x2.clone(), conj1]])
}

/// Flat gains from transmit antennas 1 and 2 to one receive antenna.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPair {
    pub h1: Complex64,
    pub h2: Complex64,
}

impl ChannelPair {
    pub fn new(h1: Complex64, h2: Complex64) -> Self {
        Self { h1, h2 }
    }

    /// `|h1|^2 + |h2|^2`.
    pub fn gain(&self) -> f64 {
        self.h1.norm_sqr() + self.h2.norm_sqr()
    }
}

/// Alamouti combiner over per-bin received values of both periods.
/// Returns `(|h1|^2+|h2|^2)`-scaled estimates of `S1` and `S2`.
pub fn alamouti_combine(
    r_t1: &[Complex64],
    r_t2: &[Complex64],
    ch: ChannelPair,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if r_t1.len() != r_t2.len() {
        return Err(Error::Input("received periods differ in length".into()));
    }
    if ch.gain() == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let ChannelPair { h1, h2 } = ch;
    let (s1, s2) = r_t1
        .iter()
        .zip(r_t2)
        .map(|(&a, &b)| (h1.conj() * a + h2 * b.conj(), h2.conj() * a - h1 * b.conj()))
        .unzip();
    Ok((s1, s2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::compute_papr;
    use crate::numerics::oversampled_synthesis;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn block(v: Vec<Complex64>) -> FrequencyBlock {
        FrequencyBlock::new(v).unwrap()
    }

    #[test]
    fn single_bin_codeword() {
        let cw = alamouti_encode(&block(vec![c(1., 1.)]), &block(vec![c(-1., 1.)])).unwrap();
        assert_eq!(cw.block(0, 0).bins(), &[c(1., 1.)]);
        assert_eq!(cw.block(1, 0).bins(), &[c(-1., 1.)]);
        assert_eq!(cw.block(0, 1).bins(), &[c(1., 1.)]);
        assert_eq!(cw.block(1, 1).bins(), &[c(1., -1.)]);
    }

    #[test]
    fn zero_second_block() {
        let s1 = block(vec![c(1., 2.), c(3., -1.)]);
        let zero = FrequencyBlock::zeros(2).unwrap();
        let cw = alamouti_encode(&s1, &zero).unwrap();
        assert_eq!(cw.block(0, 0), &s1);
        assert!(cw.block(0, 1).bins().iter().all(|z| z.norm() == 0.0));
        assert!(cw.block(1, 0).bins().iter().all(|z| z.norm() == 0.0));
        assert_eq!(cw.block(1, 1), &s1.conj());
    }

    #[test]
    fn length_mismatch() {
        let e = alamouti_encode(&block(vec![c(1., 0.); 2]), &block(vec![c(1., 0.); 4]));
        assert!(matches!(e, Err(Error::Input(_))));
    }

    #[test]
    fn period_two_papr_matches_period_one() {
        let s1 = block(
            (0..16)
                .map(|k| c((k as f64).cos(), (k * k) as f64 % 3.0))
                .collect(),
        );
        let s2 = block((0..16).map(|k| c(1.0 - k as f64 / 8.0, 0.5)).collect());
        let cw = alamouti_encode(&s1, &s2).unwrap();
        for l in [1, 4] {
            let p11 = compute_papr(&oversampled_synthesis(cw.block(0, 0), l).unwrap()).unwrap();
            let p22 = compute_papr(&oversampled_synthesis(cw.block(1, 1), l).unwrap()).unwrap();
            assert!((p11.linear() - p22.linear()).abs() <= 1e-12 * p11.linear());
        }
    }

    #[test]
    fn time_domain_encoding_matches_frequency_domain() {
        let s1 = block((0..8).map(|k| c(k as f64, 1.0)).collect());
        let s2 = block((0..8).map(|k| c(-1.0, k as f64 * 0.5)).collect());
        let cw = alamouti_encode(&s1, &s2).unwrap();
        let l = 3;
        let x1 = oversampled_synthesis(&s1, l).unwrap();
        let x2 = oversampled_synthesis(&s2, l).unwrap();
        let t = alamouti_encode_time(&x1, &x2).unwrap();
        for (a, periods) in t.iter().enumerate() {
            for (p, sig) in periods.iter().enumerate() {
                let want = oversampled_synthesis(cw.block(a, p), l).unwrap();
                for (u, v) in sig.samples().iter().zip(want.samples()) {
                    assert!((u - v).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn combine_identity_and_swap() {
        let s1 = [c(1., 2.), c(-0.5, 0.3)];
        let s2 = [c(0.2, -1.), c(4., 0.)];
        for (h1, h2) in [(c(1., 0.), c(0., 0.)), (c(0., 0.), c(1., 0.))] {
            let r1: Vec<_> = (0..2).map(|i| h1 * s1[i] + h2 * s2[i]).collect();
            let r2: Vec<_> = (0..2)
                .map(|i| -h1 * s2[i].conj() + h2 * s1[i].conj())
                .collect();
            let (e1, e2) = alamouti_combine(&r1, &r2, ChannelPair::new(h1, h2)).unwrap();
            for i in 0..2 {
                assert!((e1[i] - s1[i]).norm() < 1e-15);
                assert!((e2[i] - s2[i]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn combine_degenerate() {
        let z = c(0., 0.);
        assert!(matches!(
            alamouti_combine(&[z], &[z], ChannelPair::new(z, z)),
            Err(Error::DegenerateChannel)
        ));
    }
}
