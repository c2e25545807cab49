//! Transmit chain, flat channel and receiver for STBC MIMO-OFDM frames.
//!
//! With two transmit antennas a frame carries two data blocks over two
//! symbol periods. Peak reduction runs on the period-1 blocks; period 2 is
//! the Alamouti rearrangement of whatever period 1 sent. With one transmit
//! antenna a frame is a single SISO OFDM symbol.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{RandomStream, SimConfig};
use crate::metrics::{compute_papr, mimo_papr, PaprValue};
use crate::modem::{
    extract_from_subcarriers, map_to_subcarriers, qpsk_demodulate, qpsk_modulate, BitBlock,
    CarrierMap,
};
use crate::numerics::{oversampled_analysis, oversampled_synthesis, FrequencyBlock, TimeSignal};
use crate::reduction::{
    clip_and_filter, pts_invert, pts_optimize, slm_invert, slm_select, ClipConfig, PtsPlan,
    SideInfo, SlmCodebook,
};
use crate::stbc::{alamouti_combine, alamouti_encode, alamouti_encode_time, ChannelPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    None,
    Clip,
    Slm,
    Pts,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::None, Method::Clip, Method::Slm, Method::Pts];

    pub fn name(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Clip => "clip",
            Method::Slm => "slm",
            Method::Pts => "pts",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::config("methods", format!("unknown method `{s}`")))
    }
}

/// Time signals of one frame, `signals[antenna][period]`.
#[derive(Debug, Clone)]
pub struct TxFrame {
    pub method: Method,
    pub signals: Vec<Vec<TimeSignal>>,
    /// One entry per data block.
    pub side: Vec<SideInfo>,
    pub bits: Vec<BitBlock>,
}

impl TxFrame {
    /// System PAPR of period 1: the maximum over transmit antennas.
    pub fn transmit_papr(&self) -> Result<PaprValue> {
        let per_antenna = self
            .signals
            .iter()
            .map(|periods| compute_papr(&periods[0]))
            .collect::<Result<Vec<_>>>()?;
        mimo_papr(&per_antenna)
    }
}

/// Received signals, `signals[rx_antenna][period]`, and the gains used.
#[derive(Debug, Clone)]
pub struct RxFrame {
    pub signals: Vec<Vec<TimeSignal>>,
    pub channels: Vec<ChannelPair>,
}

/// Everything the transmitter and receiver share for a run: carrier map,
/// oversampling, and the configured reduction parameters.
#[derive(Debug, Clone)]
pub struct Transceiver {
    pub map: CarrierMap,
    pub oversample: usize,
    pub n_tx: usize,
    pub clip: ClipConfig,
    pub codebook: SlmCodebook,
    pub pts: PtsPlan,
}

impl Transceiver {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let cfg = cfg.clone().validated()?;
        let map = CarrierMap::centered(cfg.n, cfg.n_used())?;
        let pts = cfg.pts_plan();
        pts.validate(map.n_used())?;
        Ok(Self {
            codebook: SlmCodebook::build(
                map.n_used(),
                cfg.slm_routes,
                &cfg.slm_alphabet(),
                cfg.seed,
            )?,
            map,
            oversample: cfg.oversample,
            n_tx: cfg.n_tx,
            clip: cfg.clip_config(),
            pts,
        })
    }

    pub fn bits_per_block(&self) -> usize {
        2 * self.map.n_used()
    }

    /// Modulate, map, reduce and arrange one frame. `bits` holds one block
    /// per transmit antenna.
    pub fn transmit_frame(&self, bits: &[BitBlock], method: Method) -> Result<TxFrame> {
        if bits.len() != self.n_tx {
            return Err(Error::Input(format!(
                "{} bit blocks for {} transmit antennas",
                bits.len(),
                self.n_tx
            )));
        }
        let l = self.oversample;
        let mut period1 = Vec::with_capacity(bits.len());
        let mut blocks = Vec::with_capacity(bits.len());
        let mut side = Vec::with_capacity(bits.len());
        for b in bits {
            if b.len() != self.bits_per_block() {
                return Err(Error::Input(format!(
                    "bit block of {} bits, expected {}",
                    b.len(),
                    self.bits_per_block()
                )));
            }
            let symbols = qpsk_modulate(b)?;
            match method {
                Method::None | Method::Clip => {
                    let block = map_to_subcarriers(&symbols, &self.map)?;
                    let mut signal = oversampled_synthesis(&block, l)?;
                    if method == Method::Clip {
                        signal = clip_and_filter(&signal, &self.clip, &self.map)?;
                        side.push(SideInfo::Clip);
                    } else {
                        side.push(SideInfo::None);
                    }
                    period1.push(signal);
                    blocks.push(block);
                }
                Method::Slm => {
                    let r = slm_select(&symbols, &self.codebook, &self.map, l)?;
                    period1.push(r.signal);
                    blocks.push(r.block);
                    side.push(r.side);
                }
                Method::Pts => {
                    let block = map_to_subcarriers(&symbols, &self.map)?;
                    let r = pts_optimize(&block, &self.pts, &self.map, l)?;
                    period1.push(r.signal);
                    blocks.push(r.block);
                    side.push(r.side);
                }
            }
        }

        let signals = if self.n_tx == 1 {
            vec![period1]
        } else if method == Method::Clip {
            // clipping is not a spectral operation; rearrange in time
            alamouti_encode_time(&period1[0], &period1[1])?
                .into_iter()
                .map(Vec::from)
                .collect()
        } else {
            let cw = alamouti_encode(&blocks[0], &blocks[1])?;
            let mut signals = Vec::with_capacity(2);
            for (antenna, sent) in period1.into_iter().enumerate() {
                signals.push(vec![sent, oversampled_synthesis(cw.block(antenna, 1), l)?]);
            }
            signals
        };

        Ok(TxFrame {
            method,
            signals,
            side,
            bits: bits.to_vec(),
        })
    }

    /// Analysis transform, Alamouti combining summed over receive antennas,
    /// rotation removal and hard QPSK decisions.
    pub fn recover_data(&self, rx: &RxFrame, side: &[SideInfo]) -> Result<Vec<BitBlock>> {
        if side.len() != self.n_tx {
            return Err(Error::SideInfo(format!(
                "{} side-information entries for {} blocks",
                side.len(),
                self.n_tx
            )));
        }
        let n = self.map.n_total();
        let mut estimates = vec![vec![Complex64::new(0.0, 0.0); n]; self.n_tx];
        let mut total_gain = 0.0;
        for (periods, ch) in rx.signals.iter().zip(&rx.channels) {
            let spectra = periods
                .iter()
                .map(oversampled_analysis)
                .collect::<Result<Vec<_>>>()?;
            if self.n_tx == 1 {
                let g = ch.h1.norm_sqr();
                if g == 0.0 {
                    continue;
                }
                total_gain += g;
                for (e, r) in estimates[0].iter_mut().zip(spectra[0].bins()) {
                    *e += ch.h1.conj() * r;
                }
            } else {
                if ch.gain() == 0.0 {
                    continue;
                }
                total_gain += ch.gain();
                let (s1, s2) = alamouti_combine(spectra[0].bins(), spectra[1].bins(), *ch)?;
                estimates[0].iter_mut().zip(s1).for_each(|(e, s)| *e += s);
                estimates[1].iter_mut().zip(s2).for_each(|(e, s)| *e += s);
            }
        }
        if total_gain == 0.0 {
            return Err(Error::DegenerateChannel);
        }

        estimates
            .into_iter()
            .zip(side)
            .map(|(est, si)| {
                let block = FrequencyBlock::new(est.into_iter().map(|z| z / total_gain).collect())?;
                let used = extract_from_subcarriers(&block, &self.map)?;
                let symbols = match si {
                    SideInfo::None | SideInfo::Clip => used,
                    SideInfo::Slm { .. } => slm_invert(&used, &self.codebook, si)?,
                    SideInfo::Pts { .. } => pts_invert(&used, &self.pts, &self.map, si)?,
                };
                Ok(qpsk_demodulate(&symbols))
            })
            .collect()
    }
}

/// `r = h1 * x_ant1 + h2 * x_ant2 + noise` per receive antenna and period.
/// Noise is circular complex Gaussian of total power `noise_power`.
pub fn propagate(
    tx: &TxFrame,
    channels: &[ChannelPair],
    noise_power: f64,
    stream: &mut RandomStream,
) -> Result<RxFrame> {
    if !(noise_power >= 0.0 && noise_power.is_finite()) {
        return Err(Error::config("rx-noise-power", "must be finite and >= 0"));
    }
    let periods = tx.signals[0].len();
    let sigma = (noise_power / 2.0).sqrt();
    let mut signals = Vec::with_capacity(channels.len());
    for ch in channels {
        let mut per_period = Vec::with_capacity(periods);
        for p in 0..periods {
            let first = &tx.signals[0][p];
            let mut samples: Vec<Complex64> = first.samples().iter().map(|&x| ch.h1 * x).collect();
            if let Some(second) = tx.signals.get(1) {
                samples
                    .iter_mut()
                    .zip(second[p].samples())
                    .for_each(|(r, &x)| *r += ch.h2 * x);
            }
            if noise_power > 0.0 {
                for r in samples.iter_mut() {
                    let re: f64 = StandardNormal.sample(stream);
                    let im: f64 = StandardNormal.sample(stream);
                    *r += Complex64::new(re, im) * sigma;
                }
            }
            per_period.push(TimeSignal::new(samples, first.oversampling())?);
        }
        signals.push(per_period);
    }
    Ok(RxFrame {
        signals,
        channels: channels.to_vec(),
    })
}

/// Period-1 PAPR of each receive antenna, aggregated by maximum.
pub fn receive_papr(rx: &RxFrame) -> Result<PaprValue> {
    let per_antenna = rx
        .signals
        .iter()
        .map(|periods| compute_papr(&periods[0]))
        .collect::<Result<Vec<_>>>()?;
    mimo_papr(&per_antenna)
}

/// Independent `CN(0, 1)` gains for both transmit antennas.
pub fn rayleigh_channel(stream: &mut RandomStream) -> ChannelPair {
    let mut gain = || {
        let re: f64 = StandardNormal.sample(&mut *stream);
        let im: f64 = StandardNormal.sample(&mut *stream);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    };
    let h1 = gain();
    let h2 = gain();
    ChannelPair::new(h1, h2)
}

/// Gains used for receive-side CCDF runs: every path has gain 1, so each
/// receive antenna sees the plain superposition of both transmit antennas.
pub fn unit_gain_channels(n_rx: usize) -> Vec<ChannelPair> {
    let one = Complex64::new(1.0, 0.0);
    vec![ChannelPair::new(one, one); n_rx]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::generate_bits;

    fn small_config() -> SimConfig {
        SimConfig {
            n: 64,
            n_used: Some(37),
            oversample: 4,
            slm_routes: 4,
            pts_subblocks: 4,
            ..SimConfig::default()
        }
    }

    fn random_bits(t: &Transceiver, id: u64) -> Vec<BitBlock> {
        let mut s = RandomStream::new(1234, id);
        (0..t.n_tx)
            .map(|_| generate_bits(&mut s, t.bits_per_block()))
            .collect()
    }

    #[test]
    fn noiseless_round_trip_all_invertible_methods() {
        let t = Transceiver::new(&small_config()).unwrap();
        let mut s = RandomStream::new(77, 0);
        for id in 0..30 {
            let bits = random_bits(&t, id);
            for method in [Method::None, Method::Slm, Method::Pts] {
                let tx = t.transmit_frame(&bits, method).unwrap();
                let channels = vec![rayleigh_channel(&mut s), rayleigh_channel(&mut s)];
                let rx = propagate(&tx, &channels, 0.0, &mut s).unwrap();
                assert_eq!(t.recover_data(&rx, &tx.side).unwrap(), bits, "{method}");
            }
        }
    }

    #[test]
    fn clipping_distorts_received_symbols() {
        let t = Transceiver::new(&SimConfig::default()).unwrap();
        let channels = unit_gain_channels(1);
        let errors = |method, noise| {
            let mut total = 0;
            for id in 0..100 {
                let bits = random_bits(&t, id);
                let tx = t.transmit_frame(&bits, method).unwrap();
                let rx = propagate(&tx, &channels, noise, &mut RandomStream::new(9, id)).unwrap();
                let got = t.recover_data(&rx, &tx.side).unwrap();
                total += got
                    .iter()
                    .zip(&bits)
                    .map(|(a, b)| a.hamming_distance(b))
                    .sum::<usize>();
            }
            total
        };
        // at 4 dB the distortion alone stays inside the QPSK decision regions
        assert_eq!(errors(Method::Clip, 0.0), 0);
        // but it eats into the noise margin (identical noise draws for both)
        let (none, clip) = (errors(Method::None, 1.0), errors(Method::Clip, 1.0));
        assert!(clip > none, "clip {clip} vs none {none}");
    }

    #[test]
    fn siso_round_trip() {
        let mut cfg = small_config();
        cfg.n_tx = 1;
        cfg.n_rx = 1;
        let t = Transceiver::new(&cfg).unwrap();
        let bits = random_bits(&t, 3);
        assert_eq!(bits.len(), 1);
        for method in [Method::None, Method::Slm, Method::Pts] {
            let tx = t.transmit_frame(&bits, method).unwrap();
            assert_eq!(tx.signals.len(), 1);
            let ch = [ChannelPair::new(
                Complex64::new(0.3, -0.8),
                Complex64::new(0.0, 0.0),
            )];
            let rx = propagate(&tx, &ch, 0.0, &mut RandomStream::new(0, 0)).unwrap();
            assert_eq!(t.recover_data(&rx, &tx.side).unwrap(), bits);
        }
    }

    #[test]
    fn identity_channel_gives_antenna_one() {
        let t = Transceiver::new(&small_config()).unwrap();
        let tx = t.transmit_frame(&random_bits(&t, 1), Method::None).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let rx = propagate(
            &tx,
            &[ChannelPair::new(one, zero)],
            0.0,
            &mut RandomStream::new(0, 0),
        )
        .unwrap();
        assert_eq!(rx.signals[0][0], tx.signals[0][0]);
        assert_eq!(rx.signals[0][1], tx.signals[0][1]);
        assert_eq!(
            receive_papr(&rx).unwrap(),
            compute_papr(&tx.signals[0][0]).unwrap()
        );

        let rx = propagate(
            &tx,
            &[ChannelPair::new(zero, zero)],
            0.0,
            &mut RandomStream::new(0, 0),
        )
        .unwrap();
        assert!(rx.signals[0][0].samples().iter().all(|z| z.norm() == 0.0));
        assert!(matches!(receive_papr(&rx), Err(Error::UndefinedPapr)));
        assert!(matches!(
            t.recover_data(&rx, &tx.side),
            Err(Error::DegenerateChannel)
        ));
    }

    #[test]
    fn noise_power_matches_request() {
        let t = Transceiver::new(&small_config()).unwrap();
        let tx = t.transmit_frame(&random_bits(&t, 1), Method::None).unwrap();
        let zero = Complex64::new(0.0, 0.0);
        let mut s = RandomStream::new(5, 5);
        let p = 0.37;
        let mut acc = 0.0;
        let mut count = 0usize;
        // 512 samples per period, 2 periods per frame
        while count < 100_000 {
            let rx = propagate(&tx, &[ChannelPair::new(zero, zero)], p, &mut s).unwrap();
            for sig in &rx.signals[0] {
                acc += sig.samples().iter().map(|z| z.norm_sqr()).sum::<f64>();
                count += sig.len();
            }
        }
        let est = acc / count as f64;
        assert!((est - p).abs() <= 0.03 * p, "estimated {est}");
    }

    #[test]
    fn propagate_is_linear() {
        let t = Transceiver::new(&small_config()).unwrap();
        let tx = t.transmit_frame(&random_bits(&t, 2), Method::Slm).unwrap();
        let a = Complex64::new(-0.4, 1.7);
        let mut scaled = tx.clone();
        for ant in scaled.signals.iter_mut() {
            for sig in ant.iter_mut() {
                *sig = sig.map(|z| a * z);
            }
        }
        let ch = [ChannelPair::new(
            Complex64::new(0.5, 0.5),
            Complex64::new(-1.0, 0.2),
        )];
        let r1 = propagate(&tx, &ch, 0.0, &mut RandomStream::new(0, 0)).unwrap();
        let r2 = propagate(&scaled, &ch, 0.0, &mut RandomStream::new(0, 0)).unwrap();
        for (x, y) in r1.signals[0][0]
            .samples()
            .iter()
            .zip(r2.signals[0][0].samples())
        {
            assert!((a * x - y).norm() <= 1e-12 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn side_info_mismatch_is_reported() {
        let t = Transceiver::new(&small_config()).unwrap();
        let bits = random_bits(&t, 9);
        let tx = t.transmit_frame(&bits, Method::Slm).unwrap();
        let rx = propagate(
            &tx,
            &unit_gain_channels(2),
            0.0,
            &mut RandomStream::new(0, 0),
        )
        .unwrap();
        assert!(matches!(
            t.recover_data(&rx, &tx.side[..1]),
            Err(Error::SideInfo(_))
        ));
        let bogus = vec![SideInfo::Slm { route: 99 }; 2];
        assert!(matches!(
            t.recover_data(&rx, &bogus),
            Err(Error::SideInfo(_))
        ));
    }

    #[test]
    fn frame_shapes() {
        let t = Transceiver::new(&small_config()).unwrap();
        for method in Method::ALL {
            let tx = t.transmit_frame(&random_bits(&t, 4), method).unwrap();
            assert_eq!(tx.signals.len(), 2);
            for ant in &tx.signals {
                assert_eq!(ant.len(), 2);
                assert!(ant.iter().all(|s| s.len() == 64 * 4));
            }
            // period 2 reuses period-1 peaks
            let p1 = compute_papr(&tx.signals[0][0]).unwrap().linear();
            let p2 = compute_papr(&tx.signals[1][1]).unwrap().linear();
            assert!((p1 - p2).abs() <= 1e-12 * p1);
        }
    }

    #[test]
    fn method_names_parse() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("qam".parse::<Method>().unwrap_err().is_config());
    }
}
