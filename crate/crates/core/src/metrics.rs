//! PAPR, its MIMO aggregate, and CCDF curves.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::TimeSignal;

/// Peak-to-average power ratio. Stored linear, reported in dB.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PaprValue {
    linear: f64,
}

impl PaprValue {
    pub fn from_linear(linear: f64) -> Result<Self> {
        if !(linear.is_finite() && linear >= 0.0) {
            return Err(Error::Input(format!("invalid PAPR {linear}")));
        }
        Ok(Self { linear })
    }

    pub fn linear(&self) -> f64 {
        self.linear
    }

    pub fn db(&self) -> f64 {
        10.0 * self.linear.log10()
    }
}

/// `max |x|^2 / mean |x|^2` over raw samples.
pub fn papr_of(samples: &[Complex64]) -> Result<PaprValue> {
    let mut peak = 0.0f64;
    let mut total = 0.0f64;
    for z in samples {
        let p = z.norm_sqr();
        peak = peak.max(p);
        total += p;
    }
    if total == 0.0 {
        return Err(Error::UndefinedPapr);
    }
    Ok(PaprValue {
        linear: peak * samples.len() as f64 / total,
    })
}

pub fn compute_papr(signal: &TimeSignal) -> Result<PaprValue> {
    papr_of(signal.samples())
}

/// System PAPR of a multi-antenna transmitter: the largest per-antenna value.
pub fn mimo_papr(values: &[PaprValue]) -> Result<PaprValue> {
    values
        .iter()
        .copied()
        .reduce(|a, b| if b.linear > a.linear { b } else { a })
        .ok_or_else(|| Error::Input("no antennas to aggregate".into()))
}

/// `Pr(PAPR > threshold)` on an ascending grid of thresholds in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcdfCurve {
    pub thresholds_db: Vec<f64>,
    pub probs: Vec<f64>,
    pub n_samples: usize,
}

impl CcdfCurve {
    /// Build from integer exceedance counts.
    pub fn from_counts(
        thresholds_db: Vec<f64>,
        counts: &[usize],
        n_samples: usize,
    ) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::Input("CCDF of zero samples".into()));
        }
        if counts.len() != thresholds_db.len() {
            return Err(Error::Input("count/threshold length mismatch".into()));
        }
        let probs = counts
            .iter()
            .map(|&c| c as f64 / n_samples as f64)
            .collect();
        Ok(Self {
            thresholds_db,
            probs,
            n_samples,
        })
    }

    /// Smallest grid threshold whose exceedance probability is `<= p`.
    pub fn threshold_at(&self, p: f64) -> Option<f64> {
        self.thresholds_db
            .iter()
            .zip(&self.probs)
            .find(|(_, &q)| q <= p)
            .map(|(&t, _)| t)
    }
}

fn check_ascending(thresholds_db: &[f64]) -> Result<()> {
    if thresholds_db
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::Input("thresholds must be strictly ascending".into()));
    }
    Ok(())
}

/// `count(samples > t)` for each threshold `t`.
pub fn exceedance_counts(samples_db: &[f64], thresholds_db: &[f64]) -> Vec<usize> {
    let mut sorted = samples_db.to_vec();
    sorted.sort_by(f64::total_cmp);
    thresholds_db
        .iter()
        .map(|&t| sorted.len() - sorted.partition_point(|&s| s <= t))
        .collect()
}

pub fn empirical_ccdf(samples_db: &[f64], thresholds_db: &[f64]) -> Result<CcdfCurve> {
    if samples_db.is_empty() {
        return Err(Error::Input(
            "empirical CCDF needs at least one sample".into(),
        ));
    }
    check_ascending(thresholds_db)?;
    let counts = exceedance_counts(samples_db, thresholds_db);
    CcdfCurve::from_counts(thresholds_db.to_vec(), &counts, samples_db.len())
}

/// The smallest sample value `t` with `count(samples > t) / n <= p`.
///
/// This is the resolution-limited PAPR level "at probability `p`" used to
/// compare curves without grid quantisation.
pub fn threshold_at_probability(samples_db: &[f64], p: f64) -> Result<f64> {
    if samples_db.is_empty() {
        return Err(Error::Input("no samples".into()));
    }
    let mut sorted = samples_db.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let allowed = (p * n as f64 + 1e-9).floor() as usize;
    let idx = n.saturating_sub(allowed + 1);
    Ok(sorted[idx])
}

/// `1 - (1 - exp(-g))^(n_tx * n)` with `g = 10^(threshold_db / 10)`: the
/// exceedance probability of the largest of `n_tx * n` independent
/// unit-mean exponential sample powers.
pub fn theoretical_ccdf(n: usize, n_tx: usize, threshold_db: f64) -> f64 {
    let gamma = 10f64.powf(threshold_db / 10.0);
    let exponent = (n * n_tx) as f64;
    -(exponent * (-(-gamma).exp()).ln_1p()).exp_m1()
}
