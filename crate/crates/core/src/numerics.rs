//! Unitary DFT pair and frequency-domain zero-padded oversampling.
//!
//! Every transform in the crate goes through this module. Both directions
//! carry a `1/sqrt(M)` factor for a length-`M` transform, so energy is
//! preserved and `forward(inverse(X)) == X`.
//!
//! The nominal size `N` must be a power of two. Oversampled lengths `L * N`
//! are transformed exactly at their true length for any `L >= 1`.
//!
//! Oversampling by `L` splits an `N`-bin spectrum at its midpoint, inserts
//! `(L - 1) * N` zeros between bin `N/2 - 1` and bin `N/2`, and rescales the
//! length-`LN` inverse transform by `sqrt(L)`. Sample `n * L` of the result
//! equals sample `n` of the plain `N`-point synthesis, and the mean power
//! does not depend on `L`.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

fn check_pow2(len: usize, key: &str) -> Result<()> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::config(
            key,
            format!("length {len} is not a power of two"),
        ));
    }
    Ok(())
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Input("non-finite sample".into()))
    }
}

/// Subcarrier values of one OFDM symbol.
///
/// `bins.len()` is `N` for a nominal spectrum, or `L * N` for the spectrum of
/// an oversampled signal; `n_nominal` is always `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBlock {
    bins: Vec<Complex64>,
    n_nominal: usize,
}

impl FrequencyBlock {
    /// A nominal block (`n_nominal == bins.len()`). The length must be a
    /// power of two and every entry finite.
    pub fn new(bins: Vec<Complex64>) -> Result<Self> {
        let n = bins.len();
        Self::with_nominal(bins, n)
    }

    pub fn with_nominal(bins: Vec<Complex64>, n_nominal: usize) -> Result<Self> {
        check_pow2(n_nominal, "n")?;
        if bins.is_empty() || !bins.len().is_multiple_of(n_nominal) {
            return Err(Error::Input(format!(
                "{} bins is not a multiple of nominal size {n_nominal}",
                bins.len()
            )));
        }
        check_finite(&bins)?;
        Ok(Self { bins, n_nominal })
    }

    /// Same nominal size, new bin values.
    pub(crate) fn with_bins(&self, bins: Vec<Complex64>) -> Self {
        debug_assert_eq!(bins.len(), self.bins.len());
        Self {
            bins,
            n_nominal: self.n_nominal,
        }
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn into_bins(self) -> Vec<Complex64> {
        self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn n_nominal(&self) -> usize {
        self.n_nominal
    }

    /// Elementwise complex conjugate.
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            bins: self.bins.iter().map(|&z| f(z)).collect(),
            n_nominal: self.n_nominal,
        }
    }

    /// `sum |X_k|^2`.
    pub fn energy(&self) -> f64 {
        self.bins.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Time samples of one OFDM symbol at oversampling factor `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    samples: Vec<Complex64>,
    oversampling: usize,
    n_nominal: usize,
}

impl TimeSignal {
    pub fn new(samples: Vec<Complex64>, oversampling: usize) -> Result<Self> {
        if oversampling == 0 {
            return Err(Error::config("oversample", "must be at least 1"));
        }
        if samples.is_empty() || !samples.len().is_multiple_of(oversampling) {
            return Err(Error::Input(format!(
                "{} samples is not a positive multiple of L = {oversampling}",
                samples.len()
            )));
        }
        let n_nominal = samples.len() / oversampling;
        check_pow2(n_nominal, "n")?;
        check_finite(&samples)?;
        Ok(Self {
            samples,
            oversampling,
            n_nominal,
        })
    }

    /// Same shape as `self`, new sample values.
    pub(crate) fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(samples.len(), self.samples.len());
        Self {
            samples,
            oversampling: self.oversampling,
            n_nominal: self.n_nominal,
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    pub fn n_nominal(&self) -> usize {
        self.n_nominal
    }

    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        self.with_samples(self.samples.iter().map(|&z| f(z)).collect())
    }
}

fn check_nonempty(len: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::Input("empty transform".into()));
    }
    Ok(())
}

/// In-place unitary inverse DFT at the exact slice length.
pub fn ifft_unitary(buf: &mut [Complex64]) -> Result<()> {
    check_nonempty(buf.len())?;
    plan(buf.len(), true).process(buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= scale);
    Ok(())
}

/// In-place unitary forward DFT at the exact slice length.
pub fn fft_unitary(buf: &mut [Complex64]) -> Result<()> {
    check_nonempty(buf.len())?;
    plan(buf.len(), false).process(buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= scale);
    Ok(())
}

/// `x(n) = 1/sqrt(N) * sum_k X_k exp(j 2 pi k n / N)`.
pub fn inverse_transform(block: &FrequencyBlock) -> Result<TimeSignal> {
    let mut buf = block.bins.clone();
    ifft_unitary(&mut buf)?;
    let oversampling = block.len() / block.n_nominal;
    Ok(TimeSignal {
        samples: buf,
        oversampling,
        n_nominal: block.n_nominal,
    })
}

/// Unitary analysis transform over the full length of `signal`; the exact
/// inverse of [`inverse_transform`].
pub fn forward_transform(signal: &TimeSignal) -> Result<FrequencyBlock> {
    let mut buf = signal.samples.clone();
    fft_unitary(&mut buf)?;
    Ok(FrequencyBlock {
        bins: buf,
        n_nominal: signal.n_nominal,
    })
}

/// Position of nominal bin `k` inside the zero-padded length-`L*N` spectrum.
#[inline]
pub fn padded_index(k: usize, n: usize, oversampling: usize) -> usize {
    if k < n / 2 {
        k
    } else {
        k + (oversampling - 1) * n
    }
}

/// Zero-pad an `N`-bin spectrum to `L*N` bins with the mid-spectrum split.
pub fn pad_spectrum(bins: &[Complex64], oversampling: usize) -> Result<Vec<Complex64>> {
    if oversampling == 0 {
        return Err(Error::config("oversample", "must be at least 1"));
    }
    let n = bins.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n * oversampling];
    for (k, &v) in bins.iter().enumerate() {
        out[padded_index(k, n, oversampling)] = v;
    }
    Ok(out)
}

/// Synthesize `L*N` time samples from an `N`-bin block, interpolating the
/// `L = 1` output. At `L = 1` this is [`inverse_transform`].
pub fn oversampled_synthesis(block: &FrequencyBlock, oversampling: usize) -> Result<TimeSignal> {
    if block.len() != block.n_nominal {
        return Err(Error::Input(
            "oversampled synthesis expects a nominal N-bin block".into(),
        ));
    }
    let mut buf = pad_spectrum(&block.bins, oversampling)?;
    ifft_unitary(&mut buf)?;
    let gain = (oversampling as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= gain);
    Ok(TimeSignal {
        samples: buf,
        oversampling,
        n_nominal: block.n_nominal,
    })
}

/// Recover the `N` nominal bins from an oversampled signal. Exact inverse of
/// [`oversampled_synthesis`] for band-limited input; energy outside the
/// nominal band is discarded.
pub fn oversampled_analysis(signal: &TimeSignal) -> Result<FrequencyBlock> {
    let spectrum = forward_transform(signal)?;
    let n = signal.n_nominal;
    let l = signal.oversampling;
    let gain = 1.0 / (l as f64).sqrt();
    let bins = (0..n)
        .map(|k| spectrum.bins[padded_index(k, n, l)] * gain)
        .collect();
    FrequencyBlock::new(bins)
}
