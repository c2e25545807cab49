//! PAPR reduction: clipping and filtering, selected mapping (SLM) and
//! partial transmit sequences (PTS), with the receiver-side inverses of the
//! two distortionless schemes.
//!
//! SLM and PTS both keep the unmodified block in their search space, so the
//! selected PAPR never exceeds that of the input.

mod clip;
mod pts;
mod slm;

pub use clip::{clip_and_filter, clip_signal, filter_out_of_band, ClipConfig};
pub use pts::{
    partition_subblocks, pts_invert, pts_optimize, PartitionScheme, PhaseVector, PtsPlan,
    SearchStrategy,
};
pub use slm::{slm_invert, slm_select, SlmCodebook};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::PaprValue;
use crate::numerics::{FrequencyBlock, TimeSignal};

/// The phase set `{1, -1, j, -j}`.
pub fn quadrature_phases() -> Vec<Complex64> {
    vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ]
}

pub(crate) fn check_alphabet(alphabet: &[Complex64], key: &str) -> Result<()> {
    if alphabet.is_empty() {
        return Err(Error::config(key, "phase alphabet is empty"));
    }
    if let Some(z) = alphabet.iter().find(|z| (z.norm() - 1.0).abs() > 1e-12) {
        return Err(Error::config(
            key,
            format!("phase factor {z} is not unit modulus"),
        ));
    }
    Ok(())
}

/// What the receiver needs to undo the transmit-side rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum SideInfo {
    None,
    Clip,
    Slm { route: usize },
    Pts { phases: PhaseVector },
}

/// Result of a peak-reduction search on one frequency block.
#[derive(Debug, Clone)]
pub struct Reduced {
    /// Oversampled time signal of the selected candidate.
    pub signal: TimeSignal,
    /// The selected candidate's nominal spectrum.
    pub block: FrequencyBlock,
    pub side: SideInfo,
    pub papr: PaprValue,
}
