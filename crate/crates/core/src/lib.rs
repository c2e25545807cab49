//! Baseband simulation of a 2×2 Alamouti-coded MIMO-OFDM transmitter and
//! the three classic peak-to-average power ratio (PAPR) reduction schemes:
//! clipping and filtering, selected mapping (SLM) and partial transmit
//! sequences (PTS).
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`] holds the unitary DFT pair and zero-padded oversampling.
//! * [`modem`] generates bits, maps QPSK and places symbols on subcarriers.
//! * [`stbc`] is the block-level Alamouti encoder and combiner.
//! * [`metrics`] computes PAPR and CCDF curves, empirical and closed form.
//! * [`reduction`] implements the PAPR reduction techniques and their inverses.
//! * [`link`] strings everything into transmit/channel/receive frames.
//! * [`harness`] drives reproducible Monte Carlo CCDF experiments.
//! * [`selftest`] re-derives worked examples with brute-force oracles.
//!
//! ```
//! use papr_core::harness::{run_ccdf_experiment, SimConfig};
//! use papr_core::link::Method;
//!
//! let mut cfg = SimConfig::default();
//! cfg.n = 64;
//! cfg.n_used = Some(37);
//! cfg.oversample = 2;
//! cfg.n_symbols = 20;
//! cfg.methods = vec![Method::None, Method::Slm];
//! let results = run_ccdf_experiment(&cfg).unwrap();
//! assert_eq!(results.transmit.len(), 2);
//! ```

pub mod error;
pub mod harness;
pub mod link;
pub mod metrics;
pub mod modem;
pub mod numerics;
pub mod reduction;
pub mod selftest;
pub mod stbc;

pub use error::{Error, Result};
pub use num_complex::Complex64;

// The guide under `book/` is compiled as doc-tests so its snippets cannot rot.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/transforms.md")]
    struct Transforms;
    #[doc = include_str!("../../../book/src/alamouti.md")]
    struct Alamouti;
    #[doc = include_str!("../../../book/src/papr-ccdf.md")]
    struct PaprCcdf;
    #[doc = include_str!("../../../book/src/clipping.md")]
    struct Clipping;
    #[doc = include_str!("../../../book/src/slm-pts.md")]
    struct SlmPts;
    #[doc = include_str!("../../../book/src/experiments.md")]
    struct Experiments;
}
