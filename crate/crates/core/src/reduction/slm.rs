use num_complex::Complex64;
use rand::Rng;

use super::{check_alphabet, Reduced, SideInfo};
use crate::error::{Error, Result};
use crate::harness::RandomStream;
use crate::metrics::compute_papr;
use crate::modem::{map_to_subcarriers, CarrierMap};
use crate::numerics::oversampled_synthesis;

/// `U` phase sequences over the occupied carriers. Route 0 is all ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SlmCodebook {
    sequences: Vec<Vec<Complex64>>,
    seed: u64,
}

impl SlmCodebook {
    /// Routes `1..u_count` are i.i.d. uniform draws from `alphabet`,
    /// determined by `seed`.
    pub fn build(n_used: usize, u_count: usize, alphabet: &[Complex64], seed: u64) -> Result<Self> {
        check_alphabet(alphabet, "slm-alphabet")?;
        if u_count == 0 {
            return Err(Error::config("slm-routes", "need at least one route"));
        }
        // trial streams count up from 0; keep the codebook off that range
        let mut rng = RandomStream::new(seed, u64::MAX);
        let mut sequences = vec![vec![Complex64::new(1.0, 0.0); n_used]];
        for _ in 1..u_count {
            sequences.push(
                (0..n_used)
                    .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                    .collect(),
            );
        }
        Ok(Self { sequences, seed })
    }

    /// A codebook from explicit sequences; the first must be all ones.
    pub fn from_sequences(sequences: Vec<Vec<Complex64>>) -> Result<Self> {
        let first = sequences
            .first()
            .ok_or_else(|| Error::config("slm-routes", "need at least one route"))?;
        if first.iter().any(|&b| b != Complex64::new(1.0, 0.0)) {
            return Err(Error::config("slm-routes", "route 0 must be all ones"));
        }
        let n = first.len();
        for seq in &sequences {
            if seq.len() != n {
                return Err(Error::config("slm-routes", "routes differ in length"));
            }
            if seq.iter().any(|b| (b.norm() - 1.0).abs() > 1e-12) {
                return Err(Error::config(
                    "slm-routes",
                    "phase factor is not unit modulus",
                ));
            }
        }
        Ok(Self { sequences, seed: 0 })
    }

    pub fn u_count(&self) -> usize {
        self.sequences.len()
    }

    pub fn n_used(&self) -> usize {
        self.sequences[0].len()
    }

    pub fn route(&self, u: usize) -> &[Complex64] {
        &self.sequences[u]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Try every route and keep the one with the lowest PAPR at oversampling
/// `l`. Ties go to the lowest route index.
pub fn slm_select(
    symbols: &[Complex64],
    codebook: &SlmCodebook,
    map: &CarrierMap,
    l: usize,
) -> Result<Reduced> {
    if symbols.len() != codebook.n_used() || symbols.len() != map.n_used() {
        return Err(Error::Input(format!(
            "{} symbols, codebook over {}, map over {}",
            symbols.len(),
            codebook.n_used(),
            map.n_used()
        )));
    }
    let mut best: Option<Reduced> = None;
    for (u, phases) in codebook.sequences.iter().enumerate() {
        let rotated: Vec<_> = symbols.iter().zip(phases).map(|(x, b)| x * b).collect();
        let block = map_to_subcarriers(&rotated, map)?;
        let signal = oversampled_synthesis(&block, l)?;
        let papr = compute_papr(&signal)?;
        if best
            .as_ref()
            .is_none_or(|b| papr.linear() < b.papr.linear())
        {
            best = Some(Reduced {
                signal,
                block,
                side: SideInfo::Slm { route: u },
                papr,
            });
        }
    }
    Ok(best.expect("codebook has at least one route"))
}

/// Undo route `side.route` by multiplying with the conjugate phases.
pub fn slm_invert(
    symbols: &[Complex64],
    codebook: &SlmCodebook,
    side: &SideInfo,
) -> Result<Vec<Complex64>> {
    let SideInfo::Slm { route } = *side else {
        return Err(Error::SideInfo(format!(
            "expected SLM side information, got {side:?}"
        )));
    };
    if route >= codebook.u_count() {
        return Err(Error::SideInfo(format!(
            "route {route} outside codebook of {}",
            codebook.u_count()
        )));
    }
    if symbols.len() != codebook.n_used() {
        return Err(Error::Input("symbol count does not match codebook".into()));
    }
    Ok(symbols
        .iter()
        .zip(codebook.route(route))
        .map(|(y, b)| y * b.conj())
        .collect())
}
