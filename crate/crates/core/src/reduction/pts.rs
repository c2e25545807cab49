use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_alphabet, quadrature_phases, Reduced, SideInfo};
use crate::error::{Error, Result};
use crate::metrics::{papr_of, PaprValue};
use crate::modem::CarrierMap;
use crate::numerics::{oversampled_synthesis, FrequencyBlock, TimeSignal};

/// How occupied carriers are dealt out to sub-blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionScheme {
    /// Consecutive runs of occupied carriers; the last run absorbs any
    /// remainder.
    Adjacent,
    /// Carrier `i` goes to sub-block `i mod V`.
    Interleaved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchStrategy {
    /// All `|alphabet|^(V-1)` phase vectors.
    Exhaustive,
    /// One coordinate pass over sub-blocks `2..=V`.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtsPlan {
    pub v_count: usize,
    pub scheme: PartitionScheme,
    pub alphabet: Vec<Complex64>,
    pub strategy: SearchStrategy,
}

impl Default for PtsPlan {
    fn default() -> Self {
        Self {
            v_count: 8,
            scheme: PartitionScheme::Adjacent,
            alphabet: quadrature_phases(),
            strategy: SearchStrategy::Greedy,
        }
    }
}

impl PtsPlan {
    pub fn validate(&self, n_used: usize) -> Result<()> {
        if self.v_count == 0 || self.v_count > n_used {
            return Err(Error::config(
                "pts-subblocks",
                format!("need 1 <= V <= {n_used}, got {}", self.v_count),
            ));
        }
        check_alphabet(&self.alphabet, "pts-alphabet")?;
        if !self.alphabet.contains(&Complex64::new(1.0, 0.0)) {
            return Err(Error::config("pts-alphabet", "alphabet must contain 1"));
        }
        Ok(())
    }

    /// Sub-block owning the `pos`-th occupied carrier.
    pub fn subblock_of(&self, pos: usize, n_used: usize) -> usize {
        match self.scheme {
            PartitionScheme::Adjacent => (pos / (n_used / self.v_count)).min(self.v_count - 1),
            PartitionScheme::Interleaved => pos % self.v_count,
        }
    }
}

/// One unit-modulus factor per sub-block, the first fixed at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct PhaseVector(Vec<Complex64>);

impl PhaseVector {
    pub fn new(b: Vec<Complex64>) -> Result<Self> {
        if b.first() != Some(&Complex64::new(1.0, 0.0)) {
            return Err(Error::SideInfo("phase vector must start with 1".into()));
        }
        if b.iter().any(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::SideInfo("phase factor is not unit modulus".into()));
        }
        Ok(Self(b))
    }

    pub fn ones(v: usize) -> Self {
        Self(vec![Complex64::new(1.0, 0.0); v])
    }

    pub fn factors(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<Complex64>> for PhaseVector {
    type Error = Error;
    fn try_from(b: Vec<Complex64>) -> Result<Self> {
        Self::new(b)
    }
}

impl From<PhaseVector> for Vec<Complex64> {
    fn from(p: PhaseVector) -> Self {
        p.0
    }
}

fn check_shapes(block: &FrequencyBlock, plan: &PtsPlan, map: &CarrierMap) -> Result<()> {
    if block.len() != map.n_total() {
        return Err(Error::Input(format!(
            "block of {} bins against a {}-carrier map",
            block.len(),
            map.n_total()
        )));
    }
    plan.validate(map.n_used())
}

/// Split `block` into `V` length-`N` blocks over disjoint sets of occupied
/// carriers. The blocks sum to `block` on the occupied set.
pub fn partition_subblocks(
    block: &FrequencyBlock,
    plan: &PtsPlan,
    map: &CarrierMap,
) -> Result<Vec<FrequencyBlock>> {
    check_shapes(block, plan, map)?;
    let n_used = map.n_used();
    let mut parts = vec![vec![Complex64::new(0.0, 0.0); map.n_total()]; plan.v_count];
    for (pos, &k) in map.occupied().iter().enumerate() {
        parts[plan.subblock_of(pos, n_used)][k] = block.bins()[k];
    }
    parts.into_iter().map(FrequencyBlock::new).collect()
}

/// `sum_v b_v * x_v`, accumulated left to right from `v = 0`.
fn combine(parts: &[Vec<Complex64>], b: &[Complex64]) -> Vec<Complex64> {
    let mut acc = parts[0].iter().map(|&z| b[0] * z).collect::<Vec<_>>();
    for (x, &bv) in parts.iter().zip(b).skip(1) {
        acc.iter_mut().zip(x).for_each(|(a, &z)| *a += bv * z);
    }
    acc
}

struct Exhaustive<'a> {
    parts: &'a [Vec<Complex64>],
    alphabet: &'a [Complex64],
    current: Vec<Complex64>,
    best: Option<(f64, Vec<Complex64>)>,
}

impl Exhaustive<'_> {
    // prefix[d] holds sum_{v <= d} b_v x_v in the same order as `combine`.
    fn descend(&mut self, depth: usize, prefix: &[Complex64]) -> Result<()> {
        if depth == self.parts.len() {
            let papr = papr_of(prefix)?.linear();
            if self.best.as_ref().is_none_or(|(p, _)| papr < *p) {
                self.best = Some((papr, self.current.clone()));
            }
            return Ok(());
        }
        let mut next = vec![Complex64::new(0.0, 0.0); prefix.len()];
        for i in 0..self.alphabet.len() {
            let a = self.alphabet[i];
            self.current[depth] = a;
            for ((n, &p), &x) in next.iter_mut().zip(prefix).zip(&self.parts[depth]) {
                *n = p + a * x;
            }
            self.descend(depth + 1, &next)?;
        }
        Ok(())
    }
}

fn greedy(parts: &[Vec<Complex64>], alphabet: &[Complex64]) -> Result<Vec<Complex64>> {
    let v_count = parts.len();
    let mut b = vec![Complex64::new(1.0, 0.0); v_count];
    let mut current = combine(parts, &b);
    let mut candidate = vec![Complex64::new(0.0, 0.0); current.len()];
    for v in 1..v_count {
        let mut best: Option<(f64, Complex64)> = None;
        for &a in alphabet {
            let delta = a - b[v];
            for ((c, &s), &x) in candidate.iter_mut().zip(&current).zip(&parts[v]) {
                *c = s + delta * x;
            }
            let papr = papr_of(&candidate)?.linear();
            if best.is_none_or(|(p, _)| papr < p) {
                best = Some((papr, a));
            }
        }
        let (_, a) = best.expect("alphabet is non-empty");
        let delta = a - b[v];
        current
            .iter_mut()
            .zip(&parts[v])
            .for_each(|(s, &x)| *s += delta * x);
        b[v] = a;
    }
    Ok(b)
}

/// Search phase factors for the `V` partial sequences, with `b_1 = 1`.
///
/// Each sub-block is synthesized once; candidates are linear combinations
/// of those `V` signals. Ties go to the earliest candidate: lexicographic
/// over `b_2..b_V` in alphabet order for the exhaustive search, alphabet
/// order per coordinate for the greedy pass.
pub fn pts_optimize(
    block: &FrequencyBlock,
    plan: &PtsPlan,
    map: &CarrierMap,
    l: usize,
) -> Result<Reduced> {
    let subblocks = partition_subblocks(block, plan, map)?;
    let parts = subblocks
        .iter()
        .map(|x| oversampled_synthesis(x, l).map(|s| s.into_samples()))
        .collect::<Result<Vec<_>>>()?;

    let b = match plan.strategy {
        SearchStrategy::Greedy => greedy(&parts, &plan.alphabet)?,
        SearchStrategy::Exhaustive => {
            let mut search = Exhaustive {
                parts: &parts,
                alphabet: &plan.alphabet,
                current: vec![Complex64::new(1.0, 0.0); parts.len()],
                best: None,
            };
            search.descend(1, &parts[0])?;
            search.best.expect("search space is non-empty").1
        }
    };

    let samples = combine(&parts, &b);
    let papr: PaprValue = papr_of(&samples)?;

    let signal = TimeSignal::new(samples, l)?;
    let rotated = block.with_bins(rotate(block.bins(), plan, map, &b, false));
    Ok(Reduced {
        signal,
        block: rotated,
        side: SideInfo::Pts {
            phases: PhaseVector(b),
        },
        papr,
    })
}

/// Multiply every occupied bin by `b_v` (or `conj(b_v)`) of its sub-block.
fn rotate(
    bins: &[Complex64],
    plan: &PtsPlan,
    map: &CarrierMap,
    b: &[Complex64],
    conjugate: bool,
) -> Vec<Complex64> {
    let mut out = bins.to_vec();
    for (pos, &k) in map.occupied().iter().enumerate() {
        let f = b[plan.subblock_of(pos, map.n_used())];
        out[k] *= if conjugate { f.conj() } else { f };
    }
    out
}

/// Undo the transmit-side rotation on the occupied-carrier symbols.
pub fn pts_invert(
    symbols: &[Complex64],
    plan: &PtsPlan,
    map: &CarrierMap,
    side: &SideInfo,
) -> Result<Vec<Complex64>> {
    let SideInfo::Pts { phases } = side else {
        return Err(Error::SideInfo(format!(
            "expected PTS side information, got {side:?}"
        )));
    };
    if phases.len() != plan.v_count {
        return Err(Error::SideInfo(format!(
            "phase vector of length {} for V = {}",
            phases.len(),
            plan.v_count
        )));
    }
    if symbols.len() != map.n_used() {
        return Err(Error::Input(
            "symbol count does not match carrier map".into(),
        ));
    }
    Ok(symbols
        .iter()
        .enumerate()
        .map(|(pos, y)| y * phases.0[plan.subblock_of(pos, map.n_used())].conj())
        .collect())
}
