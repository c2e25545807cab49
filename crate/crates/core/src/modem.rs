//! Bit generation, Gray-coded QPSK and subcarrier placement.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::RandomStream;
use crate::numerics::FrequencyBlock;

/// A block of hard bits, one `u8` (0 or 1) per bit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitBlock {
    bits: Vec<u8>,
}

impl BitBlock {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Input(format!("bit value {b} is not 0 or 1")));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of positions where `self` and `other` differ.
    pub fn hamming_distance(&self, other: &BitBlock) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
            + self.bits.len().abs_diff(other.bits.len())
    }
}

/// Gray-coded QPSK: `00 -> (1+j)`, `01 -> (-1+j)`, `11 -> (-1-j)`,
/// `10 -> (1-j)`, all scaled by `1/sqrt(2)`. The first bit of a pair selects
/// the sign of the imaginary part, the second bit the sign of the real part.
pub fn qpsk_modulate(bits: &BitBlock) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::Input(format!(
            "QPSK needs an even number of bits, got {}",
            bits.len()
        )));
    }
    Ok(bits
        .bits
        .chunks_exact(2)
        .map(|pair| {
            let im = if pair[0] == 0 { 1.0 } else { -1.0 };
            let re = if pair[1] == 0 { 1.0 } else { -1.0 };
            Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        })
        .collect())
}

/// Minimum-distance QPSK decision. Points on an axis decide toward bit 0.
pub fn qpsk_demodulate(symbols: &[Complex64]) -> BitBlock {
    let mut bits = Vec::with_capacity(2 * symbols.len());
    for s in symbols {
        bits.push(u8::from(s.im < 0.0));
        bits.push(u8::from(s.re < 0.0));
    }
    BitBlock { bits }
}

/// Which DFT bins carry data, in the order symbols are placed on them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarrierMap {
    n_total: usize,
    occupied: Vec<usize>,
}

impl CarrierMap {
    /// Centered band `k = -floor((n_used-1)/2) ..= floor(n_used/2)` including
    /// DC, listed from the most negative frequency upward and stored as DFT
    /// indices (`k mod n`).
    pub fn centered(n_total: usize, n_used: usize) -> Result<Self> {
        if n_used == 0 || n_used > n_total {
            return Err(Error::config(
                "n-used",
                format!("must be in 1..={n_total}, got {n_used}"),
            ));
        }
        let lo = ((n_used - 1) / 2) as i64;
        let hi = (n_used / 2) as i64;
        let n = n_total as i64;
        let occupied = (-lo..=hi).map(|k| k.rem_euclid(n) as usize).collect();
        Ok(Self { n_total, occupied })
    }

    /// Every bin, in natural DFT order `0..n`.
    pub fn full(n_total: usize) -> Self {
        Self {
            n_total,
            occupied: (0..n_total).collect(),
        }
    }

    /// An explicit bin list; entries must be distinct and `< n_total`.
    pub fn custom(n_total: usize, occupied: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; n_total];
        for &k in &occupied {
            if k >= n_total || std::mem::replace(&mut seen[k], true) {
                return Err(Error::config(
                    "occupied",
                    format!("bin {k} is out of range or repeated"),
                ));
            }
        }
        if occupied.is_empty() {
            return Err(Error::config("occupied", "no occupied bins"));
        }
        Ok(Self { n_total, occupied })
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn n_used(&self) -> usize {
        self.occupied.len()
    }

    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    /// Per-bin occupancy flags over `0..n_total`.
    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_total];
        for &k in &self.occupied {
            mask[k] = true;
        }
        mask
    }
}

pub fn map_to_subcarriers(symbols: &[Complex64], map: &CarrierMap) -> Result<FrequencyBlock> {
    if symbols.len() != map.n_used() {
        return Err(Error::Input(format!(
            "{} symbols for {} occupied carriers",
            symbols.len(),
            map.n_used()
        )));
    }
    let mut bins = vec![Complex64::new(0.0, 0.0); map.n_total];
    for (&k, &s) in map.occupied.iter().zip(symbols) {
        bins[k] = s;
    }
    FrequencyBlock::new(bins)
}

pub fn extract_from_subcarriers(
    block: &FrequencyBlock,
    map: &CarrierMap,
) -> Result<Vec<Complex64>> {
    if block.len() != map.n_total {
        return Err(Error::Input(format!(
            "block has {} bins, carrier map expects {}",
            block.len(),
            map.n_total
        )));
    }
    Ok(map.occupied.iter().map(|&k| block.bins()[k]).collect())
}

/// `count` uniform bits drawn from `stream`, 64 per draw.
pub fn generate_bits(stream: &mut RandomStream, count: usize) -> BitBlock {
    let mut bits = Vec::with_capacity(count);
    while bits.len() < count {
        let word: u64 = stream.random();
        let take = (count - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    BitBlock { bits }
}
