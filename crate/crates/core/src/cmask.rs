//! Masking classical bits in Bell-state phases.
//!
//! Bit `b` becomes `(|00⟩ + (−1)^b |11⟩)/√2`. Both encodings have the
//! maximally mixed state as their marginal on either qubit, so the value is
//! carried only by the correlations and is recovered by a joint Bell-basis
//! measurement.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::qcore::{
    self, bell_projection, bell_states, maximally_mixed, trace_distance, CVector, Dims, QError,
    Subsystem,
};

/// Default probability slack accepted when decoding a Bell pair.
pub const DEFAULT_DECODE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaskError {
    #[error("pair is neither Φ+ nor Φ−: Bell probabilities {probabilities:?}")]
    AmbiguousState { probabilities: [f64; 4] },
    #[error("pair {position} does not decode")]
    AtPosition {
        position: usize,
        #[source]
        source: Box<MaskError>,
    },
    #[error(transparent)]
    Linalg(#[from] QError),
}

impl MaskError {
    /// Register position of the failing pair, when known.
    pub fn position(&self) -> Option<usize> {
        match self {
            MaskError::AtPosition { position, .. } => Some(*position),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid bit {found:?} at position {position}")]
pub struct ParseBitsError {
    pub position: usize,
    pub found: char,
}

/// Ordered sequence of classical bits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// The low `width` bits of `value`, most significant first.
    pub fn from_uint(value: u64, width: usize) -> Self {
        Self(
            (0..width)
                .rev()
                .map(|k| k < 64 && (value >> k) & 1 == 1)
                .collect(),
        )
    }

    /// Big-endian value; `None` if a set bit lies beyond 64 positions.
    pub fn to_uint(&self) -> Option<u64> {
        let mut v: u64 = 0;
        for &b in &self.0 {
            if v >> 63 == 1 {
                return None;
            }
            v = (v << 1) | u64::from(b);
        }
        Some(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn split_at(&self, mid: usize) -> (BitString, BitString) {
        let (a, b) = self.0.split_at(mid);
        (BitString(a.to_vec()), BitString(b.to_vec()))
    }

    /// Copy with the listed positions inverted. Panics on an out-of-range position.
    pub fn flipped(&self, positions: &[usize]) -> BitString {
        let mut out = self.clone();
        for &p in positions {
            out.0[p] = !out.0[p];
        }
        out
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(position, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                found => Err(ParseBitsError { position, found }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One Bell pair per masked bit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CVector>", into = "Vec<CVector>")]
pub struct MaskedRegister {
    pairs: Vec<CVector>,
}

impl MaskedRegister {
    /// Wraps arbitrary 4-dimensional pairs (e.g. a register read back from disk).
    pub fn from_pairs(pairs: Vec<CVector>) -> Result<Self, MaskError> {
        for (position, p) in pairs.iter().enumerate() {
            if p.dim() != 4 {
                return Err(MaskError::AtPosition {
                    position,
                    source: Box::new(
                        QError::DimensionMismatch {
                            expected: 4,
                            found: p.dim(),
                        }
                        .into(),
                    ),
                });
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[CVector] {
        &self.pairs
    }

    pub fn pairs_mut(&mut self) -> &mut [CVector] {
        &mut self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl TryFrom<Vec<CVector>> for MaskedRegister {
    type Error = MaskError;

    fn try_from(pairs: Vec<CVector>) -> Result<Self, MaskError> {
        Self::from_pairs(pairs)
    }
}

impl From<MaskedRegister> for Vec<CVector> {
    fn from(r: MaskedRegister) -> Self {
        r.pairs
    }
}

pub fn encode_bit(bit: bool) -> CVector {
    let [phi_plus, phi_minus, ..] = bell_states();
    if bit {
        phi_minus
    } else {
        phi_plus
    }
}

pub fn mask_string(s: &BitString) -> MaskedRegister {
    MaskedRegister {
        pairs: s.bits().iter().map(|&b| encode_bit(b)).collect(),
    }
}

/// Projective Bell-basis readout of a single pair.
pub fn decode_bit(pair: &CVector, tol: f64) -> Result<bool, MaskError> {
    let probabilities = bell_projection(pair)?;
    if probabilities[0] >= 1.0 - tol {
        Ok(false)
    } else if probabilities[1] >= 1.0 - tol {
        Ok(true)
    } else {
        Err(MaskError::AmbiguousState { probabilities })
    }
}

pub fn unmask_string(r: &MaskedRegister, tol: f64) -> Result<BitString, MaskError> {
    r.pairs
        .iter()
        .enumerate()
        .map(|(position, pair)| {
            decode_bit(pair, tol).map_err(|e| MaskError::AtPosition {
                position,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(BitString)
}

/// Worst trace distance between any single-qubit marginal in the register
/// and `I/2`. Zero for an empty register.
pub fn marginal_audit(r: &MaskedRegister) -> f64 {
    let half = maximally_mixed(2);
    let mut worst: f64 = 0.0;
    for pair in &r.pairs {
        for side in Subsystem::BOTH {
            let m = qcore::marginal(pair, Dims::qubits(), side)
                .expect("register pairs are 4-dimensional");
            let d = trace_distance(&m, &half).unwrap_or(f64::INFINITY);
            worst = worst.max(d);
        }
    }
    worst
}
