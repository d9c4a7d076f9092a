//! Classical descriptions of known states.
//!
//! A qubit is written as `cos α |0⟩ + e^{iθ} sin α |1⟩` with α ∈ [0, π/2] and
//! θ ∈ [0, 2π). Free parameters are serialized with a uniform fixed-point
//! quantizer (big-endian bin index, midpoint reconstruction); states drawn
//! from a finite alphabet are serialized exactly by their index.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmask::BitString;
use crate::qcore::{CVector, QError, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("alpha = {0} is outside [0, π/2]")]
    AlphaOutOfRange(f64),
    #[error("parameter is not finite")]
    NotFinite,
    #[error("precision must be between 1 and 64 bits, got {0}")]
    InvalidPrecision(u32),
    #[error("expected {expected} bits, got {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("index {index} out of range for an alphabet of {size} states")]
    IndexOutOfRange { index: u64, size: usize },
    #[error("alphabet must contain at least one state")]
    EmptyAlphabet,
    #[error("alphabet entry {index}: {reason}")]
    BadEntry { index: usize, reason: String },
    #[error("malformed alphabet file: {0}")]
    Format(String),
    #[error(transparent)]
    Linalg(#[from] QError),
}

/// `(α, θ)` in canonical ranges, with θ = 0 whenever α sits on an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    alpha: f64,
    theta: f64,
}

fn wrap_phase(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

impl QubitParams {
    /// Validates α, wraps θ into [0, 2π) and applies the endpoint gauge.
    pub fn new(alpha: f64, theta: f64) -> Result<Self, CodecError> {
        if !alpha.is_finite() || !theta.is_finite() {
            return Err(CodecError::NotFinite);
        }
        if !(0.0..=FRAC_PI_2).contains(&alpha) {
            return Err(CodecError::AlphaOutOfRange(alpha));
        }
        let theta = if alpha == 0.0 || alpha == FRAC_PI_2 {
            0.0
        } else {
            wrap_phase(theta)
        };
        Ok(Self { alpha, theta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Circular distance between two phases.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

pub fn state_from_params(p: QubitParams) -> CVector {
    let (s, c) = p.alpha.sin_cos();
    CVector::new(vec![C64::new(c, 0.0), C64::from_polar(s, p.theta)]).expect("two entries")
}

/// Inverse of [`state_from_params`] up to global phase.
pub fn params_from_state(psi: &CVector) -> Result<QubitParams, CodecError> {
    if psi.dim() != 2 {
        return Err(QError::DimensionMismatch {
            expected: 2,
            found: psi.dim(),
        }
        .into());
    }
    psi.require_normalized()?;
    let (a0, a1) = (psi[0], psi[1]);
    let (r0, r1) = (a0.norm(), a1.norm());
    let alpha = r1.atan2(r0);
    let theta = if r0 == 0.0 || r1 == 0.0 {
        0.0
    } else {
        (a1 * a0.conj()).arg()
    };
    QubitParams::new(alpha, theta)
}

/// Fixed-point precision per parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecConfig {
    n_bits: u32,
}

impl CodecConfig {
    pub const MAX_BITS: u32 = 64;

    pub fn new(n_bits: u32) -> Result<Self, CodecError> {
        if (1..=Self::MAX_BITS).contains(&n_bits) {
            Ok(Self { n_bits })
        } else {
            Err(CodecError::InvalidPrecision(n_bits))
        }
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    /// Length of an encoded `(α, θ)` description.
    pub fn encoded_len(&self) -> usize {
        2 * self.n_bits as usize
    }

    fn bins(&self) -> f64 {
        (self.n_bits as f64).exp2()
    }

    fn max_index(&self) -> u64 {
        u64::MAX >> (64 - self.n_bits)
    }
}

pub fn encode_params(p: QubitParams, c: CodecConfig) -> BitString {
    let bins = c.bins();
    let k_alpha = ((p.alpha / FRAC_PI_2) * bins).floor();
    // `as` saturates, which is the clamp for n = 64
    let k_alpha = (k_alpha as u64).min(c.max_index());
    let mut k_theta = ((p.theta / TAU) * bins).floor();
    if k_theta >= bins {
        k_theta -= bins;
    }
    let k_theta = k_theta as u64;
    let width = c.n_bits as usize;
    let mut out = BitString::from_uint(k_alpha, width);
    out.extend_from(&BitString::from_uint(k_theta, width));
    out
}

pub fn decode_params(s: &BitString, c: CodecConfig) -> Result<QubitParams, CodecError> {
    if s.len() != c.encoded_len() {
        return Err(CodecError::WrongLength {
            expected: c.encoded_len(),
            found: s.len(),
        });
    }
    let (a, t) = s.split_at(c.n_bits as usize);
    let k_alpha = a.to_uint().expect("at most 64 bits") as f64;
    let k_theta = t.to_uint().expect("at most 64 bits") as f64;
    let bins = c.bins();
    let alpha = ((k_alpha + 0.5) * FRAC_PI_2 / bins).clamp(0.0, FRAC_PI_2);
    let theta = (k_theta + 0.5) * TAU / bins;
    QubitParams::new(alpha, theta)
}

/// Encodes a normalized qubit through its `(α, θ)` description.
pub fn describe_state(psi: &CVector, c: CodecConfig) -> Result<BitString, CodecError> {
    Ok(encode_params(params_from_state(psi)?, c))
}

/// Rebuilds the state named by an encoded `(α, θ)` description.
pub fn reconstruct_state(s: &BitString, c: CodecConfig) -> Result<CVector, CodecError> {
    Ok(state_from_params(decode_params(s, c)?))
}

/// Rounding allowance subtracted from the analytic floor so that computed
/// fidelities never dip below it at high precision.
const FIDELITY_ROUNDING_SLACK: f64 = 1e-15;

fn fidelity_floor_uncached(n_bits: u32) -> f64 {
    // Worst-case |α−α'| is half an α bin, worst-case |θ−θ'| is half a θ bin, and
    // F = cos²(Δα) − sin2α·sin2α'·sin²(Δθ/2) ≥ 1 − sin²(Δα) − sin²(Δθ/2).
    let half_alpha_bin = PI / (n_bits as f64 + 2.0).exp2();
    let half_theta_bin_over_2 = PI / (n_bits as f64 + 1.0).exp2();
    let f = 1.0 - half_alpha_bin.sin().powi(2) - half_theta_bin_over_2.sin().powi(2);
    (f - FIDELITY_ROUNDING_SLACK).max(0.0)
}

/// Guaranteed lower bound on the fidelity between any qubit and the state
/// rebuilt from its `n_bits`-per-parameter description.
pub fn reconstruction_fidelity_floor(c: CodecConfig) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        (1..=CodecConfig::MAX_BITS)
            .map(fidelity_floor_uncached)
            .collect()
    });
    table[c.n_bits as usize - 1]
}

/// Finite, indexed set of known states.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    states: Vec<CVector>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AlphabetEntry {
    Params([f64; 2]),
    Vector(Vec<[f64; 2]>),
}

impl Alphabet {
    pub fn new(states: Vec<CVector>) -> Result<Self, CodecError> {
        let first = states.first().ok_or(CodecError::EmptyAlphabet)?;
        let dim = first.dim();
        for (index, s) in states.iter().enumerate() {
            if s.dim() != dim {
                return Err(CodecError::BadEntry {
                    index,
                    reason: format!("dimension {} differs from {dim}", s.dim()),
                });
            }
            if !s.is_normalized() {
                return Err(CodecError::BadEntry {
                    index,
                    reason: format!("norm {} is not 1", s.norm()),
                });
            }
        }
        Ok(Self { states })
    }

    pub fn from_params(params: &[QubitParams]) -> Result<Self, CodecError> {
        Self::new(params.iter().map(|&p| state_from_params(p)).collect())
    }

    /// Parses a JSON array whose entries are `[alpha, theta]` pairs or
    /// complex vectors `[[re, im], ...]`.
    pub fn from_json(text: &str) -> Result<Self, CodecError> {
        let entries: Vec<AlphabetEntry> =
            serde_json::from_str(text).map_err(|e| CodecError::Format(e.to_string()))?;
        let states = entries
            .into_iter()
            .enumerate()
            .map(|(index, e)| match e {
                AlphabetEntry::Params([alpha, theta]) => QubitParams::new(alpha, theta)
                    .map(state_from_params)
                    .map_err(|e| CodecError::BadEntry {
                        index,
                        reason: e.to_string(),
                    }),
                AlphabetEntry::Vector(raw) => {
                    CVector::new(raw.into_iter().map(|[re, im]| C64::new(re, im)).collect())
                        .map_err(|e| CodecError::BadEntry {
                            index,
                            reason: e.to_string(),
                        })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(states)
    }

    /// Vector form, loadable by [`Alphabet::from_json`].
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.states).expect("finite entries")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn states(&self) -> &[CVector] {
        &self.states
    }

    pub fn get(&self, index: usize) -> Option<&CVector> {
        self.states.get(index)
    }

    /// Bits needed for an index: `ceil(log2(size))`.
    pub fn width(&self) -> usize {
        (usize::BITS - (self.states.len() - 1).leading_zeros()) as usize
    }
}

pub fn encode_index(index: usize, a: &Alphabet) -> Result<BitString, CodecError> {
    if index >= a.len() {
        return Err(CodecError::IndexOutOfRange {
            index: index as u64,
            size: a.len(),
        });
    }
    Ok(BitString::from_uint(index as u64, a.width()))
}

pub fn decode_index(s: &BitString, a: &Alphabet) -> Result<usize, CodecError> {
    if s.len() != a.width() {
        return Err(CodecError::WrongLength {
            expected: a.width(),
            found: s.len(),
        });
    }
    let index = s.to_uint().expect("width fits in 64 bits");
    if index >= a.len() as u64 {
        return Err(CodecError::IndexOutOfRange {
            index,
            size: a.len(),
        });
    }
    Ok(index as usize)
}
