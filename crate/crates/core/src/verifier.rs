//! Masking criterion for a candidate isometry on a finite set of states.
//!
//! `V` masks `{|a_k⟩}` when every marginal of `V|a_k⟩` is the same for all
//! `k`. The violation score sums squared trace distances between marginals
//! over unordered pairs and both subsystems; it is zero exactly on maskers.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::{
    self, bell_states, trace_distance, CMatrix, CVector, Dims, QError, Subsystem, C64,
};
use crate::scodec::{state_from_params, Alphabet, QubitParams};

/// Tolerance on `V†V = I`.
pub const ISOMETRY_TOL: f64 = 1e-9;

/// Default distinguishability threshold for analytic maskers.
pub const DEFAULT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("isometry matrix is {rows}x{cols}, dims {d_a}x{d_b} require {}x{d_a}", d_a * d_b)]
    Shape {
        rows: usize,
        cols: usize,
        d_a: usize,
        d_b: usize,
    },
    #[error("matrix columns are not orthonormal within {ISOMETRY_TOL:e}")]
    NotIsometry,
    #[error("state {index} has dimension {found}, expected {expected}")]
    StateDim {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("state set is empty")]
    EmptySet,
    #[error("state {0} is not normalized")]
    NotNormalized(usize),
    #[error("malformed isometry file: {0}")]
    Format(String),
    #[error(transparent)]
    Linalg(#[from] QError),
}

/// Linear map `H_A → H_A ⊗ H_B` with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    matrix: CMatrix,
    dims: Dims,
}

#[derive(Serialize, Deserialize)]
struct IsometryFile {
    dims: [usize; 2],
    matrix: CMatrix,
}

impl Isometry {
    pub fn new(matrix: CMatrix, dims: Dims) -> Result<Self, VerifyError> {
        if matrix.rows() != dims.joint() || matrix.cols() != dims.d_a {
            return Err(VerifyError::Shape {
                rows: matrix.rows(),
                cols: matrix.cols(),
                d_a: dims.d_a,
                d_b: dims.d_b,
            });
        }
        if !matrix.is_isometry(ISOMETRY_TOL) {
            return Err(VerifyError::NotIsometry);
        }
        Ok(Self { matrix, dims })
    }

    /// `ψ ↦ ψ ⊗ |0⟩`.
    pub fn canonical_embedding(dims: Dims) -> Self {
        let matrix = CMatrix::from_fn(dims.joint(), dims.d_a, |row, col| {
            if row == col * dims.d_b {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self { matrix, dims }
    }

    /// `|0⟩ ↦ |00⟩`, `|1⟩ ↦ |11⟩`. Masks every fixed-α phase family.
    pub fn diagonal_masker() -> Self {
        let matrix = CMatrix::from_fn(4, 2, |row, col| {
            if row == 3 * col {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self {
            matrix,
            dims: Dims::qubits(),
        }
    }

    /// `|0⟩ ↦ Φ+`, `|1⟩ ↦ Φ−`, the classical-bit masker extended linearly.
    pub fn bell_masker() -> Self {
        let [phi_plus, phi_minus, ..] = bell_states();
        let matrix = CMatrix::from_fn(4, 2, |row, col| {
            if col == 0 {
                phi_plus[row]
            } else {
                phi_minus[row]
            }
        });
        Self {
            matrix,
            dims: Dims::qubits(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn from_json(text: &str) -> Result<Self, VerifyError> {
        let f: IsometryFile =
            serde_json::from_str(text).map_err(|e| VerifyError::Format(e.to_string()))?;
        Self::new(f.matrix, Dims::new(f.dims[0], f.dims[1])?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&IsometryFile {
            dims: [self.dims.d_a, self.dims.d_b],
            matrix: self.matrix.clone(),
        })
        .expect("finite entries")
    }
}

/// Labelled finite set of input states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSet {
    label: String,
    states: Vec<CVector>,
}

impl StateSet {
    pub fn new(label: impl Into<String>, states: Vec<CVector>) -> Result<Self, VerifyError> {
        let dim = states.first().ok_or(VerifyError::EmptySet)?.dim();
        for (index, s) in states.iter().enumerate() {
            if s.dim() != dim {
                return Err(VerifyError::StateDim {
                    index,
                    expected: dim,
                    found: s.dim(),
                });
            }
            if !s.is_normalized() {
                return Err(VerifyError::NotNormalized(index));
            }
        }
        Ok(Self {
            label: label.into(),
            states,
        })
    }

    pub fn from_alphabet(label: impl Into<String>, a: &Alphabet) -> Result<Self, VerifyError> {
        Self::new(label, a.states().to_vec())
    }

    /// `{|0⟩, |1⟩}`.
    pub fn classical() -> Self {
        Self {
            label: "classical".into(),
            states: vec![CVector::basis(2, 0), CVector::basis(2, 1)],
        }
    }

    /// `cos α|0⟩ + e^{iθ} sin α|1⟩` for θ = 2πk/count.
    pub fn phase_family(alpha: f64, count: usize) -> Self {
        let states = (0..count)
            .map(|k| {
                let theta = std::f64::consts::TAU * k as f64 / count as f64;
                state_from_params(QubitParams::new(alpha, theta).expect("alpha in range"))
            })
            .collect();
        Self {
            label: format!("phase-family(alpha={alpha}, count={count})"),
            states,
        }
    }

    /// The preset phase family: α = π/4 and eight phases kπ/4.
    pub fn default_phase_family() -> Self {
        let mut s = Self::phase_family(FRAC_PI_4, 8);
        s.label = "phase-family".into();
        s
    }

    /// The six single-qubit stabilizer states `|0⟩, |1⟩, |±⟩, |±i⟩`.
    pub fn stabilizer() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = |a: C64, b: C64| CVector::new(vec![a, b]).expect("two entries");
        let r = |x: f64| C64::new(x, 0.0);
        let i = |x: f64| C64::new(0.0, x);
        Self {
            label: "stabilizer".into(),
            states: vec![
                v(r(1.0), r(0.0)),
                v(r(0.0), r(1.0)),
                v(r(h), r(h)),
                v(r(h), r(-h)),
                v(r(h), i(h)),
                v(r(h), i(-h)),
            ],
        }
    }

    /// Looks up `classical`, `phase-family` or `stabilizer`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "classical" => Some(Self::classical()),
            "phase-family" => Some(Self::default_phase_family()),
            "stabilizer" => Some(Self::stabilizer()),
            _ => None,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn states(&self) -> &[CVector] {
        &self.states
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
}

pub fn apply_masker(v: &Isometry, psi: &CVector) -> Result<CVector, VerifyError> {
    if psi.dim() != v.dims.d_a {
        return Err(QError::DimensionMismatch {
            expected: v.dims.d_a,
            found: psi.dim(),
        }
        .into());
    }
    Ok(v.matrix.mul_vec(psi)?)
}

/// Per-state marginals `(ρ_A, ρ_B)` of the masked images.
fn image_marginals(v: &Isometry, s: &StateSet) -> Result<Vec<[CMatrix; 2]>, VerifyError> {
    s.states
        .iter()
        .map(|psi| {
            let img = apply_masker(v, psi)?;
            Ok([
                qcore::marginal(&img, v.dims, Subsystem::A)?,
                qcore::marginal(&img, v.dims, Subsystem::B)?,
            ])
        })
        .collect()
}

/// Pairwise marginal distances, calling `visit(j, k, side, distance)`.
fn for_each_pair_distance(
    marginals: &[[CMatrix; 2]],
    mut visit: impl FnMut(usize, usize, Subsystem, f64),
) -> Result<(), VerifyError> {
    for j in 0..marginals.len() {
        for k in j + 1..marginals.len() {
            for (side_idx, side) in Subsystem::BOTH.into_iter().enumerate() {
                let d = trace_distance(&marginals[j][side_idx], &marginals[k][side_idx])?;
                visit(j, k, side, d);
            }
        }
    }
    Ok(())
}

/// `Σ_{j<k} [D(ρ_A^j, ρ_A^k)² + D(ρ_B^j, ρ_B^k)²]`.
pub fn violation(v: &Isometry, s: &StateSet) -> Result<f64, VerifyError> {
    let marginals = image_marginals(v, s)?;
    let mut total = 0.0;
    for_each_pair_distance(&marginals, |_, _, _, d| total += d * d)?;
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskingReport {
    pub is_masker: bool,
    pub eps: f64,
    pub violation: f64,
    pub max_distance: f64,
    pub worst_pair: Option<[usize; 2]>,
    pub worst_side: Option<Subsystem>,
}

/// True iff no pair of inputs is distinguishable on either side beyond `eps`.
pub fn is_masker(v: &Isometry, s: &StateSet, eps: f64) -> Result<MaskingReport, VerifyError> {
    let marginals = image_marginals(v, s)?;
    let mut total = 0.0;
    let mut worst: Option<(f64, [usize; 2], Subsystem)> = None;
    for_each_pair_distance(&marginals, |j, k, side, d| {
        total += d * d;
        if worst.is_none_or(|(w, _, _)| d > w) {
            worst = Some((d, [j, k], side));
        }
    })?;
    let max_distance = worst.map_or(0.0, |w| w.0);
    Ok(MaskingReport {
        is_masker: max_distance <= eps,
        eps,
        violation: total,
        max_distance,
        worst_pair: worst.map(|w| w.1),
        worst_side: worst.map(|w| w.2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus() -> CVector {
        CVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap()
    }

    #[test]
    fn apply_masker_examples() {
        let v = Isometry::canonical_embedding(Dims::qubits());
        assert_eq!(
            apply_masker(&v, &CVector::basis(2, 0)).unwrap(),
            CVector::basis(4, 0)
        );
        let d = Isometry::diagonal_masker();
        assert_eq!(
            apply_masker(&d, &CVector::basis(2, 0)).unwrap(),
            CVector::basis(4, 0)
        );
        assert_eq!(
            apply_masker(&d, &CVector::basis(2, 1)).unwrap(),
            CVector::basis(4, 3)
        );
        let img = apply_masker(&Isometry::bell_masker(), &plus()).unwrap();
        assert_abs_diff_eq!(img.norm(), 1.0, epsilon = 1e-15);
        assert!(apply_masker(&d, &CVector::basis(4, 0)).is_err());
    }

    #[test]
    fn constructors_are_isometries() {
        for v in [
            Isometry::canonical_embedding(Dims::new(2, 4).unwrap()),
            Isometry::diagonal_masker(),
            Isometry::bell_masker(),
        ] {
            assert!(v.matrix().is_isometry(1e-15));
        }
    }

    #[test]
    fn new_rejects_bad_matrices() {
        let dims = Dims::qubits();
        assert!(matches!(
            Isometry::new(CMatrix::identity(4), dims),
            Err(VerifyError::Shape { .. })
        ));
        assert!(matches!(
            Isometry::new(CMatrix::zeros(4, 2), dims),
            Err(VerifyError::NotIsometry)
        ));
    }

    #[test]
    fn violation_examples() {
        let classical = StateSet::classical();
        assert!(violation(&Isometry::bell_masker(), &classical).unwrap() <= 1e-12);
        // A side: D(|0><0|, |1><1|)^2 = 1; B side: both |0><0|
        let j = violation(&Isometry::canonical_embedding(Dims::qubits()), &classical).unwrap();
        assert_abs_diff_eq!(j, 1.0, epsilon = 1e-15);

        let dup = StateSet::new("dup", vec![plus(), plus()]).unwrap();
        assert_eq!(
            violation(&Isometry::canonical_embedding(Dims::qubits()), &dup).unwrap(),
            0.0
        );
    }

    #[test]
    fn is_masker_examples() {
        let r = is_masker(&Isometry::bell_masker(), &StateSet::classical(), 1e-10).unwrap();
        assert!(r.is_masker);

        let r = is_masker(
            &Isometry::canonical_embedding(Dims::qubits()),
            &StateSet::classical(),
            1e-10,
        )
        .unwrap();
        assert!(!r.is_masker);
        assert_eq!(r.worst_side, Some(Subsystem::A));
        assert_eq!(r.worst_pair, Some([0, 1]));

        let single = StateSet::new("single", vec![plus()]).unwrap();
        let r = is_masker(
            &Isometry::canonical_embedding(Dims::qubits()),
            &single,
            1e-10,
        )
        .unwrap();
        assert!(r.is_masker);
        assert_eq!(r.worst_pair, None);
    }

    #[test]
    fn diagonal_masker_hides_phase_but_not_amplitude() {
        let v = Isometry::diagonal_masker();
        assert!(
            is_masker(&v, &StateSet::default_phase_family(), 1e-10)
                .unwrap()
                .is_masker
        );
        // |00> vs (|00>+|11>)/sqrt2: marginals |0><0| vs I/2 on both sides
        let s = StateSet::new("0,+", vec![CVector::basis(2, 0), plus()]).unwrap();
        assert_abs_diff_eq!(violation(&v, &s).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn bell_masker_fails_once_plus_is_added() {
        let s = StateSet::new(
            "0,1,+",
            vec![CVector::basis(2, 0), CVector::basis(2, 1), plus()],
        )
        .unwrap();
        let v = Isometry::bell_masker();
        let img = apply_masker(&v, &plus()).unwrap();
        assert!(img.max_abs_diff(&CVector::basis(4, 0)) < 1e-15);
        let r = is_masker(&v, &s, 1e-10).unwrap();
        assert!(!r.is_masker);
        assert_abs_diff_eq!(r.max_distance, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn presets() {
        assert_eq!(StateSet::preset("classical").unwrap().len(), 2);
        assert_eq!(StateSet::preset("phase-family").unwrap().len(), 8);
        assert_eq!(StateSet::preset("stabilizer").unwrap().len(), 6);
        assert!(StateSet::preset("nope").is_none());
        for s in StateSet::stabilizer().states() {
            assert!(s.is_normalized());
        }
    }

    #[test]
    fn state_set_validation() {
        assert_eq!(StateSet::new("e", vec![]), Err(VerifyError::EmptySet));
        assert!(matches!(
            StateSet::new("x", vec![CVector::basis(2, 0), CVector::basis(3, 0)]),
            Err(VerifyError::StateDim { index: 1, .. })
        ));
    }

    #[test]
    fn isometry_json_round_trip() {
        let v = Isometry::bell_masker();
        let text = v.to_json();
        assert!(text.starts_with("{\"dims\":[2,2],\"matrix\":"));
        assert_eq!(Isometry::from_json(&text).unwrap(), v);
        assert!(matches!(
            Isometry::from_json("{\"dims\":[2,2],\"matrix\":[[[1,0],[0,0]],[[0,0],[0,0]],[[0,0],[0,0]],[[0,0],[0,0]]]}"),
            Err(VerifyError::NotIsometry)
        ));
    }
}
