//! Dense complex linear algebra and quantum primitives for small registers.
//!
//! Joint spaces use subsystem A as the major (leftmost) index: the basis
//! vector `|a⟩⊗|b⟩` sits at position `a * d_b + b`.

use std::fmt;
use std::ops::Index;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type C64 = Complex64;

/// Largest joint Hilbert-space dimension any operation will build.
pub const MAX_DIM: usize = 1 << 12;

/// Norm / trace / Hermiticity tolerance for tagged states and operators.
pub const STATE_TOL: f64 = 1e-10;

/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {0} exceeds the cap of {MAX_DIM}")]
    DimensionOverflow(usize),
    #[error("vector must have at least one entry")]
    Empty,
    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("ragged matrix: row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid subsystem dimensions {d_a}x{d_b}: both factors must be at least 2")]
    InvalidDims { d_a: usize, d_b: usize },
}

pub type Result<T> = std::result::Result<T, QError>;

fn check_dim(dim: usize) -> Result<usize> {
    if dim > MAX_DIM {
        Err(QError::DimensionOverflow(dim))
    } else {
        Ok(dim)
    }
}

/// Column vector of complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector {
    entries: Vec<C64>,
}

impl CVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(QError::Empty);
        }
        check_dim(entries.len())?;
        Ok(Self { entries })
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩` in a `dim`-dimensional space.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dim {dim}"
        );
        let mut entries = vec![ZERO; dim];
        entries[index] = ONE;
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= STATE_TOL
    }

    /// Fails unless the vector is a unit vector within [`STATE_TOL`].
    pub fn require_normalized(&self) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() <= STATE_TOL {
            Ok(())
        } else {
            Err(QError::NotNormalized(n))
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(QError::NotNormalized(n));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner(&self, other: &CVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(QError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CVector) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for CVector {
    type Output = C64;

    fn index(&self, i: usize) -> &C64 {
        &self.entries[i]
    }
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, dim, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(QError::Empty);
        }
        check_dim(n_rows)?;
        check_dim(n_cols)?;
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n_cols {
                return Err(QError::Ragged {
                    row,
                    expected: n_cols,
                    found: r.len(),
                });
            }
            data.extend(r);
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector {
            entries: (0..self.rows).map(|i| self.get(i, j)).collect(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(QError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &CVector) -> Result<CVector> {
        if self.cols != v.dim() {
            return Err(QError::DimensionMismatch {
                expected: self.cols,
                found: v.dim(),
            });
        }
        let entries = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v.entries())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        Ok(CVector { entries })
    }

    /// Kronecker product with `self` as the major factor.
    pub fn kron(&self, other: &CMatrix) -> Result<Self> {
        let rows = check_dim(self.rows * other.rows)?;
        let cols = check_dim(self.cols * other.cols)?;
        Ok(Self::from_fn(rows, cols, |i, j| {
            self.get(i / other.rows, j / other.cols) * other.get(i % other.rows, j % other.cols)
        }))
    }

    pub fn sub(&self, other: &CMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &CMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(QError::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation of `self` from `self†`.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `self† · self` equals the identity on the column space.
    pub fn is_isometry(&self, tol: f64) -> bool {
        match self.adjoint().matmul(self) {
            Ok(g) => g.max_abs_diff(&Self::identity(self.cols)) <= tol,
            Err(_) => false,
        }
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.is_isometry(tol)
    }

    /// Hermitian, unit trace and positive semidefinite.
    pub fn is_density(&self) -> bool {
        if !self.is_hermitian(STATE_TOL) || (self.trace() - ONE).norm() > STATE_TOL {
            return false;
        }
        hermitian_eigenvalues(self)
            .map(|ev| ev.iter().all(|&l| l >= PSD_TOL))
            .unwrap_or(false)
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

/// Which half of a bipartite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

impl Subsystem {
    pub const BOTH: [Subsystem; 2] = [Subsystem::A, Subsystem::B];
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subsystem::A => f.write_str("A"),
            Subsystem::B => f.write_str("B"),
        }
    }
}

/// Factor dimensions `(d_a, d_b)` of a bipartite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub d_a: usize,
    pub d_b: usize,
}

impl Dims {
    pub fn new(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a < 2 || d_b < 2 {
            return Err(QError::InvalidDims { d_a, d_b });
        }
        check_dim(d_a.saturating_mul(d_b))?;
        Ok(Self { d_a, d_b })
    }

    pub const fn qubits() -> Self {
        Self { d_a: 2, d_b: 2 }
    }

    pub fn joint(&self) -> usize {
        self.d_a * self.d_b
    }

    pub fn of(&self, side: Subsystem) -> usize {
        match side {
            Subsystem::A => self.d_a,
            Subsystem::B => self.d_b,
        }
    }
}

/// Kronecker product `u ⊗ v`, `u` index major.
pub fn tensor(u: &CVector, v: &CVector) -> Result<CVector> {
    check_dim(u.dim().saturating_mul(v.dim()))?;
    let entries = u
        .entries
        .iter()
        .flat_map(|a| v.entries.iter().map(move |b| a * b))
        .collect();
    Ok(CVector { entries })
}

/// `|ψ⟩⟨ψ|` for a normalized state.
pub fn density_of(psi: &CVector) -> Result<CMatrix> {
    psi.require_normalized()?;
    let e = psi.entries();
    Ok(CMatrix::from_fn(e.len(), e.len(), |i, j| {
        e[i] * e[j].conj()
    }))
}

pub fn maximally_mixed(dim: usize) -> CMatrix {
    CMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0))
}

/// Reduced density operator of `rho` on the `keep` factor.
pub fn partial_trace(rho: &CMatrix, dims: Dims, keep: Subsystem) -> Result<CMatrix> {
    if !rho.is_square() {
        return Err(QError::NotSquare {
            rows: rho.rows(),
            cols: rho.cols(),
        });
    }
    if rho.rows() != dims.joint() {
        return Err(QError::DimensionMismatch {
            expected: dims.joint(),
            found: rho.rows(),
        });
    }
    let Dims { d_a, d_b } = dims;
    let out = match keep {
        Subsystem::A => CMatrix::from_fn(d_a, d_a, |a, a2| {
            (0..d_b).map(|b| rho.get(a * d_b + b, a2 * d_b + b)).sum()
        }),
        Subsystem::B => CMatrix::from_fn(d_b, d_b, |b, b2| {
            (0..d_a).map(|a| rho.get(a * d_b + b, a * d_b + b2)).sum()
        }),
    };
    Ok(out)
}

/// Marginal of a pure joint state, computed without forming `|ψ⟩⟨ψ|`.
///
/// Agrees with `partial_trace(density_of(psi), dims, keep)`.
pub fn marginal(psi: &CVector, dims: Dims, keep: Subsystem) -> Result<CMatrix> {
    if psi.dim() != dims.joint() {
        return Err(QError::DimensionMismatch {
            expected: dims.joint(),
            found: psi.dim(),
        });
    }
    let Dims { d_a, d_b } = dims;
    let e = psi.entries();
    let out = match keep {
        Subsystem::A => CMatrix::from_fn(d_a, d_a, |a, a2| {
            (0..d_b)
                .map(|b| e[a * d_b + b] * e[a2 * d_b + b].conj())
                .sum()
        }),
        Subsystem::B => CMatrix::from_fn(d_b, d_b, |b, b2| {
            (0..d_a)
                .map(|a| e[a * d_b + b] * e[a * d_b + b2].conj())
                .sum()
        }),
    };
    Ok(out)
}

/// Real spectrum of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(QError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let herr = m.hermiticity_error();
    if herr > STATE_TOL {
        return Err(QError::NotHermitian(herr));
    }
    let mut ev = if m.rows() == 2 {
        // closed form for the 2x2 case
        let a = m.get(0, 0).re;
        let d = m.get(1, 1).re;
        let b = m.get(0, 1);
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        vec![mean - radius, mean + radius]
    } else {
        let eig = SymmetricEigen::new(m.to_nalgebra());
        eig.eigenvalues.iter().copied().collect::<Vec<f64>>()
    };
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Unitary `exp(iH)` of a Hermitian generator via its eigendecomposition.
pub fn exp_i_hermitian(h: &CMatrix) -> Result<CMatrix> {
    if !h.is_square() {
        return Err(QError::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let herr = h.hermiticity_error();
    if herr > STATE_TOL {
        return Err(QError::NotHermitian(herr));
    }
    let n = h.rows();
    let eig = SymmetricEigen::new(h.to_nalgebra());
    let phases: Vec<C64> = eig
        .eigenvalues
        .iter()
        .map(|&l| C64::from_polar(1.0, l))
        .collect();
    let u = &eig.eigenvectors;
    Ok(CMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| u[(i, k)] * phases[k] * u[(j, k)].conj())
            .sum()
    }))
}

/// `(1/2)·Σ|λ_i(ρ − σ)|`.
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    // a fixed operand order keeps the result exactly symmetric
    let later = rho
        .data
        .iter()
        .zip(&sigma.data)
        .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
        .find(|o| o.is_ne())
        .is_some_and(|o| o.is_gt());
    let diff = if later {
        sigma.sub(rho)?
    } else {
        rho.sub(sigma)?
    };
    let ev = hermitian_eigenvalues(&diff)?;
    Ok(0.5 * ev.iter().map(|l| l.abs()).sum::<f64>())
}

/// `|⟨ψ|φ⟩|²` for pure states.
pub fn fidelity_pure(psi: &CVector, phi: &CVector) -> Result<f64> {
    Ok(psi.inner(phi)?.norm_sqr().min(1.0))
}

/// Φ+, Φ−, Ψ+, Ψ−, in that order.
pub fn bell_states() -> [CVector; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = |e: [f64; 4]| CVector {
        entries: e.iter().map(|&x| C64::new(x * h, 0.0)).collect(),
    };
    [
        v([1.0, 0.0, 0.0, 1.0]),
        v([1.0, 0.0, 0.0, -1.0]),
        v([0.0, 1.0, 1.0, 0.0]),
        v([0.0, 1.0, -1.0, 0.0]),
    ]
}

/// Outcome probabilities of a Bell-basis measurement, in [`bell_states`] order.
pub fn bell_projection(psi: &CVector) -> Result<[f64; 4]> {
    if psi.dim() != 4 {
        return Err(QError::DimensionMismatch {
            expected: 4,
            found: psi.dim(),
        });
    }
    let bell = bell_states();
    let mut probs = [0.0; 4];
    for (p, b) in probs.iter_mut().zip(&bell) {
        *p = b.inner(psi)?.norm_sqr();
    }
    Ok(probs)
}

/// `U·ψ`.
pub fn apply(u: &CMatrix, psi: &CVector) -> Result<CVector> {
    if !u.is_square() {
        return Err(QError::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    u.mul_vec(psi)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => ONE,
        (1, 1) => C64::new(-1.0, 0.0),
        _ => ZERO,
    })
}

// JSON form: complex numbers are `[re, im]`, vectors are arrays of those and
// matrices are row-major arrays of vectors. Adding 0.0 folds -0.0 into 0.0.

fn json_pair(z: &C64) -> [f64; 2] {
    [z.re + 0.0, z.im + 0.0]
}

impl Serialize for CVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.entries.iter().map(json_pair))
    }
}

impl<'de> Deserialize<'de> for CVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<[f64; 2]> = Vec::deserialize(d)?;
        CVector::new(raw.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .map_err(D::Error::custom)
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq((0..self.rows).map(|i| self.row(i).iter().map(json_pair).collect::<Vec<_>>()))
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        CMatrix::from_rows(
            raw.into_iter()
                .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
                .collect(),
        )
        .map_err(D::Error::custom)
    }
}
