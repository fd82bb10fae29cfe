//! Dense complex linear algebra on a Hilbert space `H` of dimension `d` and
//! on `H⊗H` (dimension `d²`).
//!
//! Tensor indices on `H⊗H` are row-major: the basis vector `e_a⊗e_b` sits at
//! position `a·d + b`. All inner products are linear in the first argument.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest dimension of any matrix handled by the engine (`H⊗H` at `d = 64`).
pub const MAX_DIM: usize = 4096;
/// Largest supported dimension of `H`.
pub const MAX_HILBERT_DIM: usize = 64;
/// Tolerance for the projection invariants, relative to the Frobenius scale.
pub const TOL_PROJ: f64 = 1e-8;
/// Tolerance on `‖ξ‖ = 1`.
pub const TOL_UNIT: f64 = 1e-8;
/// Tolerance on `‖h − h*‖_F` (relative) for spectral input.
pub const TOL_HERMITIAN: f64 = 1e-8;
/// Eigenvalues closer than this fraction of `‖h‖` are merged.
pub const EIGEN_MERGE_GAP: f64 = 1e-8;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// A dense square complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix({}x{}) {}", self.dim(), self.dim(), self.0)
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, |i, j| f(i, j)))
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// The matrix unit `E_ij = |e_i⟩⟨e_j|` (0-based).
    pub fn matrix_unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.0[(i, j)] = ONE;
        m
    }

    /// Wraps a nalgebra matrix after checking that it is square, non-empty,
    /// finite, and within [`MAX_DIM`].
    pub fn from_nalgebra(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if m.nrows() > MAX_DIM {
            return Err(Error::DimensionLimit {
                requested: m.nrows(),
                limit: MAX_DIM,
            });
        }
        if m.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    /// Builds a matrix from row-major real and imaginary parts.
    pub fn from_re_im(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let dim = re.len();
        if im.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: im.len(),
            });
        }
        for row in re.iter().chain(im) {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
        }
        Self::from_nalgebra(DMatrix::from_fn(dim, dim, |i, j| {
            C64::new(re[i][j], im[i][j])
        }))
    }

    /// Row-major real and imaginary parts.
    pub fn to_re_im(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let d = self.dim();
        let re = (0..d).map(|i| (0..d).map(|j| self.0[(i, j)].re).collect()).collect();
        let im = (0..d).map(|i| (0..d).map(|j| self.0[(i, j)].im).collect()).collect();
        (re, im)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.0
    }

    pub(crate) fn wrap(m: DMatrix<C64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self(m)
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, value: C64) {
        self.0[(i, j)] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖a − b‖_F`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖h − h*‖_F`.
    pub fn hermitian_residual(&self) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (self.0[(i, j)] - self.0[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.is_finite())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    /// Splits `x = x_R + i·x_I` into its Hermitian real and imaginary parts.
    pub fn hermitian_parts(&self) -> (Self, Self) {
        let adj = self.0.adjoint();
        let re = (&self.0 + &adj) * C64::new(0.5, 0.0);
        let im = (&self.0 - &adj) * C64::new(0.0, -0.5);
        (Self(re), Self(im))
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        Vector(&self.0 * &v.0)
    }

    /// `⟨M v, w⟩`.
    pub fn form(&self, v: &Vector, w: &Vector) -> C64 {
        self.apply(v).inner(w)
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.0.singular_values().iter().copied().collect()
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.singular_values().into_iter().fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, index: (usize, usize)) -> &C64 {
        &self.0[index]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: C64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// A complex column vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(DVector<C64>);

impl Vector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if amplitudes.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(DVector::from_vec(amplitudes)))
    }

    pub fn from_re_im(re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch {
                expected: re.len(),
                found: im.len(),
            });
        }
        Self::new(re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    /// Standard basis vector `e_i` (0-based).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[i] = ONE;
        Self(v)
    }

    pub(crate) fn wrap(v: DVector<C64>) -> Self {
        Self(v)
    }

    pub fn as_nalgebra(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(Self(&self.0 / C64::new(n, 0.0)))
    }

    /// `⟨self, other⟩ = Σ self_i · conj(other_i)`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (m, n) = (self.dim(), other.dim());
        Self(DVector::from_fn(m * n, |k, _| self.0[k / n] * other.0[k % n]))
    }

    /// `|self⟩⟨other|`.
    pub fn outer(&self, other: &Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * other.0.adjoint())
    }
}

/// An orthogonal projection with its integer rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projection {
    /// Validates `P² = P`, `P = P*` and an integral trace at [`TOL_PROJ`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let scale = matrix.frobenius_norm().max(1.0);
        let idempotence = (&(&matrix * &matrix) - &matrix).frobenius_norm();
        let hermiticity = matrix.hermitian_residual();
        let trace = matrix.trace();
        let rank = trace.re.round().max(0.0);
        if idempotence > TOL_PROJ * scale
            || hermiticity > TOL_PROJ * scale
            || (trace - C64::new(rank, 0.0)).norm() > TOL_PROJ * scale
        {
            return Err(Error::NotProjection {
                idempotence,
                hermiticity,
                trace: trace.re,
            });
        }
        Ok(Self {
            matrix,
            rank: rank as usize,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim),
            rank: 0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
            rank: dim,
        }
    }

    /// Projection onto the span of orthonormal columns. The columns are
    /// trusted; no validation is performed.
    pub(crate) fn from_orthonormal_columns(columns: &DMatrix<C64>) -> Self {
        Self {
            matrix: ComplexMatrix(columns * columns.adjoint()),
            rank: columns.ncols(),
        }
    }

    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, rank: usize) -> Self {
        Self { matrix, rank }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `1 − P`.
    pub fn complement(&self) -> Self {
        Self {
            matrix: &ComplexMatrix::identity(self.dim()) - &self.matrix,
            rank: self.dim() - self.rank,
        }
    }

    /// `‖P·Q‖_F`; zero for orthogonal projections.
    pub fn overlap(&self, other: &Self) -> f64 {
        (&self.matrix * &other.matrix).frobenius_norm()
    }

    /// Sum of two orthogonal projections. Orthogonality is the caller's
    /// responsibility.
    pub fn orthogonal_sum(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix + &other.matrix,
            rank: self.rank + other.rank,
        }
    }
}

/// A finite sum `Σ x_i ⊗ y_i` of elementary tensors of operators on `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementaryTensorSum {
    terms: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl ElementaryTensorSum {
    pub fn new(terms: Vec<(ComplexMatrix, ComplexMatrix)>) -> Result<Self> {
        let Some((first, _)) = terms.first() else {
            return Err(Error::EmptyTensorSum);
        };
        let dim = first.dim();
        for (x, y) in &terms {
            for m in [x, y] {
                if m.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: m.dim(),
                    });
                }
            }
        }
        Ok(Self { terms })
    }

    pub fn single(x: ComplexMatrix, y: ComplexMatrix) -> Result<Self> {
        Self::new(vec![(x, y)])
    }

    /// The zero tensor, written as `0 ⊗ 0`.
    pub fn zero(dim: usize) -> Self {
        Self {
            terms: vec![(ComplexMatrix::zeros(dim), ComplexMatrix::zeros(dim))],
        }
    }

    pub fn terms(&self) -> &[(ComplexMatrix, ComplexMatrix)] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.terms[0].0.dim()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Materializes `Σ x_i ⊗ y_i` on `H⊗H`.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let mut acc: Option<ComplexMatrix> = None;
        for (x, y) in &self.terms {
            let k = kron(x, y)?;
            acc = Some(match acc {
                Some(a) => &a + &k,
                None => k,
            });
        }
        Ok(acc.expect("non-empty by construction"))
    }
}

/// A vector of the algebraic tensor product `H ⊗_alg H`, kept as a finite
/// list of simple tensors `Σ α_k ⊗ γ_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicTensor {
    terms: Vec<(Vector, Vector)>,
}

impl AlgebraicTensor {
    pub fn new(terms: Vec<(Vector, Vector)>) -> Result<Self> {
        let Some((first, _)) = terms.first() else {
            return Err(Error::EmptyTensorSum);
        };
        let dim = first.dim();
        for (a, g) in &terms {
            for v in [a, g] {
                if v.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: v.dim(),
                    });
                }
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(Vector, Vector)] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.terms[0].0.dim()
    }

    pub fn to_vector(&self) -> Vector {
        let mut acc = Vector::zeros(self.dim() * self.dim());
        for (a, g) in &self.terms {
            acc = acc.add(&a.kron(g));
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.to_vector().norm()
    }

    /// Rescales so that the represented vector has unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotUnit { norm: n });
        }
        let s = C64::new(1.0 / n, 0.0);
        Ok(Self {
            terms: self
                .terms
                .iter()
                .map(|(a, g)| (a.scale(s), g.clone()))
                .collect(),
        })
    }

    /// `ξξ*` written as the elementary tensor sum
    /// `Σ_{k,l} |α_k⟩⟨α_l| ⊗ |γ_k⟩⟨γ_l|`; equal to `p_ξ` for unit `ξ`.
    pub fn projection_sum(&self) -> ElementaryTensorSum {
        let mut terms = Vec::with_capacity(self.terms.len() * self.terms.len());
        for (ak, gk) in &self.terms {
            for (al, gl) in &self.terms {
                terms.push((ak.outer(al), gk.outer(gl)));
            }
        }
        ElementaryTensorSum { terms }
    }
}

/// One eigenspace of a Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralTerm {
    pub eigenvalue: f64,
    pub projection: Projection,
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (da, db) = (a.dim(), b.dim());
    let dim = da.checked_mul(db).ok_or(Error::DimensionLimit {
        requested: usize::MAX,
        limit: MAX_DIM,
    })?;
    if dim > MAX_DIM {
        return Err(Error::DimensionLimit {
            requested: dim,
            limit: MAX_DIM,
        });
    }
    let mut out = DMatrix::zeros(dim, dim);
    for j in 0..da {
        for i in 0..da {
            let aij = a.0[(i, j)];
            if aij == ZERO {
                continue;
            }
            for l in 0..db {
                for k in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b.0[(k, l)];
                }
            }
        }
    }
    Ok(ComplexMatrix(out))
}

/// `tr(a·x)`, computed as `Σ_ij a_ij x_ji` without forming the product.
pub fn trace_pair(a: &ComplexMatrix, x: &ComplexMatrix) -> Result<C64> {
    if a.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: x.dim(),
        });
    }
    Ok(trace_pair_unchecked(a, x))
}

pub(crate) fn trace_pair_unchecked(a: &ComplexMatrix, x: &ComplexMatrix) -> C64 {
    let d = a.dim();
    let mut acc = ZERO;
    for j in 0..d {
        for i in 0..d {
            acc += a.0[(i, j)] * x.0[(j, i)];
        }
    }
    acc
}

/// `tr((p⊗q)·x)` by direct four-index contraction,
/// `Σ p_ij q_kl x[(j,l),(i,k)]`, never forming `p⊗q`.
pub fn kron_trace(p: &ComplexMatrix, q: &ComplexMatrix, x: &ComplexMatrix) -> Result<C64> {
    let expected = p.dim() * q.dim();
    if x.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: x.dim(),
        });
    }
    Ok(kron_trace_unchecked(p, q, x))
}

pub(crate) fn kron_trace_unchecked(p: &ComplexMatrix, q: &ComplexMatrix, x: &ComplexMatrix) -> C64 {
    let (dp, dq) = (p.dim(), q.dim());
    let xs = &x.0;
    let mut acc = ZERO;
    for i in 0..dp {
        for j in 0..dp {
            let pij = p.0[(i, j)];
            if pij == ZERO {
                continue;
            }
            let mut inner = ZERO;
            for k in 0..dq {
                let col = i * dq + k;
                for l in 0..dq {
                    inner += q.0[(k, l)] * xs[(j * dq + l, col)];
                }
            }
            acc += pij * inner;
        }
    }
    acc
}

/// Eigenspace decomposition of a Hermitian matrix, eigenvalues ascending,
/// near-degenerate eigenvalues (gap below `1e-8·‖h‖`) merged.
pub fn spectral_projections(h: &ComplexMatrix) -> Result<Vec<SpectralTerm>> {
    let residual = h.hermitian_residual();
    if residual > TOL_HERMITIAN * h.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    let d = h.dim();
    let eig = h.0.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let scale = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let gap = EIGEN_MERGE_GAP * scale;

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match groups.last_mut() {
            Some(g) if eig.eigenvalues[k] - eig.eigenvalues[*g.last().unwrap()] <= gap => g.push(k),
            _ => groups.push(vec![k]),
        }
    }

    Ok(groups
        .into_iter()
        .map(|g| {
            let eigenvalue = g.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / g.len() as f64;
            let cols = DMatrix::from_fn(d, g.len(), |r, c| eig.eigenvectors[(r, g[c])]);
            SpectralTerm {
                eigenvalue,
                projection: Projection::from_orthonormal_columns(&cols),
            }
        })
        .collect())
}

/// Schatten-1 norm: the sum of singular values.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(a.0.singular_values().iter().sum())
}

/// `p_ξ η = ⟨η, ξ⟩ ξ`.
pub fn rank_one_proj(xi: &Vector) -> Result<Projection> {
    let norm = xi.norm();
    if (norm - 1.0).abs() > TOL_UNIT {
        return Err(Error::NotUnit { norm });
    }
    Ok(Projection {
        matrix: xi.outer(xi),
        rank: 1,
    })
}

/// The unitary `U(e_i⊗e_j) = e_j⊗e_i` on `H⊗H`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let mut u = ComplexMatrix::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            u.0[(j * d + i, i * d + j)] = ONE;
        }
    }
    u
}

/// `W·a·W` for the swap `W` on `H⊗H`, by index permutation.
pub fn swap_conjugate(a: &ComplexMatrix, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, |r, c| {
        let (i, j) = (r / d, r % d);
        let (k, l) = (c / d, c % d);
        a.0[(j * d + i, l * d + k)]
    })
}

/// Seeded Haar-like random projection.
pub fn random_projection(dim: usize, rank: usize, seed: u64) -> Result<Projection> {
    let mut rng = crate::sampling::rng(seed);
    crate::sampling::random_projection_with(&mut rng, dim, rank)
}

/// Integer square root for `H⊗H` dimensions.
pub(crate) fn factor_dim(n: usize) -> Option<usize> {
    let d = (n as f64).sqrt().round() as usize;
    (d * d == n).then_some(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_matrix, rng};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn kron_identity_and_units() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), ComplexMatrix::identity(4));
        let e11 = ComplexMatrix::matrix_unit(2, 0, 0);
        assert_eq!(kron(&e11, &e11).unwrap(), ComplexMatrix::matrix_unit(4, 0, 0));
    }

    #[test]
    fn kron_mixed_product() {
        let mut r = rng(3);
        let [a, b, cc, d] = [0; 4].map(|_| random_matrix(&mut r, 3));
        let lhs = kron(&(&a * &cc), &(&b * &d)).unwrap();
        let rhs = &kron(&a, &b).unwrap() * &kron(&cc, &d).unwrap();
        assert!(lhs.distance(&rhs) < 1e-10);
    }

    #[test]
    fn kron_rejects_oversized_products() {
        let big = ComplexMatrix::zeros(65);
        assert!(matches!(
            kron(&big, &big),
            Err(Error::DimensionLimit { requested: 4225, .. })
        ));
    }

    #[test]
    fn trace_pair_units() {
        let d = 3;
        let id = ComplexMatrix::identity(d);
        assert_eq!(trace_pair(&id, &id).unwrap(), c(3.0));
        let e12 = ComplexMatrix::matrix_unit(d, 0, 1);
        let e21 = ComplexMatrix::matrix_unit(d, 1, 0);
        assert_eq!(trace_pair(&e12, &e21).unwrap(), c(1.0));
        assert!(trace_pair(&id, &ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn trace_pair_matches_index_sum() {
        let mut r = rng(11);
        let a = random_matrix(&mut r, 4);
        let x = random_matrix(&mut r, 4);
        let mut expected = ZERO;
        for i in 0..4 {
            for j in 0..4 {
                expected += a[(i, j)] * x[(j, i)];
            }
        }
        assert!((trace_pair(&a, &x).unwrap() - expected).norm() < 1e-12);
    }

    #[test]
    fn kron_trace_trivial_cases() {
        let mut r = rng(5);
        let x = random_matrix(&mut r, 9);
        let id = ComplexMatrix::identity(3);
        assert!((kron_trace(&id, &id, &x).unwrap() - x.trace()).norm() < 1e-12);
        let e11 = ComplexMatrix::matrix_unit(2, 0, 0);
        assert_eq!(
            kron_trace(&e11, &e11, &ComplexMatrix::identity(4)).unwrap(),
            c(1.0)
        );
        assert!(kron_trace(&id, &id, &ComplexMatrix::identity(4)).is_err());
    }

    #[test]
    fn kron_trace_matches_materialized() {
        let mut r = rng(17);
        let p = random_matrix(&mut r, 5);
        let q = random_matrix(&mut r, 5);
        let x = random_matrix(&mut r, 25);
        let naive = (&kron(&p, &q).unwrap() * &x).trace();
        let fast = kron_trace(&p, &q, &x).unwrap();
        assert!((naive - fast).norm() <= 1e-12 * naive.norm().max(1.0));
    }

    #[test]
    fn spectral_of_diagonal() {
        let terms = spectral_projections(&ComplexMatrix::diagonal(&[1.0, 1.0, 0.0])).unwrap();
        assert_eq!(terms.len(), 2);
        assert!(terms[0].eigenvalue.abs() < 1e-14);
        assert!(terms[0].projection.matrix().distance(&ComplexMatrix::matrix_unit(3, 2, 2)) < 1e-12);
        assert_eq!(terms[1].projection.rank(), 2);
        assert!((terms[1].eigenvalue - 1.0).abs() < 1e-14);

        let id = spectral_projections(&ComplexMatrix::identity(4)).unwrap();
        assert_eq!(id.len(), 1);
        assert_eq!(id[0].projection.rank(), 4);
    }

    #[test]
    fn spectral_rejects_non_hermitian() {
        let m = ComplexMatrix::matrix_unit(3, 0, 1);
        assert!(matches!(spectral_projections(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn spectral_reassembles_random_hermitian() {
        let mut r = rng(23);
        let (h, _) = random_matrix(&mut r, 4).hermitian_parts();
        let terms = spectral_projections(&h).unwrap();
        let mut acc = ComplexMatrix::zeros(4);
        let mut sum = ComplexMatrix::zeros(4);
        for t in &terms {
            acc = &acc + &t.projection.matrix().scale(c(t.eigenvalue));
            sum = &sum + t.projection.matrix();
        }
        assert!(acc.distance(&h) < 1e-9);
        assert!(sum.distance(&ComplexMatrix::identity(4)) < 1e-9);
        assert!(terms.windows(2).all(|w| w[0].eigenvalue < w[1].eigenvalue));
    }

    #[test]
    fn trace_norm_of_projection_and_zero() {
        let p = random_projection(5, 3, 1).unwrap();
        assert!((trace_norm(p.matrix()).unwrap() - 3.0).abs() < 1e-10);
        assert_eq!(trace_norm(&ComplexMatrix::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn rank_one_projection_examples() {
        let p = rank_one_proj(&Vector::basis(3, 0)).unwrap();
        assert_eq!(p.matrix(), &ComplexMatrix::matrix_unit(3, 0, 0));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let xi = Vector::new(vec![c(s), c(s), ZERO]).unwrap();
        let p = rank_one_proj(&xi).unwrap();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((p.matrix()[(i, j)] - c(0.5)).norm() < 1e-15);
        }
        assert!((p.matrix().trace() - c(1.0)).norm() < 1e-15);
        assert_eq!(p.rank(), 1);
        let long = Vector::new(vec![c(1.0), c(1.0)]).unwrap();
        assert!(matches!(rank_one_proj(&long), Err(Error::NotUnit { .. })));
    }

    #[test]
    fn swap_operator_examples() {
        assert_eq!(swap_operator(1), ComplexMatrix::identity(1));
        let u = swap_operator(2);
        let mut expected = ComplexMatrix::identity(4);
        expected.0.swap_rows(1, 2);
        assert_eq!(u, expected);
        assert_eq!(&u * &u, ComplexMatrix::identity(4));
    }

    #[test]
    fn swap_exchanges_product_vectors() {
        let mut r = rng(29);
        let a = crate::sampling::random_vector(&mut r, 3);
        let b = crate::sampling::random_vector(&mut r, 3);
        let lhs = swap_operator(3).apply(&a.kron(&b));
        let rhs = b.kron(&a);
        assert!(lhs.add(&rhs.scale(c(-1.0))).norm() < 1e-12);
    }

    #[test]
    fn swap_conjugate_matches_products() {
        let mut r = rng(31);
        let x = random_matrix(&mut r, 9);
        let w = swap_operator(3);
        assert!(swap_conjugate(&x, 3).distance(&(&(&w * &x) * &w)) < 1e-12);
    }

    #[test]
    fn random_projection_edges() {
        assert_eq!(random_projection(4, 0, 1).unwrap(), Projection::zero(4));
        assert_eq!(random_projection(4, 4, 1).unwrap(), Projection::identity(4));
        let p = random_projection(4, 2, 7).unwrap();
        assert!((&(p.matrix() * p.matrix()) - p.matrix()).frobenius_norm() < 1e-10);
        assert!((p.matrix().trace() - c(2.0)).norm() < 1e-10);
        assert_eq!(p, random_projection(4, 2, 7).unwrap());
        assert!(matches!(
            random_projection(3, 4, 0),
            Err(Error::RankOutOfRange { rank: 4, dim: 3 })
        ));
    }

    #[test]
    fn projection_validation() {
        assert!(Projection::new(ComplexMatrix::diagonal(&[1.0, 0.5])).is_err());
        let p = Projection::new(ComplexMatrix::diagonal(&[1.0, 0.0, 1.0])).unwrap();
        assert_eq!(p.rank(), 2);
        assert_eq!(p.complement().rank(), 1);
    }

    #[test]
    fn algebraic_tensor_projection_sum() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let e1 = Vector::basis(3, 0);
        let e2 = Vector::basis(3, 1);
        let xi = AlgebraicTensor::new(vec![(e1.scale(c(s)), e2.clone()), (e2.scale(c(s)), e1)]).unwrap();
        let v = xi.to_vector();
        let direct = v.outer(&v);
        assert!(xi.projection_sum().to_matrix().unwrap().distance(&direct) < 1e-14);
        assert!((xi.norm() - 1.0).abs() < 1e-14);
    }
}
