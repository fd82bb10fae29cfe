//! Bounded-operator representations `d(p,q) = tr(M(p⊗q))`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::decoherence::{DecoherenceFunctional, MIN_THEOREM_DIM};
use crate::error::{Error, Result};
use crate::histories::orthogonal_decompose;
use crate::ils::polarized_operator;
use crate::linalg::{
    kron, kron_trace_unchecked, swap_operator, trace_pair, trace_pair_unchecked, ComplexMatrix, ElementaryTensorSum,
    Projection, Vector, C64, I, ONE, ZERO,
};
use crate::probes::tracial_bound_probe;

/// Relative cutoff below which Gram eigenvalues are discarded.
pub const GRAM_CUTOFF: f64 = 1e-12;
const TOL_GRAM_HERMITIAN: f64 = 1e-8;

/// `β(S) = Σ_i tr(S(X_i⊗X_i* − Y_i⊗Y_i*))`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub x_family: Vec<ComplexMatrix>,
    pub y_family: Vec<ComplexMatrix>,
    /// Retained Gram eigenvalues, ascending.
    pub signature: Vec<f64>,
    pub dim: usize,
}

impl Decomposition {
    pub fn beta(&self, s: &ElementaryTensorSum) -> Result<C64> {
        if s.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: s.dim(),
            });
        }
        let mut acc = ZERO;
        for (x, y) in s.terms() {
            for xi in &self.x_family {
                acc += trace_pair_unchecked(x, xi) * trace_pair_unchecked(y, &xi.adjoint());
            }
            for yi in &self.y_family {
                acc -= trace_pair_unchecked(x, yi) * trace_pair_unchecked(y, &yi.adjoint());
            }
        }
        Ok(acc)
    }

    /// `Σ_i (X_i⊗X_i* − Y_i⊗Y_i*)`.
    pub fn operator(&self) -> ComplexMatrix {
        let n = self.dim * self.dim;
        let mut m = ComplexMatrix::zeros(n);
        for x in &self.x_family {
            m = &m + &kron(x, &x.adjoint()).expect("dimension checked at construction");
        }
        for y in &self.y_family {
            m = &m - &kron(y, &y.adjoint()).expect("dimension checked at construction");
        }
        m
    }
}

/// Gram matrix of `Q(x,y) = D(x,y*)` over the matrix units, indexed so that
/// `Q(x,y) = vec(y)* G vec(x)`, i.e. `G_ab = Q(E_b, E_a)`.
pub fn gram_matrix(d: &DecoherenceFunctional) -> Result<ComplexMatrix> {
    if d.dim() < MIN_THEOREM_DIM {
        return Err(Error::DimensionExcluded { dim: d.dim() });
    }
    let n = d.dim();
    let x = polarized_operator(d);
    // Q(E_ij, E_kl) = D(E_ij, E_lk) = X[(j,k),(i,l)].
    Ok(ComplexMatrix::from_fn(n * n, |a, b| {
        let (k, l) = (a / n, a % n);
        let (i, j) = (b / n, b % n);
        x[(j * n + k, i * n + l)]
    }))
}

/// Splits the Hermitian form `Q` into positive and negative families from
/// the eigendecomposition of its Gram matrix.
pub fn hermitian_form_decomposition(d: &DecoherenceFunctional) -> Result<Decomposition> {
    let g = gram_matrix(d)?;
    let residual = g.hermitian_residual();
    if residual > TOL_GRAM_HERMITIAN * g.frobenius_norm().max(1.0) {
        return Err(Error::NonHermitianGram { residual });
    }
    let n = d.dim();
    let herm = g.hermitian_parts().0;
    let eig = herm.into_nalgebra().symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    let mut order: Vec<usize> = (0..n * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut out = Decomposition {
        x_family: Vec::new(),
        y_family: Vec::new(),
        signature: Vec::new(),
        dim: n,
    };
    for k in order {
        let lambda = eig.eigenvalues[k];
        if lambda.abs() <= GRAM_CUTOFF * scale || lambda == 0.0 {
            continue;
        }
        // G_k = reshape(g_k); the family member is √|λ|·G_k*.
        let col = eig.eigenvectors.column(k);
        let gk = ComplexMatrix::from_fn(n, |i, j| col[i * n + j]);
        let member = gk.adjoint().scale(C64::new(lambda.abs().sqrt(), 0.0));
        if lambda > 0.0 {
            out.x_family.push(member);
        } else {
            out.y_family.push(member);
        }
        out.signature.push(lambda);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct TracialConfig {
    pub samples: usize,
    pub seed: u64,
    /// Upper bound the sampled supremum must respect; any finite value is
    /// accepted when absent.
    pub bound: Option<f64>,
}

impl Default for TracialConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: 0,
            bound: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TracialOperator {
    pub m_op: ComplexMatrix,
    pub operator_norm: f64,
    pub source: Decomposition,
    /// Sampled supremum of `|β(p_ξ)|` that admitted the construction.
    pub probe_sup: f64,
}

pub fn build_tracial_operator(d: &DecoherenceFunctional, config: &TracialConfig) -> Result<TracialOperator> {
    let probe = tracial_bound_probe(d, config.samples, config.seed)?;
    let bound = config.bound.unwrap_or(f64::INFINITY);
    if !probe.sup.is_finite() || probe.sup > bound {
        return Err(Error::NotTraciallyBounded {
            sup: probe.sup,
            bound,
            samples: config.samples,
            seed: config.seed,
        });
    }
    let source = hermitian_form_decomposition(d)?;
    let m_op = source.operator();
    Ok(TracialOperator {
        operator_norm: m_op.operator_norm(),
        m_op,
        source,
        probe_sup: probe.sup,
    })
}

/// `Σ_i Σ_j tr((p_i⊗q_j)M)` over orthogonal blocks of rank ≤ `block_rank`.
pub fn evaluate_double_sum(m: &TracialOperator, p: &Projection, q: &Projection, block_rank: usize) -> Result<C64> {
    let rank = block_rank.max(1);
    evaluate_double_sum_with_blocks(m, &orthogonal_decompose(p, rank), &orthogonal_decompose(q, rank))
}

/// Double sum over caller-supplied orthogonal families.
pub fn evaluate_double_sum_with_blocks(m: &TracialOperator, ps: &[Projection], qs: &[Projection]) -> Result<C64> {
    let n = m.source.dim;
    if let Some(bad) = ps.iter().chain(qs).find(|b| b.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.dim(),
        });
    }
    let mut acc = ZERO;
    for pi in ps {
        for qj in qs {
            acc += kron_trace_unchecked(pi.matrix(), qj.matrix(), &m.m_op);
        }
    }
    Ok(acc)
}

/// `PU` for a pure state, with its factors.
#[derive(Clone, Debug)]
pub struct PureStateOperator {
    pub pu: ComplexMatrix,
    /// Projection onto `span{ψ⊗ψ_i}`.
    pub projection: ComplexMatrix,
    pub swap: ComplexMatrix,
    /// Orthonormal basis with `basis[0] = ψ`.
    pub basis: Vec<Vector>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PureStateCheck {
    /// `‖(PU)(PU)* − P‖_F`.
    pub partial_isometry_residual: f64,
    pub trace_re: f64,
    pub trace_im: f64,
    pub trace_norm: f64,
    pub operator_norm: f64,
    /// Max of `|β_ψ(S) − tr(S·PU)|` over sampled tensor sums.
    pub beta_residual: f64,
    pub samples: usize,
    pub seed: u64,
}

impl PureStateOperator {
    /// `β_ψ(S) = Σ_i ⟨S(ψ⊗ψ_i), ψ_i⊗ψ⟩`.
    pub fn beta_series(&self, s: &ElementaryTensorSum) -> C64 {
        let psi = &self.basis[0];
        let mut acc = ZERO;
        for (x, y) in s.terms() {
            let xy = kron(x, y).expect("dimension checked");
            for b in &self.basis {
                acc += xy.apply(&psi.kron(b)).inner(&b.kron(psi));
            }
        }
        acc
    }

    pub fn verify(&self, samples: usize, seed: u64) -> Result<PureStateCheck> {
        let n = self.basis.len();
        let pu_adj = &self.pu * &self.pu.adjoint();
        let mut r = crate::sampling::rng(seed);
        let mut worst = 0.0_f64;
        for k in 0..samples {
            let s = crate::sampling::random_tensor_sum(&mut r, n, 1 + k % 3);
            let direct = trace_pair(&s.to_matrix()?, &self.pu)?;
            worst = worst.max((self.beta_series(&s) - direct).norm());
        }
        let trace = self.pu.trace();
        Ok(PureStateCheck {
            partial_isometry_residual: pu_adj.distance(&self.projection),
            trace_re: trace.re,
            trace_im: trace.im,
            trace_norm: crate::linalg::trace_norm(&self.pu)?,
            operator_norm: self.pu.operator_norm(),
            beta_residual: worst,
            samples,
            seed,
        })
    }
}

/// Orthonormal basis whose first vector is `ψ`, from one Householder
/// reflection.
pub fn householder_basis(psi: &Vector) -> Result<Vec<Vector>> {
    if !psi.is_unit(crate::linalg::TOL_UNIT) {
        return Err(Error::NotUnit { norm: psi.norm() });
    }
    let n = psi.dim();
    let p0 = psi.amplitudes()[0];
    let phase = if p0.norm() > 0.0 { p0 / p0.norm() } else { ONE };
    // u = ψ − αe₁ with α = −phase keeps ‖u‖ away from zero.
    let alpha = -phase;
    let mut u: Vec<C64> = psi.amplitudes().to_vec();
    u[0] -= alpha;
    let uu: f64 = u.iter().map(|c| c.norm_sqr()).sum();
    let h = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { ONE } else { ZERO };
        id - u[i] * u[j].conj() * (2.0 / uu)
    });
    // H maps ψ to αe₁, so H e₁ = ᾱψ; the remaining columns complete the basis.
    let mut basis = vec![psi.clone()];
    for j in 1..n {
        basis.push(Vector::new(h.column(j).iter().copied().collect())?);
    }
    Ok(basis)
}

pub fn pure_state_m(psi: &Vector) -> Result<PureStateOperator> {
    let basis = householder_basis(psi)?;
    let n = psi.dim();
    let mut projection = ComplexMatrix::zeros(n * n);
    for b in &basis {
        let v = psi.kron(b);
        projection = &projection + &v.outer(&v);
    }
    let swap = swap_operator(n);
    Ok(PureStateOperator {
        pu: &projection * &swap,
        projection,
        swap,
        basis,
    })
}

/// Recovers `L` on `H⊗H` from its product-vector diagonal
/// `f(α,β) = ⟨L(α⊗β), α⊗β⟩`, using
/// `⟨L(α⊗β), α′⊗β′⟩ = (1/16) Σ_{k,l} i^{k+l} f(α + i^k α′, β + i^l β′)`.
pub fn reconstruct_from_product_diagonal<F>(f: F, dim: usize) -> ComplexMatrix
where
    F: Fn(&Vector, &Vector) -> C64 + Sync,
{
    let powers = [ONE, I, -ONE, -I];
    let basis: Vec<Vector> = (0..dim).map(|i| Vector::basis(dim, i)).collect();
    let n = dim * dim;
    let entries: Vec<C64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (row, col) = (idx / n, idx % n);
            let (a, b) = (row / dim, row % dim);
            let (c, e) = (col / dim, col % dim);
            let mut acc = ZERO;
            for (k, pk) in powers.iter().enumerate() {
                let alpha = basis[c].add(&basis[a].scale(*pk));
                for (l, pl) in powers.iter().enumerate() {
                    let beta = basis[e].add(&basis[b].scale(*pl));
                    acc += powers[(k + l) % 4] * f(&alpha, &beta);
                }
            }
            acc / 16.0
        })
        .collect();
    ComplexMatrix::from_fn(n, |r, c| entries[r * n + c])
}

/// `f(α,β) = ⟨L(α⊗β), α⊗β⟩` for an explicit `L`.
pub fn product_diagonal(l: &ComplexMatrix) -> impl Fn(&Vector, &Vector) -> C64 + Sync + '_ {
    move |a, b| {
        let v = a.kron(b);
        l.apply(&v).inner(&v)
    }
}
