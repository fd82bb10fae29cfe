//! Trace-class (ILS) representation `d(p,q) = tr((p⊗q)X)`.
//!
//! The representative is recovered from `d` alone. Every matrix unit
//! `E_ij` is a fixed combination of rank-one projections onto `e_i`,
//! `(e_i ± e_j)/√2` and `(e_i ± i·e_j)/√2`. So `D(E_ij, E_kl)`, and with it
//! every matrix element of `X`, is a closed-form combination of `d` on pairs
//! of those projections.

use rayon::prelude::*;
use serde::Serialize;

use crate::decoherence::{DecoherenceFunctional, MIN_THEOREM_DIM};
use crate::error::{Error, IlsCondition, Result};
use crate::linalg::{
    kron_trace, kron_trace_unchecked, swap_conjugate, trace_norm, ComplexMatrix, Projection, Vector,
    C64, I, ONE, ZERO,
};
use crate::sampling::{random_projection_any_rank, random_projection_with, rng};

/// Tolerance for the three operator conditions.
pub const TOL_CONDITIONS: f64 = 1e-8;
/// Samples used by [`df_from_operator`] when checking positivity.
pub const DEFAULT_CONDITION_SAMPLES: usize = 200;

/// Candidate trace-class representative with eagerly computed diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct IlsOperator {
    #[serde(skip)]
    pub x_op: ComplexMatrix,
    pub dim: usize,
    #[serde(serialize_with = "crate::harness::output::complex")]
    pub trace: C64,
    pub trace_norm: f64,
    pub swap_adjoint_residual: f64,
    /// Minimum of `Re tr((p⊗p)X)` over the projections used for extraction.
    pub positivity_min_sampled: f64,
}

impl IlsOperator {
    /// Diagnostics for an operator given directly on `H⊗H`.
    pub fn from_matrix(x_op: ComplexMatrix) -> Result<Self> {
        let dim = crate::linalg::factor_dim(x_op.dim()).ok_or(Error::InvalidArgument(format!(
            "operator dimension {} is not a square",
            x_op.dim()
        )))?;
        let family = polarization_family(dim);
        let positivity_min_sampled = family
            .iter()
            .map(|p| kron_trace_unchecked(p.matrix(), p.matrix(), &x_op).re)
            .chain(std::iter::once(x_op.trace().re))
            .fold(f64::INFINITY, f64::min);
        Self::with_positivity(x_op, dim, positivity_min_sampled)
    }

    fn with_positivity(x_op: ComplexMatrix, dim: usize, positivity_min_sampled: f64) -> Result<Self> {
        Ok(Self {
            trace: x_op.trace(),
            trace_norm: trace_norm(&x_op)?,
            swap_adjoint_residual: swap_adjoint_residual(&x_op, dim),
            positivity_min_sampled,
            dim,
            x_op,
        })
    }
}

/// `‖X − W X* W‖_F`.
pub fn swap_adjoint_residual(x: &ComplexMatrix, dim: usize) -> f64 {
    x.distance(&swap_conjugate(&x.adjoint(), dim))
}

/// Polarization projections, in a fixed order: `e_i` for each `i`, then for
/// each `i < j` the four projections onto `(e_i + e_j)/√2`, `(e_i − e_j)/√2`,
/// `(e_i + i·e_j)/√2`, `(e_i − i·e_j)/√2`.
pub fn polarization_family(dim: usize) -> Vec<Projection> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(2 * dim * dim - dim);
    for i in 0..dim {
        out.push(Projection::from_parts_unchecked(ComplexMatrix::matrix_unit(dim, i, i), 1));
    }
    for i in 0..dim {
        for j in i + 1..dim {
            for phase in [ONE, -ONE, I, -I] {
                let mut amps = vec![ZERO; dim];
                amps[i] = C64::new(s, 0.0);
                amps[j] = phase * s;
                let v = Vector::new(amps).expect("finite");
                out.push(Projection::from_parts_unchecked(v.outer(&v), 1));
            }
        }
    }
    out
}

fn pair_offset(dim: usize, i: usize, j: usize) -> usize {
    // Index of the first of the four projections for the pair i < j.
    let before: usize = (0..i).map(|r| dim - 1 - r).sum();
    dim + 4 * (before + (j - i - 1))
}

/// `E_ij` as a combination of polarization projections.
fn matrix_unit_coefficients(dim: usize, i: usize, j: usize) -> Vec<(usize, C64)> {
    let half = C64::new(0.5, 0.0);
    match i.cmp(&j) {
        std::cmp::Ordering::Equal => vec![(i, ONE)],
        std::cmp::Ordering::Less => {
            let o = pair_offset(dim, i, j);
            vec![(o, half), (o + 1, -half), (o + 2, half * I), (o + 3, -half * I)]
        }
        std::cmp::Ordering::Greater => {
            let o = pair_offset(dim, j, i);
            vec![(o, half), (o + 1, -half), (o + 2, -half * I), (o + 3, half * I)]
        }
    }
}

/// A linear functional on operators of `K`, stored by its values on the
/// matrix units: `values[(a,b)] = φ(E_ab)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFunctional {
    pub values: ComplexMatrix,
}

impl LinearFunctional {
    pub fn new(values: ComplexMatrix) -> Self {
        Self { values }
    }

    /// `φ(z) = Σ z_ab φ(E_ab)`.
    pub fn apply(&self, z: &ComplexMatrix) -> Result<C64> {
        if z.dim() != self.values.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.values.dim(),
                found: z.dim(),
            });
        }
        let d = z.dim();
        let mut acc = ZERO;
        for a in 0..d {
            for b in 0..d {
                acc += z[(a, b)] * self.values[(a, b)];
            }
        }
        Ok(acc)
    }
}

/// The unique `T` with `φ(z) = tr(z·T)`: `T_ba = φ(E_ab)`.
pub fn functional_to_operator(phi: &LinearFunctional) -> ComplexMatrix {
    phi.values.transpose()
}

/// The functional `z ↦ β(z)` on `H⊗H`, read off on matrix units
/// `E_(a,b),(c,e) = E_ac ⊗ E_be` through polarization of `d`.
pub fn beta_functional(d: &DecoherenceFunctional) -> LinearFunctional {
    let n = d.dim();
    let family = polarization_family(n);
    let m = family.len();
    let table: Vec<Vec<C64>> = (0..m)
        .into_par_iter()
        .map(|u| (0..m).map(|v| d.evaluate_unchecked(&family[u], &family[v])).collect())
        .collect();

    let coeffs: Vec<Vec<Vec<(usize, C64)>>> = (0..n)
        .map(|i| (0..n).map(|j| matrix_unit_coefficients(n, i, j)).collect())
        .collect();
    let bilinear_on_units = |i: usize, j: usize, k: usize, l: usize| {
        let mut acc = ZERO;
        for &(u, a) in &coeffs[i][j] {
            for &(v, b) in &coeffs[k][l] {
                acc += a * b * table[u][v];
            }
        }
        acc
    };

    let values = ComplexMatrix::from_fn(n * n, |r, c| {
        let (a, b) = (r / n, r % n);
        let (cc, e) = (c / n, c % n);
        bilinear_on_units(a, cc, b, e)
    });
    LinearFunctional::new(values)
}

/// Representative `X` from `d` without the dimension check. Below dimension
/// three the result is only the representative of the backend's own
/// bilinear structure, not one guaranteed by the extension theorem.
pub fn polarized_operator(d: &DecoherenceFunctional) -> ComplexMatrix {
    functional_to_operator(&beta_functional(d))
}

/// Extracts the ILS operator of `d` (dimension ≥ 3).
pub fn extract_ils(d: &DecoherenceFunctional) -> Result<IlsOperator> {
    if d.dim() < MIN_THEOREM_DIM {
        return Err(Error::DimensionExcluded { dim: d.dim() });
    }
    let x = polarized_operator(d);
    let family = polarization_family(d.dim());
    let positivity = family
        .iter()
        .map(|p| d.evaluate_unchecked(p, p).re)
        .chain(std::iter::once(x.trace().re))
        .fold(f64::INFINITY, f64::min);
    IlsOperator::with_positivity(x, d.dim(), positivity)
}

/// `tr((p⊗q)X)`.
pub fn evaluate_ils(x: &IlsOperator, p: &Projection, q: &Projection) -> Result<C64> {
    kron_trace(p.matrix(), q.matrix(), &x.x_op)
}

#[derive(Clone, Debug, Serialize)]
pub struct IlsConditionReport {
    pub swap_adjoint_residual: f64,
    pub positivity_min: f64,
    pub positivity_imag_max: f64,
    pub trace_residual: f64,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub failed: Vec<IlsCondition>,
}

impl IlsConditionReport {
    pub fn passed(&self) -> bool {
        self.failed.is_empty()
    }
}

/// Checks the three operator conditions on `X`:
/// (i) `X = W X* W`, (ii) sampled `tr((p⊗p)X) ≥ 0`, (iii) `tr X = 1`.
///
/// Positivity is a sampled minimum over every basis rank-one projection plus
/// `samples` random projections of random rank and `samples` random rank-one
/// projections; no global claim is made.
pub fn verify_ils_conditions(x: &ComplexMatrix, samples: usize, seed: u64, tolerance: f64) -> Result<IlsConditionReport> {
    let dim = crate::linalg::factor_dim(x.dim()).ok_or(Error::InvalidArgument(format!(
        "operator dimension {} is not a square",
        x.dim()
    )))?;
    let swap = swap_adjoint_residual(x, dim);
    let trace_residual = (x.trace() - ONE).norm();

    let mut rng = rng(seed);
    let mut pos_min = f64::INFINITY;
    let mut imag_max = 0.0_f64;
    let mut probe = |p: &Projection| {
        let v = kron_trace_unchecked(p.matrix(), p.matrix(), x);
        pos_min = pos_min.min(v.re);
        imag_max = imag_max.max(v.im.abs());
    };
    for p in polarization_family(dim) {
        probe(&p);
    }
    for _ in 0..samples {
        probe(&random_projection_any_rank(&mut rng, dim));
        probe(&random_projection_with(&mut rng, dim, 1).expect("rank 1 fits"));
    }

    let mut failed = Vec::new();
    if swap > tolerance {
        failed.push(IlsCondition::SwapAdjoint);
    }
    if pos_min < -tolerance || imag_max > tolerance {
        failed.push(IlsCondition::Positivity);
    }
    if trace_residual > tolerance {
        failed.push(IlsCondition::Normalization);
    }
    Ok(IlsConditionReport {
        swap_adjoint_residual: swap,
        positivity_min: pos_min,
        positivity_imag_max: imag_max,
        trace_residual,
        samples,
        seed,
        tolerance,
        failed,
    })
}

/// Operator-backed functional from an operator satisfying the three
/// conditions.
pub fn df_from_operator(x: ComplexMatrix) -> Result<DecoherenceFunctional> {
    let report = verify_ils_conditions(&x, DEFAULT_CONDITION_SAMPLES, 0, TOL_CONDITIONS)?;
    if !report.passed() {
        return Err(Error::ConditionViolation { failed: report.failed });
    }
    DecoherenceFunctional::operator_backed(x)
}
