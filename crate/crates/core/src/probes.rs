//! Boundedness diagnostics: plain, tracial and tensor.
//!
//! All estimates are sampled suprema. Samples come from one sequential
//! stream per seed, so a run with more samples extends a run with fewer and
//! the estimate can only grow.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decoherence::{DecoherenceFunctional, MIN_THEOREM_DIM};
use crate::error::{Error, Result};
use crate::ils::{polarized_operator, swap_adjoint_residual};
use crate::linalg::{trace_norm, ComplexMatrix, Vector, C64};
use crate::sampling::{derive_seed, random_algebraic_tensor, random_projection_any_rank, rng};

/// Least-squares slope of trace norm against dimension at or above which a
/// sweep counts as divergence evidence.
pub const DIVERGENCE_SLOPE: f64 = 0.5;
/// Minimum number of dimensions for a divergence verdict.
pub const DIVERGENCE_MIN_DIMS: usize = 4;
/// Relative spread of the top three trace norms below which a sweep counts
/// as boundedness evidence.
pub const STABLE_SPREAD: f64 = 0.01;
/// Longest simple-tensor sum drawn by the tracial probe.
pub const MAX_TENSOR_LEN: usize = 4;

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    Ok(())
}

/// `max |d(p,q)|` over seeded random projection pairs of every rank.
pub fn boundedness_probe(d: &DecoherenceFunctional, samples: usize, seed: u64) -> Result<f64> {
    check_samples(samples)?;
    let mut r = rng(seed);
    let n = d.dim();
    let mut sup = 0.0_f64;
    for _ in 0..samples {
        let p = random_projection_any_rank(&mut r, n);
        let q = random_projection_any_rank(&mut r, n);
        sup = sup.max(d.evaluate_unchecked(&p, &q).norm());
    }
    Ok(sup)
}

#[derive(Clone, Debug, Serialize)]
pub struct TracialProbe {
    pub dim: usize,
    pub sup: f64,
    pub samples: usize,
    pub seed: u64,
    /// Number of samples drawn with 1, 2, 3 and 4 simple tensors.
    pub length_histogram: [usize; MAX_TENSOR_LEN],
    /// Set when the dimension is below the range where `β` is guaranteed to
    /// come from a bounded bilinear extension.
    pub below_theorem_dim: bool,
}

/// `|⟨Xξ, ξ⟩|` maximised over unit `ξ` drawn from short sums of simple tensors.
fn tracial_sup(x: &ComplexMatrix, dim: usize, samples: usize, seed: u64) -> (f64, [usize; MAX_TENSOR_LEN]) {
    let mut r = rng(seed);
    let mut sup = 0.0_f64;
    let mut hist = [0; MAX_TENSOR_LEN];
    for _ in 0..samples {
        let len = r.random_range(1..=MAX_TENSOR_LEN);
        hist[len - 1] += 1;
        let xi = random_algebraic_tensor(&mut r, dim, len).to_vector();
        sup = sup.max(x.apply(&xi).inner(&xi).norm());
    }
    (sup, hist)
}

/// Sampled `sup |β(p_ξ)|` over unit `ξ` in the algebraic tensor product.
/// `β(p_ξ) = ⟨Xξ, ξ⟩` with `X` the polarized representative of `d`.
pub fn tracial_bound_probe(d: &DecoherenceFunctional, samples: usize, seed: u64) -> Result<TracialProbe> {
    check_samples(samples)?;
    let x = polarized_operator(d);
    let (sup, length_histogram) = tracial_sup(&x, d.dim(), samples, seed);
    Ok(TracialProbe {
        dim: d.dim(),
        sup,
        samples,
        seed,
        length_histogram,
        below_theorem_dim: d.dim() < MIN_THEOREM_DIM,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    TensorBoundedEvidence,
    DivergenceEvidence,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::TensorBoundedEvidence => "tensor_bounded_evidence",
            Verdict::DivergenceEvidence => "divergence_evidence",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub dims: Vec<usize>,
    pub trace_norms: Vec<f64>,
    pub sup_beta_rank_one: Vec<f64>,
    /// Wall-clock time per dimension; not reproducible.
    pub elapsed_ms: Vec<f64>,
    /// Least-squares slope of trace norm against dimension. Any rate is a
    /// property of the sampled family, not a general law.
    pub growth_slope: f64,
    pub verdict: Verdict,
    pub samples: usize,
    pub seed: u64,
    /// Swept dimensions where `β` need not come from a bounded extension.
    pub below_theorem_dim: Vec<usize>,
    /// `|tr X − 1|` per dimension.
    pub normalization_residuals: Vec<f64>,
    /// `‖X − W X* W‖_F` per dimension.
    pub swap_adjoint_residuals: Vec<f64>,
}

/// Seed used for the tracial samples at `dim` within a sweep.
pub fn sweep_seed(seed: u64, dim: usize) -> u64 {
    derive_seed(seed, dim as u64)
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

pub fn classify(dims: &[usize], trace_norms: &[f64]) -> (f64, Verdict) {
    let xs: Vec<f64> = dims.iter().map(|&d| d as f64).collect();
    let slope = least_squares_slope(&xs, trace_norms);
    if dims.len() >= DIVERGENCE_MIN_DIMS && slope >= DIVERGENCE_SLOPE {
        return (slope, Verdict::DivergenceEvidence);
    }
    if trace_norms.len() >= 3 {
        let top = &trace_norms[trace_norms.len() - 3..];
        let max = top.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = top.iter().cloned().fold(f64::INFINITY, f64::min);
        let scale = top.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let spread = if scale == 0.0 { 0.0 } else { (max - min) / scale };
        if spread < STABLE_SPREAD {
            return (slope, Verdict::TensorBoundedEvidence);
        }
    }
    (slope, Verdict::Inconclusive)
}

/// Sweeps a dimension-indexed family: per dimension, the trace norm of the
/// polarized representative and a sampled `sup |β(p_ξ)|` over rank-one
/// projections of the algebraic tensor product. The rank-one sample set is
/// the tracial probe's (seeded by [`sweep_seed`]) plus every basis product
/// `e_i⊗e_j`.
pub fn tensor_bound_probe<F>(family: F, dims: &[usize], samples: usize, seed: u64) -> Result<SweepReport>
where
    F: Fn(usize) -> Result<DecoherenceFunctional> + Sync,
{
    check_samples(samples)?;
    if dims.is_empty() {
        return Err(Error::InvalidArgument("dims must not be empty".into()));
    }
    if dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("dims must be strictly ascending".into()));
    }
    if let Some(&bad) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidDimension(bad));
    }

    struct Point {
        trace_norm: f64,
        sup: f64,
        elapsed_ms: f64,
        normalization: f64,
        swap: f64,
    }

    let points: Vec<Point> = dims
        .par_iter()
        .map(|&n| -> Result<Point> {
            let start = Instant::now();
            let d = family(n)?;
            if d.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: d.dim(),
                });
            }
            let x = polarized_operator(&d);
            let norm = trace_norm(&x)?;
            let (mut sup, _) = tracial_sup(&x, n, samples, sweep_seed(seed, n));
            for i in 0..n {
                for j in 0..n {
                    let xi = Vector::basis(n, i).kron(&Vector::basis(n, j));
                    sup = sup.max(x.apply(&xi).inner(&xi).norm());
                }
            }
            Ok(Point {
                trace_norm: norm,
                sup,
                elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
                normalization: (x.trace() - C64::new(1.0, 0.0)).norm(),
                swap: swap_adjoint_residual(&x, n),
            })
        })
        .collect::<Result<_>>()?;

    let trace_norms: Vec<f64> = points.iter().map(|p| p.trace_norm).collect();
    let (growth_slope, verdict) = classify(dims, &trace_norms);
    Ok(SweepReport {
        dims: dims.to_vec(),
        sup_beta_rank_one: points.iter().map(|p| p.sup).collect(),
        elapsed_ms: points.iter().map(|p| p.elapsed_ms).collect(),
        normalization_residuals: points.iter().map(|p| p.normalization).collect(),
        swap_adjoint_residuals: points.iter().map(|p| p.swap).collect(),
        trace_norms,
        growth_slope,
        verdict,
        samples,
        seed,
        below_theorem_dim: dims.iter().copied().filter(|&d| d < MIN_THEOREM_DIM).collect(),
    })
}
