//! History spaces: the projection lattice, orthogonal decompositions, and
//! the class-operator model of standard quantum mechanics.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::decoherence::DecoherenceFunctional;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Projection, C64, I};
use crate::sampling::{random_unitary, SeededRng};

const TOL_MODEL: f64 = 1e-9;
/// Two projections count as orthogonal when `‖p·q‖_F` is below this.
pub const TOL_ORTHOGONAL: f64 = 1e-8;

/// Density matrix, Hamiltonian and a projective schedule per time.
///
/// Single-time projectors are taken in the Heisenberg picture,
/// `p(t) = U(t)* p U(t)` with `U(t) = exp(−i·t·H)`.
#[derive(Clone, Debug)]
pub struct ClassOperatorModel {
    rho: ComplexMatrix,
    hamiltonian: ComplexMatrix,
    times: Vec<f64>,
    schedules: Vec<Vec<Projection>>,
    heisenberg: Vec<Vec<ComplexMatrix>>,
    final_state: ComplexMatrix,
}

/// One projector index per scheduled time.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct HomogeneousHistory {
    pub choices: Vec<usize>,
}

impl HomogeneousHistory {
    pub fn new(choices: Vec<usize>) -> Self {
        Self { choices }
    }
}

/// `exp(−i·t·H)` by scaling and squaring with a Padé approximant.
pub fn evolution(hamiltonian: &ComplexMatrix, t: f64) -> ComplexMatrix {
    ComplexMatrix::wrap(hamiltonian.scale(-I * t).as_nalgebra().exp())
}

impl ClassOperatorModel {
    pub fn new(
        rho: ComplexMatrix,
        hamiltonian: ComplexMatrix,
        times: Vec<f64>,
        schedules: Vec<Vec<Projection>>,
    ) -> Result<Self> {
        let dim = rho.dim();
        if hamiltonian.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: hamiltonian.dim(),
            });
        }
        validate_density(&rho).map_err(Error::InvalidModel)?;
        let h_res = hamiltonian.hermitian_residual();
        if h_res > TOL_MODEL * hamiltonian.frobenius_norm().max(1.0) {
            return Err(Error::InvalidModel(format!(
                "hamiltonian: not Hermitian (residual {h_res:.3e})"
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidModel("times: must be finite and ascending".into()));
        }
        if schedules.len() != times.len() {
            return Err(Error::InvalidModel(format!(
                "schedules: {} schedules for {} times",
                schedules.len(),
                times.len()
            )));
        }
        for (slot, schedule) in schedules.iter().enumerate() {
            validate_schedule(schedule, dim)
                .map_err(|m| Error::InvalidModel(format!("schedules[{slot}]: {m}")))?;
        }

        let heisenberg = times
            .iter()
            .zip(&schedules)
            .map(|(&t, schedule)| {
                let u = evolution(&hamiltonian, t);
                let u_adj = u.adjoint();
                schedule
                    .iter()
                    .map(|p| &(&u_adj * p.matrix()) * &u)
                    .collect()
            })
            .collect();
        let t_final = times.last().copied().unwrap_or(0.0);
        let u = evolution(&hamiltonian, t_final);
        let final_state = &(&u * &rho) * &u.adjoint();

        Ok(Self {
            rho,
            hamiltonian,
            times,
            schedules,
            heisenberg,
            final_state,
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn schedules(&self) -> &[Vec<Projection>] {
        &self.schedules
    }

    /// `U(T)·ρ·U(T)*` at the last scheduled time `T` (or `ρ` without times).
    pub fn final_state(&self) -> &ComplexMatrix {
        &self.final_state
    }

    /// Heisenberg-picture projector for `choice` at time slot `slot`.
    pub fn heisenberg_projector(&self, slot: usize, choice: usize) -> Result<&ComplexMatrix> {
        let row = self.heisenberg.get(slot).ok_or(Error::HistoryIndex {
            slot,
            choice,
            available: 0,
        })?;
        row.get(choice).ok_or(Error::HistoryIndex {
            slot,
            choice,
            available: row.len(),
        })
    }

    /// Every history choosing one projection per time, in lexicographic order.
    pub fn homogeneous_histories(&self) -> Vec<HomogeneousHistory> {
        let mut out = vec![Vec::new()];
        for schedule in &self.schedules {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<usize>| {
                    (0..schedule.len()).map(move |k| {
                        let mut next = prefix.clone();
                        next.push(k);
                        next
                    })
                })
                .collect();
        }
        out.into_iter().map(HomogeneousHistory::new).collect()
    }
}

fn validate_density(rho: &ComplexMatrix) -> std::result::Result<(), String> {
    let res = rho.hermitian_residual();
    if res > TOL_MODEL {
        return Err(format!("rho: not Hermitian (residual {res:.3e})"));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > TOL_MODEL {
        return Err(format!("rho: trace is {}, expected 1", tr.re));
    }
    let (h, _) = rho.hermitian_parts();
    let min = h
        .as_nalgebra()
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v));
    if min < -TOL_MODEL {
        return Err(format!("rho: not positive semidefinite (eigenvalue {min:.3e})"));
    }
    Ok(())
}

fn validate_schedule(schedule: &[Projection], dim: usize) -> std::result::Result<(), String> {
    if schedule.is_empty() {
        return Err("empty schedule".into());
    }
    let mut sum = ComplexMatrix::zeros(dim);
    for (i, p) in schedule.iter().enumerate() {
        if p.dim() != dim {
            return Err(format!("projection {i} has dimension {}, expected {dim}", p.dim()));
        }
        for (j, q) in schedule.iter().enumerate().skip(i + 1) {
            let overlap = p.overlap(q);
            if overlap > TOL_MODEL {
                return Err(format!("projections {i} and {j} are not orthogonal ({overlap:.3e})"));
            }
        }
        sum = &sum + p.matrix();
    }
    let resid = sum.distance(&ComplexMatrix::identity(dim));
    if resid > TOL_MODEL {
        return Err(format!("projections do not sum to the identity ({resid:.3e})"));
    }
    Ok(())
}

/// `C_h = p_n(t_n)···p_1(t_1)`.
pub fn class_operator(model: &ClassOperatorModel, h: &HomogeneousHistory) -> Result<ComplexMatrix> {
    if h.choices.len() != model.times.len() {
        return Err(Error::InvalidArgument(format!(
            "history has {} choices but the model has {} times",
            h.choices.len(),
            model.times.len()
        )));
    }
    let mut c = ComplexMatrix::identity(model.dim());
    for (slot, &choice) in h.choices.iter().enumerate() {
        c = model.heisenberg_projector(slot, choice)? * &c;
    }
    Ok(c)
}

/// `tr(C_h ρ C_k*)`.
pub fn history_decoherence(
    model: &ClassOperatorModel,
    h: &HomogeneousHistory,
    k: &HomogeneousHistory,
) -> Result<C64> {
    let ch = class_operator(model, h)?;
    let ck = class_operator(model, k)?;
    Ok((&(&ch * &model.rho) * &ck.adjoint()).trace())
}

/// Class-operator-backed decoherence functional of the model.
pub fn standard_df(model: ClassOperatorModel) -> DecoherenceFunctional {
    DecoherenceFunctional::class_operator(Arc::new(model))
}

fn range_basis(p: &Projection) -> DMatrix<C64> {
    let d = p.dim();
    if p.rank() == 0 {
        return DMatrix::zeros(d, 0);
    }
    let eig = p.matrix().as_nalgebra().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let r = p.rank();
    DMatrix::from_fn(d, r, |i, c| eig.eigenvectors[(i, order[c])])
}

fn blocks_from_basis(basis: &DMatrix<C64>, max_rank: usize) -> Vec<Projection> {
    let r = basis.ncols();
    let step = max_rank.max(1);
    (0..r)
        .step_by(step)
        .map(|start| {
            let width = step.min(r - start);
            Projection::from_orthonormal_columns(&basis.columns(start, width).into_owned())
        })
        .collect()
}

/// Splits `p` into pairwise orthogonal projections of rank ≤ `max_rank`.
pub fn orthogonal_decompose(p: &Projection, max_rank: usize) -> Vec<Projection> {
    blocks_from_basis(&range_basis(p), max_rank)
}

/// Like [`orthogonal_decompose`], but the range basis is first rotated by a
/// random unitary so repeated calls give different decompositions.
pub fn orthogonal_decompose_random(p: &Projection, max_rank: usize, rng: &mut SeededRng) -> Vec<Projection> {
    let basis = range_basis(p);
    if basis.ncols() == 0 {
        return Vec::new();
    }
    let rot = random_unitary(rng, basis.ncols());
    blocks_from_basis(&(basis * rot.as_nalgebra()), max_rank)
}

/// Off-diagonal interference measure used to call a set consistent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyCriterion {
    /// `Re d(h_i, h_j) = 0` for `i ≠ j`.
    #[default]
    Weak,
    /// `|d(h_i, h_j)| = 0` for `i ≠ j`.
    Medium,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub criterion: ConsistencyCriterion,
    pub tolerance: f64,
    pub off_diagonal_residual: f64,
    pub probabilities: Vec<f64>,
    pub total_probability: f64,
    pub consistent: bool,
}

fn build_report(
    values: &[Vec<C64>],
    tolerance: f64,
    criterion: ConsistencyCriterion,
) -> ConsistencyReport {
    let mut off = 0.0_f64;
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                let m = match criterion {
                    ConsistencyCriterion::Weak => v.re.abs(),
                    ConsistencyCriterion::Medium => v.norm(),
                };
                off = off.max(m);
            }
        }
    }
    let probabilities: Vec<f64> = values.iter().enumerate().map(|(i, r)| r[i].re).collect();
    ConsistencyReport {
        criterion,
        tolerance,
        off_diagonal_residual: off,
        total_probability: probabilities.iter().sum(),
        probabilities,
        consistent: off <= tolerance,
    }
}

/// Interference report for a set of pairwise orthogonal projections.
pub fn consistency_report(
    d: &DecoherenceFunctional,
    set: &[Projection],
    tolerance: f64,
    criterion: ConsistencyCriterion,
) -> Result<ConsistencyReport> {
    for (i, p) in set.iter().enumerate() {
        if p.dim() != d.dim() {
            return Err(Error::DimensionMismatch {
                expected: d.dim(),
                found: p.dim(),
            });
        }
        for (j, q) in set.iter().enumerate().skip(i + 1) {
            let residual = p.overlap(q);
            if residual > TOL_ORTHOGONAL {
                return Err(Error::NotOrthogonal {
                    first: i,
                    second: j,
                    residual,
                });
            }
        }
    }
    let values: Vec<Vec<C64>> = set
        .iter()
        .map(|p| set.iter().map(|q| d.evaluate_unchecked(p, q)).collect())
        .collect();
    Ok(build_report(&values, tolerance, criterion))
}

/// Interference report over the model's full family of homogeneous histories.
pub fn history_consistency_report(
    model: &ClassOperatorModel,
    tolerance: f64,
    criterion: ConsistencyCriterion,
) -> Result<ConsistencyReport> {
    let class_ops = model
        .homogeneous_histories()
        .iter()
        .map(|h| class_operator(model, h))
        .collect::<Result<Vec<_>>>()?;
    let weighted: Vec<ComplexMatrix> = class_ops.iter().map(|c| c * &model.rho).collect();
    let values: Vec<Vec<C64>> = weighted
        .iter()
        .map(|cr| {
            class_ops
                .iter()
                .map(|ck| crate::linalg::trace_pair_unchecked(cr, &ck.adjoint()))
                .collect()
        })
        .collect();
    Ok(build_report(&values, tolerance, criterion))
}
