//! Decoherence functionals on the projection lattice of `H`.
//!
//! A functional is stored through one of four backends, each of which
//! evaluates `d(p, q)` on pairs of projections. Everything else in the crate
//! (the bilinear extension, the ILS operator, the tracial decomposition)
//! only ever calls [`DecoherenceFunctional::evaluate`] on projections.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::histories::{orthogonal_decompose, orthogonal_decompose_random, ClassOperatorModel};
use crate::linalg::{
    factor_dim, kron_trace_unchecked, spectral_projections, trace_pair_unchecked, ComplexMatrix,
    ElementaryTensorSum, Projection, SpectralTerm, Vector, C64, I, MAX_HILBERT_DIM, ONE, TOL_UNIT,
    ZERO,
};
use crate::sampling::{random_orthogonal_pair, random_projection_any_rank, random_projection_with, rng, SeededRng};

/// Smallest dimension covered by the extension and representation theorems.
pub const MIN_THEOREM_DIM: usize = 3;
/// Imaginary parts of diagonal values up to this size are treated as zero.
pub const TOL_DIAGONAL_IMAG: f64 = 1e-9;

const TOL_GRAM_HERMITIAN: f64 = 1e-9;
const TOL_TRUNCATE: f64 = 1e-12;

/// Storage for a decoherence functional.
#[derive(Clone, Debug)]
pub enum Backend {
    /// `d(p,q) = tr((p⊗q)X)` for an operator `X` on `H⊗H`.
    Operator(ComplexMatrix),
    /// `d(p,q) = ⟨pψ, qψ⟩`.
    PureState(Vector),
    /// `d(p,q) = Q(p,q) = vec(q)* G vec(p)`, with `G` the Gram matrix of the
    /// Hermitian form over the matrix units `E_rc` (row-major index `r·d + c`),
    /// `G[a][b] = Q(E_b, E_a)`.
    Form(ComplexMatrix),
    /// Standard quantum mechanics: a projection `p` is the event "`p` at the
    /// final scheduled time" with earlier times coarse-grained, so its class
    /// operator is `U(T)* p U(T)` and `d(p,q) = tr(C_p ρ C_q*)`.
    ClassOperator(Arc<ClassOperatorModel>),
}

#[derive(Clone, Debug)]
pub struct DecoherenceFunctional {
    dim: usize,
    backend: Backend,
}

fn check_hilbert_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if dim > MAX_HILBERT_DIM {
        return Err(Error::DimensionLimit {
            requested: dim,
            limit: MAX_HILBERT_DIM,
        });
    }
    Ok(())
}

impl DecoherenceFunctional {
    /// Operator-backed functional. `x` is not checked against the ILS
    /// conditions; use [`crate::ils::df_from_operator`] for that.
    pub fn operator_backed(x: ComplexMatrix) -> Result<Self> {
        let dim = factor_dim(x.dim()).ok_or(Error::InvalidArgument(format!(
            "operator dimension {} is not a square",
            x.dim()
        )))?;
        check_hilbert_dim(dim)?;
        Ok(Self {
            dim,
            backend: Backend::Operator(x),
        })
    }

    pub fn pure_state(psi: Vector) -> Result<Self> {
        check_hilbert_dim(psi.dim())?;
        if !psi.is_unit(TOL_UNIT) {
            return Err(Error::NotUnit { norm: psi.norm() });
        }
        Ok(Self {
            dim: psi.dim(),
            backend: Backend::PureState(psi),
        })
    }

    pub fn form_backed(gram: ComplexMatrix) -> Result<Self> {
        let dim = factor_dim(gram.dim()).ok_or(Error::InvalidArgument(format!(
            "Gram dimension {} is not a square",
            gram.dim()
        )))?;
        check_hilbert_dim(dim)?;
        let residual = gram.hermitian_residual();
        if residual > TOL_GRAM_HERMITIAN * gram.frobenius_norm().max(1.0) {
            return Err(Error::NonHermitianGram { residual });
        }
        Ok(Self {
            dim,
            backend: Backend::Form(gram),
        })
    }

    pub fn class_operator(model: Arc<ClassOperatorModel>) -> Self {
        Self {
            dim: model.dim(),
            backend: Backend::ClassOperator(model),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn backend_name(&self) -> &'static str {
        match self.backend {
            Backend::Operator(_) => "operator",
            Backend::PureState(_) => "pure_state",
            Backend::Form(_) => "form",
            Backend::ClassOperator(_) => "class_operator",
        }
    }

    pub fn evaluate(&self, p: &Projection, q: &Projection) -> Result<C64> {
        for m in [p, q] {
            if m.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: m.dim(),
                });
            }
        }
        Ok(self.evaluate_unchecked(p, q))
    }

    pub(crate) fn evaluate_unchecked(&self, p: &Projection, q: &Projection) -> C64 {
        self.evaluate_raw(p.matrix(), q.matrix())
    }

    /// Backend formula applied to arbitrary matrices of the right size. Only
    /// meaningful on projections; callers outside the crate go through
    /// [`Self::evaluate`].
    pub(crate) fn evaluate_raw(&self, p: &ComplexMatrix, q: &ComplexMatrix) -> C64 {
        match &self.backend {
            Backend::Operator(x) => kron_trace_unchecked(p, q, x),
            Backend::PureState(psi) => p.apply(psi).inner(&q.apply(psi)),
            Backend::Form(gram) => {
                let d = self.dim;
                let mut acc = ZERO;
                for a in 0..d * d {
                    let qa = q[(a / d, a % d)];
                    if qa == ZERO {
                        continue;
                    }
                    let mut row = ZERO;
                    for b in 0..d * d {
                        row += gram[(a, b)] * p[(b / d, b % d)];
                    }
                    acc += qa.conj() * row;
                }
                acc
            }
            Backend::ClassOperator(model) => trace_pair_unchecked(&(p * model.final_state()), q),
        }
    }

    /// Re-expresses the functional on a Hilbert space of dimension `dim`.
    /// Growing pads with zeros (class-operator schedules absorb the new
    /// directions into their last projection); shrinking is allowed only when
    /// nothing outside the leading block is lost.
    pub fn resize(&self, dim: usize) -> Result<Self> {
        check_hilbert_dim(dim)?;
        if dim == self.dim {
            return Ok(self.clone());
        }
        let old = self.dim;
        let keep = old.min(dim);
        match &self.backend {
            Backend::PureState(psi) => {
                let amps = psi.amplitudes();
                let dropped: f64 = amps[keep..].iter().map(|z| z.norm_sqr()).sum();
                if dropped.sqrt() > TOL_TRUNCATE {
                    return Err(Error::InvalidArgument(format!(
                        "cannot truncate pure state to dimension {dim}: amplitude outside the block"
                    )));
                }
                let mut next = vec![ZERO; dim];
                next[..keep].copy_from_slice(&amps[..keep]);
                Self::pure_state(Vector::new(next)?)
            }
            Backend::Operator(x) => Self::operator_backed(resize_pair_indexed(x, old, dim)?),
            Backend::Form(g) => Self::form_backed(resize_pair_indexed(g, old, dim)?),
            Backend::ClassOperator(model) => {
                if dim < old {
                    return Err(Error::InvalidArgument(
                        "class-operator models can only be embedded into larger dimensions".into(),
                    ));
                }
                let pad = |m: &ComplexMatrix| {
                    ComplexMatrix::from_fn(dim, |i, j| if i < old && j < old { m[(i, j)] } else { ZERO })
                };
                let schedules = model
                    .schedules()
                    .iter()
                    .map(|s| {
                        let last = s.len() - 1;
                        s.iter()
                            .enumerate()
                            .map(|(k, p)| {
                                let mut m = pad(p.matrix());
                                let mut rank = p.rank();
                                if k == last {
                                    for i in old..dim {
                                        m.set(i, i, ONE);
                                    }
                                    rank += dim - old;
                                }
                                Projection::from_parts_unchecked(m, rank)
                            })
                            .collect()
                    })
                    .collect();
                let model = ClassOperatorModel::new(
                    pad(model.rho()),
                    pad(model.hamiltonian()),
                    model.times().to_vec(),
                    schedules,
                )?;
                Ok(Self::class_operator(Arc::new(model)))
            }
        }
    }
}

/// Resizes a matrix indexed by pairs `(a,b)` of `H`-indices on both sides.
fn resize_pair_indexed(m: &ComplexMatrix, old: usize, new: usize) -> Result<ComplexMatrix> {
    let keep = old.min(new);
    let mut lost = 0.0_f64;
    for r in 0..old * old {
        for c in 0..old * old {
            let inside = r / old < keep && r % old < keep && c / old < keep && c % old < keep;
            if !inside {
                lost = lost.max(m[(r, c)].norm());
            }
        }
    }
    if lost > TOL_TRUNCATE {
        return Err(Error::InvalidArgument(format!(
            "cannot truncate to dimension {new}: entries outside the block (max {lost:.3e})"
        )));
    }
    Ok(ComplexMatrix::from_fn(new * new, |r, c| {
        let (a, b, x, y) = (r / new, r % new, c / new, c % new);
        if a < keep && b < keep && x < keep && y < keep {
            m[(a * old + b, x * old + y)]
        } else {
            ZERO
        }
    }))
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct AxiomVerdicts {
    pub hermiticity: bool,
    pub positivity: bool,
    pub normalization: bool,
    pub orthoadditivity: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub hermiticity_residual: f64,
    pub positivity_min: f64,
    pub normalization_residual: f64,
    pub orthoadditivity_residual: f64,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub verdicts: AxiomVerdicts,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        let v = self.verdicts;
        v.hermiticity && v.positivity && v.normalization && v.orthoadditivity
    }
}

/// Sampled check of Hermiticity, positivity, normalization and (finite)
/// orthoadditivity.
///
/// Positivity is probed on every basis rank-one projection plus random
/// projections of all ranks; orthoadditivity on random orthogonal pairs and
/// on full rank-one splittings of random projections.
pub fn check_axioms(d: &DecoherenceFunctional, samples: usize, seed: u64, tol: f64) -> AxiomReport {
    let dim = d.dim();
    let mut rng = rng(seed);
    let mut herm = 0.0_f64;
    let mut pos_min = f64::INFINITY;
    let mut additivity = 0.0_f64;

    let diagonal = |p: &Projection, herm: &mut f64, pos_min: &mut f64| {
        let v = d.evaluate_unchecked(p, p);
        *herm = herm.max(v.im.abs());
        *pos_min = pos_min.min(v.re);
    };

    for i in 0..dim {
        let p = Projection::from_parts_unchecked(ComplexMatrix::matrix_unit(dim, i, i), 1);
        diagonal(&p, &mut herm, &mut pos_min);
    }

    for s in 0..samples.max(1) {
        let p = random_projection_any_rank(&mut rng, dim);
        let q = random_projection_any_rank(&mut rng, dim);
        let pq = d.evaluate_unchecked(&p, &q);
        let qp = d.evaluate_unchecked(&q, &p);
        herm = herm.max((pq - qp.conj()).norm());
        diagonal(&p, &mut herm, &mut pos_min);
        let r1 = random_projection_with(&mut rng, dim, 1).expect("rank 1 fits");
        diagonal(&r1, &mut herm, &mut pos_min);

        let (p1, p2) = random_orthogonal_pair(&mut rng, dim);
        let sum = p1.orthogonal_sum(&p2);
        let lhs = d.evaluate_unchecked(&sum, &q);
        let rhs = d.evaluate_unchecked(&p1, &q) + d.evaluate_unchecked(&p2, &q);
        additivity = additivity.max((lhs - rhs).norm());

        if s % 4 == 0 {
            additivity = additivity.max(countable_additivity_residual(d, &p, &q, &mut rng));
        }
    }

    let one = Projection::identity(dim);
    let norm_res = (d.evaluate_unchecked(&one, &one) - ONE).norm();

    AxiomReport {
        hermiticity_residual: herm,
        positivity_min: pos_min,
        normalization_residual: norm_res,
        orthoadditivity_residual: additivity,
        samples: samples.max(1),
        seed,
        tolerance: tol,
        verdicts: AxiomVerdicts {
            hermiticity: herm <= tol,
            positivity: pos_min >= -tol,
            normalization: norm_res <= tol,
            orthoadditivity: additivity <= tol,
        },
    }
}

/// `|d(Σ p_i, q) − Σ d(p_i, q)|` over a random rank-one splitting of `p`.
pub fn countable_additivity_residual(
    d: &DecoherenceFunctional,
    p: &Projection,
    q: &Projection,
    rng: &mut SeededRng,
) -> f64 {
    let parts = orthogonal_decompose_random(p, 1, rng);
    let total: C64 = parts.iter().map(|pi| d.evaluate_unchecked(pi, q)).sum();
    (d.evaluate_unchecked(p, q) - total).norm()
}

/// The Hermitian parts of an operator, each spectrally decomposed.
#[derive(Clone, Debug)]
pub struct HermitianSplit {
    pub real: Vec<SpectralTerm>,
    pub imag: Vec<SpectralTerm>,
}

impl HermitianSplit {
    /// `x = Σ λ_j p_j + i·Σ μ_k q_k`.
    pub fn of(x: &ComplexMatrix) -> Result<Self> {
        let (re, im) = x.hermitian_parts();
        Ok(Self {
            real: spectral_projections(&re)?,
            imag: spectral_projections(&im)?,
        })
    }

    /// Splits every eigenprojection into randomly rotated rank-one pieces.
    /// The represented operator is unchanged.
    pub fn refined(&self, rng: &mut SeededRng) -> Self {
        let refine = |terms: &[SpectralTerm], rng: &mut SeededRng| {
            terms
                .iter()
                .flat_map(|t| {
                    orthogonal_decompose_random(&t.projection, 1, rng)
                        .into_iter()
                        .map(|projection| SpectralTerm {
                            eigenvalue: t.eigenvalue,
                            projection,
                        })
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
        };
        let real = refine(&self.real, rng);
        let imag = refine(&self.imag, rng);
        Self { real, imag }
    }

    pub fn reassemble(&self, dim: usize) -> ComplexMatrix {
        let sum = |terms: &[SpectralTerm]| {
            terms.iter().fold(ComplexMatrix::zeros(dim), |acc, t| {
                &acc + &t.projection.matrix().scale(C64::new(t.eigenvalue, 0.0))
            })
        };
        &sum(&self.real) + &sum(&self.imag).scale(I)
    }
}

/// The bounded bilinear extension `D` of a decoherence functional.
#[derive(Clone, Copy, Debug)]
pub struct BilinearForm<'a> {
    source: &'a DecoherenceFunctional,
}

/// Extends `d` to a bilinear form on all operators by splitting each argument
/// into Hermitian parts and expanding over their spectral projections:
/// `D(x,y) = Σ_{j,k} λ_j μ_k d(p_j, q_k)` on each part.
///
/// Rejects dimensions below three, where the extension theorem does not
/// apply. The axioms are assumed, not re-checked.
pub fn extend_to_bilinear(d: &DecoherenceFunctional) -> Result<BilinearForm<'_>> {
    if d.dim() < MIN_THEOREM_DIM {
        return Err(Error::DimensionExcluded { dim: d.dim() });
    }
    Ok(BilinearForm { source: d })
}

impl<'a> BilinearForm<'a> {
    pub fn source(&self) -> &'a DecoherenceFunctional {
        self.source
    }

    fn check(&self, m: &ComplexMatrix) -> Result<()> {
        if m.dim() != self.source.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.source.dim(),
                found: m.dim(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> Result<C64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.eval_split(&HermitianSplit::of(x)?, &HermitianSplit::of(y)?))
    }

    fn pair(&self, xs: &[SpectralTerm], ys: &[SpectralTerm]) -> C64 {
        let mut acc = ZERO;
        for a in xs.iter().filter(|t| t.eigenvalue != 0.0) {
            for b in ys.iter().filter(|t| t.eigenvalue != 0.0) {
                acc += a.eigenvalue * b.eigenvalue * self.source.evaluate_unchecked(&a.projection, &b.projection);
            }
        }
        acc
    }

    /// `D(x,y)` from given decompositions of `x` and `y`.
    pub fn eval_split(&self, x: &HermitianSplit, y: &HermitianSplit) -> C64 {
        self.pair(&x.real, &y.real) + I * self.pair(&x.real, &y.imag) + I * self.pair(&x.imag, &y.real)
            - self.pair(&x.imag, &y.imag)
    }

    /// `Q(x,y) = D(x, y*)`.
    pub fn sesquilinear(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> Result<C64> {
        self.eval(x, &y.adjoint())
    }

    /// `β(Σ x_i⊗y_i) = Σ D(x_i, y_i)`.
    pub fn beta(&self, s: &ElementaryTensorSum) -> Result<C64> {
        s.terms().iter().map(|(x, y)| self.eval(x, y)).sum()
    }
}

pub fn sesquilinear_q(form: &BilinearForm<'_>, x: &ComplexMatrix, y: &ComplexMatrix) -> Result<C64> {
    form.sesquilinear(x, y)
}

/// The linear functional on the algebraic tensor product induced by `D`.
pub fn beta(d: &DecoherenceFunctional, s: &ElementaryTensorSum) -> Result<C64> {
    let form = extend_to_bilinear(d)?;
    if s.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: s.dim(),
        });
    }
    form.beta(s)
}

/// Rank-one splitting of each projection, for decomposition-invariance checks.
pub fn split_rank_one(p: &Projection) -> Vec<Projection> {
    orthogonal_decompose(p, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, kron_trace, random_projection, rank_one_proj, AlgebraicTensor};
    use crate::sampling::{random_matrix, random_unit_vector};

    fn rho_half() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[0.5, 0.5, 0.0])
    }

    fn product_df(rho: &ComplexMatrix) -> DecoherenceFunctional {
        DecoherenceFunctional::operator_backed(kron(rho, rho).unwrap()).unwrap()
    }

    fn e(dim: usize, i: usize) -> Vector {
        Vector::basis(dim, i)
    }

    #[test]
    fn normalization_on_every_backend() {
        let one = Projection::identity(3);
        let psi = random_unit_vector(&mut rng(2), 3);
        let pure = DecoherenceFunctional::pure_state(psi).unwrap();
        let op = product_df(&rho_half());
        for d in [pure, op] {
            assert!((d.evaluate(&one, &one).unwrap() - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn pure_state_hand_values() {
        let d = DecoherenceFunctional::pure_state(e(3, 0)).unwrap();
        let p = rank_one_proj(&e(3, 0)).unwrap();
        assert!((d.evaluate(&p, &p).unwrap() - ONE).norm() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let xi = Vector::new(vec![C64::new(s, 0.0), C64::new(s, 0.0), ZERO]).unwrap();
        let p = rank_one_proj(&xi).unwrap();
        let q = Projection::new(ComplexMatrix::matrix_unit(3, 0, 0)).unwrap();
        // pψ = ½(e₁+e₂), qψ = e₁.
        assert!((d.evaluate(&p, &q).unwrap() - C64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn evaluate_checks_dimensions() {
        let d = DecoherenceFunctional::pure_state(e(3, 0)).unwrap();
        assert!(matches!(
            d.evaluate(&Projection::identity(2), &Projection::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn axioms_hold_for_product_operator() {
        let rho = rho_half();
        let d = product_df(&rho);
        let report = check_axioms(&d, 100, 4, 1e-10);
        assert!(report.passed(), "{report:?}");
        // Direct trace oracle: d(p,q) = tr(pρ)·tr(qρ).
        let p = random_projection(3, 2, 8).unwrap();
        let q = random_projection(3, 1, 9).unwrap();
        let expected = (p.matrix() * &rho).trace() * (q.matrix() * &rho).trace();
        assert!((d.evaluate(&p, &q).unwrap() - expected).norm() < 1e-12);
    }

    #[test]
    fn axioms_hold_for_pure_state() {
        let d = DecoherenceFunctional::pure_state(random_unit_vector(&mut rng(12), 4)).unwrap();
        assert!(check_axioms(&d, 100, 5, 1e-10).passed());
    }

    #[test]
    fn corrupted_trace_breaks_normalization_only() {
        let rho = rho_half();
        let x = kron(&rho, &rho).unwrap().scale(C64::new(2.0, 0.0));
        let d = DecoherenceFunctional::operator_backed(x).unwrap();
        let report = check_axioms(&d, 50, 1, 1e-10);
        assert!((report.normalization_residual - 1.0).abs() < 1e-12);
        assert!(!report.verdicts.normalization);
        assert!(report.verdicts.hermiticity && report.verdicts.positivity && report.verdicts.orthoadditivity);
    }

    #[test]
    fn extension_rejects_dimension_two() {
        let d = DecoherenceFunctional::pure_state(e(2, 0)).unwrap();
        assert!(matches!(extend_to_bilinear(&d), Err(Error::DimensionExcluded { dim: 2 })));
    }

    #[test]
    fn extension_restricts_to_d() {
        let d = DecoherenceFunctional::pure_state(random_unit_vector(&mut rng(3), 3)).unwrap();
        let form = extend_to_bilinear(&d).unwrap();
        let id = ComplexMatrix::identity(3);
        assert!((form.eval(&id, &id).unwrap() - ONE).norm() < 1e-12);
        let mut r = rng(4);
        for _ in 0..100 {
            let p = random_projection_any_rank(&mut r, 3);
            let q = random_projection_any_rank(&mut r, 3);
            let lhs = form.eval(p.matrix(), q.matrix()).unwrap();
            assert!((lhs - d.evaluate(&p, &q).unwrap()).norm() < 1e-9);
        }
    }

    #[test]
    fn extension_matches_kron_trace_for_operator_backend() {
        let mut r = rng(10);
        let x0 = random_matrix(&mut r, 16);
        let d = DecoherenceFunctional::operator_backed(x0.clone()).unwrap();
        let form = extend_to_bilinear(&d).unwrap();
        for _ in 0..10 {
            let x = random_matrix(&mut r, 4);
            let y = random_matrix(&mut r, 4);
            let expected = kron_trace(&x, &y, &x0).unwrap();
            assert!((form.eval(&x, &y).unwrap() - expected).norm() < 1e-9);
        }
    }

    #[test]
    fn extension_is_decomposition_independent() {
        let d = product_df(&ComplexMatrix::diagonal(&[0.2, 0.3, 0.5]));
        let form = extend_to_bilinear(&d).unwrap();
        let mut r = rng(6);
        let u = crate::sampling::random_unitary(&mut r, 3);
        let degenerate = &(&u * &ComplexMatrix::diagonal(&[2.0, 2.0, -1.0])) * &u.adjoint();
        let y = random_matrix(&mut r, 3);
        let sx = HermitianSplit::of(&degenerate).unwrap();
        let sy = HermitianSplit::of(&y).unwrap();
        assert_eq!(sx.real.len(), 2);
        let base = form.eval_split(&sx, &sy);
        for _ in 0..20 {
            let fine = sx.refined(&mut r);
            assert!(fine.reassemble(3).distance(&degenerate) < 1e-9);
            assert!((form.eval_split(&fine, &sy.refined(&mut r)) - base).norm() < 1e-8);
        }
    }

    #[test]
    fn sesquilinear_examples() {
        let psi = random_unit_vector(&mut rng(20), 3);
        let d = DecoherenceFunctional::pure_state(psi.clone()).unwrap();
        let form = extend_to_bilinear(&d).unwrap();
        let id = ComplexMatrix::identity(3);
        assert!((sesquilinear_q(&form, &id, &id).unwrap() - ONE).norm() < 1e-12);
        let mut r = rng(21);
        let p = random_projection_any_rank(&mut r, 3);
        let qpp = form.sesquilinear(p.matrix(), p.matrix()).unwrap();
        assert!(qpp.re >= -1e-9 && qpp.im.abs() < 1e-9);
        for _ in 0..10 {
            let x = random_matrix(&mut r, 3);
            let q = form.sesquilinear(&x, &x).unwrap();
            let norm2 = x.apply(&psi).norm().powi(2);
            assert!((q - C64::new(norm2, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn beta_examples() {
        let d = product_df(&rho_half());
        let mut r = rng(30);
        for _ in 0..10 {
            let p = random_projection_any_rank(&mut r, 3);
            let q = random_projection_any_rank(&mut r, 3);
            let s = ElementaryTensorSum::single(p.matrix().clone(), q.matrix().clone()).unwrap();
            assert!((beta(&d, &s).unwrap() - d.evaluate(&p, &q).unwrap()).norm() < 1e-9);
        }
        assert_eq!(beta(&d, &ElementaryTensorSum::zero(3)).unwrap(), ZERO);

        let pure = DecoherenceFunctional::pure_state(e(4, 0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let xi = AlgebraicTensor::new(vec![
            (e(4, 0).scale(C64::new(s, 0.0)), e(4, 1)),
            (e(4, 1).scale(C64::new(s, 0.0)), e(4, 0)),
        ])
        .unwrap();
        let value = beta(&pure, &xi.projection_sum()).unwrap();
        assert!((value - C64::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn beta_is_invariant_under_regrouping() {
        let d = DecoherenceFunctional::pure_state(random_unit_vector(&mut rng(40), 3)).unwrap();
        let mut r = rng(41);
        let a = random_matrix(&mut r, 3);
        let b = random_matrix(&mut r, 3);
        let y = random_matrix(&mut r, 3);
        let z = random_matrix(&mut r, 3);
        // (a+b)⊗y + a⊗z  ==  a⊗(y+z) + b⊗y
        let s1 = ElementaryTensorSum::new(vec![(&a + &b, y.clone()), (a.clone(), z.clone())]).unwrap();
        let s2 = ElementaryTensorSum::new(vec![(a.clone(), &y + &z), (b.clone(), y.clone())]).unwrap();
        assert!(s1.to_matrix().unwrap().distance(&s2.to_matrix().unwrap()) < 1e-12);
        assert!((beta(&d, &s1).unwrap() - beta(&d, &s2).unwrap()).norm() < 1e-9);
    }

    #[test]
    fn resize_pads_and_truncates() {
        let d = DecoherenceFunctional::pure_state(e(3, 0)).unwrap();
        let big = d.resize(5).unwrap();
        assert_eq!(big.dim(), 5);
        let small = big.resize(2).unwrap();
        let one = Projection::identity(2);
        assert!((small.evaluate(&one, &one).unwrap() - ONE).norm() < 1e-15);

        let op = product_df(&rho_half()).resize(4).unwrap();
        let one = Projection::identity(4);
        assert!((op.evaluate(&one, &one).unwrap() - ONE).norm() < 1e-12);
        let psi = random_unit_vector(&mut rng(1), 3);
        assert!(DecoherenceFunctional::pure_state(psi).unwrap().resize(2).is_err());
    }
}
