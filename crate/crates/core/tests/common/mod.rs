#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use histrep::histories::ClassOperatorModel;
use histrep::linalg::{kron, ComplexMatrix, Projection, C64};
use histrep::sampling::{random_hermitian, random_matrix, random_projection_with, random_unit_vector, SeededRng};
use histrep::tracial::{gram_matrix, pure_state_m};
use histrep::DecoherenceFunctional;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

pub fn random_density(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    m.scale(C64::new(1.0 / tr, 0.0))
}

/// A convex mix of a symmetrised product `½(ρ⊗σ + σ⊗ρ)` and the pure-state
/// operator `PU`; satisfies all three operator conditions.
pub fn random_valid_operator(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    let rho = random_density(rng, n);
    let sigma = random_density(rng, n);
    let sym = (&kron(&rho, &sigma).unwrap() + &kron(&sigma, &rho).unwrap()).scale(C64::new(0.5, 0.0));
    let pu = pure_state_m(&random_unit_vector(rng, n)).unwrap().pu;
    let a = 0.3 + 0.4 * (rho[(0, 0)].re);
    &sym.scale(C64::new(a, 0.0)) + &pu.scale(C64::new(1.0 - a, 0.0))
}

pub fn random_class_model(rng: &mut SeededRng, n: usize) -> ClassOperatorModel {
    let units: Vec<Projection> = (0..n)
        .map(|i| Projection::new(ComplexMatrix::matrix_unit(n, i, i)).unwrap())
        .collect();
    let p = random_projection_with(rng, n, 1).unwrap();
    let split = vec![p.clone(), p.complement()];
    ClassOperatorModel::new(random_density(rng, n), random_hermitian(rng, n), vec![0.3, 1.1], vec![units, split])
        .unwrap()
}

/// One functional per backend at dimension `n` (≥ 3 for the form backend).
pub fn backend_fixtures(rng: &mut SeededRng, n: usize) -> Vec<(&'static str, DecoherenceFunctional)> {
    let op = DecoherenceFunctional::operator_backed(random_valid_operator(rng, n)).unwrap();
    let gram = gram_matrix(&DecoherenceFunctional::operator_backed(random_valid_operator(rng, n)).unwrap()).unwrap();
    vec![
        ("operator", op),
        ("pure_state", DecoherenceFunctional::pure_state(random_unit_vector(rng, n)).unwrap()),
        ("form", DecoherenceFunctional::form_backed(gram).unwrap()),
        ("class_operator", DecoherenceFunctional::class_operator(Arc::new(random_class_model(rng, n)))),
    ]
}

/// Operator with a degenerate spectrum in both Hermitian parts.
pub fn degenerate_operator(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    let u = histrep::sampling::random_unitary(rng, n);
    let v = histrep::sampling::random_unitary(rng, n);
    let re: Vec<f64> = (0..n).map(|i| if i < 2 { 1.5 } else { -0.5 }).collect();
    let im: Vec<f64> = (0..n).map(|i| if i + 2 >= n { 2.0 } else { 0.25 }).collect();
    let a = &(&u * &ComplexMatrix::diagonal(&re)) * &u.adjoint();
    let b = &(&v * &ComplexMatrix::diagonal(&im)) * &v.adjoint();
    &a + &b.scale(C64::new(0.0, 1.0))
}
