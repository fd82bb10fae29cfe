//! Seeded random generators for matrices, vectors, projections and tensors.
//!
//! Every stream is a `ChaCha8Rng`, so sample sequences are reproducible
//! across platforms and a longer run always extends a shorter one.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{AlgebraicTensor, ComplexMatrix, ElementaryTensorSum, Projection, Vector, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a stream tag (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian(rng: &mut SeededRng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix.
pub fn random_matrix(rng: &mut SeededRng, dim: usize) -> ComplexMatrix {
    ComplexMatrix::wrap(DMatrix::from_fn(dim, dim, |_, _| gaussian(rng)))
}

pub fn random_hermitian(rng: &mut SeededRng, dim: usize) -> ComplexMatrix {
    random_matrix(rng, dim).hermitian_parts().0
}

/// Haar-like unitary from the QR factor of a Ginibre matrix.
pub fn random_unitary(rng: &mut SeededRng, dim: usize) -> ComplexMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    ComplexMatrix::wrap(g.qr().q())
}

pub fn random_vector(rng: &mut SeededRng, dim: usize) -> Vector {
    Vector::wrap(nalgebra::DVector::from_fn(dim, |_, _| gaussian(rng)))
}

pub fn random_unit_vector(rng: &mut SeededRng, dim: usize) -> Vector {
    loop {
        if let Ok(v) = random_vector(rng, dim).normalized() {
            return v;
        }
    }
}

/// Random `dim × cols` matrix with orthonormal columns.
pub(crate) fn random_isometry(rng: &mut SeededRng, dim: usize, cols: usize) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, cols, |_, _| gaussian(rng));
    g.qr().q()
}

pub fn random_projection_with(rng: &mut SeededRng, dim: usize, rank: usize) -> Result<Projection> {
    if rank > dim {
        return Err(Error::RankOutOfRange { rank, dim });
    }
    if rank == 0 {
        return Ok(Projection::zero(dim));
    }
    if rank == dim {
        return Ok(Projection::identity(dim));
    }
    Ok(Projection::from_orthonormal_columns(&random_isometry(rng, dim, rank)))
}

/// Random projection with rank drawn uniformly from `0..=dim`.
pub fn random_projection_any_rank(rng: &mut SeededRng, dim: usize) -> Projection {
    let rank = rng.random_range(0..=dim);
    random_projection_with(rng, dim, rank).expect("rank within range")
}

/// Two orthogonal projections `(p₁, p₂)` with random ranks summing to at most `dim`.
pub fn random_orthogonal_pair(rng: &mut SeededRng, dim: usize) -> (Projection, Projection) {
    let total = rng.random_range(0..=dim);
    let first = rng.random_range(0..=total);
    if total == 0 {
        return (Projection::zero(dim), Projection::zero(dim));
    }
    let cols = random_isometry(rng, dim, total);
    let a = cols.columns(0, first).into_owned();
    let b = cols.columns(first, total - first).into_owned();
    (
        Projection::from_orthonormal_columns(&a),
        Projection::from_orthonormal_columns(&b),
    )
}

/// Random elementary tensor sum with `terms` terms of Ginibre matrices.
pub fn random_tensor_sum(rng: &mut SeededRng, dim: usize, terms: usize) -> ElementaryTensorSum {
    let terms = (0..terms.max(1))
        .map(|_| (random_matrix(rng, dim), random_matrix(rng, dim)))
        .collect();
    ElementaryTensorSum::new(terms).expect("uniform dimensions")
}

/// Unit vector in `H ⊗_alg H` made of `len` simple tensors.
pub fn random_algebraic_tensor(rng: &mut SeededRng, dim: usize, len: usize) -> AlgebraicTensor {
    loop {
        let terms = (0..len.max(1))
            .map(|_| (random_vector(rng, dim), random_vector(rng, dim)))
            .collect();
        let t = AlgebraicTensor::new(terms).expect("uniform dimensions");
        if let Ok(n) = t.normalized() {
            return n;
        }
    }
}
