//! Seeded random instances and per-trial RNG streams.
//!
//! A master seed expands into independent streams with
//! `ChaCha8Rng::seed_from_u64(seed)` followed by `set_stream(index)`, so trial
//! `i` draws the same numbers no matter which thread runs it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, c, gram_schmidt, outer, real, Matrix, Vector};
use crate::register::RegisterShape;
use crate::state::{DensityOperator, HermitianOperator, PureState};

pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
    Vector::from_iterator(
        dim,
        (0..dim).map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal))),
    )
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let data: Vec<_> = (0..rows * cols)
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    Matrix::from_vec(rows, cols, data)
}

/// Haar-random pure state.
pub fn random_state<R: Rng + ?Sized>(shape: &RegisterShape, rng: &mut R) -> PureState {
    let v = gaussian_vector(shape.total_dim(), rng);
    PureState::normalized(shape.clone(), v).expect("gaussian vector is nonzero")
}

/// Haar-random unitary (Gram–Schmidt on a Ginibre matrix).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    gram_schmidt(&gaussian_matrix(dim, dim, rng))
}

/// Random density operator `GG†/tr(GG†)` with `G` of the given rank.
pub fn random_density<R: Rng + ?Sized>(shape: &RegisterShape, rank: usize, rng: &mut R) -> DensityOperator {
    let d = shape.total_dim();
    let g = gaussian_matrix(d, rank.clamp(1, d), rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    DensityOperator::new(shape.clone(), m.scale(1.0 / tr)).expect("valid by construction")
}

/// Random `0 ≤ Λ ≤ I`: Haar eigenbasis, eigenvalues uniform in `[0, 1]`.
pub fn random_contraction<R: Rng + ?Sized>(shape: &RegisterShape, rng: &mut R) -> HermitianOperator {
    let d = shape.total_dim();
    let u = random_unitary(d, rng);
    let diag = Vector::from_iterator(d, (0..d).map(|_| real(rng.random::<f64>())));
    let m = &u * Matrix::from_diagonal(&diag) * u.adjoint();
    HermitianOperator::from_parts_unchecked(shape.clone(), m)
}

/// Random rank-`rank` orthogonal projector.
pub fn random_projector<R: Rng + ?Sized>(shape: &RegisterShape, rank: usize, rng: &mut R) -> HermitianOperator {
    let d = shape.total_dim();
    let u = random_unitary(d, rng);
    let mut m = Matrix::zeros(d, d);
    for k in 0..rank.min(d) {
        let col: Vector = u.column(k).into_owned();
        m += outer(&col, &col);
    }
    HermitianOperator::from_parts_unchecked(shape.clone(), m)
}

pub fn random_hermitian<R: Rng + ?Sized>(shape: &RegisterShape, rng: &mut R) -> HermitianOperator {
    let d = shape.total_dim();
    let g = gaussian_matrix(d, d, rng);
    HermitianOperator::from_parts_unchecked(shape.clone(), (&g + g.adjoint()).scale(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = trial_rng(7, 3).random();
        let b: u64 = trial_rng(7, 3).random();
        let other: u64 = trial_rng(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, other);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = trial_rng(1, 0);
        for d in [2, 3, 8] {
            let u = random_unitary(d, &mut rng);
            assert!(linalg::unitary_deviation(&u) < 1e-12);
        }
    }

    #[test]
    fn random_contraction_in_range() {
        let mut rng = trial_rng(2, 0);
        let shape = RegisterShape::single(6).unwrap();
        let l = random_contraction(&shape, &mut rng);
        let (lo, hi) = l.spectral_range().unwrap();
        assert!(lo >= -1e-12 && hi <= 1.0 + 1e-12);
        let p = random_projector(&shape, 2, &mut rng);
        assert!(p.projector_deviation() < 1e-12);
    }
}
