#![allow(dead_code)]

use athermal::linalg::{c, CMatrix, HermitianMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    HermitianMatrix::symmetrized(random_matrix(d, rng))
}

/// Full-rank random density matrix `G G† / tr(G G†)`.
pub fn random_density_matrix(d: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let g = random_matrix(d, rng);
    let h = HermitianMatrix::symmetrized(&g * g.adjoint());
    let t = h.trace();
    h.scale(1.0 / t)
}

pub fn random_state(d: usize, rng: &mut ChaCha8Rng) -> athermal::quantum::DensityOperator {
    athermal::quantum::DensityOperator::new(random_density_matrix(d, rng)).unwrap()
}

/// Random state of rank at most `rank`.
pub fn random_low_rank_state(d: usize, rank: usize, rng: &mut ChaCha8Rng) -> athermal::quantum::DensityOperator {
    let g = CMatrix::from_fn(d, rank, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let h = HermitianMatrix::symmetrized(&g * g.adjoint());
    athermal::quantum::DensityOperator::normalized(h).unwrap()
}

/// Diagonal Hamiltonian with energies drawn from `[0, 2)`.
pub fn random_diagonal_hamiltonian(d: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let e: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..2.0)).collect();
    HermitianMatrix::from_real_diagonal(&e)
}
