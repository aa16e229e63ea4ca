mod common;

use athermal::linalg::HermitianMatrix;
use athermal::quantum::{
    mutual_information, random_pure_state, state_free_energy, thermal_context, DensityOperator,
};
use common::{random_diagonal_hamiltonian, random_hermitian, random_state, rng};
use proptest::prelude::*;

#[test]
fn gibbs_state_minimizes_resource_free_energy() {
    let mut r = rng(21);
    for k in 0..100 {
        let d = 2 + k % 3;
        let h = random_hermitian(d, &mut r);
        let ctx = thermal_context(&h, 0.3 + (k as f64) / 40.0).unwrap();
        let g = state_free_energy(ctx.gibbs_state(), &ctx).unwrap();
        assert!(g.resource.abs() < 1e-10);
        let rho = random_state(d, &mut r);
        let f = state_free_energy(&rho, &ctx).unwrap();
        assert!(f.resource >= g.resource - 1e-12);
        assert!(f.thermal >= g.thermal - 1e-10);
    }
}

#[test]
fn pure_states_have_rank_one_densities() {
    for d in 1..7 {
        let psi = random_pure_state(d, d as u64);
        assert!((psi.amplitudes().norm() - 1.0).abs() < 1e-12);
        let ev = athermal::linalg::eigvalsh(psi.density().matrix().matrix()).unwrap();
        if d > 1 {
            assert!(ev[d - 2].abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resource_free_energy_is_nonnegative(seed in any::<u64>(), d in 1usize..5, beta in 0.05f64..5.0) {
        let mut r = rng(seed);
        let h = random_diagonal_hamiltonian(d, &mut r);
        let ctx = thermal_context(&h, beta).unwrap();
        let rho = random_state(d, &mut r);
        let f = state_free_energy(&rho, &ctx).unwrap();
        prop_assert!(f.resource >= -1e-12);
        let resource_from_thermal = f.thermal + ctx.log_partition() / beta;
        prop_assert!((f.resource - resource_from_thermal).abs() < 1e-9 * f.resource.abs().max(1.0));
    }

    #[test]
    fn energy_shift_moves_thermal_free_energy_only(seed in any::<u64>(), d in 1usize..5, shift in -3.0f64..3.0) {
        let mut r = rng(seed);
        let h = random_hermitian(d, &mut r);
        let ctx = thermal_context(&h, 1.3).unwrap();
        let shifted = thermal_context(&h.add(&HermitianMatrix::identity(d).scale(shift)), 1.3).unwrap();
        prop_assert!(ctx.gibbs_state().matrix().max_abs_diff(shifted.gibbs_state().matrix()) <= 1e-10);
        let rho = random_state(d, &mut r);
        let a = state_free_energy(&rho, &ctx).unwrap();
        let b = state_free_energy(&rho, &shifted).unwrap();
        prop_assert!((b.thermal - a.thermal - shift).abs() < 1e-9);
        prop_assert!((b.resource - a.resource).abs() < 1e-9);
    }

    #[test]
    fn mutual_information_is_nonnegative_and_additive(seed in any::<u64>(), da in 1usize..3, db in 1usize..3) {
        let mut r = rng(seed);
        let x = random_state(da * db, &mut r);
        let y = random_state(da * db, &mut r);
        let ix = mutual_information(&x, (da, db)).unwrap();
        let iy = mutual_information(&y, (da, db)).unwrap();
        prop_assert!(ix >= -1e-12 && iy >= -1e-12);
        // (A₁B₁)(A₂B₂) regrouped as (A₁A₂)(B₁B₂).
        let xy = x.tensor(&y).unwrap();
        let perm = athermal::linalg::permute_subsystems(xy.matrix().matrix(), &[da, db, da, db], &[0, 2, 1, 3]).unwrap();
        let joint = DensityOperator::new(HermitianMatrix::symmetrized(perm)).unwrap();
        let ij = mutual_information(&joint, (da * da, db * db)).unwrap();
        prop_assert!((ij - ix - iy).abs() < 1e-9);
    }
}
