mod common;

use athermal::linalg::{
    eigh, hs_inner, kron, matrix_fn, partial_trace, schatten_norm, CMatrix, HermitianMatrix, SchattenP,
};
use common::{random_density_matrix, random_hermitian, random_matrix, rng};
use proptest::prelude::*;

#[test]
fn eigh_reconstructs_random_hermitian() {
    let mut r = rng(1);
    for k in 0..200 {
        let d = 1 + k % 8;
        let m = random_hermitian(d, &mut r);
        let s = eigh(&m).unwrap();
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let back = s.map(|x| x);
        let err = (back.matrix() - m.matrix()).norm();
        assert!(err <= 1e-10 * m.matrix().norm().max(1.0), "reconstruction {err:e}");
        let v = &s.eigenvectors;
        let gram = v.adjoint() * v - CMatrix::identity(d, d);
        assert!(gram.norm() < 1e-10);
    }
}

#[test]
fn exp_then_log_round_trips() {
    let mut r = rng(2);
    for d in 1..=6 {
        let m = random_hermitian(d, &mut r);
        let e = matrix_fn(&m, f64::exp, false).unwrap();
        let back = matrix_fn(&e, f64::ln, false).unwrap();
        assert!(back.max_abs_diff(&m) < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigh_reconstructs_nearly_diagonal_complex_matrices(seed in any::<u64>(), d in 2usize..7, exp in 10i32..20) {
        let mut r = rng(seed);
        let diag = random_hermitian(d, &mut r);
        let tiny = random_matrix(d, &mut r) * athermal::linalg::cr(10f64.powi(-exp));
        let m = CMatrix::from_fn(d, d, |i, j| if i == j { diag.matrix()[(i, i)] } else { athermal::linalg::c(0.0, 0.0) })
            + &tiny + tiny.adjoint();
        let h = HermitianMatrix::symmetrized(m);
        let s = eigh(&h).unwrap();
        let err = (s.map(|x| x).matrix() - h.matrix()).norm();
        prop_assert!(err <= 1e-12 * h.matrix().norm().max(1.0), "reconstruction {:e}", err);
    }

    #[test]
    fn partial_trace_preserves_trace_and_positivity(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut r = rng(seed);
        let rho = random_density_matrix(da * db, &mut r);
        for keep in [[0usize], [1usize]] {
            let red = partial_trace(&rho, &[da, db], &keep).unwrap();
            prop_assert!((red.trace() - rho.trace()).abs() < 1e-12);
            prop_assert!(red.min_eigenvalue().unwrap() >= -1e-10);
        }
    }

    #[test]
    fn schatten_norms_are_ordered(seed in any::<u64>(), d in 1usize..7) {
        let mut r = rng(seed);
        let x = random_matrix(d, &mut r);
        let n1 = schatten_norm(&x, SchattenP::One);
        let n2 = schatten_norm(&x, SchattenP::Two);
        let ni = schatten_norm(&x, SchattenP::Inf);
        prop_assert!(n1 >= n2 - 1e-12 && n2 >= ni - 1e-12 && ni >= 0.0);
    }

    #[test]
    fn kron_trace_is_multiplicative(seed in any::<u64>(), da in 1usize..5, db in 1usize..5) {
        let mut r = rng(seed);
        let a = random_hermitian(da, &mut r);
        let b = random_hermitian(db, &mut r);
        let ab = kron(&a, &b).unwrap();
        prop_assert!((ab.trace() - a.trace() * b.trace()).abs() < 1e-12);
        let i = HermitianMatrix::identity(db);
        prop_assert!((hs_inner(ab.matrix(), kron(&a, &i).unwrap().matrix()) - a.inner(&a) * b.trace()).abs() < 1e-10);
    }
}
