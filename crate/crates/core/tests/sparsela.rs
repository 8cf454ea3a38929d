mod common;

use ads_core::sparsela::io::{read_triplets, write_triplets};
use ads_core::sparsela::{
    cg_solve, cg_solve_with, minres_solve, minres_solve_with, BlockDiagonal, IncompleteCholesky, Jacobi,
    Preconditioner, SymmetricGaussSeidel,
};
use ads_core::{CsrMatrix, Error, SolverOptions};
use common::*;
use proptest::prelude::*;

fn spd(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> CsrMatrix<f64> {
    // BᵀB + I with sparse B
    let b = random_sparse(rng, n, n, 0.08);
    b.transpose().matmul(&b).unwrap().add_scaled(1.0, &CsrMatrix::identity(n), 1.0).unwrap()
}

fn indefinite(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> CsrMatrix<f64> {
    // symmetric with a diagonal of mixed sign kept away from zero
    let b = random_sparse(rng, n, n, 0.05);
    let s = b.add_scaled(1.0, &b.transpose(), 1.0).unwrap();
    let d: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { -4.0 } else { 5.0 }).collect();
    s.add_scaled(0.5, &CsrMatrix::from_diagonal(&d), 1.0).unwrap()
}

#[test]
fn cg_matches_dense_cholesky() {
    let mut r = rng(1);
    let a = spd(&mut r, 60);
    let b = random_vec(&mut r, 60);
    let want = cholesky_solve(&a.to_dense(), &b);
    for jacobi in [false, true] {
        let opts = SolverOptions { jacobi, ..SolverOptions::cg_default() };
        let (x, stats) = cg_solve(&a, &b, None, &opts).unwrap();
        assert!(stats.relative_residual <= 1e-12);
        assert!(max_abs_diff(&x, &want) <= 1e-9 * inf_norm(&want));
    }
}

#[test]
fn cg_with_incomplete_cholesky_matches_dense() {
    let mut r = rng(2);
    let a = spd(&mut r, 50);
    let b = random_vec(&mut r, 50);
    let ic = IncompleteCholesky::new(&a).unwrap();
    let (x, _) = cg_solve_with(&a, &b, None, &SolverOptions::cg_default(), &ic).unwrap();
    let want = cholesky_solve(&a.to_dense(), &b);
    assert!(max_abs_diff(&x, &want) <= 1e-9 * inf_norm(&want));
}

#[test]
fn cg_rejects_indefinite_matrix() {
    let a = CsrMatrix::from_diagonal(&[1.0, -1.0, 2.0]);
    let err = cg_solve(&a, &[1.0, 1.0, 1.0], None, &SolverOptions::cg_default()).unwrap_err();
    assert!(matches!(err, Error::InvalidParameter(_)));
}

#[test]
fn minres_matches_dense_oracle_on_indefinite_system() {
    let mut r = rng(3);
    let a = indefinite(&mut r, 80);
    assert!(a.is_symmetric());
    let b = random_vec(&mut r, 80);
    let want = lu_solve(&a.to_dense(), &b);
    for jacobi in [false, true] {
        let opts = SolverOptions { jacobi, ..SolverOptions::minres_default() };
        let (x, stats) = minres_solve(&a, &b, None, &opts).unwrap();
        assert!(stats.relative_residual <= 1e-10, "{}", stats.relative_residual);
        assert!(max_abs_diff(&x, &want) <= 1e-7 * inf_norm(&want));
    }
}

#[test]
fn minres_residual_estimate_is_monotone() {
    let mut r = rng(4);
    let a = indefinite(&mut r, 80);
    let b = random_vec(&mut r, 80);
    let (_, stats) = minres_solve(&a, &b, None, &SolverOptions::minres_default()).unwrap();
    for w in stats.residual_history.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12));
    }
}

#[test]
fn minres_with_block_preconditioner() {
    let mut r = rng(5);
    let a = indefinite(&mut r, 40);
    let b = random_vec(&mut r, 40);
    let abs_diag: Vec<f64> = a.diagonal().iter().map(|d| d.abs()).collect();
    let top = CsrMatrix::from_diagonal(&abs_diag[..25]);
    let bottom = CsrMatrix::from_diagonal(&abs_diag[25..]);
    let p: BlockDiagonal<f64> = BlockDiagonal::new(vec![
        Box::new(IncompleteCholesky::new(&top).unwrap()),
        Box::new(SymmetricGaussSeidel::new(&bottom).unwrap()),
    ]);
    assert_eq!(p.dim(), 40);
    let (x, _) = minres_solve_with(&a, &b, None, &SolverOptions::minres_default(), &p).unwrap();
    let want = lu_solve(&a.to_dense(), &b);
    assert!(max_abs_diff(&x, &want) <= 1e-7 * inf_norm(&want));
}

#[test]
fn minres_warm_start_at_solution_takes_no_iterations() {
    let a = CsrMatrix::from_diagonal(&[2.0, -3.0, 4.0]);
    let (x, stats) =
        minres_solve(&a, &[2.0, -3.0, 4.0], Some(&[1.0, 1.0, 1.0]), &SolverOptions::minres_default()).unwrap();
    assert_eq!(stats.iterations, 0);
    assert_eq!(x, vec![1.0, 1.0, 1.0]);
}

#[test]
fn minres_reports_budget_exhaustion() {
    let mut r = rng(6);
    let a = indefinite(&mut r, 80);
    let b = random_vec(&mut r, 80);
    let opts = SolverOptions { max_iter: Some(3), ..SolverOptions::minres_default() };
    let err = minres_solve(&a, &b, None, &opts).unwrap_err();
    assert!(matches!(err, Error::NotConverged { solver: "MINRES", .. }));
}

#[test]
fn solvers_reject_dimension_mismatch() {
    let a = CsrMatrix::<f64>::identity(3);
    assert!(matches!(
        cg_solve(&a, &[1.0, 2.0], None, &SolverOptions::cg_default()),
        Err(Error::DimensionMismatch { .. })
    ));
    let p = Jacobi::new(&CsrMatrix::<f64>::identity(2));
    assert!(minres_solve_with(&a, &[1.0; 3], None, &SolverOptions::minres_default(), &p).is_err());
}

#[test]
fn triplet_dump_round_trips_bitwise() {
    let mut r = rng(7);
    let a = random_sparse(&mut r, 30, 20, 0.2).scaled(std::f64::consts::PI * 1e-7);
    let mut buf = Vec::new();
    write_triplets(&mut buf, &a).unwrap();
    let b = read_triplets(&buf[..]).unwrap();
    assert_eq!(a.shape(), b.shape());
    assert_eq!(a.row_ptr(), b.row_ptr());
    assert_eq!(a.col_idx(), b.col_idx());
    assert_eq!(a.values(), b.values());
}

fn sparse_strategy(max: usize) -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
    (1..max, 1..max).prop_flat_map(|(n, m)| {
        let entries = proptest::collection::vec((0..n, 0..m, -10.0..10.0f64), 0..3 * (n + m));
        (Just(n), Just(m), entries)
    })
}

fn dense_of(n: usize, m: usize, t: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; m]; n];
    for &(i, j, v) in t {
        d[i][j] += v;
    }
    d
}

proptest! {
    #[test]
    fn spmv_matches_dense((n, m, t) in sparse_strategy(20), seed in any::<u64>()) {
        let a = CsrMatrix::from_triplets(n, m, &t).unwrap();
        let d = dense_of(n, m, &t);
        let x = random_vec(&mut rng(seed), m);
        let y = a.spmv(&x).unwrap();
        let want = dense_matvec(&d, &x);
        prop_assert!(max_abs_diff(&y, &want) <= 1e-12 * (1.0 + inf_norm(&want)));
    }

    #[test]
    fn transpose_spmv_matches_spmv_transpose((n, m, t) in sparse_strategy(20), seed in any::<u64>()) {
        let a = CsrMatrix::from_triplets(n, m, &t).unwrap();
        let x = random_vec(&mut rng(seed), n);
        let p = a.transpose().spmv(&x).unwrap();
        let q = a.spmv_transpose(&x).unwrap();
        prop_assert!(max_abs_diff(&p, &q) <= 1e-12 * (1.0 + inf_norm(&p)));
        prop_assert_eq!(a.transpose().transpose().to_dense(), a.to_dense());
    }

    #[test]
    fn matmul_matches_dense((n, m, t) in sparse_strategy(12), seed in any::<u64>()) {
        let a = CsrMatrix::from_triplets(n, m, &t).unwrap();
        let mut r = rng(seed);
        let b = random_sparse(&mut r, m, 7, 0.3);
        let c = a.matmul(&b).unwrap().to_dense();
        let (ad, bd) = (a.to_dense(), b.to_dense());
        for i in 0..n {
            for j in 0..7 {
                let want: f64 = (0..m).map(|k| ad[i][k] * bd[k][j]).sum();
                prop_assert!((c[i][j] - want).abs() <= 1e-12 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn add_scaled_is_linear((n, m, t) in sparse_strategy(15), seed in any::<u64>(), alpha in -3.0..3.0f64, beta in -3.0..3.0f64) {
        let a = CsrMatrix::from_triplets(n, m, &t).unwrap();
        let b = random_sparse(&mut rng(seed), n, m, 0.3);
        let c = a.add_scaled(alpha, &b, beta).unwrap().to_dense();
        let (ad, bd) = (a.to_dense(), b.to_dense());
        for i in 0..n {
            for j in 0..m {
                let want = alpha * ad[i][j] + beta * bd[i][j];
                prop_assert!((c[i][j] - want).abs() <= 1e-12 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn cg_solves_random_spd(seed in any::<u64>(), n in 2usize..30) {
        let mut r = rng(seed);
        let a = spd(&mut r, n);
        let b = random_vec(&mut r, n);
        let (x, _) = cg_solve(&a, &b, None, &SolverOptions::cg_default()).unwrap();
        let res = a.spmv(&x).unwrap();
        prop_assert!(max_abs_diff(&res, &b) <= 1e-10 * (1.0 + inf_norm(&b)));
    }

    #[test]
    fn minres_solves_random_indefinite(seed in any::<u64>(), n in 2usize..40) {
        let mut r = rng(seed);
        let a = indefinite(&mut r, n);
        let b = random_vec(&mut r, n);
        let (x, stats) = minres_solve(&a, &b, None, &SolverOptions::minres_default()).unwrap();
        prop_assert!(stats.relative_residual <= 1e-10);
        let res = a.spmv(&x).unwrap();
        let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rn = res.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        prop_assert!(rn <= 1e-10 * bn);
    }
}
