mod common;

use common::*;
use hlp_core::dense::DenseMatrix;
use hlp_core::sparse::SparseMatrix;
use hlp_core::tsvd::{truncated_svd, TsvdParams};
use proptest::prelude::*;

fn rel_frobenius(a: &Rows, b: &Rows) -> f64 {
    frobenius(&sub(a, b)) / frobenius(b).max(f64::MIN_POSITIVE)
}

#[test]
fn spmm_matches_dense_product() {
    let a = random_sparse(10, 8, 0.3, 1);
    let b = random_dense(8, 4, 2);
    let got = a.spmm(&DenseMatrix::from_rows(&b).unwrap()).unwrap();
    let want = matmul(&to_rows(&a.to_dense()), &b);
    assert!(rel_frobenius(&to_rows(&got), &want) <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn spmm_matches_dense_product_up_to_100(n in 1usize..100, m in 1usize..100, w in 1usize..12, seed in 0u64..1000) {
        let a = random_sparse(n, m, 0.1, seed);
        let b = random_dense(m, w, seed + 1);
        let got = a.spmm(&DenseMatrix::from_rows(&b).unwrap()).unwrap();
        let want = matmul(&to_rows(&a.to_dense()), &b);
        let scale = frobenius(&want).max(1.0);
        prop_assert!(frobenius(&sub(&to_rows(&got), &want)) <= 1e-12 * scale);
    }
}

#[test]
fn random_sparse_singular_values_match_oracle() {
    let a = random_sparse(50, 40, 0.2, 7);
    let oracle = jacobi_svd(&to_rows(&a.to_dense()));
    let t = truncated_svd(&a, &TsvdParams::new(10).with_seed(7).with_convergence(1e-14)).unwrap();
    for (got, want) in t.sigma().iter().zip(&oracle.sigma) {
        assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");
    }
}

#[test]
fn rank_one_outer_product() {
    let a = sparse_from_rows(&vec![vec![3.0, 0.0, 4.0], vec![6.0, 0.0, 8.0]]);
    let t = truncated_svd(&a, &TsvdParams::new(1)).unwrap();
    assert!((t.sigma()[0] - 5.0 * 5f64.sqrt()).abs() <= 1e-10);
    assert!(max_abs_diff(&to_rows(&t.reconstruct()), &to_rows(&a.to_dense())) <= 1e-8);
}

#[test]
fn full_rank_reconstruction_is_exact() {
    let dense = random_dense(7, 5, 3);
    let a = sparse_from_rows(&dense);
    let t = truncated_svd(&a, &TsvdParams::new(5)).unwrap();
    assert!(max_abs_diff(&to_rows(&t.reconstruct()), &dense) <= 1e-8);
}

#[test]
fn truncation_error_matches_tail_energy() {
    let a = random_sparse(40, 30, 0.3, 11);
    let dense = to_rows(&a.to_dense());
    let oracle = jacobi_svd(&dense);
    for k in [1, 4, 9] {
        let t = truncated_svd(&a, &TsvdParams::new(k).with_convergence(1e-14)).unwrap();
        let err = frobenius(&sub(&dense, &to_rows(&t.reconstruct())));
        let tail = oracle.sigma[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
        assert!((err - tail).abs() <= 1e-6 * tail, "k={k}: {err} vs {tail}");
    }
}

#[test]
fn eckart_young_bound_on_dense_50x50() {
    let dense = random_dense(50, 50, 5);
    let a = sparse_from_rows(&dense);
    let oracle = jacobi_svd(&dense);
    for k in [1, 5, 20] {
        let t = truncated_svd(&a, &TsvdParams::new(k).with_convergence(1e-14)).unwrap();
        let ours = frobenius(&sub(&dense, &to_rows(&t.reconstruct())));
        let best = frobenius(&sub(&dense, &oracle_truncation(&oracle, k)));
        assert!(ours <= best + 1e-6, "k={k}: {ours} > {best}");
    }
}

#[test]
fn default_parameters_capture_well_separated_spectrum() {
    // Planted rank-5 signal with a 100x spectral gap over the noise.
    let n = 60;
    let signal = random_dense(n, 5, 21);
    let mut dense = matmul(&signal, &transpose(&random_dense(n, 5, 22)));
    let noise = random_dense(n, n, 23);
    for (row, nrow) in dense.iter_mut().zip(&noise) {
        for (x, e) in row.iter_mut().zip(nrow) {
            *x = 10.0 * *x + 0.01 * e;
        }
    }
    let oracle = jacobi_svd(&dense);
    let t = truncated_svd(&sparse_from_rows(&dense), &TsvdParams::new(5)).unwrap();
    for (got, want) in t.sigma().iter().zip(&oracle.sigma) {
        assert!((got - want).abs() <= 1e-6 * want);
    }
}

#[test]
fn symmetric_psd_left_and_right_factors_agree() {
    let b = random_dense(12, 12, 9);
    let psd = matmul(&b, &transpose(&b));
    let t = truncated_svd(&sparse_from_rows(&psd), &TsvdParams::new(6).with_convergence(1e-14)).unwrap();
    for j in 0..6 {
        let (u, v) = (t.u().column(j), t.v().column(j));
        let sign = if u.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() >= 0.0 { 1.0 } else { -1.0 };
        let gap = u.iter().zip(&v).fold(0.0f64, |m, (a, b)| m.max((a - sign * b).abs()));
        assert!(gap <= 1e-6, "column {j}: {gap}");
    }
}

#[test]
fn same_seed_is_bit_identical() {
    let a = random_sparse(80, 60, 0.1, 4);
    let p = TsvdParams::new(8).with_seed(99);
    assert_eq!(truncated_svd(&a, &p).unwrap(), truncated_svd(&a, &p).unwrap());
}

#[test]
fn outputs_are_sign_canonical() {
    let a = random_sparse(30, 25, 0.3, 13);
    let t = truncated_svd(&a, &TsvdParams::new(6)).unwrap();
    for j in 0..6 {
        let col = t.u().column(j);
        let (mut best, mut val) = (0.0f64, 0.0);
        for x in col {
            if x.abs() > best {
                best = x.abs();
                val = x;
            }
        }
        assert!(val > 0.0);
    }
    assert_eq!(t.clone().sign_canonicalize(), t);
}

#[test]
fn identity_spectrum() {
    let t = truncated_svd(&SparseMatrix::identity(5), &TsvdParams::new(3)).unwrap();
    assert_eq!(t.sigma().len(), 3);
    assert!(t.sigma().iter().all(|s| (s - 1.0).abs() < 1e-12));
    assert!(orthonormality_error(t.u()) <= 1e-12);
}
