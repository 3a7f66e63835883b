//! Test-only oracles: a naive one-sided Jacobi SVD and dense helpers that
//! never touch the library's factorization path.
#![allow(dead_code)]

use hlp_core::dense::DenseMatrix;
use hlp_core::sparse::SparseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rows = Vec<Vec<f64>>;

pub struct OracleSvd {
    /// m x r, columns are left singular vectors (r = min(m, n)).
    pub u: Rows,
    pub sigma: Vec<f64>,
    /// n x r
    pub v: Rows,
}

pub fn to_rows(d: &DenseMatrix) -> Rows {
    (0..d.n_rows()).map(|i| d.row(i).to_vec()).collect()
}

pub fn transpose(a: &Rows) -> Rows {
    let (m, n) = (a.len(), a.first().map_or(0, Vec::len));
    (0..n).map(|j| (0..m).map(|i| a[i][j]).collect()).collect()
}

pub fn matmul(a: &Rows, b: &Rows) -> Rows {
    let (m, k, n) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    (0..m)
        .map(|i| (0..n).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

pub fn frobenius(a: &Rows) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn sub(a: &Rows, b: &Rows) -> Rows {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

/// Keeps columns `0..k`.
pub fn leading(a: &Rows, k: usize) -> Rows {
    a.iter().map(|r| r[..k].to_vec()).collect()
}

/// One-sided (Hestenes) Jacobi SVD. Slow and simple.
pub fn jacobi_svd(a: &Rows) -> OracleSvd {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    if m < n {
        let t = jacobi_svd(&transpose(a));
        return OracleSvd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    let mut w = a.clone();
    let mut v: Rows = (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect();
    for _sweep in 0..200 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for row in &w {
                    alpha += row[p] * row[p];
                    beta += row[q] * row[q];
                    gamma += row[p] * row[q];
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for row in w.iter_mut().chain(v.iter_mut()) {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n)
        .map(|j| w.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let u = (0..m)
        .map(|i| {
            order
                .iter()
                .map(|&j| if norms[j] > 0.0 { w[i][j] / norms[j] } else { 0.0 })
                .collect()
        })
        .collect();
    let vv = (0..n).map(|i| order.iter().map(|&j| v[i][j]).collect()).collect();
    OracleSvd {
        u,
        sigma: order.iter().map(|&j| norms[j]).collect(),
        v: vv,
    }
}

/// Best rank-k approximation from the oracle factors.
pub fn oracle_truncation(svd: &OracleSvd, k: usize) -> Rows {
    let us: Rows = svd
        .u
        .iter()
        .map(|r| (0..k).map(|j| r[j] * svd.sigma[j]).collect())
        .collect();
    matmul(&us, &transpose(&leading(&svd.v, k)))
}

/// Cosines of the principal angles between the column spaces of two
/// orthonormal bases.
pub fn principal_cosines(a: &Rows, b: &Rows) -> Vec<f64> {
    jacobi_svd(&matmul(&transpose(a), b)).sigma
}

/// Random sparse matrix with independent Bernoulli(density) support and
/// uniform(-1, 1) values. Independent of the library's sampling code.
pub fn random_sparse(n_rows: usize, n_cols: usize, density: f64, seed: u64) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    for i in 0..n_rows {
        for j in 0..n_cols {
            if rng.random::<f64>() < density {
                t.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
    }
    SparseMatrix::from_triplets(n_rows, n_cols, t).unwrap()
}

pub fn random_dense(n_rows: usize, n_cols: usize, seed: u64) -> Rows {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_rows)
        .map(|_| (0..n_cols).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

pub fn sparse_from_rows(a: &Rows) -> SparseMatrix {
    SparseMatrix::from_dense(&DenseMatrix::from_rows(a).unwrap())
}

/// Adjacency of triangles {0,1,2} and {3,4,5} joined by the bridge 2-3.
pub fn two_triangles() -> SparseMatrix {
    let mut t = vec![(2, 3, 1.0), (3, 2, 1.0)];
    for base in [0, 3] {
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            t.push((base + i, base + j, 1.0));
            t.push((base + j, base + i, 1.0));
        }
    }
    SparseMatrix::from_triplets(6, 6, t).unwrap()
}

pub fn max_abs_diff(a: &Rows, b: &Rows) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn orthonormality_error(m: &DenseMatrix) -> f64 {
    m.t_matmul(m)
        .unwrap()
        .sub(&DenseMatrix::identity(m.n_cols()))
        .unwrap()
        .max_abs()
}
