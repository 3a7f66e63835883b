//! Rank-k truncated SVD of sparse matrices by randomized subspace iteration.
//!
//! The input is only touched through sparse products with `A` and `Aᵀ`; the
//! dense work is a sequence of thin QR factorizations of `n x l` blocks and a
//! single SVD of an `m x l` projection, where `l = k + oversample`.

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Singular values below this fraction of the largest are clamped to zero.
pub const RELATIVE_CLAMP: f64 = 1e-10;

/// Hard cap on subspace iterations when a convergence tolerance is set.
pub const MAX_POWER_ITERATIONS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsvdParams {
    pub k: usize,
    /// Extra sampling columns. Clamped so that `k + oversample` never exceeds
    /// the smaller matrix dimension.
    pub oversample: usize,
    /// Number of subspace iterations always performed.
    pub power_iterations: usize,
    pub seed: u64,
    /// When set, keep iterating past `power_iterations` until the leading `k`
    /// Ritz values change by less than this relative amount between sweeps.
    pub convergence_tol: Option<f64>,
    /// Matrices whose smaller dimension is at most this are sampled at full
    /// width, which makes the factors exact up to rounding.
    pub exact_up_to: usize,
}

impl TsvdParams {
    pub fn new(k: usize) -> Self {
        TsvdParams {
            k,
            oversample: 10,
            power_iterations: 4,
            seed: 0,
            convergence_tol: None,
            exact_up_to: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_convergence(mut self, tol: f64) -> Self {
        self.convergence_tol = Some(tol);
        self
    }

    pub fn with_exact_up_to(mut self, dim: usize) -> Self {
        self.exact_up_to = dim;
        self
    }

    pub fn validate(&self, n_rows: usize, n_cols: usize) -> Result<()> {
        let min_dim = n_rows.min(n_cols);
        if self.k == 0 {
            return Err(Error::InvalidRank("k must be at least 1".into()));
        }
        if self.k > min_dim {
            return Err(Error::InvalidRank(format!(
                "k = {} exceeds min dimension {} of a {}x{} matrix",
                self.k, min_dim, n_rows, n_cols
            )));
        }
        Ok(())
    }

    fn sample_width(&self, n_rows: usize, n_cols: usize) -> usize {
        let min_dim = n_rows.min(n_cols);
        if min_dim <= self.exact_up_to {
            return min_dim;
        }
        (self.k + self.oversample).min(min_dim)
    }
}

/// Rank-k factors `A ≈ U diag(σ) Vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TsvdResult {
    u: DenseMatrix,
    sigma: Vec<f64>,
    v: DenseMatrix,
}

impl TsvdResult {
    pub fn new(u: DenseMatrix, sigma: Vec<f64>, v: DenseMatrix) -> Result<Self> {
        if u.n_cols() != sigma.len() || v.n_cols() != sigma.len() {
            return Err(Error::DimensionMismatch(format!(
                "u has {} columns, v has {}, sigma has {} values",
                u.n_cols(),
                v.n_cols(),
                sigma.len()
            )));
        }
        Ok(TsvdResult { u, sigma, v })
    }

    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    /// Leading `k` triplets.
    pub fn truncate(&self, k: usize) -> Result<TsvdResult> {
        if k == 0 || k > self.k() {
            return Err(Error::InvalidRank(format!(
                "cannot truncate a rank-{} decomposition to {k}",
                self.k()
            )));
        }
        if k == self.k() {
            return Ok(self.clone());
        }
        Ok(TsvdResult {
            u: self.u.leading_columns(k),
            sigma: self.sigma[..k].to_vec(),
            v: self.v.leading_columns(k),
        })
    }

    /// `U diag(σ) Vᵀ`. Dense, for diagnostics and tests.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.u
            .scale_columns(&self.sigma)
            .matmul_t(&self.v)
            .expect("factor shapes agree by construction")
    }

    /// `U diag(σ) Uᵀ`: the implicit rank-k graph of a symmetric input.
    pub fn symmetric_reconstruct(&self) -> DenseMatrix {
        self.u
            .scale_columns(&self.sigma)
            .matmul_t(&self.u)
            .expect("factor shapes agree by construction")
    }

    /// Flips each `(u_j, v_j)` pair so the largest-magnitude entry of `u_j`
    /// is positive. Ties go to the lowest row index.
    pub fn sign_canonicalize(mut self) -> TsvdResult {
        for j in 0..self.k() {
            let mut best = 0.0f64;
            let mut best_val = 0.0f64;
            for i in 0..self.u.n_rows() {
                let x = self.u.get(i, j);
                if x.abs() > best {
                    best = x.abs();
                    best_val = x;
                }
            }
            if best_val < 0.0 {
                for i in 0..self.u.n_rows() {
                    let x = self.u.get(i, j);
                    self.u.set(i, j, -x);
                }
                for i in 0..self.v.n_rows() {
                    let x = self.v.get(i, j);
                    self.v.set(i, j, -x);
                }
            }
        }
        self
    }
}

/// Top-k singular triplets of `a`. Deterministic for a fixed seed.
pub fn truncated_svd(a: &SparseMatrix, params: &TsvdParams) -> Result<TsvdResult> {
    let (n, m) = a.shape();
    params.validate(n, m)?;
    if !a.is_finite() {
        return Err(Error::NonFinite("input matrix".into()));
    }
    let l = params.sample_width(n, m);
    let at = a.transpose();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let omega_values: Vec<f64> = (0..m * l).map(|_| StandardNormal.sample(&mut rng)).collect();
    let omega = DenseMatrix::from_row_major(m, l, omega_values)?;

    let mut q = orthonormal_basis(&a.spmm(&omega)?).0;
    let mut previous: Option<Vec<f64>> = None;
    // At full width Q already spans the range of A.
    let max_iters = match params.convergence_tol {
        _ if l == n.min(m) => 0,
        Some(_) => MAX_POWER_ITERATIONS.max(params.power_iterations),
        None => params.power_iterations,
    };
    for iter in 0..max_iters {
        let (p, _) = orthonormal_basis(&at.spmm(&q)?);
        let (next_q, r) = orthonormal_basis(&a.spmm(&p)?);
        q = next_q;
        if let Some(tol) = params.convergence_tol {
            let ritz = leading_singular_values(&r, params.k);
            let converged = previous.as_ref().is_some_and(|prev| {
                let scale = ritz[0].max(f64::MIN_POSITIVE);
                prev.iter()
                    .zip(&ritz)
                    .all(|(p, c)| (p - c).abs() <= tol * scale.max(c.abs()))
            });
            previous = Some(ritz);
            if converged && iter + 1 >= params.power_iterations {
                break;
            }
        }
    }

    // Bᵀ = Aᵀ Q, so A ≈ Q B = Q (W S Zᵀ)ᵀ = (Q Z) S Wᵀ.
    let bt = at.spmm(&q)?.to_faer();
    let svd = bt
        .thin_svd()
        .map_err(|e| Error::NonFinite(format!("projected SVD did not converge: {e:?}")))?;
    let (w, z_full, s) = (svd.U(), svd.V(), svd.S().column_vector());
    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).expect("finite singular values").then(i.cmp(&j)));
    order.truncate(params.k);

    let z = DenseMatrix::from_fn(l, params.k, |i, j| z_full[(i, order[j])]);
    let u = q.matmul(&z)?;
    let v = DenseMatrix::from_fn(m, params.k, |i, j| w[(i, order[j])]);
    let mut sigma: Vec<f64> = order.iter().map(|&i| s[i].max(0.0)).collect();
    let cutoff = sigma.first().copied().unwrap_or(0.0) * RELATIVE_CLAMP;
    for s in &mut sigma {
        if *s < cutoff {
            *s = 0.0;
        }
    }
    Ok(TsvdResult { u, sigma, v }.sign_canonicalize())
}

/// Thin Householder QR of a tall block: returns `(Q, R)`.
fn orthonormal_basis(y: &DenseMatrix) -> (DenseMatrix, Mat<f64>) {
    let qr = y.to_faer().qr();
    let q = qr.compute_thin_Q();
    (DenseMatrix::from_faer(q.as_ref()), qr.thin_R().to_owned())
}

fn leading_singular_values(r: &Mat<f64>, k: usize) -> Vec<f64> {
    let mut s = r.singular_values().unwrap_or_else(|_| vec![f64::NAN; r.ncols()]);
    s.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    s.truncate(k);
    s
}
