//! Node representations built from truncated spectra of the graph and the
//! feature matrix.
//!
//! * Aggregation: `S = U_A diag(σ_A) (U_Aᵀ Q) diag(f(σ_X))`, the rank-k1
//!   implicit graph `U_A Σ_A U_Aᵀ` applied to the rank-k2 feature factors.
//! * Concat: `[graph factors | feature factors]`, each block scaled
//!   independently, with no propagation at all.
//!
//! `Q` and `σ_X` come from a TSVD of `X` itself. The Gram matrix `X Xᵀ` has
//! the same left factors and eigenvalues `σ_X²`, which is what
//! [`FeatureScaling::SigmaSquared`] reproduces.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::GraphType;
use crate::sparse::{NormMode, SparseMatrix};
use crate::tsvd::{truncated_svd, TsvdParams, TsvdResult};

/// Upper bound on either truncation rank.
pub const MAX_RANK: usize = 2048;

macro_rules! str_enum {
    ($name:ident { $($variant:ident => $s:literal),+ $(,)? }) => {
        impl $name {
            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $s),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($name::$variant),)+
                    other => Err(Error::InvalidParameter(format!(
                        concat!("unknown ", stringify!($name), " '{}'"), other
                    ))),
                }
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphScaling {
    None,
    Sigma,
}
str_enum!(GraphScaling { None => "none", Sigma => "sigma" });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureScaling {
    None,
    Sigma,
    SigmaSquared,
}
str_enum!(FeatureScaling { None => "none", Sigma => "sigma", SigmaSquared => "sigma_squared" });

impl FeatureScaling {
    fn apply(self, sigma: &[f64]) -> Vec<f64> {
        match self {
            FeatureScaling::None => vec![1.0; sigma.len()],
            FeatureScaling::Sigma => sigma.to_vec(),
            FeatureScaling::SigmaSquared => sigma.iter().map(|s| s * s).collect(),
        }
    }
}

/// Which singular vectors of a directed adjacency become node features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DirectedFactors {
    Left,
    LeftAndRight,
}
str_enum!(DirectedFactors { Left => "left", LeftAndRight => "left_and_right" });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Raw,
    Graph,
    Feature,
    Aggregated,
    Concatenated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HlpConfig {
    pub k1: usize,
    pub k2: usize,
    pub graph_type: GraphType,
    pub norm: NormMode,
    pub graph_scaling: GraphScaling,
    pub feature_scaling: FeatureScaling,
    pub directed_factors: DirectedFactors,
}

impl HlpConfig {
    pub fn new(k1: usize, k2: usize) -> Self {
        HlpConfig {
            k1,
            k2,
            graph_type: GraphType::Undirected,
            norm: NormMode::Sym,
            graph_scaling: GraphScaling::Sigma,
            feature_scaling: FeatureScaling::Sigma,
            directed_factors: DirectedFactors::Left,
        }
    }

    /// Checks `1 ≤ k1 ≤ min(n, 2048)` and `1 ≤ k2 ≤ min(n, d, 2048)`.
    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        let k1_max = n.min(MAX_RANK);
        let k2_max = n.min(d).min(MAX_RANK);
        if self.k1 == 0 || self.k1 > k1_max {
            return Err(Error::InvalidRank(format!("k1 = {} not in [1, {k1_max}]", self.k1)));
        }
        if self.k2 == 0 || self.k2 > k2_max {
            return Err(Error::InvalidRank(format!("k2 = {} not in [1, {k2_max}]", self.k2)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    values: DenseMatrix,
    provenance: Provenance,
}

impl EmbeddingMatrix {
    pub fn new(values: DenseMatrix, provenance: Provenance) -> Result<Self> {
        if !values.is_finite() {
            return Err(Error::NonFinite("embedding".into()));
        }
        Ok(EmbeddingMatrix { values, provenance })
    }

    pub fn values(&self) -> &DenseMatrix {
        &self.values
    }

    pub fn into_values(self) -> DenseMatrix {
        self.values
    }

    pub fn n(&self) -> usize {
        self.values.n_rows()
    }

    pub fn dim(&self) -> usize {
        self.values.n_cols()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Matrices with a side at most this long are decomposed exactly.
pub const EXACT_TSVD_DIM: usize = 512;

/// Decomposition settings shared by every embedding constructor.
pub fn tsvd_params(k: usize, seed: u64) -> TsvdParams {
    TsvdParams::new(k).with_seed(seed).with_exact_up_to(EXACT_TSVD_DIM)
}

/// Rank-k1 factors of a (normalized) adjacency matrix.
pub fn graph_embedding(a_norm: &SparseMatrix, cfg: &HlpConfig, seed: u64) -> Result<EmbeddingMatrix> {
    if !a_norm.is_square() {
        return Err(Error::NotSquare {
            rows: a_norm.n_rows(),
            cols: a_norm.n_cols(),
        });
    }
    if cfg.k1 == 0 || cfg.k1 > a_norm.n_rows() {
        return Err(Error::InvalidRank(format!("k1 = {} for {} nodes", cfg.k1, a_norm.n_rows())));
    }
    graph_embedding_from(&truncated_svd(a_norm, &tsvd_params(cfg.k1, seed))?, cfg)
}

/// Graph block from an existing decomposition of rank at least `cfg.k1`.
pub fn graph_embedding_from(tsvd: &TsvdResult, cfg: &HlpConfig) -> Result<EmbeddingMatrix> {
    let t = tsvd.truncate(cfg.k1)?;
    let scale = match cfg.graph_scaling {
        GraphScaling::None => vec![1.0; cfg.k1],
        GraphScaling::Sigma => t.sigma().to_vec(),
    };
    let left = t.u().scale_columns(&scale);
    let values = if cfg.graph_type == GraphType::Directed && cfg.directed_factors == DirectedFactors::LeftAndRight {
        left.hcat(&t.v().scale_columns(&scale))?
    } else {
        left
    };
    EmbeddingMatrix::new(values, Provenance::Graph)
}

/// Rank-k2 left factors of the feature matrix, scaled per `feature_scaling`.
pub fn feature_embedding(x: &SparseMatrix, cfg: &HlpConfig, seed: u64) -> Result<EmbeddingMatrix> {
    feature_embedding_from(&truncated_svd(x, &tsvd_params(cfg.k2, seed))?, cfg)
}

pub fn feature_embedding_from(tsvd: &TsvdResult, cfg: &HlpConfig) -> Result<EmbeddingMatrix> {
    let t = tsvd.truncate(cfg.k2)?;
    let values = t.u().scale_columns(&cfg.feature_scaling.apply(t.sigma()));
    EmbeddingMatrix::new(values, Provenance::Feature)
}

/// Truncated graph spectrum applied to truncated feature factors; `n x k2`.
pub fn hlp_aggregate(a_norm: &SparseMatrix, x: &SparseMatrix, cfg: &HlpConfig, seed: u64) -> Result<EmbeddingMatrix> {
    if !a_norm.is_square() || a_norm.n_rows() != x.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "adjacency {}x{} with features {}x{}",
            a_norm.n_rows(),
            a_norm.n_cols(),
            x.n_rows(),
            x.n_cols()
        )));
    }
    cfg.validate(x.n_rows(), x.n_cols())?;
    let graph = truncated_svd(a_norm, &tsvd_params(cfg.k1, seed))?;
    let feats = truncated_svd(x, &tsvd_params(cfg.k2, seed))?;
    hlp_aggregate_from(&graph, &feats, cfg)
}

pub fn hlp_aggregate_from(graph: &TsvdResult, feats: &TsvdResult, cfg: &HlpConfig) -> Result<EmbeddingMatrix> {
    let g = graph.truncate(cfg.k1)?;
    let f = feats.truncate(cfg.k2)?;
    let projection = g.u().t_matmul(f.u())?;
    let values = g
        .u()
        .scale_columns(g.sigma())
        .matmul(&projection)?
        .scale_columns(&cfg.feature_scaling.apply(f.sigma()));
    EmbeddingMatrix::new(values, Provenance::Aggregated)
}

/// `[graph | features]` column-wise.
pub fn hlp_concat(graph_emb: &EmbeddingMatrix, feat_emb: &EmbeddingMatrix) -> Result<EmbeddingMatrix> {
    if graph_emb.dim() == 0 || feat_emb.dim() == 0 {
        return Err(Error::InvalidRank("concatenated blocks must be at least one column wide".into()));
    }
    let values = graph_emb.values.hcat(&feat_emb.values)?;
    EmbeddingMatrix::new(values, Provenance::Concatenated)
}

/// Zero mean and unit population standard deviation per column. Constant
/// columns become zero.
pub fn column_standardize(e: &EmbeddingMatrix) -> EmbeddingMatrix {
    let (n, d) = e.values.shape();
    let mut mean = vec![0.0; d];
    let mut max_abs = vec![0.0f64; d];
    for i in 0..n {
        for (j, &x) in e.values.row(i).iter().enumerate() {
            mean[j] += x;
            max_abs[j] = max_abs[j].max(x.abs());
        }
    }
    mean.iter_mut().for_each(|m| *m /= n.max(1) as f64);
    let mut var = vec![0.0; d];
    for i in 0..n {
        for (j, &x) in e.values.row(i).iter().enumerate() {
            var[j] += (x - mean[j]) * (x - mean[j]);
        }
    }
    let inv_std: Vec<f64> = var
        .iter()
        .zip(&max_abs)
        .map(|(v, &m)| {
            let std = (v / n.max(1) as f64).sqrt();
            if std > 1e-12 * m { 1.0 / std } else { 0.0 }
        })
        .collect();
    let mut values = e.values.clone();
    for i in 0..n {
        for (j, x) in values.row_mut(i).iter_mut().enumerate() {
            *x = (*x - mean[j]) * inv_std[j];
        }
    }
    EmbeddingMatrix {
        values,
        provenance: e.provenance,
    }
}

/// Writes `embeddings.tsv`: a `node_id dim=<k>` header, then one
/// tab-separated row per node (`id`, `k` values, optional label).
pub fn write_embeddings(path: impl AsRef<Path>, emb: &DenseMatrix, labels: Option<&[usize]>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let _ = writeln!(out, "node_id dim={}", emb.n_cols());
    for i in 0..emb.n_rows() {
        let _ = write!(out, "{i}");
        for v in emb.row(i) {
            let _ = write!(out, "\t{v}");
        }
        if let Some(labels) = labels {
            let _ = write!(out, "\t{}", labels[i]);
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
