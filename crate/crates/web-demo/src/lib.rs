//! Browser bindings over a small synthetic heterophilic graph: its spectrum,
//! the implicit rank-k graph and HLP Concat accuracy as the graph rank grows.

use hlp_core::dense::DenseMatrix;
use hlp_core::graph::synthetic::SyntheticGraph;
use hlp_core::graph::{build_adjacency, generate_splits, homophily_score, GraphDataset, GraphType, Split, SplitSizes};
use hlp_core::harness::{mean_std, ModelKind, TrialConfig, TrialContext};
use hlp_core::models::tsvd_params;
use hlp_core::sparse::NormMode;
use hlp_core::tsvd::{truncated_svd, TsvdResult};
use wasm_bindgen::prelude::*;

const SPLITS: usize = 3;
const HIDDEN: usize = 32;

/// Plain-Rust side of the demo. Errors are strings so they cross into JS
/// unchanged.
pub struct Scene {
    ds: GraphDataset,
    splits: Vec<Split>,
    /// Full decomposition of the sym-normalized undirected adjacency.
    svd: TsvdResult,
    /// Node ids grouped by class.
    order: Vec<usize>,
}

impl Scene {
    pub fn new(n: usize, classes: usize, homophily: f64, seed: u64) -> Result<Scene, String> {
        if !(0.0..=1.0).contains(&homophily) {
            return Err(format!("homophily {homophily} outside [0, 1]"));
        }
        let ds = SyntheticGraph { n, num_classes: classes, homophily, n_features: 8 * classes, seed, ..Default::default() }
            .generate()
            .map_err(|e| e.to_string())?;
        let splits = generate_splits(&ds, SplitSizes::STANDARD, SPLITS, seed).map_err(|e| e.to_string())?;
        let a = build_adjacency(&ds, GraphType::Undirected, NormMode::Sym);
        let svd = truncated_svd(&a, &tsvd_params(n, seed)).map_err(|e| e.to_string())?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (ds.labels()[i], i));
        Ok(Scene { ds, splits, svd, order })
    }

    pub fn dataset(&self) -> &GraphDataset {
        &self.ds
    }

    pub fn spectrum(&self) -> &[f64] {
        self.svd.sigma()
    }

    fn rank_k(&self, k: usize) -> Result<DenseMatrix, String> {
        Ok(self.svd.truncate(k).map_err(|e| e.to_string())?.symmetric_reconstruct())
    }

    /// Row-major `n x n` rank-k graph with nodes grouped by class.
    pub fn reconstruction(&self, k: usize) -> Result<Vec<f64>, String> {
        let r = self.rank_k(k)?;
        let r = &r;
        Ok(self.order.iter().flat_map(|&i| self.order.iter().map(move |&j| r.get(i, j))).collect())
    }

    pub fn negative_fraction(&self, k: usize) -> Result<f64, String> {
        let r = self.rank_k(k)?;
        let n = self.ds.n();
        let negative = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .filter(|&(i, j)| r.get(i, j) < -1e-12)
            .count();
        Ok(negative as f64 / (n * (n - 1)).max(1) as f64)
    }

    // Trains split by split: `run_trial` reads the clock, which panics on
    // wasm32-unknown-unknown.
    fn mean_test(&self, cfg: &TrialConfig) -> Result<f64, String> {
        let ctx = TrialContext::new(&self.ds, &self.splits).map_err(|e| e.to_string())?;
        let mut accs = Vec::with_capacity(self.splits.len());
        for i in 0..self.splits.len() {
            accs.push(ctx.train_split(cfg, i).map_err(|e| e.to_string())?.test.accuracy);
        }
        Ok(mean_std(&accs).0)
    }

    pub fn concat_accuracy(&self, k1: usize, k2: usize, epochs: usize) -> Result<f64, String> {
        let mut cfg = TrialConfig::new(ModelKind::HlpConcat);
        cfg.hlp.k1 = k1;
        cfg.hlp.k2 = k2;
        cfg.mlp.max_epochs = epochs;
        cfg.mlp.hidden_dim = Some(HIDDEN);
        self.mean_test(&cfg)
    }

    pub fn baseline_accuracy(&self, epochs: usize) -> Result<f64, String> {
        let mut cfg = TrialConfig::new(ModelKind::Lr);
        cfg.mlp.max_epochs = epochs;
        self.mean_test(&cfg)
    }
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
pub struct Demo {
    scene: Scene,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, classes: usize, homophily: f64, seed: u32) -> Result<Demo, JsError> {
        Ok(Demo { scene: Scene::new(n, classes, homophily, seed.into()).map_err(js)? })
    }

    pub fn n(&self) -> usize {
        self.scene.ds.n()
    }

    /// Fraction of edges joining same-class nodes.
    pub fn homophily(&self) -> f64 {
        homophily_score(&self.scene.ds).unwrap_or(f64::NAN)
    }

    /// Singular values, largest first.
    pub fn spectrum(&self) -> Vec<f64> {
        self.scene.spectrum().to_vec()
    }

    /// Class labels in heatmap order.
    pub fn labels(&self) -> Vec<usize> {
        self.scene.order.iter().map(|&i| self.scene.ds.labels()[i]).collect()
    }

    pub fn reconstruction(&self, k: usize) -> Result<Vec<f64>, JsError> {
        self.scene.reconstruction(k).map_err(js)
    }

    /// Share of off-diagonal entries of the rank-k graph that are negative.
    pub fn negative_fraction(&self, k: usize) -> Result<f64, JsError> {
        self.scene.negative_fraction(k).map_err(js)
    }

    /// Mean test accuracy over the demo splits for each graph rank in `ks`.
    pub fn accuracy_curve(&self, ks: Vec<usize>, k2: usize, epochs: usize) -> Result<Vec<f64>, JsError> {
        ks.iter().map(|&k1| self.scene.concat_accuracy(k1, k2, epochs).map_err(js)).collect()
    }

    pub fn baseline_accuracy(&self, epochs: usize) -> Result<f64, JsError> {
        self.scene.baseline_accuracy(epochs).map_err(js)
    }
}
