//! Trials, sweeps, ablations, reports and embedding export.

mod config;
mod report;
mod sweep;

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

pub use config::{ModelKind, TrialConfig};
pub use report::{format_pct, parse_csv, render_csv, render_table, CsvRecord, Report, CSV_HEADER};
pub use sweep::{ablation_fixed_vs_variable, ablation_normalization, sample_trials, sweep, PairedReport, Strategy, SweepSpec};

use crate::classifier::{self, TrainOutcome};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::{build_adjacency, GraphDataset, GraphType, Split};
use crate::models::{
    column_standardize, feature_embedding_from, graph_embedding_from, hlp_aggregate_from, hlp_concat, tsvd_params,
    write_embeddings, MAX_RANK,
};
use crate::sparse::NormMode;
use crate::tsvd::{truncated_svd, TsvdResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum MatrixKey {
    Graph(GraphType, NormMode),
    Features,
}

type Slot = Arc<Mutex<Option<Arc<TsvdResult>>>>;

/// Insert-once store of TSVDs, one per (matrix, seed), each computed at the
/// largest rank any trial may ask for and truncated on use.
#[derive(Debug, Default)]
pub struct TsvdCache {
    slots: Mutex<HashMap<(MatrixKey, u64), Slot>>,
}

impl TsvdCache {
    pub fn len(&self) -> usize {
        self.slots
            .lock()
            .expect("cache lock")
            .values()
            .filter(|s| s.lock().expect("slot lock").is_some())
            .count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get_or_compute(&self, key: (MatrixKey, u64), compute: impl FnOnce() -> Result<TsvdResult>) -> Result<Arc<TsvdResult>> {
        let slot = self.slots.lock().expect("cache lock").entry(key).or_default().clone();
        let mut guard = slot.lock().expect("slot lock");
        if let Some(hit) = guard.as_ref() {
            return Ok(hit.clone());
        }
        let fresh = Arc::new(compute()?);
        *guard = Some(fresh.clone());
        Ok(fresh)
    }
}

/// A dataset with its splits and shared read-only state for trials.
#[derive(Debug)]
pub struct TrialContext<'a> {
    pub dataset: &'a GraphDataset,
    pub splits: &'a [Split],
    cache: Option<TsvdCache>,
    raw_features: OnceLock<DenseMatrix>,
}

impl<'a> TrialContext<'a> {
    pub fn new(dataset: &'a GraphDataset, splits: &'a [Split]) -> Result<Self> {
        if splits.is_empty() {
            return Err(Error::Split("no splits given".into()));
        }
        for s in splits {
            s.validate(dataset)?;
        }
        Ok(TrialContext {
            dataset,
            splits,
            cache: Some(TsvdCache::default()),
            raw_features: OnceLock::new(),
        })
    }

    /// Recomputes every decomposition on demand. Results match the cached
    /// context exactly.
    pub fn uncached(dataset: &'a GraphDataset, splits: &'a [Split]) -> Result<Self> {
        let mut ctx = TrialContext::new(dataset, splits)?;
        ctx.cache = None;
        Ok(ctx)
    }

    pub fn cache(&self) -> Option<&TsvdCache> {
        self.cache.as_ref()
    }

    fn decomposition(&self, key: MatrixKey, seed: u64) -> Result<Arc<TsvdResult>> {
        let ds = self.dataset;
        let compute = || match key {
            MatrixKey::Graph(graph_type, norm) => {
                let a = build_adjacency(ds, graph_type, norm);
                truncated_svd(&a, &tsvd_params(ds.n().min(MAX_RANK), seed))
            }
            MatrixKey::Features => {
                let rank = ds.n().min(ds.n_features()).min(MAX_RANK);
                truncated_svd(ds.features(), &tsvd_params(rank, seed))
            }
        };
        match &self.cache {
            Some(cache) => cache.get_or_compute((key, seed), compute),
            None => compute().map(Arc::new),
        }
    }

    /// Classifier input for `cfg`: raw features for the baselines, the HLP
    /// embedding (standardized if asked) otherwise.
    pub fn features_for(&self, cfg: &TrialConfig) -> Result<DenseMatrix> {
        let ds = self.dataset;
        cfg.validate(ds.n(), ds.n_features())?;
        if !cfg.model.is_hlp() {
            return Ok(self.raw_features.get_or_init(|| ds.features().to_dense()).clone());
        }
        let seed = cfg.seed();
        let graph = self.decomposition(MatrixKey::Graph(cfg.hlp.graph_type, cfg.hlp.norm), seed)?;
        let feats = self.decomposition(MatrixKey::Features, seed)?;
        let emb = match cfg.model {
            ModelKind::HlpAgg => hlp_aggregate_from(&graph, &feats, &cfg.hlp)?,
            _ => hlp_concat(
                &graph_embedding_from(&graph, &cfg.hlp)?,
                &feature_embedding_from(&feats, &cfg.hlp)?,
            )?,
        };
        let emb = if cfg.standardize { column_standardize(&emb) } else { emb };
        Ok(emb.into_values())
    }

    pub fn train_split(&self, cfg: &TrialConfig, split_index: usize) -> Result<TrainOutcome> {
        let split = self
            .splits
            .get(split_index)
            .ok_or_else(|| Error::Split(format!("split {split_index} of {}", self.splits.len())))?;
        let x = self.features_for(cfg)?;
        self.train_on(&x, cfg, split)
    }

    fn train_on(&self, x: &DenseMatrix, cfg: &TrialConfig, split: &Split) -> Result<TrainOutcome> {
        classifier::train(x, self.dataset.labels(), self.dataset.num_classes(), split, &cfg.mlp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitResult {
    pub val_accuracy: f64,
    pub test_accuracy: f64,
    pub best_epoch: usize,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial_id: usize,
    pub config: TrialConfig,
    pub splits: Vec<SplitResult>,
    pub mean_val: f64,
    pub mean_test: f64,
    /// Population standard deviation of the test accuracies.
    pub std_test: f64,
    pub diverged: bool,
    /// Set when the trial could not run at all.
    pub error: Option<String>,
    pub seconds: f64,
}

impl TrialResult {
    pub fn completed(&self) -> bool {
        !self.diverged && self.error.is_none()
    }

    fn failed(trial_id: usize, config: TrialConfig, error: &Error) -> Self {
        TrialResult {
            trial_id,
            config,
            splits: Vec::new(),
            mean_val: 0.0,
            mean_test: 0.0,
            std_test: 0.0,
            diverged: true,
            error: Some(error.to_string()),
            seconds: 0.0,
        }
    }
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Trains `cfg` on every split and aggregates accuracies.
pub fn run_trial(ctx: &TrialContext<'_>, trial_id: usize, cfg: &TrialConfig) -> Result<TrialResult> {
    let start = Instant::now();
    let x = ctx.features_for(cfg)?;
    let mut splits = Vec::with_capacity(ctx.splits.len());
    for split in ctx.splits {
        let out = ctx.train_on(&x, cfg, split)?;
        splits.push(SplitResult {
            val_accuracy: out.val.accuracy,
            test_accuracy: out.test.accuracy,
            best_epoch: out.best_epoch,
            diverged: out.diverged,
        });
    }
    let vals: Vec<f64> = splits.iter().map(|s| s.val_accuracy).collect();
    let tests: Vec<f64> = splits.iter().map(|s| s.test_accuracy).collect();
    let (mean_val, _) = mean_std(&vals);
    let (mean_test, std_test) = mean_std(&tests);
    Ok(TrialResult {
        trial_id,
        config: cfg.clone(),
        diverged: splits.iter().any(|s| s.diverged),
        splits,
        mean_val,
        mean_test,
        std_test,
        error: None,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Trains on one split and writes the output layer's inputs for every node
/// plus a label column.
pub fn export_embeddings(ctx: &TrialContext<'_>, cfg: &TrialConfig, split_index: usize, out: impl AsRef<Path>) -> Result<DenseMatrix> {
    let x = ctx.features_for(cfg)?;
    let split = ctx
        .splits
        .get(split_index)
        .ok_or_else(|| Error::Split(format!("split {split_index} of {}", ctx.splits.len())))?;
    let trained = ctx.train_on(&x, cfg, split)?;
    let emb = classifier::penultimate(&trained.model, &x)?;
    write_embeddings(out, &emb, Some(ctx.dataset.labels()))?;
    Ok(emb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::synthetic::SyntheticGraph;
    use crate::graph::{generate_splits, SplitSizes};

    fn toy() -> (GraphDataset, Vec<Split>) {
        let ds = SyntheticGraph { n: 60, n_features: 12, num_classes: 3, ..Default::default() }
            .generate()
            .unwrap();
        let splits = generate_splits(&ds, SplitSizes::STANDARD, 2, 0).unwrap();
        (ds, splits)
    }

    fn quick(model: ModelKind) -> TrialConfig {
        let mut cfg = TrialConfig::new(model);
        cfg.hlp.k1 = 8;
        cfg.hlp.k2 = 6;
        cfg.mlp.max_epochs = 40;
        cfg.mlp.hidden_dim = cfg.mlp.hidden_dim.map(|_| 8);
        cfg
    }

    #[test]
    fn population_std() {
        assert_eq!(mean_std(&[0.5]), (0.5, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }

    #[test]
    fn every_model_kind_runs() {
        let (ds, splits) = toy();
        let ctx = TrialContext::new(&ds, &splits).unwrap();
        for model in ModelKind::ALL {
            let r = run_trial(&ctx, 0, &quick(model)).unwrap();
            assert_eq!(r.splits.len(), 2);
            assert!((0.0..=1.0).contains(&r.mean_test));
        }
        // One graph and one feature decomposition shared by both HLP kinds.
        assert_eq!(ctx.cache().unwrap().len(), 2);
    }

    #[test]
    fn cache_is_invisible() {
        let (ds, splits) = toy();
        let cached = TrialContext::new(&ds, &splits).unwrap();
        let uncached = TrialContext::uncached(&ds, &splits).unwrap();
        for model in [ModelKind::HlpAgg, ModelKind::HlpConcat] {
            let cfg = quick(model);
            let a = run_trial(&cached, 0, &cfg).unwrap();
            let b = run_trial(&uncached, 0, &cfg).unwrap();
            assert_eq!(a.splits, b.splits);
            assert_eq!(cached.features_for(&cfg).unwrap(), uncached.features_for(&cfg).unwrap());
        }
    }

    #[test]
    fn rejects_bad_rank_and_split_index() {
        let (ds, splits) = toy();
        let ctx = TrialContext::new(&ds, &splits).unwrap();
        let mut cfg = quick(ModelKind::HlpConcat);
        cfg.hlp.k2 = 13;
        assert!(run_trial(&ctx, 0, &cfg).is_err());
        assert!(ctx.train_split(&quick(ModelKind::Lr), 5).is_err());
        assert!(TrialContext::new(&ds, &[]).is_err());
    }
}
