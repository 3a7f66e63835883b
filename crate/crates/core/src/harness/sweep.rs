use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{run_trial, ModelKind, Report, TrialConfig, TrialContext, TrialResult};
use crate::error::{Error, Result};
use crate::graph::GraphType;
use crate::models::{FeatureScaling, GraphScaling, MAX_RANK};
use crate::sparse::NormMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Grid,
    Random,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Grid => "grid",
            Strategy::Random => "random",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Strategy::Grid),
            "random" => Ok(Strategy::Random),
            _ => Err(Error::InvalidParameter(format!("unknown strategy '{s}' (expected grid or random)"))),
        }
    }
}

/// Search space and budget for one model kind.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub model: ModelKind,
    pub learning_rates: Vec<f64>,
    pub dropouts: Vec<f64>,
    pub weight_decays: Vec<f64>,
    pub hidden_dims: Vec<usize>,
    /// Inclusive; the upper end is clipped to what the dataset allows.
    pub k1_range: (usize, usize),
    pub k2_range: (usize, usize),
    /// Draw one shared rank and use it for both k1 and k2.
    pub tie_ranks: bool,
    pub graph_types: Vec<GraphType>,
    pub norms: Vec<NormMode>,
    /// Only HLP Concat reads this; aggregation always scales by the graph
    /// singular values.
    pub graph_scalings: Vec<GraphScaling>,
    pub feature_scalings: Vec<FeatureScaling>,
    pub budget: usize,
    pub strategy: Strategy,
    pub seed: u64,
    pub workers: usize,
    /// When false every trial reports 0 seconds, so reports are byte-stable.
    pub record_timing: bool,
    /// Source of every setting the sweep does not vary.
    pub base: TrialConfig,
}

impl SweepSpec {
    pub fn new(model: ModelKind) -> Self {
        SweepSpec {
            model,
            learning_rates: vec![0.001, 0.003, 0.005, 0.008, 0.01],
            dropouts: vec![0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
            weight_decays: vec![1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 1e-1],
            hidden_dims: vec![16, 32, 64],
            k1_range: (1, MAX_RANK),
            k2_range: (1, MAX_RANK),
            tie_ranks: false,
            graph_types: GraphType::ALL.to_vec(),
            norms: NormMode::ALL.to_vec(),
            graph_scalings: vec![GraphScaling::None, GraphScaling::Sigma],
            feature_scalings: vec![FeatureScaling::None, FeatureScaling::Sigma, FeatureScaling::SigmaSquared],
            budget: 200,
            strategy: Strategy::Random,
            seed: 0,
            workers: 1,
            record_timing: true,
            base: TrialConfig::new(model),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("learning_rates", self.learning_rates.is_empty()),
            ("dropouts", self.dropouts.is_empty()),
            ("weight_decays", self.weight_decays.is_empty()),
            ("hidden_dims", self.hidden_dims.is_empty()),
            ("graph_types", self.graph_types.is_empty()),
            ("norms", self.norms.is_empty()),
            ("graph_scalings", self.graph_scalings.is_empty()),
            ("feature_scalings", self.feature_scalings.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::InvalidParameter(format!("sweep grid {name} is empty")));
        }
        if self.budget == 0 || self.workers == 0 {
            return Err(Error::InvalidParameter("budget and workers must be at least 1".into()));
        }
        for (name, (lo, hi)) in [("k1", self.k1_range), ("k2", self.k2_range)] {
            if lo == 0 || lo > hi {
                return Err(Error::InvalidParameter(format!("{name} range [{lo}, {hi}] is empty or starts at 0")));
            }
        }
        if self.base.model != self.model {
            return Err(Error::InvalidParameter("base config model differs from sweep model".into()));
        }
        Ok(())
    }

    /// Effective inclusive rank ranges `(k1, k2)` for an `n x d` dataset.
    fn rank_ranges(&self, n: usize, d: usize) -> Result<((usize, usize), (usize, usize))> {
        let clip = |(lo, hi): (usize, usize), cap: usize, name: &str| {
            let hi = hi.min(cap);
            if lo > hi {
                Err(Error::InvalidParameter(format!("{name} range starts at {lo} above the cap {cap}")))
            } else {
                Ok((lo, hi))
            }
        };
        let k1 = clip(self.k1_range, n.min(MAX_RANK), "k1")?;
        let k2 = clip(self.k2_range, n.min(d).min(MAX_RANK), "k2")?;
        if self.tie_ranks {
            let shared = clip((k1.0.max(k2.0), k1.1), k2.1, "shared rank")?;
            return Ok((shared, shared));
        }
        Ok((k1, k2))
    }
}

/// Integer drawn log-uniformly from `[lo, hi]`.
fn log_uniform(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    let (a, b) = ((lo as f64).ln(), ((hi + 1) as f64).ln());
    let k = rng.random_range(a..b).exp().floor() as usize;
    k.clamp(lo, hi)
}

/// Powers of two inside `[lo, hi]` plus both ends.
fn rank_grid(lo: usize, hi: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = std::iter::successors(Some(1usize), |k| k.checked_mul(2))
        .take_while(|&k| k <= hi)
        .filter(|&k| k >= lo)
        .collect();
    ks.push(lo);
    ks.push(hi);
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// The trial configurations a sweep over an `n x d` dataset will run.
pub fn sample_trials(spec: &SweepSpec, n: usize, d: usize) -> Result<Vec<TrialConfig>> {
    spec.validate()?;
    let model = spec.model;
    let hlp = model.is_hlp();
    let (k1r, k2r) = if hlp { spec.rank_ranges(n, d)? } else { ((1, 1), (1, 1)) };
    let hidden: Vec<Option<usize>> = if model.has_hidden_layer() {
        spec.hidden_dims.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    let graph_scalings = if model == ModelKind::HlpConcat {
        spec.graph_scalings.clone()
    } else {
        vec![spec.base.hlp.graph_scaling]
    };
    let (graph_types, norms, feature_scalings) = if hlp {
        (spec.graph_types.clone(), spec.norms.clone(), spec.feature_scalings.clone())
    } else {
        (vec![spec.base.hlp.graph_type], vec![spec.base.hlp.norm], vec![spec.base.hlp.feature_scaling])
    };
    let mut base = spec.base.clone();
    base.mlp.seed = spec.seed;

    let build = |lr, dropout, wd, h, k1, k2, gt, norm, gs, fs| {
        let mut cfg = base.clone();
        cfg.mlp.learning_rate = lr;
        cfg.mlp.dropout = dropout;
        cfg.mlp.weight_decay = wd;
        cfg.mlp.hidden_dim = h;
        if hlp {
            cfg.hlp.k1 = k1;
            cfg.hlp.k2 = k2;
            cfg.hlp.graph_type = gt;
            cfg.hlp.norm = norm;
            cfg.hlp.graph_scaling = gs;
            cfg.hlp.feature_scaling = fs;
        }
        cfg
    };

    match spec.strategy {
        Strategy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let pick = |rng: &mut ChaCha8Rng, xs: &[f64]| *xs.choose(rng).expect("validated non-empty");
            Ok((0..spec.budget)
                .map(|_| {
                    let lr = pick(&mut rng, &spec.learning_rates);
                    let dropout = pick(&mut rng, &spec.dropouts);
                    let wd = pick(&mut rng, &spec.weight_decays);
                    let h = *hidden.choose(&mut rng).expect("non-empty");
                    if !hlp {
                        return build(lr, dropout, wd, h, 0, 0, base.hlp.graph_type, base.hlp.norm, base.hlp.graph_scaling, base.hlp.feature_scaling);
                    }
                    let k1 = log_uniform(&mut rng, k1r.0, k1r.1);
                    let k2 = if spec.tie_ranks { k1 } else { log_uniform(&mut rng, k2r.0, k2r.1) };
                    let gt = *graph_types.choose(&mut rng).expect("non-empty");
                    let norm = *norms.choose(&mut rng).expect("non-empty");
                    let gs = *graph_scalings.choose(&mut rng).expect("non-empty");
                    let fs = *feature_scalings.choose(&mut rng).expect("non-empty");
                    build(lr, dropout, wd, h, k1, k2, gt, norm, gs, fs)
                })
                .collect())
        }
        Strategy::Grid => {
            let k1s = if hlp { rank_grid(k1r.0, k1r.1) } else { vec![0] };
            let k2s = if hlp && !spec.tie_ranks { rank_grid(k2r.0, k2r.1) } else { vec![0] };
            let radices = [
                spec.learning_rates.len(),
                spec.dropouts.len(),
                spec.weight_decays.len(),
                hidden.len(),
                k1s.len(),
                k2s.len(),
                graph_types.len(),
                norms.len(),
                graph_scalings.len(),
                feature_scalings.len(),
            ];
            let total = radices.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r)).unwrap_or(usize::MAX);
            Ok((0..total.min(spec.budget))
                .map(|mut t| {
                    let mut digit = [0usize; 10];
                    for (slot, &r) in digit.iter_mut().zip(&radices).rev() {
                        *slot = t % r;
                        t /= r;
                    }
                    let k1 = k1s[digit[4]];
                    let k2 = if spec.tie_ranks { k1 } else { k2s[digit[5]] };
                    build(
                        spec.learning_rates[digit[0]],
                        spec.dropouts[digit[1]],
                        spec.weight_decays[digit[2]],
                        hidden[digit[3]],
                        k1,
                        k2,
                        graph_types[digit[6]],
                        norms[digit[7]],
                        graph_scalings[digit[8]],
                        feature_scalings[digit[9]],
                    )
                })
                .collect())
        }
    }
}

/// Runs every sampled trial on a pool of `spec.workers` threads and picks the
/// configuration with the best mean validation accuracy.
pub fn sweep(ctx: &TrialContext<'_>, spec: &SweepSpec) -> Result<Report> {
    let ds = ctx.dataset;
    let configs = sample_trials(spec, ds.n(), ds.n_features())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let trials: Vec<TrialResult> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, cfg)| {
                let mut r = run_trial(ctx, i, cfg).unwrap_or_else(|e| TrialResult::failed(i, cfg.clone(), &e));
                if !spec.record_timing {
                    r.seconds = 0.0;
                }
                r
            })
            .collect()
    });
    Report::new(ds.name(), spec.model, trials)
}

/// Two sweeps that differ in one restriction.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedReport {
    pub label_a: String,
    pub a: Report,
    pub label_b: String,
    pub b: Report,
}

impl PairedReport {
    /// Mean-test gap `b - a` in accuracy units.
    pub fn gap(&self) -> f64 {
        self.b.best_trial().mean_test - self.a.best_trial().mean_test
    }
}

/// Arm A forces `k1 = k2`; arm B runs `spec` as given.
pub fn ablation_fixed_vs_variable(ctx: &TrialContext<'_>, spec: &SweepSpec) -> Result<PairedReport> {
    if spec.model != ModelKind::HlpConcat {
        return Err(Error::InvalidParameter("the dimension ablation needs an hlp_concat sweep".into()));
    }
    let fixed = SweepSpec { tie_ranks: true, ..spec.clone() };
    Ok(PairedReport {
        label_a: "fixed_dims".into(),
        a: sweep(ctx, &fixed)?,
        label_b: "variable_dims".into(),
        b: sweep(ctx, spec)?,
    })
}

/// Arm A is restricted to the undirected, symmetrically normalized graph;
/// arm B runs `spec` as given.
pub fn ablation_normalization(ctx: &TrialContext<'_>, spec: &SweepSpec) -> Result<PairedReport> {
    if spec.model != ModelKind::HlpAgg {
        return Err(Error::InvalidParameter("the normalization ablation needs an hlp_agg sweep".into()));
    }
    let sym_only = SweepSpec {
        graph_types: vec![GraphType::Undirected],
        norms: vec![NormMode::Sym],
        ..spec.clone()
    };
    Ok(PairedReport {
        label_a: "sym_only".into(),
        a: sweep(ctx, &sym_only)?,
        label_b: "norm_swept".into(),
        b: sweep(ctx, spec)?,
    })
}
