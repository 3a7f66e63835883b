use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hlp_core::graph::{generate_splits, load_dataset, read_splits, stats, write_splits, GraphDataset, Split, SplitSizes};
use hlp_core::harness::{
    ablation_fixed_vs_variable, ablation_normalization, export_embeddings, format_pct, render_csv, render_table,
    run_trial, sweep, ModelKind, PairedReport, Report, Strategy, SweepSpec, TrialConfig, TrialContext,
};

/// Truncated-SVD node classification on heterophilic graphs.
#[derive(Debug, Parser)]
#[command(name = "hlp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print node, edge, feature and class counts and the homophily score.
    Stats { dataset: PathBuf },
    /// Generate random train/val/test splits into `<dataset>/splits/`.
    Splits(SplitsArgs),
    /// Train one configuration on one split, or on all of them.
    Train(TrainArgs),
    /// Hyperparameter search; writes one CSV row per trial.
    Sweep(SweepArgs),
    /// Paired sweeps: fixed vs variable ranks, or sym-only vs swept normalization.
    Ablate(AblateArgs),
    /// Train on one split and write per-node output-layer inputs.
    ExportEmbeddings(ExportArgs),
}

#[derive(Debug, Args)]
struct SplitsArgs {
    dataset: PathBuf,
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Train,val,test fractions.
    #[arg(long, value_delimiter = ',', conflicts_with = "sizes")]
    ratios: Option<Vec<f64>>,
    /// Train,val,test node counts.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write into `<out>/splits/` instead of the dataset directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Where trials get their splits from.
#[derive(Debug, Args)]
struct SplitSource {
    /// Seed for generated splits when the dataset has no `splits/` directory.
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
}

#[derive(Debug, Args)]
struct TrainArgs {
    dataset: PathBuf,
    /// lr, mlp, hlp_agg or hlp_concat.
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Train on this split only. All splits when absent.
    #[arg(long)]
    split: Option<usize>,
    #[command(flatten)]
    source: SplitSource,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 200)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// grid or random.
    #[arg(long, default_value_t = Strategy::Random)]
    strategy: Strategy,
    /// Settings the search does not vary (epochs, patience, ...).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write 0 seconds for every trial so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    source: SplitSource,
}

#[derive(Debug, Args)]
struct SweepArgs {
    dataset: PathBuf,
    /// lr, mlp, hlp_agg or hlp_concat.
    #[arg(long)]
    model: ModelKind,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Debug, Args)]
struct AblateArgs {
    dataset: PathBuf,
    #[arg(long, value_enum)]
    which: Ablation,
    /// Directory for the two arm reports and a summary.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Debug, Args)]
struct ExportArgs {
    dataset: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    split: usize,
    #[command(flatten)]
    source: SplitSource,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Ablation {
    Dims,
    Norm,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Stats { dataset } => {
            let ds = load(&dataset)?;
            println!("{}", stats(&ds));
        }
        Command::Splits(args) => cmd_splits(args)?,
        Command::Train(args) => cmd_train(args)?,
        Command::Sweep(args) => cmd_sweep(args)?,
        Command::Ablate(args) => cmd_ablate(args)?,
        Command::ExportEmbeddings(args) => cmd_export(args)?,
    }
    Ok(())
}

fn load(dir: &Path) -> Result<GraphDataset> {
    load_dataset(dir).with_context(|| format!("loading dataset from {}", dir.display()))
}

/// Stored splits if the dataset has them, else ten generated 48/32/20 splits.
fn load_with_splits(dir: &Path, source: &SplitSource) -> Result<(GraphDataset, Vec<Split>)> {
    let ds = load(dir)?;
    let mut splits = read_splits(dir)?;
    if splits.is_empty() {
        splits = generate_splits(&ds, SplitSizes::STANDARD, 10, source.split_seed)?;
    }
    Ok((ds, splits))
}

fn cmd_splits(args: SplitsArgs) -> Result<()> {
    let ds = load(&args.dataset)?;
    let sizes = match (args.ratios, args.sizes) {
        (_, Some(s)) => SplitSizes::Absolute(three(&s, "--sizes")?),
        (Some(r), None) => SplitSizes::Ratios(three(&r, "--ratios")?),
        (None, None) => SplitSizes::STANDARD,
    };
    let splits = generate_splits(&ds, sizes, args.count, args.seed)?;
    let out = args.out.unwrap_or(args.dataset);
    write_splits(&out, &splits)?;
    let (tr, va, te) = splits[0].sizes();
    println!("wrote {} splits ({tr}/{va}/{te}) to {}", splits.len(), out.join("splits").display());
    Ok(())
}

fn three<T: Copy>(values: &[T], flag: &str) -> Result<[T; 3]> {
    match values {
        &[a, b, c] => Ok([a, b, c]),
        _ => bail!("{flag} takes three comma-separated values"),
    }
}

fn trial_config(model: Option<ModelKind>, config: Option<&Path>) -> Result<TrialConfig> {
    let cfg = match config {
        Some(path) => TrialConfig::load(path, model)?,
        None => match model {
            Some(m) => TrialConfig::new(m),
            None => bail!("give --model or a --config with a model key"),
        },
    };
    if let Some(m) = model {
        if m != cfg.model {
            bail!("--model {m} disagrees with model={} in the config", cfg.model);
        }
    }
    Ok(cfg)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let (ds, splits) = load_with_splits(&args.dataset, &args.source)?;
    let cfg = trial_config(args.model, args.config.as_deref())?;
    let ctx = TrialContext::new(&ds, &splits)?;
    match args.split {
        Some(i) => {
            let out = ctx.train_split(&cfg, i)?;
            println!("split {i}: best epoch {} of {}", out.best_epoch, out.epochs_run);
            println!("train {:.2}  val {:.2}  test {:.2}", 100.0 * out.train.accuracy, 100.0 * out.val.accuracy, 100.0 * out.test.accuracy);
            if out.diverged {
                println!("diverged");
            }
        }
        None => {
            let r = run_trial(&ctx, 0, &cfg)?;
            for (i, s) in r.splits.iter().enumerate() {
                println!("split {i}: val {:.2}  test {:.2}", 100.0 * s.val_accuracy, 100.0 * s.test_accuracy);
            }
            println!("test {}", format_pct(r.mean_test, r.std_test));
            if r.diverged {
                println!("at least one split diverged");
            }
        }
    }
    Ok(())
}

fn search_spec(model: ModelKind, args: &SearchArgs) -> Result<SweepSpec> {
    let base = match &args.config {
        Some(path) => TrialConfig::load(path, Some(model))?,
        None => TrialConfig::new(model),
    };
    if base.model != model {
        bail!("base config is for {}, sweep is for {model}", base.model);
    }
    Ok(SweepSpec {
        budget: args.budget,
        seed: args.seed,
        workers: args.workers,
        strategy: args.strategy,
        record_timing: !args.no_timing,
        base,
        ..SweepSpec::new(model)
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let (ds, splits) = load_with_splits(&args.dataset, &args.search.source)?;
    let spec = search_spec(args.model, &args.search)?;
    let ctx = TrialContext::new(&ds, &splits)?;
    let start = Instant::now();
    let report = sweep(&ctx, &spec)?;
    write(&args.out, &render_csv(&report))?;
    print!("{}", render_table(&report));
    eprintln!("{} trials in {:.1}s", report.trials.len(), start.elapsed().as_secs_f64());
    Ok(())
}

fn cmd_ablate(args: AblateArgs) -> Result<()> {
    let (ds, splits) = load_with_splits(&args.dataset, &args.search.source)?;
    let ctx = TrialContext::new(&ds, &splits)?;
    let paired: PairedReport = match args.which {
        Ablation::Dims => ablation_fixed_vs_variable(&ctx, &search_spec(ModelKind::HlpConcat, &args.search)?)?,
        Ablation::Norm => ablation_normalization(&ctx, &search_spec(ModelKind::HlpAgg, &args.search)?)?,
    };
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut summary = String::new();
    for (label, report) in [(&paired.label_a, &paired.a), (&paired.label_b, &paired.b)] {
        write(&args.out.join(format!("{label}.csv")), &render_csv(report))?;
        summary.push_str(&arm_line(label, report));
    }
    summary.push_str(&format!("gap {:.2}\n", 100.0 * paired.gap()));
    write(&args.out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn arm_line(label: &str, report: &Report) -> String {
    let best = report.best_trial();
    format!("{label:<12} {}  (trial {})\n", format_pct(best.mean_test, best.std_test), best.trial_id)
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    let (ds, splits) = load_with_splits(&args.dataset, &args.source)?;
    let cfg = trial_config(None, Some(&args.config))?;
    let ctx = TrialContext::new(&ds, &splits)?;
    let emb = export_embeddings(&ctx, &cfg, args.split, &args.out)?;
    println!("wrote {} x {} embeddings to {}", emb.n_rows(), emb.n_cols(), args.out.display());
    Ok(())
}
