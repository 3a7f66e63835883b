use std::fmt::Write as _;
use std::str::FromStr;

use super::{ModelKind, TrialResult};
use crate::error::{Error, Result};
use crate::graph::GraphType;
use crate::sparse::NormMode;

pub const CSV_HEADER: &str =
    "trial_id,model,k1,k2,graph_type,norm,lr,dropout,weight_decay,hidden_dim,seed,mean_val,mean_test,std_test,diverged,seconds";

/// All trials of one sweep and the selected one.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub dataset: String,
    pub model: ModelKind,
    pub trials: Vec<TrialResult>,
    /// Index into `trials`.
    pub best: usize,
}

impl Report {
    /// Selects the completed trial with the highest mean validation accuracy;
    /// ties go to the lower trial id.
    pub fn new(dataset: impl Into<String>, model: ModelKind, mut trials: Vec<TrialResult>) -> Result<Self> {
        trials.sort_by_key(|t| t.trial_id);
        let mut best: Option<usize> = None;
        for (i, t) in trials.iter().enumerate() {
            if t.completed() && best.is_none_or(|b| t.mean_val > trials[b].mean_val) {
                best = Some(i);
            }
        }
        Ok(Report {
            dataset: dataset.into(),
            model,
            best: best.ok_or(Error::NoCompletedTrials)?,
            trials,
        })
    }

    pub fn best_trial(&self) -> &TrialResult {
        &self.trials[self.best]
    }
}

/// Percentages with two decimals: `"87.57 (5.44)"`.
pub fn format_pct(mean: f64, std: f64) -> String {
    format!("{:.2} ({:.2})", 100.0 * mean, 100.0 * std)
}

pub fn render_table(report: &Report) -> String {
    let best = report.best_trial();
    let diverged = report.trials.iter().filter(|t| !t.completed()).count();
    let mut out = String::new();
    let _ = writeln!(out, "dataset     {}", report.dataset);
    let _ = writeln!(out, "model       {}", report.model);
    let _ = writeln!(out, "trials      {} ({diverged} diverged or failed)", report.trials.len());
    let _ = writeln!(out, "best trial  {}", best.trial_id);
    let _ = writeln!(out, "val         {:.2}", 100.0 * best.mean_val);
    let _ = writeln!(out, "test        {}", format_pct(best.mean_test, best.std_test));
    let _ = writeln!(out, "config:");
    for line in best.config.to_text().lines() {
        let _ = writeln!(out, "  {line}");
    }
    out
}

/// One CSV row per trial, in trial-id order.
pub fn render_csv(report: &Report) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for t in &report.trials {
        out.push_str(&CsvRecord::from(t).to_line());
        out.push('\n');
    }
    out
}

/// A parsed report row. Fields that do not apply to the model are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub trial_id: usize,
    pub model: ModelKind,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub graph_type: Option<GraphType>,
    pub norm: Option<NormMode>,
    pub lr: f64,
    pub dropout: f64,
    pub weight_decay: f64,
    pub hidden_dim: Option<usize>,
    pub seed: u64,
    pub mean_val: f64,
    pub mean_test: f64,
    pub std_test: f64,
    pub diverged: bool,
    pub seconds: f64,
}

impl From<&TrialResult> for CsvRecord {
    fn from(t: &TrialResult) -> Self {
        let c = &t.config;
        let hlp = c.model.is_hlp();
        CsvRecord {
            trial_id: t.trial_id,
            model: c.model,
            k1: hlp.then_some(c.hlp.k1),
            k2: hlp.then_some(c.hlp.k2),
            graph_type: hlp.then_some(c.hlp.graph_type),
            norm: hlp.then_some(c.hlp.norm),
            lr: c.mlp.learning_rate,
            dropout: c.mlp.dropout,
            weight_decay: c.mlp.weight_decay,
            hidden_dim: c.mlp.hidden_dim,
            seed: c.mlp.seed,
            mean_val: t.mean_val,
            mean_test: t.mean_test,
            std_test: t.std_test,
            diverged: !t.completed(),
            seconds: t.seconds,
        }
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl CsvRecord {
    // f64 Display is the shortest string that parses back to the same bits.
    fn to_line(&self) -> String {
        [
            self.trial_id.to_string(),
            self.model.to_string(),
            opt(self.k1),
            opt(self.k2),
            opt(self.graph_type),
            opt(self.norm),
            self.lr.to_string(),
            self.dropout.to_string(),
            self.weight_decay.to_string(),
            opt(self.hidden_dim),
            self.seed.to_string(),
            self.mean_val.to_string(),
            self.mean_test.to_string(),
            self.std_test.to_string(),
            self.diverged.to_string(),
            self.seconds.to_string(),
        ]
        .join(",")
    }

    fn parse_line(line: &str, line_no: usize) -> Result<Self> {
        let err = |message: String| Error::Parse {
            path: "<report csv>".into(),
            line: line_no,
            message,
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 16 {
            return Err(err(format!("expected 16 fields, found {}", f.len())));
        }
        fn req<T: FromStr>(s: &str, name: &str) -> std::result::Result<T, String> {
            s.parse().map_err(|_| format!("bad {name} '{s}'"))
        }
        fn maybe<T: FromStr>(s: &str, name: &str) -> std::result::Result<Option<T>, String> {
            if s.is_empty() { Ok(None) } else { req(s, name).map(Some) }
        }
        let parsed = (|| -> std::result::Result<CsvRecord, String> {
            Ok(CsvRecord {
                trial_id: req(f[0], "trial_id")?,
                model: req(f[1], "model")?,
                k1: maybe(f[2], "k1")?,
                k2: maybe(f[3], "k2")?,
                graph_type: maybe(f[4], "graph_type")?,
                norm: maybe(f[5], "norm")?,
                lr: req(f[6], "lr")?,
                dropout: req(f[7], "dropout")?,
                weight_decay: req(f[8], "weight_decay")?,
                hidden_dim: maybe(f[9], "hidden_dim")?,
                seed: req(f[10], "seed")?,
                mean_val: req(f[11], "mean_val")?,
                mean_test: req(f[12], "mean_test")?,
                std_test: req(f[13], "std_test")?,
                diverged: req(f[14], "diverged")?,
                seconds: req(f[15], "seconds")?,
            })
        })();
        parsed.map_err(err)
    }
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                path: "<report csv>".into(),
                line: 1,
                message: "missing or unexpected header".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| CsvRecord::parse_line(l.trim(), i + 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{SplitResult, TrialConfig};

    fn trial(id: usize, val: f64, test: f64) -> TrialResult {
        TrialResult {
            trial_id: id,
            config: TrialConfig::new(ModelKind::HlpConcat),
            splits: vec![SplitResult {
                val_accuracy: val,
                test_accuracy: test,
                best_epoch: 1,
                diverged: false,
            }],
            mean_val: val,
            mean_test: test,
            std_test: 0.0,
            diverged: false,
            error: None,
            seconds: 0.25,
        }
    }

    #[test]
    fn percent_format() {
        assert_eq!(format_pct(0.8757, 0.0544), "87.57 (5.44)");
        assert_eq!(format_pct(0.5, 0.0), "50.00 (0.00)");
    }

    #[test]
    fn selection_by_validation_with_low_index_ties() {
        let r = Report::new("t", ModelKind::HlpConcat, vec![trial(0, 0.7, 0.9), trial(1, 0.8, 0.1), trial(2, 0.8, 0.5)]).unwrap();
        assert_eq!(r.best_trial().trial_id, 1);
        let mut bad = trial(3, 0.99, 0.99);
        bad.diverged = true;
        let r = Report::new("t", ModelKind::HlpConcat, vec![trial(0, 0.7, 0.9), bad.clone()]).unwrap();
        assert_eq!(r.best_trial().trial_id, 0);
        assert!(matches!(Report::new("t", ModelKind::Lr, vec![bad]), Err(Error::NoCompletedTrials)));
    }

    #[test]
    fn csv_round_trip() {
        let mut t = trial(4, 0.1 + 0.2, 1.0 / 3.0);
        t.std_test = 0.054_432_1;
        let mut lr = trial(5, 0.6, 0.55);
        lr.config = TrialConfig::new(ModelKind::Lr);
        let r = Report::new("t", ModelKind::HlpConcat, vec![t.clone(), lr.clone()]).unwrap();
        let parsed = parse_csv(&render_csv(&r)).unwrap();
        assert_eq!(parsed, vec![CsvRecord::from(&t), CsvRecord::from(&lr)]);
        assert_eq!(parsed[0].mean_val, 0.1 + 0.2);
        assert_eq!(parsed[1].k1, None);
        assert_eq!(parsed[1].hidden_dim, None);
        assert!(parse_csv("a,b\n").is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\n1,lr\n")).is_err());
    }

    #[test]
    fn table_shows_best_config() {
        let r = Report::new("texas", ModelKind::HlpConcat, vec![trial(0, 0.8, 0.8757)]).unwrap();
        let text = render_table(&r);
        assert!(text.contains("87.57 (0.00)"));
        assert!(text.contains("  k1=64"));
    }
}
