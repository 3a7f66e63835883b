use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use crate::classifier::MlpConfig;
use crate::error::{Error, Result};
use crate::models::HlpConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Lr,
    Mlp,
    HlpAgg,
    HlpConcat,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Lr, ModelKind::Mlp, ModelKind::HlpAgg, ModelKind::HlpConcat];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lr => "lr",
            ModelKind::Mlp => "mlp",
            ModelKind::HlpAgg => "hlp_agg",
            ModelKind::HlpConcat => "hlp_concat",
        }
    }

    pub fn is_hlp(self) -> bool {
        matches!(self, ModelKind::HlpAgg | ModelKind::HlpConcat)
    }

    /// Logistic regression has no hidden layer.
    pub fn has_hidden_layer(self) -> bool {
        self != ModelKind::Lr
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model '{s}' (expected lr, mlp, hlp_agg or hlp_concat)")))
    }
}

/// Everything one trial needs. Serializes to the flat key=value format.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub model: ModelKind,
    pub hlp: HlpConfig,
    /// `mlp.seed` also seeds the TSVDs.
    pub mlp: MlpConfig,
    /// Standardize HLP embedding columns before the classifier.
    pub standardize: bool,
}

impl TrialConfig {
    pub fn new(model: ModelKind) -> Self {
        let mlp = MlpConfig {
            hidden_dim: if model.has_hidden_layer() { Some(64) } else { None },
            ..MlpConfig::default()
        };
        TrialConfig {
            model,
            hlp: HlpConfig::new(64, 64),
            mlp,
            standardize: true,
        }
    }

    pub fn seed(&self) -> u64 {
        self.mlp.seed
    }

    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        self.mlp.validate()?;
        if self.model.has_hidden_layer() && self.mlp.hidden_dim.is_none() {
            return Err(Error::InvalidParameter(format!("model {} needs hidden_dim", self.model)));
        }
        if self.model == ModelKind::Lr && self.mlp.hidden_dim.is_some() {
            return Err(Error::InvalidParameter("model lr takes hidden_dim=none".into()));
        }
        if self.model.is_hlp() {
            self.hlp.validate(n, d)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let hidden = self.mlp.hidden_dim.map_or("none".to_string(), |h| h.to_string());
        let pairs: [(&str, String); 19] = [
            ("model", self.model.to_string()),
            ("k1", self.hlp.k1.to_string()),
            ("k2", self.hlp.k2.to_string()),
            ("graph_type", self.hlp.graph_type.to_string()),
            ("norm", self.hlp.norm.to_string()),
            ("graph_scaling", self.hlp.graph_scaling.to_string()),
            ("feature_scaling", self.hlp.feature_scaling.to_string()),
            ("directed_factors", self.hlp.directed_factors.to_string()),
            ("learning_rate", self.mlp.learning_rate.to_string()),
            ("dropout", self.mlp.dropout.to_string()),
            ("input_dropout", self.mlp.input_dropout.to_string()),
            ("weight_decay", self.mlp.weight_decay.to_string()),
            ("hidden_dim", hidden),
            ("lr_decay_factor", self.mlp.lr_decay_factor.to_string()),
            ("lr_decay_every", self.mlp.lr_decay_every.to_string()),
            ("max_epochs", self.mlp.max_epochs.to_string()),
            ("patience", self.mlp.patience.to_string()),
            ("seed", self.mlp.seed.to_string()),
            ("standardize", self.standardize.to_string()),
        ];
        for (k, v) in pairs {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// Parses key=value lines. Keys missing from the text keep the defaults
    /// for `model` (from the text, else `fallback_model`).
    pub fn parse(text: &str, fallback_model: Option<ModelKind>) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: "<config>".into(),
            line,
            message,
        };
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(idx + 1, format!("expected key=value, got '{line}'")))?;
            pairs.push((idx + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let model = match pairs.iter().find(|(_, k, _)| k == "model") {
            Some((line, _, v)) => v.parse().map_err(|e: Error| parse_err(*line, e.to_string()))?,
            None => fallback_model.ok_or_else(|| parse_err(0, "no model given".into()))?,
        };
        let mut cfg = TrialConfig::new(model);
        for (line, k, v) in &pairs {
            cfg.set(k, v).map_err(|e| parse_err(*line, e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>, fallback_model: Option<ModelKind>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TrialConfig::parse(&text, fallback_model).map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::parse(path, line, message),
            other => other,
        })
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::InvalidParameter(format!("bad value '{v}' for {key}")))
        }
        match key {
            "model" => {}
            "k1" => self.hlp.k1 = num(key, value)?,
            "k2" => self.hlp.k2 = num(key, value)?,
            "graph_type" => self.hlp.graph_type = value.parse()?,
            "norm" => self.hlp.norm = value.parse()?,
            "graph_scaling" => self.hlp.graph_scaling = value.parse()?,
            "feature_scaling" => self.hlp.feature_scaling = value.parse()?,
            "directed_factors" => self.hlp.directed_factors = value.parse()?,
            "learning_rate" | "lr" => self.mlp.learning_rate = num(key, value)?,
            "dropout" => self.mlp.dropout = num(key, value)?,
            "input_dropout" => self.mlp.input_dropout = num(key, value)?,
            "weight_decay" => self.mlp.weight_decay = num(key, value)?,
            "hidden_dim" => {
                self.mlp.hidden_dim = match value {
                    "none" | "" => None,
                    v => Some(num(key, v)?),
                }
            }
            "lr_decay_factor" => self.mlp.lr_decay_factor = num(key, value)?,
            "lr_decay_every" => self.mlp.lr_decay_every = num(key, value)?,
            "max_epochs" => self.mlp.max_epochs = num(key, value)?,
            "patience" => self.mlp.patience = num(key, value)?,
            "seed" => self.mlp.seed = num(key, value)?,
            "standardize" => self.standardize = num(key, value)?,
            _ => return Err(Error::InvalidParameter(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }
}
