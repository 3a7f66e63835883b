//! Logistic regression and one-hidden-layer MLP trained full-batch with Adam,
//! L2 weight decay, step learning-rate decay and validation early stopping.

mod adam;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use adam::AdamState;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Split;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    /// `None` trains a logistic regression.
    pub hidden_dim: Option<usize>,
    pub dropout: f64,
    /// Whether dropout also hits the input features (it always hits the
    /// hidden layer).
    pub input_dropout: bool,
    pub weight_decay: f64,
    pub learning_rate: f64,
    pub lr_decay_factor: f64,
    pub lr_decay_every: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_dim: Some(64),
            dropout: 0.5,
            input_dropout: true,
            weight_decay: 5e-4,
            learning_rate: 0.01,
            lr_decay_factor: 0.99,
            lr_decay_every: 50,
            max_epochs: 300,
            patience: 30,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidParameter(format!("dropout {} not in [0, 1)", self.dropout)));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter("learning_rate must be positive".into()));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::InvalidParameter("weight_decay must be non-negative".into()));
        }
        if self.hidden_dim == Some(0) {
            return Err(Error::InvalidParameter("hidden_dim must be positive".into()));
        }
        if self.lr_decay_every == 0 {
            return Err(Error::InvalidParameter("lr_decay_every must be positive".into()));
        }
        Ok(())
    }
}

/// Dense layer `y = x W + b` with `W` stored `in x out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
}

impl Layer {
    fn glorot(fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Layer {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let values = (0..fan_in * fan_out)
            .map(|_| rng.random_range(-limit..=limit))
            .collect();
        Layer {
            weights: DenseMatrix::from_row_major(fan_in, fan_out, values).expect("finite init"),
            bias: vec![0.0; fan_out],
        }
    }

    fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        let mut out = x.matmul(&self.weights).expect("layer input width checked by caller");
        let width = self.bias.len();
        for row in out.values_mut().chunks_mut(width) {
            for (o, b) in row.iter_mut().zip(&self.bias) {
                *o += b;
            }
        }
        out
    }
}

/// One layer (logistic regression) or two (MLP with ReLU hidden layer).
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub layers: Vec<Layer>,
}

impl Model {
    /// Glorot-uniform weights, zero biases.
    pub fn init(input_dim: usize, hidden_dim: Option<usize>, num_classes: usize, seed: u64) -> Model {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = match hidden_dim {
            Some(h) => vec![
                Layer::glorot(input_dim, h, &mut rng),
                Layer::glorot(h, num_classes, &mut rng),
            ],
            None => vec![Layer::glorot(input_dim, num_classes, &mut rng)],
        };
        Model { layers }
    }

    pub fn zeros(input_dim: usize, hidden_dim: Option<usize>, num_classes: usize) -> Model {
        let layer = |i, o| Layer {
            weights: DenseMatrix::zeros(i, o),
            bias: vec![0.0; o],
        };
        let layers = match hidden_dim {
            Some(h) => vec![layer(input_dim, h), layer(h, num_classes)],
            None => vec![layer(input_dim, num_classes)],
        };
        Model { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.n_rows()
    }

    pub fn num_classes(&self) -> usize {
        self.layers.last().expect("at least one layer").bias.len()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }

    fn block_sizes(&self) -> Vec<usize> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.values().len(), l.bias.len()])
            .collect()
    }

    /// Parameter blocks in `[W0, b0, W1, b1]` order.
    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.values_mut(), &mut l.bias[..]])
            .collect()
    }

    pub fn blocks(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.values(), &l.bias[..]])
            .collect()
    }

    fn check_input(&self, x: &DenseMatrix) -> Result<()> {
        if x.n_cols() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} inputs, got {}",
                self.input_dim(),
                x.n_cols()
            )));
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("classifier input".into()));
        }
        Ok(())
    }
}

/// Gradient blocks aligned with [`Model::blocks`].
pub type Gradients = Vec<Vec<f64>>;

struct Dropout {
    rate: f64,
    input: bool,
    rng: ChaCha8Rng,
}

impl Dropout {
    /// Inverted dropout mask: 0 or `1 / (1 - rate)`.
    fn mask(&mut self, len: usize) -> Vec<f64> {
        let keep = 1.0 / (1.0 - self.rate);
        (0..len)
            .map(|_| if self.rng.random::<f64>() < self.rate { 0.0 } else { keep })
            .collect()
    }
}

struct Pass {
    input: DenseMatrix,
    /// Hidden pre-activation, and the post-ReLU, post-dropout activation.
    hidden: Option<(DenseMatrix, DenseMatrix, Option<Vec<f64>>)>,
    probs: DenseMatrix,
}

fn apply_mask(m: &mut DenseMatrix, mask: &[f64]) {
    for (x, k) in m.values_mut().iter_mut().zip(mask) {
        *x *= k;
    }
}

fn softmax_rows(logits: &mut DenseMatrix) {
    let width = logits.n_cols();
    for row in logits.values_mut().chunks_mut(width.max(1)) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for x in row.iter_mut() {
            *x = (*x - max).exp();
            sum += *x;
        }
        for x in row.iter_mut() {
            *x /= sum;
        }
    }
}

fn run(model: &Model, x: &DenseMatrix, mut dropout: Option<Dropout>) -> Pass {
    let mut input = x.clone();
    if let Some(d) = dropout.as_mut().filter(|d| d.input && d.rate > 0.0) {
        let mask = d.mask(input.values().len());
        apply_mask(&mut input, &mask);
    }
    let (hidden, last_input) = if model.layers.len() == 2 {
        let pre = model.layers[0].apply(&input);
        let mut act = pre.clone();
        act.values_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        let mask = match dropout.as_mut() {
            Some(d) if d.rate > 0.0 => {
                let mask = d.mask(act.values().len());
                apply_mask(&mut act, &mask);
                Some(mask)
            }
            _ => None,
        };
        let out_in = act.clone();
        (Some((pre, act, mask)), out_in)
    } else {
        (None, input.clone())
    };
    let mut probs = model.layers.last().expect("non-empty model").apply(&last_input);
    softmax_rows(&mut probs);
    Pass {
        input,
        hidden,
        probs,
    }
}

/// Class probabilities for every row of `features`. With `dropout_active`,
/// masks are drawn from `seed`.
pub fn forward(model: &Model, features: &DenseMatrix, dropout_active: bool, config: &MlpConfig, seed: u64) -> Result<DenseMatrix> {
    model.check_input(features)?;
    let dropout = dropout_active.then(|| Dropout {
        rate: config.dropout,
        input: config.input_dropout,
        rng: ChaCha8Rng::seed_from_u64(seed),
    });
    Ok(run(model, features, dropout).probs)
}

/// Input of the output layer for every node (hidden ReLU activations for an
/// MLP, the raw features for logistic regression). Dropout off.
pub fn penultimate(model: &Model, features: &DenseMatrix) -> Result<DenseMatrix> {
    model.check_input(features)?;
    Ok(match run(model, features, None).hidden {
        Some((_, act, _)) => act,
        None => features.clone(),
    })
}

fn cross_entropy(probs: &DenseMatrix, labels: &[usize]) -> f64 {
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| -probs.get(i, y).max(f64::MIN_POSITIVE).ln())
        .sum();
    total / labels.len() as f64
}

fn l2_penalty(model: &Model, weight_decay: f64) -> f64 {
    0.5 * weight_decay
        * model
            .layers
            .iter()
            .map(|l| l.weights.values().iter().map(|w| w * w).sum::<f64>())
            .sum::<f64>()
}

fn column_sums(m: &DenseMatrix) -> Vec<f64> {
    let mut s = vec![0.0; m.n_cols()];
    for i in 0..m.n_rows() {
        for (a, x) in s.iter_mut().zip(m.row(i)) {
            *a += x;
        }
    }
    s
}

/// Loss and exact gradients over pre-selected rows.
fn loss_and_grad_rows(
    model: &Model,
    x: &DenseMatrix,
    labels: &[usize],
    config: &MlpConfig,
    dropout: Option<Dropout>,
) -> (f64, Gradients) {
    let pass = run(model, x, dropout);
    let b = labels.len() as f64;
    let loss = cross_entropy(&pass.probs, labels) + l2_penalty(model, config.weight_decay);

    let mut delta = pass.probs.clone();
    for (i, &y) in labels.iter().enumerate() {
        delta.set(i, y, delta.get(i, y) - 1.0);
    }
    delta.values_mut().iter_mut().for_each(|d| *d /= b);

    let decayed = |w: &DenseMatrix, g: DenseMatrix| -> Vec<f64> {
        let mut g = g.into_values();
        for (gi, wi) in g.iter_mut().zip(w.values()) {
            *gi += config.weight_decay * wi;
        }
        g
    };

    let last = model.layers.last().expect("non-empty model");
    match &pass.hidden {
        Some((pre, act, mask)) => {
            let dw2 = act.t_matmul(&delta).expect("shapes from forward pass");
            let db2 = column_sums(&delta);
            let mut dh = delta.matmul_t(&last.weights).expect("shapes from forward pass");
            if let Some(mask) = mask {
                apply_mask(&mut dh, mask);
            }
            for (g, z) in dh.values_mut().iter_mut().zip(pre.values()) {
                if *z <= 0.0 {
                    *g = 0.0;
                }
            }
            let dw1 = pass.input.t_matmul(&dh).expect("shapes from forward pass");
            let db1 = column_sums(&dh);
            (
                loss,
                vec![
                    decayed(&model.layers[0].weights, dw1),
                    db1,
                    decayed(&last.weights, dw2),
                    db2,
                ],
            )
        }
        None => {
            let dw = pass.input.t_matmul(&delta).expect("shapes from forward pass");
            let db = column_sums(&delta);
            (loss, vec![decayed(&last.weights, dw), db])
        }
    }
}

/// Mean softmax cross-entropy over `mask` plus `weight_decay/2 · Σ‖W‖²`
/// (biases excluded), with analytic gradients. Dropout off.
pub fn loss_and_grad(
    model: &Model,
    features: &DenseMatrix,
    labels: &[usize],
    mask: &[usize],
    config: &MlpConfig,
) -> Result<(f64, Gradients)> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    model.check_input(features)?;
    let x = features.select_rows(mask);
    let y: Vec<usize> = mask.iter().map(|&i| labels[i]).collect();
    Ok(loss_and_grad_rows(model, &x, &y, config, None))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitPart {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub part: SplitPart,
    pub accuracy: f64,
    pub loss: f64,
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &x) in row.iter().enumerate() {
        if x > row[best] {
            best = j;
        }
    }
    best
}

fn score(model: &Model, x: &DenseMatrix, labels: &[usize], part: SplitPart) -> Metrics {
    let probs = run(model, x, None).probs;
    let correct = labels
        .iter()
        .enumerate()
        .filter(|&(i, &y)| argmax(probs.row(i)) == y)
        .count();
    Metrics {
        part,
        accuracy: correct as f64 / labels.len() as f64,
        loss: cross_entropy(&probs, labels),
    }
}

/// Argmax accuracy and mean cross-entropy over `mask`, dropout off.
pub fn evaluate(model: &Model, features: &DenseMatrix, labels: &[usize], mask: &[usize], part: SplitPart) -> Result<Metrics> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    model.check_input(features)?;
    let x = features.select_rows(mask);
    let y: Vec<usize> = mask.iter().map(|&i| labels[i]).collect();
    Ok(score(model, &x, &y, part))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Best-validation checkpoint.
    pub model: Model,
    pub train: Metrics,
    pub val: Metrics,
    pub test: Metrics,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub epochs_run: usize,
    pub val_history: Vec<f64>,
    /// Training loss of each epoch, before that epoch's update.
    pub loss_history: Vec<f64>,
    /// A non-finite loss or parameter appeared; all metrics are zeroed.
    pub diverged: bool,
}

/// Full-batch training on `split.train` with early stopping on validation
/// accuracy. Returns the best-validation checkpoint.
pub fn train(
    features: &DenseMatrix,
    labels: &[usize],
    num_classes: usize,
    split: &Split,
    config: &MlpConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if split.train.is_empty() || split.val.is_empty() || split.test.is_empty() {
        return Err(Error::EmptyMask);
    }
    if let Some(&i) = split.train.iter().chain(&split.val).chain(&split.test).find(|&&i| i >= features.n_rows()) {
        return Err(Error::Split(format!("node {i} outside {} feature rows", features.n_rows())));
    }
    if !features.is_finite() {
        return Err(Error::NonFinite("classifier input".into()));
    }
    let gather = |ids: &[usize]| -> (DenseMatrix, Vec<usize>) {
        (features.select_rows(ids), ids.iter().map(|&i| labels[i]).collect())
    };
    let (x_train, y_train) = gather(&split.train);
    let (x_val, y_val) = gather(&split.val);
    let (x_test, y_test) = gather(&split.test);

    let mut model = Model::init(features.n_cols(), config.hidden_dim, num_classes, config.seed);
    let mut adam = AdamState::new(&model.block_sizes());
    let mut lr = config.learning_rate;
    let mut best: Option<(Model, usize, f64)> = None;
    let mut val_history = Vec::new();
    let mut loss_history = Vec::new();
    let mut diverged = false;
    let mut epochs_run = 0;

    for epoch in 1..=config.max_epochs {
        epochs_run = epoch;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(epoch as u64);
        let dropout = Dropout {
            rate: config.dropout,
            input: config.input_dropout,
            rng,
        };
        let (loss, grads) = loss_and_grad_rows(&model, &x_train, &y_train, config, Some(dropout));
        loss_history.push(loss);
        if !loss.is_finite() {
            diverged = true;
            break;
        }
        adam.step(&mut model.blocks_mut(), &grads, lr);
        if !model.is_finite() {
            diverged = true;
            break;
        }
        let val_acc = score(&model, &x_val, &y_val, SplitPart::Val).accuracy;
        val_history.push(val_acc);
        match &best {
            Some((_, _, acc)) if val_acc <= *acc => {
                let (_, best_epoch, _) = best.as_ref().expect("matched Some");
                if epoch - best_epoch > config.patience {
                    break;
                }
            }
            _ => best = Some((model.clone(), epoch, val_acc)),
        }
        if epoch % config.lr_decay_every == 0 {
            lr *= config.lr_decay_factor;
        }
    }

    let zero = |part| Metrics {
        part,
        accuracy: 0.0,
        loss: f64::NAN,
    };
    match best {
        Some((best_model, best_epoch, best_val)) if !diverged => Ok(TrainOutcome {
            train: score(&best_model, &x_train, &y_train, SplitPart::Train),
            val: score(&best_model, &x_val, &y_val, SplitPart::Val),
            test: score(&best_model, &x_test, &y_test, SplitPart::Test),
            model: best_model,
            best_epoch,
            best_val_accuracy: best_val,
            epochs_run,
            val_history,
            loss_history,
            diverged: false,
        }),
        _ => Ok(TrainOutcome {
            model,
            train: zero(SplitPart::Train),
            val: zero(SplitPart::Val),
            test: zero(SplitPart::Test),
            best_epoch: 0,
            best_val_accuracy: 0.0,
            epochs_run,
            val_history,
            loss_history,
            diverged: true,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_reg() -> MlpConfig {
        MlpConfig {
            dropout: 0.0,
            weight_decay: 0.0,
            ..MlpConfig::default()
        }
    }

    #[test]
    fn zero_weights_give_uniform_probabilities() {
        let model = Model::zeros(3, Some(4), 5);
        let x = DenseMatrix::from_rows(&[vec![1.0, -2.0, 3.0], vec![0.5, 0.5, 0.5]]).unwrap();
        let p = forward(&model, &x, false, &no_reg(), 0).unwrap();
        assert!(p.values().iter().all(|v| (v - 0.2).abs() < 1e-15));
        let (loss, _) = loss_and_grad(&model, &x, &[0, 3], &[0, 1], &no_reg()).unwrap();
        assert!((loss - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn identity_logistic_regression_on_one_hot() {
        let mut model = Model::zeros(3, None, 3);
        model.layers[0].weights = DenseMatrix::identity(3);
        let x = DenseMatrix::identity(3);
        let m = evaluate(&model, &x, &[0, 1, 2], &[0, 1, 2], SplitPart::Test).unwrap();
        assert_eq!(m.accuracy, 1.0);
    }

    #[test]
    fn weight_decay_shifts_weight_gradients_only() {
        let model = Model::init(4, Some(3), 2, 5);
        let x = DenseMatrix::from_rows(&[vec![1.0, 0.0, -1.0, 2.0], vec![0.3, 0.2, 0.1, 0.0]]).unwrap();
        let base = no_reg();
        let wd = MlpConfig { weight_decay: 0.1, ..no_reg() };
        let (_, g0) = loss_and_grad(&model, &x, &[0, 1], &[0, 1], &base).unwrap();
        let (_, g1) = loss_and_grad(&model, &x, &[0, 1], &[0, 1], &wd).unwrap();
        for (b, params) in model.blocks().iter().enumerate() {
            for i in 0..params.len() {
                let expected = if b % 2 == 0 { 0.1 * params[i] } else { 0.0 };
                assert!((g1[b][i] - g0[b][i] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn empty_mask_and_bad_input() {
        let model = Model::zeros(2, None, 2);
        let x = DenseMatrix::identity(2);
        assert!(matches!(loss_and_grad(&model, &x, &[0, 1], &[], &no_reg()), Err(Error::EmptyMask)));
        assert!(matches!(evaluate(&model, &x, &[0, 1], &[], SplitPart::Val), Err(Error::EmptyMask)));
        let wide = DenseMatrix::identity(3);
        assert!(forward(&model, &wide, false, &no_reg(), 0).is_err());
    }

    #[test]
    fn evaluate_constant_predictor_on_balanced_mask() {
        let mut model = Model::zeros(1, None, 5);
        model.layers[0].bias[2] = 1.0;
        let x = DenseMatrix::zeros(10, 1);
        let labels: Vec<usize> = (0..10).map(|i| i % 5).collect();
        let all: Vec<usize> = (0..10).collect();
        assert_eq!(evaluate(&model, &x, &labels, &all, SplitPart::Test).unwrap().accuracy, 0.2);
    }

    #[test]
    fn config_validation() {
        assert!(MlpConfig { dropout: 1.0, ..MlpConfig::default() }.validate().is_err());
        assert!(MlpConfig { learning_rate: 0.0, ..MlpConfig::default() }.validate().is_err());
        assert!(MlpConfig::default().validate().is_ok());
    }
}
