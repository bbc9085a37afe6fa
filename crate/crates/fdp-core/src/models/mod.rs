//! From-scratch binary classifiers used as downstream evaluators.
//!
//! Four model families: logistic regression (`LR`), the linear SVM from
//! the selection module (`SVM`), a one-hidden-layer backprop network
//! (`BP`), and a Gini decision tree (`DT`). Hyperparameters are keyed
//! values with documented defaults; unknown keys are rejected so config
//! typos fail loudly.

mod logistic;
mod mlp;
mod tree;

pub use logistic::LrModel;
pub use mlp::BpModel;
pub use tree::DtModel;

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset::Label;
use crate::linalg::Matrix;
use crate::selection::{train_linear_svm, SelectionError, SvmModel};

pub const LR_DEFAULT_LEARNING_RATE: f64 = 0.1;
pub const LR_DEFAULT_L2: f64 = 1e-3;
pub const LR_DEFAULT_EPOCHS: usize = 500;
pub const BP_DEFAULT_HIDDEN: usize = 16;
pub const BP_DEFAULT_LEARNING_RATE: f64 = 0.05;
pub const BP_DEFAULT_EPOCHS: usize = 2000;
pub const SVM_DEFAULT_C: f64 = 1.0;
pub const DT_DEFAULT_MAX_DEPTH: usize = 5;
pub const DT_DEFAULT_MIN_LEAF: usize = 2;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{kind} does not accept hyperparameter {key:?}")]
    UnknownHyperparameter { kind: ClassifierKind, key: String },
    #[error("invalid value {value} for hyperparameter {key:?}: {reason}")]
    InvalidHyperparameter { key: String, value: f64, reason: String },
    #[error("unknown classifier kind {0:?}")]
    UnknownKind(String),
    #[error("training data contains a single class")]
    SingleClass,
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Divergence { epoch: usize, loss: f64 },
    #[error("feature count mismatch: model has {expected}, input has {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("label count {labels} does not match sample count {samples}")]
    LabelMismatch { labels: usize, samples: usize },
    #[error("gradient check supports LR and BP only, not {0}")]
    GradientCheckUnsupported(ClassifierKind),
    #[error(transparent)]
    Svm(#[from] SelectionError),
}

/// Supported classifier families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassifierKind {
    Lr,
    Svm,
    Bp,
    Dt,
}

impl ClassifierKind {
    pub fn parse(s: &str) -> Result<Self, ModelError> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LR" => Ok(Self::Lr),
            "SVM" => Ok(Self::Svm),
            "BP" => Ok(Self::Bp),
            "DT" => Ok(Self::Dt),
            other => Err(ModelError::UnknownKind(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Lr => "LR",
            Self::Svm => "SVM",
            Self::Bp => "BP",
            Self::Dt => "DT",
        }
    }

    fn allowed_keys(self) -> &'static [&'static str] {
        match self {
            Self::Lr => &["learning_rate", "l2", "epochs", "seed"],
            Self::Svm => &["c", "seed"],
            Self::Bp => &["hidden", "learning_rate", "epochs", "seed"],
            Self::Dt => &["max_depth", "min_leaf", "seed"],
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A classifier kind plus keyed hyperparameter overrides. Every key has a
/// documented default; keys a kind does not define are rejected by
/// [`ClassifierSpec::set`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    params: BTreeMap<String, f64>,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        Self { kind, params: BTreeMap::new() }
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<(), ModelError> {
        if !self.kind.allowed_keys().contains(&key) {
            return Err(ModelError::UnknownHyperparameter {
                kind: self.kind,
                key: key.to_string(),
            });
        }
        if !value.is_finite() {
            return Err(ModelError::InvalidHyperparameter {
                key: key.to_string(),
                value,
                reason: "must be finite".to_string(),
            });
        }
        self.params.insert(key.to_string(), value);
        Ok(())
    }

    pub fn with(mut self, key: &str, value: f64) -> Result<Self, ModelError> {
        self.set(key, value)?;
        Ok(self)
    }

    /// Copy of the spec with the given seed (all kinds accept one).
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut copy = self.clone();
        copy.params.insert("seed".to_string(), seed as f64);
        copy
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    /// Effective (key, value) pairs with defaults expanded, sorted by key.
    pub fn effective_params(&self) -> Vec<(String, f64)> {
        let mut out: BTreeMap<String, f64> = BTreeMap::new();
        for key in self.kind.allowed_keys() {
            out.insert((*key).to_string(), self.default_for(key));
        }
        for (k, v) in &self.params {
            out.insert(k.clone(), *v);
        }
        out.into_iter().collect()
    }

    fn default_for(&self, key: &str) -> f64 {
        match (self.kind, key) {
            (ClassifierKind::Lr, "learning_rate") => LR_DEFAULT_LEARNING_RATE,
            (ClassifierKind::Lr, "l2") => LR_DEFAULT_L2,
            (ClassifierKind::Lr, "epochs") => LR_DEFAULT_EPOCHS as f64,
            (ClassifierKind::Bp, "hidden") => BP_DEFAULT_HIDDEN as f64,
            (ClassifierKind::Bp, "learning_rate") => BP_DEFAULT_LEARNING_RATE,
            (ClassifierKind::Bp, "epochs") => BP_DEFAULT_EPOCHS as f64,
            (ClassifierKind::Svm, "c") => SVM_DEFAULT_C,
            (ClassifierKind::Dt, "max_depth") => DT_DEFAULT_MAX_DEPTH as f64,
            (ClassifierKind::Dt, "min_leaf") => DT_DEFAULT_MIN_LEAF as f64,
            (_, "seed") => DEFAULT_SEED as f64,
            _ => unreachable!("key not in allowed set"),
        }
    }

    fn value(&self, key: &str) -> f64 {
        self.params.get(key).copied().unwrap_or_else(|| self.default_for(key))
    }

    fn positive(&self, key: &str) -> Result<f64, ModelError> {
        let v = self.value(key);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(ModelError::InvalidHyperparameter {
                key: key.to_string(),
                value: v,
                reason: "must be positive".to_string(),
            })
        }
    }

    fn count(&self, key: &str, minimum: usize) -> Result<usize, ModelError> {
        let v = self.value(key);
        if v.fract() != 0.0 || v < minimum as f64 {
            return Err(ModelError::InvalidHyperparameter {
                key: key.to_string(),
                value: v,
                reason: format!("must be an integer of at least {minimum}"),
            });
        }
        Ok(v as usize)
    }

    pub fn seed(&self) -> u64 {
        self.value("seed") as u64
    }
}

/// Metadata recorded for every training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMeta {
    pub epochs_run: usize,
    pub final_loss: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
enum ModelParams {
    Lr(LrModel),
    Svm(SvmModel),
    Bp(BpModel),
    Dt(DtModel),
}

/// A trained classifier; immutable once built, prediction is read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub kind: ClassifierKind,
    pub meta: TrainingMeta,
    n_features: usize,
    params: ModelParams,
}

fn check_classes(y: &[Label]) -> Result<(), ModelError> {
    let pos = y.iter().any(|l| l.is_positive());
    let neg = y.iter().any(|l| !l.is_positive());
    if pos && neg {
        Ok(())
    } else {
        Err(ModelError::SingleClass)
    }
}

/// Trains the classifier described by `spec` on fully-observed inputs with
/// `{+1, -1}` labels. Deterministic for a fixed (spec, data, seed).
pub fn train(spec: &ClassifierSpec, x: &Matrix, y: &[Label]) -> Result<TrainedModel, ModelError> {
    if x.rows() != y.len() {
        return Err(ModelError::LabelMismatch { labels: y.len(), samples: x.rows() });
    }
    check_classes(y)?;
    let seed = spec.seed();
    let (params, meta) = match spec.kind {
        ClassifierKind::Lr => {
            let p = logistic::LrParams {
                learning_rate: spec.positive("learning_rate")?,
                l2: {
                    let v = spec.value("l2");
                    if v < 0.0 {
                        return Err(ModelError::InvalidHyperparameter {
                            key: "l2".to_string(),
                            value: v,
                            reason: "must be nonnegative".to_string(),
                        });
                    }
                    v
                },
                epochs: spec.count("epochs", 1)?,
            };
            let (model, epochs_run, final_loss) = logistic::train_lr(x, y, &p)?;
            (ModelParams::Lr(model), TrainingMeta { epochs_run, final_loss, seed })
        }
        ClassifierKind::Svm => {
            let c = spec.positive("c")?;
            let model = train_linear_svm(x, y, c)?;
            let final_loss = model.primal_objective(x, y);
            (ModelParams::Svm(model), TrainingMeta { epochs_run: 0, final_loss, seed })
        }
        ClassifierKind::Bp => {
            let p = mlp::BpParams {
                hidden: spec.count("hidden", 1)?,
                learning_rate: spec.positive("learning_rate")?,
                epochs: spec.count("epochs", 1)?,
                seed,
            };
            let (model, epochs_run, final_loss) = mlp::train_bp(x, y, &p)?;
            (ModelParams::Bp(model), TrainingMeta { epochs_run, final_loss, seed })
        }
        ClassifierKind::Dt => {
            let p = tree::DtParams {
                max_depth: spec.count("max_depth", 0)?,
                min_leaf: spec.count("min_leaf", 1)?,
            };
            let model = tree::train_dt(x, y, &p);
            let final_loss = {
                let preds = model.predict_batch(x);
                let wrong = preds.iter().zip(y).filter(|(p, t)| p != t).count();
                wrong as f64 / y.len() as f64
            };
            (ModelParams::Dt(model), TrainingMeta { epochs_run: 0, final_loss, seed })
        }
    };
    Ok(TrainedModel { kind: spec.kind, meta, n_features: x.cols(), params })
}

/// Deterministic labels for new inputs. Margin and logit scores threshold
/// at 0, probability outputs at 0.5; exact threshold ties go positive.
pub fn predict(model: &TrainedModel, x: &Matrix) -> Result<Vec<Label>, ModelError> {
    if x.cols() != model.n_features {
        return Err(ModelError::ShapeMismatch { expected: model.n_features, actual: x.cols() });
    }
    let labels = match &model.params {
        ModelParams::Lr(m) => (0..x.rows())
            .map(|i| Label::from_score(m.logit(x.row(i)), 0.0))
            .collect(),
        ModelParams::Svm(m) => (0..x.rows())
            .map(|i| Label::from_score(m.decision(x.row(i)), 0.0))
            .collect(),
        ModelParams::Bp(m) => (0..x.rows())
            .map(|i| Label::from_score(m.output(x.row(i)), 0.5))
            .collect(),
        ModelParams::Dt(m) => m.predict_batch(x),
    };
    Ok(labels)
}

/// Compares analytic gradients against central finite differences at a
/// seeded random parameter point and returns the maximum relative
/// deviation `|a - f| / max(1, |a|, |f|)` across parameters.
pub fn gradient_check(
    spec: &ClassifierSpec,
    x: &Matrix,
    y: &[Label],
    epsilon: f64,
) -> Result<f64, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed());
    match spec.kind {
        ClassifierKind::Lr => {
            let l2 = spec.value("l2");
            let theta: Vec<f64> = (0..x.cols() + 1).map(|_| rng.gen_range(-0.5..0.5)).collect();
            Ok(max_gradient_deviation(
                &theta,
                epsilon,
                |t| logistic::loss_and_gradient(t, x, y, l2),
            ))
        }
        ClassifierKind::Bp => {
            let hidden = spec.count("hidden", 1)?;
            let n_params = hidden * x.cols() + hidden + hidden + 1;
            let theta: Vec<f64> = (0..n_params).map(|_| rng.gen_range(-0.5..0.5)).collect();
            Ok(max_gradient_deviation(
                &theta,
                epsilon,
                |t| mlp::loss_and_gradient(t, hidden, x, y),
            ))
        }
        other => Err(ModelError::GradientCheckUnsupported(other)),
    }
}

pub(crate) fn max_gradient_deviation<F>(theta: &[f64], epsilon: f64, eval: F) -> f64
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let (_, analytic) = eval(theta);
    let mut worst = 0.0f64;
    let mut probe = theta.to_vec();
    for i in 0..theta.len() {
        probe[i] = theta[i] + epsilon;
        let (up, _) = eval(&probe);
        probe[i] = theta[i] - epsilon;
        let (down, _) = eval(&probe);
        probe[i] = theta[i];
        let fd = (up - down) / (2.0 * epsilon);
        let deviation = (analytic[i] - fd).abs() / analytic[i].abs().max(fd.abs()).max(1.0);
        worst = worst.max(deviation);
    }
    worst
}

impl TrainedModel {
    /// Writes the learned parameters in a versioned flat text format for
    /// inspection. Not a stability promise.
    pub fn write_text(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "fdp-model v1")?;
        writeln!(w, "kind: {}", self.kind)?;
        writeln!(w, "features: {}", self.n_features)?;
        writeln!(w, "seed: {}", self.meta.seed)?;
        writeln!(w, "epochs_run: {}", self.meta.epochs_run)?;
        writeln!(w, "final_loss: {}", self.meta.final_loss)?;
        match &self.params {
            ModelParams::Lr(m) => {
                writeln!(w, "weights: {}", join(&m.weights))?;
                writeln!(w, "bias: {}", m.bias)?;
            }
            ModelParams::Svm(m) => {
                writeln!(w, "weights: {}", join(&m.weights))?;
                writeln!(w, "bias: {}", m.bias)?;
                writeln!(w, "alphas: {}", join(&m.alphas))?;
                writeln!(w, "c: {}", m.regularization)?;
            }
            ModelParams::Bp(m) => m.write_text(w)?,
            ModelParams::Dt(m) => m.write_text(w)?,
        }
        Ok(())
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}
