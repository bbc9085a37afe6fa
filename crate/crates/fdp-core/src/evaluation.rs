//! Confusion matrix, the four evaluation metrics, and the repeated
//! stratified-holdout experiment harness.
//!
//! Metrics that come out 0/0 are reported as undefined rather than zero;
//! cell averages exclude undefined runs and carry the count of defined
//! ones so nothing is silently biased.

use thiserror::Error;

use crate::dataset::{DataError, Dataset, Label};
use crate::models::{self, ClassifierSpec, ModelError};
use crate::preprocess::{apply_minmax, fit_minmax, split, PreprocessError};
use crate::selection::SelectionError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction/actual length mismatch: {pred} vs {actual}")]
    LengthMismatch { pred: usize, actual: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("beta list is empty")]
    NoBetas,
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

/// Binary confusion counts in the standard orientation: positives are the
/// distress class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tpc: usize,
    pub fpc: usize,
    pub fnc: usize,
    pub tnc: usize,
}

impl ConfusionMatrix {
    pub fn new(tpc: usize, fpc: usize, fnc: usize, tnc: usize) -> Self {
        Self { tpc, fpc, fnc, tnc }
    }

    pub fn total(&self) -> usize {
        self.tpc + self.fpc + self.fnc + self.tnc
    }
}

/// Counts prediction outcomes against actual labels.
pub fn confusion(pred: &[Label], actual: &[Label]) -> Result<ConfusionMatrix, EvalError> {
    if pred.len() != actual.len() {
        return Err(EvalError::LengthMismatch { pred: pred.len(), actual: actual.len() });
    }
    let mut m = ConfusionMatrix::new(0, 0, 0, 0);
    for (p, a) in pred.iter().zip(actual) {
        match (p.is_positive(), a.is_positive()) {
            (true, true) => m.tpc += 1,
            (true, false) => m.fpc += 1,
            (false, true) => m.fnc += 1,
            (false, false) => m.tnc += 1,
        }
    }
    Ok(m)
}

pub const METRIC_NAMES: [&str; 4] = ["precision", "recall", "f1", "accuracy"];

/// The four metrics; `None` marks a 0/0 case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSet {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub accuracy: Option<f64>,
}

impl MetricSet {
    pub fn as_array(&self) -> [Option<f64>; 4] {
        [self.precision, self.recall, self.f1, self.accuracy]
    }
}

/// Precision `tp/(tp+fp)`, recall `tp/(tp+fn)`, their harmonic mean, and
/// accuracy `(tp+tn)/total`. A zero denominator yields an undefined
/// metric; F1 is undefined when either rate is, or when both are zero.
pub fn metrics(c: &ConfusionMatrix) -> Result<MetricSet, EvalError> {
    if c.total() == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    let precision = ratio(c.tpc, c.tpc + c.fpc);
    let recall = ratio(c.tpc, c.tpc + c.fnc);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    let accuracy = Some((c.tpc + c.tnc) as f64 / c.total() as f64);
    Ok(MetricSet { precision, recall, f1, accuracy })
}

/// Split/repetition settings shared by every experiment cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentProtocol {
    pub repetitions: usize,
    pub train_fraction: f64,
    pub base_seed: u64,
}

impl Default for ExperimentProtocol {
    fn default() -> Self {
        Self { repetitions: 10, train_fraction: 0.7, base_seed: 42 }
    }
}

/// Per-metric means over the repetitions of one experiment cell.
/// Undefined runs are excluded from each mean; `defined` counts how many
/// repetitions contributed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportCell {
    pub means: [Option<f64>; 4],
    pub defined: [usize; 4],
    pub repetitions: usize,
}

impl ReportCell {
    pub fn accuracy(&self) -> Option<f64> {
        self.means[3]
    }

    /// Per-metric difference `self - other` where both sides are defined.
    pub fn delta(&self, other: &ReportCell) -> [Option<f64>; 4] {
        let mut out = [None; 4];
        for (slot, (a, b)) in out.iter_mut().zip(self.means.iter().zip(&other.means)) {
            if let (Some(a), Some(b)) = (a, b) {
                *slot = Some(a - b);
            }
        }
        out
    }
}

fn mean_of(defined: &[f64]) -> Option<f64> {
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

/// One repeated-holdout experiment cell.
///
/// For repetition `r` in `1..=repetitions`: split with seed `base + r`,
/// fit min-max normalization on the training part only, train the
/// classifier (seeded `base + r` as well), and score the held-out part.
/// The cell holds the per-metric means over defined repetitions.
pub fn run_experiment(
    d: &Dataset,
    features: &[String],
    spec: &ClassifierSpec,
    protocol: &ExperimentProtocol,
) -> Result<ReportCell, EvalError> {
    if protocol.repetitions == 0 {
        return Err(EvalError::NoRepetitions);
    }
    let subset = d.select_features(features)?;
    let mut collected: [Vec<f64>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for r in 1..=protocol.repetitions {
        let seed = protocol.base_seed + r as u64;
        let m = single_run(&subset, spec, protocol.train_fraction, seed)?;
        for (bucket, value) in collected.iter_mut().zip(m.as_array()) {
            if let Some(v) = value {
                bucket.push(v);
            }
        }
    }
    let means = [
        mean_of(&collected[0]),
        mean_of(&collected[1]),
        mean_of(&collected[2]),
        mean_of(&collected[3]),
    ];
    let defined = [
        collected[0].len(),
        collected[1].len(),
        collected[2].len(),
        collected[3].len(),
    ];
    Ok(ReportCell { means, defined, repetitions: protocol.repetitions })
}

/// One split/train/score pass; exposed for tests that recompute cell
/// means independently.
pub fn single_run(
    d: &Dataset,
    spec: &ClassifierSpec,
    train_fraction: f64,
    seed: u64,
) -> Result<MetricSet, EvalError> {
    let (train, test) = split(d, train_fraction, seed)?;
    let params = fit_minmax(&train)?;
    let train_n = apply_minmax(&train, &params)?;
    let test_n = apply_minmax(&test, &params)?;
    let (x_train, y_train) = train_n.to_matrix()?;
    let (x_test, y_test) = test_n.to_matrix()?;
    let model = models::train(&spec.with_seed(seed), &x_train, &y_train)?;
    let pred = models::predict(&model, &x_test)?;
    Ok(metrics(&confusion(&pred, &y_test)?)?)
}

/// Side-by-side evaluation of the three indicator systems on identical
/// split seeds: traditional financial only, raw multi-source, and the
/// selected multi-source subset. `financial` may be absent when the
/// dataset carries no traditional financial features.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub financial: Option<ReportCell>,
    pub raw: ReportCell,
    pub selected: ReportCell,
}

pub fn compare_indicator_systems(
    d_full: &Dataset,
    d_financial: Option<&Dataset>,
    selected: &[String],
    spec: &ClassifierSpec,
    protocol: &ExperimentProtocol,
) -> Result<ComparisonReport, EvalError> {
    let raw = run_experiment(d_full, d_full.feature_names(), spec, protocol)?;
    let selected_cell = run_experiment(d_full, selected, spec, protocol)?;
    let financial = match d_financial {
        Some(d) => Some(run_experiment(d, d.feature_names(), spec, protocol)?),
        None => None,
    };
    Ok(ComparisonReport { financial, raw, selected: selected_cell })
}
