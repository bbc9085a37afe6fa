//! Missing-value screening, min-max normalization, and stratified splits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset::{DataError, Dataset, Label};

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("invalid threshold {0}: must lie in [0, 1]")]
    InvalidThreshold(f64),
    #[error("feature {0:?} has no observed values to impute from")]
    NothingToImpute(String),
    #[error("feature {feature:?} has a missing cell for sample {sample:?}; screen before normalizing")]
    MissingCell { feature: String, sample: String },
    #[error("no normalization parameters for feature {0:?}")]
    UncoveredFeature(String),
    #[error("invalid train fraction {0}: must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("class {class:?} with {size} samples cannot be split at fraction {fraction}")]
    Stratification { class: String, size: usize, fraction: f64 },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Imputation rule for residual gaps after screening.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Imputation {
    Mean,
    Median,
}

impl Imputation {
    fn fill(self, present: &[f64]) -> f64 {
        match self {
            Imputation::Mean => present.iter().sum::<f64>() / present.len() as f64,
            Imputation::Median => {
                let mut sorted = present.to_vec();
                sorted.sort_by(f64::total_cmp);
                let mid = sorted.len() / 2;
                if sorted.len() % 2 == 1 {
                    sorted[mid]
                } else {
                    (sorted[mid - 1] + sorted[mid]) / 2.0
                }
            }
        }
    }
}

/// Drops every feature whose missing fraction is strictly above
/// `threshold`, then fills the surviving gaps with the feature's mean (or
/// median) over observed values. Returns the screened dataset and the
/// dropped feature codes.
pub fn screen_missing(
    d: &Dataset,
    threshold: f64,
    imputation: Imputation,
) -> Result<(Dataset, Vec<String>), PreprocessError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(PreprocessError::InvalidThreshold(threshold));
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (j, name) in d.feature_names().iter().enumerate() {
        if d.missing_fraction(j) > threshold {
            dropped.push(name.clone());
        } else {
            kept.push((j, name.clone()));
        }
    }

    let mut fills = Vec::with_capacity(kept.len());
    for (j, name) in &kept {
        let present: Vec<f64> = d.column(*j).flatten().collect();
        if present.is_empty() {
            return Err(PreprocessError::NothingToImpute(name.clone()));
        }
        fills.push(imputation.fill(&present));
    }

    let mut values = Vec::with_capacity(d.n_samples() * kept.len());
    for k in 0..d.n_samples() {
        for (slot, (j, _)) in kept.iter().enumerate() {
            values.push(Some(d.value(k, *j).unwrap_or(fills[slot])));
        }
    }
    let names: Vec<String> = kept.into_iter().map(|(_, n)| n).collect();
    let screened = Dataset::new(
        names,
        d.sample_ids().to_vec(),
        d.labels().to_vec(),
        values,
        d.horizon(),
    )?;
    Ok((screened, dropped))
}

/// Per-feature (min, max) ranges observed on the fitting data.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationParams {
    features: Vec<String>,
    ranges: Vec<(f64, f64)>,
}

impl NormalizationParams {
    pub fn range(&self, feature: &str) -> Option<(f64, f64)> {
        self.features
            .iter()
            .position(|f| f == feature)
            .map(|i| self.ranges[i])
    }
}

/// Records per-feature min and max. The dataset must be fully observed.
pub fn fit_minmax(d: &Dataset) -> Result<NormalizationParams, PreprocessError> {
    let mut ranges = Vec::with_capacity(d.n_features());
    for (j, name) in d.feature_names().iter().enumerate() {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for (k, cell) in d.column(j).enumerate() {
            let v = cell.ok_or_else(|| PreprocessError::MissingCell {
                feature: name.clone(),
                sample: d.sample_ids()[k].clone(),
            })?;
            min = min.min(v);
            max = max.max(v);
        }
        ranges.push((min, max));
    }
    Ok(NormalizationParams { features: d.feature_names().to_vec(), ranges })
}

/// Rescales every cell to `(x - min) / (max - min)`, mapping a constant
/// feature to 0 and clipping out-of-range cells (test data) into [0, 1].
pub fn apply_minmax(d: &Dataset, params: &NormalizationParams) -> Result<Dataset, PreprocessError> {
    let mut ranges = Vec::with_capacity(d.n_features());
    for name in d.feature_names() {
        let range = params
            .range(name)
            .ok_or_else(|| PreprocessError::UncoveredFeature(name.clone()))?;
        ranges.push(range);
    }
    let mut values = Vec::with_capacity(d.n_samples() * d.n_features());
    for k in 0..d.n_samples() {
        for (j, (min, max)) in ranges.iter().enumerate() {
            let v = d.value(k, j).ok_or_else(|| PreprocessError::MissingCell {
                feature: d.feature_names()[j].clone(),
                sample: d.sample_ids()[k].clone(),
            })?;
            let scaled = if max > min {
                ((v - min) / (max - min)).clamp(0.0, 1.0)
            } else {
                0.0
            };
            values.push(Some(scaled));
        }
    }
    Ok(d.with_values(values)?)
}

/// Stratified random split: within each label class, `round(size *
/// train_fraction)` samples go to the training side. Deterministic for a
/// given seed; the two parts are disjoint and jointly exhaust the input.
pub fn split(
    d: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), PreprocessError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(PreprocessError::InvalidFraction(train_fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    // Fixed class order (positive first) keeps the draw reproducible.
    for class in [Label::Distress, Label::Healthy] {
        let mut rows: Vec<usize> = (0..d.n_samples())
            .filter(|&k| d.labels()[k] == class)
            .collect();
        let take = (rows.len() as f64 * train_fraction).round() as usize;
        if rows.is_empty() || take == 0 || take == rows.len() {
            return Err(PreprocessError::Stratification {
                class: if class.is_positive() { "+1".into() } else { "-1".into() },
                size: rows.len(),
                fraction: train_fraction,
            });
        }
        rows.shuffle(&mut rng);
        train_rows.extend_from_slice(&rows[..take]);
        test_rows.extend_from_slice(&rows[take..]);
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    Ok((d.select_rows(&train_rows), d.select_rows(&test_rows)))
}
