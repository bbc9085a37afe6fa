//! Equal-width discretization of continuous features.

use super::SelectionError;
use crate::dataset::Label;

/// A feature reduced to integer bin indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretizedFeature {
    bin_indices: Vec<usize>,
    bin_count: usize,
}

impl DiscretizedFeature {
    pub fn new(bin_indices: Vec<usize>, bin_count: usize) -> Result<Self, SelectionError> {
        if bin_count < 1 {
            return Err(SelectionError::BinCount(bin_count));
        }
        if let Some(&bad) = bin_indices.iter().find(|&&i| i >= bin_count) {
            return Err(SelectionError::Shape { left: bad, right: bin_count });
        }
        Ok(Self { bin_indices, bin_count })
    }

    /// Binary encoding of the label vector (positive class = bin 1).
    pub fn from_labels(labels: &[Label]) -> Self {
        let bin_indices = labels
            .iter()
            .map(|l| if l.is_positive() { 1 } else { 0 })
            .collect();
        Self { bin_indices, bin_count: 2 }
    }

    pub fn indices(&self) -> &[usize] {
        &self.bin_indices
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn len(&self) -> usize {
        self.bin_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bin_indices.is_empty()
    }
}

/// Equal-width bins over `[min, max]`. The maximum maps into the top bin
/// and a constant vector maps entirely to bin 0.
pub fn discretize(values: &[f64], bin_count: usize) -> Result<DiscretizedFeature, SelectionError> {
    if bin_count < 2 {
        return Err(SelectionError::BinCount(bin_count));
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(SelectionError::NonFinite(bad));
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let indices = if values.is_empty() || min == max {
        vec![0; values.len()]
    } else {
        values
            .iter()
            .map(|&v| {
                let raw = ((v - min) * bin_count as f64 / (max - min)).floor() as usize;
                raw.min(bin_count - 1)
            })
            .collect()
    };
    Ok(DiscretizedFeature { bin_indices: indices, bin_count })
}
