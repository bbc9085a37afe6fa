//! Max-relevance min-redundancy scoring and the greedy forward ranking.

use super::discretize::{discretize, DiscretizedFeature};
use super::mi::mutual_information;
use super::{FeatureRanking, SelectionConfig, SelectionError};
#[cfg(test)]
use super::TieBreak;
use crate::dataset::Dataset;

/// Precomputed label and pairwise mutual information for one dataset under
/// one bin count. Rebuilt whenever the dataset or bin count changes; the
/// recursive eliminators reuse it across iterations since per-pair MI does
/// not depend on the surviving set.
pub(super) struct MiTable {
    pub label_mi: Vec<f64>,
    pair: Vec<f64>,
    n: usize,
}

impl MiTable {
    pub fn build(d: &Dataset, bins: usize) -> Result<Self, SelectionError> {
        let n = d.n_features();
        let label = DiscretizedFeature::from_labels(d.labels());
        let mut features = Vec::with_capacity(n);
        for j in 0..n {
            features.push(discretize(&column_values(d, j)?, bins)?);
        }
        let mut label_mi = Vec::with_capacity(n);
        for f in &features {
            label_mi.push(mutual_information(&label, f)?);
        }
        let mut pair = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let mi = mutual_information(&features[i], &features[j])?;
                pair[i * n + j] = mi;
                pair[j * n + i] = mi;
            }
        }
        Ok(Self { label_mi, pair, n })
    }

    pub fn pair_mi(&self, i: usize, j: usize) -> f64 {
        self.pair[i * self.n + j]
    }

    /// Redundancy of `i` within the subset: `(1/|S|^2) * sum_{j in S, j != i} I(i, j)`.
    pub fn redundancy_in(&self, subset: &[usize], i: usize) -> f64 {
        let s2 = (subset.len() * subset.len()) as f64;
        subset
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| self.pair_mi(i, j))
            .sum::<f64>()
            / s2
    }
}

pub(super) fn column_values(d: &Dataset, j: usize) -> Result<Vec<f64>, SelectionError> {
    d.column(j)
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| SelectionError::MissingCell { feature: d.feature_names()[j].clone() })
}

fn subset_indices(d: &Dataset, subset: &[String]) -> Result<Vec<usize>, SelectionError> {
    subset
        .iter()
        .map(|code| {
            d.feature_index(code)
                .ok_or_else(|| SelectionError::Data(crate::dataset::DataError::UnknownFeature(code.clone())))
        })
        .collect()
}

/// Subset relevance: mean mutual information between the label and each
/// feature of the subset.
pub fn relevance(d: &Dataset, subset: &[String], cfg: &SelectionConfig) -> Result<f64, SelectionError> {
    if subset.is_empty() {
        return Err(SelectionError::EmptySubset);
    }
    let indices = subset_indices(d, subset)?;
    let table = MiTable::build(d, cfg.bins)?;
    let sum: f64 = indices.iter().map(|&i| table.label_mi[i]).sum();
    Ok(sum / indices.len() as f64)
}

/// Redundancy of `feature` within `subset`:
/// `(1/|S|^2) * sum_{j in S, j != i} I(i, j)`.
pub fn redundancy(
    d: &Dataset,
    subset: &[String],
    feature: &str,
    cfg: &SelectionConfig,
) -> Result<f64, SelectionError> {
    if !subset.iter().any(|s| s == feature) {
        return Err(SelectionError::NotInSubset(feature.to_string()));
    }
    let indices = subset_indices(d, subset)?;
    let i = d.feature_index(feature).expect("membership checked above");
    let table = MiTable::build(d, cfg.bins)?;
    Ok(table.redundancy_in(&indices, i))
}

/// Greedy forward MRMR under the quotient criterion.
///
/// Each step adjoins the candidate maximizing
/// `R(S + c) / Q(S + c, c)` where `R` is the subset-mean label relevance
/// and `Q` the candidate's redundancy within the adjoined set; a zero
/// redundancy sum is replaced by the configured epsilon, which makes the
/// first step a pure relevance pick. Ties go to catalog order.
pub fn mrmr_quotient_rank(
    d: &Dataset,
    m: usize,
    cfg: &SelectionConfig,
) -> Result<FeatureRanking, SelectionError> {
    let n = d.n_features();
    if m == 0 || m > n {
        return Err(SelectionError::InvalidM { m, n });
    }
    let table = MiTable::build(d, cfg.bins)?;

    let mut selected: Vec<usize> = Vec::with_capacity(m);
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(m);
    let mut scores = Vec::with_capacity(m);
    let mut selected_relevance_sum = 0.0;

    for _ in 0..m {
        let candidate_scores: Vec<f64> = remaining
            .iter()
            .map(|&c| {
                let size = selected.len() + 1;
                let rel = (selected_relevance_sum + table.label_mi[c]) / size as f64;
                let red_sum: f64 = selected.iter().map(|&j| table.pair_mi(c, j)).sum();
                let q = (red_sum / (size * size) as f64).max(cfg.epsilon);
                rel / q
            })
            .collect();
        let pick = super::argmax_with(&candidate_scores, cfg.tie_break);
        let feature = remaining.remove(pick);
        selected_relevance_sum += table.label_mi[feature];
        selected.push(feature);
        order.push(d.feature_names()[feature].clone());
        scores.push(candidate_scores[pick]);
    }

    Ok(FeatureRanking { order, scores, elimination_trace: Vec::new(), beta: 0.0 })
}

/// Exhaustive reference for the greedy step, used by tests: recomputes
/// every candidate's criterion from scratch at every step.
#[cfg(test)]
pub(crate) fn mrmr_oracle_rank(d: &Dataset, m: usize, cfg: &SelectionConfig) -> Vec<String> {
    use super::mi::mutual_information;

    let label = DiscretizedFeature::from_labels(d.labels());
    let cols: Vec<DiscretizedFeature> = (0..d.n_features())
        .map(|j| discretize(&column_values(d, j).unwrap(), cfg.bins).unwrap())
        .collect();
    let mut selected: Vec<usize> = Vec::new();
    let mut order = Vec::new();
    for _ in 0..m {
        let mut best: Option<(usize, f64)> = None;
        for c in 0..d.n_features() {
            if selected.contains(&c) {
                continue;
            }
            let adjoined: Vec<usize> = selected.iter().copied().chain([c]).collect();
            let rel = adjoined
                .iter()
                .map(|&i| mutual_information(&label, &cols[i]).unwrap())
                .sum::<f64>()
                / adjoined.len() as f64;
            let q_sum = adjoined
                .iter()
                .filter(|&&j| j != c)
                .map(|&j| mutual_information(&cols[c], &cols[j]).unwrap())
                .sum::<f64>();
            let q = (q_sum / (adjoined.len() * adjoined.len()) as f64).max(cfg.epsilon);
            let score = rel / q;
            let replace = match (&best, cfg.tie_break) {
                (None, _) => true,
                (Some((_, b)), TieBreak::Catalog) => score > *b,
                (Some((_, b)), TieBreak::ReverseCatalog) => score >= *b,
            };
            if replace {
                best = Some((c, score));
            }
        }
        let (c, _) = best.unwrap();
        selected.push(c);
        order.push(d.feature_names()[c].clone());
    }
    order
}
