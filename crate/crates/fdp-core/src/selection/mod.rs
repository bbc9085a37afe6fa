//! Feature selection: mutual information, MRMR, linear SVM training,
//! SVM-RFE, and the combined MRMR/SVM-RFE recursive ranking.
//!
//! The combined ranker eliminates backwards: at each round it trains a
//! linear SVM on the surviving features, computes each feature's
//! relevance/redundancy quotient within the surviving set, min-max
//! normalizes both term vectors, and removes the feature minimizing
//! `beta * |w_i| + (1 - beta) * quotient_i`. `beta = 1` degenerates to
//! pure SVM-RFE and `beta = 0` to a pure MRMR-quotient elimination.

mod discretize;
mod mi;
mod mrmr;
mod rfe;
mod svm;
mod sweep;

pub use discretize::{discretize, DiscretizedFeature};
pub use mi::{entropy, mutual_information};
pub use mrmr::{mrmr_quotient_rank, redundancy, relevance};
pub use rfe::{combined_score, mrmr_svm_rfe, select_top_k, svm_rfe};
pub use svm::{train_linear_svm, SvmModel};
pub use sweep::{sweep_beta, BetaReport, BetaSweep};

use thiserror::Error;

use crate::dataset::DataError;

/// The beta grid swept by default.
pub const DEFAULT_BETAS: [f64; 7] = [0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0];

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("bin count must be at least 2, got {0}")]
    BinCount(usize),
    #[error("cannot discretize non-finite value {0}")]
    NonFinite(f64),
    #[error("sample count mismatch: {left} vs {right}")]
    Shape { left: usize, right: usize },
    #[error("feature subset is empty")]
    EmptySubset,
    #[error("feature {0:?} is not in the subset")]
    NotInSubset(String),
    #[error("feature {feature:?} has missing values; screen and impute first")]
    MissingCell { feature: String },
    #[error("beta must lie in [0, 1], got {0}")]
    InvalidBeta(f64),
    #[error("cannot select {m} features out of {n}")]
    InvalidM { m: usize, n: usize },
    #[error("cannot take top {k} of a ranking of length {len}")]
    InvalidK { k: usize, len: usize },
    #[error("regularization parameter must be positive, got {0}")]
    InvalidRegularization(f64),
    #[error("training data contains a single class")]
    SingleClass,
    #[error("SMO did not converge within {sweeps} sweeps")]
    Convergence { sweeps: usize },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Deterministic tie resolution for score comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Prefer the feature earliest in catalog (input column) order.
    #[default]
    Catalog,
    /// Prefer the feature latest in catalog order.
    ReverseCatalog,
}

impl TieBreak {
    pub fn parse(s: &str) -> Option<TieBreak> {
        match s.trim().to_ascii_lowercase().as_str() {
            "catalog" => Some(TieBreak::Catalog),
            "reverse" | "reverse_catalog" => Some(TieBreak::ReverseCatalog),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TieBreak::Catalog => "catalog",
            TieBreak::ReverseCatalog => "reverse",
        }
    }
}

/// Index of the maximum value, ties resolved by the tie-break mode.
pub(crate) fn argmax_with(values: &[f64], tie: TieBreak) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        let replace = match tie {
            TieBreak::Catalog => v > values[best],
            TieBreak::ReverseCatalog => v >= values[best],
        };
        if replace {
            best = i;
        }
    }
    best
}

/// Index of the minimum value, ties resolved by the tie-break mode.
pub(crate) fn argmin_with(values: &[f64], tie: TieBreak) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        let replace = match tie {
            TieBreak::Catalog => v < values[best],
            TieBreak::ReverseCatalog => v <= values[best],
        };
        if replace {
            best = i;
        }
    }
    best
}

/// Knobs shared by the selection operations.
#[derive(Debug, Clone)]
pub struct SelectionConfig {
    /// Equal-width bin count for mutual-information discretization.
    pub bins: usize,
    /// Soft-margin regularization for the linear SVM.
    pub c: f64,
    /// Substitute denominator when a redundancy sum is exactly zero.
    pub epsilon: f64,
    pub tie_break: TieBreak,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self { bins: 5, c: 1.0, epsilon: 1e-12, tie_break: TieBreak::Catalog }
    }
}

/// One recorded elimination (or selection) event.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub feature: String,
    pub score: f64,
}

/// Ranked feature list, most important first.
///
/// For the recursive eliminators `order` is the reverse elimination order
/// over all input features, `scores[i]` is the criterion value `order[i]`
/// had when it was removed, and `elimination_trace` records every removal.
/// Forward MRMR fills `order`/`scores` with its picks and leaves the trace
/// empty.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanking {
    pub order: Vec<String>,
    pub scores: Vec<f64>,
    pub elimination_trace: Vec<TraceEntry>,
    pub beta: f64,
}
