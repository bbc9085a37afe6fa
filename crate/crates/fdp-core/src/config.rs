//! Run configuration: a plain `key = value` text file.
//!
//! Lines starting with `#` and blank lines are ignored. Every knob has a
//! documented default; unknown keys are rejected so typos fail loudly.
//! The full effective configuration (defaults expanded) is embedded in
//! every emitted report for provenance.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dataset::{DatasetSchema, Horizon};
use crate::indicators::SentimentMode;
use crate::models::{ClassifierKind, ClassifierSpec, ModelError};
use crate::preprocess::Imputation;
use crate::selection::{SelectionConfig, TieBreak, DEFAULT_BETAS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got {content:?}")]
    Syntax { line: usize, content: String },
    #[error("line {line}: unknown configuration key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("key {key:?}: {message}")]
    BadValue { key: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

const KNOWN_KEYS: &[&str] = &[
    "indicators_t1",
    "indicators_t2",
    "indicators_t3",
    "accounting",
    "posts",
    "lexicon",
    "sentiment_mode",
    "opinion_normalize",
    "id_column",
    "label_column",
    "positive_labels",
    "negative_labels",
    "missing_sentinels",
    "delimiter",
    "missing_threshold",
    "imputation",
    "train_fraction",
    "bins",
    "svm_c",
    "betas",
    "top_k",
    "epsilon",
    "tie_break",
    "models",
    "sweep_model",
    "lr_learning_rate",
    "lr_l2",
    "lr_epochs",
    "bp_hidden",
    "bp_learning_rate",
    "bp_epochs",
    "svm_model_c",
    "dt_max_depth",
    "dt_min_leaf",
    "jones_min_rows",
    "repetitions",
    "seed",
    "output_dir",
];

/// Severity of one validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub indicator_paths: BTreeMap<Horizon, PathBuf>,
    pub accounting: Option<PathBuf>,
    pub posts: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub sentiment_mode: SentimentMode,
    pub opinion_normalize: bool,
    pub id_column: String,
    pub label_column: String,
    pub positive_labels: Vec<String>,
    pub negative_labels: Vec<String>,
    pub missing_sentinels: Vec<String>,
    pub delimiter: u8,
    pub missing_threshold: f64,
    pub imputation: Imputation,
    pub train_fraction: f64,
    pub bins: usize,
    pub svm_c: f64,
    pub betas: Vec<f64>,
    pub top_k: usize,
    pub epsilon: f64,
    pub tie_break: TieBreak,
    pub models: Vec<ClassifierKind>,
    pub sweep_model: ClassifierKind,
    pub model_params: BTreeMap<String, f64>,
    pub jones_min_rows: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            indicator_paths: BTreeMap::new(),
            accounting: None,
            posts: None,
            lexicon: None,
            sentiment_mode: SentimentMode::Scored,
            opinion_normalize: false,
            id_column: "id".to_string(),
            label_column: "label".to_string(),
            positive_labels: vec!["ST".into(), "+1".into(), "1".into()],
            negative_labels: vec!["OK".into(), "non-ST".into(), "-1".into()],
            missing_sentinels: vec![String::new()],
            delimiter: b',',
            missing_threshold: 0.30,
            imputation: Imputation::Mean,
            train_fraction: 0.70,
            bins: 5,
            svm_c: 1.0,
            betas: DEFAULT_BETAS.to_vec(),
            top_k: 20,
            epsilon: 1e-12,
            tie_break: TieBreak::Catalog,
            models: vec![
                ClassifierKind::Lr,
                ClassifierKind::Dt,
                ClassifierKind::Bp,
                ClassifierKind::Svm,
            ],
            sweep_model: ClassifierKind::Bp,
            model_params: BTreeMap::new(),
            jones_min_rows: 10,
            repetitions: 10,
            seed: 42,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    let mut seen = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax { line: line_no, content: line.to_string() });
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line: line_no, key });
        }
        if seen.insert(key.clone(), line_no).is_some() {
            return Err(ConfigError::DuplicateKey { line: line_no, key });
        }
        pairs.push((line_no, key, value));
    }
    Ok(pairs)
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::BadValue { key: key.to_string(), message: message.into() }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (_, key, value) in parse_pairs(text)? {
            cfg.apply(&key, &value)?;
        }
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let parse_f64 = |v: &str| -> Result<f64, ConfigError> {
            v.parse().map_err(|_| bad(key, format!("{v:?} is not a number")))
        };
        let parse_usize = |v: &str| -> Result<usize, ConfigError> {
            v.parse().map_err(|_| bad(key, format!("{v:?} is not a nonnegative integer")))
        };
        let list = |v: &str| -> Vec<String> { v.split(',').map(|s| s.trim().to_string()).collect() };

        match key {
            "indicators_t1" => {
                self.indicator_paths.insert(Horizon::T1, PathBuf::from(value));
            }
            "indicators_t2" => {
                self.indicator_paths.insert(Horizon::T2, PathBuf::from(value));
            }
            "indicators_t3" => {
                self.indicator_paths.insert(Horizon::T3, PathBuf::from(value));
            }
            "accounting" => self.accounting = Some(PathBuf::from(value)),
            "posts" => self.posts = Some(PathBuf::from(value)),
            "lexicon" => self.lexicon = Some(PathBuf::from(value)),
            "sentiment_mode" => {
                self.sentiment_mode = match value.to_ascii_lowercase().as_str() {
                    "scored" => SentimentMode::Scored,
                    "lexicon" => SentimentMode::Lexicon,
                    other => return Err(bad(key, format!("expected scored|lexicon, got {other:?}"))),
                }
            }
            "opinion_normalize" => {
                self.opinion_normalize = match value.to_ascii_lowercase().as_str() {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    other => return Err(bad(key, format!("expected true|false, got {other:?}"))),
                }
            }
            "id_column" => self.id_column = value.to_string(),
            "label_column" => self.label_column = value.to_string(),
            "positive_labels" => self.positive_labels = list(value),
            "negative_labels" => self.negative_labels = list(value),
            "missing_sentinels" => self.missing_sentinels = list(value),
            "delimiter" => {
                let bytes = value.as_bytes();
                if bytes.len() != 1 {
                    return Err(bad(key, "must be a single character"));
                }
                self.delimiter = bytes[0];
            }
            "missing_threshold" => self.missing_threshold = parse_f64(value)?,
            "imputation" => {
                self.imputation = match value.to_ascii_lowercase().as_str() {
                    "mean" => Imputation::Mean,
                    "median" => Imputation::Median,
                    other => return Err(bad(key, format!("expected mean|median, got {other:?}"))),
                }
            }
            "train_fraction" => self.train_fraction = parse_f64(value)?,
            "bins" => self.bins = parse_usize(value)?,
            "svm_c" => self.svm_c = parse_f64(value)?,
            "betas" => {
                let mut betas = Vec::new();
                for token in value.split(',') {
                    betas.push(
                        token
                            .trim()
                            .parse::<f64>()
                            .map_err(|_| bad(key, format!("{token:?} is not a number")))?,
                    );
                }
                self.betas = betas;
            }
            "top_k" => self.top_k = parse_usize(value)?,
            "epsilon" => self.epsilon = parse_f64(value)?,
            "tie_break" => {
                self.tie_break = TieBreak::parse(value)
                    .ok_or_else(|| bad(key, format!("expected catalog|reverse, got {value:?}")))?
            }
            "models" => {
                let mut kinds = Vec::new();
                for token in value.split(',') {
                    kinds.push(ClassifierKind::parse(token)?);
                }
                self.models = kinds;
            }
            "sweep_model" => self.sweep_model = ClassifierKind::parse(value)?,
            "lr_learning_rate" | "lr_l2" | "lr_epochs" | "bp_hidden" | "bp_learning_rate"
            | "bp_epochs" | "svm_model_c" | "dt_max_depth" | "dt_min_leaf" => {
                self.model_params.insert(key.to_string(), parse_f64(value)?);
            }
            "jones_min_rows" => self.jones_min_rows = parse_usize(value)?,
            "repetitions" => self.repetitions = parse_usize(value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| bad(key, format!("{value:?} is not an unsigned integer")))?
            }
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => unreachable!("key whitelisted in parse_pairs"),
        }
        Ok(())
    }

    /// Dataset schema for a given horizon under this configuration.
    pub fn schema(&self, horizon: Horizon) -> DatasetSchema {
        DatasetSchema {
            id_column: self.id_column.clone(),
            label_column: self.label_column.clone(),
            horizon,
            positive_labels: self.positive_labels.clone(),
            negative_labels: self.negative_labels.clone(),
            missing_sentinels: self.missing_sentinels.clone(),
            delimiter: self.delimiter,
        }
    }

    pub fn selection_config(&self) -> SelectionConfig {
        SelectionConfig {
            bins: self.bins,
            c: self.svm_c,
            epsilon: self.epsilon,
            tie_break: self.tie_break,
        }
    }

    /// Classifier spec for one model kind with this config's overrides.
    pub fn classifier_spec(&self, kind: ClassifierKind) -> Result<ClassifierSpec, ConfigError> {
        let mut spec = ClassifierSpec::new(kind);
        let assign = |spec: &mut ClassifierSpec, cfg_key: &str, model_key: &str,
                      params: &BTreeMap<String, f64>|
         -> Result<(), ConfigError> {
            if let Some(v) = params.get(cfg_key) {
                spec.set(model_key, *v)?;
            }
            Ok(())
        };
        match kind {
            ClassifierKind::Lr => {
                assign(&mut spec, "lr_learning_rate", "learning_rate", &self.model_params)?;
                assign(&mut spec, "lr_l2", "l2", &self.model_params)?;
                assign(&mut spec, "lr_epochs", "epochs", &self.model_params)?;
            }
            ClassifierKind::Bp => {
                assign(&mut spec, "bp_hidden", "hidden", &self.model_params)?;
                assign(&mut spec, "bp_learning_rate", "learning_rate", &self.model_params)?;
                assign(&mut spec, "bp_epochs", "epochs", &self.model_params)?;
            }
            ClassifierKind::Svm => {
                assign(&mut spec, "svm_model_c", "c", &self.model_params)?;
            }
            ClassifierKind::Dt => {
                assign(&mut spec, "dt_max_depth", "max_depth", &self.model_params)?;
                assign(&mut spec, "dt_min_leaf", "min_leaf", &self.model_params)?;
            }
        }
        Ok(spec)
    }

    /// All keys with defaults expanded, sorted, as display strings.
    pub fn effective_entries(&self) -> Vec<(String, String)> {
        let mut out: BTreeMap<String, String> = BTreeMap::new();
        for (h, key) in [
            (Horizon::T1, "indicators_t1"),
            (Horizon::T2, "indicators_t2"),
            (Horizon::T3, "indicators_t3"),
        ] {
            if let Some(p) = self.indicator_paths.get(&h) {
                out.insert(key.into(), p.display().to_string());
            }
        }
        if let Some(p) = &self.accounting {
            out.insert("accounting".into(), p.display().to_string());
        }
        if let Some(p) = &self.posts {
            out.insert("posts".into(), p.display().to_string());
        }
        if let Some(p) = &self.lexicon {
            out.insert("lexicon".into(), p.display().to_string());
        }
        out.insert(
            "sentiment_mode".into(),
            match self.sentiment_mode {
                SentimentMode::Scored => "scored".into(),
                SentimentMode::Lexicon => "lexicon".into(),
            },
        );
        out.insert("opinion_normalize".into(), self.opinion_normalize.to_string());
        out.insert("id_column".into(), self.id_column.clone());
        out.insert("label_column".into(), self.label_column.clone());
        out.insert("positive_labels".into(), self.positive_labels.join(","));
        out.insert("negative_labels".into(), self.negative_labels.join(","));
        out.insert("missing_sentinels".into(), self.missing_sentinels.join(","));
        out.insert("delimiter".into(), (self.delimiter as char).to_string());
        out.insert("missing_threshold".into(), self.missing_threshold.to_string());
        out.insert(
            "imputation".into(),
            match self.imputation {
                Imputation::Mean => "mean".into(),
                Imputation::Median => "median".into(),
            },
        );
        out.insert("train_fraction".into(), self.train_fraction.to_string());
        out.insert("bins".into(), self.bins.to_string());
        out.insert("svm_c".into(), self.svm_c.to_string());
        out.insert(
            "betas".into(),
            self.betas.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
        );
        out.insert("top_k".into(), self.top_k.to_string());
        out.insert("epsilon".into(), self.epsilon.to_string());
        out.insert("tie_break".into(), self.tie_break.name().to_string());
        out.insert(
            "models".into(),
            self.models.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
        );
        out.insert("sweep_model".into(), self.sweep_model.name().to_string());
        for kind in [ClassifierKind::Lr, ClassifierKind::Dt, ClassifierKind::Bp, ClassifierKind::Svm]
        {
            if let Ok(spec) = self.classifier_spec(kind) {
                for (k, v) in spec.effective_params() {
                    out.insert(format!("{}.{}", kind.name().to_lowercase(), k), v.to_string());
                }
            }
        }
        out.insert("jones_min_rows".into(), self.jones_min_rows.to_string());
        out.insert("repetitions".into(), self.repetitions.to_string());
        out.insert("seed".into(), self.seed.to_string());
        out.insert("output_dir".into(), self.output_dir.display().to_string());
        out.into_iter().collect()
    }

    /// Range and consistency checks that need no file access.
    pub fn check_ranges(&self) -> Vec<Finding> {
        let mut findings = Vec::new();
        let mut error = |msg: String| findings.push(Finding { severity: Severity::Error, message: msg });
        if !(0.0..=1.0).contains(&self.missing_threshold) {
            error(format!("missing_threshold {} outside [0, 1]", self.missing_threshold));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            error(format!("train_fraction {} outside (0, 1)", self.train_fraction));
        }
        if self.bins < 2 {
            error(format!("bins {} must be at least 2", self.bins));
        }
        if !(self.svm_c > 0.0) {
            error(format!("svm_c {} must be positive", self.svm_c));
        }
        if self.betas.is_empty() {
            error("betas list is empty".to_string());
        }
        for b in &self.betas {
            if !(0.0..=1.0).contains(b) {
                error(format!("beta {b} outside [0, 1]"));
            }
        }
        if self.top_k == 0 {
            error("top_k must be at least 1".to_string());
        }
        if !(self.epsilon > 0.0) {
            error(format!("epsilon {} must be positive", self.epsilon));
        }
        if self.models.is_empty() {
            error("models list is empty".to_string());
        }
        if self.repetitions == 0 {
            error("repetitions must be at least 1".to_string());
        }
        if !self.models.contains(&self.sweep_model) {
            error(format!(
                "sweep_model {} is not in the models list",
                self.sweep_model.name()
            ));
        }
        if self.sentiment_mode == SentimentMode::Lexicon && self.lexicon.is_none() {
            error("sentiment_mode is lexicon but no lexicon path is configured".to_string());
        }
        for kind in self.models.clone() {
            if let Err(e) = self.classifier_spec(kind) {
                error(format!("model parameters: {e}"));
            }
        }
        findings
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_the_protocol() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.missing_threshold, 0.30);
        assert_eq!(cfg.train_fraction, 0.70);
        assert_eq!(cfg.betas, vec![0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0]);
        assert_eq!(cfg.top_k, 20);
        assert_eq!(cfg.repetitions, 10);
        assert!(cfg.check_ranges().is_empty());
    }

    #[test]
    fn parses_a_small_file() {
        let text = "\
# comment
indicators_t1 = data/t1.csv
missing_threshold = 0.25
betas = 0,0.5,1
models = LR, DT
sweep_model = LR
top_k = 5
seed = 9
output_dir = /tmp/out
";
        let cfg = RunConfig::from_str(text).unwrap();
        assert_eq!(cfg.indicator_paths.len(), 1);
        assert_eq!(cfg.missing_threshold, 0.25);
        assert_eq!(cfg.betas, vec![0.0, 0.5, 1.0]);
        assert_eq!(cfg.models, vec![ClassifierKind::Lr, ClassifierKind::Dt]);
        assert_eq!(cfg.seed, 9);
        assert!(cfg.check_ranges().is_empty());
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        assert!(matches!(
            RunConfig::from_str("nope = 1\n"),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::from_str("seed = 1\nseed = 2\n"),
            Err(ConfigError::DuplicateKey { line: 2, .. })
        ));
        assert!(matches!(
            RunConfig::from_str("just some text\n"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn range_checks_catch_bad_values() {
        let cfg = RunConfig::from_str("betas = 0,1.5\ntrain_fraction = 1\n").unwrap();
        let findings = cfg.check_ranges();
        assert!(findings.iter().any(|f| f.message.contains("beta 1.5")));
        assert!(findings.iter().any(|f| f.message.contains("train_fraction")));
        assert!(findings.iter().all(|f| f.severity == Severity::Error));
    }

    #[test]
    fn lexicon_mode_requires_a_lexicon_path() {
        let cfg = RunConfig::from_str("sentiment_mode = lexicon\n").unwrap();
        assert!(cfg
            .check_ranges()
            .iter()
            .any(|f| f.message.contains("lexicon")));
    }

    #[test]
    fn missing_sentinels_support_the_empty_string() {
        let cfg = RunConfig::from_str("missing_sentinels = ,NA\n").unwrap();
        assert_eq!(cfg.missing_sentinels, vec![String::new(), "NA".to_string()]);
    }

    #[test]
    fn model_params_flow_into_specs() {
        let cfg = RunConfig::from_str("bp_hidden = 4\nbp_epochs = 100\nlr_l2 = 0.01\n").unwrap();
        let bp = cfg.classifier_spec(ClassifierKind::Bp).unwrap();
        assert_eq!(bp.get("hidden"), Some(4.0));
        assert_eq!(bp.get("epochs"), Some(100.0));
        let lr = cfg.classifier_spec(ClassifierKind::Lr).unwrap();
        assert_eq!(lr.get("l2"), Some(0.01));
    }

    #[test]
    fn effective_entries_expand_defaults_and_stay_sorted() {
        let cfg = RunConfig::from_str("indicators_t1 = a.csv\n").unwrap();
        let entries = cfg.effective_entries();
        let keys: Vec<&String> = entries.iter().map(|(k, _)| k).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        let get = |k: &str| {
            entries
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.clone())
        };
        assert_eq!(get("missing_threshold"), Some("0.3".to_string()));
        assert_eq!(get("betas"), Some("0,0.2,0.4,0.5,0.6,0.8,1".to_string()));
        assert_eq!(get("bp.hidden"), Some("16".to_string()));
        assert_eq!(get("dt.max_depth"), Some("5".to_string()));
    }
}
