//! In-memory dataset model and delimited-text ingestion.
//!
//! A [`Dataset`] is an immutable sample-by-feature table of optional reals
//! (absent = missing) with one binary distress label per sample. Files are
//! delimited text with a header row; the id/label columns and the label
//! vocabulary come from a [`DatasetSchema`].

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::catalog::FeatureCatalog;
use crate::linalg::Matrix;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("unknown label token {token:?} at line {line}")]
    UnknownLabel { token: String, line: u64 },
    #[error("duplicate sample id {0:?}")]
    DuplicateSampleId(String),
    #[error("duplicate feature column {0:?}")]
    DuplicateFeature(String),
    #[error("missing required column {0:?}")]
    MissingColumn(String),
    #[error("inconsistent dimensions: {0}")]
    Shape(String),
    #[error("missing value in feature {feature:?} for sample {sample:?}")]
    MissingCell { feature: String, sample: String },
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("unknown horizon {0:?} (expected T-1, T-2 or T-3)")]
    UnknownHorizon(String),
}

/// Binary distress label: `Distress` is the positive (+1) class, assigned
/// to companies under special treatment; `Healthy` is -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Distress,
    Healthy,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Distress => 1.0,
            Label::Healthy => -1.0,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Distress
    }

    pub fn opposite(self) -> Label {
        match self {
            Label::Distress => Label::Healthy,
            Label::Healthy => Label::Distress,
        }
    }

    /// Label for a decision score, with exact-threshold ties going to the
    /// positive class.
    pub fn from_score(score: f64, threshold: f64) -> Label {
        if score >= threshold {
            Label::Distress
        } else {
            Label::Healthy
        }
    }
}

/// How many periods before the special-treatment event the indicator data
/// was measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Horizon {
    T1,
    T2,
    T3,
}

impl Horizon {
    pub const ALL: [Horizon; 3] = [Horizon::T1, Horizon::T2, Horizon::T3];

    pub fn parse(s: &str) -> Result<Horizon, DataError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "t-1" | "t1" => Ok(Horizon::T1),
            "t-2" | "t2" => Ok(Horizon::T2),
            "t-3" | "t3" => Ok(Horizon::T3),
            other => Err(DataError::UnknownHorizon(other.to_string())),
        }
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::T1 => write!(f, "T-1"),
            Horizon::T2 => write!(f, "T-2"),
            Horizon::T3 => write!(f, "T-3"),
        }
    }
}

/// Column mapping and token vocabulary for reading/writing dataset files.
#[derive(Debug, Clone)]
pub struct DatasetSchema {
    pub id_column: String,
    pub label_column: String,
    pub horizon: Horizon,
    /// Tokens mapping to [`Label::Distress`]; the first one is used when writing.
    pub positive_labels: Vec<String>,
    /// Tokens mapping to [`Label::Healthy`]; the first one is used when writing.
    pub negative_labels: Vec<String>,
    /// Cell contents treated as a missing value (the empty string by default).
    pub missing_sentinels: Vec<String>,
    pub delimiter: u8,
}

impl DatasetSchema {
    pub fn new(horizon: Horizon) -> Self {
        Self {
            id_column: "id".to_string(),
            label_column: "label".to_string(),
            horizon,
            positive_labels: vec!["ST".to_string(), "+1".to_string(), "1".to_string()],
            negative_labels: vec!["OK".to_string(), "non-ST".to_string(), "-1".to_string()],
            missing_sentinels: vec![String::new()],
            delimiter: b',',
        }
    }

    fn parse_label(&self, token: &str, line: u64) -> Result<Label, DataError> {
        let t = token.trim();
        if self.positive_labels.iter().any(|p| p == t) {
            Ok(Label::Distress)
        } else if self.negative_labels.iter().any(|n| n == t) {
            Ok(Label::Healthy)
        } else {
            Err(DataError::UnknownLabel { token: t.to_string(), line })
        }
    }

    fn label_token(&self, label: Label) -> &str {
        match label {
            Label::Distress => &self.positive_labels[0],
            Label::Healthy => &self.negative_labels[0],
        }
    }

    fn is_missing(&self, cell: &str) -> bool {
        self.missing_sentinels.iter().any(|s| s == cell.trim())
    }
}

impl Default for DatasetSchema {
    fn default() -> Self {
        Self::new(Horizon::T1)
    }
}

/// Immutable sample-by-feature table with binary labels.
///
/// Values are stored row-major with `None` marking a missing cell. All
/// construction paths enforce consistent dimensions and unique sample ids,
/// after which the table is read-only and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    sample_ids: Vec<String>,
    labels: Vec<Label>,
    values: Vec<Option<f64>>,
    horizon: Horizon,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        sample_ids: Vec<String>,
        labels: Vec<Label>,
        values: Vec<Option<f64>>,
        horizon: Horizon,
    ) -> Result<Self, DataError> {
        if labels.len() != sample_ids.len() {
            return Err(DataError::Shape(format!(
                "{} labels for {} samples",
                labels.len(),
                sample_ids.len()
            )));
        }
        if values.len() != sample_ids.len() * feature_names.len() {
            return Err(DataError::Shape(format!(
                "{} cells for {} samples x {} features",
                values.len(),
                sample_ids.len(),
                feature_names.len()
            )));
        }
        let mut seen = HashSet::new();
        for id in &sample_ids {
            if !seen.insert(id.as_str()) {
                return Err(DataError::DuplicateSampleId(id.clone()));
            }
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(DataError::DuplicateFeature(name.clone()));
            }
        }
        Ok(Self { feature_names, sample_ids, labels, values, horizon })
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn value(&self, sample: usize, feature: usize) -> Option<f64> {
        self.values[sample * self.feature_names.len() + feature]
    }

    pub fn feature_index(&self, code: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == code)
    }

    /// Column iterator over one feature.
    pub fn column(&self, feature: usize) -> impl Iterator<Item = Option<f64>> + '_ {
        (0..self.n_samples()).map(move |k| self.value(k, feature))
    }

    pub fn missing_fraction(&self, feature: usize) -> f64 {
        if self.n_samples() == 0 {
            return 0.0;
        }
        let missing = self.column(feature).filter(Option::is_none).count();
        missing as f64 / self.n_samples() as f64
    }

    /// (positive, negative) class sizes.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|l| l.is_positive()).count();
        (pos, self.labels.len() - pos)
    }

    /// Same samples and labels, new cell contents.
    pub fn with_values(&self, values: Vec<Option<f64>>) -> Result<Self, DataError> {
        Self::new(
            self.feature_names.clone(),
            self.sample_ids.clone(),
            self.labels.clone(),
            values,
            self.horizon,
        )
    }

    /// Restriction to the named features, in the order given.
    pub fn select_features(&self, codes: &[String]) -> Result<Self, DataError> {
        let mut indices = Vec::with_capacity(codes.len());
        for code in codes {
            let idx = self
                .feature_index(code)
                .ok_or_else(|| DataError::UnknownFeature(code.clone()))?;
            indices.push(idx);
        }
        let mut values = Vec::with_capacity(self.n_samples() * indices.len());
        for k in 0..self.n_samples() {
            for &j in &indices {
                values.push(self.value(k, j));
            }
        }
        Self::new(
            codes.to_vec(),
            self.sample_ids.clone(),
            self.labels.clone(),
            values,
            self.horizon,
        )
    }

    /// Restriction to the given sample rows, in the order given.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let n = self.n_features();
        let mut values = Vec::with_capacity(rows.len() * n);
        let mut ids = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(rows.len());
        for &k in rows {
            ids.push(self.sample_ids[k].clone());
            labels.push(self.labels[k]);
            for j in 0..n {
                values.push(self.value(k, j));
            }
        }
        Self::new(self.feature_names.clone(), ids, labels, values, self.horizon)
            .expect("row subset preserves dataset invariants")
    }

    /// Dense matrix view for model training; fails on any missing cell.
    pub fn to_matrix(&self) -> Result<(Matrix, Vec<Label>), DataError> {
        let mut data = Vec::with_capacity(self.values.len());
        for k in 0..self.n_samples() {
            for j in 0..self.n_features() {
                match self.value(k, j) {
                    Some(v) => data.push(v),
                    None => {
                        return Err(DataError::MissingCell {
                            feature: self.feature_names[j].clone(),
                            sample: self.sample_ids[k].clone(),
                        })
                    }
                }
            }
        }
        let m = Matrix::from_vec(self.n_samples(), self.n_features(), data)
            .expect("dimensions verified at construction");
        Ok((m, self.labels.clone()))
    }
}

/// Report produced by [`validate_dataset`].
#[derive(Debug, Clone)]
pub struct DatasetReport {
    /// Features that do not appear in the catalog.
    pub uncataloged: Vec<String>,
    /// Per-feature missing fraction, in feature order.
    pub missing_fractions: Vec<(String, f64)>,
    /// (positive, negative) class sizes.
    pub class_counts: (usize, usize),
}

impl DatasetReport {
    pub fn is_clean(&self) -> bool {
        self.uncataloged.is_empty() && self.missing_fractions.iter().all(|(_, f)| *f == 0.0)
    }
}

/// Report-only consistency check of a dataset against a feature catalog.
pub fn validate_dataset(d: &Dataset, catalog: &FeatureCatalog) -> DatasetReport {
    let uncataloged = d
        .feature_names()
        .iter()
        .filter(|name| !catalog.contains(name))
        .cloned()
        .collect();
    let missing_fractions = d
        .feature_names()
        .iter()
        .enumerate()
        .map(|(j, name)| (name.clone(), d.missing_fraction(j)))
        .collect();
    DatasetReport { uncataloged, missing_fractions, class_counts: d.class_counts() }
}

/// Reads a delimited-text dataset with a header row.
///
/// Empty cells (and any configured sentinel token) become missing values;
/// label tokens map onto {+1, -1} through the schema vocabulary.
pub fn load_dataset(path: &Path, schema: &DatasetSchema) -> Result<Dataset, DataError> {
    let file = File::open(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_dataset(file, schema)
}

pub fn read_dataset<R: Read>(reader: R, schema: &DatasetSchema) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| DataError::Parse { line: 1, message: e.to_string() })?
        .clone();
    let id_idx = headers
        .iter()
        .position(|h| h == schema.id_column)
        .ok_or_else(|| DataError::MissingColumn(schema.id_column.clone()))?;
    let label_idx = headers
        .iter()
        .position(|h| h == schema.label_column)
        .ok_or_else(|| DataError::MissingColumn(schema.label_column.clone()))?;

    let mut feature_cols = Vec::new();
    let mut feature_names = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        if i != id_idx && i != label_idx {
            feature_cols.push(i);
            feature_names.push(h.to_string());
        }
    }

    let mut sample_ids = Vec::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(csv::Position::line)
                .unwrap_or_default();
            DataError::Parse { line, message: e.to_string() }
        })?;
        let line = record.position().map(csv::Position::line).unwrap_or_default();
        sample_ids.push(record[id_idx].to_string());
        labels.push(schema.parse_label(&record[label_idx], line)?);
        for &col in &feature_cols {
            let cell = &record[col];
            if schema.is_missing(cell) {
                values.push(None);
            } else {
                let v: f64 = cell.parse().map_err(|_| DataError::Parse {
                    line,
                    message: format!("cannot parse {cell:?} as a number"),
                })?;
                values.push(Some(v));
            }
        }
    }

    Dataset::new(feature_names, sample_ids, labels, values, schema.horizon)
}

/// Writes a dataset in the same delimited format [`load_dataset`] reads.
///
/// Present values use the shortest decimal form that parses back to the
/// same float, so a load/write cycle round-trips cell contents exactly.
pub fn write_dataset<W: Write>(d: &Dataset, writer: W, schema: &DatasetSchema) -> Result<(), DataError> {
    let mut wtr = csv::WriterBuilder::new()
        .delimiter(schema.delimiter)
        .from_writer(writer);
    let mut header = vec![schema.id_column.clone(), schema.label_column.clone()];
    header.extend(d.feature_names().iter().cloned());
    wtr.write_record(&header)
        .map_err(|e| DataError::Parse { line: 0, message: e.to_string() })?;
    for k in 0..d.n_samples() {
        let mut record = Vec::with_capacity(2 + d.n_features());
        record.push(d.sample_ids()[k].clone());
        record.push(schema.label_token(d.labels()[k]).to_string());
        for j in 0..d.n_features() {
            record.push(match d.value(k, j) {
                Some(v) => format!("{v}"),
                None => String::new(),
            });
        }
        wtr.write_record(&record)
            .map_err(|e| DataError::Parse { line: 0, message: e.to_string() })?;
    }
    wtr.flush()
        .map_err(|e| DataError::Parse { line: 0, message: e.to_string() })?;
    Ok(())
}

pub fn save_dataset(d: &Dataset, path: &Path, schema: &DatasetSchema) -> Result<(), DataError> {
    let file = File::create(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    write_dataset(d, file, schema)
}
