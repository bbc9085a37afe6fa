//! Derived indicator construction.
//!
//! Three indicator families are computed on top of the raw financial table:
//!
//! * `Audittyp` - 0 for a standard unqualified audit opinion, 1 otherwise;
//! * `DAP` - manipulable accrual earnings management from the modified
//!   Jones model: total accruals scaled by lagged assets minus the fitted
//!   non-manipulable part;
//! * `emotion` - per-company sum of post sentiment weighted by text
//!   influence (fourth root of reads plus square root of comments).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use thiserror::Error;

use crate::linalg::{self, Matrix};

/// Relative condition-number limit above which the Jones design matrix is
/// treated as rank deficient.
pub const JONES_CONDITION_LIMIT: f64 = 1e10;

/// Minimum regression sample for [`fit_jones`] unless overridden.
pub const DEFAULT_MIN_JONES_ROWS: usize = 10;

#[derive(Debug, Error)]
pub enum IndicatorError {
    #[error("unrecognized audit opinion {0:?}")]
    UnrecognizedOpinion(String),
    #[error("lagged total assets must be positive, got {0}")]
    NonPositiveAssets(f64),
    #[error("Jones regression needs at least {required} rows, got {actual}")]
    SampleSize { required: usize, actual: usize },
    #[error("Jones design matrix is collinear: {0}")]
    Collinear(#[from] linalg::LinalgError),
    #[error("coefficient {0} is not finite")]
    NonFiniteCoefficient(f64),
    #[error("counts must be nonnegative, got {0}")]
    NegativeCount(i64),
    #[error("sentiment score {0} outside [-1, 1]")]
    SentimentRange(f64),
    #[error("lexicon is empty")]
    EmptyLexicon,
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
}

// ---------------------------------------------------------------------------
// Audit opinion
// ---------------------------------------------------------------------------

/// Audit opinion collapsed to the two cases the indicator distinguishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditOpinion {
    StandardUnqualified,
    Other,
}

impl AuditOpinion {
    /// Maps a report string onto the enum. Standard unqualified opinions
    /// match a small fixed vocabulary; any string containing a known
    /// non-standard opinion keyword maps to `Other`; anything else is
    /// rejected so typos do not silently become indicator values.
    pub fn parse(source: &str) -> Result<AuditOpinion, IndicatorError> {
        let s = source.trim().to_ascii_lowercase();
        const STANDARD: &[&str] = &[
            "standard unqualified",
            "standard unqualified opinion",
            "standard-unqualified",
            "unqualified",
            "unqualified opinion",
        ];
        if STANDARD.contains(&s.as_str()) {
            return Ok(AuditOpinion::StandardUnqualified);
        }
        const NON_STANDARD_KEYWORDS: &[&str] =
            &["qualified", "adverse", "disclaimer", "emphasis", "unable", "reserved"];
        if NON_STANDARD_KEYWORDS.iter().any(|k| s.contains(k)) {
            return Ok(AuditOpinion::Other);
        }
        Err(IndicatorError::UnrecognizedOpinion(source.trim().to_string()))
    }
}

/// 0 for a standard unqualified opinion, 1 for everything else.
pub fn encode_audit_opinion(opinion: AuditOpinion) -> u8 {
    match opinion {
        AuditOpinion::StandardUnqualified => 0,
        AuditOpinion::Other => 1,
    }
}

// ---------------------------------------------------------------------------
// Modified Jones model
// ---------------------------------------------------------------------------

/// Per-company accounting quantities for one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesInputRow {
    total_assets_prev: f64,
    operating_profit: f64,
    operating_cash_flow: f64,
    delta_revenue: f64,
    delta_receivables: f64,
    fixed_assets_closing: f64,
}

impl JonesInputRow {
    /// Lagged total assets divide every term of the model, so they must be
    /// strictly positive.
    pub fn new(
        total_assets_prev: f64,
        operating_profit: f64,
        operating_cash_flow: f64,
        delta_revenue: f64,
        delta_receivables: f64,
        fixed_assets_closing: f64,
    ) -> Result<Self, IndicatorError> {
        if !(total_assets_prev > 0.0) {
            return Err(IndicatorError::NonPositiveAssets(total_assets_prev));
        }
        Ok(Self {
            total_assets_prev,
            operating_profit,
            operating_cash_flow,
            delta_revenue,
            delta_receivables,
            fixed_assets_closing,
        })
    }

    pub fn total_assets_prev(&self) -> f64 {
        self.total_assets_prev
    }
}

/// Fitted coefficients of the accrual regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl JonesCoefficients {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Result<Self, IndicatorError> {
        for c in [a1, a2, a3] {
            if !c.is_finite() {
                return Err(IndicatorError::NonFiniteCoefficient(c));
            }
        }
        Ok(Self { a1, a2, a3 })
    }
}

/// Total accruals: operating profit minus operating cash flow.
pub fn total_accruals(row: &JonesInputRow) -> f64 {
    row.operating_profit - row.operating_cash_flow
}

/// Fits the no-intercept accrual regression
/// `TA/A = a1 * (1/A) + a2 * (dREV/A) + a3 * (PPE/A) + noise`
/// by ordinary least squares over the supplied rows.
///
/// Grouping (per industry, per year, pooled) is the caller's choice: the
/// regression runs on exactly the rows it is given.
pub fn fit_jones(rows: &[JonesInputRow], min_rows: usize) -> Result<JonesCoefficients, IndicatorError> {
    if rows.len() < min_rows {
        return Err(IndicatorError::SampleSize { required: min_rows, actual: rows.len() });
    }
    let design: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let a = r.total_assets_prev;
            vec![1.0 / a, r.delta_revenue / a, r.fixed_assets_closing / a]
        })
        .collect();
    let rhs: Vec<f64> = rows
        .iter()
        .map(|r| total_accruals(r) / r.total_assets_prev)
        .collect();
    let design = Matrix::from_rows(&design).expect("rows have fixed arity");
    let sol = linalg::least_squares(&design, &rhs, JONES_CONDITION_LIMIT)?;
    JonesCoefficients::new(sol.coefficients[0], sol.coefficients[1], sol.coefficients[2])
}

/// Non-manipulable accruals under fitted coefficients:
/// `a1/A + a2 * (dREV - dAR)/A + a3 * PPE/A`.
pub fn non_manipulable_accruals(coeffs: &JonesCoefficients, row: &JonesInputRow) -> f64 {
    let a = row.total_assets_prev;
    coeffs.a1 / a
        + coeffs.a2 * (row.delta_revenue - row.delta_receivables) / a
        + coeffs.a3 * row.fixed_assets_closing / a
}

/// Manipulable accrual earnings management: `TA/A - NDA`.
pub fn accrual_earnings_management(row: &JonesInputRow, coeffs: &JonesCoefficients) -> f64 {
    total_accruals(row) / row.total_assets_prev - non_manipulable_accruals(coeffs, row)
}

// ---------------------------------------------------------------------------
// Public opinion
// ---------------------------------------------------------------------------

/// One shareholder post with its sentiment score and reach counters.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionPost {
    sentiment: f64,
    looks: u64,
    comments: u64,
}

impl OpinionPost {
    pub fn new(sentiment: f64, looks: u64, comments: u64) -> Result<Self, IndicatorError> {
        if !(-1.0..=1.0).contains(&sentiment) {
            return Err(IndicatorError::SentimentRange(sentiment));
        }
        Ok(Self { sentiment, looks, comments })
    }

    pub fn sentiment(&self) -> f64 {
        self.sentiment
    }

    pub fn influence(&self) -> f64 {
        post_influence(self.looks as i64, self.comments as i64)
            .expect("counts are nonnegative by construction")
    }
}

/// Text influence of a post: `looks^(1/4) + comments^(1/2)`.
pub fn post_influence(looks: i64, comments: i64) -> Result<f64, IndicatorError> {
    if looks < 0 {
        return Err(IndicatorError::NegativeCount(looks));
    }
    if comments < 0 {
        return Err(IndicatorError::NegativeCount(comments));
    }
    Ok((looks as f64).powf(0.25) + (comments as f64).sqrt())
}

/// Token polarity dictionary; nonempty by construction.
#[derive(Debug, Clone)]
pub struct Lexicon {
    polarities: HashMap<String, i8>,
}

impl Lexicon {
    pub fn new(polarities: HashMap<String, i8>) -> Result<Self, IndicatorError> {
        if polarities.is_empty() {
            return Err(IndicatorError::EmptyLexicon);
        }
        Ok(Self { polarities })
    }

    pub fn polarity(&self, token: &str) -> Option<i8> {
        self.polarities.get(token).copied()
    }

    /// Reads `token polarity` lines (whitespace separated, polarity +1 or
    /// -1, `#` comments allowed).
    pub fn load(path: &Path) -> Result<Self, IndicatorError> {
        let file = File::open(path).map_err(|e| IndicatorError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::read(file)
    }

    pub fn read<R: Read>(reader: R) -> Result<Self, IndicatorError> {
        let mut polarities = HashMap::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = i as u64 + 1;
            let line = line.map_err(|e| IndicatorError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().unwrap();
            let polarity = parts.next().ok_or_else(|| IndicatorError::Parse {
                line: line_no,
                message: "expected `token polarity`".to_string(),
            })?;
            let polarity = match polarity {
                "+1" | "1" => 1i8,
                "-1" => -1i8,
                other => {
                    return Err(IndicatorError::Parse {
                        line: line_no,
                        message: format!("polarity must be +1 or -1, got {other:?}"),
                    })
                }
            };
            polarities.insert(token.to_string(), polarity);
        }
        Self::new(polarities)
    }
}

/// Mean polarity of the tokens found in the lexicon; 0 when nothing
/// matches. Always lies in [-1, 1].
pub fn lexicon_sentiment(tokens: &[&str], lexicon: &Lexicon) -> f64 {
    let mut sum = 0i64;
    let mut matched = 0i64;
    for token in tokens {
        if let Some(p) = lexicon.polarity(token) {
            sum += p as i64;
            matched += 1;
        }
    }
    if matched == 0 {
        0.0
    } else {
        sum as f64 / matched as f64
    }
}

/// Influence-weighted sum of post sentiments; the empty list scores 0.
/// With `normalize` the sum is divided by the total influence instead.
pub fn company_opinion_score(posts: &[OpinionPost], normalize: bool) -> f64 {
    let weighted: f64 = posts.iter().map(|p| p.sentiment() * p.influence()).sum();
    if !normalize {
        return weighted;
    }
    let total: f64 = posts.iter().map(OpinionPost::influence).sum();
    if total == 0.0 {
        0.0
    } else {
        weighted / total
    }
}

// ---------------------------------------------------------------------------
// Auxiliary input files
// ---------------------------------------------------------------------------

/// How the sentiment column of the posts file is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentimentMode {
    /// The column already holds a numeric score in [-1, 1].
    Scored,
    /// The column holds whitespace-separated tokens scored via a lexicon.
    Lexicon,
}

/// Reads a posts file with columns `(company id, sentiment, looks,
/// comments)` into per-company post lists. In [`SentimentMode::Lexicon`]
/// mode a lexicon must be supplied.
pub fn read_posts<R: Read>(
    reader: R,
    delimiter: u8,
    mode: SentimentMode,
    lexicon: Option<&Lexicon>,
) -> Result<HashMap<String, Vec<OpinionPost>>, IndicatorError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut posts: HashMap<String, Vec<OpinionPost>> = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| IndicatorError::Parse {
            line: e.position().map(csv::Position::line).unwrap_or_default(),
            message: e.to_string(),
        })?;
        let line = record.position().map(csv::Position::line).unwrap_or_default();
        if record.len() != 4 {
            return Err(IndicatorError::Parse {
                line,
                message: format!("expected 4 columns (id, sentiment, looks, comments), got {}", record.len()),
            });
        }
        let id = record[0].to_string();
        let sentiment = match mode {
            SentimentMode::Scored => record[1].parse::<f64>().map_err(|_| IndicatorError::Parse {
                line,
                message: format!("cannot parse sentiment {:?}", &record[1]),
            })?,
            SentimentMode::Lexicon => {
                let lexicon = lexicon.ok_or(IndicatorError::EmptyLexicon)?;
                let tokens: Vec<&str> = record[1].split_whitespace().collect();
                lexicon_sentiment(&tokens, lexicon)
            }
        };
        let parse_count = |cell: &str| -> Result<u64, IndicatorError> {
            cell.parse::<u64>().map_err(|_| IndicatorError::Parse {
                line,
                message: format!("cannot parse count {cell:?}"),
            })
        };
        let looks = parse_count(&record[2])?;
        let comments = parse_count(&record[3])?;
        posts.entry(id).or_default().push(OpinionPost::new(sentiment, looks, comments)?);
    }
    Ok(posts)
}

pub fn load_posts(
    path: &Path,
    delimiter: u8,
    mode: SentimentMode,
    lexicon: Option<&Lexicon>,
) -> Result<HashMap<String, Vec<OpinionPost>>, IndicatorError> {
    let file = File::open(path).map_err(|e| IndicatorError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_posts(file, delimiter, mode, lexicon)
}

/// One line of the accounting file: a company id, its audit opinion (when
/// reported) and the Jones inputs (when complete).
#[derive(Debug, Clone)]
pub struct AccountingRecord {
    pub id: String,
    pub audit: Option<AuditOpinion>,
    pub jones: Option<JonesInputRow>,
}

/// Reads the accounting file with columns `(id, audit_opinion,
/// total_assets_prev, operating_profit, operating_cash_flow,
/// delta_revenue, delta_receivables, fixed_assets_closing)`.
///
/// Empty cells leave the corresponding indicator missing for that company;
/// a non-empty but unrecognized audit opinion or a non-positive asset base
/// is an error.
pub fn read_accounting<R: Read>(reader: R, delimiter: u8) -> Result<Vec<AccountingRecord>, IndicatorError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| IndicatorError::Parse {
            line: e.position().map(csv::Position::line).unwrap_or_default(),
            message: e.to_string(),
        })?;
        let line = record.position().map(csv::Position::line).unwrap_or_default();
        if record.len() != 8 {
            return Err(IndicatorError::Parse {
                line,
                message: format!("expected 8 columns, got {}", record.len()),
            });
        }
        let id = record[0].to_string();
        let audit = if record[1].is_empty() {
            None
        } else {
            Some(AuditOpinion::parse(&record[1])?)
        };
        let numeric: Vec<Option<f64>> = (2..8)
            .map(|i| {
                let cell = &record[i];
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>().map(Some).map_err(|_| IndicatorError::Parse {
                        line,
                        message: format!("cannot parse {cell:?} as a number"),
                    })
                }
            })
            .collect::<Result<_, _>>()?;
        let jones = if numeric.iter().all(Option::is_some) {
            Some(JonesInputRow::new(
                numeric[0].unwrap(),
                numeric[1].unwrap(),
                numeric[2].unwrap(),
                numeric[3].unwrap(),
                numeric[4].unwrap(),
                numeric[5].unwrap(),
            )?)
        } else {
            None
        };
        out.push(AccountingRecord { id, audit, jones });
    }
    Ok(out)
}

pub fn load_accounting(path: &Path, delimiter: u8) -> Result<Vec<AccountingRecord>, IndicatorError> {
    let file = File::open(path).map_err(|e| IndicatorError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_accounting(file, delimiter)
}
