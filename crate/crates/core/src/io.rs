//! Dataset and configuration loading, report emission.
//!
//! # Dataset
//!
//! Comma-separated UTF-8 text with a header row. Each header names one
//! dimension, in column order. A first column headed `id` or `person_id`
//! (any case) is read as a person identifier instead of an achievement.
//! Cells must be finite nonnegative decimals; empty cells are rejected.
//!
//! ```text
//! id,health,education
//! a,5,10
//! b,10,10
//! ```
//!
//! # Configuration
//!
//! A TOML document (or JSON when the file name ends in `.json`):
//!
//! ```toml
//! alpha = 1.0                         # required, >= 0
//! cutoffs = [10.0, 10.0]              # required, one per dimension, > 0
//! matrix = [[1.0, 0.5], [0.0, 1.0]]   # optional, defaults to the identity
//! weights = [1.0, 1.0]                # optional, defaults to uniform
//! k = 1.0                             # optional, see below
//! k_mode = "absolute"                 # "absolute" (default) or "fraction"
//! ```
//!
//! With `k_mode = "fraction"`, `k` is a share in `(0, 1]` of the score
//! ceiling. Without `k`, the cutoff is the smallest nonzero attainable count,
//! so anyone deprived in at least one dimension is poor.
//!
//! # Report
//!
//! JSON with a fixed field order. Summary figures are rounded to 12
//! significant digits. Per-person records and the `config` section are
//! written at full precision (shortest round-trip form), so the aggregate can
//! be recomputed from the records and the config loaded back with
//! [`load_config`].

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregation::{censored_scores, fgt_naive};
use crate::bounds::{min_nonzero_score, summarize};
use crate::deprivation::deprivation_matrix;
use crate::error::{Error, Result};
use crate::identification::headcount_ratio;
use crate::model::{
    validate_weights, AchievementMatrix, CutoffVector, DependenceStructure, MethodologyConfig,
    WeightVector,
};

pub const NAIVE_LABEL: &str = "naive (manipulable)";

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Round to 12 significant digits. Zero and non-finite values pass through.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn round_all(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| round_sig(x)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub ids: Option<Vec<String>>,
    pub dimensions: Vec<String>,
    pub matrix: AchievementMatrix,
}

fn is_id_header(h: &str) -> bool {
    h.eq_ignore_ascii_case("id") || h.eq_ignore_ascii_case("person_id")
}

/// Parse dataset text. Rows and columns in errors are 1-based; row 1 is the
/// first data row and columns count every field including the identifier.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::ParseError {
            row: 0,
            column: 0,
            message: e.to_string(),
        })?
        .clone();
    if headers.iter().all(str::is_empty) {
        return Err(Error::EmptyDataset);
    }
    let has_id = headers.get(0).is_some_and(is_id_header);
    let offset = usize::from(has_id);
    let dimensions: Vec<String> = headers.iter().skip(offset).map(str::to_string).collect();
    if dimensions.is_empty() {
        return Err(Error::ShapeMismatch(
            "dataset has no achievement columns".into(),
        ));
    }

    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::ParseError {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(Error::RaggedRow {
                row,
                found: record.len(),
                expected: headers.len(),
            });
        }
        if has_id {
            ids.push(record[0].to_string());
        }
        let mut values = Vec::with_capacity(dimensions.len());
        for (c, cell) in record.iter().enumerate().skip(offset) {
            let column = c + 1;
            if cell.is_empty() {
                return Err(Error::ParseError {
                    row,
                    column,
                    message: "missing value".into(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::ParseError {
                row,
                column,
                message: format!("{cell:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::ParseError {
                    row,
                    column,
                    message: format!("{cell:?} is not finite"),
                });
            }
            if v < 0.0 {
                return Err(Error::NegativeAchievement {
                    row,
                    col: column,
                    value: v,
                });
            }
            values.push(v);
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let matrix = AchievementMatrix::new(rows)?;
    Ok(Dataset {
        ids: has_id.then_some(ids),
        dimensions,
        matrix,
    })
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_dataset(&text)
}

pub fn load_dataset(path: &Path) -> Result<AchievementMatrix> {
    read_dataset(path).map(|d| d.matrix)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KMode {
    #[default]
    Absolute,
    Fraction,
}

/// How the identification cutoff is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KSpec {
    Absolute(f64),
    Fraction(f64),
}

/// The configuration file as written, before validation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_mode: Option<KMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl ConfigDocument {
    /// Exact echo of a validated configuration with an absolute `k`.
    pub fn from_config(c: &MethodologyConfig) -> Self {
        Self {
            alpha: Some(c.alpha()),
            k: Some(c.k()),
            k_mode: Some(KMode::Absolute),
            cutoffs: Some(c.cutoffs().as_slice().to_vec()),
            matrix: Some(c.structure().to_rows()),
            weights: Some(c.weights().as_slice().to_vec()),
        }
    }

    pub fn dimension_count(&self) -> Result<usize> {
        self.matrix
            .as_ref()
            .map(Vec::len)
            .or(self.cutoffs.as_ref().map(Vec::len))
            .or(self.weights.as_ref().map(Vec::len))
            .ok_or_else(|| Error::MissingField("cutoffs".into()))
    }

    pub fn structure(&self) -> Result<DependenceStructure> {
        match &self.matrix {
            Some(rows) => DependenceStructure::new(rows),
            None => DependenceStructure::identity(self.dimension_count()?),
        }
    }

    pub fn weight_vector(&self, d: usize) -> Result<WeightVector> {
        match &self.weights {
            Some(w) => validate_weights(w, d),
            None => Ok(WeightVector::uniform(d)),
        }
    }

    pub fn k_spec(&self) -> Option<KSpec> {
        self.k.map(|k| match self.k_mode.unwrap_or_default() {
            KMode::Absolute => KSpec::Absolute(k),
            KMode::Fraction => KSpec::Fraction(k),
        })
    }

    /// Validate into a configuration. `alpha` and `k` override the document.
    pub fn resolve(&self, alpha: Option<f64>, k: Option<KSpec>) -> Result<MethodologyConfig> {
        let alpha = alpha
            .or(self.alpha)
            .ok_or_else(|| Error::MissingField("alpha".into()))?;
        let z = self
            .cutoffs
            .clone()
            .ok_or_else(|| Error::MissingField("cutoffs".into()))?;
        let z = CutoffVector::new(z)?;
        let m = self.structure()?;
        let w = self.weight_vector(m.d())?;
        match k.or_else(|| self.k_spec()) {
            Some(KSpec::Absolute(k)) => MethodologyConfig::new(alpha, k, m, w, z),
            Some(KSpec::Fraction(f)) => MethodologyConfig::with_k_fraction(alpha, f, m, w, z),
            None => {
                let k = min_nonzero_score(&m, &w);
                MethodologyConfig::new(alpha, k, m, w, z)
            }
        }
    }
}

pub fn parse_config_document(text: &str, json: bool) -> Result<ConfigDocument> {
    if json {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    } else {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }
}

pub fn read_config_document(path: &Path) -> Result<ConfigDocument> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    parse_config_document(&text, json)
}

pub fn load_config(path: &Path) -> Result<MethodologyConfig> {
    read_config_document(path)?.resolve(None, None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonRecord {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    /// Deprivation count D_i.
    pub count: f64,
    pub poor: bool,
    /// Weighted scores w_j·D_ij^α, before censoring.
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveValue {
    pub label: String,
    pub value: f64,
    pub numerator: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Software {
    pub name: String,
    pub version: String,
}

impl Default for Software {
    fn default() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovertyReport {
    pub fgt_value: f64,
    pub headcount_ratio: f64,
    pub poor_count: usize,
    pub n: usize,
    pub dimensions: Vec<String>,
    pub d_bar: f64,
    pub d_under: f64,
    pub d_tilde: f64,
    pub score_ceiling: f64,
    pub deltas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub naive: Option<NaiveValue>,
    pub persons: Vec<PersonRecord>,
    pub config: ConfigDocument,
    pub software: Software,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReportOptions {
    pub diagnostic_naive: bool,
}

pub fn run_report(
    dataset: &Dataset,
    config: &MethodologyConfig,
    options: ReportOptions,
) -> Result<PovertyReport> {
    let y = &dataset.matrix;
    let c = censored_scores(y, config)?;
    let fgt = crate::aggregation::fgt_network_adjusted(y, config)?;
    let scores = deprivation_matrix(
        y,
        config.cutoffs(),
        config.structure(),
        config.alpha(),
        Some(config.weights()),
    )?;
    let bounds = summarize(config.structure(), config.weights());
    let naive = if options.diagnostic_naive {
        let r = fgt_naive(
            y,
            config.cutoffs(),
            config.structure(),
            config.alpha(),
            config.k(),
        )?;
        Some(NaiveValue {
            label: NAIVE_LABEL.into(),
            value: round_sig(r.value),
            numerator: round_sig(r.numerator),
        })
    } else {
        None
    };
    let persons = (0..y.n())
        .map(|i| PersonRecord {
            index: i + 1,
            id: dataset.ids.as_ref().map(|ids| ids[i].clone()),
            count: c.counts.as_slice()[i],
            poor: c.statuses.is_poor(i),
            scores: scores.row(i).to_vec(),
        })
        .collect();
    Ok(PovertyReport {
        fgt_value: round_sig(fgt.value),
        headcount_ratio: round_sig(headcount_ratio(&c.statuses)),
        poor_count: c.statuses.poor_count(),
        n: y.n(),
        dimensions: dataset.dimensions.clone(),
        d_bar: round_sig(bounds.d_bar),
        d_under: round_sig(bounds.d_under),
        d_tilde: round_sig(bounds.d_tilde),
        score_ceiling: round_sig(bounds.score_ceiling),
        deltas: round_all(&bounds.deltas),
        naive,
        persons,
        config: ConfigDocument::from_config(config),
        software: Software::default(),
    })
}

/// Recompute the aggregate from the per-person records and the config echo.
pub fn recompute_fgt(report: &PovertyReport) -> Result<f64> {
    let config = report.config.resolve(None, None)?;
    let ceiling = crate::bounds::score_ceiling(config.structure(), config.weights());
    let numerator = crate::aggregation::exact_sum(
        report
            .persons
            .iter()
            .filter(|p| p.poor)
            .flat_map(|p| p.scores.iter().copied()),
    );
    Ok(numerator / (report.persons.len() as f64 * ceiling))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn render_report(report: &PovertyReport) -> Result<String> {
    to_json(report)
}

/// One row per person: index, optional id, count, poor flag, one score column per dimension.
pub fn render_person_table(report: &PovertyReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let has_id = report.persons.iter().any(|p| p.id.is_some());
    let mut header = vec!["index".to_string()];
    if has_id {
        header.push("id".into());
    }
    header.extend(["count".to_string(), "poor".to_string()]);
    header.extend(report.dimensions.iter().map(|d| format!("score_{d}")));
    let csv_err = |e: csv::Error| Error::Config(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for p in &report.persons {
        let mut rec = vec![p.index.to_string()];
        if has_id {
            rec.push(p.id.clone().unwrap_or_default());
        }
        rec.push(p.count.to_string());
        rec.push(u8::from(p.poor).to_string());
        rec.extend(p.scores.iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Write to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_error(p, e)),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| io_error(Path::new("<stdout>"), e))
        }
    }
}
