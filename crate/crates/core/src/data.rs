//! Datasets: credit-scoring CSV ingestion, deterministic synthetic
//! generation, and train/test splitting.

use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::additive::{sigmoid, AdditiveMonotoneModel, GroupSubnet, MonotoneLink, SingleSubnet};
use crate::error::{Error, Result};
use crate::sampling::sample_rng;
use crate::space::FeatureSpace;

/// A labeled feature matrix bound to a schema.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: Arc<FeatureSpace>,
    /// Row-major `n x dim`.
    features: Vec<f64>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(schema: Arc<FeatureSpace>, features: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        let dim = schema.dim();
        if labels.len() * dim != features.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * dim,
                actual: features.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::Parameter(format!("label {bad} is not binary")));
        }
        Ok(Self {
            schema,
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.schema.dim()
    }

    pub fn schema(&self) -> &Arc<FeatureSpace> {
        &self.schema
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.features[i * d..(i + 1) * d]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Fraction of positive labels.
    pub fn prevalence(&self) -> f64 {
        self.labels.iter().filter(|&&y| y == 1).count() as f64 / self.len() as f64
    }

    fn subset(&self, indices: &[usize]) -> Self {
        let d = self.dim();
        let mut features = Vec::with_capacity(indices.len() * d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            schema: Arc::clone(&self.schema),
            features,
            labels,
        }
    }
}

/// Seeded shuffle followed by a `floor(ratio * n)` / rest split (the train
/// side takes the floor). The parts are disjoint and exhaustive.
pub fn split(data: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(0.0 < ratio && ratio < 1.0) {
        return Err(Error::Parameter(format!(
            "split ratio must lie strictly between 0 and 1, got {ratio}"
        )));
    }
    if data.len() < 2 {
        return Err(Error::Parameter(
            "dataset must have at least 2 rows to split".into(),
        ));
    }
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    let train_n = ((data.len() as f64) * ratio).floor() as usize;
    let train_n = train_n.clamp(1, data.len() - 1);
    Ok((
        data.subset(&order[..train_n]),
        data.subset(&order[train_n..]),
    ))
}

// --- credit-scoring schema -------------------------------------------------

/// Canonical feature order of the credit schema.
pub const CREDIT_FEATURES: [&str; 9] = [
    "past_due_90",
    "past_due_60_89",
    "past_due_30_59",
    "revolving_utilization",
    "debt_ratio",
    "monthly_income",
    "open_credit_lines",
    "real_estate_loans",
    "dependents",
];

/// Count features capped at this value during ingestion.
pub const PAST_DUE_CAP: f64 = 4.0;

/// The fixed schema used by the synthetic generator (ingested data gets a
/// schema fitted to its observed ranges instead).
pub fn credit_feature_space() -> Arc<FeatureSpace> {
    Arc::new(
        FeatureSpace::new(
            CREDIT_FEATURES.iter().map(|s| s.to_string()).collect(),
            vec![0.0; 9],
            vec![4.0, 4.0, 4.0, 1.0, 3.0, 50_000.0, 20.0, 6.0, 8.0],
        )
        .expect("static schema"),
    )
}

// --- synthetic generation ---------------------------------------------------

/// Inverse-CDF of a geometric distribution (success probability `p`),
/// truncated at `cap`: `floor(ln(1 - u) / ln(1 - p))`.
fn geometric_capped(u: f64, p: f64, cap: f64) -> f64 {
    let k = ((1.0 - u).ln() / (1.0 - p).ln()).floor();
    k.min(cap).max(0.0)
}

/// Inverse-CDF of a Kumaraswamy(a, b) distribution on [0, 1]:
/// `(1 - (1 - u)^(1/b))^(1/a)` — a beta-like bounded draw in closed form.
fn kumaraswamy(u: f64, a: f64, b: f64) -> f64 {
    (1.0 - (1.0 - u).powf(1.0 / b)).powf(1.0 / a)
}

/// Log-logistic draw: `exp(mu + s * ln(u / (1 - u)))`, clamped to `[0, hi]`.
fn log_logistic(u: f64, mu: f64, s: f64, hi: f64) -> f64 {
    let u = u.clamp(1e-12, 1.0 - 1e-12);
    (mu + s * (u / (1.0 - u)).ln()).exp().clamp(0.0, hi)
}

/// The fixed scorer behind the synthetic labels: a hand-set additive
/// monotone model with the priority group on the three past-due counts.
/// Shipping it makes the best achievable ranking quality measurable.
pub fn ground_truth_model() -> AdditiveMonotoneModel {
    let space = credit_feature_space();
    let group = GroupSubnet::new(
        vec![0, 1, 2],
        // Derived weights (1.2, 0.8, 0.5): longer past dues weigh more.
        vec![0.4f64.sqrt(), 0.3f64.sqrt(), 0.5f64.sqrt()],
        MonotoneLink::new(
            0.5f64.sqrt(),
            vec![0.5f64.sqrt(), 0.4f64.sqrt()],
            vec![1.0, 2.5],
        )
        .expect("static link"),
    )
    .expect("static group");

    let single = |feature: usize, a: f64, b: f64, c: f64| {
        SingleSubnet::new(
            feature,
            false,
            [a, b, c, 0.0, 1.0, 0.0],
            credit_feature_space().lower()[feature],
            credit_feature_space().range(feature),
        )
        .expect("static single")
    };

    AdditiveMonotoneModel::new(
        "synthetic_ground_truth",
        &space,
        vec![group],
        vec![
            single(3, 1.2, 2.5, -1.0),  // utilization raises risk
            single(4, 0.8, 2.0, -0.6),  // debt ratio raises risk
            single(5, -1.5, 3.0, -0.4), // income lowers risk
            single(6, 0.4, 3.0, -1.8),  // open lines, mild late rise
            single(7, 0.3, 2.0, -0.8),  // real-estate loans
            single(8, 0.35, 2.5, -0.5), // dependents
        ],
        -1.9,
    )
    .expect("static model")
}

/// Deterministic synthetic credit dataset: features from documented
/// inverse-CDF transforms of per-row uniform streams, labels Bernoulli on
/// the shipped ground-truth scorer's probability.
pub fn gen_synthetic(n: usize, seed: u64) -> Result<Dataset> {
    if n < 100 {
        return Err(Error::Parameter(format!(
            "synthetic datasets start at 100 rows, got {n}"
        )));
    }
    let space = credit_feature_space();
    let truth = ground_truth_model();
    let mut features = Vec::with_capacity(n * space.dim());
    let mut labels = Vec::with_capacity(n);
    for row in 0..n as u64 {
        let mut rng = sample_rng(seed, row);
        let mut u = || rng.random::<f64>();
        let x = [
            geometric_capped(u(), 0.80, 4.0),
            geometric_capped(u(), 0.72, 4.0),
            geometric_capped(u(), 0.60, 4.0),
            kumaraswamy(u(), 1.1, 2.4),
            3.0 * kumaraswamy(u(), 1.15, 6.5),
            log_logistic(u(), 5400f64.ln(), 0.45, 50_000.0),
            geometric_capped(u(), 0.14, 20.0),
            geometric_capped(u(), 0.42, 6.0),
            geometric_capped(u(), 0.48, 8.0),
        ];
        let p = sigmoid(truth.value(&x));
        labels.push(u8::from(u() < p));
        features.extend_from_slice(&x);
    }
    Dataset::new(space, features, labels)
}

// --- CSV ingestion -----------------------------------------------------------

/// What to do with a row whose cells fail to parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BadRowPolicy {
    /// Abort ingestion with the offending line number.
    Fail,
    /// Drop the row and count it.
    Skip,
}

/// Header names accepted for each canonical column. The defaults cover the
/// public credit-scoring export and this crate's own short names; unmapped
/// columns are ignored (the age column is dropped explicitly and flagged).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub label: Vec<String>,
    /// Aliases per feature, in canonical feature order.
    pub features: Vec<Vec<String>>,
    pub drop: Vec<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        let strs = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Self {
            label: strs(&["SeriousDlqin2yrs", "y", "label"]),
            features: vec![
                strs(&["NumberOfTimes90DaysLate", "x1", "past_due_90"]),
                strs(&[
                    "NumberOfTime60-89DaysPastDueNotWorse",
                    "x2",
                    "past_due_60_89",
                ]),
                strs(&[
                    "NumberOfTime30-59DaysPastDueNotWorse",
                    "x3",
                    "past_due_30_59",
                ]),
                strs(&[
                    "RevolvingUtilizationOfUnsecuredLines",
                    "x4",
                    "revolving_utilization",
                ]),
                strs(&["DebtRatio", "x5", "debt_ratio"]),
                strs(&["MonthlyIncome", "x6", "monthly_income"]),
                strs(&["NumberOfOpenCreditLinesAndLoans", "x7", "open_credit_lines"]),
                strs(&["NumberRealEstateLoansOrLines", "x8", "real_estate_loans"]),
                strs(&["NumberOfDependents", "x9", "dependents"]),
            ],
            drop: strs(&["age"]),
        }
    }
}

/// Ingestion settings.
#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub mapping: ColumnMapping,
    pub on_bad_row: BadRowPolicy,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            mapping: ColumnMapping::default(),
            on_bad_row: BadRowPolicy::Fail,
        }
    }
}

/// Book-keeping from one ingestion run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct IngestSummary {
    pub rows_read: u64,
    pub rows_kept: u64,
    /// Rows dropped for missing values.
    pub dropped_missing: u64,
    /// Rows dropped for malformed cells (skip policy only).
    pub skipped_bad: u64,
    /// Count cells capped at [`PAST_DUE_CAP`].
    pub truncated_past_dues: u64,
    pub age_column_dropped: bool,
}

/// An ingested dataset plus its summary.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    pub summary: IngestSummary,
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan")
}

/// Reads the credit schema out of a CSV file. Rows with missing values are
/// dropped (and counted); the three past-due counts are capped at 4; an age
/// column, when present, is dropped with a flag. The returned schema is
/// fitted to the observed per-column ranges.
pub fn ingest_csv(path: &Path, config: &IngestConfig) -> Result<Ingested> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::Ingest(format!("cannot open `{}`: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Ingest(format!("cannot read header: {e}")))?
        .clone();

    let find = |aliases: &[String]| -> Option<usize> {
        headers
            .iter()
            .position(|h| aliases.iter().any(|a| a.eq_ignore_ascii_case(h.trim())))
    };

    let label_col = find(&config.mapping.label).ok_or_else(|| {
        Error::Ingest(format!(
            "no label column found (accepted: {})",
            config.mapping.label.join(", ")
        ))
    })?;
    let mut feature_cols = Vec::with_capacity(config.mapping.features.len());
    for (i, aliases) in config.mapping.features.iter().enumerate() {
        let col = find(aliases).ok_or_else(|| {
            Error::Ingest(format!(
                "no column for feature {} (accepted: {})",
                CREDIT_FEATURES.get(i).unwrap_or(&"?"),
                aliases.join(", ")
            ))
        })?;
        feature_cols.push(col);
    }
    let age_column_dropped = find(&config.mapping.drop).is_some();

    let dim = feature_cols.len();
    let mut summary = IngestSummary {
        age_column_dropped,
        ..IngestSummary::default()
    };
    let mut features: Vec<f64> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();

    'rows: for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        summary.rows_read += 1;

        let mut row = Vec::with_capacity(dim);
        let mut bad: Option<String> = None;
        for (i, &col) in feature_cols.iter().enumerate() {
            let cell = record.get(col).unwrap_or("");
            if is_missing(cell) {
                summary.dropped_missing += 1;
                continue 'rows;
            }
            match cell.trim().parse::<f64>() {
                Ok(mut v) if v.is_finite() => {
                    if v < 0.0 {
                        bad = Some(format!("negative value {v} in column {col}"));
                        break;
                    }
                    if i < 3 && v > PAST_DUE_CAP {
                        v = PAST_DUE_CAP;
                        summary.truncated_past_dues += 1;
                    }
                    row.push(v);
                }
                _ => {
                    bad = Some(format!("unparseable cell `{cell}` in column {col}"));
                    break;
                }
            }
        }
        if bad.is_none() {
            let cell = record.get(label_col).unwrap_or("");
            if is_missing(cell) {
                summary.dropped_missing += 1;
                continue 'rows;
            }
            match cell.trim().parse::<f64>() {
                Ok(v) if v == 0.0 || v == 1.0 => {
                    features.extend_from_slice(&row);
                    labels.push(v as u8);
                    summary.rows_kept += 1;
                    continue 'rows;
                }
                _ => bad = Some(format!("label `{cell}` is not 0/1")),
            }
        }
        let message = bad.unwrap_or_default();
        match config.on_bad_row {
            BadRowPolicy::Fail => return Err(Error::BadRow { line, message }),
            BadRowPolicy::Skip => summary.skipped_bad += 1,
        }
    }

    if labels.is_empty() {
        return Err(Error::Ingest(format!(
            "`{}` yielded no usable rows",
            path.display()
        )));
    }

    let schema = fitted_schema(&features, labels.len(), dim)?;
    let dataset = Dataset::new(schema, features, labels)?;
    Ok(Ingested { dataset, summary })
}

/// Schema covering the ingested rows. Lower bounds sit at zero (every
/// credit feature is nonnegative and the zero baseline must stay valid);
/// upper bounds take the canonical schema as a floor and pad 5% above the
/// observed maximum, so standard explicands remain in bounds even when the
/// file never reaches them.
fn fitted_schema(features: &[f64], n: usize, dim: usize) -> Result<Arc<FeatureSpace>> {
    let defaults = credit_feature_space();
    let mut upper = defaults.upper().to_vec();
    for r in 0..n {
        for c in 0..dim {
            let v = features[r * dim + c];
            upper[c] = upper[c].max(1.05 * v);
        }
    }
    Ok(Arc::new(FeatureSpace::new(
        CREDIT_FEATURES.iter().map(|s| s.to_string()).collect(),
        vec![0.0; dim],
        upper,
    )?))
}

/// Writes a dataset in the canonical credit layout (label first, then the
/// nine features under their primary header names). Floats are written in
/// shortest round-trip form, so `ingest_csv` reproduces the exact values.
pub fn write_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mapping = ColumnMapping::default();
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::Ingest(format!("cannot create `{}`: {e}", path.display())))?;
    let mut header = vec![mapping.label[0].clone()];
    header.extend(mapping.features.iter().map(|aliases| aliases[0].clone()));
    writer.write_record(&header)?;
    for i in 0..data.len() {
        let mut record = vec![data.label(i).to_string()];
        record.extend(data.row(i).iter().map(|v| v.to_string()));
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
