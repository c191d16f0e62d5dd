//! Canonical report documents.
//!
//! Reports serialize to JSON with sorted keys and floats rounded to 12
//! significant digits, so two runs with identical inputs emit byte-identical
//! files. CSV mode writes one table per populated section plus a manifest.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::attribution::{AttributionMethod, AttributionResult};
use crate::axioms::{AuditReport, AxiomVerdict, GridAuditReport};
use crate::error::{Error, Result};
use crate::monotonicity::MonotonicityReport;
use crate::space::FeatureSpace;

pub const REPORT_VERSION: u32 = 1;

/// One attribution vector with its context, ready for tabulation.
#[derive(Debug, Clone, Serialize)]
pub struct AttributionTable {
    pub label: String,
    pub method: AttributionMethod,
    pub explicand: Vec<f64>,
    pub features: Vec<String>,
    pub values: Vec<f64>,
    pub completeness_gap: f64,
}

impl AttributionTable {
    pub fn from_result(
        label: impl Into<String>,
        space: &FeatureSpace,
        r: &AttributionResult,
    ) -> Self {
        Self {
            label: label.into(),
            method: r.method(),
            explicand: r.explicand().coords().to_vec(),
            features: space.names().to_vec(),
            values: r.values().to_vec(),
            completeness_gap: r.completeness_gap(),
        }
    }
}

/// A labeled series of values, e.g. one bar chart.
#[derive(Debug, Clone, Serialize)]
pub struct PlotSeries {
    pub id: String,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
}

impl PlotSeries {
    /// Bar-chart data for one instance explanation.
    pub fn from_table(table: &AttributionTable) -> Self {
        Self {
            id: format!("{}::{}", table.label, table.method),
            labels: table.features.clone(),
            values: table.values.clone(),
        }
    }
}

/// The full report document.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub version: u32,
    pub model_id: String,
    pub baseline: Vec<f64>,
    pub attributions: Vec<AttributionTable>,
    pub monotonicity: Vec<MonotonicityReport>,
    pub verdicts: Vec<AxiomVerdict>,
    pub grid: Option<GridAuditReport>,
    pub series: Vec<PlotSeries>,
}

impl ReportDocument {
    pub fn new(model_id: impl Into<String>, baseline: Vec<f64>) -> Self {
        Self {
            version: REPORT_VERSION,
            model_id: model_id.into(),
            baseline,
            attributions: Vec::new(),
            monotonicity: Vec::new(),
            verdicts: Vec::new(),
            grid: None,
            series: Vec::new(),
        }
    }

    pub fn push_attribution(&mut self, table: AttributionTable) {
        self.series.push(PlotSeries::from_table(&table));
        self.attributions.push(table);
    }

    pub fn attach_audit(&mut self, audit: AuditReport) {
        self.monotonicity.extend(audit.monotonicity);
        self.verdicts.extend(audit.verdicts);
    }

    pub fn attach_grid(&mut self, grid: GridAuditReport) {
        self.grid = Some(grid);
    }
}

/// Output format for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Rounds to `digits` significant decimal digits (used to pin the float
/// format of emitted reports).
pub fn round_sig(v: f64, digits: i32) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let magnitude = v.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits - 1 - magnitude);
    (v * factor).round() / factor
}

fn round_floats(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    if let Some(rounded) = serde_json::Number::from_f64(round_sig(f, 12)) {
                        *value = Value::Number(rounded);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// The canonical JSON text of a report: keys sorted, floats pinned to 12
/// significant digits, trailing newline.
pub fn canonical_json<T: Serialize>(document: &T) -> Result<String> {
    // Going through `Value` sorts object keys (the map is ordered).
    let mut value = serde_json::to_value(document)?;
    round_floats(&mut value);
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes the report. JSON mode writes one canonical file at `path`; CSV
/// mode writes `<path stem>.<section>.csv` per populated section plus a
/// `<path stem>.manifest.json` listing them.
pub fn emit_report(report: &ReportDocument, format: ReportFormat, path: &Path) -> Result<()> {
    match format {
        ReportFormat::Json => write_file(path, &canonical_json(report)?),
        ReportFormat::Csv => emit_csv(report, path),
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn fmt12(v: f64) -> String {
    format!("{}", round_sig(v, 12))
}

fn emit_csv(report: &ReportDocument, path: &Path) -> Result<()> {
    let stem = path.with_extension("");
    let stem = stem.to_string_lossy();
    let mut manifest: Vec<Value> = Vec::new();

    if !report.attributions.is_empty() {
        let file = format!("{stem}.attributions.csv");
        let mut out = String::from("table,method,feature,value,completeness_gap\n");
        for t in &report.attributions {
            for (name, value) in t.features.iter().zip(&t.values) {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    csv_escape(&t.label),
                    t.method,
                    csv_escape(name),
                    fmt12(*value),
                    fmt12(t.completeness_gap),
                ));
            }
        }
        write_file(Path::new(&file), &out)?;
        manifest.push(serde_json::json!({"section": "attributions", "file": file}));
    }

    if !report.monotonicity.is_empty() {
        let file = format!("{stem}.monotonicity.csv");
        let mut out = String::from("property,verdict,checked,violations\n");
        for m in &report.monotonicity {
            out.push_str(&format!(
                "{},{},{},{}\n",
                m.property, m.verdict, m.checked, m.violations
            ));
        }
        write_file(Path::new(&file), &out)?;
        manifest.push(serde_json::json!({"section": "monotonicity", "file": file}));
    }

    if !report.verdicts.is_empty() {
        let file = format!("{stem}.verdicts.csv");
        let mut out =
            String::from("method,axiom,verdict,checked,skipped,violations,max_completeness_gap\n");
        for v in &report.verdicts {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                v.method,
                v.axiom,
                v.verdict,
                v.checked,
                v.skipped,
                v.violations,
                fmt12(v.max_completeness_gap),
            ));
        }
        write_file(Path::new(&file), &out)?;
        manifest.push(serde_json::json!({"section": "verdicts", "file": file}));
    }

    if let Some(grid) = &report.grid {
        let file = format!("{stem}.grid.csv");
        let mut out = String::from("point,method,feature,value,violations\n");
        for p in &grid.points {
            let point = p
                .levels
                .iter()
                .map(|v| fmt12(*v))
                .collect::<Vec<_>>()
                .join(";");
            for (method, values, violations) in [
                ("IG", &p.ig_values, p.ig_violations.len()),
                ("BShap", &p.bshap_values, p.bshap_violations.len()),
            ] {
                for (i, value) in values.iter().enumerate() {
                    out.push_str(&format!(
                        "{point},{method},{i},{},{violations}\n",
                        fmt12(*value)
                    ));
                }
            }
        }
        write_file(Path::new(&file), &out)?;
        manifest.push(serde_json::json!({"section": "grid", "file": file}));
    }

    if !report.series.is_empty() {
        let file = format!("{stem}.series.csv");
        let mut out = String::from("series,label,value\n");
        for s in &report.series {
            for (label, value) in s.labels.iter().zip(&s.values) {
                out.push_str(&format!(
                    "{},{},{}\n",
                    csv_escape(&s.id),
                    csv_escape(label),
                    fmt12(*value)
                ));
            }
        }
        write_file(Path::new(&file), &out)?;
        manifest.push(serde_json::json!({"section": "series", "file": file}));
    }

    let manifest_path = format!("{stem}.manifest.json");
    let doc = serde_json::json!({"version": REPORT_VERSION, "tables": manifest});
    write_file(Path::new(&manifest_path), &canonical_json(&doc)?)
}
