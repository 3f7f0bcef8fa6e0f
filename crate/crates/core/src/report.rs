//! Metric report assembly and emission.
//!
//! A [`MetricsReport`] mirrors the benchmark's table shapes: dense
//! captioning (P/R/F1 per IoU threshold plus caption scores), procedure
//! accuracy, coarse segmentation (F1 columns plus average coverage and hit
//! ratio), missing-action detection, and order-error hit ratios. Writers
//! are deterministic: identical reports produce byte-identical files.
//! CSV follows RFC 4180; markdown tables are pipe-delimited; the structured
//! JSON format keeps full float precision while CSV and markdown round to
//! three decimals.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{HitRatioResult, ThresholdedPrf};
use crate::responses::TaskKind;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcedureAccuracyRow {
    pub model: String,
    /// Fraction in [0, 1]; rendered as a percentage column.
    pub top1_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseSegmentationRow {
    pub model: String,
    pub prf: Vec<ThresholdedPrf>,
    pub avg_coverage: f64,
    pub avg_hit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseCaptioningRow {
    pub model: String,
    pub prf: Vec<ThresholdedPrf>,
    pub rouge_l: f64,
    pub token_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingActionRow {
    pub model: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub hits: Vec<HitRatioResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderErrorRow {
    pub model: String,
    pub hits: Vec<HitRatioResult>,
}

/// A prediction that could not be used and was scored as a total miss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseFailureNote {
    pub task: TaskKind,
    pub sample_id: String,
    pub reason: String,
}

/// All report blocks; empty blocks are omitted from output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub procedure_accuracy: Vec<ProcedureAccuracyRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coarse_segmentation: Vec<CoarseSegmentationRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dense_captioning: Vec<DenseCaptioningRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing_action: Vec<MissingActionRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub order_errors: Vec<OrderErrorRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parse_failures: Vec<ParseFailureNote>,
}

impl Default for MetricsReport {
    fn default() -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            procedure_accuracy: vec![],
            coarse_segmentation: vec![],
            dense_captioning: vec![],
            missing_action: vec![],
            order_errors: vec![],
            parse_failures: vec![],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" | "structured" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidConfig(format!(
                "unknown report format '{other}'"
            ))),
        }
    }
}

/// Threshold/tolerance column labels: one decimal for round values,
/// shortest form otherwise (`0.3`, `1.0`, `0.25`).
fn fmt_level(v: f64) -> String {
    if (v * 10.0).fract().abs() < 1e-9 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

fn fmt3(v: f64) -> String {
    format!("{v:.3}")
}

struct Cell {
    text: String,
    num: Option<f64>,
}

impl Cell {
    fn text(s: impl Into<String>) -> Self {
        Cell {
            text: s.into(),
            num: None,
        }
    }

    fn num(v: f64) -> Self {
        Cell {
            text: fmt3(v),
            num: Some(v),
        }
    }
}

struct Table {
    /// File stem, e.g. `dense_captioning`.
    name: &'static str,
    headers: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

fn prf_headers(prefix_all: bool, prf: &[ThresholdedPrf]) -> Vec<String> {
    let mut headers = Vec::new();
    for p in prf {
        let level = fmt_level(p.threshold);
        if prefix_all {
            headers.push(format!("p@{level}"));
            headers.push(format!("r@{level}"));
        }
        headers.push(format!("f1@{level}"));
    }
    headers
}

fn check_uniform<'a, T, I>(rows: I, describe: &str) -> Result<()>
where
    T: PartialEq + std::fmt::Debug + 'a,
    I: Iterator<Item = &'a T>,
{
    let mut first: Option<&T> = None;
    for item in rows {
        match first {
            None => first = Some(item),
            Some(f) if f != item => {
                return Err(Error::InvalidConfig(format!(
                    "rows disagree on {describe}: {f:?} vs {item:?}"
                )))
            }
            _ => {}
        }
    }
    Ok(())
}

fn build_tables(report: &MetricsReport) -> Result<Vec<Table>> {
    let mut tables = Vec::new();

    if !report.procedure_accuracy.is_empty() {
        tables.push(Table {
            name: "procedure_accuracy",
            headers: vec!["model".into(), "top1_accuracy_pct".into()],
            rows: report
                .procedure_accuracy
                .iter()
                .map(|r| vec![Cell::text(&r.model), Cell::num(r.top1_accuracy * 100.0)])
                .collect(),
        });
    }

    if !report.coarse_segmentation.is_empty() {
        let ths: Vec<Vec<f64>> = report
            .coarse_segmentation
            .iter()
            .map(|r| r.prf.iter().map(|p| p.threshold).collect())
            .collect();
        check_uniform(ths.iter(), "IoU thresholds")?;
        let mut headers = vec!["model".to_string()];
        headers.extend(prf_headers(false, &report.coarse_segmentation[0].prf));
        headers.push("avg_cov".into());
        headers.push("avg_hit".into());
        tables.push(Table {
            name: "coarse_segmentation",
            headers,
            rows: report
                .coarse_segmentation
                .iter()
                .map(|r| {
                    let mut row = vec![Cell::text(&r.model)];
                    row.extend(r.prf.iter().map(|p| Cell::num(p.f1)));
                    row.push(Cell::num(r.avg_coverage));
                    row.push(Cell::num(r.avg_hit));
                    row
                })
                .collect(),
        });
    }

    if !report.dense_captioning.is_empty() {
        let ths: Vec<Vec<f64>> = report
            .dense_captioning
            .iter()
            .map(|r| r.prf.iter().map(|p| p.threshold).collect())
            .collect();
        check_uniform(ths.iter(), "IoU thresholds")?;
        let mut headers = vec!["model".to_string()];
        for p in &report.dense_captioning[0].prf {
            let level = fmt_level(p.threshold);
            headers.push(format!("p@{level}"));
            headers.push(format!("r@{level}"));
            headers.push(format!("f1@{level}"));
        }
        headers.push("rouge_l".into());
        headers.push("token_f1".into());
        tables.push(Table {
            name: "dense_captioning",
            headers,
            rows: report
                .dense_captioning
                .iter()
                .map(|r| {
                    let mut row = vec![Cell::text(&r.model)];
                    for p in &r.prf {
                        row.push(Cell::num(p.precision));
                        row.push(Cell::num(p.recall));
                        row.push(Cell::num(p.f1));
                    }
                    row.push(Cell::num(r.rouge_l));
                    row.push(Cell::num(r.token_f1));
                    row
                })
                .collect(),
        });
    }

    if !report.missing_action.is_empty() {
        let tols: Vec<Vec<f64>> = report
            .missing_action
            .iter()
            .map(|r| r.hits.iter().map(|h| h.tolerance).collect())
            .collect();
        check_uniform(tols.iter(), "hit tolerances")?;
        let mut headers = vec!["model".into(), "p".into(), "r".into(), "f1".into()];
        for h in &report.missing_action[0].hits {
            headers.push(format!("hit@{}s", fmt_level(h.tolerance)));
        }
        tables.push(Table {
            name: "missing_action",
            headers,
            rows: report
                .missing_action
                .iter()
                .map(|r| {
                    let mut row = vec![
                        Cell::text(&r.model),
                        Cell::num(r.precision),
                        Cell::num(r.recall),
                        Cell::num(r.f1),
                    ];
                    row.extend(r.hits.iter().map(|h| Cell::num(h.ratio)));
                    row
                })
                .collect(),
        });
    }

    if !report.order_errors.is_empty() {
        let tols: Vec<Vec<f64>> = report
            .order_errors
            .iter()
            .map(|r| r.hits.iter().map(|h| h.tolerance).collect())
            .collect();
        check_uniform(tols.iter(), "hit tolerances")?;
        let mut headers = vec!["model".to_string()];
        for h in &report.order_errors[0].hits {
            headers.push(format!("hit@{}s", fmt_level(h.tolerance)));
        }
        tables.push(Table {
            name: "order_errors",
            headers,
            rows: report
                .order_errors
                .iter()
                .map(|r| {
                    let mut row = vec![Cell::text(&r.model)];
                    row.extend(r.hits.iter().map(|h| Cell::num(h.ratio)));
                    row
                })
                .collect(),
        });
    }

    if !report.parse_failures.is_empty() {
        tables.push(Table {
            name: "parse_failures",
            headers: vec!["task".into(), "sample_id".into(), "reason".into()],
            rows: report
                .parse_failures
                .iter()
                .map(|f| {
                    vec![
                        Cell::text(f.task.to_string()),
                        Cell::text(&f.sample_id),
                        Cell::text(&f.reason),
                    ]
                })
                .collect(),
        });
    }

    Ok(tables)
}

fn sort_table(table: &mut Table, column: &str) {
    if let Some(ix) = table.headers.iter().position(|h| h == column) {
        table.rows.sort_by(|a, b| {
            let av = a[ix].num;
            let bv = b[ix].num;
            match (av, bv) {
                (Some(x), Some(y)) => x
                    .total_cmp(&y)
                    .then_with(|| a[0].text.cmp(&b[0].text)),
                _ => a[ix].text.cmp(&b[ix].text).then_with(|| a[0].text.cmp(&b[0].text)),
            }
        });
    }
}

/// Writes every non-empty block.
///
/// CSV and markdown emit one file per block (`<block>.csv` / `<block>.md`);
/// the structured format writes a single `report.json`. When `sort_by`
/// names a column, blocks containing that column are sorted by it
/// ascending. Returns the paths written.
pub fn write_report(
    report: &MetricsReport,
    format: ReportFormat,
    out_dir: &Path,
    sort_by: Option<&str>,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    if format == ReportFormat::Json {
        // Full precision; sorting is a presentation concern for the tables.
        let path = out_dir.join("report.json");
        std::fs::write(&path, serde_json::to_string_pretty(report)?)?;
        written.push(path);
        return Ok(written);
    }

    let mut tables = build_tables(report)?;
    if let Some(col) = sort_by {
        for table in &mut tables {
            sort_table(table, col);
        }
    }
    for table in &tables {
        let path = match format {
            ReportFormat::Csv => {
                let path = out_dir.join(format!("{}.csv", table.name));
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&table.headers)?;
                for row in &table.rows {
                    w.write_record(row.iter().map(|c| c.text.as_str()))?;
                }
                let bytes = w
                    .into_inner()
                    .map_err(|e| Error::ParseFailure(e.to_string()))?;
                std::fs::write(&path, bytes)?;
                path
            }
            ReportFormat::Markdown => {
                let path = out_dir.join(format!("{}.md", table.name));
                let mut out = String::new();
                out.push_str(&format!("| {} |\n", table.headers.join(" | ")));
                out.push_str(&format!(
                    "|{}\n",
                    table.headers.iter().map(|_| " --- |").collect::<String>()
                ));
                for row in &table.rows {
                    let cells: Vec<&str> = row.iter().map(|c| c.text.as_str()).collect();
                    out.push_str(&format!("| {} |\n", cells.join(" | ")));
                }
                std::fs::write(&path, out)?;
                path
            }
            ReportFormat::Json => unreachable!(),
        };
        written.push(path);
    }
    Ok(written)
}

/// Loads a structured report written by [`write_report`].
pub fn read_report(path: &Path) -> Result<MetricsReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    let report: MetricsReport = serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            detail: format!("unsupported schema_version {}", report.schema_version),
        });
    }
    Ok(report)
}
