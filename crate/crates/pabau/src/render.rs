//! Rendering of cross-validation metrics as an aligned comparison table
//! (rows = algorithms, column groups = labels + Average) and as JSON.

use pabau_core::eval::MetricsReport;
use pabau_core::Label;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected text or json)")),
        }
    }
}

/// The four headline labels, in table order.
pub const HEADLINE_LABELS: [Label; 4] = [Label::Source, Label::Sink, Label::Authenticate, Label::Crypto];

fn short_name(label: Label) -> &'static str {
    match label {
        Label::Authenticate => "Auth",
        Label::Source => "Source",
        Label::Sink => "Sink",
        Label::Crypto => "Crypto",
        other => other.as_str(),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.4}"),
        None => "/".to_string(),
    }
}

/// Mean across labels of a per-label aggregate; undefined labels excluded.
fn label_average(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().filter_map(|v| *v).collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

fn render_block(
    report: &MetricsReport,
    labels: &[Label],
    title: &str,
    pick: impl Fn(pabau_core::eval::Aggregate) -> Option<f64>,
) -> String {
    let algorithms = report.algorithms();
    let col = 18usize;
    let name_w = algorithms.iter().map(|a| a.len()).max().unwrap_or(9).max(9);
    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    out.push_str(&format!("{:name_w$}", "Algorithm"));
    for &l in labels {
        out.push_str(&format!(" | {:^w$}", short_name(l), w = col));
    }
    out.push_str(&format!(" | {:^w$}\n", "Average", w = col));
    out.push_str(&format!("{:name_w$}", ""));
    for _ in 0..=labels.len() {
        out.push_str(&format!(" | {:<8} {:<9}", "P", "R"));
    }
    out.push('\n');
    for algo in &algorithms {
        out.push_str(&format!("{algo:name_w$}"));
        let mut ps = Vec::new();
        let mut rs = Vec::new();
        for &l in labels {
            let p = pick(report.precision(algo, l));
            let r = pick(report.recall(algo, l));
            ps.push(p);
            rs.push(r);
            out.push_str(&format!(" | {:<8} {:<9}", fmt_opt(p), fmt_opt(r)));
        }
        out.push_str(&format!(
            " | {:<8} {:<9}",
            fmt_opt(label_average(&ps)),
            fmt_opt(label_average(&rs))
        ));
        out.push('\n');
    }
    out
}

/// Aligned text comparison: median block then mean block, headline labels by
/// default, every label with `full`.
pub fn render_comparison_text(report: &MetricsReport, full: bool) -> String {
    let labels: Vec<Label> =
        if full { Label::ALL.to_vec() } else { HEADLINE_LABELS.to_vec() };
    let mut out = format!(
        "Cross-validation: k={} repeats={} seed={}\n\n",
        report.k, report.repeats, report.seed
    );
    out.push_str(&render_block(report, &labels, "Median precision/recall over repeats", |a| {
        a.median
    }));
    out.push('\n');
    out.push_str(&render_block(report, &labels, "Mean precision/recall over repeats", |a| a.mean));
    if !report.warnings.is_empty() {
        out.push('\n');
        for w in &report.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
    }
    out
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RowDoc {
    algorithm: String,
    label: String,
    repeat: u32,
    precision: Option<f64>,
    recall: Option<f64>,
    tp: u64,
    fp: u64,
    #[serde(rename = "fn")]
    fn_: u64,
    tn: u64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SummaryDoc {
    algorithm: String,
    label: String,
    precision_mean: Option<f64>,
    precision_median: Option<f64>,
    recall_mean: Option<f64>,
    recall_median: Option<f64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AverageDoc {
    algorithm: String,
    precision_mean: Option<f64>,
    recall_mean: Option<f64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ReportDoc {
    k: usize,
    repeats: u32,
    seed: u64,
    rows: Vec<RowDoc>,
    summary: Vec<SummaryDoc>,
    averages: Vec<AverageDoc>,
    warnings: Vec<String>,
}

/// Machine-readable report; deterministic for identical inputs.
pub fn render_comparison_json(report: &MetricsReport, full: bool) -> String {
    let labels: Vec<Label> =
        if full { Label::ALL.to_vec() } else { HEADLINE_LABELS.to_vec() };
    let algorithms = report.algorithms();
    let rows = report
        .rows
        .iter()
        .map(|r| RowDoc {
            algorithm: r.algorithm.clone(),
            label: r.label.as_str().to_string(),
            repeat: r.repeat,
            precision: r.counts.precision(),
            recall: r.counts.recall(),
            tp: r.counts.tp,
            fp: r.counts.fp,
            fn_: r.counts.fn_,
            tn: r.counts.tn,
        })
        .collect();
    let mut summary = Vec::new();
    let mut averages = Vec::new();
    for algo in &algorithms {
        let mut ps = Vec::new();
        let mut rs = Vec::new();
        for &l in &labels {
            let p = report.precision(algo, l);
            let r = report.recall(algo, l);
            ps.push(p.mean);
            rs.push(r.mean);
            summary.push(SummaryDoc {
                algorithm: algo.clone(),
                label: l.as_str().to_string(),
                precision_mean: p.mean,
                precision_median: p.median,
                recall_mean: r.mean,
                recall_median: r.median,
            });
        }
        averages.push(AverageDoc {
            algorithm: algo.clone(),
            precision_mean: label_average(&ps),
            recall_mean: label_average(&rs),
        });
    }
    let doc = ReportDoc {
        k: report.k,
        repeats: report.repeats,
        seed: report.seed,
        rows,
        summary,
        averages,
        warnings: report.warnings.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

pub fn render_comparison(report: &MetricsReport, format: OutputFormat, full: bool) -> String {
    match format {
        OutputFormat::Text => render_comparison_text(report, full),
        OutputFormat::Json => render_comparison_json(report, full),
    }
}
