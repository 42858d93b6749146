//! Markdown and CSV renderings of label distributions, cohort metrics and
//! threshold sweeps. Metrics use three decimals; rows whose Neutral class is
//! unreliable carry a `*`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use super::cv::Prediction;
use super::metrics::MetricsReport;
use super::slice::{slice_dataset, Cohort, SliceBy};
use super::sweep::SweepRow;
use crate::error::{Error, Result};
use crate::features::{Dataset, LabelCounts};
use crate::lexicon::SentimentLabel;
use crate::models::ClassifierKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Markdown => "md",
            ReportFormat::Csv => "csv",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidInput(format!("unknown report format {other:?}"))),
        }
    }
}

/// Cross-validated metrics of one classifier on one cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortMetrics {
    pub cohort: Cohort,
    pub kind: ClassifierKind,
    pub report: MetricsReport,
}

pub fn fmt3(x: f64) -> String {
    format!("{x:.3}")
}

fn csv_string(rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is utf-8")
}

fn strings<const N: usize>(cells: [&str; N]) -> Vec<String> {
    cells.iter().map(|s| s.to_string()).collect()
}

fn md_row(out: &mut String, cells: &[String]) {
    writeln!(out, "| {} |", cells.join(" | ")).unwrap();
}

fn md_table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    md_row(out, header);
    md_row(out, &vec!["---".to_string(); header.len()]);
    for r in rows {
        md_row(out, r);
    }
}

fn count_cells(c: &LabelCounts) -> [String; 4] {
    let pos = c[SentimentLabel::Positive.index()];
    let neg = c[SentimentLabel::Negative.index()];
    let neut = c[SentimentLabel::Neutral.index()];
    [pos, neg, neut, pos + neg + neut].map(|v| v.to_string())
}

/// Label counts per year and per university, each followed by an `All` row.
pub fn render_distribution(dataset: &Dataset, format: ReportFormat) -> String {
    let group = |by: SliceBy| -> Vec<(Cohort, LabelCounts)> {
        let mut rows: Vec<(Cohort, LabelCounts)> = slice_dataset(dataset, by)
            .into_iter()
            .map(|(c, d)| (c, d.label_counts()))
            .collect();
        if !dataset.is_empty() {
            rows.push((Cohort::All, dataset.label_counts()));
        }
        rows
    };
    let years = group(SliceBy::Year);
    let unis = group(SliceBy::University);
    match format {
        ReportFormat::Csv => {
            let mut rows = vec![strings(["group", "cohort", "positive", "negative", "neutral", "total"])];
            for (name, set) in [("year", &years), ("university", &unis)] {
                for (c, counts) in set {
                    let mut row = vec![name.to_string(), c.to_string()];
                    row.extend(count_cells(counts));
                    rows.push(row);
                }
            }
            csv_string(rows)
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            for (name, set) in [("Year", &years), ("University", &unis)] {
                if !out.is_empty() {
                    out.push('\n');
                }
                let header = strings([name, "Pos.", "Neg.", "Neut.", "Total"]);
                let rows: Vec<Vec<String>> = set
                    .iter()
                    .map(|(c, counts)| {
                        let mut row = vec![c.to_string()];
                        row.extend(count_cells(counts));
                        row
                    })
                    .collect();
                md_table(&mut out, &header, &rows);
            }
            out
        }
    }
}

fn star(report: &MetricsReport) -> &'static str {
    if report.starred() { "*" } else { "" }
}

/// Macro precision, recall and F1 per cohort and classifier. `all_label`
/// names the [`Cohort::All`] block in markdown, e.g. "All years".
pub fn render_cohort_table(rows: &[CohortMetrics], format: ReportFormat, all_label: &str) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = vec![strings([
                "cohort",
                "model",
                "macro_precision",
                "macro_recall",
                "macro_f1",
                "neutral_support",
                "starred",
            ])];
            for r in rows {
                out.push(vec![
                    r.cohort.to_string(),
                    r.kind.to_string(),
                    fmt3(r.report.macro_precision),
                    fmt3(r.report.macro_recall),
                    fmt3(r.report.macro_f1),
                    r.report.class(SentimentLabel::Neutral).support.to_string(),
                    r.report.starred().to_string(),
                ]);
            }
            csv_string(out)
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            md_row(&mut out, &strings(["", "Precision", "Recall", "F1-Score"]));
            md_row(&mut out, &strings(["---", "---", "---", "---"]));
            let mut current = None;
            for r in rows {
                if current != Some(r.cohort) {
                    let title = match r.cohort {
                        Cohort::All => all_label.to_string(),
                        c => c.to_string(),
                    };
                    md_row(&mut out, &[format!("**{title}**"), String::new(), String::new(), String::new()]);
                    current = Some(r.cohort);
                }
                let s = star(&r.report);
                md_row(
                    &mut out,
                    &[
                        r.kind.display_name().to_string(),
                        format!("{}{s}", fmt3(r.report.macro_precision)),
                        format!("{}{s}", fmt3(r.report.macro_recall)),
                        format!("{}{s}", fmt3(r.report.macro_f1)),
                    ],
                );
            }
            out
        }
    }
}

/// Per-class metrics behind the cohort tables (CSV only).
pub fn render_metrics_detail(rows: &[CohortMetrics]) -> String {
    let mut out = vec![strings([
        "cohort", "model", "class", "precision", "recall", "f1", "support", "undefined", "unreliable",
    ])];
    for r in rows {
        for label in SentimentLabel::ALL {
            let m = r.report.class(label);
            out.push(vec![
                r.cohort.to_string(),
                r.kind.to_string(),
                label.to_string(),
                fmt3(m.precision),
                fmt3(m.recall),
                fmt3(m.f1),
                m.support.to_string(),
                m.undefined.to_string(),
                m.unreliable.to_string(),
            ]);
        }
    }
    csv_string(out)
}

pub fn render_sweep(rows: &[SweepRow], format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = vec![strings([
                "threshold",
                "model",
                "macro_precision",
                "macro_recall",
                "macro_f1",
                "flags",
            ])];
            for r in rows {
                let metric = |f: fn(&MetricsReport) -> f64| r.report.as_ref().map(|m| fmt3(f(m))).unwrap_or_default();
                out.push(vec![
                    fmt3(r.threshold.value()),
                    r.kind.to_string(),
                    metric(|m| m.macro_precision),
                    metric(|m| m.macro_recall),
                    metric(|m| m.macro_f1),
                    r.flags().join(";"),
                ]);
            }
            csv_string(out)
        }
        ReportFormat::Markdown => {
            let mut thresholds: Vec<String> = Vec::new();
            let mut neutral: Vec<String> = Vec::new();
            let mut by_kind: BTreeMap<ClassifierKind, Vec<String>> = BTreeMap::new();
            for r in rows {
                let t = fmt3(r.threshold.value());
                if thresholds.last() != Some(&t) {
                    thresholds.push(t);
                    neutral.push(r.label_counts[SentimentLabel::Neutral.index()].to_string());
                }
                let cell = match &r.report {
                    Some(m) => format!("{}{}", fmt3(m.macro_f1), star(m)),
                    None => "n/a".into(),
                };
                by_kind.entry(r.kind).or_default().push(cell);
            }
            let mut header = vec![String::new()];
            header.extend(thresholds);
            let mut body = Vec::new();
            for (kind, cells) in by_kind {
                let mut row = vec![match kind {
                    ClassifierKind::Logistic => "LR".to_string(),
                    ClassifierKind::Svm => "SVM".to_string(),
                }];
                row.extend(cells);
                body.push(row);
            }
            if !neutral.is_empty() {
                let mut row = vec!["Neutral posts".to_string()];
                row.extend(neutral);
                body.push(row);
            }
            let mut out = String::new();
            md_table(&mut out, &header, &body);
            out
        }
    }
}

pub fn render_predictions(predictions: &[Prediction]) -> String {
    let mut out = vec![strings(["index", "post_id", "fold", "compound", "actual", "predicted", "correct"])];
    for p in predictions {
        out.push(vec![
            p.index.to_string(),
            p.post_id.clone(),
            p.fold.to_string(),
            p.compound.to_string(),
            p.actual.to_string(),
            p.predicted.to_string(),
            p.correct().to_string(),
        ]);
    }
    csv_string(out)
}
