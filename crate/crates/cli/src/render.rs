//! Report rendering: aligned text tables with metrics at 2-decimal
//! percent precision, plus ROC point export for external plotting.
//! Rounding here is presentation only; report files keep full
//! precision.

use std::fs;
use std::path::Path;

use flowmimic::{ClassifierSpec, CvResult, EvaluationReport};

use crate::exit::{CliError, Context};

/// `Some(0.9964)` becomes `99.64`; an undefined metric prints as `-`.
pub fn pct(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.2}", v * 100.0),
        None => "-".into(),
    }
}

const METRIC_HEADERS: [&str; 6] = ["acc", "tpr", "fpr", "tnr", "fnr", "auc"];

fn metric_row(out: &mut String, name: &str, marker: char, cells: [Option<f64>; 6]) {
    out.push_str(&format!("{marker} {name:<10}"));
    for cell in cells {
        out.push_str(&format!("{:>9}", pct(cell)));
    }
    out.push('\n');
}

fn header_row(out: &mut String, name_heading: &str) {
    out.push_str(&format!("  {name_heading:<10}"));
    for h in METRIC_HEADERS {
        out.push_str(&format!("{h:>9}"));
    }
    out.push('\n');
}

/// Per-classifier cross-validation table; the winner gets a `*`.
pub fn selection_table(
    title: &str,
    table: &[(ClassifierSpec, CvResult<f64>)],
    winner: &ClassifierSpec,
) -> String {
    let mut out = format!("{title} (metrics in %)\n");
    header_row(&mut out, "classifier");
    for (spec, result) in table {
        let m = &result.mean;
        metric_row(
            &mut out,
            &spec.family().to_string(),
            if spec == winner { '*' } else { ' ' },
            [Some(m.acc), m.tpr, m.fpr, m.tnr, m.fnr, m.auc],
        );
    }
    out
}

/// One model's scorecard on a labeled test set.
pub fn evaluation_block(title: &str, report: &EvaluationReport<f64>) -> String {
    let c = &report.confusion;
    let mut out = format!(
        "{title} (metrics in %)\n  rows {}: tp {}  fp {}  tn {}  fn {}\n",
        c.total(),
        c.tp,
        c.fp,
        c.tn,
        c.fn_
    );
    header_row(&mut out, "");
    metric_row(
        &mut out,
        "",
        ' ',
        [Some(report.acc), report.tpr, report.fpr, report.tnr, report.fnr, report.auc],
    );
    out
}

/// Teacher and student side by side on the same test set.
pub fn comparison_table(
    teacher: &EvaluationReport<f64>,
    student: &EvaluationReport<f64>,
) -> String {
    let mut out = String::from("teacher/student comparison (metrics in %)\n");
    header_row(&mut out, "model");
    for (name, r) in [("teacher", teacher), ("student", student)] {
        metric_row(&mut out, name, ' ', [Some(r.acc), r.tpr, r.fpr, r.tnr, r.fnr, r.auc]);
    }
    out
}

/// Two tab-separated columns (fpr, tpr) at full precision. The header
/// line starts with `#` so plotting tools skip it.
pub fn write_roc(path: &Path, points: &[(f64, f64)]) -> Result<(), CliError> {
    let mut text = String::from("# fpr\ttpr\n");
    for (fpr, tpr) in points {
        text.push_str(&format!("{fpr}\t{tpr}\n"));
    }
    fs::write(path, text).ctx(format!("writing ROC table {}", path.display()))
}
