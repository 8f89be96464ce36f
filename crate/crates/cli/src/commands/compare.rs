use std::path::Path;

use mfnow_core::evaluation::{compare, metric_report, ComparisonVerdict, MetricReport};
use mfnow_core::series::read_series_csv;
use mfnow_core::{Error, Frequency, Result, TimeSeries};
use serde::Serialize;

use crate::output::{fmt_sig, render_table, OutputPlan};
use crate::CompareArgs;

#[derive(Debug, Serialize)]
struct CompareReport {
    candidate: MetricReport,
    reference: MetricReport,
    verdict: ComparisonVerdict,
}

pub fn run(args: &CompareArgs) -> Result<()> {
    let plan = OutputPlan::standalone(&args.out, args.format.as_deref())?;
    let actuals = match &args.actuals {
        Some(path) => Some(read_series_csv(path, "actual", Frequency::Monthly)?),
        None => None,
    };
    let candidate = load_side(&args.candidate, actuals.as_ref(), args.k)?;
    let reference = load_side(&args.reference, actuals.as_ref(), args.k)?;
    let verdict = compare(&candidate, &reference)?;
    let report = CompareReport {
        candidate,
        reference,
        verdict,
    };

    plan.ensure_directory()?;
    plan.write_json("verdict.json", &report)?;
    plan.write_csv("verdict.csv", &verdict_csv(&report.verdict))?;
    let text = render_text(&report.verdict);
    plan.write_text("compare.txt", &text)?;
    print!("{text}");
    Ok(())
}

/// A side of the comparison is either a saved metric report (`.json`) or a
/// predictions CSV that gets scored against `--actuals` on the spot.
fn load_side(
    path: &Path,
    actuals: Option<&TimeSeries>,
    k: Option<usize>,
) -> Result<MetricReport> {
    let is_json = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| Error::io(&path.display().to_string(), e))?;
        return serde_json::from_str(&raw).map_err(|e| Error::FormatError {
            file: path.display().to_string(),
            line: e.line(),
            message: format!("not a metric report: {e}"),
        });
    }

    let actuals = actuals.ok_or_else(|| Error::InvalidParameter {
        message: format!(
            "--actuals is required to score the predictions file '{}'",
            path.display()
        ),
    })?;
    let k = k.ok_or_else(|| Error::InvalidParameter {
        message: format!(
            "--k is required to score the predictions file '{}'",
            path.display()
        ),
    })?;
    let predictions = read_predictions(path)?;
    let mut predicted = Vec::new();
    let mut realized = Vec::new();
    for (date, value) in predictions.non_missing() {
        let actual = actuals
            .value_at(date)
            .ok_or_else(|| Error::MissingObservation {
                series: actuals.name().to_string(),
                date,
            })?;
        predicted.push(value);
        realized.push(actual);
    }
    metric_report(&realized, &predicted, k)
}

/// Monthly predictions from either a plain `date,value` file or a
/// single-series long-format file (`series,date,value`).
fn read_predictions(path: &Path) -> Result<TimeSeries> {
    let display = path.display().to_string();
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    let header = raw.lines().next().unwrap_or("").trim();
    if !header
        .to_lowercase()
        .replace(' ', "")
        .starts_with("series,date,value")
    {
        return read_series_csv(path, "predictions", Frequency::Monthly);
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(raw.as_bytes());
    let mut names = std::collections::BTreeSet::new();
    let mut rows: Vec<(chrono::NaiveDate, Option<f64>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::FormatError {
            file: display.clone(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| Error::FormatError {
            file: display.clone(),
            line,
            message,
        };
        let name = record.get(0).unwrap_or("").to_string();
        let date: chrono::NaiveDate = record
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|_| bad(format!("bad date '{}'", record.get(1).unwrap_or(""))))?;
        let field = record.get(2).unwrap_or("");
        let value = if field.is_empty() {
            None
        } else {
            Some(
                field
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad value '{field}'")))?,
            )
        };
        names.insert(name);
        rows.push((date, value));
    }
    if names.len() != 1 {
        return Err(Error::InvalidParameter {
            message: format!(
                "predictions file '{}' must contain exactly one series, found {}: {}",
                display,
                names.len(),
                names.into_iter().collect::<Vec<_>>().join(", ")
            ),
        });
    }
    let name = names.into_iter().next().unwrap_or_default();
    let observations = rows
        .into_iter()
        .map(|(date, value)| mfnow_core::Observation { date, value })
        .collect();
    TimeSeries::new(name, Frequency::Monthly, observations)
}

fn verdict_csv(verdict: &ComparisonVerdict) -> String {
    let mut body = String::from("metric,candidate,reference,ratio,outperforms\n");
    for (name, entry) in verdict.entries() {
        body.push_str(&format!(
            "{},{},{},{},{}\n",
            name, entry.candidate, entry.reference, entry.ratio, entry.outperforms
        ));
    }
    body.push_str(&format!("overall,,,,{}\n", verdict.overall));
    body
}

fn render_text(verdict: &ComparisonVerdict) -> String {
    let rows: Vec<Vec<String>> = verdict
        .entries()
        .iter()
        .map(|(name, entry)| {
            vec![
                name.to_string(),
                fmt_sig(entry.candidate),
                fmt_sig(entry.reference),
                fmt_sig(entry.ratio),
                if entry.outperforms { "yes" } else { "no" }.to_string(),
            ]
        })
        .collect();
    let mut out = render_table(
        &["metric", "candidate", "reference", "ratio", "outperforms"],
        &rows,
    );
    out.push_str(&format!(
        "\noverall: candidate {} the reference on all six metrics\n",
        if verdict.overall {
            "outperforms"
        } else {
            "does not outperform"
        }
    ));
    out
}
