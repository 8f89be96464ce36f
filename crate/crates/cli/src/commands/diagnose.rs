use std::collections::BTreeSet;

use chrono::{Datelike, NaiveDate};
use mfnow_core::diagnostics::{
    acf, correlation_matrix, seasonal_decompose, vif, Acf, CorrelationMatrix, Decomposition,
};
use mfnow_core::{Result, TimeSeries};
use serde::Serialize;

use crate::config::load_config;
use crate::ingest::{load_dataset, Dataset, GapReport, SeriesSummary};
use crate::output::{fmt_sig, long_format_csv, render_table, OutputPlan};
use crate::DiagnoseArgs;

#[derive(Debug, Serialize)]
struct VifEntry {
    series: String,
    vif: f64,
}

#[derive(Debug, Serialize)]
struct DiagnosticsReport {
    target: String,
    summaries: Vec<SeriesSummary>,
    gaps_filled: Vec<GapReport>,
    acf: Acf,
    acf_lags: usize,
    decomposition: Decomposition,
    correlation: Option<CorrelationMatrix>,
    vif: Option<Vec<VifEntry>>,
    notes: Vec<String>,
}

pub fn run(args: &DiagnoseArgs) -> Result<()> {
    let config = load_config(&args.common.config)?;
    let plan = OutputPlan::from_config(
        &config,
        args.common.out.as_deref(),
        args.common.format.as_deref(),
    )?;
    let dataset = load_dataset(&config)?;

    let acf_report = acf(&dataset.target, args.acf_lags)?;
    let decomposition = seasonal_decompose(&dataset.target, args.period)?;

    let mut notes = Vec::new();
    let (correlation, vif_entries) = if dataset.exogenous.len() >= 2 {
        let aligned: Vec<TimeSeries> = dataset.exogenous.values().cloned().collect();
        let correlation = correlation_matrix(&aligned)?;
        let vif_values = vif(&collinearity_columns(&dataset))?;
        let entries = vif_values
            .into_iter()
            .map(|(series, value)| VifEntry {
                series,
                vif: value,
            })
            .collect();
        (Some(correlation), Some(entries))
    } else {
        notes.push(
            "collinearity diagnostics skipped: they need at least two exogenous series"
                .to_string(),
        );
        (None, None)
    };

    let report = DiagnosticsReport {
        target: config.target.name.clone(),
        summaries: dataset.summaries.clone(),
        gaps_filled: dataset.gap_reports.clone(),
        acf: acf_report,
        acf_lags: args.acf_lags,
        decomposition,
        correlation,
        vif: vif_entries,
        notes,
    };

    plan.ensure_directory()?;
    plan.write_json("diagnostics.json", &report)?;
    plan.write_csv("summary.csv", &summary_csv(&report.summaries))?;
    plan.write_csv("acf.csv", &acf_csv(&report.acf))?;
    plan.write_csv(
        "decomposition.csv",
        &long_format_csv(&[
            &report.decomposition.trend,
            &report.decomposition.seasonal,
            &report.decomposition.residual,
        ]),
    )?;
    if let Some(matrix) = &report.correlation {
        plan.write_csv("correlation.csv", &correlation_csv(matrix))?;
    }
    if let Some(entries) = &report.vif {
        plan.write_csv("vif.csv", &vif_csv(entries))?;
    }

    let text = render_text(&report);
    plan.write_text("diagnostics.txt", &text)?;
    print!("{text}");
    Ok(())
}

/// Complete-case regressor matrix for the variance-inflation check: a
/// constant column plus one column per exogenous series, aligned on the
/// dates where every series has a value.
fn collinearity_columns(dataset: &Dataset) -> Vec<(String, Vec<f64>)> {
    let mut common: Option<BTreeSet<NaiveDate>> = None;
    for series in dataset.exogenous.values() {
        let dates: BTreeSet<NaiveDate> = series.non_missing().map(|(date, _)| date).collect();
        common = Some(match common {
            None => dates,
            Some(held) => held.intersection(&dates).copied().collect(),
        });
    }
    let common = common.unwrap_or_default();

    let mut columns = Vec::with_capacity(dataset.exogenous.len() + 1);
    columns.push(("Constant".to_string(), vec![1.0; common.len()]));
    for (name, series) in &dataset.exogenous {
        let values = common
            .iter()
            .map(|&date| series.value_at(date).unwrap_or(f64::NAN))
            .collect();
        columns.push((name.clone(), values));
    }
    columns
}

fn summary_csv(summaries: &[SeriesSummary]) -> String {
    let mut body = String::from("series,count,mean,std,min,q25,median,q75,max\n");
    for s in summaries {
        body.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            s.series, s.count, s.mean, s.std, s.min, s.q25, s.median, s.q75, s.max
        ));
    }
    body
}

fn acf_csv(acf: &Acf) -> String {
    let mut body = String::from("lag,coefficient\n");
    for (lag, value) in acf.coefficients.iter().enumerate() {
        body.push_str(&format!("{lag},{value}\n"));
    }
    body
}

fn correlation_csv(matrix: &CorrelationMatrix) -> String {
    let mut body = String::from("series");
    for name in &matrix.names {
        body.push(',');
        body.push_str(name);
    }
    body.push('\n');
    for (name, row) in matrix.names.iter().zip(&matrix.values) {
        body.push_str(name);
        for value in row {
            body.push_str(&format!(",{value}"));
        }
        body.push('\n');
    }
    body
}

fn vif_csv(entries: &[VifEntry]) -> String {
    let mut body = String::from("series,vif\n");
    for entry in entries {
        body.push_str(&format!("{},{}\n", entry.series, entry.vif));
    }
    body
}

fn render_text(report: &DiagnosticsReport) -> String {
    let mut out = String::new();

    out.push_str("series summary\n");
    let rows: Vec<Vec<String>> = report
        .summaries
        .iter()
        .map(|s| {
            vec![
                s.series.clone(),
                s.count.to_string(),
                fmt_sig(s.mean),
                fmt_sig(s.std),
                fmt_sig(s.min),
                fmt_sig(s.q25),
                fmt_sig(s.median),
                fmt_sig(s.q75),
                fmt_sig(s.max),
            ]
        })
        .collect();
    out.push_str(&render_table(
        &[
            "series", "count", "mean", "std", "min", "q25", "median", "q75", "max",
        ],
        &rows,
    ));

    if report.gaps_filled.iter().any(|g| g.gaps_filled > 0) {
        out.push_str("\ncalendar gaps filled by interpolation\n");
        let rows: Vec<Vec<String>> = report
            .gaps_filled
            .iter()
            .map(|g| vec![g.series.clone(), g.gaps_filled.to_string()])
            .collect();
        out.push_str(&render_table(&["series", "days"], &rows));
    }

    out.push_str(&format!(
        "\nautocorrelation of {} ({} observations, white-noise band +/- {})\n",
        report.target,
        report.acf.n,
        fmt_sig(report.acf.confidence_band)
    ));
    let rows: Vec<Vec<String>> = report
        .acf
        .coefficients
        .iter()
        .enumerate()
        .map(|(lag, value)| {
            let flag = if lag > 0 && value.abs() > report.acf.confidence_band {
                "*"
            } else {
                ""
            };
            vec![lag.to_string(), fmt_sig(*value), flag.to_string()]
        })
        .collect();
    out.push_str(&render_table(&["lag", "coefficient", ""], &rows));

    out.push_str(&format!(
        "\nseasonal decomposition (period {})\n",
        report.decomposition.period
    ));
    out.push_str(&seasonal_cycle_text(&report.decomposition));

    if let Some(entries) = &report.vif {
        out.push_str("\nvariance inflation across exogenous regressors\n");
        let rows: Vec<Vec<String>> = entries
            .iter()
            .map(|e| vec![e.series.clone(), fmt_sig(e.vif)])
            .collect();
        out.push_str(&render_table(&["series", "vif"], &rows));
    }

    if let Some(matrix) = &report.correlation {
        out.push_str("\ncorrelation matrix (complete cases)\n");
        let mut headers: Vec<&str> = vec!["series"];
        headers.extend(matrix.names.iter().map(String::as_str));
        let rows: Vec<Vec<String>> = matrix
            .names
            .iter()
            .zip(&matrix.values)
            .map(|(name, row)| {
                let mut cells = vec![name.clone()];
                cells.extend(row.iter().map(|v| fmt_sig(*v)));
                cells
            })
            .collect();
        out.push_str(&render_table(&headers, &rows));
    }

    for note in &report.notes {
        out.push_str(&format!("\nnote: {note}\n"));
    }
    out
}

/// One full cycle of the seasonal component plus the span where the trend
/// is defined.
fn seasonal_cycle_text(decomposition: &Decomposition) -> String {
    let table: Vec<Vec<String>> = decomposition
        .seasonal
        .non_missing()
        .take(decomposition.period)
        .map(|(date, value)| vec![date.month().to_string(), fmt_sig(value)])
        .collect();
    let mut out = render_table(&["month", "seasonal"], &table);

    let trend_dates: Vec<NaiveDate> = decomposition.trend.non_missing().map(|(d, _)| d).collect();
    if let (Some(first), Some(last)) = (trend_dates.first(), trend_dates.last()) {
        out.push_str(&format!(
            "trend defined {} to {} ({} months)\n",
            first,
            last,
            trend_dates.len()
        ));
    }
    out
}
