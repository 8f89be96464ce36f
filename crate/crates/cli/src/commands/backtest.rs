use std::collections::BTreeMap;

use chrono::NaiveDate;
use mfnow_core::evaluation::{rolling_backtest, BacktestOptions, MetricReport};
use mfnow_core::forecasters::{
    ar1_fit, ar1_fit_with_intercept, load_external_forecasts, Ar1Forecaster, ExternalForecaster,
    Forecaster, MidasForecaster,
};
use mfnow_core::midas::fit;
use mfnow_core::{Error, Result, TimeSeries};
use serde::Serialize;

use crate::config::{load_config, PipelineConfig};
use crate::ingest::{load_dataset, Dataset};
use crate::output::{fmt_sig, long_format_csv, render_table, OutputPlan};
use crate::{parse_month, BacktestArgs, ForecasterKind};

#[derive(Debug, Serialize)]
struct BacktestReport {
    forecaster: String,
    target: String,
    eval_start: NaiveDate,
    eval_months: usize,
    context_days: u64,
    k: usize,
    in_sample: bool,
    metrics: MetricReport,
}

pub fn run(args: &BacktestArgs) -> Result<()> {
    let config = load_config(&args.common.config)?;
    let plan = OutputPlan::from_config(
        &config,
        args.common.out.as_deref(),
        args.common.format.as_deref(),
    )?;
    let dataset = load_dataset(&config)?;

    let eval_start = match &args.eval_start {
        Some(raw) => parse_month(raw)?,
        None => config
            .evaluation
            .eval_start
            .ok_or_else(|| Error::InvalidParameter {
                message:
                    "evaluation start is required: set evaluation.eval_start or pass --eval-start"
                        .to_string(),
            })?,
    };
    let eval_months = args.eval_months.unwrap_or(config.evaluation.eval_months);
    let k = args
        .k
        .or(config.evaluation.k)
        .ok_or_else(|| Error::InvalidParameter {
            message: "predictor count is required: set evaluation.k or pass --k".to_string(),
        })?;
    let in_sample = args.in_sample || config.evaluation.in_sample;
    let options = BacktestOptions {
        eval_start,
        eval_months,
        context_days: config.evaluation.context_days,
        k,
    };

    let forecaster = build_forecaster(args, &config, &dataset, eval_start, in_sample)?;
    let outcome = rolling_backtest(
        forecaster.as_ref(),
        &dataset.target,
        &dataset.exogenous,
        &options,
    )?;

    let report = BacktestReport {
        forecaster: forecaster.name().to_string(),
        target: dataset.target.name().to_string(),
        eval_start,
        eval_months,
        context_days: options.context_days,
        k,
        in_sample,
        metrics: outcome.report,
    };

    plan.ensure_directory()?;
    plan.write_json("backtest.json", &report)?;
    plan.write_json("metrics.json", &report.metrics)?;
    plan.write_csv(
        "predictions.csv",
        &long_format_csv(&[&outcome.predictions, &outcome.actuals]),
    )?;
    let text = render_text(&report, &outcome.predictions, &outcome.actuals);
    plan.write_text("backtest.txt", &text)?;
    print!("{text}");
    Ok(())
}

fn build_forecaster(
    args: &BacktestArgs,
    config: &PipelineConfig,
    dataset: &Dataset,
    eval_start: NaiveDate,
    in_sample: bool,
) -> Result<Box<dyn Forecaster>> {
    match args.forecaster {
        ForecasterKind::Midas => {
            let spec = config.midas_spec()?;
            let model = if in_sample {
                fit(&dataset.target, &dataset.exogenous, &spec)?
            } else {
                let target = dataset.target.before(eval_start);
                let exogenous: BTreeMap<String, TimeSeries> = dataset
                    .exogenous
                    .iter()
                    .map(|(name, series)| (name.clone(), series.before(eval_start)))
                    .collect();
                fit(&target, &exogenous, &spec)?
            };
            Ok(Box::new(MidasForecaster::new(model)))
        }
        ForecasterKind::Ar1 => {
            let target = if in_sample {
                dataset.target.clone()
            } else {
                dataset.target.before(eval_start)
            };
            let model = if args.intercept {
                ar1_fit_with_intercept(&target)?
            } else {
                ar1_fit(&target)?
            };
            Ok(Box::new(Ar1Forecaster::new(model)))
        }
        ForecasterKind::External => {
            let path = args
                .external
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter {
                    message: "--external <file> is required with --forecaster external"
                        .to_string(),
                })?;
            let records = load_external_forecasts(path)?;
            Ok(Box::new(ExternalForecaster::from_records(
                "external", &records,
            )))
        }
    }
}

fn render_text(report: &BacktestReport, predictions: &TimeSeries, actuals: &TimeSeries) -> String {
    let mut out = format!(
        "backtest of {} on {}\n",
        report.forecaster, report.target
    );
    out.push_str(&format!(
        "evaluation window {} for {} months  context {} days  k = {}  fit span: {}\n\n",
        report.eval_start,
        report.eval_months,
        report.context_days,
        report.k,
        if report.in_sample {
            "full sample"
        } else {
            "pre-evaluation only"
        }
    ));

    let rows: Vec<Vec<String>> = predictions
        .observations()
        .iter()
        .zip(actuals.observations())
        .map(|(p, a)| {
            let predicted = p.value.unwrap_or(f64::NAN);
            let actual = a.value.unwrap_or(f64::NAN);
            vec![
                p.date.to_string(),
                fmt_sig(predicted),
                fmt_sig(actual),
                fmt_sig(predicted - actual),
            ]
        })
        .collect();
    out.push_str(&render_table(
        &["month", "predicted", "actual", "error"],
        &rows,
    ));

    out.push('\n');
    out.push_str(&metrics_table(&report.metrics));
    out
}

pub fn metrics_table(metrics: &MetricReport) -> String {
    let rows = vec![
        vec!["mae".to_string(), fmt_sig(metrics.mae)],
        vec!["mape".to_string(), fmt_sig(metrics.mape)],
        vec!["mse".to_string(), fmt_sig(metrics.mse)],
        vec!["correlation".to_string(), fmt_sig(metrics.correlation)],
        vec!["r_squared".to_string(), fmt_sig(metrics.r_squared)],
        vec![
            "adj_r_squared".to_string(),
            fmt_sig(metrics.adj_r_squared),
        ],
        vec!["n".to_string(), metrics.n.to_string()],
        vec!["k".to_string(), metrics.k.to_string()],
    ];
    render_table(&["metric", "value"], &rows)
}
