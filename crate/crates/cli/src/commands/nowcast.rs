use std::path::Path;

use chrono::NaiveDate;
use mfnow_core::midas::{fit, nowcast, MidasModel};
use mfnow_core::{Error, Result};
use serde::Serialize;

use crate::config::load_config;
use crate::ingest::load_dataset;
use crate::output::{fmt_sig, OutputPlan};
use crate::{parse_month, NowcastArgs};

#[derive(Debug, Serialize)]
struct NowcastReport {
    target: String,
    month: NaiveDate,
    value: f64,
    model_source: String,
}

pub fn run(args: &NowcastArgs) -> Result<()> {
    let config = load_config(&args.common.config)?;
    let plan = OutputPlan::from_config(
        &config,
        args.common.out.as_deref(),
        args.common.format.as_deref(),
    )?;
    let month = parse_month(&args.month)?;
    let dataset = load_dataset(&config)?;

    let (model, model_source) = match &args.model {
        Some(path) => (load_model(path)?, path.display().to_string()),
        None => {
            let spec = config.midas_spec()?;
            let model = fit(&dataset.target, &dataset.exogenous, &spec)?;
            (model, "fitted".to_string())
        }
    };

    let value = nowcast(&model, &dataset.target, &dataset.exogenous, month)?;
    let report = NowcastReport {
        target: model.target_name.clone(),
        month,
        value,
        model_source,
    };

    plan.ensure_directory()?;
    plan.write_json("nowcast.json", &report)?;
    plan.write_csv(
        "nowcast.csv",
        &format!("series,date,value\nnowcast,{},{}\n", report.month, report.value),
    )?;
    let text = format!(
        "nowcast for {} {}: {}\nmodel: {}\n",
        report.target,
        report.month,
        fmt_sig(report.value),
        report.model_source
    );
    plan.write_text("nowcast.txt", &text)?;
    print!("{text}");
    Ok(())
}

fn load_model(path: &Path) -> Result<MidasModel> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::io(&path.display().to_string(), e))?;
    serde_json::from_str(&raw).map_err(|e| Error::FormatError {
        file: path.display().to_string(),
        line: e.line(),
        message: format!("not a saved model file: {e}"),
    })
}
