//! Dataset loading: read every configured series, validate it, fill daily
//! gaps, apply transforms, and collect the summary statistics table.

use std::collections::BTreeMap;

use mfnow_core::series::{fractional_change, interpolate_gaps, read_series_csv};
use mfnow_core::{Error, Frequency, Result, TimeSeries};
use serde::Serialize;

use crate::config::{PipelineConfig, Transform};

/// Distribution snapshot of one series, computed over non-missing values.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesSummary {
    pub series: String,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

/// How many absent or empty daily cells interpolation filled in.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub series: String,
    pub gaps_filled: usize,
}

/// Everything the model-facing subcommands consume.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub target: TimeSeries,
    /// Daily series after interpolation and the configured transform.
    pub exogenous: BTreeMap<String, TimeSeries>,
    /// One row per configured series, target first, on the raw values.
    pub summaries: Vec<SeriesSummary>,
    pub gap_reports: Vec<GapReport>,
}

/// Linear-interpolation percentile of pre-sorted values.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

pub fn summarize(series: &TimeSeries) -> Result<SeriesSummary> {
    let mut values = series.non_missing_values();
    if values.is_empty() {
        return Err(Error::EmptySeries {
            name: series.name().to_string(),
        });
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(SeriesSummary {
        series: series.name().to_string(),
        count: n,
        mean,
        std,
        min: values[0],
        q25: percentile(&values, 0.25),
        median: percentile(&values, 0.5),
        q75: percentile(&values, 0.75),
        max: values[n - 1],
    })
}

pub fn load_dataset(config: &PipelineConfig) -> Result<Dataset> {
    let target = read_series_csv(
        &config.target.path,
        &config.target.name,
        config.target.frequency,
    )?;
    if target.non_missing_count() == 0 {
        return Err(Error::EmptySeries {
            name: config.target.name.clone(),
        });
    }
    let mut summaries = vec![summarize(&target)?];
    let mut gap_reports = Vec::new();
    let mut exogenous = BTreeMap::new();

    for exog in &config.exogenous {
        let raw = read_series_csv(&exog.path, &exog.name, Frequency::Daily)?;
        if raw.non_missing_count() == 0 {
            return Err(Error::EmptySeries {
                name: exog.name.clone(),
            });
        }
        summaries.push(summarize(&raw)?);
        let filled = interpolate_gaps(&raw)?;
        gap_reports.push(GapReport {
            series: exog.name.clone(),
            gaps_filled: filled.non_missing_count() - raw.non_missing_count(),
        });
        let trimmed = filled.trimmed();
        let transformed = match exog.transform {
            Transform::None => trimmed,
            Transform::FractionalChange { horizon_days } => {
                fractional_change(&trimmed, horizon_days)?
            }
        };
        exogenous.insert(exog.name.clone(), transformed);
    }

    Ok(Dataset {
        target,
        exogenous,
        summaries,
        gap_reports,
    })
}
