//! Forecast accuracy metrics, the ratio-based comparison protocol, and the
//! rolling backtest that feeds both.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecasters::{ForecastContext, Forecaster};
use crate::series::{add_months, Frequency, TimeSeries};

fn check_lengths(actual: &[f64], predicted: &[f64], context: &str) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::ShapeMismatch {
            context: context.to_string(),
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::InsufficientData {
            context: context.to_string(),
            needed: 1,
            got: 0,
        });
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted, "mae")?;
    let total: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).abs())
        .sum();
    Ok(total / actual.len() as f64)
}

/// Mean absolute percentage error, in percent.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted, "mape")?;
    let mut total = 0.0;
    for (i, (a, p)) in actual.iter().zip(predicted).enumerate() {
        if *a == 0.0 {
            return Err(Error::DivisionByZero {
                context: format!("mape: actual value at index {} is zero", i),
            });
        }
        total += ((a - p) / a).abs();
    }
    Ok(100.0 * total / actual.len() as f64)
}

/// Mean squared error.
pub fn mse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted, "mse")?;
    let total: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum();
    Ok(total / actual.len() as f64)
}

/// Pearson correlation between actuals and predictions.
pub fn pearson(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted, "pearson")?;
    if actual.len() < 2 {
        return Err(Error::InsufficientData {
            context: "pearson".to_string(),
            needed: 2,
            got: actual.len(),
        });
    }
    let n = actual.len() as f64;
    let mean_a = actual.iter().sum::<f64>() / n;
    let mean_p = predicted.iter().sum::<f64>() / n;
    let var_a: f64 = actual.iter().map(|a| (a - mean_a) * (a - mean_a)).sum();
    let var_p: f64 = predicted.iter().map(|p| (p - mean_p) * (p - mean_p)).sum();
    if var_a == 0.0 {
        return Err(Error::DegenerateVariance {
            name: "actual".to_string(),
        });
    }
    if var_p == 0.0 {
        return Err(Error::DegenerateVariance {
            name: "predicted".to_string(),
        });
    }
    let cov: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - mean_a) * (p - mean_p))
        .sum();
    Ok(cov / (var_a.sqrt() * var_p.sqrt()))
}

/// Coefficient of determination, `1 - RSS/TSS` with centered totals. Can be
/// negative when the predictions do worse than the actuals' mean.
pub fn r2(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted, "r2")?;
    let n = actual.len() as f64;
    let mean_a = actual.iter().sum::<f64>() / n;
    let tss: f64 = actual.iter().map(|a| (a - mean_a) * (a - mean_a)).sum();
    if tss == 0.0 {
        return Err(Error::DegenerateVariance {
            name: "actual".to_string(),
        });
    }
    let rss: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum();
    Ok(1.0 - rss / tss)
}

/// Degrees-of-freedom adjusted R-squared for `k` predictors.
pub fn adj_r2(r_squared: f64, n: usize, k: usize) -> Result<f64> {
    if n <= k + 1 {
        return Err(Error::InsufficientData {
            context: format!("adj_r2 with k = {}", k),
            needed: k + 2,
            got: n,
        });
    }
    Ok(1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / (n as f64 - k as f64 - 1.0))
}

/// The six accuracy metrics for one forecaster over one evaluation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mae: f64,
    pub mape: f64,
    pub mse: f64,
    pub correlation: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub n: usize,
    pub k: usize,
}

/// Compute all six metrics at once. `k` is the predictor count used by the
/// degrees-of-freedom adjustment.
pub fn metric_report(actual: &[f64], predicted: &[f64], k: usize) -> Result<MetricReport> {
    let r_squared = r2(actual, predicted)?;
    Ok(MetricReport {
        mae: mae(actual, predicted)?,
        mape: mape(actual, predicted)?,
        mse: mse(actual, predicted)?,
        correlation: pearson(actual, predicted)?,
        r_squared,
        adj_r_squared: adj_r2(r_squared, actual.len(), k)?,
        n: actual.len(),
        k,
    })
}

/// Thresholds for calling one forecaster better than another. Error ratios
/// must drop below [`ERROR_RATIO_THRESHOLD`]; goodness ratios must exceed
/// [`GOODNESS_RATIO_THRESHOLD`]. Anything in between is a tie.
pub const ERROR_RATIO_THRESHOLD: f64 = 0.95;
pub const GOODNESS_RATIO_THRESHOLD: f64 = 1.05;

/// One metric's candidate/reference ratio and whether it clears the bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub candidate: f64,
    pub reference: f64,
    pub ratio: f64,
    pub outperforms: bool,
}

/// Per-metric comparisons plus the conjunction over all six.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    pub mae: MetricComparison,
    pub mape: MetricComparison,
    pub mse: MetricComparison,
    pub correlation: MetricComparison,
    pub r_squared: MetricComparison,
    pub adj_r_squared: MetricComparison,
    pub overall: bool,
}

impl ComparisonVerdict {
    /// The six comparisons in report order, labelled.
    pub fn entries(&self) -> [(&'static str, MetricComparison); 6] {
        [
            ("mae", self.mae),
            ("mape", self.mape),
            ("mse", self.mse),
            ("correlation", self.correlation),
            ("r_squared", self.r_squared),
            ("adj_r_squared", self.adj_r_squared),
        ]
    }
}

fn compare_one(metric: &str, candidate: f64, reference: f64, lower_is_better: bool) -> Result<MetricComparison> {
    if reference == 0.0 {
        return Err(Error::DegenerateReference {
            metric: metric.to_string(),
        });
    }
    let ratio = candidate / reference;
    let outperforms = if lower_is_better {
        ratio < ERROR_RATIO_THRESHOLD
    } else {
        ratio > GOODNESS_RATIO_THRESHOLD
    };
    Ok(MetricComparison {
        candidate,
        reference,
        ratio,
        outperforms,
    })
}

/// Compare a candidate report against a reference. The candidate counts as
/// better overall only when it clears the threshold on every metric.
pub fn compare(candidate: &MetricReport, reference: &MetricReport) -> Result<ComparisonVerdict> {
    let mae = compare_one("mae", candidate.mae, reference.mae, true)?;
    let mape = compare_one("mape", candidate.mape, reference.mape, true)?;
    let mse = compare_one("mse", candidate.mse, reference.mse, true)?;
    let correlation = compare_one("correlation", candidate.correlation, reference.correlation, false)?;
    let r_squared = compare_one("r_squared", candidate.r_squared, reference.r_squared, false)?;
    let adj_r_squared = compare_one(
        "adj_r_squared",
        candidate.adj_r_squared,
        reference.adj_r_squared,
        false,
    )?;
    let overall = mae.outperforms
        && mape.outperforms
        && mse.outperforms
        && correlation.outperforms
        && r_squared.outperforms
        && adj_r_squared.outperforms;
    Ok(ComparisonVerdict {
        mae,
        mape,
        mse,
        correlation,
        r_squared,
        adj_r_squared,
        overall,
    })
}

/// Settings for [`rolling_backtest`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktestOptions {
    /// First month to predict (a month anchor).
    pub eval_start: NaiveDate,
    /// Number of consecutive months to predict.
    pub eval_months: usize,
    /// Days of history visible to the forecaster before each predicted month.
    pub context_days: u64,
    /// Predictor count for the degrees-of-freedom adjustment.
    pub k: usize,
}

/// Predictions, matched actuals, and metrics from one backtest run.
#[derive(Debug, Clone)]
pub struct BacktestOutcome {
    pub predictions: TimeSeries,
    pub actuals: TimeSeries,
    pub report: MetricReport,
}

/// Walk forward one month at a time, handing the forecaster only the slice
/// of history inside its context window and strictly before the predicted
/// month, then score the predictions against realized values.
pub fn rolling_backtest(
    forecaster: &dyn Forecaster,
    target: &TimeSeries,
    exogenous: &BTreeMap<String, TimeSeries>,
    options: &BacktestOptions,
) -> Result<BacktestOutcome> {
    if target.frequency() != Frequency::Monthly {
        return Err(Error::FrequencyMismatch {
            series: target.name().to_string(),
            date: options.eval_start,
            expected: "monthly target",
        });
    }
    if options.eval_months == 0 {
        return Err(Error::InvalidParameter {
            message: "eval_months must be at least 1".to_string(),
        });
    }
    if options.context_days == 0 {
        return Err(Error::InvalidParameter {
            message: "context_days must be at least 1".to_string(),
        });
    }
    if options.eval_start != crate::series::month_anchor(options.eval_start) {
        return Err(Error::InvalidParameter {
            message: format!("eval_start {} is not a month anchor", options.eval_start),
        });
    }

    let required_start = options
        .eval_start
        .checked_sub_days(Days::new(options.context_days))
        .ok_or_else(|| Error::InvalidParameter {
            message: "context window extends past the calendar range".to_string(),
        })?;
    let mut series_to_check: Vec<&TimeSeries> = vec![target];
    series_to_check.extend(exogenous.values());
    for series in series_to_check {
        let first = series.first_date().ok_or_else(|| Error::EmptySeries {
            name: series.name().to_string(),
        })?;
        if first > required_start {
            let shortfall = (first - required_start).num_days() as usize;
            return Err(Error::InsufficientHistory {
                context: format!(
                    "backtest context for '{}' must reach back to {}",
                    series.name(),
                    required_start
                ),
                shortfall,
                unit: "days",
            });
        }
    }

    let mut predicted = Vec::with_capacity(options.eval_months);
    let mut actual = Vec::with_capacity(options.eval_months);
    for i in 0..options.eval_months {
        let month = add_months(options.eval_start, i as i32);
        let window_start = month
            .checked_sub_days(Days::new(options.context_days))
            .expect("window start within calendar range");
        let target_history = target.between(window_start, month);
        let mut exogenous_history = BTreeMap::new();
        for (name, series) in exogenous {
            exogenous_history.insert(name.clone(), series.between(window_start, month));
        }
        let context = ForecastContext {
            month,
            target_history: &target_history,
            exogenous: &exogenous_history,
        };
        let value = forecaster.forecast(&context)?;
        if !value.is_finite() {
            return Err(Error::InvalidSeries {
                series: forecaster.name().to_string(),
                message: format!("non-finite forecast for {}", month),
            });
        }
        let realized = target
            .value_at(month)
            .ok_or_else(|| Error::MissingObservation {
                series: target.name().to_string(),
                date: month,
            })?;
        predicted.push(value);
        actual.push(realized);
    }

    let report = metric_report(&actual, &predicted, options.k)?;
    let predictions = TimeSeries::from_values(
        forecaster.name(),
        Frequency::Monthly,
        options.eval_start,
        predicted.iter().copied(),
    )?;
    let actuals = TimeSeries::from_values(
        target.name(),
        Frequency::Monthly,
        options.eval_start,
        actual.iter().copied(),
    )?;
    Ok(BacktestOutcome {
        predictions,
        actuals,
        report,
    })
}
