//! Forecasters that plug into the rolling backtest: the autoregressive
//! benchmark, the fitted mixed-frequency model, and forecasts produced by
//! external systems and exchanged through CSV files.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::midas::{nowcast, MidasModel};
use crate::series::{add_months, Frequency, TimeSeries};

/// First-order autoregressive benchmark, `y_t = intercept + beta * y_{t-1}`.
///
/// The default estimator has no intercept and a closed form:
/// `beta = sum(y_t * y_{t-1}) / sum(y_{t-1}^2)` over all consecutive pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Model {
    pub beta: f64,
    pub intercept: f64,
    /// Number of consecutive-month regression rows the fit used.
    pub n_obs: usize,
}

/// Consecutive-month `(previous, current)` pairs with both values present.
fn lag_pairs(target: &TimeSeries) -> Result<Vec<(f64, f64)>> {
    if target.frequency() != Frequency::Monthly {
        return Err(Error::InvalidParameter {
            message: format!(
                "ar1_fit expects a monthly series, '{}' is {}",
                target.name(),
                target.frequency()
            ),
        });
    }
    let obs = target.observations();
    let mut pairs = Vec::new();
    for w in obs.windows(2) {
        if w[1].date != add_months(w[0].date, 1) {
            continue;
        }
        if let (Some(prev), Some(curr)) = (w[0].value, w[1].value) {
            pairs.push((prev, curr));
        }
    }
    Ok(pairs)
}

/// Fit the no-intercept benchmark.
pub fn ar1_fit(target: &TimeSeries) -> Result<Ar1Model> {
    let pairs = lag_pairs(target)?;
    if pairs.len() < 2 {
        return Err(Error::InsufficientData {
            context: format!("ar1_fit on '{}' (consecutive pairs)", target.name()),
            needed: 2,
            got: pairs.len(),
        });
    }
    let sxy: f64 = pairs.iter().map(|(prev, curr)| prev * curr).sum();
    let sxx: f64 = pairs.iter().map(|(prev, _)| prev * prev).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateVariance {
            name: target.name().to_string(),
        });
    }
    Ok(Ar1Model {
        beta: sxy / sxx,
        intercept: 0.0,
        n_obs: pairs.len(),
    })
}

/// Fit the benchmark with an intercept, by simple regression of `y_t` on
/// `y_{t-1}`.
pub fn ar1_fit_with_intercept(target: &TimeSeries) -> Result<Ar1Model> {
    let pairs = lag_pairs(target)?;
    if pairs.len() < 3 {
        return Err(Error::InsufficientData {
            context: format!(
                "ar1_fit_with_intercept on '{}' (consecutive pairs)",
                target.name()
            ),
            needed: 3,
            got: pairs.len(),
        });
    }
    let n = pairs.len() as f64;
    let mean_prev = pairs.iter().map(|(p, _)| p).sum::<f64>() / n;
    let mean_curr = pairs.iter().map(|(_, c)| c).sum::<f64>() / n;
    let sxx: f64 = pairs
        .iter()
        .map(|(p, _)| (p - mean_prev) * (p - mean_prev))
        .sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateVariance {
            name: target.name().to_string(),
        });
    }
    let sxy: f64 = pairs
        .iter()
        .map(|(p, c)| (p - mean_prev) * (c - mean_curr))
        .sum();
    let beta = sxy / sxx;
    Ok(Ar1Model {
        beta,
        intercept: mean_curr - beta * mean_prev,
        n_obs: pairs.len(),
    })
}

/// One-step prediction from the previous value.
pub fn ar1_predict(model: &Ar1Model, previous: f64) -> f64 {
    model.intercept + model.beta * previous
}

/// A point forecast for one month, optionally with quantile bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub date: NaiveDate,
    pub point: f64,
    pub quantiles: Vec<Quantile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub level: f64,
    pub value: f64,
}

/// Read forecasts produced by an external system.
///
/// Expected layout: header `date,point` plus optional quantile columns named
/// `q<level>` with levels strictly increasing across the header. Dates must
/// be month anchors and unique; records are returned sorted by date. An
/// empty or header-only file yields an empty list.
pub fn load_external_forecasts(path: &Path) -> Result<Vec<ForecastRecord>> {
    let display = path.display().to_string();
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(raw.as_bytes());

    let mut levels: Vec<f64> = Vec::new();
    {
        let headers = reader.headers().map_err(|e| Error::FormatError {
            file: display.clone(),
            line: 1,
            message: e.to_string(),
        })?;
        let fields: Vec<String> = headers.iter().map(|h| h.trim().to_lowercase()).collect();
        if fields.len() < 2 || fields[0] != "date" || fields[1] != "point" {
            return Err(Error::FormatError {
                file: display,
                line: 1,
                message: format!(
                    "expected header 'date,point[,q<level>...]', got '{}'",
                    fields.join(",")
                ),
            });
        }
        for field in &fields[2..] {
            let level = field
                .strip_prefix('q')
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::FormatError {
                    file: display.clone(),
                    line: 1,
                    message: format!("bad quantile column '{}'", field),
                })?;
            if !(0.0..=1.0).contains(&level) || level == 0.0 || level == 1.0 {
                return Err(Error::FormatError {
                    file: display,
                    line: 1,
                    message: format!("quantile level {} outside (0, 1)", level),
                });
            }
            if let Some(last) = levels.last() {
                if level <= *last {
                    return Err(Error::FormatError {
                        file: display,
                        line: 1,
                        message: "quantile levels must increase across the header".to_string(),
                    });
                }
            }
            levels.push(level);
        }
    }

    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::FormatError {
            file: display.clone(),
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(records.len() + 2);
        if record.len() != 2 + levels.len() {
            return Err(Error::FormatError {
                file: display,
                line,
                message: format!("expected {} fields, got {}", 2 + levels.len(), record.len()),
            });
        }
        let date = record[0]
            .parse::<NaiveDate>()
            .map_err(|e| Error::FormatError {
                file: display.clone(),
                line,
                message: format!("bad date '{}': {}", &record[0], e),
            })?;
        if date != crate::series::month_anchor(date) {
            return Err(Error::FormatError {
                file: display,
                line,
                message: format!("date {} is not a month anchor", date),
            });
        }
        if !seen.insert(date) {
            return Err(Error::FormatError {
                file: display,
                line,
                message: format!("duplicate date {}", date),
            });
        }
        let point = parse_value(&record[1], &display, line)?;
        let mut quantiles = Vec::with_capacity(levels.len());
        for (idx, level) in levels.iter().enumerate() {
            let value = parse_value(&record[2 + idx], &display, line)?;
            if let Some(prev) = quantiles.last() {
                let prev: &Quantile = prev;
                if value < prev.value {
                    return Err(Error::InvalidQuantiles {
                        line,
                        message: format!(
                            "value {} at level {} is below value {} at level {}",
                            value, level, prev.value, prev.level
                        ),
                    });
                }
            }
            quantiles.push(Quantile {
                level: *level,
                value,
            });
        }
        records.push(ForecastRecord {
            date,
            point,
            quantiles,
        });
    }
    records.sort_by_key(|r| r.date);
    Ok(records)
}

fn parse_value(raw: &str, file: &str, line: usize) -> Result<f64> {
    let v = raw.parse::<f64>().map_err(|e| Error::FormatError {
        file: file.to_string(),
        line,
        message: format!("bad value '{}': {}", raw, e),
    })?;
    if !v.is_finite() {
        return Err(Error::FormatError {
            file: file.to_string(),
            line,
            message: format!("non-finite value '{}'", raw),
        });
    }
    Ok(v)
}

/// Write forecast records in the format [`load_external_forecasts`] reads.
/// All records must carry the same quantile levels.
pub fn write_external_forecasts(path: &Path, records: &[ForecastRecord]) -> Result<()> {
    let display = path.display().to_string();
    let levels: Vec<f64> = records
        .first()
        .map(|r| r.quantiles.iter().map(|q| q.level).collect())
        .unwrap_or_default();
    for w in levels.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidParameter {
                message: "quantile levels must be strictly increasing".to_string(),
            });
        }
    }
    let mut out = String::from("date,point");
    for level in &levels {
        out.push_str(&format!(",q{}", level));
    }
    out.push('\n');
    for record in records {
        let record_levels: Vec<f64> = record.quantiles.iter().map(|q| q.level).collect();
        if record_levels != levels {
            return Err(Error::InvalidParameter {
                message: format!(
                    "record {} has quantile levels {:?}, expected {:?}",
                    record.date, record_levels, levels
                ),
            });
        }
        out.push_str(&format!("{},{}", record.date, record.point));
        for q in &record.quantiles {
            out.push_str(&format!(",{}", q.value));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(&display, e))
}

/// Everything a forecaster may look at when predicting one month. The
/// histories are already truncated so that nothing at or after `month` is
/// visible.
pub struct ForecastContext<'a> {
    pub month: NaiveDate,
    pub target_history: &'a TimeSeries,
    pub exogenous: &'a BTreeMap<String, TimeSeries>,
}

/// A model that can predict one month from restricted history.
pub trait Forecaster {
    fn name(&self) -> &str;
    fn forecast(&self, context: &ForecastContext<'_>) -> Result<f64>;
}

/// The autoregressive benchmark as a [`Forecaster`].
pub struct Ar1Forecaster {
    model: Ar1Model,
}

impl Ar1Forecaster {
    pub fn new(model: Ar1Model) -> Self {
        Ar1Forecaster { model }
    }

    pub fn model(&self) -> &Ar1Model {
        &self.model
    }
}

impl Forecaster for Ar1Forecaster {
    fn name(&self) -> &str {
        "ar1"
    }

    fn forecast(&self, context: &ForecastContext<'_>) -> Result<f64> {
        let prev_month = add_months(context.month, -1);
        match context.target_history.value_at(prev_month) {
            Some(prev) => Ok(ar1_predict(&self.model, prev)),
            None => Err(Error::InsufficientHistory {
                context: format!(
                    "ar1 forecast for {} needs the target value at {}",
                    context.month, prev_month
                ),
                shortfall: 1,
                unit: "months",
            }),
        }
    }
}

/// A fitted mixed-frequency regression as a [`Forecaster`].
pub struct MidasForecaster {
    model: MidasModel,
}

impl MidasForecaster {
    pub fn new(model: MidasModel) -> Self {
        MidasForecaster { model }
    }

    pub fn model(&self) -> &MidasModel {
        &self.model
    }
}

impl Forecaster for MidasForecaster {
    fn name(&self) -> &str {
        "midas"
    }

    fn forecast(&self, context: &ForecastContext<'_>) -> Result<f64> {
        nowcast(
            &self.model,
            context.target_history,
            context.exogenous,
            context.month,
        )
    }
}

/// Point forecasts loaded from an external file, looked up by month.
pub struct ExternalForecaster {
    name: String,
    points: BTreeMap<NaiveDate, f64>,
}

impl ExternalForecaster {
    pub fn from_records(name: impl Into<String>, records: &[ForecastRecord]) -> Self {
        ExternalForecaster {
            name: name.into(),
            points: records.iter().map(|r| (r.date, r.point)).collect(),
        }
    }
}

impl Forecaster for ExternalForecaster {
    fn name(&self) -> &str {
        &self.name
    }

    fn forecast(&self, context: &ForecastContext<'_>) -> Result<f64> {
        self.points
            .get(&context.month)
            .copied()
            .ok_or_else(|| Error::MissingObservation {
                series: self.name.clone(),
                date: context.month,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().expect("test date")
    }

    fn monthly(name: &str, values: &[f64]) -> TimeSeries {
        TimeSeries::from_values(
            name,
            Frequency::Monthly,
            d("2019-01-01"),
            values.iter().copied(),
        )
        .unwrap()
    }

    #[test]
    fn ar1_closed_form_matches_hand_computation() {
        // y = 1,2,1,2,... over 12 months: sum(y_t y_{t-1}) = 22 over 11
        // pairs, sum(y_{t-1}^2) = 6*1 + 5*4 = 26, so beta = 11/13.
        let values: Vec<f64> = (0..12).map(|i| if i % 2 == 0 { 1.0 } else { 2.0 }).collect();
        let model = ar1_fit(&monthly("y", &values)).unwrap();
        assert_relative_eq!(model.beta, 11.0 / 13.0, epsilon = 1e-15);
        assert_eq!(model.intercept, 0.0);
        assert_eq!(model.n_obs, 11);
    }

    #[test]
    fn ar1_is_one_on_constant_series_and_two_on_doubling_series() {
        let constant = monthly("y", &[1.4; 8]);
        assert_relative_eq!(ar1_fit(&constant).unwrap().beta, 1.0, epsilon = 1e-15);

        let doubling: Vec<f64> = (0..10).map(|i| 2.0f64.powi(i)).collect();
        assert_relative_eq!(
            ar1_fit(&monthly("y", &doubling)).unwrap().beta,
            2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn ar1_predict_is_a_scaled_previous_value() {
        let model = Ar1Model {
            beta: 0.935,
            intercept: 0.0,
            n_obs: 120,
        };
        assert_relative_eq!(ar1_predict(&model, 2.0), 1.87, epsilon = 1e-12);
        let unit = Ar1Model {
            beta: 1.0,
            intercept: 0.0,
            n_obs: 10,
        };
        assert_relative_eq!(ar1_predict(&unit, 1.4), 1.4);
        let zero = Ar1Model {
            beta: 0.0,
            intercept: 0.0,
            n_obs: 10,
        };
        assert_relative_eq!(ar1_predict(&zero, 123.4), 0.0);
    }

    #[test]
    fn ar1_rejects_daily_series() {
        let s = TimeSeries::from_values(
            "x",
            Frequency::Daily,
            d("2019-01-01"),
            (0..10).map(|i| i as f64),
        )
        .unwrap();
        assert!(matches!(
            ar1_fit(&s).unwrap_err(),
            Error::InvalidParameter { .. }
        ));
    }

    #[test]
    fn ar1_residuals_are_orthogonal_to_the_regressor() {
        let values: Vec<f64> = (0..30).map(|i| 1.0 + ((i * 13 % 17) as f64) * 0.1).collect();
        let s = monthly("y", &values);
        let model = ar1_fit(&s).unwrap();
        let dot: f64 = values
            .windows(2)
            .map(|w| (w[1] - model.beta * w[0]) * w[0])
            .sum();
        assert_relative_eq!(dot, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn ar1_skips_missing_values_and_month_gaps() {
        use crate::series::Observation;
        let obs = vec![
            Observation::new(d("2019-01-01"), 1.0),
            Observation::new(d("2019-02-01"), 2.0),
            Observation::missing(d("2019-03-01")),
            Observation::new(d("2019-04-01"), 3.0),
            // gap: no 2019-05
            Observation::new(d("2019-06-01"), 4.0),
            Observation::new(d("2019-07-01"), 5.0),
        ];
        let s = TimeSeries::new("y", Frequency::Monthly, obs).unwrap();
        let model = ar1_fit(&s).unwrap();
        // Usable pairs: (1,2) and (4,5) only.
        assert_eq!(model.n_obs, 2);
        assert_relative_eq!(model.beta, (1.0 * 2.0 + 4.0 * 5.0) / (1.0 + 16.0), epsilon = 1e-15);
    }

    #[test]
    fn ar1_rejects_all_zero_history() {
        let s = monthly("y", &[0.0; 10]);
        assert!(matches!(
            ar1_fit(&s).unwrap_err(),
            Error::DegenerateVariance { .. }
        ));
    }

    #[test]
    fn ar1_needs_two_pairs() {
        let s = monthly("y", &[1.0, 2.0]);
        assert!(matches!(
            ar1_fit(&s).unwrap_err(),
            Error::InsufficientData { .. }
        ));
    }

    #[test]
    fn ar1_with_intercept_fits_a_shifted_walk_exactly() {
        // y_t = 1 + y_{t-1} exactly: slope 1, intercept 1.
        let values: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let model = ar1_fit_with_intercept(&monthly("y", &values)).unwrap();
        assert_relative_eq!(model.beta, 1.0, epsilon = 1e-12);
        assert_relative_eq!(model.intercept, 1.0, epsilon = 1e-12);
        assert_relative_eq!(ar1_predict(&model, 10.0), 11.0, epsilon = 1e-12);
    }

    #[test]
    fn ar1_forecaster_reads_the_previous_month_from_history() {
        let history = monthly("y", &[1.0, 2.0, 4.0]);
        let forecaster = Ar1Forecaster::new(Ar1Model {
            beta: 0.5,
            intercept: 0.25,
            n_obs: 2,
        });
        let exog = BTreeMap::new();
        let ctx = ForecastContext {
            month: d("2019-04-01"),
            target_history: &history,
            exogenous: &exog,
        };
        assert_relative_eq!(forecaster.forecast(&ctx).unwrap(), 0.25 + 0.5 * 4.0);

        let too_far = ForecastContext {
            month: d("2019-06-01"),
            target_history: &history,
            exogenous: &exog,
        };
        assert!(matches!(
            forecaster.forecast(&too_far).unwrap_err(),
            Error::InsufficientHistory { .. }
        ));
    }

    #[test]
    fn external_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("forecasts.csv");
        let records = vec![
            ForecastRecord {
                date: d("2020-01-01"),
                point: 1.5,
                quantiles: vec![
                    Quantile { level: 0.1, value: 1.0 },
                    Quantile { level: 0.5, value: 1.5 },
                    Quantile { level: 0.9, value: 2.25 },
                ],
            },
            ForecastRecord {
                date: d("2020-02-01"),
                point: -0.125,
                quantiles: vec![
                    Quantile { level: 0.1, value: -1.0 },
                    Quantile { level: 0.5, value: -0.125 },
                    Quantile { level: 0.9, value: 0.5 },
                ],
            },
        ];
        write_external_forecasts(&path, &records).unwrap();
        let back = load_external_forecasts(&path).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn external_loader_accepts_point_only_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("points.csv");
        std::fs::write(&path, "date,point\n2020-02-01,2.5\n2020-01-01,1.5\n").unwrap();
        let records = load_external_forecasts(&path).unwrap();
        // Sorted by date on the way in.
        assert_eq!(records[0].date, d("2020-01-01"));
        assert_eq!(records[1].point, 2.5);
        assert!(records[0].quantiles.is_empty());
    }

    #[test]
    fn external_loader_returns_empty_for_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "").unwrap();
        assert!(load_external_forecasts(&path).unwrap().is_empty());
        std::fs::write(&path, "date,point\n").unwrap();
        assert!(load_external_forecasts(&path).unwrap().is_empty());
    }

    #[test]
    fn external_loader_rejects_duplicate_dates_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.csv");
        std::fs::write(
            &path,
            "date,point\n2020-01-01,1.0\n2020-02-01,2.0\n2020-01-01,3.0\n",
        )
        .unwrap();
        match load_external_forecasts(&path).unwrap_err() {
            Error::FormatError { line, message, .. } => {
                assert_eq!(line, 4);
                assert!(message.contains("duplicate"), "{message}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn external_loader_rejects_quantile_crossings() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("crossed.csv");
        std::fs::write(
            &path,
            "date,point,q0.1,q0.9\n2020-01-01,1.0,2.0,1.0\n",
        )
        .unwrap();
        match load_external_forecasts(&path).unwrap_err() {
            Error::InvalidQuantiles { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn external_loader_rejects_off_anchor_dates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mid.csv");
        std::fs::write(&path, "date,point\n2020-01-15,1.0\n").unwrap();
        assert!(matches!(
            load_external_forecasts(&path).unwrap_err(),
            Error::FormatError { line: 2, .. }
        ));
    }

    #[test]
    fn external_loader_rejects_unsorted_header_levels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("levels.csv");
        std::fs::write(&path, "date,point,q0.9,q0.1\n2020-01-01,1.0,2.0,0.5\n").unwrap();
        assert!(matches!(
            load_external_forecasts(&path).unwrap_err(),
            Error::FormatError { line: 1, .. }
        ));
    }

    #[test]
    fn external_forecaster_reports_the_missing_month() {
        let records = vec![ForecastRecord {
            date: d("2020-01-01"),
            point: 1.0,
            quantiles: vec![],
        }];
        let forecaster = ExternalForecaster::from_records("ext", &records);
        let history = monthly("y", &[1.0, 2.0]);
        let exog = BTreeMap::new();
        let ctx = ForecastContext {
            month: d("2020-03-01"),
            target_history: &history,
            exogenous: &exog,
        };
        match forecaster.forecast(&ctx).unwrap_err() {
            Error::MissingObservation { date, .. } => assert_eq!(date, d("2020-03-01")),
            other => panic!("unexpected error {other}"),
        }
    }

    proptest! {
        #[test]
        fn ar1_matches_the_two_line_oracle(values in proptest::collection::vec(-10.0f64..10.0, 3..60)) {
            let s = monthly("y", &values);
            let sxy: f64 = values.windows(2).map(|w| w[0] * w[1]).sum();
            let sxx: f64 = values[..values.len() - 1].iter().map(|v| v * v).sum();
            prop_assume!(sxx > 1e-9);
            let model = ar1_fit(&s).unwrap();
            prop_assert!((model.beta - sxy / sxx).abs() <= 1e-12 * (1.0 + (sxy / sxx).abs()));
        }

        #[test]
        fn ar1_is_scale_invariant(
            values in proptest::collection::vec(0.5f64..5.0, 4..40),
            scale in 0.1f64..20.0,
        ) {
            let base = ar1_fit(&monthly("y", &values)).unwrap();
            let scaled_values: Vec<f64> = values.iter().map(|v| v * scale).collect();
            let scaled = ar1_fit(&monthly("y", &scaled_values)).unwrap();
            prop_assert!((base.beta - scaled.beta).abs() < 1e-10);
        }
    }
}
