//! Regression design assembly for mixed-frequency data.
//!
//! For each usable target month `t` the design row holds an intercept, one
//! weighted daily aggregate per exogenous indicator (the lag window ends on
//! the last day before month `t`, so a row never sees data from its own
//! month), and the requested number of endogenous monthly lags.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::midas::weights::{weights, LagWeightSpec};
use crate::series::{add_months, Frequency, TimeSeries};
use crate::series::lag_window;

/// One exogenous indicator and the lag-weight family applied to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogenousTerm {
    pub name: String,
    pub weights: LagWeightSpec,
}

/// Full model specification: which indicators enter, through which weight
/// family, plus the autoregressive part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MidasSpec {
    pub exogenous: Vec<ExogenousTerm>,
    pub endogenous_lags: usize,
    pub include_intercept: bool,
}

impl MidasSpec {
    pub fn validate(&self) -> Result<()> {
        if self.exogenous.is_empty() && self.endogenous_lags == 0 {
            return Err(Error::InvalidParameter {
                message: "model needs at least one exogenous term or endogenous lag".to_string(),
            });
        }
        for (i, term) in self.exogenous.iter().enumerate() {
            if term.weights.lags == 0 {
                return Err(Error::InvalidParameter {
                    message: format!("exogenous term '{}' has a zero-length window", term.name),
                });
            }
            if self.exogenous[..i].iter().any(|t| t.name == term.name) {
                return Err(Error::InvalidParameter {
                    message: format!("duplicate exogenous term '{}'", term.name),
                });
            }
        }
        Ok(())
    }

    /// Total number of free weight parameters across all exogenous terms.
    pub fn theta_dimension(&self) -> usize {
        self.exogenous
            .iter()
            .map(|t| t.weights.family.parameter_count())
            .sum()
    }

    /// Number of regression coefficients (intercept + terms + lags).
    pub fn coefficient_count(&self) -> usize {
        usize::from(self.include_intercept) + self.exogenous.len() + self.endogenous_lags
    }

    /// Column labels in design order.
    pub fn column_names(&self, target_name: &str) -> Vec<String> {
        let mut names = Vec::with_capacity(self.coefficient_count());
        if self.include_intercept {
            names.push("Constant".to_string());
        }
        for term in &self.exogenous {
            names.push(term.name.clone());
        }
        for lag in 1..=self.endogenous_lags {
            names.push(format!("{} t-{}", target_name, lag));
        }
        names
    }
}

/// Assembled regression problem for a fixed weight-parameter vector.
#[derive(Debug, Clone)]
pub struct Design {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    /// Month anchor of each row, in order.
    pub months: Vec<NaiveDate>,
    pub column_names: Vec<String>,
    /// Target months that had a value but not enough daily or lag history.
    pub dropped_months: Vec<NaiveDate>,
}

/// Precomputed window and lag data, reused across every evaluation of the
/// profiled objective. Only the weight vectors change with the parameters,
/// so the daily windows are extracted exactly once.
pub(crate) struct DesignBuilder {
    spec: MidasSpec,
    target_name: String,
    months: Vec<NaiveDate>,
    y: Vec<f64>,
    /// `windows[v]` is a (months x lags) matrix of daily values for
    /// exogenous term `v`, newest value first within each row.
    windows: Vec<DMatrix<f64>>,
    /// `endo[l]` is the column of monthly lag `l + 1` values.
    endo: Vec<Vec<f64>>,
    dropped: Vec<NaiveDate>,
}

impl DesignBuilder {
    pub fn new(
        target: &TimeSeries,
        exogenous: &BTreeMap<String, TimeSeries>,
        spec: &MidasSpec,
    ) -> Result<Self> {
        spec.validate()?;
        if target.frequency() != Frequency::Monthly {
            return Err(Error::InvalidParameter {
                message: format!(
                    "target '{}' must be monthly, got {}",
                    target.name(),
                    target.frequency()
                ),
            });
        }
        let mut series_refs = Vec::with_capacity(spec.exogenous.len());
        for term in &spec.exogenous {
            let series = exogenous.get(&term.name).ok_or_else(|| Error::InvalidParameter {
                message: format!("no exogenous series named '{}' was provided", term.name),
            })?;
            if series.frequency() != Frequency::Daily {
                return Err(Error::InvalidParameter {
                    message: format!(
                        "exogenous series '{}' must be daily, got {}",
                        term.name,
                        series.frequency()
                    ),
                });
            }
            series_refs.push(series);
        }

        let mut months = Vec::new();
        let mut y = Vec::new();
        let mut raw_windows: Vec<Vec<Vec<f64>>> = vec![Vec::new(); spec.exogenous.len()];
        let mut endo: Vec<Vec<f64>> = vec![Vec::new(); spec.endogenous_lags];
        let mut dropped = Vec::new();

        'months: for obs in target.observations() {
            let value = match obs.value {
                Some(v) => v,
                None => continue,
            };
            let anchor = obs.date;

            let mut lag_values = Vec::with_capacity(spec.endogenous_lags);
            for lag in 1..=spec.endogenous_lags {
                match target.value_at(add_months(anchor, -(lag as i32))) {
                    Some(v) => lag_values.push(v),
                    None => {
                        dropped.push(anchor);
                        continue 'months;
                    }
                }
            }

            let reference = anchor
                .checked_sub_days(Days::new(1))
                .expect("date within calendar range");
            let mut month_windows = Vec::with_capacity(spec.exogenous.len());
            for (term, series) in spec.exogenous.iter().zip(&series_refs) {
                match lag_window(series, reference, term.weights.lags) {
                    Ok(w) => month_windows.push(w),
                    Err(_) => {
                        dropped.push(anchor);
                        continue 'months;
                    }
                }
            }

            months.push(anchor);
            y.push(value);
            for (v, w) in month_windows.into_iter().enumerate() {
                raw_windows[v].push(w);
            }
            for (l, v) in lag_values.into_iter().enumerate() {
                endo[l].push(v);
            }
        }

        let needed = spec.coefficient_count() + 1;
        if months.len() < needed {
            let preview: Vec<String> = dropped.iter().take(6).map(|d| d.to_string()).collect();
            return Err(Error::InsufficientHistory {
                context: format!(
                    "design for '{}': {} usable months (need {}), {} dropped{}",
                    target.name(),
                    months.len(),
                    needed,
                    dropped.len(),
                    if preview.is_empty() {
                        String::new()
                    } else {
                        format!(" (first dropped: {})", preview.join(", "))
                    }
                ),
                shortfall: needed - months.len(),
                unit: "months",
            });
        }

        let windows = raw_windows
            .into_iter()
            .enumerate()
            .map(|(v, rows)| {
                let lags = spec.exogenous[v].weights.lags;
                DMatrix::from_fn(rows.len(), lags, |r, c| rows[r][c])
            })
            .collect();

        Ok(DesignBuilder {
            spec: spec.clone(),
            target_name: target.name().to_string(),
            months,
            y,
            windows,
            endo,
            dropped,
        })
    }

    pub fn rows(&self) -> usize {
        self.months.len()
    }

    /// Assemble the design matrix for one weight-parameter assignment,
    /// given as one parameter vector per exogenous term in spec order.
    pub fn design(&self, theta: &[Vec<f64>]) -> Result<Design> {
        if theta.len() != self.spec.exogenous.len() {
            return Err(Error::ShapeMismatch {
                context: "design weight parameters".to_string(),
                left: self.spec.exogenous.len(),
                right: theta.len(),
            });
        }
        let n = self.rows();
        let k = self.spec.coefficient_count();
        let mut x = DMatrix::zeros(n, k);
        let mut col = 0;

        if self.spec.include_intercept {
            for r in 0..n {
                x[(r, col)] = 1.0;
            }
            col += 1;
        }
        for (v, term) in self.spec.exogenous.iter().enumerate() {
            let family = term.weights.family.with_parameters(&theta[v])?;
            let w = weights(&LagWeightSpec {
                family,
                lags: term.weights.lags,
            })?;
            let wv = DVector::from_vec(w);
            let aggregated = &self.windows[v] * wv;
            for r in 0..n {
                x[(r, col)] = aggregated[r];
            }
            col += 1;
        }
        for lags in &self.endo {
            for (r, v) in lags.iter().enumerate() {
                x[(r, col)] = *v;
            }
            col += 1;
        }

        Ok(Design {
            x,
            y: DVector::from_vec(self.y.clone()),
            months: self.months.clone(),
            column_names: self.spec.column_names(&self.target_name),
            dropped_months: self.dropped.clone(),
        })
    }
}

/// Turn a by-name parameter map into per-term parameter vectors in spec
/// order. Terms absent from the map keep the parameters embedded in the
/// spec; unknown names are rejected.
pub fn resolve_theta(spec: &MidasSpec, theta: &BTreeMap<String, Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    for name in theta.keys() {
        if !spec.exogenous.iter().any(|t| &t.name == name) {
            return Err(Error::InvalidParameter {
                message: format!("weight parameters given for unknown term '{}'", name),
            });
        }
    }
    spec.exogenous
        .iter()
        .map(|term| {
            let params = match theta.get(&term.name) {
                Some(p) => p.clone(),
                None => term.weights.family.parameters(),
            };
            if params.len() != term.weights.family.parameter_count() {
                return Err(Error::InvalidParameter {
                    message: format!(
                        "term '{}' expects {} weight parameters, got {}",
                        term.name,
                        term.weights.family.parameter_count(),
                        params.len()
                    ),
                });
            }
            Ok(params)
        })
        .collect()
}

/// Build the regression design for a fixed parameter assignment.
pub fn build_design(
    target: &TimeSeries,
    exogenous: &BTreeMap<String, TimeSeries>,
    spec: &MidasSpec,
    theta: &BTreeMap<String, Vec<f64>>,
) -> Result<Design> {
    let builder = DesignBuilder::new(target, exogenous, spec)?;
    let assignment = resolve_theta(spec, theta)?;
    builder.design(&assignment)
}

/// Single design row for one month, used by nowcasting. The weight vectors
/// must already be evaluated, one per exogenous term in spec order.
pub(crate) fn regressor_row(
    spec: &MidasSpec,
    weight_vectors: &[Vec<f64>],
    target_history: &TimeSeries,
    exogenous: &BTreeMap<String, TimeSeries>,
    month: NaiveDate,
) -> Result<Vec<f64>> {
    let mut row = Vec::with_capacity(spec.coefficient_count());
    if spec.include_intercept {
        row.push(1.0);
    }
    let reference = month
        .checked_sub_days(Days::new(1))
        .expect("date within calendar range");
    for (term, w) in spec.exogenous.iter().zip(weight_vectors) {
        let series = exogenous.get(&term.name).ok_or_else(|| Error::InvalidParameter {
            message: format!("no exogenous series named '{}' was provided", term.name),
        })?;
        let window = lag_window(series, reference, term.weights.lags)?;
        let window = DMatrix::from_fn(1, window.len(), |_, c| window[c]);
        let aggregated = window * DVector::from_vec(w.clone());
        row.push(aggregated[0]);
    }
    for lag in 1..=spec.endogenous_lags {
        let date = add_months(month, -(lag as i32));
        match target_history.value_at(date) {
            Some(v) => row.push(v),
            None => {
                return Err(Error::InsufficientHistory {
                    context: format!(
                        "nowcast for {} needs target value at {} (lag {})",
                        month, date, lag
                    ),
                    shortfall: lag,
                    unit: "months",
                })
            }
        }
    }
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::midas::weights::LagWeightFamily;
    use approx::assert_relative_eq;

    fn d(s: &str) -> NaiveDate {
        s.parse().expect("test date")
    }

    fn uniform_term(name: &str, lags: usize) -> ExogenousTerm {
        ExogenousTerm {
            name: name.to_string(),
            weights: LagWeightSpec {
                family: LagWeightFamily::Uniform,
                lags,
            },
        }
    }

    fn daily_ramp(name: &str, start: &str, n: usize) -> TimeSeries {
        TimeSeries::from_values(
            name,
            Frequency::Daily,
            d(start),
            (0..n).map(|i| i as f64),
        )
        .unwrap()
    }

    #[test]
    fn design_aggregates_the_window_before_the_month() {
        // Daily ramp 0,1,2,... from 2020-01-01. For March 2020 a 3-day
        // uniform window ends on 2020-02-29 (day index 59), so the
        // aggregate is (59 + 58 + 57) / 3 = 58.
        let x = daily_ramp("x", "2020-01-01", 200);
        let target = TimeSeries::from_values(
            "y",
            Frequency::Monthly,
            d("2020-02-01"),
            [10.0, 20.0, 30.0, 40.0, 50.0],
        )
        .unwrap();
        let spec = MidasSpec {
            exogenous: vec![uniform_term("x", 3)],
            endogenous_lags: 0,
            include_intercept: true,
        };
        let mut exog = BTreeMap::new();
        exog.insert("x".to_string(), x);
        let design = build_design(&target, &exog, &spec, &BTreeMap::new()).unwrap();

        assert_eq!(design.months.len(), 5);
        assert_eq!(design.column_names, vec!["Constant", "x"]);
        let march_row = design.months.iter().position(|m| *m == d("2020-03-01")).unwrap();
        assert_relative_eq!(design.x[(march_row, 1)], 58.0, epsilon = 1e-12);
        // Target starts in February, so March carries the second value.
        assert_relative_eq!(design.y[march_row], 20.0);
    }

    #[test]
    fn design_drops_months_without_enough_daily_history() {
        let x = daily_ramp("x", "2020-03-10", 400);
        let target = TimeSeries::from_values(
            "y",
            Frequency::Monthly,
            d("2020-01-01"),
            (0..14).map(|i| i as f64),
        )
        .unwrap();
        let spec = MidasSpec {
            exogenous: vec![uniform_term("x", 22)],
            endogenous_lags: 0,
            include_intercept: true,
        };
        let mut exog = BTreeMap::new();
        exog.insert("x".to_string(), x);
        let design = build_design(&target, &exog, &spec, &BTreeMap::new()).unwrap();
        // Daily data starts 2020-03-10, so the first month whose 22-day
        // window fits is April 2020 (2020-03-10 through 2020-03-31 is
        // exactly 22 days). January through March get dropped.
        assert_eq!(design.months[0], d("2020-04-01"));
        assert!(design.dropped_months.contains(&d("2020-01-01")));
        assert!(design.dropped_months.contains(&d("2020-03-01")));
        assert!(!design.dropped_months.contains(&d("2020-04-01")));
        assert_eq!(design.months.len() + design.dropped_months.len(), 14);
    }

    #[test]
    fn design_includes_endogenous_lags() {
        let x = daily_ramp("x", "2019-01-01", 900);
        let values: Vec<f64> = (0..12).map(|i| (i * i) as f64).collect();
        let target =
            TimeSeries::from_values("y", Frequency::Monthly, d("2020-01-01"), values).unwrap();
        let spec = MidasSpec {
            exogenous: vec![uniform_term("x", 5)],
            endogenous_lags: 2,
            include_intercept: true,
        };
        let mut exog = BTreeMap::new();
        exog.insert("x".to_string(), x);
        let design = build_design(&target, &exog, &spec, &BTreeMap::new()).unwrap();
        // First two months lack lags; the rest have y_{t-1}, y_{t-2}.
        assert_eq!(design.months[0], d("2020-03-01"));
        assert_eq!(design.column_names, vec!["Constant", "x", "y t-1", "y t-2"]);
        assert_relative_eq!(design.x[(0, 2)], 1.0); // y at 2020-02-01
        assert_relative_eq!(design.x[(0, 3)], 0.0); // y at 2020-01-01
        assert_relative_eq!(design.y[0], 4.0);
    }

    #[test]
    fn design_errors_when_too_few_months_survive() {
        let x = daily_ramp("x", "2020-01-01", 90);
        let target = TimeSeries::from_values(
            "y",
            Frequency::Monthly,
            d("2020-02-01"),
            [1.0, 2.0],
        )
        .unwrap();
        let spec = MidasSpec {
            exogenous: vec![uniform_term("x", 22)],
            endogenous_lags: 0,
            include_intercept: true,
        };
        let mut exog = BTreeMap::new();
        exog.insert("x".to_string(), x);
        match build_design(&target, &exog, &spec, &BTreeMap::new()).unwrap_err() {
            Error::InsufficientHistory { shortfall, .. } => assert!(shortfall >= 1),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn design_requires_known_series_names() {
        let target = TimeSeries::from_values(
            "y",
            Frequency::Monthly,
            d("2020-01-01"),
            [1.0, 2.0, 3.0],
        )
        .unwrap();
        let spec = MidasSpec {
            exogenous: vec![uniform_term("missing", 5)],
            endogenous_lags: 0,
            include_intercept: true,
        };
        assert!(matches!(
            build_design(&target, &BTreeMap::new(), &spec, &BTreeMap::new()).unwrap_err(),
            Error::InvalidParameter { .. }
        ));
    }

    #[test]
    fn spec_rejects_duplicate_terms_and_empty_models() {
        let dup = MidasSpec {
            exogenous: vec![uniform_term("x", 3), uniform_term("x", 4)],
            endogenous_lags: 0,
            include_intercept: true,
        };
        assert!(dup.validate().is_err());
        let empty = MidasSpec {
            exogenous: vec![],
            endogenous_lags: 0,
            include_intercept: true,
        };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn resolve_theta_rejects_unknown_and_misshapen_parameters() {
        let spec = MidasSpec {
            exogenous: vec![ExogenousTerm {
                name: "x".to_string(),
                weights: LagWeightSpec {
                    family: LagWeightFamily::Beta {
                        theta1: 1.0,
                        theta2: 1.0,
                    },
                    lags: 5,
                },
            }],
            endogenous_lags: 0,
            include_intercept: true,
        };
        let mut unknown = BTreeMap::new();
        unknown.insert("z".to_string(), vec![1.0, 1.0]);
        assert!(resolve_theta(&spec, &unknown).is_err());

        let mut short = BTreeMap::new();
        short.insert("x".to_string(), vec![1.0]);
        assert!(resolve_theta(&spec, &short).is_err());

        let resolved = resolve_theta(&spec, &BTreeMap::new()).unwrap();
        assert_eq!(resolved, vec![vec![1.0, 1.0]]);
    }
}
