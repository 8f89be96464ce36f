//! Exploratory diagnostics: autocorrelation, seasonal decomposition,
//! cross-correlation, and variance inflation factors.
//!
//! These are the checks run before any model is estimated, to see whether a
//! target is persistent enough to nowcast, whether it carries a seasonal
//! cycle, and whether a set of candidate indicators is too collinear to enter
//! one regression together.

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::series::{add_months, Frequency, Observation, TimeSeries};

/// Sample autocorrelation function together with its white-noise band.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Acf {
    /// `coefficients[k]` is the autocorrelation at lag `k`; entry 0 is 1.
    pub coefficients: Vec<f64>,
    /// Half-width of the approximate 95% band for white noise, `1.96/sqrt(n)`.
    pub confidence_band: f64,
    /// Number of observations the estimate is based on.
    pub n: usize,
}

/// Sample autocorrelations of the non-missing values up to `max_lag`.
///
/// Uses the standard biased estimator: autocovariances are divided by `n`
/// regardless of lag, which keeps the sequence positive semi-definite.
pub fn acf(series: &TimeSeries, max_lag: usize) -> Result<Acf> {
    let values = series.non_missing_values();
    let n = values.len();
    if n < max_lag + 2 {
        return Err(Error::InsufficientData {
            context: format!("acf of '{}' with {} lags", series.name(), max_lag),
            needed: max_lag + 2,
            got: n,
        });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let c0 = dev.iter().map(|d| d * d).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return Err(Error::DegenerateVariance {
            name: series.name().to_string(),
        });
    }
    let mut coefficients = Vec::with_capacity(max_lag + 1);
    coefficients.push(1.0);
    for k in 1..=max_lag {
        let ck = (0..n - k).map(|t| dev[t] * dev[t + k]).sum::<f64>() / n as f64;
        coefficients.push(ck / c0);
    }
    Ok(Acf {
        coefficients,
        confidence_band: 1.96 / (n as f64).sqrt(),
        n,
    })
}

/// Classical additive decomposition of a monthly series into trend, seasonal,
/// and residual components.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Decomposition {
    pub trend: TimeSeries,
    pub seasonal: TimeSeries,
    pub residual: TimeSeries,
    pub period: usize,
}

/// Additive decomposition with a centred moving-average trend.
///
/// For an even `period` the trend is the 2x`period` centred average (half
/// weight on the two endpoints); for an odd period it is the plain centred
/// average. The seasonal component is the per-phase mean of the detrended
/// series, re-centred to sum to zero over one cycle, and the residual is
/// whatever remains. Trend and residual are undefined (missing) on the first
/// and last `period/2` observations.
pub fn seasonal_decompose(series: &TimeSeries, period: usize) -> Result<Decomposition> {
    if period < 2 {
        return Err(Error::InvalidParameter {
            message: format!("decomposition period must be at least 2, got {}", period),
        });
    }
    if series.frequency() != Frequency::Monthly {
        return Err(Error::InvalidParameter {
            message: format!(
                "seasonal_decompose expects a monthly series, '{}' is {}",
                series.name(),
                series.frequency()
            ),
        });
    }
    let obs = series.observations();
    let n = obs.len();
    if n < 2 * period {
        return Err(Error::InsufficientData {
            context: format!("seasonal_decompose of '{}' with period {}", series.name(), period),
            needed: 2 * period,
            got: n,
        });
    }
    let mut values = Vec::with_capacity(n);
    for (i, o) in obs.iter().enumerate() {
        let expected = add_months(obs[0].date, i as i32);
        if o.date != expected {
            return Err(Error::MissingObservation {
                series: series.name().to_string(),
                date: expected,
            });
        }
        match o.value {
            Some(v) => values.push(v),
            None => {
                return Err(Error::MissingObservation {
                    series: series.name().to_string(),
                    date: o.date,
                })
            }
        }
    }

    let half = period / 2;
    let mut trend: Vec<Option<f64>> = vec![None; n];
    for i in half..n - half {
        let t = if period % 2 == 0 {
            let mut acc = 0.5 * values[i - half] + 0.5 * values[i + half];
            for j in i - half + 1..i + half {
                acc += values[j];
            }
            acc / period as f64
        } else {
            values[i - half..=i + half].iter().sum::<f64>() / period as f64
        };
        trend[i] = Some(t);
    }

    let mut phase_sum = vec![0.0; period];
    let mut phase_count = vec![0usize; period];
    for (i, t) in trend.iter().enumerate() {
        if let Some(t) = t {
            phase_sum[i % period] += values[i] - t;
            phase_count[i % period] += 1;
        }
    }
    let mut phase_mean: Vec<f64> = phase_sum
        .iter()
        .zip(&phase_count)
        .map(|(s, c)| s / *c as f64)
        .collect();
    let grand = phase_mean.iter().sum::<f64>() / period as f64;
    for m in &mut phase_mean {
        *m -= grand;
    }

    let mut trend_obs = Vec::with_capacity(n);
    let mut seasonal_obs = Vec::with_capacity(n);
    let mut residual_obs = Vec::with_capacity(n);
    for (i, o) in obs.iter().enumerate() {
        let s = phase_mean[i % period];
        seasonal_obs.push(Observation::new(o.date, s));
        trend_obs.push(Observation {
            date: o.date,
            value: trend[i],
        });
        residual_obs.push(Observation {
            date: o.date,
            value: trend[i].map(|t| values[i] - t - s),
        });
    }
    Ok(Decomposition {
        trend: TimeSeries::from_parts_unchecked("trend".into(), Frequency::Monthly, trend_obs),
        seasonal: TimeSeries::from_parts_unchecked(
            "seasonal".into(),
            Frequency::Monthly,
            seasonal_obs,
        ),
        residual: TimeSeries::from_parts_unchecked(
            "residual".into(),
            Frequency::Monthly,
            residual_obs,
        ),
        period,
    })
}

/// Symmetric pairwise correlation matrix with the series names attached.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// Row-major; `values[i][j]` is the correlation of series `i` and `j`.
    pub values: Vec<Vec<f64>>,
}

/// Pearson correlations between every pair of series, computed on the dates
/// where all of them have a value (complete-case alignment).
///
/// Aligning all series on one common set of dates keeps the matrix positive
/// semi-definite, which pairwise-deletion correlations do not guarantee.
pub fn correlation_matrix(series: &[TimeSeries]) -> Result<CorrelationMatrix> {
    if series.len() < 2 {
        return Err(Error::InsufficientData {
            context: "correlation_matrix".to_string(),
            needed: 2,
            got: series.len(),
        });
    }
    for (i, s) in series.iter().enumerate() {
        if series[..i].iter().any(|t| t.name() == s.name()) {
            return Err(Error::InvalidParameter {
                message: format!("duplicate series name '{}'", s.name()),
            });
        }
    }
    let common: Vec<NaiveDate> = series[0]
        .non_missing()
        .map(|(date, _)| date)
        .filter(|date| series[1..].iter().all(|s| s.value_at(*date).is_some()))
        .collect();
    if common.len() < 3 {
        return Err(Error::InsufficientData {
            context: "correlation_matrix common dates".to_string(),
            needed: 3,
            got: common.len(),
        });
    }

    let n = common.len();
    let mut deviations: Vec<Vec<f64>> = Vec::with_capacity(series.len());
    let mut norms: Vec<f64> = Vec::with_capacity(series.len());
    for s in series {
        let col: Vec<f64> = common
            .iter()
            .map(|d| s.value_at(*d).expect("date is in the common set"))
            .collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let dev: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let ss = dev.iter().map(|d| d * d).sum::<f64>();
        if ss == 0.0 {
            return Err(Error::DegenerateVariance {
                name: s.name().to_string(),
            });
        }
        deviations.push(dev);
        norms.push(ss.sqrt());
    }

    let k = series.len();
    let mut values = vec![vec![0.0; k]; k];
    for i in 0..k {
        values[i][i] = 1.0;
        for j in i + 1..k {
            let dot: f64 = deviations[i]
                .iter()
                .zip(&deviations[j])
                .map(|(a, b)| a * b)
                .sum();
            let r = dot / (norms[i] * norms[j]);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        names: series.iter().map(|s| s.name().to_string()).collect(),
        values,
    })
}

/// Variance inflation factors for each column of a regression design.
///
/// `VIF_j = 1 / (1 - R^2_j)` where `R^2_j` comes from regressing column `j`
/// on all the others. The fit of column `j` uses a mean-centred total sum of
/// squares when the remaining columns contain a constant, and an uncentred
/// one otherwise, so an intercept column gets a meaningful (near 1) factor
/// instead of a division by zero.
pub fn vif(columns: &[(String, Vec<f64>)]) -> Result<Vec<(String, f64)>> {
    let k = columns.len();
    if k < 2 {
        return Err(Error::InsufficientData {
            context: "vif".to_string(),
            needed: 2,
            got: k,
        });
    }
    let n = columns[0].1.len();
    for (name, col) in columns {
        if col.len() != n {
            return Err(Error::ShapeMismatch {
                context: format!("vif column '{}'", name),
                left: n,
                right: col.len(),
            });
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                message: format!("vif column '{}' contains a non-finite value", name),
            });
        }
    }
    if n < k + 1 {
        return Err(Error::InsufficientData {
            context: "vif".to_string(),
            needed: k + 1,
            got: n,
        });
    }

    let design = DMatrix::from_fn(n, k, |i, j| columns[j].1[i]);
    if let Some(j) = linalg::first_dependent_column(&design) {
        return Err(Error::ExactCollinearity {
            column: columns[j].0.clone(),
        });
    }

    let is_constant: Vec<bool> = columns
        .iter()
        .map(|(_, col)| col.iter().all(|v| *v == col[0]))
        .collect();

    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let others = DMatrix::from_fn(n, k - 1, |row, c| {
            let col = if c < j { c } else { c + 1 };
            columns[col].1[row]
        });
        let target = DVector::from_fn(n, |row, _| columns[j].1[row]);
        let ls = linalg::least_squares(&others, &target)?;

        let others_have_constant = (0..k).filter(|c| *c != j).any(|c| is_constant[c]);
        let tss = if others_have_constant {
            let mean = target.iter().sum::<f64>() / n as f64;
            target.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        } else {
            target.iter().map(|v| v * v).sum::<f64>()
        };
        if tss == 0.0 {
            return Err(Error::DegenerateVariance {
                name: columns[j].0.clone(),
            });
        }
        let r2 = 1.0 - ls.rss / tss;
        if 1.0 - r2 <= 1e-12 {
            return Err(Error::ExactCollinearity {
                column: columns[j].0.clone(),
            });
        }
        out.push((columns[j].0.clone(), 1.0 / (1.0 - r2)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn d(s: &str) -> NaiveDate {
        s.parse().expect("test date")
    }

    fn daily(name: &str, values: &[f64]) -> TimeSeries {
        TimeSeries::from_values(name, Frequency::Daily, d("2020-01-01"), values.iter().copied())
            .expect("valid test series")
    }

    fn monthly(name: &str, values: &[f64]) -> TimeSeries {
        TimeSeries::from_values(
            name,
            Frequency::Monthly,
            d("2015-01-01"),
            values.iter().copied(),
        )
        .expect("valid test series")
    }

    #[test]
    fn acf_of_alternating_series_matches_closed_form() {
        // For x_t = (-1)^t with n = 100 the lag-k autocorrelation is
        // (-1)^k (n - k) / n, so -0.99 at lag 1 and 0.98 at lag 2.
        let values: Vec<f64> = (0..100).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s = daily("alt", &values);
        let result = acf(&s, 2).unwrap();
        assert_eq!(result.coefficients[0], 1.0);
        assert_relative_eq!(result.coefficients[1], -0.99, epsilon = 1e-12);
        assert_relative_eq!(result.coefficients[2], 0.98, epsilon = 1e-12);
        assert_relative_eq!(result.confidence_band, 0.196, epsilon = 1e-12);
        assert_eq!(result.n, 100);
    }

    #[test]
    fn acf_is_invariant_under_affine_transforms() {
        let values: Vec<f64> = (0..60).map(|t| ((t as f64) * 0.7).sin()).collect();
        let scaled: Vec<f64> = values.iter().map(|v| 3.5 * v - 11.0).collect();
        let a = acf(&daily("raw", &values), 10).unwrap();
        let b = acf(&daily("scaled", &scaled), 10).unwrap();
        for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
            assert_relative_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn acf_skips_missing_values() {
        let mut obs: Vec<Observation> = (0..20)
            .map(|i| Observation::new(d("2020-01-01") + chrono::Days::new(i), (i as f64).cos()))
            .collect();
        obs[5].value = None;
        obs[11].value = None;
        let s = TimeSeries::new("gappy", Frequency::Daily, obs).unwrap();
        let result = acf(&s, 3).unwrap();
        assert_eq!(result.n, 18);
    }

    #[test]
    fn acf_rejects_constant_series() {
        let s = daily("flat", &[2.0; 30]);
        assert!(matches!(
            acf(&s, 5).unwrap_err(),
            Error::DegenerateVariance { .. }
        ));
    }

    #[test]
    fn acf_rejects_too_many_lags() {
        let s = daily("short", &[1.0, 2.0, 3.0]);
        assert!(matches!(
            acf(&s, 2).unwrap_err(),
            Error::InsufficientData { .. }
        ));
    }

    #[test]
    fn acf_band_contains_white_noise_at_the_nominal_rate() {
        // 100 fixed seeds x 20 lags of pure noise: about 95% of the
        // autocorrelations should fall inside the 1.96/sqrt(n) band.
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut inside = 0usize;
        let mut total = 0usize;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values: Vec<f64> = (0..200).map(|_| normal.sample(&mut rng)).collect();
            let result = acf(&daily("noise", &values), 20).unwrap();
            for rho in &result.coefficients[1..] {
                total += 1;
                if rho.abs() <= result.confidence_band {
                    inside += 1;
                }
            }
        }
        let fraction = inside as f64 / total as f64;
        assert!(
            fraction >= 0.93,
            "only {:.3} of white-noise autocorrelations inside the 95% band",
            fraction
        );
    }

    #[test]
    fn decomposition_recovers_line_plus_sinusoid_exactly() {
        // A linear trend passes through the centred moving average untouched
        // and a zero-mean period-12 cycle is annihilated by it, so the
        // decomposition is exact up to rounding.
        let n = 60;
        let trend_fn = |i: usize| 3.0 + 0.25 * i as f64;
        let cycle = |i: usize| (2.0 * std::f64::consts::PI * (i % 12) as f64 / 12.0).sin();
        let values: Vec<f64> = (0..n).map(|i| trend_fn(i) + cycle(i)).collect();
        let s = monthly("synthetic", &values);
        let parts = seasonal_decompose(&s, 12).unwrap();

        for i in 6..n - 6 {
            let date = add_months(d("2015-01-01"), i as i32);
            assert_relative_eq!(
                parts.trend.value_at(date).unwrap(),
                trend_fn(i),
                epsilon = 1e-9
            );
            assert_relative_eq!(
                parts.seasonal.value_at(date).unwrap(),
                cycle(i),
                epsilon = 1e-9
            );
            assert_relative_eq!(parts.residual.value_at(date).unwrap(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn decomposition_edges_are_missing() {
        let values: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let s = monthly("m", &values);
        let parts = seasonal_decompose(&s, 12).unwrap();
        for i in 0..6 {
            let date = add_months(d("2015-01-01"), i);
            assert_eq!(parts.trend.value_at(date), None);
            assert_eq!(parts.residual.value_at(date), None);
            assert!(parts.seasonal.value_at(date).is_some());
        }
        assert_eq!(parts.trend.value_at(add_months(d("2015-01-01"), 29)), None);
    }

    #[test]
    fn decomposition_components_sum_back_to_the_series() {
        let values: Vec<f64> = (0..48)
            .map(|i| 10.0 + 0.1 * i as f64 + ((i * 7 % 13) as f64) * 0.3)
            .collect();
        let s = monthly("m", &values);
        let parts = seasonal_decompose(&s, 12).unwrap();
        for (i, obs) in s.observations().iter().enumerate() {
            if let Some(t) = parts.trend.value_at(obs.date) {
                let sum = t
                    + parts.seasonal.value_at(obs.date).unwrap()
                    + parts.residual.value_at(obs.date).unwrap();
                assert_relative_eq!(sum, values[i], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn decomposition_seasonal_component_sums_to_zero_over_a_cycle() {
        let values: Vec<f64> = (0..40)
            .map(|i| (i as f64 * 0.4).sin() * 2.0 + i as f64 * 0.05)
            .collect();
        let parts = seasonal_decompose(&monthly("m", &values), 12).unwrap();
        let one_cycle: f64 = parts.seasonal.observations()[..12]
            .iter()
            .map(|o| o.value.unwrap())
            .sum();
        assert_relative_eq!(one_cycle, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn decomposition_handles_odd_periods() {
        let values: Vec<f64> = (0..21).map(|i| (i % 7) as f64).collect();
        let parts = seasonal_decompose(&monthly("m", &values), 7).unwrap();
        // Perfectly periodic input with no trend: the moving average is the
        // cycle mean (3.0) everywhere it is defined.
        let date = add_months(d("2015-01-01"), 10);
        assert_relative_eq!(parts.trend.value_at(date).unwrap(), 3.0, epsilon = 1e-12);
        assert_relative_eq!(parts.residual.value_at(date).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn decomposition_requires_two_full_cycles() {
        let values: Vec<f64> = (0..23).map(|i| i as f64).collect();
        assert!(matches!(
            seasonal_decompose(&monthly("m", &values), 12).unwrap_err(),
            Error::InsufficientData { needed: 24, .. }
        ));
    }

    #[test]
    fn decomposition_rejects_month_gaps() {
        let obs = vec![
            Observation::new(d("2015-01-01"), 1.0),
            Observation::new(d("2015-02-01"), 2.0),
            Observation::new(d("2015-03-01"), 1.0),
            // 2015-04 absent from the calendar entirely.
            Observation::new(d("2015-05-01"), 2.0),
            Observation::new(d("2015-06-01"), 1.0),
        ];
        let s = TimeSeries::new("m", Frequency::Monthly, obs).unwrap();
        match seasonal_decompose(&s, 2).unwrap_err() {
            Error::MissingObservation { date, .. } => assert_eq!(date, d("2015-04-01")),
            other => panic!("unexpected error {other}"),
        }

        let with_hole = vec![
            Observation::new(d("2015-01-01"), 1.0),
            Observation::new(d("2015-02-01"), 2.0),
            Observation::missing(d("2015-03-01")),
            Observation::new(d("2015-04-01"), 2.0),
        ];
        let s = TimeSeries::new("m", Frequency::Monthly, with_hole).unwrap();
        match seasonal_decompose(&s, 2).unwrap_err() {
            Error::MissingObservation { date, .. } => assert_eq!(date, d("2015-03-01")),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn correlation_matrix_matches_direct_computation() {
        let a = daily("a", &[1.0, 2.0, 3.0, 4.0, 5.0]);
        let b = daily("b", &[2.0, 4.0, 6.0, 8.0, 10.0]);
        let c = daily("c", &[5.0, 3.0, 4.0, 1.0, 2.0]);
        let m = correlation_matrix(&[a, b, c]).unwrap();
        assert_relative_eq!(m.values[0][1], 1.0, epsilon = 1e-12);
        // r(a, c) by hand: dev_a = [-2,-1,0,1,2], dev_c = [2,0,1,-2,-1],
        // dot = -8, norms = sqrt(10) each, r = -0.8.
        assert_relative_eq!(m.values[0][2], -0.8, epsilon = 1e-12);
        assert_relative_eq!(m.values[2][0], -0.8, epsilon = 1e-12);
        for i in 0..3 {
            assert_eq!(m.values[i][i], 1.0);
        }
    }

    #[test]
    fn correlation_matrix_aligns_on_common_dates() {
        // Series b misses the middle date; the aligned sample must drop that
        // date for every series.
        let a = daily("a", &[1.0, 2.0, 3.0, 4.0, 5.0]);
        let obs = vec![
            Observation::new(d("2020-01-01"), 10.0),
            Observation::new(d("2020-01-02"), 20.0),
            Observation::missing(d("2020-01-03")),
            Observation::new(d("2020-01-04"), 40.0),
            Observation::new(d("2020-01-05"), 50.0),
        ];
        let b = TimeSeries::new("b", Frequency::Daily, obs).unwrap();
        let m = correlation_matrix(&[a, b]).unwrap();
        assert_relative_eq!(m.values[0][1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn correlation_matrix_rejects_constant_series() {
        let a = daily("a", &[1.0, 2.0, 3.0]);
        let b = daily("b", &[4.0, 4.0, 4.0]);
        match correlation_matrix(&[a, b]).unwrap_err() {
            Error::DegenerateVariance { name } => assert_eq!(name, "b"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn correlation_matrix_needs_three_common_dates() {
        let a = daily("a", &[1.0, 2.0]);
        let b = daily("b", &[3.0, 5.0]);
        assert!(matches!(
            correlation_matrix(&[a, b]).unwrap_err(),
            Error::InsufficientData { needed: 3, .. }
        ));
    }

    #[test]
    fn vif_of_orthogonal_predictors_is_one() {
        let constant = ("const".to_string(), vec![1.0; 8]);
        let x1 = (
            "x1".to_string(),
            vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0],
        );
        let x2 = (
            "x2".to_string(),
            vec![1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0],
        );
        let factors = vif(&[constant, x1, x2]).unwrap();
        assert_relative_eq!(factors[1].1, 1.0, epsilon = 1e-10);
        assert_relative_eq!(factors[2].1, 1.0, epsilon = 1e-10);
        assert_relative_eq!(factors[0].1, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn vif_of_two_predictors_equals_correlation_formula() {
        // With exactly two predictors (plus intercept), VIF = 1/(1 - r^2).
        // For x1 = [1,2,3,4] and x2 = [1,2,3,5], r^2 = 42.25/43.75, so the
        // VIF is 43.75/1.5 = 175/6.
        let cols = vec![
            ("const".to_string(), vec![1.0; 4]),
            ("x1".to_string(), vec![1.0, 2.0, 3.0, 4.0]),
            ("x2".to_string(), vec![1.0, 2.0, 3.0, 5.0]),
        ];
        let factors = vif(&cols).unwrap();
        assert_relative_eq!(factors[1].1, 175.0 / 6.0, epsilon = 1e-9);
        assert_relative_eq!(factors[2].1, 175.0 / 6.0, epsilon = 1e-9);
    }

    #[test]
    fn vif_flags_duplicated_column() {
        let cols = vec![
            ("const".to_string(), vec![1.0; 5]),
            ("x1".to_string(), vec![1.0, 2.0, 3.0, 4.0, 5.0]),
            ("copy".to_string(), vec![1.0, 2.0, 3.0, 4.0, 5.0]),
        ];
        match vif(&cols).unwrap_err() {
            Error::ExactCollinearity { column } => assert_eq!(column, "copy"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn vif_flags_exact_linear_combination() {
        let cols = vec![
            ("const".to_string(), vec![1.0; 5]),
            ("x1".to_string(), vec![1.0, 2.0, 3.0, 4.0, 5.0]),
            ("x2".to_string(), vec![2.0, 1.0, 0.0, 1.0, 2.0]),
            ("sum".to_string(), vec![3.0, 3.0, 3.0, 5.0, 7.0]),
        ];
        assert!(matches!(
            vif(&cols).unwrap_err(),
            Error::ExactCollinearity { .. }
        ));
    }

    #[test]
    fn vif_requires_more_rows_than_columns() {
        let cols = vec![
            ("a".to_string(), vec![1.0, 2.0]),
            ("b".to_string(), vec![3.0, 1.0]),
        ];
        assert!(matches!(
            vif(&cols).unwrap_err(),
            Error::InsufficientData { .. }
        ));
    }

    proptest! {
        #[test]
        fn correlation_matrix_is_positive_semidefinite(
            seed in 0u64..500,
            k in 2usize..5,
            n in 10usize..40,
        ) {
            let normal = Normal::new(0.0, 1.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut series = Vec::new();
            let mut shared: Vec<f64> = Vec::new();
            for _ in 0..n {
                shared.push(normal.sample(&mut rng));
            }
            for i in 0..k {
                // Correlated columns: half shared factor, half idiosyncratic.
                let values: Vec<f64> = (0..n)
                    .map(|t| 0.5 * shared[t] + normal.sample(&mut rng))
                    .collect();
                series.push(daily(&format!("s{}", i), &values));
            }
            let m = correlation_matrix(&series).unwrap();
            let dm = DMatrix::from_fn(k, k, |i, j| m.values[i][j]);
            let eig = dm.symmetric_eigen();
            for ev in eig.eigenvalues.iter() {
                prop_assert!(*ev >= -1e-10, "negative eigenvalue {}", ev);
            }
            for i in 0..k {
                for j in 0..k {
                    prop_assert!(m.values[i][j].abs() <= 1.0 + 1e-12);
                    prop_assert!((m.values[i][j] - m.values[j][i]).abs() == 0.0);
                }
            }
        }

        #[test]
        fn vif_is_at_least_one(seed in 0u64..300, n in 8usize..40) {
            let normal = Normal::new(0.0, 1.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x1: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            let x2: Vec<f64> = (0..n)
                .map(|t| 0.3 * x1[t] + normal.sample(&mut rng))
                .collect();
            let cols = vec![
                ("const".to_string(), vec![1.0; n]),
                ("x1".to_string(), x1),
                ("x2".to_string(), x2),
            ];
            let factors = vif(&cols).unwrap();
            for (name, v) in &factors {
                prop_assert!(*v >= 1.0 - 1e-9, "vif of {} is {}", name, v);
            }
        }
    }
}
