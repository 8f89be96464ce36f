//! Ordinary least squares with classical (conditional) inference.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::linalg;
use crate::midas::design::Design;

/// Coefficients and the usual inference summary for one design.
///
/// Standard errors, t statistics, p values, and confidence intervals all
/// treat the design as fixed; when the design came out of a profiled weight
/// search they are conditional on the chosen weight parameters.
#[derive(Debug, Clone)]
pub struct OlsResult {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_statistics: Vec<f64>,
    pub p_values: Vec<f64>,
    /// 95% confidence bounds, one pair per coefficient.
    pub conf_low: Vec<f64>,
    pub conf_high: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub rss: f64,
    /// Residual variance estimate, RSS / (n - k).
    pub sigma2: f64,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    pub n: usize,
    pub k: usize,
}

/// Upper 97.5% quantile of the Student t distribution, the half-width
/// multiplier of a 95% confidence interval.
pub fn t_critical_975(dof: usize) -> f64 {
    StudentsT::new(0.0, 1.0, dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975)
}

/// Two-sided p value of a t statistic.
pub fn two_sided_p_value(t: f64, dof: usize) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, dof as f64).expect("positive degrees of freedom");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

/// Fit `y = X b + e` and report the classical inference summary.
///
/// R-squared uses a mean-centred total sum of squares whenever the design
/// contains a constant column, and the raw sum of squares otherwise.
pub fn ols(design: &Design) -> Result<OlsResult> {
    let n = design.x.nrows();
    let k = design.x.ncols();
    if n < k + 1 {
        return Err(Error::InsufficientData {
            context: "ols".to_string(),
            needed: k + 1,
            got: n,
        });
    }
    let ls = linalg::least_squares(&design.x, &design.y)?;
    let dof = n - k;
    let sigma2 = ls.rss / dof as f64;
    let cov = ls.xtx_inverse() * sigma2;

    let mut std_errors = Vec::with_capacity(k);
    let mut t_statistics = Vec::with_capacity(k);
    let mut p_values = Vec::with_capacity(k);
    let mut conf_low = Vec::with_capacity(k);
    let mut conf_high = Vec::with_capacity(k);
    let t_crit = t_critical_975(dof);
    for i in 0..k {
        let se = cov[(i, i)].max(0.0).sqrt();
        let beta = ls.beta[i];
        let t = if se == 0.0 {
            if beta == 0.0 {
                0.0
            } else {
                f64::INFINITY * beta.signum()
            }
        } else {
            beta / se
        };
        std_errors.push(se);
        t_statistics.push(t);
        p_values.push(two_sided_p_value(t, dof));
        conf_low.push(beta - t_crit * se);
        conf_high.push(beta + t_crit * se);
    }

    let has_constant = (0..k).any(|j| {
        let first = design.x[(0, j)];
        first != 0.0 && (0..n).all(|i| design.x[(i, j)] == first)
    });
    let tss = if has_constant {
        let mean = design.y.iter().sum::<f64>() / n as f64;
        design.y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
    } else {
        design.y.iter().map(|v| v * v).sum::<f64>()
    };
    if tss == 0.0 {
        return Err(Error::DegenerateVariance {
            name: "response".to_string(),
        });
    }
    let r_squared = 1.0 - ls.rss / tss;
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / (n as f64 - k as f64);

    let fitted = design
        .y
        .iter()
        .zip(ls.residuals.iter())
        .map(|(y, r)| y - r)
        .collect();
    Ok(OlsResult {
        coefficients: ls.beta.iter().copied().collect(),
        std_errors,
        t_statistics,
        p_values,
        conf_low,
        conf_high,
        r_squared,
        adj_r_squared,
        rss: ls.rss,
        sigma2,
        residuals: ls.residuals.iter().copied().collect(),
        fitted,
        n,
        k,
    })
}
