//! Profiled nonlinear least squares for the mixed-frequency regression.
//!
//! The weight parameters are the only nonlinear part of the model, so the
//! fit runs a derivative-free simplex search over them and solves an
//! ordinary least-squares problem for the regression coefficients at every
//! candidate. The search is deterministic: a fixed grid of starting points,
//! a fixed iteration budget, and an exact tie-break rule, so refitting the
//! same data always returns the same model.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::midas::design::{regressor_row, resolve_theta, DesignBuilder, MidasSpec};
use crate::midas::ols::{ols, OlsResult};
use crate::midas::weights::{weights, LagWeightFamily, LagWeightSpec};
use crate::series::{month_anchor, Frequency, Observation, TimeSeries};

const MAX_ITERATIONS_PER_START: usize = 500;
const RELATIVE_F_TOLERANCE: f64 = 1e-10;
const ABSOLUTE_X_TOLERANCE: f64 = 1e-9;

/// How much work the weight-parameter search did.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub starts: usize,
    pub failed_starts: usize,
    pub objective_evaluations: usize,
}

/// A fitted mixed-frequency regression.
///
/// Inference fields are conditional on the selected weight parameters: the
/// standard errors treat `theta` as known rather than estimated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MidasModel {
    pub spec: MidasSpec,
    pub target_name: String,
    pub column_names: Vec<String>,
    pub coefficients: Vec<f64>,
    /// Estimated weight parameters per exogenous term.
    pub theta: BTreeMap<String, Vec<f64>>,
    pub std_errors: Vec<f64>,
    pub t_statistics: Vec<f64>,
    pub p_values: Vec<f64>,
    pub conf_low: Vec<f64>,
    pub conf_high: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub rss: f64,
    pub sigma2: f64,
    pub n_obs: usize,
    pub n_params: usize,
    pub residuals: TimeSeries,
    pub fit: FitSummary,
}

/// Estimate the model on the given data.
///
/// Families without free parameters reduce to a single least-squares solve.
/// Otherwise every grid start runs a simplex search on the profiled residual
/// sum of squares; the lowest RSS wins and exact ties go to the
/// lexicographically smallest parameter vector.
pub fn fit(
    target: &TimeSeries,
    exogenous: &BTreeMap<String, TimeSeries>,
    spec: &MidasSpec,
) -> Result<MidasModel> {
    let builder = DesignBuilder::new(target, exogenous, spec)?;
    let dim = spec.theta_dimension();

    let (assignment, summary) = if dim == 0 {
        let assignment = vec![Vec::new(); spec.exogenous.len()];
        (
            assignment,
            FitSummary {
                starts: 0,
                failed_starts: 0,
                objective_evaluations: 0,
            },
        )
    } else {
        search_theta(&builder, spec)?
    };

    let design = builder.design(&assignment)?;
    let inference = ols(&design)?;
    Ok(assemble_model(
        spec,
        target.name(),
        &design.months,
        assignment,
        inference,
        summary,
        &design.column_names,
    ))
}

fn assemble_model(
    spec: &MidasSpec,
    target_name: &str,
    months: &[NaiveDate],
    assignment: Vec<Vec<f64>>,
    inference: OlsResult,
    fit: FitSummary,
    column_names: &[String],
) -> MidasModel {
    let mut theta = BTreeMap::new();
    for (term, params) in spec.exogenous.iter().zip(&assignment) {
        theta.insert(term.name.clone(), params.clone());
    }
    let residual_obs: Vec<Observation> = months
        .iter()
        .zip(&inference.residuals)
        .map(|(m, r)| Observation::new(*m, *r))
        .collect();
    let residuals = TimeSeries::from_parts_unchecked(
        format!("{} residuals", target_name),
        Frequency::Monthly,
        residual_obs,
    );
    MidasModel {
        spec: spec.clone(),
        target_name: target_name.to_string(),
        column_names: column_names.to_vec(),
        coefficients: inference.coefficients,
        theta,
        std_errors: inference.std_errors,
        t_statistics: inference.t_statistics,
        p_values: inference.p_values,
        conf_low: inference.conf_low,
        conf_high: inference.conf_high,
        r_squared: inference.r_squared,
        adj_r_squared: inference.adj_r_squared,
        rss: inference.rss,
        sigma2: inference.sigma2,
        n_obs: inference.n,
        n_params: inference.k,
        residuals,
        fit,
    }
}

/// One-month-ahead point forecast from a fitted model.
///
/// Builds the same regressor row the training design would contain for
/// `month` (daily windows ending the day before the month starts, monthly
/// lags from `target_history`) and applies the estimated coefficients.
pub fn nowcast(
    model: &MidasModel,
    target_history: &TimeSeries,
    exogenous: &BTreeMap<String, TimeSeries>,
    month: NaiveDate,
) -> Result<f64> {
    let month = month_anchor(month);
    let assignment = resolve_theta(&model.spec, &model.theta)?;
    let mut weight_vectors = Vec::with_capacity(model.spec.exogenous.len());
    for (term, params) in model.spec.exogenous.iter().zip(&assignment) {
        let family = term.weights.family.with_parameters(params)?;
        weight_vectors.push(weights(&LagWeightSpec {
            family,
            lags: term.weights.lags,
        })?);
    }
    let row = regressor_row(
        &model.spec,
        &weight_vectors,
        target_history,
        exogenous,
        month,
    )?;
    if row.len() != model.coefficients.len() {
        return Err(Error::ShapeMismatch {
            context: "nowcast regressor row".to_string(),
            left: row.len(),
            right: model.coefficients.len(),
        });
    }
    Ok(row
        .iter()
        .zip(&model.coefficients)
        .map(|(x, b)| x * b)
        .sum())
}

fn search_theta(builder: &DesignBuilder, spec: &MidasSpec) -> Result<(Vec<Vec<f64>>, FitSummary)> {
    let starts = start_grid(spec);
    let mut evaluations = 0usize;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut causes = Vec::new();

    for start in &starts {
        let mut last_error: Option<String> = None;
        let mut objective = |theta_flat: &[f64]| match profiled_rss(builder, spec, theta_flat) {
            Ok(rss) if rss.is_finite() => rss,
            Ok(rss) => {
                last_error = Some(format!("objective value {} is not finite", rss));
                f64::INFINITY
            }
            Err(e) => {
                last_error = Some(e.to_string());
                f64::INFINITY
            }
        };
        let outcome = nelder_mead(&mut objective, start, MAX_ITERATIONS_PER_START);
        evaluations += outcome.evaluations;
        if outcome.f.is_finite() {
            let better = match &best {
                None => true,
                Some((bf, bx)) => {
                    outcome.f < *bf || (outcome.f == *bf && lexicographically_less(&outcome.x, bx))
                }
            };
            if better {
                best = Some((outcome.f, outcome.x));
            }
        } else {
            causes.push(format!(
                "start {:?}: {}",
                start,
                last_error.unwrap_or_else(|| "no admissible point found".to_string())
            ));
        }
    }

    let failed = causes.len();
    match best {
        Some((_, flat)) => Ok((
            split_theta(spec, &flat),
            FitSummary {
                starts: starts.len(),
                failed_starts: failed,
                objective_evaluations: evaluations,
            },
        )),
        None => Err(Error::FitFailed { causes }),
    }
}

fn profiled_rss(builder: &DesignBuilder, spec: &MidasSpec, theta_flat: &[f64]) -> Result<f64> {
    let assignment = split_theta(spec, theta_flat);
    let design = builder.design(&assignment)?;
    let ls = linalg::least_squares(&design.x, &design.y)?;
    Ok(ls.rss)
}

fn split_theta(spec: &MidasSpec, flat: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(spec.exogenous.len());
    let mut offset = 0;
    for term in &spec.exogenous {
        let count = term.weights.family.parameter_count();
        out.push(flat[offset..offset + count].to_vec());
        offset += count;
    }
    out
}

fn lexicographically_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Fixed starting points: a coarse grid per family, combined index-wise
/// across terms so the start count stays bounded no matter how many
/// indicators enter the model.
fn start_grid(spec: &MidasSpec) -> Vec<Vec<f64>> {
    let grids: Vec<Vec<Vec<f64>>> = spec
        .exogenous
        .iter()
        .map(|term| family_grid(&term.weights.family))
        .collect();
    let count = grids.iter().map(|g| g.len()).max().unwrap_or(1);
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(count);
    for s in 0..count {
        let mut flat = Vec::new();
        for grid in &grids {
            flat.extend_from_slice(&grid[s % grid.len()]);
        }
        if !starts.contains(&flat) {
            starts.push(flat);
        }
    }
    starts
}

fn family_grid(family: &LagWeightFamily) -> Vec<Vec<f64>> {
    match family {
        LagWeightFamily::Beta { .. } => {
            let values = [0.5, 1.0, 2.0, 5.0];
            let mut grid = Vec::with_capacity(16);
            for a in values {
                for b in values {
                    grid.push(vec![a, b]);
                }
            }
            grid
        }
        LagWeightFamily::ExpAlmon { .. } => {
            let first = [-0.5, 0.0, 0.1];
            let second = [-0.05, 0.0, 0.005];
            let mut grid = Vec::with_capacity(9);
            for a in first {
                for b in second {
                    grid.push(vec![a, b]);
                }
            }
            grid
        }
        LagWeightFamily::Uniform => vec![Vec::new()],
    }
}

pub(crate) struct SimplexOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
}

/// Standard Nelder-Mead simplex search.
///
/// Deterministic by construction: the initial simplex perturbs each
/// coordinate by 5% (or a small absolute step at zero), ordering uses a
/// total order on floats, and termination is a fixed tolerance or iteration
/// cap. Inadmissible points must be signalled by the objective returning
/// infinity.
pub(crate) fn nelder_mead(
    objective: &mut dyn FnMut(&[f64]) -> f64,
    start: &[f64],
    max_iterations: usize,
) -> SimplexOutcome {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let dim = start.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let f = objective(x);
        if f.is_nan() {
            f64::INFINITY
        } else {
            f
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for j in 0..dim {
        let mut point = start.to_vec();
        if point[j] != 0.0 {
            point[j] *= 1.05;
        } else {
            point[j] = 0.00025;
        }
        simplex.push(point);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evaluations)).collect();

    for _ in 0..max_iterations {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let f_spread = values[worst] - values[best];
        let converged_f = f_spread <= RELATIVE_F_TOLERANCE * (values[best].abs() + RELATIVE_F_TOLERANCE);
        let x_spread = simplex
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if converged_f || x_spread <= ABSOLUTE_X_TOLERANCE {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for (i, point) in simplex.iter().enumerate() {
            if i == worst {
                continue;
            }
            for (c, x) in centroid.iter_mut().zip(point) {
                *c += x;
            }
        }
        for c in &mut centroid {
            *c /= dim as f64;
        }

        let reflected: Vec<f64> = centroid
            .iter()
            .zip(&simplex[worst])
            .map(|(c, w)| c + REFLECT * (c - w))
            .collect();
        let f_reflected = eval(&reflected, &mut evaluations);

        if f_reflected < values[best] {
            let expanded: Vec<f64> = centroid
                .iter()
                .zip(&reflected)
                .map(|(c, r)| c + EXPAND * (r - c))
                .collect();
            let f_expanded = eval(&expanded, &mut evaluations);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            let (contracted, f_contracted) = if f_reflected < values[worst] {
                let point: Vec<f64> = centroid
                    .iter()
                    .zip(&reflected)
                    .map(|(c, r)| c + CONTRACT * (r - c))
                    .collect();
                let f = eval(&point, &mut evaluations);
                (point, f)
            } else {
                let point: Vec<f64> = centroid
                    .iter()
                    .zip(&simplex[worst])
                    .map(|(c, w)| c + CONTRACT * (w - c))
                    .collect();
                let f = eval(&point, &mut evaluations);
                (point, f)
            };
            if f_contracted < values[worst].min(f_reflected) {
                simplex[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                let anchor = simplex[best].clone();
                for i in 0..=dim {
                    if i == best {
                        continue;
                    }
                    let shrunk: Vec<f64> = anchor
                        .iter()
                        .zip(&simplex[i])
                        .map(|(b, x)| b + SHRINK * (x - b))
                        .collect();
                    values[i] = eval(&shrunk, &mut evaluations);
                    simplex[i] = shrunk;
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=dim {
        if values[i].total_cmp(&values[best]) == std::cmp::Ordering::Less {
            best = i;
        }
    }
    SimplexOutcome {
        x: simplex[best].clone(),
        f: values[best],
        evaluations,
    }
}
