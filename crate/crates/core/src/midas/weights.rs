//! Parametric lag-weight families.
//!
//! Every family maps a short parameter vector to a full set of `J`
//! non-negative weights that sum to one, so a daily window enters the
//! regression through one or two free parameters instead of `J` of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest exponent fed to `exp` before the raw exponential-Almon weights
/// are declared out of range.
const EXP_ALMON_MAX_EXPONENT: f64 = 700.0;

/// Weight family and its current parameter values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LagWeightFamily {
    /// Beta-density weights, flexible hump or monotone shapes for positive
    /// `theta1`, `theta2`.
    Beta { theta1: f64, theta2: f64 },
    /// Exponential Almon weights, `w_j` proportional to
    /// `exp(theta1 (j+1) + theta2 (j+1)^2)`.
    ExpAlmon { theta1: f64, theta2: f64 },
    /// Equal weights; no free parameters.
    Uniform,
}

impl LagWeightFamily {
    pub fn name(&self) -> &'static str {
        match self {
            LagWeightFamily::Beta { .. } => "beta",
            LagWeightFamily::ExpAlmon { .. } => "exp_almon",
            LagWeightFamily::Uniform => "uniform",
        }
    }

    /// Number of free parameters the family exposes to the optimiser.
    pub fn parameter_count(&self) -> usize {
        match self {
            LagWeightFamily::Beta { .. } | LagWeightFamily::ExpAlmon { .. } => 2,
            LagWeightFamily::Uniform => 0,
        }
    }

    pub fn parameters(&self) -> Vec<f64> {
        match self {
            LagWeightFamily::Beta { theta1, theta2 }
            | LagWeightFamily::ExpAlmon { theta1, theta2 } => vec![*theta1, *theta2],
            LagWeightFamily::Uniform => Vec::new(),
        }
    }

    /// Same family with new parameter values.
    pub fn with_parameters(&self, params: &[f64]) -> Result<LagWeightFamily> {
        if params.len() != self.parameter_count() {
            return Err(Error::InvalidParameter {
                message: format!(
                    "{} weights take {} parameters, got {}",
                    self.name(),
                    self.parameter_count(),
                    params.len()
                ),
            });
        }
        Ok(match self {
            LagWeightFamily::Beta { .. } => LagWeightFamily::Beta {
                theta1: params[0],
                theta2: params[1],
            },
            LagWeightFamily::ExpAlmon { .. } => LagWeightFamily::ExpAlmon {
                theta1: params[0],
                theta2: params[1],
            },
            LagWeightFamily::Uniform => LagWeightFamily::Uniform,
        })
    }
}

/// A weight family together with the window length it is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagWeightSpec {
    pub family: LagWeightFamily,
    pub lags: usize,
}

/// Evaluate the weight vector: `weights(spec)[j]` multiplies the value `j`
/// days before the reference date.
///
/// The beta kernel is evaluated on the midpoint grid `u_j = (j + 0.5) / J`,
/// which keeps it finite for shape parameters below one (the endpoints 0 and
/// 1 would blow up there). The exponential-Almon weights are normalised via
/// a max-shift so that admissible parameters never overflow, and parameters
/// whose raw exponent passes 700 are rejected outright.
pub fn weights(spec: &LagWeightSpec) -> Result<Vec<f64>> {
    let j = spec.lags;
    if j == 0 {
        return Err(Error::InvalidParameter {
            message: "lag-weight window must have at least 1 lag".to_string(),
        });
    }
    match spec.family {
        LagWeightFamily::Uniform => Ok(vec![1.0 / j as f64; j]),
        LagWeightFamily::Beta { theta1, theta2 } => {
            if !theta1.is_finite() || !theta2.is_finite() || theta1 <= 0.0 || theta2 <= 0.0 {
                return Err(Error::InvalidParameter {
                    message: format!(
                        "beta weight parameters must be finite and positive, got ({}, {})",
                        theta1, theta2
                    ),
                });
            }
            let mut raw = Vec::with_capacity(j);
            for i in 0..j {
                let u = (i as f64 + 0.5) / j as f64;
                let w = u.powf(theta1 - 1.0) * (1.0 - u).powf(theta2 - 1.0);
                if !w.is_finite() {
                    return Err(Error::ParameterOverflow {
                        message: format!(
                            "beta kernel overflows at lag {} for parameters ({}, {})",
                            i, theta1, theta2
                        ),
                    });
                }
                raw.push(w);
            }
            normalise(raw, "beta")
        }
        LagWeightFamily::ExpAlmon { theta1, theta2 } => {
            if !theta1.is_finite() || !theta2.is_finite() {
                return Err(Error::InvalidParameter {
                    message: format!(
                        "exponential Almon parameters must be finite, got ({}, {})",
                        theta1, theta2
                    ),
                });
            }
            let exponents: Vec<f64> = (0..j)
                .map(|i| {
                    let lag = (i + 1) as f64;
                    theta1 * lag + theta2 * lag * lag
                })
                .collect();
            let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !max.is_finite() || max > EXP_ALMON_MAX_EXPONENT {
                return Err(Error::ParameterOverflow {
                    message: format!(
                        "exponential Almon exponent reaches {:.1} for parameters ({}, {})",
                        max, theta1, theta2
                    ),
                });
            }
            let raw: Vec<f64> = exponents.iter().map(|e| (e - max).exp()).collect();
            normalise(raw, "exponential Almon")
        }
    }
}

fn normalise(raw: Vec<f64>, family: &str) -> Result<Vec<f64>> {
    let sum: f64 = raw.iter().sum();
    if !sum.is_finite() || sum == 0.0 {
        return Err(Error::ParameterOverflow {
            message: format!("{} weights sum to {}, cannot normalise", family, sum),
        });
    }
    Ok(raw.into_iter().map(|w| w / sum).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec(family: LagWeightFamily, lags: usize) -> LagWeightSpec {
        LagWeightSpec { family, lags }
    }

    #[test]
    fn uniform_weights_are_equal() {
        let w = weights(&spec(LagWeightFamily::Uniform, 22)).unwrap();
        assert_eq!(w.len(), 22);
        for wi in &w {
            assert_relative_eq!(*wi, 1.0 / 22.0);
        }
    }

    #[test]
    fn beta_one_one_reduces_to_uniform() {
        let w = weights(&spec(
            LagWeightFamily::Beta {
                theta1: 1.0,
                theta2: 1.0,
            },
            22,
        ))
        .unwrap();
        for wi in &w {
            assert_relative_eq!(*wi, 1.0 / 22.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn exp_almon_zero_zero_reduces_to_uniform() {
        let w = weights(&spec(
            LagWeightFamily::ExpAlmon {
                theta1: 0.0,
                theta2: 0.0,
            },
            10,
        ))
        .unwrap();
        for wi in &w {
            assert_relative_eq!(*wi, 0.1, epsilon = 1e-15);
        }
    }

    #[test]
    fn beta_two_lag_weights_match_hand_computation() {
        // J = 2 puts the grid at u = 0.25, 0.75. Beta(2,1) gives raw weights
        // u itself, so [0.25, 0.75] after normalisation; Beta(1,2) mirrors it.
        let w = weights(&spec(
            LagWeightFamily::Beta {
                theta1: 2.0,
                theta2: 1.0,
            },
            2,
        ))
        .unwrap();
        assert_relative_eq!(w[0], 0.25, epsilon = 1e-12);
        assert_relative_eq!(w[1], 0.75, epsilon = 1e-12);
        let m = weights(&spec(
            LagWeightFamily::Beta {
                theta1: 1.0,
                theta2: 2.0,
            },
            2,
        ))
        .unwrap();
        assert_relative_eq!(m[0], 0.75, epsilon = 1e-12);
        assert_relative_eq!(m[1], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn exp_almon_doubling_weights_match_hand_computation() {
        // theta1 = ln 2, theta2 = 0 doubles each successive weight:
        // raw = [2, 4, 8], normalised = [1/7, 2/7, 4/7].
        let w = weights(&spec(
            LagWeightFamily::ExpAlmon {
                theta1: std::f64::consts::LN_2,
                theta2: 0.0,
            },
            3,
        ))
        .unwrap();
        assert_relative_eq!(w[0], 1.0 / 7.0, epsilon = 1e-12);
        assert_relative_eq!(w[1], 2.0 / 7.0, epsilon = 1e-12);
        assert_relative_eq!(w[2], 4.0 / 7.0, epsilon = 1e-12);
    }

    #[test]
    fn beta_one_three_is_strictly_decreasing() {
        let w = weights(&spec(
            LagWeightFamily::Beta {
                theta1: 1.0,
                theta2: 3.0,
            },
            22,
        ))
        .unwrap();
        for pair in w.windows(2) {
            assert!(pair[0] > pair[1], "weights not strictly decreasing: {pair:?}");
        }
    }

    #[test]
    fn beta_handles_shape_parameters_below_one() {
        let w = weights(&spec(
            LagWeightFamily::Beta {
                theta1: 0.5,
                theta2: 0.5,
            },
            22,
        ))
        .unwrap();
        assert!(w.iter().all(|wi| wi.is_finite() && *wi > 0.0));
        // U-shape: endpoints above the middle.
        assert!(w[0] > w[10]);
        assert!(w[21] > w[10]);
    }

    #[test]
    fn beta_rejects_non_positive_parameters() {
        for bad in [(0.0, 1.0), (1.0, -2.0), (f64::NAN, 1.0)] {
            let err = weights(&spec(
                LagWeightFamily::Beta {
                    theta1: bad.0,
                    theta2: bad.1,
                },
                5,
            ))
            .unwrap_err();
            assert!(matches!(err, Error::InvalidParameter { .. }), "{err}");
        }
    }

    #[test]
    fn exp_almon_rejects_overflowing_exponents() {
        let err = weights(&spec(
            LagWeightFamily::ExpAlmon {
                theta1: 40.0,
                theta2: 0.0,
            },
            22,
        ))
        .unwrap_err();
        assert!(matches!(err, Error::ParameterOverflow { .. }), "{err}");
    }

    #[test]
    fn exp_almon_survives_steeply_decaying_parameters() {
        // Large negative exponents underflow individual weights to zero but
        // the max-shift keeps the vector normalisable.
        let w = weights(&spec(
            LagWeightFamily::ExpAlmon {
                theta1: -50.0,
                theta2: 0.0,
            },
            22,
        ))
        .unwrap();
        assert_relative_eq!(w[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_lags_is_rejected() {
        assert!(matches!(
            weights(&spec(LagWeightFamily::Uniform, 0)).unwrap_err(),
            Error::InvalidParameter { .. }
        ));
    }

    proptest! {
        #[test]
        fn beta_weights_are_a_probability_vector(
            theta1 in 0.05f64..20.0,
            theta2 in 0.05f64..20.0,
            lags in 1usize..60,
        ) {
            let w = weights(&spec(LagWeightFamily::Beta { theta1, theta2 }, lags)).unwrap();
            prop_assert_eq!(w.len(), lags);
            prop_assert!(w.iter().all(|wi| *wi >= 0.0));
            let sum: f64 = w.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12, "sum = {}", sum);
        }

        #[test]
        fn exp_almon_weights_are_a_probability_vector(
            theta1 in -1.0f64..1.0,
            theta2 in -0.05f64..0.05,
            lags in 1usize..60,
        ) {
            let w = weights(&spec(LagWeightFamily::ExpAlmon { theta1, theta2 }, lags)).unwrap();
            prop_assert_eq!(w.len(), lags);
            prop_assert!(w.iter().all(|wi| *wi >= 0.0));
            let sum: f64 = w.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12, "sum = {}", sum);
        }
    }
}
