//! Mixed-frequency (MIDAS) regression.
//!
//! The model explains a monthly target `y_t` with daily indicators: each
//! indicator enters through a weighted sum of its last `J` daily values,
//! where the weight profile over the lags comes from a small parametric
//! family instead of `J` free coefficients. Estimation profiles the linear
//! coefficients out by least squares and searches only over the weight
//! parameters.

mod design;
mod fit;
mod ols;
mod weights;

pub use design::{build_design, Design, ExogenousTerm, MidasSpec};
pub use fit::{fit, nowcast, FitSummary, MidasModel};
pub use ols::{ols, t_critical_975, two_sided_p_value, OlsResult};
pub use weights::{weights, LagWeightFamily, LagWeightSpec};
