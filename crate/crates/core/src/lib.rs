//! Mixed-frequency nowcasting toolkit.
//!
//! The crate estimates monthly target variables from daily indicator series
//! without pre-aggregating the daily data. The centrepiece is a MIDAS
//! regression with parametric lag weights ([`midas`]), flanked by exploratory
//! diagnostics ([`diagnostics`]), a closed-form autoregressive benchmark and a
//! file-based boundary for external forecasters ([`forecasters`]), and a
//! metric-comparison protocol for deciding whether one forecaster beats
//! another ([`evaluation`]).
//!
//! All calendar handling is explicit: every observation carries its own date,
//! daily and monthly grids are never mixed silently, and every frequency
//! transform is a named operation in [`series`].

pub mod diagnostics;
pub mod error;
pub mod evaluation;
pub mod forecasters;
mod linalg;
pub mod midas;
pub mod series;

pub use error::{Error, Result};
pub use series::{Frequency, Observation, TimeSeries};
