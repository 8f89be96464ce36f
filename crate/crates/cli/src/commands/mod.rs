pub mod backtest;
pub mod compare;
pub mod diagnose;
pub mod fit;
pub mod nowcast;
