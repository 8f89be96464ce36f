//! Command-line front end for the nowcasting toolkit: configuration loading,
//! dataset ingestion, and the five subcommands that wire the library into a
//! reproducible pipeline.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;
pub mod ingest;
pub mod output;

#[derive(Debug, Parser)]
#[command(
    name = "mfnow",
    version,
    about = "Mixed-frequency nowcasting: estimation, diagnostics, backtesting, comparison"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summaries, autocorrelation, seasonal decomposition, and collinearity
    /// checks for the configured dataset.
    Diagnose(DiagnoseArgs),
    /// Estimate the mixed-frequency regression and write the model file.
    Fit(FitArgs),
    /// Predict a single month with a saved or freshly fitted model.
    Nowcast(NowcastArgs),
    /// Score a forecaster month by month over the evaluation window.
    Backtest(BacktestArgs),
    /// Apply the outperformance rule to two metric reports.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Pipeline configuration file (JSON).
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
    /// Artifact directory; overrides the config's output.directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Artifact formats; overrides the config's output.formats.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub format: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Autocorrelation lags to compute for the target.
    #[arg(long, default_value_t = 24)]
    pub acf_lags: usize,
    /// Seasonal period in months.
    #[arg(long, default_value_t = 12)]
    pub period: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct NowcastArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Month to predict, as YYYY-MM or YYYY-MM-01.
    #[arg(long, value_name = "MONTH")]
    pub month: String,
    /// Saved model file; omitting it fits a fresh model first.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum ForecasterKind {
    Midas,
    Ar1,
    External,
}

#[derive(Debug, Args)]
pub struct BacktestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Which forecaster to score.
    #[arg(long, value_enum)]
    pub forecaster: ForecasterKind,
    /// Forecast file for --forecaster external.
    #[arg(long, value_name = "FILE")]
    pub external: Option<PathBuf>,
    /// Fit on the full sample, evaluation months included.
    #[arg(long)]
    pub in_sample: bool,
    /// Give the autoregressive benchmark an intercept.
    #[arg(long)]
    pub intercept: bool,
    /// Predictor count for the adjusted R-squared; overrides evaluation.k.
    #[arg(long)]
    pub k: Option<usize>,
    /// First evaluation month; overrides evaluation.eval_start.
    #[arg(long, value_name = "MONTH")]
    pub eval_start: Option<String>,
    /// Number of evaluation months; overrides evaluation.eval_months.
    #[arg(long)]
    pub eval_months: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Candidate metrics: a report JSON, or a predictions CSV with --actuals.
    #[arg(long, value_name = "FILE")]
    pub candidate: PathBuf,
    /// Reference metrics: same formats as --candidate.
    #[arg(long, value_name = "FILE")]
    pub reference: PathBuf,
    /// Realized values CSV, required when a side is a predictions CSV.
    #[arg(long, value_name = "FILE")]
    pub actuals: Option<PathBuf>,
    /// Predictor count for recomputing reports from predictions.
    #[arg(long)]
    pub k: Option<usize>,
    /// Artifact directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Artifact formats.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub format: Option<Vec<String>>,
}

pub fn run(cli: Cli) -> mfnow_core::Result<()> {
    match cli.command {
        Command::Diagnose(args) => commands::diagnose::run(&args),
        Command::Fit(args) => commands::fit::run(&args),
        Command::Nowcast(args) => commands::nowcast::run(&args),
        Command::Backtest(args) => commands::backtest::run(&args),
        Command::Compare(args) => commands::compare::run(&args),
    }
}

/// Accept `2022-06` or `2022-06-01`; anything off-anchor is refused.
pub fn parse_month(raw: &str) -> mfnow_core::Result<chrono::NaiveDate> {
    let candidate = if raw.len() == 7 {
        format!("{raw}-01")
    } else {
        raw.to_string()
    };
    let date: chrono::NaiveDate =
        candidate
            .parse()
            .map_err(|_| mfnow_core::Error::InvalidParameter {
                message: format!("cannot parse month '{raw}' (expected YYYY-MM)"),
            })?;
    if date != mfnow_core::series::month_anchor(date) {
        return Err(mfnow_core::Error::InvalidParameter {
            message: format!("'{raw}' is not the first day of a month"),
        });
    }
    Ok(date)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn month_parsing_accepts_both_spellings() {
        assert_eq!(
            parse_month("2022-06").unwrap(),
            "2022-06-01".parse::<chrono::NaiveDate>().unwrap()
        );
        assert_eq!(
            parse_month("2022-06-01").unwrap(),
            "2022-06-01".parse::<chrono::NaiveDate>().unwrap()
        );
        assert!(parse_month("2022-06-15").is_err());
        assert!(parse_month("June 2022").is_err());
    }

    #[test]
    fn cli_parses_the_documented_surface() {
        use clap::Parser;
        let cli = Cli::try_parse_from([
            "mfnow",
            "backtest",
            "--config",
            "c.json",
            "--forecaster",
            "ar1",
            "--intercept",
            "--k",
            "4",
            "--format",
            "json,text",
        ])
        .unwrap();
        match cli.command {
            Command::Backtest(args) => {
                assert_eq!(args.forecaster, ForecasterKind::Ar1);
                assert!(args.intercept);
                assert_eq!(args.k, Some(4));
                assert_eq!(
                    args.common.format.as_deref(),
                    Some(&["json".to_string(), "text".to_string()][..])
                );
            }
            other => panic!("unexpected command {other:?}"),
        }

        assert!(Cli::try_parse_from(["mfnow", "frobnicate"]).is_err());
        assert!(Cli::try_parse_from(["mfnow"]).is_err());
    }
}
