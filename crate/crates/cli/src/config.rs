//! Pipeline configuration: one JSON file describes the dataset, the model,
//! the evaluation window, and where artifacts go. Flags may override the
//! output section per invocation.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use mfnow_core::midas::{ExogenousTerm, LagWeightFamily, LagWeightSpec, MidasSpec};
use mfnow_core::{Error, Frequency, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub target: TargetConfig,
    #[serde(default)]
    pub exogenous: Vec<ExogenousConfig>,
    #[serde(default)]
    pub midas: MidasConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub name: String,
    pub path: PathBuf,
    pub frequency: Frequency,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExogenousConfig {
    pub name: String,
    pub path: PathBuf,
    #[serde(default)]
    pub transform: Transform,
}

/// Preprocessing applied to a daily series after gap interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Transform {
    #[default]
    None,
    FractionalChange {
        #[serde(default = "default_horizon_days")]
        horizon_days: usize,
    },
}

fn default_horizon_days() -> usize {
    mfnow_core::series::DEFAULT_CHANGE_HORIZON_DAYS
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MidasConfig {
    #[serde(default)]
    pub family: FamilyName,
    #[serde(default = "default_lags")]
    pub lags: usize,
    #[serde(default = "default_endogenous_lags")]
    pub endogenous_lags: usize,
    #[serde(default = "default_true")]
    pub intercept: bool,
}

impl Default for MidasConfig {
    fn default() -> Self {
        MidasConfig {
            family: FamilyName::Beta,
            lags: default_lags(),
            endogenous_lags: default_endogenous_lags(),
            intercept: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    #[default]
    Beta,
    ExpAlmon,
    Uniform,
}

impl FamilyName {
    /// The family with its search-start parameter values.
    pub fn to_family(self) -> LagWeightFamily {
        match self {
            FamilyName::Beta => LagWeightFamily::Beta {
                theta1: 1.0,
                theta2: 1.0,
            },
            FamilyName::ExpAlmon => LagWeightFamily::ExpAlmon {
                theta1: 0.0,
                theta2: 0.0,
            },
            FamilyName::Uniform => LagWeightFamily::Uniform,
        }
    }
}

fn default_lags() -> usize {
    22
}

fn default_endogenous_lags() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    #[serde(default)]
    pub eval_start: Option<NaiveDate>,
    #[serde(default = "default_eval_months")]
    pub eval_months: usize,
    #[serde(default = "default_context_days")]
    pub context_days: u64,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub in_sample: bool,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            eval_start: None,
            eval_months: default_eval_months(),
            context_days: default_context_days(),
            k: None,
            in_sample: false,
        }
    }
}

fn default_eval_months() -> usize {
    24
}

fn default_context_days() -> u64 {
    2400
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: default_directory(),
            formats: default_formats(),
        }
    }
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<String> {
    vec!["json".to_string(), "csv".to_string(), "text".to_string()]
}

/// Read and validate a configuration file. Relative data paths are resolved
/// against the directory containing the file.
pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let display = path.display().to_string();
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    let mut config: PipelineConfig =
        serde_json::from_str(&raw).map_err(|e| Error::FormatError {
            file: display.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
    let base = path.parent().unwrap_or(Path::new("."));
    config.target.path = resolve(base, &config.target.path);
    for exog in &mut config.exogenous {
        exog.path = resolve(base, &exog.path);
    }
    validate(&config, &display)?;
    Ok(config)
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn validate(config: &PipelineConfig, file: &str) -> Result<()> {
    let invalid = |message: String| Error::InvalidParameter {
        message: format!("{file}: {message}"),
    };
    if config.target.name.trim().is_empty() {
        return Err(invalid("target.name must not be empty".to_string()));
    }
    if config.target.path.as_os_str().is_empty() {
        return Err(invalid("target.path must not be empty".to_string()));
    }
    if config.target.frequency != Frequency::Monthly {
        return Err(invalid(format!(
            "target.frequency must be monthly, got {}",
            config.target.frequency
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    for exog in &config.exogenous {
        if exog.name.trim().is_empty() {
            return Err(invalid("exogenous series need non-empty names".to_string()));
        }
        if exog.path.as_os_str().is_empty() {
            return Err(invalid(format!("exogenous '{}' has an empty path", exog.name)));
        }
        if !seen.insert(exog.name.clone()) {
            return Err(invalid(format!("duplicate exogenous name '{}'", exog.name)));
        }
        if exog.name == config.target.name {
            return Err(invalid(format!(
                "exogenous '{}' collides with the target name",
                exog.name
            )));
        }
        if let Transform::FractionalChange { horizon_days } = exog.transform {
            if horizon_days == 0 {
                return Err(invalid(format!(
                    "exogenous '{}': horizon_days must be at least 1",
                    exog.name
                )));
            }
        }
    }
    if config.midas.lags == 0 {
        return Err(invalid("midas.lags must be at least 1".to_string()));
    }
    if config.evaluation.eval_months == 0 {
        return Err(invalid("evaluation.eval_months must be at least 1".to_string()));
    }
    if config.evaluation.context_days == 0 {
        return Err(invalid("evaluation.context_days must be at least 1".to_string()));
    }
    if config.output.formats.is_empty() {
        return Err(invalid("output.formats must not be empty".to_string()));
    }
    for format in &config.output.formats {
        if !matches!(format.as_str(), "json" | "csv" | "text") {
            return Err(invalid(format!(
                "unknown output format '{format}' (expected json, csv, or text)"
            )));
        }
    }
    Ok(())
}

impl PipelineConfig {
    /// The model specification implied by the config: one weighted term per
    /// exogenous series, in config order.
    pub fn midas_spec(&self) -> Result<MidasSpec> {
        let spec = MidasSpec {
            exogenous: self
                .exogenous
                .iter()
                .map(|exog| ExogenousTerm {
                    name: exog.name.clone(),
                    weights: LagWeightSpec {
                        family: self.midas.family.to_family(),
                        lags: self.midas.lags,
                    },
                })
                .collect(),
            endogenous_lags: self.midas.endogenous_lags,
            include_intercept: self.midas.intercept,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &Path, body: &str) -> PathBuf {
        let path = dir.join("config.json");
        std::fs::write(&path, body).unwrap();
        path
    }

    #[test]
    fn minimal_config_gets_the_documented_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            r#"{"target": {"name": "hicp", "path": "hicp.csv", "frequency": "monthly"}}"#,
        );
        let config = load_config(&path).unwrap();
        assert_eq!(config.midas.lags, 22);
        assert_eq!(config.midas.endogenous_lags, 1);
        assert!(config.midas.intercept);
        assert_eq!(config.midas.family, FamilyName::Beta);
        assert_eq!(config.evaluation.eval_months, 24);
        assert_eq!(config.evaluation.context_days, 2400);
        assert!(!config.evaluation.in_sample);
        assert_eq!(config.output.directory, PathBuf::from("out"));
        assert_eq!(config.output.formats, vec!["json", "csv", "text"]);
        // Relative target path resolves next to the config file.
        assert_eq!(config.target.path, dir.path().join("hicp.csv"));
    }

    #[test]
    fn unknown_keys_are_rejected_with_the_file_name() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            r#"{"target": {"name": "y", "path": "y.csv", "frequency": "monthly"}, "typo": 1}"#,
        );
        match load_config(&path).unwrap_err() {
            Error::FormatError { file, message, .. } => {
                assert!(file.ends_with("config.json"));
                assert!(message.contains("typo"), "{message}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn daily_target_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            r#"{"target": {"name": "y", "path": "y.csv", "frequency": "daily"}}"#,
        );
        assert!(matches!(
            load_config(&path).unwrap_err(),
            Error::InvalidParameter { .. }
        ));
    }

    #[test]
    fn duplicate_exogenous_names_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            r#"{
                "target": {"name": "y", "path": "y.csv", "frequency": "monthly"},
                "exogenous": [
                    {"name": "oil", "path": "a.csv"},
                    {"name": "oil", "path": "b.csv"}
                ]
            }"#,
        );
        match load_config(&path).unwrap_err() {
            Error::InvalidParameter { message } => assert!(message.contains("oil"), "{message}"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn transform_parses_with_default_horizon() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            r#"{
                "target": {"name": "y", "path": "y.csv", "frequency": "monthly"},
                "exogenous": [
                    {"name": "oil", "path": "oil.csv", "transform": {"type": "fractional_change"}},
                    {"name": "spread", "path": "spread.csv", "transform": {"type": "none"}}
                ]
            }"#,
        );
        let config = load_config(&path).unwrap();
        assert_eq!(
            config.exogenous[0].transform,
            Transform::FractionalChange { horizon_days: 7 }
        );
        assert_eq!(config.exogenous[1].transform, Transform::None);
    }

    #[test]
    fn bad_output_format_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            r#"{
                "target": {"name": "y", "path": "y.csv", "frequency": "monthly"},
                "output": {"formats": ["yaml"]}
            }"#,
        );
        match load_config(&path).unwrap_err() {
            Error::InvalidParameter { message } => assert!(message.contains("yaml"), "{message}"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn midas_spec_mirrors_the_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(
            dir.path(),
            r#"{
                "target": {"name": "y", "path": "y.csv", "frequency": "monthly"},
                "exogenous": [{"name": "oil", "path": "oil.csv"}],
                "midas": {"family": "exp_almon", "lags": 10, "endogenous_lags": 2, "intercept": false}
            }"#,
        );
        let spec = load_config(&path).unwrap().midas_spec().unwrap();
        assert_eq!(spec.exogenous.len(), 1);
        assert_eq!(spec.exogenous[0].weights.lags, 10);
        assert_eq!(spec.endogenous_lags, 2);
        assert!(!spec.include_intercept);
        assert_eq!(spec.exogenous[0].weights.family.name(), "exp_almon");
    }
}
