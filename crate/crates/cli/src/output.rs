//! Artifact plumbing shared by the subcommands: format selection, JSON and
//! CSV writers, significant-digit rendering, and plain-text tables.

use std::path::{Path, PathBuf};

use mfnow_core::{Error, Result};
use serde::Serialize;

use crate::config::PipelineConfig;

/// Which artifact kinds a run writes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
    pub text: bool,
}

impl Formats {
    pub fn parse(names: &[String]) -> Result<Formats> {
        let mut formats = Formats {
            json: false,
            csv: false,
            text: false,
        };
        for name in names {
            match name.trim() {
                "json" => formats.json = true,
                "csv" => formats.csv = true,
                "text" => formats.text = true,
                other => {
                    return Err(Error::InvalidParameter {
                        message: format!(
                            "unknown output format '{other}' (expected json, csv, or text)"
                        ),
                    })
                }
            }
        }
        if formats == (Formats { json: false, csv: false, text: false }) {
            return Err(Error::InvalidParameter {
                message: "at least one output format is required".to_string(),
            });
        }
        Ok(formats)
    }
}

/// Where artifacts go and in which formats, after flag overrides.
#[derive(Debug, Clone)]
pub struct OutputPlan {
    pub directory: PathBuf,
    pub formats: Formats,
}

impl OutputPlan {
    pub fn from_config(
        config: &PipelineConfig,
        out_flag: Option<&Path>,
        format_flag: Option<&[String]>,
    ) -> Result<OutputPlan> {
        let directory = out_flag
            .map(Path::to_path_buf)
            .unwrap_or_else(|| config.output.directory.clone());
        let formats = match format_flag {
            Some(names) => Formats::parse(names)?,
            None => Formats::parse(&config.output.formats)?,
        };
        Ok(OutputPlan { directory, formats })
    }

    pub fn standalone(directory: &Path, format_flag: Option<&[String]>) -> Result<OutputPlan> {
        let formats = match format_flag {
            Some(names) => Formats::parse(names)?,
            None => Formats {
                json: true,
                csv: true,
                text: true,
            },
        };
        Ok(OutputPlan {
            directory: directory.to_path_buf(),
            formats,
        })
    }

    pub fn ensure_directory(&self) -> Result<()> {
        std::fs::create_dir_all(&self.directory)
            .map_err(|e| Error::io(&self.directory.display().to_string(), e))
    }

    pub fn write_json<T: Serialize>(&self, file_name: &str, value: &T) -> Result<()> {
        if !self.formats.json {
            return Ok(());
        }
        let path = self.directory.join(file_name);
        let body = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidParameter {
            message: format!("cannot serialize {file_name}: {e}"),
        })?;
        write_file(&path, &(body + "\n"))
    }

    pub fn write_csv(&self, file_name: &str, body: &str) -> Result<()> {
        if !self.formats.csv {
            return Ok(());
        }
        write_file(&self.directory.join(file_name), body)
    }

    pub fn write_text(&self, file_name: &str, body: &str) -> Result<()> {
        if !self.formats.text {
            return Ok(());
        }
        write_file(&self.directory.join(file_name), body)
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::io(&path.display().to_string(), e))
}

/// Render with six significant digits (the stdout convention); artifacts
/// keep full precision.
pub fn fmt_sig(value: f64) -> String {
    format_sig(value, 6)
}

fn format_sig(value: f64, digits: usize) -> String {
    if !value.is_finite() {
        return format!("{value}");
    }
    if value == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", digits - 1, value);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("numeric exponent");
    if exp >= digits as i32 || exp < -4 {
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, value)
}

/// Left-aligned first column, right-aligned numeric columns.
pub fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let columns = headers.len();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = String::new();
    for (i, header) in headers.iter().enumerate() {
        if i > 0 {
            line.push_str("  ");
        }
        if i == 0 {
            line.push_str(&format!("{:<width$}", header, width = widths[i]));
        } else {
            line.push_str(&format!("{:>width$}", header, width = widths[i]));
        }
    }
    out.push_str(line.trim_end());
    out.push('\n');
    for row in rows {
        line.clear();
        for i in 0..columns {
            if i > 0 {
                line.push_str("  ");
            }
            let cell = row.get(i).map(String::as_str).unwrap_or("");
            if i == 0 {
                line.push_str(&format!("{:<width$}", cell, width = widths[i]));
            } else {
                line.push_str(&format!("{:>width$}", cell, width = widths[i]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// `series,date,value` rows, the long format every plotter understands.
/// Missing values render as empty cells, full precision otherwise.
pub fn long_format_csv(series: &[&mfnow_core::TimeSeries]) -> String {
    let mut out = String::from("series,date,value\n");
    for s in series {
        for o in s.observations() {
            match o.value {
                Some(v) => out.push_str(&format!("{},{},{}\n", s.name(), o.date, v)),
                None => out.push_str(&format!("{},{},\n", s.name(), o.date)),
            }
        }
    }
    out
}
