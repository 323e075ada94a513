//! Flat TOML run configuration. Command-line flags override file values.
//!
//! ```toml
//! r = 1.0            # sets both r_a and r_b
//! r_a = 1.0
//! r_b = 1.0
//! shots = 100000
//! seed = 42
//! bins = 100
//! half_width = 12.0
//! convention = "x_anticorrelated"   # or "y_anticorrelated"
//! r_values = "0:2:0.5"              # sweep only; also "0,0.5,1"
//! throws = 600000                   # dice only
//! out = "out"
//! format = "both"                   # json, csv or both
//! ```

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use epr_core::SignConvention;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ConventionArg {
    XAnticorrelated,
    YAnticorrelated,
}

impl From<ConventionArg> for SignConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::XAnticorrelated => SignConvention::XAnticorrelated,
            ConventionArg::YAnticorrelated => SignConvention::YAnticorrelated,
        }
    }
}

/// Everything a command may read from a config file. All keys optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub r: Option<f64>,
    pub r_a: Option<f64>,
    pub r_b: Option<f64>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    pub bins: Option<usize>,
    pub half_width: Option<f64>,
    pub convention: Option<ConventionArg>,
    pub r_values: Option<String>,
    pub throws: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::input(format!("cannot parse config {}: {e}", path.display())))
    }
}

/// Parse `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_r_values(spec: &str) -> Result<Vec<f64>, CliError> {
    let num = |s: &str| -> Result<f64, CliError> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::input(format!("`{s}` is not a number in r spec `{spec}`")))
    };
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(CliError::input(format!(
                "range `{spec}` must be start:stop:step"
            )));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !step.is_finite() || step <= 0.0 {
            return Err(CliError::input(format!(
                "range step must be positive, got {step}"
            )));
        }
        let mut v = Vec::new();
        let mut k = 0u32;
        loop {
            let r = start + f64::from(k) * step;
            if r > stop + 1e-9 * step || v.len() > 100_000 {
                break;
            }
            v.push(r);
            k += 1;
        }
        v
    } else {
        spec.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(num)
            .collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err(CliError::input(format!("r spec `{spec}` yields no values")));
    }
    Ok(values)
}
