use std::path::PathBuf;

use absolute_trust::simulator::NetworkSpec;
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    CenterPoint,
    Solve,
    VerifyPaper,
    Analyze,
    Simulate,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
    Csv,
}

/// Everything needed to repeat a run. Re-executing a manifest reproduces
/// the output byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: CommandKind,
    /// Matrix file, resolved relative to the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_path: Option<PathBuf>,
    /// Inline matrix rows (rater-major); takes precedence over `matrix_path`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, deserialize_with = "alpha_opt", skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Schedule seeds for asynchronous simulation runs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<u64>,
    /// Generated network for `simulate` when no matrix is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
    /// `analyze` only: accept any square nonnegative matrix.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unrestricted: bool,
    /// `verify-paper` only: added to α of the global-trust tables.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub alpha_offset: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl RunManifest {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            matrix_path: None,
            matrix: None,
            alpha: None,
            tol: None,
            max_iters: None,
            initial: None,
            format: OutputFormat::Table,
            seeds: Vec::new(),
            network: None,
            unrestricted: false,
            alpha_offset: 0.0,
        }
    }
}

/// `1/3`, `0.25` or `2e-1`. The rational form is evaluated in double precision.
pub fn parse_alpha(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| format!("invalid numerator in {s:?}"))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| format!("invalid denominator in {s:?}"))?;
            if den == 0.0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            num / den
        }
        None => s.parse().map_err(|_| format!("invalid alpha {s:?}"))?,
    };
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(format!("alpha must be a positive finite number, got {s:?}"))
    }
}

fn alpha_opt<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Alpha {
        Number(f64),
        Text(String),
    }
    match Option::<Alpha>::deserialize(d)? {
        None => Ok(None),
        Some(Alpha::Number(x)) => Ok(Some(x)),
        Some(Alpha::Text(s)) => parse_alpha(&s).map(Some).map_err(serde::de::Error::custom),
    }
}
