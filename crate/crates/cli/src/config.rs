use std::path::PathBuf;

use lcentral::offdiag::Sign;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Where the artifact goes. No path means stdout.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// One command with its typed parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "parameters", rename_all = "kebab-case")]
pub enum Command {
    Census {
        q: u64,
        #[serde(rename = "D")]
        d: u64,
        threshold: f64,
    },
    Moments {
        q: u64,
        #[serde(rename = "D")]
        d: u64,
        #[serde(rename = "X")]
        x: u64,
        threshold: f64,
        /// Fail with the tolerance exit code if `|S1/φ⁺ − 1|` exceeds this.
        max_delta: Option<f64>,
    },
    AfeCheck {
        q: u64,
        #[serde(rename = "D")]
        d: u64,
        tol: f64,
    },
    IdentitySuite {
        max_q: u64,
        #[serde(rename = "max_D")]
        max_d: u64,
        tol: f64,
    },
    ShiftedConv {
        a: u64,
        b: u64,
        q: u64,
        #[serde(rename = "D")]
        d: u64,
        sign: Sign,
        scales: Vec<f64>,
        max_deviation: Option<f64>,
    },
    VoronoiCheck {
        #[serde(rename = "D")]
        d: u64,
        c: u64,
        a: i64,
        bump_lo: f64,
        bump_hi: f64,
        m_max: u64,
        tol: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Census { .. } => "census",
            Command::Moments { .. } => "moments",
            Command::AfeCheck { .. } => "afe-check",
            Command::IdentitySuite { .. } => "identity-suite",
            Command::ShiftedConv { .. } => "shifted-conv",
            Command::VoronoiCheck { .. } => "voronoi-check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(default)]
    pub output: Output,
    /// Worker cap; `None` uses every core. Results do not depend on it.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            output: Output::default(),
            threads: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self, CliError> {
        serde_json::from_str(s).map_err(|e| CliError::usage("--config", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks that only depend on the flags themselves. Number theoretic
    /// preconditions are left to the core routines.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.threads == Some(0) {
            return Err(CliError::usage("--threads", "must be at least 1"));
        }
        let csv_ok = matches!(self.command, Command::Census { .. } | Command::Moments { .. });
        if self.output.format == Format::Csv && !csv_ok {
            return Err(CliError::usage(
                "--format",
                format!("csv is only available for census and moments, not {}", self.command.name()),
            ));
        }
        let positive = |flag, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::usage(flag, format!("{v} is not a positive number")))
            }
        };
        match &self.command {
            Command::Census { threshold, .. } => positive("--threshold", *threshold),
            Command::Moments {
                threshold, max_delta, ..
            } => {
                positive("--threshold", *threshold)?;
                max_delta.map_or(Ok(()), |m| positive("--max-delta", m))
            }
            Command::AfeCheck { q, tol, .. } => {
                if *q > 1000 {
                    return Err(CliError::usage("--q", format!("{q} exceeds 1000")));
                }
                positive("--tol", *tol)
            }
            Command::IdentitySuite { max_q, max_d, tol } => {
                if !(5..=200).contains(max_q) {
                    return Err(CliError::usage("--max-q", format!("{max_q} outside [5, 200]")));
                }
                if !(5..=1000).contains(max_d) {
                    return Err(CliError::usage("--max-D", format!("{max_d} outside [5, 1000]")));
                }
                positive("--tol", *tol)
            }
            Command::ShiftedConv {
                scales, max_deviation, ..
            } => {
                if scales.is_empty() {
                    return Err(CliError::usage("--scales", "at least one scale is required"));
                }
                max_deviation.map_or(Ok(()), |m| positive("--max-deviation", m))
            }
            Command::VoronoiCheck {
                bump_lo,
                bump_hi,
                m_max,
                tol,
                ..
            } => {
                positive("--bump-lo", *bump_lo)?;
                if bump_hi <= bump_lo {
                    return Err(CliError::usage("--bump-hi", "must exceed --bump-lo"));
                }
                if *m_max == 0 {
                    return Err(CliError::usage("--m-max", "must be at least 1"));
                }
                positive("--tol", *tol)
            }
        }
    }
}
