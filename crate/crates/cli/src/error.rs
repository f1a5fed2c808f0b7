use std::path::Path;

use serde_json::{json, Value};
use thiserror::Error;
use tweezer_sta::montecarlo::MonteCarloError;
use tweezer_sta::thermometry::ThermometryError;
use tweezer_sta::trajectory::TrajectoryError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{key}`: {message}")]
    Config {
        key: String,
        message: String,
        line: Option<usize>,
        column: Option<usize>,
    },
    #[error("path file {file}: {message}")]
    PathFile {
        file: String,
        message: String,
        line: Option<usize>,
        column: Option<usize>,
    },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    MonteCarlo(#[from] MonteCarloError),
    #[error(transparent)]
    Thermometry(#[from] ThermometryError),
    #[error("output error: {0}")]
    Output(String),
    #[error("usage: {0}")]
    Usage(String),
}

impl CliError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.to_string(),
            message: message.into(),
            line: None,
            column: None,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::PathFile { .. } => "path_file",
            CliError::Io { .. } => "io",
            CliError::Trajectory(TrajectoryError::JunctionMismatch { .. }) => "junction_mismatch",
            CliError::Trajectory(_) => "trajectory",
            CliError::MonteCarlo(_) => "montecarlo",
            CliError::Thermometry(_) => "thermometry",
            CliError::Output(_) => "output",
            CliError::Usage(_) => "usage",
        }
    }

    /// Machine-readable form written to stderr on failure.
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        let obj = v.as_object_mut().expect("object literal");
        match self {
            CliError::Config { key, line, column, .. } => {
                obj.insert("key".into(), json!(key));
                obj.insert("line".into(), json!(line));
                obj.insert("column".into(), json!(column));
            }
            CliError::PathFile { file, line, column, .. } => {
                obj.insert("file".into(), json!(file));
                obj.insert("line".into(), json!(line));
                obj.insert("column".into(), json!(column));
            }
            CliError::Trajectory(TrajectoryError::JunctionMismatch { index, kind }) => {
                obj.insert("junction".into(), json!(index));
                obj.insert("defect".into(), json!(kind.to_string()));
            }
            _ => {}
        }
        v
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
