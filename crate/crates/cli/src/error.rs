use serde_json::{json, Value};
use thiserror::Error;

/// Exit status for successful runs.
pub const EXIT_OK: i32 = 0;
/// Exit status for invalid input or configuration.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit status for numerical failures.
pub const EXIT_NUMERIC: i32 = 2;

/// A cell that failed to parse or validate.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub line: u64,
    pub column: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] welfare_moments::Error),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("schema error: missing column(s) {}", missing.join(", "))]
    Schema { missing: Vec<String> },

    #[error("{} invalid row(s); first at line {}: {}", errors.len(), errors[0].line, errors[0].message)]
    Rows { errors: Vec<RowError> },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => EXIT_NUMERIC,
            _ => EXIT_VALIDATION,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Config(_) => "config",
            CliError::Schema { .. } => "schema",
            CliError::Rows { .. } => "rows",
            CliError::Io { .. } => "io",
        }
    }

    /// Machine-readable form written to standard error.
    pub fn to_json(&self) -> Value {
        let mut body = json!({
            "kind": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        let extra = match self {
            CliError::Schema { missing } => json!({ "missing": missing }),
            CliError::Rows { errors } => json!({
                "rows": errors
                    .iter()
                    .map(|e| json!({ "line": e.line, "column": e.column, "message": e.message }))
                    .collect::<Vec<_>>()
            }),
            CliError::Core(welfare_moments::Error::SingularDesign { columns }) => {
                json!({ "columns": columns })
            }
            CliError::Core(welfare_moments::Error::FitNonConvergence {
                iterations,
                gradient_norm,
                last_iterate,
            }) => json!({
                "iterations": iterations,
                "gradient_norm": gradient_norm,
                "last_iterate": last_iterate,
            }),
            CliError::Core(welfare_moments::Error::BootstrapInstability {
                failures,
                replications,
            }) => {
                json!({ "failures": failures, "replications": replications })
            }
            _ => Value::Null,
        };
        if let (Value::Object(b), Value::Object(e)) = (&mut body, extra) {
            b.extend(e);
        }
        json!({ "error": body })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
