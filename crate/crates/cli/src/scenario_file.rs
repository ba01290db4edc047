use std::fmt;
use std::path::Path;

use helios_core::{InvariantViolation, Scenario};
use serde_json::Value;

/// Why a scenario file was rejected.
#[derive(Debug)]
pub enum LoadError {
    Read(std::io::Error),
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    Schema {
        field: String,
        message: String,
        suggestion: Option<String>,
    },
    Invariant(InvariantViolation),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Read(e) => write!(f, "cannot read scenario: {e}"),
            LoadError::Parse { line, column, message } => {
                write!(f, "ParseError at line {line}, column {column}: {message}")
            }
            LoadError::Schema {
                field,
                message,
                suggestion,
            } => {
                write!(f, "SchemaError at `{field}`: {message}")?;
                if let Some(s) = suggestion {
                    write!(f, " (nearest valid key: `{s}`)")?;
                }
                Ok(())
            }
            LoadError::Invariant(v) => write!(f, "InvariantError: {v}"),
        }
    }
}

impl LoadError {
    pub fn is_validation(&self) -> bool {
        !matches!(self, LoadError::Read(_))
    }
}

pub fn load(path: &Path) -> Result<Scenario, LoadError> {
    let text = std::fs::read_to_string(path).map_err(LoadError::Read)?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Scenario, LoadError> {
    // Syntax first, so a malformed document reports a position rather than a field.
    let value: Value = serde_json::from_str(text).map_err(|e| LoadError::Parse {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e),
    })?;
    from_value(value)
}

/// Deserializes and validates an already parsed document.
pub fn from_value(value: Value) -> Result<Scenario, LoadError> {
    let scenario: Scenario = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let message = strip_position(&inner);
        let (field, suggestion) = match unknown_field(&message) {
            Some((key, expected)) => {
                let field = if path == "." {
                    key.clone()
                } else if path.ends_with(key.as_str()) {
                    path
                } else {
                    format!("{path}.{key}")
                };
                (field, nearest(&key, &expected))
            }
            None => (path, None),
        };
        LoadError::Schema {
            field,
            message,
            suggestion,
        }
    })?;
    scenario.validate().map_err(LoadError::Invariant)?;
    Ok(scenario)
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) if e.line() > 0 => s[..i].to_string(),
        _ => s,
    }
}

/// Picks apart serde's "unknown field `x`, expected one of `a`, `b`" message.
fn unknown_field(message: &str) -> Option<(String, Vec<String>)> {
    let rest = message.strip_prefix("unknown field `")?;
    let (key, rest) = rest.split_once('`')?;
    let expected = rest.split('`').skip(1).step_by(2).map(str::to_string).collect();
    Some((key.to_string(), expected))
}

fn nearest(key: &str, candidates: &[String]) -> Option<String> {
    candidates
        .iter()
        .map(|c| (strsim::normalized_damerau_levenshtein(key, c), c))
        .max_by(|a, b| a.0.total_cmp(&b.0).then_with(|| b.1.cmp(a.1)))
        .map(|(_, c)| c.clone())
}
