use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use circfactor::mapdef::{CircleDef, TorusDef};
use circfactor::Error;

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed flags, config or definitions.
    Usage(String),
    /// A numeric check exceeded its threshold; outputs were still written.
    Check(String),
    WindowExhausted(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Check(_) => 2,
            Self::WindowExhausted(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) | Self::Check(m) | Self::WindowExhausted(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::WindowExhausted { .. } => Self::WindowExhausted(e.to_string()),
            Error::UnboundedDeviation(_) | Error::NotSeparating { .. } | Error::OrderingViolated { .. } => {
                Self::Check(e.to_string())
            }
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Usage(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Config file values overlaid by the flags that were given.
pub fn resolve<C: DeserializeOwned>(file: Option<&PathBuf>, flags: &impl Serialize) -> CliResult<C> {
    let mut merged = match file {
        Some(path) => match read_json(path)? {
            Value::Object(map) => map,
            _ => return Err(CliError::Usage(format!("{}: config must be a JSON object", path.display()))),
        },
        None => Map::new(),
    };
    if let Value::Object(given) = serde_json::to_value(flags)? {
        merged.extend(given.into_iter().filter(|(_, v)| !v.is_null()));
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("configuration: {e}")))
}

/// A map flag: inline JSON, a file, or a gallery id.
pub fn map_value(text: &str) -> CliResult<Value> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return Ok(serde_json::from_str(trimmed)?);
    }
    let path = Path::new(text);
    if path.exists() {
        return read_json(path);
    }
    if text.starts_with("3.") {
        return Ok(serde_json::json!({"kind": "gallery", "id": text}));
    }
    Err(CliError::Usage(format!("--map {text:?} is neither JSON, an existing file nor a gallery id")))
}

pub fn torus_def(value: &Option<Value>) -> CliResult<TorusDef> {
    let value = value.clone().ok_or_else(|| CliError::Usage("a map definition is required (--map)".into()))?;
    serde_json::from_value(value).map_err(|e| CliError::Usage(format!("map definition: {e}")))
}

pub fn circle_def(value: &Value) -> CliResult<CircleDef> {
    serde_json::from_value(value.clone()).map_err(|e| CliError::Usage(format!("circle definition: {e}")))
}
