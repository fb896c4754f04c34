use serde::Serialize;

/// Failures surfaced to the command line, each mapped to an exit code and a
/// JSON report on stderr.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    /// One `(key, reason)` pair per offending configuration key.
    #[error("invalid configuration: {}", describe(.0))]
    Validation(Vec<(String, String)>),
    #[error("{message}")]
    Model { keys: Vec<String>, message: String },
}

fn describe(bad: &[(String, String)]) -> String {
    bad.iter().map(|(k, m)| format!("{k} {m}")).collect::<Vec<_>>().join("; ")
}

/// Machine-readable form of a [`CliError`].
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
    pub keys: Vec<String>,
}

impl CliError {
    /// A model error attributed to one configuration key.
    pub fn single(key: &str, err: mzi_core::Error) -> Self {
        Self::Model { keys: vec![key.to_string()], message: err.to_string() }
    }

    pub fn model(err: mzi_core::Error) -> Self {
        Self::Model { keys: Vec::new(), message: err.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Io(_) => "io",
            Self::Parse(_) => "parse",
            Self::Validation(_) => "validation",
            Self::Model { .. } => "model",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse(_) | Self::Validation(_) => 2,
            Self::Io(_) => 3,
            Self::Model { .. } => 4,
        }
    }

    pub fn report(&self) -> ErrorReport {
        let keys = match self {
            Self::Validation(bad) => {
                let mut k: Vec<String> = bad.iter().map(|(k, _)| k.clone()).collect();
                k.dedup();
                k
            }
            Self::Model { keys, .. } => keys.clone(),
            _ => Vec::new(),
        };
        ErrorReport { kind: self.kind(), message: self.to_string(), keys }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
