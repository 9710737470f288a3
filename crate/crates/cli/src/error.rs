use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad command line, configuration or input asset.
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Runtime(_) => 2,
        }
    }
}

impl From<llrq::Error> for CliError {
    fn from(e: llrq::Error) -> Self {
        use llrq::Error as E;
        match e {
            E::Config(_)
            | E::ModelLoad(_)
            | E::AlistParse { .. }
            | E::Format { .. }
            | E::CodeConstruction(_) => Self::Config(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}

/// Output files that cannot be written are runtime failures.
pub fn write_file(path: &std::path::Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}
