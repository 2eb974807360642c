use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("invariant violation: {field}: {message}")]
    Invariant { field: String, message: String },

    #[error("validity violation: {0}")]
    Validity(String),

    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("numerical failure: {0}")]
    Numerical(nfepm_core::Error),
}

impl CliError {
    /// 1 for configuration problems, 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }

    pub fn invariant(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Invariant { field: field.into(), message: message.into() }
    }
}

/// Errors from the core library. Parameter and validity errors are
/// configuration problems; everything else is numerical.
impl From<nfepm_core::Error> for CliError {
    fn from(e: nfepm_core::Error) -> Self {
        use nfepm_core::Error as E;
        match e {
            E::InvalidParameter { name, reason } => CliError::invariant(name, reason),
            E::ValidityViolation(m) => CliError::Validity(m),
            E::UnsupportedRegion(r) => CliError::Validity(format!("unsupported region: {r}")),
            E::IndexOutOfRange { index, n } => CliError::invariant("solve.alpha/beta", format!("element {index} outside 1..={n}")),
            E::UnboundedAperture => CliError::Validity("operation needs a finite aperture".into()),
            other => CliError::Numerical(other),
        }
    }
}

/// Attaches a config path to parameter errors raised while building core types.
pub fn at(field: &'static str) -> impl Fn(nfepm_core::Error) -> CliError {
    move |e| match e {
        nfepm_core::Error::InvalidParameter { reason, .. } => CliError::invariant(field, reason),
        other => other.into(),
    }
}
