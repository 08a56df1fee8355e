use std::fmt;

/// Failure of a CLI run, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Degenerate(String),
    Verification(String),
    Numerical(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Degenerate(m) => f.write_str(m),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<nongauss::Error> for CliError {
    fn from(e: nongauss::Error) -> Self {
        use nongauss::Error as E;
        match e {
            E::DegenerateScenario { .. } | E::DegenerateBasis => CliError::Degenerate(e.to_string()),
            E::Domain { .. }
            | E::TruncationBound { .. }
            | E::ModeIndex { .. }
            | E::ScaleMismatch { .. }
            | E::Inconsistent(_) => CliError::Usage(e.to_string()),
            E::EigenNonConvergence { .. }
            | E::FockTruncation { .. }
            | E::SingularCovariance { .. }
            | E::Bisection(_) => CliError::Numerical(e.to_string()),
        }
    }
}
