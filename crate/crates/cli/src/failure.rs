use std::fmt;

/// A command failure carrying its process exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    pub fn io(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        Failure::Io(format!("{context}: {err}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<dpopt_core::Error> for Failure {
    fn from(err: dpopt_core::Error) -> Self {
        use dpopt_core::Error as E;
        let msg = err.to_string();
        match err {
            E::InvalidParameter(_) => Failure::Usage(msg),
            E::Io(_) | E::MalformedFile { .. } => Failure::Io(msg),
            E::NotPositiveDefinite { .. }
            | E::DimensionMismatch(_)
            | E::InfeasibleGram
            | E::ZeroStrategy
            | E::ResamplingExhausted { .. } => Failure::Numeric(msg),
        }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;
