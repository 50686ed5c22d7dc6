use std::fmt;

use htheory::matrix::MatrixError;
use htheory::pipeline::PipelineError;
use htheory::sde::SdeError;
use htheory::special_fn::SpecialFnError;
use htheory::DistError;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Data = 2,
    Numerical = 3,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: ExitKind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(msg: impl fmt::Display) -> Self {
        Failure {
            kind: ExitKind::Usage,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn data(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            kind: ExitKind::Data,
            error: error.into(),
        }
    }

    pub fn numerical(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            kind: ExitKind::Numerical,
            error: error.into(),
        }
    }

    pub fn context(mut self, what: impl fmt::Display + Send + Sync + 'static) -> Self {
        self.error = self.error.context(what);
        self
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<SpecialFnError> for Failure {
    fn from(e: SpecialFnError) -> Self {
        match e {
            SpecialFnError::Parameter(_) => Failure::usage(e),
            _ => Failure::numerical(e),
        }
    }
}

impl From<DistError> for Failure {
    fn from(e: DistError) -> Self {
        match e {
            DistError::Parameter(_) => Failure::usage(e),
            DistError::Special(s) => s.into(),
            DistError::Domain(_) => Failure::numerical(e),
        }
    }
}

impl From<MatrixError> for Failure {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::Parameter(_) => Failure::usage(e),
            MatrixError::Domain(_) => Failure::numerical(e),
        }
    }
}

impl From<SdeError> for Failure {
    fn from(e: SdeError) -> Self {
        match e {
            SdeError::Parameter(_) => Failure::usage(e),
            SdeError::InsufficientData(_) => Failure::data(e),
            SdeError::Divergence { .. } => Failure::numerical(e),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            _ if e.is_data_error() => Failure::data(e),
            PipelineError::Parameter(_) => Failure::usage(e),
            PipelineError::Dist(d) => d.into(),
            PipelineError::Matrix(m) => m.into(),
            _ => Failure::numerical(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::data(e)
    }
}
