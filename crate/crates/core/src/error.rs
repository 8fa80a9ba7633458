use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("singular tensor (condition number {condition:e})")]
    SingularTensor { condition: f64 },

    #[error("invalid material parameter `{name}`: {reason}")]
    InvalidMaterial { name: &'static str, reason: String },

    #[error("linear solve failed: {0}")]
    SolverFailure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("smoothed phase fractions degenerate at element {element}")]
    DegenerateFraction { element: usize },

    #[error("Eshelby quadrature not converged after {refinements} refinements (last change {change:e})")]
    QuadratureFailure { refinements: usize, change: f64 },

    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid value for `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("table entry ({from}->{to}, {i}, {j}): {source}")]
    TableEntry {
        from: char,
        to: char,
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code: 2 for bad input, 3 for numerical or I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Parse { .. } | Error::Validation { .. } | Error::InvalidMaterial { .. } => 2,
            _ => 3,
        }
    }

    /// Innermost error, skipping iteration/table context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } | Error::TableEntry { source, .. } => source.root(),
            other => other,
        }
    }
}
