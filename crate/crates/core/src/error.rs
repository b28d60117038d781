use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the discretization pipeline.
///
/// Every variant maps to a stable class name (see [`Error::class`]) which the
/// command-line driver prints on failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("mesh/interface assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("level-set gradient vanishes at ({x}, {y})")]
    DegenerateGradient { x: f64, y: f64 },

    #[error("quadrature degree {0} is not supported")]
    UnsupportedDegree(usize),

    #[error("degenerate cut: {0}")]
    DegenerateCut(String),

    #[error("projection onto the interface diverged: {0}")]
    ProjectionDivergence(String),

    #[error("mass matrix is singular: {0}")]
    SingularMass(String),

    #[error("jump constraint cannot be satisfied: {0}")]
    InfeasibleConstraint(String),

    #[error("interior block of element {element} is singular (smallest pivot {pivot:e})")]
    SingularInterior { element: usize, pivot: f64 },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("degenerate error sequence: {0}")]
    DegenerateSequence(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable, machine-readable class name of the underlying failure.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::AssumptionViolation(_) => "AssumptionViolation",
            Error::NoConvergence(_) => "NoConvergence",
            Error::DegenerateGradient { .. } => "DegenerateGradient",
            Error::UnsupportedDegree(_) => "UnsupportedDegree",
            Error::DegenerateCut(_) => "DegenerateCut",
            Error::ProjectionDivergence(_) => "ProjectionDivergence",
            Error::SingularMass(_) => "SingularMass",
            Error::InfeasibleConstraint(_) => "InfeasibleConstraint",
            Error::SingularInterior { .. } => "SingularInterior",
            Error::NotPositiveDefinite(_) => "NotPositiveDefinite",
            Error::DegenerateSequence(_) => "DegenerateSequence",
            Error::Context { source, .. } => source.class(),
            Error::Io(_) => "Io",
        }
    }

    /// Wraps the error with a human-readable context prefix.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, with all context layers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
