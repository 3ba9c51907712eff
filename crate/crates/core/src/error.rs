use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the physical domain (state outside the Bloch ball,
    /// non-Hermitian matrix, negative rate, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// Failure inside a numerical routine.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The generator does not have the structure the model requires.
    #[error("model error: {0}")]
    Model(String),

    /// Two curves start at the same value, so their ordering is undefined.
    #[error("ambiguous ordering: initial values differ by {gap:e}")]
    AmbiguousOrdering { gap: f64 },

    /// A pair was supplied in the wrong order, or curves are identical.
    #[error("ordering error: {0}")]
    Ordering(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Reference state has zero ergotropy.
    #[error("degenerate reference: {0}")]
    DegenerateReference(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
