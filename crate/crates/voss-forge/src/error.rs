use thiserror::Error;

/// Kind of K-net degeneracy bounding a parameter strip.
///
/// Folds sit where the net angle hits pi (the two asymptotic directions
/// anti-align), cusps where it hits 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularKind {
    Fold,
    Cusp,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular domain ({kind:?}): {msg}")]
    SingularDomain { kind: SingularKind, msg: String },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("degenerate immersion at sample ({i}, {j}): {detail}")]
    DegenerateImmersion { i: usize, j: usize, detail: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("integration inconsistency: {0}")]
    IntegrationInconsistency(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn singular(kind: SingularKind, msg: impl Into<String>) -> Self {
        Error::SingularDomain {
            kind,
            msg: msg.into(),
        }
    }

    pub fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
