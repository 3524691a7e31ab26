use thiserror::Error;

use crate::syntax::Var;

/// Errors raised across the toolkit.
///
/// `ResourceExhausted` is an outcome in its own right: callers must never
/// treat it as a `false` verdict.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("resource exhausted: budget of {budget} nodes exceeded")]
    ResourceExhausted { budget: u64 },

    #[error("syntax error at {location}: {message}")]
    Syntax { location: String, message: String },

    #[error("not NNF-expressible: negation over {0}")]
    NotNnf(&'static str),

    #[error("formula is not flat: {0}")]
    NotFlat(String),

    #[error("variable `{0}` is not bound by the assignment or team domain")]
    Unbound(Var),

    #[error("unknown dependency `{0}`")]
    UnknownDependency(String),

    #[error("unknown relation symbol `{0}`")]
    UnknownRelation(String),

    #[error("arity mismatch for `{name}`: expected {expected}, found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("element {element} outside universe of size {size}")]
    ElementRange { element: usize, size: usize },

    #[error("universe of size {0} requires the small-model override")]
    SmallUniverse(usize),

    #[error("invalid signature: {0}")]
    Signature(String),

    #[error("invalid team: {0}")]
    Team(String),

    #[error("relativizer `{0}` must be a unary relation of the structure")]
    Relativizer(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl Error {
    pub fn is_exhausted(&self) -> bool {
        matches!(self, Error::ResourceExhausted { .. })
    }

    pub(crate) fn syntax(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Syntax {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Node counter shared by every exponential search in the crate.
///
/// Counts are deterministic, so a run that exhausts its budget does so at
/// the same point every time.
#[derive(Debug, Clone)]
pub struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    pub const DEFAULT: u64 = 50_000_000;

    pub fn new(limit: u64) -> Self {
        Budget { limit, used: 0 }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn spend(&mut self, nodes: u64) -> Result<()> {
        self.used = self.used.saturating_add(nodes);
        if self.used > self.limit {
            Err(Error::ResourceExhausted { budget: self.limit })
        } else {
            Ok(())
        }
    }

    /// Fails up front when a search of `nodes` candidates cannot fit in the
    /// remaining budget.
    pub fn reserve(&self, nodes: u128) -> Result<()> {
        if nodes > u128::from(self.limit.saturating_sub(self.used)) {
            Err(Error::ResourceExhausted { budget: self.limit })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(Budget::DEFAULT)
    }
}
