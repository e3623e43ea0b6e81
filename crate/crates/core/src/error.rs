use thiserror::Error;

/// Errors raised by the library. Each variant maps to one CLI exit class.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("atom `{0}` is already registered")]
    DuplicateAtom(String),
    #[error("too many atoms (limit {0})")]
    TooManyAtoms(usize),
    #[error("division by zero")]
    DivisionByZero,
    #[error("no derivative declared for `{0}`")]
    MissingDerivative(String),
    #[error("denominator {0:e} is too close to zero")]
    NearSingular(f64),
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("not integrable: {0}")]
    NotIntegrable(String),
    #[error("form is not closed: {0}")]
    NotClosed(String),
    #[error("forms live on different bases")]
    BasisMismatch,
    #[error("degree {0} exceeds the dimension {1}")]
    DegreeOverflow(usize, usize),
    #[error("coframe change is singular")]
    SingularChange,
    #[error("generators are linearly dependent")]
    DependentGenerators,
    #[error("not hyperbolic: {0}")]
    NotHyperbolic(String),
    #[error("system is not Euler-Lagrange (S2 does not vanish)")]
    NotEulerLagrange,
    #[error("coframe is not 1-adapted: {0}")]
    NotAdapted(String),
    #[error("inconsistent substitution: {0}")]
    InconsistentSubstitution(String),
    #[error("degenerate pencil: {0}")]
    DegeneratePencil(String),
    #[error("pencil has complex roots")]
    ComplexRoots,
    #[error("forbidden parameters: {0}")]
    Forbidden(String),
    #[error("syntax error at offset {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no admissible sample point found")]
    NoSamplePoint,
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    /// 2 for malformed or inadmissible input, 3 for capability limits.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotIntegrable(_) | Error::Unsupported(_) | Error::TooManyAtoms(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
