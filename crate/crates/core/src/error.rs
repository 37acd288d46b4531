use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "branch positions must be strictly increasing (L[{index}] = {value} after {previous})"
    )]
    NonIncreasingPositions {
        index: usize,
        previous: u64,
        value: u64,
    },
    #[error("branch factor k[{index}] = {value} is below 2")]
    BranchFactorBelowTwo { index: usize, value: u64 },
    #[error("{positions} branch positions but {factors} branch factors")]
    LengthMismatch { positions: usize, factors: usize },
    #[error("branching at the root (L_1 = 0) requires allow_root_branching")]
    RootBranchingNotAllowed,
    #[error("integer overflow while computing {what}")]
    Overflow { what: &'static str },
    #[error("depth must be nonnegative, got {0}")]
    DepthNegative(i64),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("preset `{preset}` needs parameter `{param}`")]
    MissingParam { preset: String, param: &'static str },
    #[error("invalid value for parameter `{param}`: {reason}")]
    InvalidParam { param: String, reason: String },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("level {level} is out of range ({available} levels available)")]
    LevelOutOfRange { level: usize, available: usize },
    #[error("cannot strip {strip} rows from a Jacobi matrix of length {length}")]
    StripTooLong { strip: usize, length: usize },
    #[error("invalid Jacobi matrix: {0}")]
    InvalidJacobi(String),
    #[error("invalid sparse matrix: {0}")]
    InvalidSparse(String),
    #[error("continued fraction depth {depth} exceeds matrix length {length}")]
    DepthExceedsLength { depth: usize, length: usize },
    #[error("spectral parameter must satisfy Im z > 0, got Im z = {0}")]
    NotUpperHalfPlane(f64),
    #[error("energy grid is empty")]
    EmptyGrid,
    #[error("coverage radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("epsilon ladder has {0} points, at least 4 are required")]
    LadderTooShort(usize),
    #[error("epsilon ladder must be decreasing and inside (0, 1)")]
    InvalidLadder,
    #[error("continued fraction not converged at epsilon = {epsilon}: relative change {change:.3e} at depth {depth}")]
    NotConverged {
        epsilon: f64,
        depth: usize,
        change: f64,
    },
    #[error("spec parse error at line {line}: {message}")]
    SpecParse { line: usize, message: String },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// Errors raised by numerical procedures rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotConverged { .. })
    }
}
