use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular: zero pivot in column {column}")]
    Singular { column: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite sample {value} at (x={x}, y={y})")]
    NonFiniteSample { x: f64, y: f64, value: f64 },

    #[error("point ({x}, {y}) lies outside [-1,1]^2")]
    OutOfDomain { x: f64, y: f64 },

    #[error("degenerate boundary constraints at column {column}")]
    DegenerateConstraints { column: usize },

    #[error("characteristic coefficient overflow at n = {n}")]
    Overflow { n: usize },

    #[error("complex spectrum suspected: c1^2 - 2 c2 = {discriminant}")]
    ComplexSpectrum { discriminant: f64 },

    #[error("interval [{lo}, {hi}] contains zero")]
    IndefiniteInterval { lo: f64, hi: f64 },

    #[error("intervals [{a}, {b}] and [{c}, {d}] are not disjoint")]
    OverlappingIntervals { a: f64, b: f64, c: f64, d: f64 },

    #[error("inconsistent Moebius parameters: M(alpha) = {got}, expected {expected}")]
    InconsistentMobius { got: f64, expected: f64 },

    #[error("no convergence after {iters} iterations: {what}")]
    NoConvergence { iters: usize, what: String },

    #[error("shift {index} is singular for the shifted matrix: {source}")]
    SingularShift {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("iteration diverged at step {step}")]
    Divergence { step: usize },

    #[error("unsupported problem: {0}")]
    Unsupported(String),

    #[error("boundary data incompatible at corner ({x}, {y}): {lhs} vs {rhs}")]
    CornerIncompatible { x: f64, y: f64, lhs: f64, rhs: f64 },

    #[error("solution unresolved at max_n = {max_n}")]
    Unresolved { max_n: usize, best: Box<crate::chebfun::Cheb2D> },

    #[error("problem too large for the dense oracle: n = {n} > {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    #[error("domain error in {expr}: argument {arg}")]
    Domain { expr: String, arg: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
