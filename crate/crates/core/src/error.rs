use thiserror::Error;

/// Errors produced anywhere in the PCD pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PcdError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("all input points are collinear")]
    CollinearInput,
    #[error("points {0} and {1} coincide (within 1e-12)")]
    DuplicatePoints(usize, usize),
    #[error("non-finite coordinate in point {0}")]
    NonFinite(usize),
    #[error("degenerate triangle (zero area)")]
    DegenerateTriangle,
    #[error("center M is not strictly inside the triangle")]
    MOutsideTriangle,
    #[error("point is outside the triangle")]
    POutsideTriangle,
    #[error("expansion parameter r = {0} is outside the admissible range {1}")]
    ROutOfRange(f64, &'static str),
    #[error("p_r is undefined at r = 1: the integrand coefficient diverges")]
    RDegenerate,
    #[error("no limiting distribution is available for r = {r} with center {center}")]
    NotCovered { r: f64, center: String },
    #[error("inference requires the nondegenerate regime, got {0}")]
    DegenerateRegime(String),
    #[error("epsilon = {0} must lie strictly inside (0, sqrt(3)/3)")]
    EpsilonOutOfRange(f64),
    #[error("digraph has {n} vertices, brute force is limited to {max}")]
    TooLarge { n: usize, max: usize },
    #[error("no small-sample coefficients for r = {r}, m = {m}")]
    UnsupportedKey { r: f64, m: usize },
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Coarse classification used to map errors onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

impl PcdError {
    pub fn class(&self) -> ErrorClass {
        use PcdError::*;
        match self {
            TooFewPoints { .. } | CollinearInput | DuplicatePoints(..) | NonFinite(_)
            | DegenerateTriangle | MOutsideTriangle | POutsideTriangle | Io(_) | Parse(_) => {
                ErrorClass::Data
            }
            RDegenerate | NumericalBreakdown(_) | NonConvergence(_) => ErrorClass::Numerical,
            ROutOfRange(..) | NotCovered { .. } | DegenerateRegime(_) | EpsilonOutOfRange(_)
            | TooLarge { .. } | UnsupportedKey { .. } | InvalidParameter(_) => ErrorClass::Usage,
        }
    }
}

impl From<std::io::Error> for PcdError {
    fn from(e: std::io::Error) -> Self {
        PcdError::Io(e.to_string())
    }
}

impl From<csv::Error> for PcdError {
    fn from(e: csv::Error) -> Self {
        PcdError::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for PcdError {
    fn from(e: serde_json::Error) -> Self {
        PcdError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PcdError>;
