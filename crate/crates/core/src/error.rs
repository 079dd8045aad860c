use thiserror::Error;

use crate::poly2::PencilType;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot parse polynomial {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("both components of the map are zero")]
    ZeroMap,

    #[error("pencil is degenerate: the two components are linearly dependent")]
    DegeneratePencil,

    #[error("Jacobian determinant vanishes identically; the Newton map is nowhere defined")]
    EverywhereSingular,

    #[error("point ({x}, {y}) is too close to the degeneracy curve (|det Df| = {den:e})")]
    NearSingular { x: f64, y: f64, den: f64 },

    #[error("point ({x}, {y}) is too close to a point of indeterminacy")]
    NearIndeterminate { x: f64, y: f64 },

    #[error("expected a pencil of type {expected}, found {found}")]
    WrongType { expected: &'static str, found: PencilType },

    #[error("expected a polynomial of degree 2, found degree {0}")]
    WrongDegree(i32),

    #[error("map is not in generic position: {0}")]
    NotGeneric(String),

    #[error("line {line:?} failed the invariance check (residual {residual:e})")]
    VerificationFailed { line: [f64; 3], residual: f64 },

    #[error("empty point set")]
    EmptyInput,

    #[error("grid geometry mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed data: {0}")]
    Format(String),
}
