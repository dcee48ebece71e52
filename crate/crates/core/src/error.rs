use thiserror::Error;

use crate::geometry::VertexId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid letter `{0}`")]
    InvalidLetter(String),
    #[error("permutation rejected: {0}")]
    BadPermutation(String),
    #[error("color {color} out of range for k = {k}")]
    ColorOutOfRange { color: usize, k: usize },
    #[error("invalid color spec: {0}")]
    InvalidColorSpec(String),
    #[error("not a flag: ({0}, {1}, {2})")]
    NotAFlag(VertexId, VertexId, VertexId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("vertex {0} has the wrong level: {1}")]
    WrongLevel(VertexId, String),
    #[error("line {line} does not lie in plane {plane}")]
    NotIncident { plane: VertexId, line: VertexId },
    #[error("geometry is uncolored")]
    Uncolored,
    #[error("coloring choice rejected: {0}")]
    BadChoice(String),
    #[error("operation {0} is not available on colored geometries")]
    UnsupportedColoredOp(String),
    #[error("no base-point at this stage: {0}")]
    NoBasePoint(String),
    #[error("missing exceptional point for plane {plane} and line {line}")]
    MissingExceptional { plane: VertexId, line: VertexId },
    #[error("infeasible witness budget: {0}")]
    InfeasibleBudget(String),
    #[error("no cycle witness: {0}")]
    NoWitness(String),
    #[error("psg parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("schedule parse error at line {line}: {msg}")]
    ScheduleParse { line: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
