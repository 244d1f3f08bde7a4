use thiserror::Error;

use crate::phase::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("value {0} outside [0, 1]")]
    OutsideUnitInterval(Rat),
    #[error("field {field} out of range: {value}")]
    Field { field: &'static str, value: i64 },
    #[error("modulus M = {0} must be a positive multiple of 4")]
    InvalidModulus(u32),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("not a rational number: {0:?}")]
    Rational(String),
    #[error("graph file line {line}: {msg}")]
    GraphFormat { line: usize, msg: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph is not connected")]
    Disconnected,
    #[error("no tree on {n} nodes has maximum degree <= {max_degree}")]
    InfeasibleDegreeCap { n: usize, max_degree: usize },
    #[error("invalid size parameter: {0}")]
    InvalidSize(String),
    #[error("self loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("horizon must be positive")]
    NonPositiveHorizon,
    #[error("initial configuration has {got} entries, graph has {expected} nodes")]
    ConfigSize { expected: usize, got: usize },
    #[error("common denominator of the inputs does not fit the simulation lattice")]
    LatticeTooFine,
    #[error("random configuration grid {0} must be a positive multiple of 4")]
    BadGrid(i64),
    #[error("invalid beat schedule: {0}")]
    BadSchedule(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
