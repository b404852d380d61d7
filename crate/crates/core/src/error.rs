//! Error types shared across the crate.

use thiserror::Error;

use crate::vset::VertexSet;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("edge {edge:?} is not a valid subset of 0..{n}")]
    BadEdge { n: u32, edge: VertexSet },
    #[error("empty edge rejected")]
    EmptyEdge,
    #[error("edge {edge:?} exceeds declared rank {r}")]
    RankExceeded { r: usize, edge: VertexSet },
    #[error("set {0:?} is not independent: it contains edge {1:?}")]
    NotIndependent(VertexSet, VertexSet),
    #[error("residual graph contains non-singleton edge {0:?}")]
    NotSingletonResidual(VertexSet),
}

#[derive(Debug, Error, PartialEq)]
pub enum SpaceError {
    #[error("parameters infeasible: {0}")]
    ParamsInfeasible(String),
    #[error("sample spaces have mismatched widths ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("round cap {cap} exceeded at v={v}")]
    RoundCapExceeded { cap: usize, v: f64 },
    #[error("iteration cap {0} exceeded")]
    IterationCapExceeded(usize),
    #[error("summand budget exceeded: {count} > {cap}")]
    SummandBudgetExceeded { count: usize, cap: usize },
    #[error("sample space lacks the required exact-independence certificate: {0}")]
    Q2CertificateMissing(String),
    #[error("the staged pipeline handles at most 64 vertices, got {0}")]
    UnsupportedWidth(u32),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("instance parameters infeasible: {0}")]
    Infeasible(String),
}
