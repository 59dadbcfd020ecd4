use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot decode vertex {vertex:?}: {reason}")]
    Decode { vertex: VertexId, reason: String },

    #[error("search horizon of {horizon} expansions exhausted before the target was settled")]
    HorizonExhausted { horizon: usize },

    #[error("vertex {0:?} cannot reach the target")]
    Unreachable(VertexId),

    #[error("active state set exceeds cap: {count} > {cap}")]
    Capacity { count: usize, cap: usize },

    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    Convergence { residual: f64, iterations: usize },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("coloring contract violated at vertex {vertex:?}: duplicate color {color}")]
    ColoringViolation { vertex: VertexId, color: String },

    #[error("utility oracle failed on neighbor {vertex:?}: {reason}")]
    Oracle { vertex: VertexId, reason: String },

    #[error("illegal tree edit: {0}")]
    IllegalEdit(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
