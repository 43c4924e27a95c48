use std::path::PathBuf;

use thiserror::Error;

use crate::model::{EdgeId, VertexId};

/// A violated instance or realization invariant.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("instance has no vertices")]
    Empty,
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteCoord(VertexId),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(VertexId),
    #[error("edge ids must be dense and ordered: expected {expected}, found {found}")]
    EdgeIdOrder { expected: u32, found: EdgeId },
    #[error("edge {0} is a self-loop")]
    SelfLoop(EdgeId),
    #[error("edge {0} duplicates an earlier edge between the same vertices")]
    ParallelEdge(EdgeId),
    #[error("edge {0} has a non-positive or non-finite cost")]
    NonPositiveCost(EdgeId),
    #[error("invalid cost distribution [{min}, {max}]")]
    InvalidDistribution { min: f64, max: f64 },
    #[error("impeded edge not in UGV edge set: edge {0}")]
    ImpededNotUgv(EdgeId),
    #[error("impeded edge {0} must not carry a fixed UGV cost")]
    ImpededWithFixedCost(EdgeId),
    #[error("invalid UAV speed {0}")]
    InvalidUavSpeed(f64),
    #[error("destination is not reachable from the UGV start")]
    DestinationUnreachable,
    #[error("UGV graph is not connected")]
    Disconnected,
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("edge {0} is not traversable by the UGV")]
    NotUgvEdge(EdgeId),
    #[error("realization given for unimpeded edge {0}")]
    RealizationNotImpeded(EdgeId),
    #[error("realized cost {cost} of edge {edge} outside its distribution bounds")]
    RealizationOutOfBounds { edge: EdgeId, cost: f64 },
    #[error("edge {0} realized twice")]
    DuplicateRealization(EdgeId),
    #[error("impeded edge {0} has no realized cost")]
    MissingRealization(EdgeId),
}

/// Failure to read an instance or realization file.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {field}: {message}")]
    Parse {
        line: usize,
        field: &'static str,
        message: String,
    },
    #[error("invalid instance: {0}")]
    Invalid(#[from] InstanceError),
}

impl FormatError {
    pub(crate) fn parse(line: usize, field: &'static str, message: impl Into<String>) -> Self {
        FormatError::Parse {
            line,
            field,
            message: message.into(),
        }
    }
}

/// A planner could not produce a route.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("no path from {from} to the destination")]
    NoPath { from: VertexId },
    #[error("vertex {to} unreachable for the UAV from {from}")]
    UavUnreachable { from: VertexId, to: VertexId },
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("simulation exceeded {0} events without the UGV reaching its destination")]
    EventLimit(usize),
}

/// Failure in the experiment harness or generators.
#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("spec: {0}")]
    Spec(String),
}
