//! Distributed graph analytics over an asynchronous many-task runtime.
//!
//! A CSR graph is split into contiguous vertex partitions, several per
//! locality. Algorithms run one task per partition; data owned elsewhere is
//! reached through remote actions whose results arrive as futures.

pub mod algorithms;
pub mod graph;
pub mod partition;
pub mod runtime;

pub use graph::{CsrGraph, EdgeList, GraphError, VertexId};
pub use partition::{DistArray, DistCsr, PartitionMap};
pub use runtime::{Locality, Runtime, RuntimeConfig, RuntimeError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
