//! Local graph representations: edge lists, CSR adjacency, generators and
//! edge-list file I/O.

mod csr;
mod generate;
mod io;

pub use csr::{build_csr, out_degree, symmetrize, to_upper_dag, transpose, Adjacency, CsrGraph};
pub use generate::{generate_kronecker, generate_urand, KroneckerProbs};
pub use io::{load_edge_list, read_edge_list, save_edge_list, write_edge_list};

use thiserror::Error;

/// Dense vertex identifier in `[0, N)`.
pub type VertexId = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge {index} ({src}, {dst}) has an endpoint outside [0, {num_vertices})")]
    EndpointOutOfRange {
        index: usize,
        src: VertexId,
        dst: VertexId,
        num_vertices: usize,
    },
    #[error("vertex {vertex} out of range for graph with {num_vertices} vertices")]
    VertexOutOfRange { vertex: usize, num_vertices: usize },
    #[error("graph has {0} vertices, more than VertexId can address")]
    TooManyVertices(usize),
    #[error("operation requires sorted adjacency")]
    NotSorted,
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;

/// A vertex count plus a list of directed `(src, dst)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EdgeList {
    pub num_vertices: usize,
    pub edges: Vec<(VertexId, VertexId)>,
}

impl EdgeList {
    /// Builds an edge list, rejecting endpoints outside `[0, num_vertices)`.
    pub fn new(num_vertices: usize, edges: Vec<(VertexId, VertexId)>) -> Result<Self> {
        let list = Self {
            num_vertices,
            edges,
        };
        list.validate()?;
        Ok(list)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_vertices > VertexId::MAX as usize {
            return Err(GraphError::TooManyVertices(self.num_vertices));
        }
        let n = self.num_vertices;
        for (index, &(src, dst)) in self.edges.iter().enumerate() {
            if src as usize >= n || dst as usize >= n {
                return Err(GraphError::EndpointOutOfRange {
                    index,
                    src,
                    dst,
                    num_vertices: n,
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}
