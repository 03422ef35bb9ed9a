//! Sequential oracles and their distributed counterparts.

mod bfs;
mod driver;
mod pagerank;
pub mod seq;
mod tc;
pub mod verify;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::runtime::{ActionTable, RuntimeError};

pub use driver::{breadth_first, count_triangles, expect_root, page_rank, start_runtime, PageRankRun};
pub use bfs::{bfs_dist, BfsClaim, BfsOptions, BfsOutput};
pub use pagerank::{
    pagerank_dist, pagerank_iteration, Contribution, PageRankArrays, PageRankGraph,
    PageRankOutput, PartitionUpdate,
};
pub use seq::{
    bfs_seq, intersection_size, pagerank_seq, tc_bruteforce, tc_seq, BfsResult, DanglingMode,
    PageRankParams, PageRankResult, NO_PARENT, UNREACHED,
};
pub use tc::{tc_dist, tc_dist_with, Intersect, TcOptions};

/// Progress of one PageRank iteration or BFS level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub index: usize,
    /// Global L1 change (PageRank).
    pub delta: Option<f64>,
    /// Global sum of the new ranks (PageRank).
    pub rank_sum: Option<f64>,
    /// Global size of the next frontier (BFS).
    pub frontier: Option<u64>,
    pub wall_time: Duration,
    /// Remote actions this locality issued during the step.
    pub remote_ops: u64,
}

/// Registers every action the distributed algorithms use.
pub fn register_actions(table: &mut ActionTable) -> Result<(), RuntimeError> {
    table.register::<Intersect>()?;
    table.register::<Contribution>()?;
    table.register::<BfsClaim>()?;
    Ok(())
}
