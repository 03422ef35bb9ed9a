use std::sync::Arc;

use crate::graph::{Adjacency, GraphError, VertexId};
use crate::partition::{DistCsr, LocalGraph};
use crate::runtime::{wait_all, Action, Future, GlobalId, Locality, Runtime, RuntimeError};
use crate::Result;

use super::seq::intersection_size;

/// Intersects a shipped neighbor list with the local neighbors of `v`.
pub struct Intersect;

impl Action for Intersect {
    const ID: u32 = 0x100;
    const NAME: &'static str = "tc_intersect";
    type Args = (GlobalId, VertexId, Vec<VertexId>);
    type Output = u64;

    fn execute(here: &Locality, (graph, v, u_neighbors): Self::Args) -> Result<u64, RuntimeError> {
        let local = here.component::<LocalGraph>(graph)?;
        Ok(intersection_size(&u_neighbors, local.local_neighbors(v)?) as u64)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TcOptions {
    /// Split each partition's vertex loop into one task per worker.
    pub parallel_inner: bool,
}

/// Counts triangles of a distributed upper-triangular DAG. Every partition
/// runs as its own task; the only synchronization is the final all-reduce.
pub fn tc_dist(rt: &Runtime, dist: &DistCsr) -> Result<u64> {
    tc_dist_with(rt, dist, TcOptions::default())
}

pub fn tc_dist_with(rt: &Runtime, dist: &DistCsr, opts: TcOptions) -> Result<u64> {
    if !dist.is_sorted() {
        return Err(GraphError::NotSorted.into());
    }
    let chunks = if opts.parallel_inner {
        rt.config().workers_per_locality
    } else {
        1
    };
    let dist = dist.clone();
    let counts = rt.spmd(move |loc| {
        let dist = dist.clone();
        async move {
            let local = dist.local(&loc)?;
            let mut tasks: Vec<Future<u64>> = Vec::new();
            for (p, slice) in local.partitions() {
                let range = slice.vertices();
                let len = range.len().div_ceil(chunks).max(1);
                let mut start = range.start;
                while start < range.end {
                    let end = (start + len as VertexId).min(range.end);
                    let (l2, local2) = (loc.clone(), local.clone());
                    let task = count_range(l2, local2, dist.id(), p, start..end);
                    tasks.push(loc.spawn(task).flatten());
                    start = end;
                }
            }
            let partial: u64 = wait_all(tasks).await?.into_iter().sum();
            loc.all_reduce(partial, |a, b| a + b).await
        }
    })?;
    Ok(counts.first().copied().unwrap_or(0))
}

async fn count_range(
    loc: Locality,
    local: Arc<LocalGraph>,
    graph: GlobalId,
    partition: usize,
    range: std::ops::Range<VertexId>,
) -> Result<u64, RuntimeError> {
    let slice = local.partition(partition);
    let map = local.map();
    let mut triangles = 0u64;
    let mut remote = Vec::new();
    for u in range {
        let u_neighbors = slice.neighbors(u);
        for &v in u_neighbors {
            if local.is_local(v) {
                triangles += intersection_size(u_neighbors, local.local_neighbors(v)?) as u64;
            } else {
                remote.push(loc.remote_invoke::<Intersect>(
                    map.owner(v),
                    (graph, v, u_neighbors.to_vec()),
                ));
            }
        }
    }
    Ok(triangles + wait_all(remote).await?.into_iter().sum::<u64>())
}
