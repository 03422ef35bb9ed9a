//! One-call entry points: distribute a whole graph, run, gather, release.

use crate::graph::{to_upper_dag, CsrGraph, VertexId};
use crate::partition::{DistCsr, PartitionMap};
use crate::runtime::{Runtime, RuntimeConfig};
use crate::{Error, Result};

use super::seq::{BfsResult, PageRankParams};
use super::{bfs_dist, pagerank_dist, register_actions, tc_dist_with, BfsOptions, IterationStats, PageRankGraph, TcOptions};

/// Starts a runtime with every algorithm action registered.
pub fn start_runtime(config: RuntimeConfig) -> Result<Runtime> {
    let mut builder = Runtime::builder(config);
    register_actions(builder.actions_mut())?;
    Ok(builder.start()?)
}

fn map_for(rt: &Runtime, g: &CsrGraph, parts_per_locality: usize) -> Result<PartitionMap> {
    PartitionMap::new(g.num_vertices(), rt.num_localities(), parts_per_locality)
}

/// Triangles of a symmetric, sorted graph.
pub fn count_triangles(rt: &Runtime, g: &CsrGraph, parts_per_locality: usize, opts: TcOptions) -> Result<u64> {
    let dag = to_upper_dag(g)?;
    let dist = DistCsr::distribute(rt, &dag, map_for(rt, g, parts_per_locality)?)?;
    let out = tc_dist_with(rt, &dist, opts);
    dist.release(rt);
    out
}

/// Distances and parents gathered at locality 0 (`None` elsewhere).
pub fn breadth_first(
    rt: &Runtime,
    g: &CsrGraph,
    parts_per_locality: usize,
    source: VertexId,
    opts: BfsOptions,
) -> Result<(Option<BfsResult>, Vec<IterationStats>)> {
    let dist = DistCsr::distribute(rt, g, map_for(rt, g, parts_per_locality)?)?;
    let out = bfs_dist(rt, &dist, source, opts);
    dist.release(rt);
    let out = out?;
    let distances = out.distances.gather(rt);
    let parents = out.parents.gather(rt);
    out.distances.release(rt);
    out.parents.release(rt);
    let result = match (distances?, parents?) {
        (Some(distances), Some(parents)) => Some(BfsResult { distances, parents }),
        _ => None,
    };
    Ok((result, out.stats))
}

#[derive(Debug, Clone)]
pub struct PageRankRun {
    /// Gathered at locality 0.
    pub ranks: Option<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    pub stats: Vec<IterationStats>,
}

pub fn page_rank(rt: &Runtime, g: &CsrGraph, parts_per_locality: usize, params: &PageRankParams) -> Result<PageRankRun> {
    let graph = PageRankGraph::new(rt, g, map_for(rt, g, parts_per_locality)?)?;
    let out = pagerank_dist(rt, &graph, params);
    graph.release(rt);
    let out = out?;
    let ranks = out.ranks.gather(rt);
    out.ranks.release(rt);
    Ok(PageRankRun {
        ranks: ranks?,
        iterations: out.iterations,
        converged: out.converged,
        stats: out.stats,
    })
}

/// Gathered value or an error when this process does not host locality 0.
pub fn expect_root<T>(gathered: Option<T>) -> Result<T> {
    gathered.ok_or_else(|| Error::InvalidInput("results are gathered on locality 0, which is not hosted here".into()))
}
