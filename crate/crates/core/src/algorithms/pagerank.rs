use std::sync::Arc;
use std::time::Instant;

use crate::graph::{transpose, Adjacency, CsrGraph, VertexId};
use crate::partition::{ArrayPart, DistArray, DistCsr, LocalGraph, PartitionMap};
use crate::runtime::{wait_all, Action, GlobalId, Locality, Runtime, RuntimeError};
use crate::Result;

use super::seq::{DanglingMode, PageRankParams};
use super::IterationStats;

/// Returns `(u, pr[v] / deg[v])` computed on the owner of `v`.
pub struct Contribution;

impl Action for Contribution {
    const ID: u32 = 0x101;
    const NAME: &'static str = "pagerank_contribution";
    type Args = (VertexId, VertexId, GlobalId, GlobalId);
    type Output = (VertexId, f64);

    fn execute(here: &Locality, (u, v, pr, deg): Self::Args) -> Result<Self::Output, RuntimeError> {
        let pr = here.component::<ArrayPart<f64>>(pr)?;
        let deg = here.component::<ArrayPart<f64>>(deg)?;
        Ok((u, pr.get(v)? / deg.get(v)?))
    }
}

/// In-neighbor adjacency plus the out-degrees of the original graph.
#[derive(Debug, Clone)]
pub struct PageRankGraph {
    pub incoming: DistCsr,
    pub out_degree: DistArray<f64>,
}

impl PageRankGraph {
    pub fn new(rt: &Runtime, g: &CsrGraph, map: PartitionMap) -> Result<Self> {
        let incoming = DistCsr::distribute(rt, &transpose(g), map.clone())?;
        let out_degree = DistArray::from_fn(rt, &map, |u| g.degree(u) as f64);
        Ok(Self {
            incoming,
            out_degree,
        })
    }

    pub fn release(&self, rt: &Runtime) {
        self.incoming.release(rt);
        self.out_degree.release(rt);
    }
}

/// Distributed arrays touched by one iteration. `current` is read, `next`
/// written, so concurrent partitions never see a half-updated vector.
#[derive(Debug, Clone, Copy)]
pub struct PageRankArrays {
    pub current: GlobalId,
    pub next: GlobalId,
    pub out_degree: GlobalId,
    pub accum: GlobalId,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PartitionUpdate {
    /// `Σ |pr'(u) - pr(u)|` over the partition.
    pub delta: f64,
    pub rank_sum: f64,
    /// Rank held by dangling vertices after the update.
    pub dangling: f64,
}

/// One relaxation step over partition `p` of `local`, run on its owner.
/// `dangling_share` is `dangling mass / N`, or zero when it is dropped.
pub async fn pagerank_iteration(
    loc: Locality,
    local: Arc<LocalGraph>,
    p: usize,
    arrays: PageRankArrays,
    damping: f64,
    dangling_share: f64,
) -> Result<PartitionUpdate, RuntimeError> {
    let slice = local.partition(p);
    let map = local.map();
    let current = loc.component::<ArrayPart<f64>>(arrays.current)?;
    let next = loc.component::<ArrayPart<f64>>(arrays.next)?;
    let deg = loc.component::<ArrayPart<f64>>(arrays.out_degree)?;
    let accum = loc.component::<ArrayPart<f64>>(arrays.accum)?;

    let mut pending = Vec::new();
    for u in slice.vertices() {
        accum.set(u, 0.0)?;
        let mut sum = 0.0;
        for &v in slice.neighbors(u) {
            if local.is_local(v) {
                sum += current.get(v)? / deg.get(v)?;
            } else {
                let accum = accum.clone();
                pending.push(
                    loc.remote_invoke::<Contribution>(
                        map.owner(v),
                        (u, v, arrays.current, arrays.out_degree),
                    )
                    .then(move |(u, c)| accum.fetch_add(u, c).map(drop))
                    .flatten(),
                );
            }
        }
        accum.fetch_add(u, sum)?;
    }
    wait_all(pending).await?;

    let n = map.num_vertices() as f64;
    let base = (1.0 - damping) / n;
    let mut out = PartitionUpdate::default();
    for u in slice.vertices() {
        let old = current.get(u)?;
        let new = base + damping * (accum.get(u)? + dangling_share);
        next.set(u, new)?;
        out.delta += (new - old).abs();
        out.rank_sum += new;
        if deg.get(u)? == 0.0 {
            out.dangling += new;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct PageRankOutput {
    pub ranks: DistArray<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Per-iteration stats as seen by the first hosted locality.
    pub stats: Vec<IterationStats>,
}

/// Power iteration from the uniform vector until the global L1 change drops
/// below the tolerance or `max_iters` is reached.
pub fn pagerank_dist(rt: &Runtime, graph: &PageRankGraph, params: &PageRankParams) -> Result<PageRankOutput> {
    params.validate()?;
    let map = graph.incoming.map().clone();
    let n = map.num_vertices();
    let uniform = if n == 0 { 0.0 } else { 1.0 / n as f64 };
    let buffers = [
        DistArray::new(rt, &map, uniform),
        DistArray::new(rt, &map, 0.0),
    ];
    let ids = [buffers[0].id(), buffers[1].id()];
    let accum = DistArray::new(rt, &map, 0.0);
    let (deg_id, accum_id) = (graph.out_degree.id(), accum.id());
    let incoming = graph.incoming.clone();
    let params = *params;

    let per_locality = rt.spmd(move |loc| {
        let incoming = incoming.clone();
        async move {
            let local = incoming.local(&loc)?;
            let deg = loc.component::<ArrayPart<f64>>(deg_id)?;
            let redistribute = params.dangling == DanglingMode::Redistribute;
            let nf = n.max(1) as f64;

            let mut dangling = 0.0;
            if redistribute {
                let start = loc.component::<ArrayPart<f64>>(ids[0])?;
                let mut mine = 0.0;
                for u in local.owned_range() {
                    if deg.get(u)? == 0.0 {
                        mine += start.get(u)?;
                    }
                }
                dangling = loc.all_reduce(mine, |a, b| a + b).await?;
            }

            let mut stats = Vec::new();
            let mut converged = false;
            let mut cur = 0;
            while stats.len() < params.max_iters {
                let started = Instant::now();
                let invoked = loc.metrics().actions_invoked;
                let arrays = PageRankArrays {
                    current: ids[cur],
                    next: ids[1 - cur],
                    out_degree: deg_id,
                    accum: accum_id,
                };
                let share = if redistribute { dangling / nf } else { 0.0 };
                let tasks: Vec<_> = local
                    .partitions()
                    .map(|(p, _)| {
                        let body =
                            pagerank_iteration(loc.clone(), local.clone(), p, arrays, params.damping, share);
                        loc.spawn(body).flatten()
                    })
                    .collect();
                let mut sum = PartitionUpdate::default();
                for part in wait_all(tasks).await? {
                    sum.delta += part.delta;
                    sum.rank_sum += part.rank_sum;
                    sum.dangling += part.dangling;
                }
                let (delta, rank_sum, next_dangling) = loc
                    .all_reduce((sum.delta, sum.rank_sum, sum.dangling), |a, b| {
                        (a.0 + b.0, a.1 + b.1, a.2 + b.2)
                    })
                    .await?;
                cur = 1 - cur;
                dangling = next_dangling;
                stats.push(IterationStats {
                    index: stats.len(),
                    delta: Some(delta),
                    rank_sum: Some(rank_sum),
                    frontier: None,
                    wall_time: started.elapsed(),
                    remote_ops: loc.metrics().actions_invoked - invoked,
                });
                if delta < params.tolerance {
                    converged = true;
                    break;
                }
            }
            Ok((stats, converged, cur))
        }
    });
    accum.release(rt);
    let per_locality = match per_locality {
        Ok(v) => v,
        Err(e) => {
            buffers[0].release(rt);
            buffers[1].release(rt);
            return Err(e.into());
        }
    };
    let (stats, converged, cur) = per_locality.into_iter().next().unwrap_or_default();
    let [b0, b1] = buffers;
    let (ranks, spare) = if cur == 0 { (b0, b1) } else { (b1, b0) };
    spare.release(rt);
    Ok(PageRankOutput {
        ranks,
        iterations: stats.len(),
        converged,
        stats,
    })
}
