use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::graph::{Adjacency, GraphError, VertexId};
use crate::partition::{ArrayPart, DistArray, DistCsr, LocalGraph};
use crate::runtime::{wait_all, Action, GlobalId, Locality, LocalityId, Runtime, RuntimeError};
use crate::Result;

use super::seq::{NO_PARENT, UNREACHED};
use super::IterationStats;

/// Vertices claimed here on behalf of other localities, keyed by level. A
/// peer that already left the previous all-reduce may deliver claims for
/// the level after the one being drained.
#[derive(Debug, Default)]
struct Inbox {
    by_level: Mutex<HashMap<u32, Vec<VertexId>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BfsIds {
    inbox: GlobalId,
    distances: GlobalId,
    parents: GlobalId,
}

/// Claims `(vertex, parent)` pairs on the owner at distance `level`; the
/// winners join the owner's next frontier. Returns how many were claimed.
pub struct BfsClaim;

impl Action for BfsClaim {
    const ID: u32 = 0x102;
    const NAME: &'static str = "bfs_claim";
    type Args = (BfsIds, u32, Vec<(VertexId, VertexId)>);
    type Output = u64;

    fn execute(here: &Locality, (ids, level, pairs): Self::Args) -> Result<u64, RuntimeError> {
        let distances = here.component::<ArrayPart<u32>>(ids.distances)?;
        let parents = here.component::<ArrayPart<u32>>(ids.parents)?;
        let inbox = here.component::<Inbox>(ids.inbox)?;
        let mut won = Vec::new();
        for (v, parent) in pairs {
            if claim(&distances, &parents, v, parent, level)? {
                won.push(v);
            }
        }
        let n = won.len() as u64;
        inbox.by_level.lock().entry(level).or_default().extend(won);
        Ok(n)
    }
}

/// First writer wins: only the caller that moves `v` out of UNREACHED sets
/// its parent.
fn claim(
    distances: &ArrayPart<u32>,
    parents: &ArrayPart<u32>,
    v: VertexId,
    parent: VertexId,
    level: u32,
) -> Result<bool, RuntimeError> {
    if distances.get(v)? != UNREACHED {
        return Ok(false);
    }
    if distances.compare_exchange(v, UNREACHED, level)?.is_ok() {
        parents.set(v, parent)?;
        return Ok(true);
    }
    Ok(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BfsOptions {
    /// Send one claim message per destination per partition task instead
    /// of one per remote edge.
    pub batch_remote: bool,
}

impl Default for BfsOptions {
    fn default() -> Self {
        Self { batch_remote: true }
    }
}

#[derive(Debug, Clone)]
pub struct BfsOutput {
    pub distances: DistArray<u32>,
    pub parents: DistArray<u32>,
    pub levels: usize,
    /// Per-level stats as seen by the first hosted locality.
    pub stats: Vec<IterationStats>,
}

/// Level-synchronous BFS. A level ends once every locality has had its
/// remote claims acknowledged and the next frontier sizes are summed.
pub fn bfs_dist(rt: &Runtime, dist: &DistCsr, source: VertexId, opts: BfsOptions) -> Result<BfsOutput> {
    let n = dist.num_vertices();
    if source as usize >= n {
        return Err(GraphError::VertexOutOfRange {
            vertex: source as usize,
            num_vertices: n,
        }
        .into());
    }
    let map = dist.map().clone();
    let distances = DistArray::from_fn(rt, &map, |v| if v == source { 0 } else { UNREACHED });
    let parents = DistArray::from_fn(rt, &map, |v| if v == source { source } else { NO_PARENT });
    let inbox_id = rt.next_global_id();
    for loc in rt.localities() {
        loc.register_component(inbox_id, Arc::new(Inbox::default()));
    }
    let ids = BfsIds {
        inbox: inbox_id,
        distances: distances.id(),
        parents: parents.id(),
    };
    let dist = dist.clone();

    let result = rt.spmd(move |loc| {
        let dist = dist.clone();
        async move {
            let local = dist.local(&loc)?;
            let inbox = loc.component::<Inbox>(ids.inbox)?;
            let mut frontier = if local.is_local(source) { vec![source] } else { Vec::new() };
            let mut stats = Vec::new();
            let mut level = 0u32;
            loop {
                let started = Instant::now();
                let invoked = loc.metrics().actions_invoked;
                // Group the frontier by partition, one task each.
                let mut tasks = Vec::new();
                let mut rest = frontier.as_slice();
                for (p, slice) in local.partitions() {
                    let end = rest.partition_point(|&u| u < slice.vertices().end);
                    let (mine, tail) = rest.split_at(end);
                    rest = tail;
                    if !mine.is_empty() {
                        let body = expand(loc.clone(), local.clone(), p, mine.to_vec(), ids, level + 1, opts);
                        tasks.push(loc.spawn(body).flatten());
                    }
                }
                let mut next = Vec::new();
                let mut claimed = 0u64;
                for (local_next, remote_claimed) in wait_all(tasks).await? {
                    claimed += local_next.len() as u64 + remote_claimed;
                    next.extend(local_next);
                }
                let total = loc.all_reduce(claimed, |a, b| a + b).await?;
                // All claims of this level have been acknowledged everywhere.
                next.extend(inbox.by_level.lock().remove(&(level + 1)).unwrap_or_default());
                next.sort_unstable();
                stats.push(IterationStats {
                    index: level as usize,
                    delta: None,
                    rank_sum: None,
                    frontier: Some(total),
                    wall_time: started.elapsed(),
                    remote_ops: loc.metrics().actions_invoked - invoked,
                });
                level += 1;
                if total == 0 {
                    break;
                }
                frontier = next;
            }
            Ok(stats)
        }
    });
    for loc in rt.localities() {
        loc.unregister_component(inbox_id);
    }
    let stats = match result {
        Ok(s) => s.into_iter().next().unwrap_or_default(),
        Err(e) => {
            distances.release(rt);
            parents.release(rt);
            return Err(e.into());
        }
    };
    Ok(BfsOutput {
        distances,
        parents,
        levels: stats.len(),
        stats,
    })
}

/// Expands `frontier` (owned vertices of partition `p`). Returns the
/// vertices claimed locally and the number claimed remotely.
async fn expand(
    loc: Locality,
    local: Arc<LocalGraph>,
    p: usize,
    frontier: Vec<VertexId>,
    ids: BfsIds,
    level: u32,
    opts: BfsOptions,
) -> Result<(Vec<VertexId>, u64), RuntimeError> {
    let slice = local.partition(p);
    let map = local.map();
    let distances = loc.component::<ArrayPart<u32>>(ids.distances)?;
    let parents = loc.component::<ArrayPart<u32>>(ids.parents)?;
    let mut claimed = Vec::new();
    let mut outgoing: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); map.num_localities() as usize];
    let mut pending = Vec::new();
    for &u in &frontier {
        for &v in slice.neighbors(u) {
            if local.is_local(v) {
                if claim(&distances, &parents, v, u, level)? {
                    claimed.push(v);
                }
            } else if opts.batch_remote {
                outgoing[map.owner(v) as usize].push((v, u));
            } else {
                pending.push(loc.remote_invoke::<BfsClaim>(map.owner(v), (ids, level, vec![(v, u)])));
            }
        }
    }
    for (dest, pairs) in outgoing.into_iter().enumerate() {
        if !pairs.is_empty() {
            pending.push(loc.remote_invoke::<BfsClaim>(dest as LocalityId, (ids, level, pairs)));
        }
    }
    let remote: u64 = wait_all(pending).await?.into_iter().sum();
    Ok((claimed, remote))
}
