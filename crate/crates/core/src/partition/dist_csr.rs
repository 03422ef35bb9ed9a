use std::future::Future as StdFuture;
use std::ops::Range;
use std::sync::atomic::Ordering;
use std::sync::Arc;

use crate::graph::{Adjacency, CsrGraph, VertexId};
use crate::runtime::counters::Counters;
use crate::runtime::{Future, GlobalId, Locality, LocalityId, Runtime, RuntimeError};
use crate::{Error, Result};

use super::PartitionMap;

/// One partition's adjacency: offsets rebased to zero, targets global.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrSlice {
    first: VertexId,
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
}

impl CsrSlice {
    fn cut(g: &CsrGraph, range: Range<VertexId>) -> Self {
        let (s, e) = (range.start as usize, range.end as usize);
        let off = g.offsets();
        let base = off[s];
        Self {
            first: range.start,
            offsets: off[s..=e].iter().map(|o| o - base).collect(),
            targets: g.targets()[base..off[e]].to_vec(),
        }
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn storage_bytes(&self) -> usize {
        self.offsets.len() * std::mem::size_of::<usize>()
            + self.targets.len() * std::mem::size_of::<VertexId>()
    }
}

impl Adjacency for CsrSlice {
    fn vertices(&self) -> Range<VertexId> {
        self.first..self.first + (self.offsets.len() - 1) as VertexId
    }

    fn neighbors(&self, u: VertexId) -> &[VertexId] {
        let i = (u - self.first) as usize;
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// The slices one locality owns. Its storage is reported through the
/// locality's `graph_storage_bytes` counter for as long as it lives.
#[derive(Debug)]
pub struct LocalGraph {
    locality: LocalityId,
    counters: Arc<Counters>,
    map: Arc<PartitionMap>,
    first_partition: usize,
    partitions: Vec<CsrSlice>,
    range: Range<VertexId>,
    num_edges: usize,
    sorted: bool,
}

impl LocalGraph {
    pub fn map(&self) -> &PartitionMap {
        &self.map
    }

    pub fn locality_id(&self) -> LocalityId {
        self.locality
    }

    /// Owned slices with their global partition indices.
    pub fn partitions(&self) -> impl Iterator<Item = (usize, &CsrSlice)> {
        self.partitions
            .iter()
            .enumerate()
            .map(|(i, s)| (self.first_partition + i, s))
    }

    /// The slice for global partition `p`, which must be owned here.
    pub fn partition(&self, p: usize) -> &CsrSlice {
        &self.partitions[p - self.first_partition]
    }

    pub fn owned_range(&self) -> Range<VertexId> {
        self.range.clone()
    }

    #[inline]
    pub fn is_local(&self, v: VertexId) -> bool {
        self.range.contains(&v)
    }

    /// Neighbors of an owned vertex.
    pub fn local_neighbors(&self, u: VertexId) -> std::result::Result<&[VertexId], RuntimeError> {
        if !self.is_local(u) {
            return Err(RuntimeError::NotLocal {
                vertex: u as usize,
                locality: self.locality,
            });
        }
        Ok(self.partition(self.map.partition_of(u)).neighbors(u))
    }

    pub fn global_num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    pub fn storage_bytes(&self) -> usize {
        self.partitions.iter().map(CsrSlice::storage_bytes).sum()
    }
}

impl Drop for LocalGraph {
    fn drop(&mut self) {
        self.counters
            .graph_storage_bytes
            .fetch_sub(self.storage_bytes() as u64, Ordering::Relaxed);
    }
}

/// Handle to a graph distributed over the runtime's localities.
#[derive(Debug, Clone)]
pub struct DistCsr {
    id: GlobalId,
    map: Arc<PartitionMap>,
    num_edges: usize,
    sorted: bool,
}

impl DistCsr {
    /// Copies each hosted locality's partitions out of `g`.
    pub fn distribute(rt: &Runtime, g: &CsrGraph, map: PartitionMap) -> Result<Self> {
        if map.num_vertices() != g.num_vertices() {
            return Err(Error::InvalidInput(format!(
                "partition map covers {} vertices, graph has {}",
                map.num_vertices(),
                g.num_vertices()
            )));
        }
        if map.num_localities() != rt.num_localities() {
            return Err(Error::InvalidInput(format!(
                "partition map spans {} localities, runtime has {}",
                map.num_localities(),
                rt.num_localities()
            )));
        }
        let map = Arc::new(map);
        let id = rt.next_global_id();
        for loc in rt.localities() {
            let owned = map.owned_partitions(loc.id());
            let partitions: Vec<CsrSlice> = owned
                .clone()
                .map(|p| CsrSlice::cut(g, map.partition_range(p)))
                .collect();
            let local = LocalGraph {
                locality: loc.id(),
                counters: loc.counters_arc(),
                map: map.clone(),
                first_partition: owned.start,
                partitions,
                range: map.locality_range(loc.id()),
                num_edges: g.num_edges(),
                sorted: g.is_sorted(),
            };
            loc.counters()
                .graph_storage_bytes
                .fetch_add(local.storage_bytes() as u64, Ordering::Relaxed);
            loc.register_component(id, Arc::new(local));
        }
        Ok(Self {
            id,
            map,
            num_edges: g.num_edges(),
            sorted: g.is_sorted(),
        })
    }

    pub fn id(&self) -> GlobalId {
        self.id
    }

    pub fn map(&self) -> &PartitionMap {
        &self.map
    }

    pub fn num_vertices(&self) -> usize {
        self.map.num_vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    pub fn local(&self, loc: &Locality) -> std::result::Result<Arc<LocalGraph>, RuntimeError> {
        loc.component::<LocalGraph>(self.id)
    }

    /// Concatenates all slices in partition order. Needs every locality in
    /// this process.
    pub fn reassemble(&self, rt: &Runtime) -> Result<CsrGraph> {
        if !rt.hosts_all() {
            return Err(Error::InvalidInput(
                "reassembly needs every locality in this process".into(),
            ));
        }
        let mut offsets = vec![0usize];
        let mut targets = Vec::with_capacity(self.num_edges);
        for loc in rt.localities() {
            let local = self.local(loc)?;
            for (_, slice) in local.partitions() {
                let base = targets.len();
                offsets.extend(slice.offsets[1..].iter().map(|o| o + base));
                targets.extend_from_slice(&slice.targets);
            }
        }
        Ok(CsrGraph::from_parts(offsets, targets, self.sorted)?)
    }

    /// Drops the slices on every hosted locality.
    pub fn release(&self, rt: &Runtime) {
        for loc in rt.localities() {
            loc.unregister_component(self.id);
        }
    }
}

/// Spawns `body` once per partition on its owning locality and returns one
/// future per hosted partition, in partition order.
pub fn for_each_owned_partition<F, Fut, T>(rt: &Runtime, dist: &DistCsr, body: F) -> Vec<Future<T>>
where
    F: Fn(Locality, Arc<LocalGraph>, usize) -> Fut,
    Fut: StdFuture<Output = std::result::Result<T, RuntimeError>> + Send + 'static,
    T: Send + 'static,
{
    let mut out = Vec::new();
    for loc in rt.localities() {
        let local = match dist.local(loc) {
            Ok(l) => l,
            Err(e) => {
                out.push(Future::failed(e));
                continue;
            }
        };
        for p in dist.map().owned_partitions(loc.id()) {
            out.push(loc.spawn(body(loc.clone(), local.clone(), p)).flatten());
        }
    }
    out
}
