use std::ops::Range;

use super::{EdgeList, GraphError, Result, VertexId};

/// The graph interface algorithms are written against: an outer range over
/// vertices whose elements are ranges over out-neighbors.
pub trait Adjacency {
    /// Vertices whose neighbor lists this view holds.
    fn vertices(&self) -> Range<VertexId>;

    /// Out-neighbors of `u`. `u` must lie in [`Adjacency::vertices`].
    fn neighbors(&self, u: VertexId) -> &[VertexId];

    fn iter(&self) -> impl Iterator<Item = (VertexId, &[VertexId])> {
        self.vertices().map(move |u| (u, self.neighbors(u)))
    }
}

/// Compressed sparse row adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrGraph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    sorted: bool,
}

impl CsrGraph {
    /// Assembles a graph from raw arrays, checking every structural invariant.
    pub fn from_parts(offsets: Vec<usize>, targets: Vec<VertexId>, sorted: bool) -> Result<Self> {
        let bad = |m: &str| GraphError::InvalidParameters(m.to_string());
        if offsets.first() != Some(&0) {
            return Err(bad("offsets must start at 0"));
        }
        if *offsets.last().unwrap() != targets.len() {
            return Err(bad("last offset must equal the edge count"));
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(bad("offsets must be non-decreasing"));
        }
        let n = offsets.len() - 1;
        if n > VertexId::MAX as usize {
            return Err(GraphError::TooManyVertices(n));
        }
        if let Some(&t) = targets.iter().find(|&&t| t as usize >= n) {
            return Err(GraphError::VertexOutOfRange {
                vertex: t as usize,
                num_vertices: n,
            });
        }
        let g = Self {
            offsets,
            targets,
            sorted,
        };
        if sorted {
            for u in 0..n as VertexId {
                let nbrs = g.neighbors(u);
                if nbrs.windows(2).any(|w| w[0] >= w[1]) || nbrs.contains(&u) {
                    return Err(GraphError::NotSorted);
                }
            }
        }
        Ok(g)
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of directed entries in the target array.
    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn targets(&self) -> &[VertexId] {
        &self.targets
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    pub fn degree(&self, u: VertexId) -> usize {
        self.offsets[u as usize + 1] - self.offsets[u as usize]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        let nbrs = self.neighbors(u);
        if self.sorted {
            nbrs.binary_search(&v).is_ok()
        } else {
            nbrs.contains(&v)
        }
    }

    /// Bytes held by the offset and target arrays.
    pub fn storage_bytes(&self) -> usize {
        self.offsets.len() * std::mem::size_of::<usize>()
            + self.targets.len() * std::mem::size_of::<VertexId>()
    }

    /// Flattens back into a directed edge list in CSR order.
    pub fn to_edge_list(&self) -> EdgeList {
        let edges = self
            .iter()
            .flat_map(|(u, nbrs)| nbrs.iter().map(move |&v| (u, v)))
            .collect();
        EdgeList {
            num_vertices: self.num_vertices(),
            edges,
        }
    }
}

impl Adjacency for CsrGraph {
    fn vertices(&self) -> Range<VertexId> {
        0..self.num_vertices() as VertexId
    }

    fn neighbors(&self, u: VertexId) -> &[VertexId] {
        let u = u as usize;
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }
}

impl std::ops::Index<VertexId> for CsrGraph {
    type Output = [VertexId];

    fn index(&self, u: VertexId) -> &[VertexId] {
        self.neighbors(u)
    }
}

/// Counting sort of `(key, value)` pairs into CSR arrays, stable in input order.
fn bucket_by<I>(n: usize, len: usize, pairs: I) -> (Vec<usize>, Vec<VertexId>)
where
    I: Iterator<Item = (VertexId, VertexId)> + Clone,
{
    let mut offsets = vec![0usize; n + 1];
    for (k, _) in pairs.clone() {
        offsets[k as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut targets = vec![0 as VertexId; len];
    for (k, v) in pairs {
        let slot = &mut cursor[k as usize];
        targets[*slot] = v;
        *slot += 1;
    }
    (offsets, targets)
}

/// Builds a CSR graph grouped by source. With `sort_adjacency`, each neighbor
/// range is sorted ascending with duplicates and self-loops removed;
/// otherwise edges keep their input order within each source.
pub fn build_csr(edges: &EdgeList, sort_adjacency: bool) -> Result<CsrGraph> {
    edges.validate()?;
    let n = edges.num_vertices;
    let (offsets, targets) = bucket_by(n, edges.edges.len(), edges.edges.iter().copied());
    if !sort_adjacency {
        return Ok(CsrGraph {
            offsets,
            targets,
            sorted: false,
        });
    }

    let mut out_offsets = Vec::with_capacity(n + 1);
    let mut out_targets = Vec::with_capacity(targets.len());
    out_offsets.push(0);
    let mut scratch = Vec::new();
    for u in 0..n {
        scratch.clear();
        scratch.extend_from_slice(&targets[offsets[u]..offsets[u + 1]]);
        scratch.sort_unstable();
        scratch.dedup();
        out_targets.extend(scratch.iter().copied().filter(|&v| v as usize != u));
        out_offsets.push(out_targets.len());
    }
    Ok(CsrGraph {
        offsets: out_offsets,
        targets: out_targets,
        sorted: true,
    })
}

/// Returns an edge list holding both directions of every non-loop edge,
/// each exactly once, in ascending `(src, dst)` order.
pub fn symmetrize(edges: &EdgeList) -> Result<EdgeList> {
    edges.validate()?;
    let mut out: Vec<(VertexId, VertexId)> = edges
        .edges
        .iter()
        .filter(|(u, v)| u != v)
        .flat_map(|&(u, v)| [(u, v), (v, u)])
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(EdgeList {
        num_vertices: edges.num_vertices,
        edges: out,
    })
}

/// Reverses every edge. Sources are visited in ascending order, so sorted
/// input yields sorted output.
pub fn transpose(g: &CsrGraph) -> CsrGraph {
    let reversed = (0..g.num_vertices() as VertexId)
        .flat_map(|u| g.neighbors(u).iter().map(move |&v| (v, u)));
    let (offsets, targets) = bucket_by(g.num_vertices(), g.num_edges(), reversed);
    CsrGraph {
        offsets,
        targets,
        sorted: g.sorted,
    }
}

/// Keeps only edges `(u, v)` with `u < v`, orienting a symmetric graph into a
/// DAG in which every triangle appears exactly once.
pub fn to_upper_dag(g: &CsrGraph) -> Result<CsrGraph> {
    if !g.sorted {
        return Err(GraphError::NotSorted);
    }
    let mut offsets = Vec::with_capacity(g.num_vertices() + 1);
    let mut targets = Vec::with_capacity(g.num_edges() / 2);
    offsets.push(0);
    for (u, nbrs) in g.iter() {
        let start = nbrs.partition_point(|&v| v <= u);
        targets.extend_from_slice(&nbrs[start..]);
        offsets.push(targets.len());
    }
    Ok(CsrGraph {
        offsets,
        targets,
        sorted: true,
    })
}

pub fn out_degree(g: &CsrGraph, u: VertexId) -> Result<usize> {
    if u as usize >= g.num_vertices() {
        return Err(GraphError::VertexOutOfRange {
            vertex: u as usize,
            num_vertices: g.num_vertices(),
        });
    }
    Ok(g.degree(u))
}
