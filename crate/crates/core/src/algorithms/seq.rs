//! Single-threaded reference implementations.

use serde::{Deserialize, Serialize};

use crate::graph::{transpose, Adjacency, CsrGraph, EdgeList, GraphError, VertexId};
use crate::{Error, Result};

/// Distance of a vertex the search never reached.
pub const UNREACHED: u32 = u32::MAX;
/// Parent of a vertex the search never reached.
pub const NO_PARENT: VertexId = VertexId::MAX;

/// Largest graph [`tc_bruteforce`] accepts.
pub const BRUTEFORCE_MAX_VERTICES: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfsResult {
    pub distances: Vec<u32>,
    pub parents: Vec<VertexId>,
}

impl BfsResult {
    pub fn reached(&self) -> usize {
        self.distances.iter().filter(|&&d| d != UNREACHED).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DanglingMode {
    /// Spread the rank of zero-out-degree vertices evenly over all vertices.
    Redistribute,
    /// Drop it, so total rank leaks whenever dangling vertices exist.
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankParams {
    pub damping: f64,
    /// Iteration stops once the L1 change drops below this.
    pub tolerance: f64,
    pub max_iters: usize,
    pub dangling: DanglingMode,
}

impl PageRankParams {
    /// Damping 0.85, tolerance `1e-7·N`, at most 100 iterations,
    /// redistributed dangling mass.
    pub fn for_graph(num_vertices: usize) -> Self {
        Self {
            damping: 0.85,
            tolerance: 1e-7 * num_vertices.max(1) as f64,
            max_iters: 100,
            dangling: DanglingMode::Redistribute,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidInput(format!(
                "damping must be in (0, 1), got {}",
                self.damping
            )));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankResult {
    pub ranks: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// L1 change of every iteration.
    pub deltas: Vec<f64>,
}

/// `|a ∩ b|` for strictly ascending inputs, by linear merge.
pub fn intersection_size(a: &[VertexId], b: &[VertexId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Triangle count of an upper-triangular DAG (see
/// [`to_upper_dag`](crate::graph::to_upper_dag)): for every edge `(u, v)`,
/// the common out-neighbors of `u` and `v`.
pub fn tc_seq(g: &CsrGraph) -> Result<u64> {
    if !g.is_sorted() {
        return Err(GraphError::NotSorted.into());
    }
    let mut triangles = 0u64;
    for (_, nbrs) in g.iter() {
        for &v in nbrs {
            triangles += intersection_size(nbrs, g.neighbors(v)) as u64;
        }
    }
    Ok(triangles)
}

/// Exhaustive triangle count of a symmetric edge list: every vertex triple
/// `u < v < w` is tested against an adjacency bit matrix.
pub fn tc_bruteforce(edges: &EdgeList) -> Result<u64> {
    let n = edges.num_vertices;
    if n > BRUTEFORCE_MAX_VERTICES {
        return Err(Error::InvalidInput(format!(
            "brute-force triangle count is limited to {BRUTEFORCE_MAX_VERTICES} vertices, got {n}"
        )));
    }
    edges.validate()?;
    let words = n.div_ceil(64);
    let mut adj = vec![0u64; n * words];
    for &(u, v) in &edges.edges {
        if u != v {
            let (u, v) = (u as usize, v as usize);
            adj[u * words + v / 64] |= 1 << (v % 64);
            adj[v * words + u / 64] |= 1 << (u % 64);
        }
    }
    let row = |u: usize| &adj[u * words..(u + 1) * words];
    let mut triangles = 0u64;
    for u in 0..n {
        for v in u + 1..n {
            if row(u)[v / 64] & (1 << (v % 64)) == 0 {
                continue;
            }
            // Common neighbors w > v.
            for (k, (a, b)) in row(u).iter().zip(row(v)).enumerate() {
                let mut both = a & b;
                let lo = k * 64;
                if lo + 64 <= v + 1 {
                    continue;
                }
                if lo <= v {
                    both &= !((2u64 << (v - lo)) - 1);
                }
                triangles += both.count_ones() as u64;
            }
        }
    }
    Ok(triangles)
}

/// Power iteration from the uniform vector, pulling over in-neighbors:
/// `pr'(u) = (1-d)/N + d·(Σ_{v→u} pr(v)/deg(v) + dangling/N)` where the
/// dangling term is present only in [`DanglingMode::Redistribute`].
pub fn pagerank_seq(g: &CsrGraph, params: &PageRankParams) -> Result<PageRankResult> {
    params.validate()?;
    let n = g.num_vertices();
    if n == 0 {
        return Ok(PageRankResult {
            ranks: Vec::new(),
            iterations: 0,
            converged: true,
            deltas: Vec::new(),
        });
    }
    let incoming = transpose(g);
    let deg: Vec<f64> = (0..n as VertexId).map(|u| g.degree(u) as f64).collect();
    let nf = n as f64;
    let d = params.damping;
    let mut pr = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut deltas = Vec::new();
    let mut converged = false;
    while deltas.len() < params.max_iters {
        let dangling = match params.dangling {
            DanglingMode::Redistribute => (0..n)
                .filter(|&v| deg[v] == 0.0)
                .map(|v| pr[v])
                .sum::<f64>(),
            DanglingMode::Skip => 0.0,
        };
        let base = (1.0 - d) / nf;
        let mut delta = 0.0;
        for u in 0..n {
            let a: f64 = incoming
                .neighbors(u as VertexId)
                .iter()
                .map(|&v| pr[v as usize] / deg[v as usize])
                .sum();
            next[u] = base + d * (a + dangling / nf);
            delta += (next[u] - pr[u]).abs();
        }
        std::mem::swap(&mut pr, &mut next);
        deltas.push(delta);
        if delta < params.tolerance {
            converged = true;
            break;
        }
    }
    Ok(PageRankResult {
        ranks: pr,
        iterations: deltas.len(),
        converged,
        deltas,
    })
}

/// Level-by-level BFS. Each frontier is expanded in ascending vertex order,
/// so a vertex's parent is its smallest neighbor on the previous level.
pub fn bfs_seq(g: &CsrGraph, source: VertexId) -> Result<BfsResult> {
    let n = g.num_vertices();
    if source as usize >= n {
        return Err(GraphError::VertexOutOfRange {
            vertex: source as usize,
            num_vertices: n,
        }
        .into());
    }
    let mut distances = vec![UNREACHED; n];
    let mut parents = vec![NO_PARENT; n];
    distances[source as usize] = 0;
    parents[source as usize] = source;
    let mut frontier = vec![source];
    let mut level = 0;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in g.neighbors(u) {
                if distances[v as usize] == UNREACHED {
                    distances[v as usize] = level + 1;
                    parents[v as usize] = u;
                    next.push(v);
                }
            }
        }
        next.sort_unstable();
        frontier = next;
        level += 1;
    }
    Ok(BfsResult { distances, parents })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_csr, symmetrize, to_upper_dag};

    fn sym(n: usize, edges: &[(u32, u32)]) -> CsrGraph {
        let e = symmetrize(&EdgeList::new(n, edges.to_vec()).unwrap()).unwrap();
        build_csr(&e, true).unwrap()
    }

    #[test]
    fn intersections() {
        assert_eq!(intersection_size(&[1, 2, 3], &[2, 3, 4]), 2);
        assert_eq!(intersection_size(&[1, 2, 3], &[]), 0);
        assert_eq!(intersection_size(&[1, 5, 9], &[1, 5, 9]), 3);
    }

    #[test]
    fn triangles_small() {
        let k3 = sym(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(tc_seq(&to_upper_dag(&k3).unwrap()).unwrap(), 1);
        let path = sym(3, &[(0, 1), (1, 2)]);
        assert_eq!(tc_seq(&to_upper_dag(&path).unwrap()).unwrap(), 0);
        let unsorted = build_csr(&EdgeList::new(2, vec![(0, 1)]).unwrap(), false).unwrap();
        assert!(tc_seq(&unsorted).is_err());
    }

    #[test]
    fn bruteforce_small() {
        let k4: Vec<_> = (0..4u32)
            .flat_map(|u| (0..4u32).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        assert_eq!(tc_bruteforce(&EdgeList::new(4, k4).unwrap()).unwrap(), 4);
        let k3 = EdgeList::new(4, vec![(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]).unwrap();
        assert_eq!(tc_bruteforce(&k3).unwrap(), 1);
        assert_eq!(tc_bruteforce(&EdgeList::new(5, vec![]).unwrap()).unwrap(), 0);
        assert!(tc_bruteforce(&EdgeList::new(2001, vec![]).unwrap()).is_err());
    }

    #[test]
    fn bruteforce_across_word_boundaries() {
        // Triangles straddling the 64-bit word edges of the bit matrix.
        let tri = [(0, 63), (63, 64), (0, 64), (62, 63), (62, 127), (63, 127), (64, 128), (128, 129), (64, 129)];
        let g = sym(130, &tri);
        assert_eq!(tc_bruteforce(&g.to_edge_list()).unwrap(), 3);
        assert_eq!(tc_seq(&to_upper_dag(&g).unwrap()).unwrap(), 3);
    }

    #[test]
    fn pagerank_two_cycle_and_single_vertex() {
        let g = build_csr(&EdgeList::new(2, vec![(0, 1), (1, 0)]).unwrap(), true).unwrap();
        let r = pagerank_seq(&g, &PageRankParams::for_graph(2)).unwrap();
        assert!(r.ranks.iter().all(|x| (x - 0.5).abs() < 1e-10));
        let one = build_csr(&EdgeList::new(1, vec![]).unwrap(), true).unwrap();
        let r = pagerank_seq(&one, &PageRankParams::for_graph(1)).unwrap();
        assert!((r.ranks[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pagerank_rejects_bad_params() {
        let g = build_csr(&EdgeList::new(1, vec![]).unwrap(), true).unwrap();
        let mut p = PageRankParams::for_graph(1);
        p.damping = 1.0;
        assert!(pagerank_seq(&g, &p).is_err());
        p.damping = 0.85;
        p.tolerance = 0.0;
        assert!(pagerank_seq(&g, &p).is_err());
    }

    #[test]
    fn bfs_small() {
        let path = sym(4, &[(0, 1), (1, 2)]);
        let r = bfs_seq(&path, 0).unwrap();
        assert_eq!(r.distances, vec![0, 1, 2, UNREACHED]);
        assert_eq!(r.parents, vec![0, 0, 1, NO_PARENT]);
        assert_eq!(r.reached(), 3);
        assert!(bfs_seq(&path, 4).is_err());
    }

    #[test]
    fn bfs_parent_is_smallest_previous_level_neighbor() {
        // 3 is reachable from both 1 and 2 at level 1.
        let g = sym(4, &[(0, 2), (0, 1), (2, 3), (1, 3)]);
        assert_eq!(bfs_seq(&g, 0).unwrap().parents[3], 1);
    }
}
