//! Seeded synthetic graph generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EdgeList, GraphError, Result, VertexId};

/// Quadrant probabilities for recursive (R-MAT style) edge sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KroneckerProbs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl KroneckerProbs {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Graph500 / GAP parameters.
    pub const GAP: Self = Self::new(0.57, 0.19, 0.19, 0.05);

    pub const UNIFORM: Self = Self::new(0.25, 0.25, 0.25, 0.25);

    fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c, self.d];
        if all.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(GraphError::InvalidParameters(format!(
                "probabilities must be non-negative: {self:?}"
            )));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(GraphError::InvalidParameters(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }
}

impl Default for KroneckerProbs {
    fn default() -> Self {
        Self::GAP
    }
}

fn vertex_count(scale: u32) -> Result<usize> {
    if !(1..=31).contains(&scale) {
        return Err(GraphError::InvalidParameters(format!(
            "scale must be in [1, 31], got {scale}"
        )));
    }
    Ok(1usize << scale)
}

/// Erdős–Rényi style uniform random graph with `2^scale` vertices.
///
/// Emits `floor(avg_degree * N / 2)` undirected pairs; after symmetrization
/// the CSR holds about `avg_degree * N` directed entries.
pub fn generate_urand(scale: u32, avg_degree: u64, seed: u64) -> Result<EdgeList> {
    let n = vertex_count(scale)?;
    if avg_degree == 0 {
        return Err(GraphError::InvalidParameters("avg_degree must be >= 1".into()));
    }
    let pairs = (n as u64)
        .checked_mul(avg_degree)
        .map(|x| x / 2)
        .filter(|&x| x <= usize::MAX as u64 / 8)
        .ok_or_else(|| GraphError::InvalidParameters("edge count overflows".into()))?
        as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hi = n as u64;
    let edges = (0..pairs)
        .map(|_| {
            let u = rng.gen_range(0..hi) as VertexId;
            let v = rng.gen_range(0..hi) as VertexId;
            (u, v)
        })
        .collect();
    Ok(EdgeList {
        num_vertices: n,
        edges,
    })
}

/// Kronecker graph with `2^scale` vertices and `edge_factor * N` sampled
/// directed edges, each placed by `scale` rounds of quadrant selection.
pub fn generate_kronecker(
    scale: u32,
    edge_factor: u64,
    seed: u64,
    probs: KroneckerProbs,
) -> Result<EdgeList> {
    probs.validate()?;
    let n = vertex_count(scale)?;
    let count = (n as u64)
        .checked_mul(edge_factor)
        .filter(|&x| x <= usize::MAX as u64 / 8)
        .ok_or_else(|| GraphError::InvalidParameters("edge count overflows".into()))?
        as usize;

    let ab = probs.a + probs.b;
    let abc = ab + probs.c;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..count)
        .map(|_| {
            let (mut u, mut v) = (0 as VertexId, 0 as VertexId);
            for _ in 0..scale {
                let r: f64 = rng.gen();
                let (bu, bv) = if r < probs.a {
                    (0, 0)
                } else if r < ab {
                    (0, 1)
                } else if r < abc {
                    (1, 0)
                } else {
                    (1, 1)
                };
                u = (u << 1) | bu;
                v = (v << 1) | bv;
            }
            (u, v)
        })
        .collect();
    Ok(EdgeList {
        num_vertices: n,
        edges,
    })
}
