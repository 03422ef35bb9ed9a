//! Fixtures shared by the criterion benches.

use std::time::Duration;

use asyncgraph::algorithms::start_runtime;
use asyncgraph::graph::{build_csr, generate_urand, symmetrize};
use asyncgraph::{CsrGraph, Runtime, RuntimeConfig};

/// Symmetric, sorted urand graph.
pub fn urand(scale: u32, degree: u64, seed: u64) -> CsrGraph {
    let edges = generate_urand(scale, degree, seed).expect("valid generator arguments");
    build_csr(&symmetrize(&edges).expect("valid edge list"), true).expect("valid edge list")
}

pub fn runtime(localities: usize, latency: Duration) -> Runtime {
    start_runtime(RuntimeConfig {
        localities,
        injected_latency: latency,
        ..RuntimeConfig::default()
    })
    .expect("valid runtime configuration")
}

pub const LOCALITIES: [usize; 3] = [1, 2, 4];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_start() {
        let g = urand(6, 4, 1);
        assert_eq!(g.num_vertices(), 64);
        let rt = runtime(2, Duration::ZERO);
        assert_eq!(rt.num_localities(), 2);
        rt.stop().unwrap();
    }
}
