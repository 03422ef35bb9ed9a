use asyncgraph::graph::{
    build_csr, generate_kronecker, generate_urand, load_edge_list, out_degree, save_edge_list,
    symmetrize, to_upper_dag, transpose, Adjacency, CsrGraph, EdgeList, KroneckerProbs,
};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn edge_list() -> impl Strategy<Value = EdgeList> {
    (1usize..60).prop_flat_map(|n| {
        prop::collection::vec((0..n as u32, 0..n as u32), 0..200)
            .prop_map(move |edges| EdgeList::new(n, edges).unwrap())
    })
}

fn check_invariants(g: &CsrGraph) {
    let off = g.offsets();
    assert_eq!(off.len(), g.num_vertices() + 1);
    assert_eq!(off[0], 0);
    assert_eq!(off[g.num_vertices()], g.num_edges());
    assert!(off.windows(2).all(|w| w[0] <= w[1]));
    assert!(g.targets().iter().all(|&v| (v as usize) < g.num_vertices()));
    if g.is_sorted() {
        for (u, nbrs) in g.iter() {
            assert!(nbrs.windows(2).all(|w| w[0] < w[1]));
            assert!(!nbrs.contains(&u));
        }
    }
}

proptest! {
    #[test]
    fn csr_invariants_hold(e in edge_list(), sorted in any::<bool>()) {
        let g = build_csr(&e, sorted).unwrap();
        check_invariants(&g);
        if !sorted {
            prop_assert_eq!(g.num_edges(), e.len());
        }
        let total: usize = (0..g.num_vertices() as u32).map(|u| out_degree(&g, u).unwrap()).sum();
        prop_assert_eq!(total, g.num_edges());
        prop_assert!(out_degree(&g, g.num_vertices() as u32).is_err());
    }

    #[test]
    fn symmetrize_is_idempotent(e in edge_list()) {
        let once = symmetrize(&e).unwrap();
        prop_assert_eq!(&symmetrize(&once).unwrap(), &once);
        for &(u, v) in &once.edges {
            prop_assert!(u != v);
            prop_assert!(once.edges.binary_search(&(v, u)).is_ok());
        }
    }

    #[test]
    fn transpose_is_an_involution(e in edge_list(), sorted in any::<bool>()) {
        let g = build_csr(&e, sorted).unwrap();
        let t = transpose(&g);
        check_invariants(&t);
        prop_assert_eq!(t.num_edges(), g.num_edges());
        let back = transpose(&t);
        if sorted {
            prop_assert_eq!(&back, &g);
        } else {
            for u in 0..g.num_vertices() as u32 {
                let mut a = g.neighbors(u).to_vec();
                let mut b = back.neighbors(u).to_vec();
                a.sort_unstable();
                b.sort_unstable();
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn upper_dag_halves_symmetric_graphs(e in edge_list()) {
        let g = build_csr(&symmetrize(&e).unwrap(), true).unwrap();
        prop_assert_eq!(transpose(&g), g.clone());
        let dag = to_upper_dag(&g).unwrap();
        check_invariants(&dag);
        prop_assert_eq!(dag.num_edges() * 2, g.num_edges());
        for (u, nbrs) in dag.iter() {
            prop_assert!(nbrs.iter().all(|&v| v > u));
        }
    }

    #[test]
    fn files_round_trip(e in edge_list()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.el");
        save_edge_list(&e, &path).unwrap();
        prop_assert_eq!(load_edge_list(&path).unwrap(), e);
    }

    #[test]
    fn generators_are_deterministic(scale in 1u32..8, degree in 1u64..8, seed in any::<u64>()) {
        prop_assert_eq!(generate_urand(scale, degree, seed).unwrap(), generate_urand(scale, degree, seed).unwrap());
        let k = |s| generate_kronecker(scale, degree, s, KroneckerProbs::GAP).unwrap();
        prop_assert_eq!(k(seed), k(seed));
        for g in [generate_urand(scale, degree, seed).unwrap(), k(seed)] {
            check_invariants(&build_csr(&g, true).unwrap());
        }
    }
}

#[test]
fn urand20_edge_arithmetic() {
    let e = generate_urand(20, 32, 1).unwrap();
    assert_eq!(e.num_vertices, 1 << 20);
    assert_eq!(e.len(), 1 << 24);
    assert_eq!(2 * e.len(), 1 << 25);
}

#[test]
fn symmetrized_urand_is_close_to_degree_times_n() {
    let g = build_csr(&symmetrize(&generate_urand(16, 16, 4).unwrap()).unwrap(), true).unwrap();
    let want = 16.0 * (1 << 16) as f64;
    let got = g.num_edges() as f64;
    assert!((got - want).abs() / want < 1e-3, "{got} vs {want}");
}

/// Source-vertex degree histograms.
fn degree_histogram(e: &EdgeList) -> Vec<u64> {
    let mut deg = vec![0usize; e.num_vertices];
    for &(u, _) in &e.edges {
        deg[u as usize] += 1;
    }
    let mut hist = vec![0u64; deg.iter().max().unwrap() + 1];
    for d in deg {
        hist[d] += 1;
    }
    hist
}

/// Two-sample chi-square homogeneity p-value, bins merged until each pooled
/// count reaches 10.
fn homogeneity_p(a: &[u64], b: &[u64]) -> f64 {
    let len = a.len().max(b.len());
    let at = |h: &[u64], i: usize| h.get(i).copied().unwrap_or(0) as f64;
    let mut bins = Vec::new();
    let (mut x, mut y) = (0.0, 0.0);
    for i in 0..len {
        x += at(a, i);
        y += at(b, i);
        if x + y >= 10.0 {
            bins.push((x, y));
            (x, y) = (0.0, 0.0);
        }
    }
    if let Some(last) = bins.last_mut() {
        last.0 += x;
        last.1 += y;
    }
    let (na, nb): (f64, f64) = (bins.iter().map(|b| b.0).sum(), bins.iter().map(|b| b.1).sum());
    let total = na + nb;
    let stat: f64 = bins
        .iter()
        .map(|&(x, y)| {
            let col = x + y;
            let (ea, eb) = (col * na / total, col * nb / total);
            (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
        })
        .sum();
    let dof = (bins.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

#[test]
fn uniform_kronecker_matches_urand_degrees() {
    let scale = 14;
    let kron = generate_kronecker(scale, 8, 21, KroneckerProbs::UNIFORM).unwrap();
    // urand emits degree·N/2 pairs, so degree 16 gives the same 8·N sources.
    let urand = generate_urand(scale, 16, 22).unwrap();
    assert_eq!(kron.len(), urand.len());
    let p = homogeneity_p(&degree_histogram(&kron), &degree_histogram(&urand));
    assert!(p > 0.001, "p = {p}");

    let skewed = generate_kronecker(scale, 8, 21, KroneckerProbs::GAP).unwrap();
    let p = homogeneity_p(&degree_histogram(&skewed), &degree_histogram(&urand));
    assert!(p < 1e-6, "GAP probabilities should be distinguishable, p = {p}");
}

#[test]
fn gap_kronecker_is_heavy_tailed() {
    let e = generate_kronecker(16, 16, 5, KroneckerProbs::GAP).unwrap();
    let g = build_csr(&symmetrize(&e).unwrap(), true).unwrap();
    let mean = g.num_edges() as f64 / g.num_vertices() as f64;
    let max = (0..g.num_vertices() as u32).map(|u| g.degree(u)).max().unwrap() as f64;
    assert!(max > 10.0 * mean, "max {max}, mean {mean}");
}
