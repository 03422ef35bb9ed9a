use asyncgraph::algorithms::verify::{compare_distances, compare_ranks, validate_bfs_tree};
use asyncgraph::algorithms::{
    bfs_seq, breadth_first, count_triangles, expect_root, page_rank, pagerank_seq, start_runtime,
    tc_dist, tc_seq, BfsOptions, DanglingMode, PageRankParams, TcOptions,
};
use asyncgraph::graph::{build_csr, Adjacency, generate_urand, symmetrize, to_upper_dag, CsrGraph, EdgeList};
use asyncgraph::partition::{DistCsr, PartitionMap};
use asyncgraph::runtime::RuntimeConfig;
use asyncgraph::Runtime;

fn runtime(l: usize) -> Runtime {
    start_runtime(RuntimeConfig::default().with_localities(l).with_workers(2, 1)).unwrap()
}

fn undirected(n: usize, edges: &[(u32, u32)]) -> CsrGraph {
    build_csr(&symmetrize(&EdgeList::new(n, edges.to_vec()).unwrap()).unwrap(), true).unwrap()
}

fn urand(scale: u32, degree: u64, seed: u64) -> CsrGraph {
    build_csr(&symmetrize(&generate_urand(scale, degree, seed).unwrap()).unwrap(), true).unwrap()
}

#[test]
fn triangle_across_three_localities() {
    let rt = runtime(3);
    let g = undirected(3, &[(0, 1), (1, 2), (2, 0)]);
    assert_eq!(count_triangles(&rt, &g, 1, TcOptions::default()).unwrap(), 1);
    rt.stop().unwrap();
}

#[test]
fn path_distances_across_three_localities() {
    let rt = runtime(3);
    let g = undirected(3, &[(0, 1), (1, 2)]);
    let (r, _) = breadth_first(&rt, &g, 1, 0, BfsOptions::default()).unwrap();
    let r = expect_root(r).unwrap();
    assert_eq!(r.distances, vec![0, 1, 2]);
    assert_eq!(r.parents, vec![0, 0, 1]);
    rt.stop().unwrap();
}

#[test]
fn two_cycle_is_uniform() {
    let rt = runtime(3);
    let g = build_csr(&EdgeList::new(2, vec![(0, 1), (1, 0)]).unwrap(), true).unwrap();
    let run = page_rank(&rt, &g, 1, &PageRankParams::for_graph(2)).unwrap();
    let ranks = run.ranks.unwrap();
    assert!(ranks.iter().all(|r| (r - 0.5).abs() < 1e-10), "{ranks:?}");
    rt.stop().unwrap();
}

#[test]
fn tc_matches_sequential_over_grid() {
    for l in [1, 2, 4] {
        let rt = runtime(l);
        for seed in 1..=2 {
            let g = urand(8, 8, seed);
            let want = tc_seq(&to_upper_dag(&g).unwrap()).unwrap();
            for p in [1, 4] {
                for parallel_inner in [false, true] {
                    let got = count_triangles(&rt, &g, p, TcOptions { parallel_inner }).unwrap();
                    assert_eq!(got, want, "L={l} P={p} seed={seed}");
                }
            }
        }
        rt.stop().unwrap();
    }
}

#[test]
fn tc_remote_operations_are_crossing_dag_edges() {
    let l = 4;
    let rt = runtime(l);
    let g = urand(8, 8, 3);
    let dag = to_upper_dag(&g).unwrap();
    let map = PartitionMap::new(g.num_vertices(), l as u32, 2).unwrap();
    let crossing = (0..dag.num_vertices() as u32)
        .flat_map(|u| dag.neighbors(u).iter().map(move |&v| (u, v)))
        .filter(|&(u, v)| map.owner(u) != map.owner(v))
        .count() as u64;
    let dist = DistCsr::distribute(&rt, &dag, map).unwrap();
    let before = rt.total_metrics();
    tc_dist(&rt, &dist).unwrap();
    let after = rt.total_metrics();
    assert_eq!(after.actions_invoked - before.actions_invoked, crossing);
    for m in rt.metrics() {
        assert!(m.collectives >= 1);
    }
    assert_eq!(after.collectives - before.collectives, l as u64);
    rt.stop().unwrap();
}

#[test]
fn bfs_matches_sequential_and_forms_a_tree() {
    for l in [1, 2, 4] {
        let rt = runtime(l);
        let g = urand(9, 8, 7);
        let want = bfs_seq(&g, 3).unwrap();
        for p in [1, 4] {
            for batch_remote in [true, false] {
                let (r, stats) = breadth_first(&rt, &g, p, 3, BfsOptions { batch_remote }).unwrap();
                let r = r.unwrap();
                let ctx = format!("L={l} P={p} batch={batch_remote}");
                let d = compare_distances(&want.distances, &r.distances);
                assert!(d.is_pass(), "{ctx}: {d}");
                let tree = validate_bfs_tree(&g, 3, &r.distances, &r.parents);
                assert!(tree.is_pass(), "{ctx}: {tree}");
                let reached: u64 = stats.iter().filter_map(|s| s.frontier).sum();
                assert_eq!(reached + 1, want.reached() as u64, "{ctx}");
            }
        }
        rt.stop().unwrap();
    }
}

#[test]
fn bfs_rejects_bad_source() {
    let rt = runtime(2);
    let g = undirected(4, &[(0, 1)]);
    assert!(breadth_first(&rt, &g, 1, 4, BfsOptions::default()).is_err());
    let (r, _) = breadth_first(&rt, &g, 1, 2, BfsOptions::default()).unwrap();
    assert_eq!(r.unwrap().reached(), 1);
    rt.stop().unwrap();
}

#[test]
fn tc_rejects_unsorted_graph() {
    let rt = runtime(2);
    let g = build_csr(&EdgeList::new(3, vec![(0, 2), (0, 1)]).unwrap(), false).unwrap();
    let dist = DistCsr::distribute(&rt, &g, PartitionMap::new(3, 2, 1).unwrap()).unwrap();
    assert!(tc_dist(&rt, &dist).is_err());
    rt.stop().unwrap();
}

#[test]
fn pagerank_matches_sequential_in_both_modes() {
    // Directed graph so that some vertices dangle.
    let e = generate_urand(8, 4, 5).unwrap();
    let g = build_csr(&e, true).unwrap();
    for l in [1, 3] {
        let rt = runtime(l);
        for dangling in [DanglingMode::Redistribute, DanglingMode::Skip] {
            let params = PageRankParams {
                dangling,
                ..PageRankParams::for_graph(g.num_vertices())
            };
            let want = pagerank_seq(&g, &params).unwrap();
            let run = page_rank(&rt, &g, 2, &params).unwrap();
            let v = compare_ranks(&want.ranks, run.ranks.as_ref().unwrap(), 1e-9);
            assert!(v.is_pass(), "L={l} {dangling:?}: {v}");
            assert_eq!(run.iterations, want.iterations);
            if dangling == DanglingMode::Redistribute {
                for s in &run.stats {
                    assert!((s.rank_sum.unwrap() - 1.0).abs() < 1e-8, "{s:?}");
                }
            }
        }
        rt.stop().unwrap();
    }
}

#[test]
fn results_do_not_depend_on_placement() {
    let g = urand(9, 16, 11);
    let mut bfs = Vec::new();
    let mut tc = Vec::new();
    for (l, p) in [(1, 1), (2, 3), (4, 4)] {
        let rt = runtime(l);
        bfs.push(breadth_first(&rt, &g, p, 0, BfsOptions::default()).unwrap().0.unwrap().distances);
        tc.push(count_triangles(&rt, &g, p, TcOptions::default()).unwrap());
        rt.stop().unwrap();
    }
    assert!(bfs.windows(2).all(|w| w[0] == w[1]));
    assert!(tc.windows(2).all(|w| w[0] == w[1]));
}
