use std::hint::black_box;
use std::time::Duration;

use asyncgraph::algorithms::{breadth_first, count_triangles, page_rank, BfsOptions, PageRankParams, TcOptions};
use asyncgraph_bench::{runtime, urand, LOCALITIES};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const SCALE: u32 = 12;
const DEGREE: u64 = 16;
const PARTS: usize = 16;

fn triangles(c: &mut Criterion) {
    let g = urand(SCALE, DEGREE, 1);
    let mut group = c.benchmark_group("tc");
    for l in LOCALITIES {
        let rt = runtime(l, Duration::ZERO);
        group.bench_with_input(BenchmarkId::from_parameter(l), &g, |b, g| {
            b.iter(|| count_triangles(&rt, black_box(g), PARTS, TcOptions::default()).unwrap())
        });
        rt.stop().unwrap();
    }
    group.finish();
}

fn bfs(c: &mut Criterion) {
    let g = urand(SCALE, DEGREE, 1);
    let mut group = c.benchmark_group("bfs");
    for l in LOCALITIES {
        let rt = runtime(l, Duration::ZERO);
        group.bench_with_input(BenchmarkId::from_parameter(l), &g, |b, g| {
            b.iter(|| breadth_first(&rt, black_box(g), PARTS, 0, BfsOptions::default()).unwrap())
        });
        rt.stop().unwrap();
    }
    group.finish();
}

fn pagerank(c: &mut Criterion) {
    let g = urand(10, DEGREE, 1);
    let params = PageRankParams {
        max_iters: 10,
        tolerance: f64::MIN_POSITIVE,
        ..PageRankParams::for_graph(g.num_vertices())
    };
    let mut group = c.benchmark_group("pagerank_10_iters");
    group.sample_size(10);
    for l in LOCALITIES {
        let rt = runtime(l, Duration::ZERO);
        group.bench_with_input(BenchmarkId::from_parameter(l), &g, |b, g| {
            b.iter(|| page_rank(&rt, black_box(g), PARTS, &params).unwrap())
        });
        rt.stop().unwrap();
    }
    group.finish();
}

fn latency_hiding(c: &mut Criterion) {
    let g = urand(10, DEGREE, 1);
    let mut group = c.benchmark_group("tc_latency_l4");
    group.sample_size(10);
    for us in [0u64, 1000] {
        let rt = runtime(4, Duration::from_micros(us));
        group.bench_with_input(BenchmarkId::from_parameter(format!("{us}us")), &g, |b, g| {
            b.iter(|| count_triangles(&rt, black_box(g), PARTS, TcOptions::default()).unwrap())
        });
        rt.stop().unwrap();
    }
    group.finish();
}

criterion_group!(benches, triangles, bfs, pagerank, latency_hiding);
criterion_main!(benches);
