//! Building graphs and runtimes from arguments, timing repetitions and
//! checking results against the oracles.

use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{bail, ensure, Context, Result};
use asyncgraph::algorithms::seq::BRUTEFORCE_MAX_VERTICES;
use asyncgraph::algorithms::verify::{compare_counts, compare_distances, compare_ranks, validate_bfs_tree, Verdict};
use asyncgraph::algorithms::{
    bfs_dist, bfs_seq, pagerank_dist, pagerank_seq, start_runtime, tc_bruteforce, tc_dist_with, tc_seq,
    BfsOptions, DanglingMode, PageRankGraph, PageRankParams, TcOptions, UNREACHED,
};
use asyncgraph::graph::{
    build_csr, generate_kronecker, generate_urand, load_edge_list, symmetrize, to_upper_dag, CsrGraph,
    EdgeList, KroneckerProbs,
};
use asyncgraph::partition::{DistCsr, PartitionMap};
use asyncgraph::runtime::{Metrics, RuntimeConfig, SocketConfig, TransportKind};
use asyncgraph::Runtime;

use crate::args::{Algorithm, AlgorithmParams, Dangling, GraphSource, RuntimeKnobs, Transport};
use crate::report::Row;

/// PageRank agreement demanded of a verified run.
pub const RANK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub label: String,
    pub edges: EdgeList,
    /// Generated graphs are undirected; files are taken as directed except
    /// for triangle counting.
    pub undirected: bool,
}

pub fn load_graph(src: &GraphSource) -> Result<LoadedGraph> {
    if let Some(path) = &src.graph {
        let edges = load_edge_list(path).with_context(|| format!("loading {}", path.display()))?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        return Ok(LoadedGraph {
            label: format!("file:{name}"),
            edges,
            undirected: false,
        });
    }
    if let Some(v) = &src.urand {
        let scale = u32::try_from(v[0]).context("scale")?;
        return Ok(LoadedGraph {
            label: format!("urand:{}:{}:{}", v[0], v[1], v[2]),
            edges: generate_urand(scale, v[1], v[2])?,
            undirected: true,
        });
    }
    if let Some(v) = &src.kron {
        let scale = u32::try_from(v[0]).context("scale")?;
        return Ok(LoadedGraph {
            label: format!("kron:{}:{}:{}", v[0], v[1], v[2]),
            edges: generate_kronecker(scale, v[1], v[2], KroneckerProbs::GAP)?,
            undirected: true,
        });
    }
    bail!("no graph source given")
}

/// The CSR an algorithm consumes: symmetric for TC and undirected inputs.
pub fn csr_for(alg: Algorithm, g: &LoadedGraph) -> Result<CsrGraph> {
    let csr = if alg == Algorithm::Tc || g.undirected {
        build_csr(&symmetrize(&g.edges)?, true)?
    } else {
        build_csr(&g.edges, true)?
    };
    Ok(csr)
}

pub fn pagerank_params(p: &AlgorithmParams, n: usize) -> PageRankParams {
    let defaults = PageRankParams::for_graph(n);
    PageRankParams {
        damping: p.damping,
        tolerance: p.tolerance.unwrap_or(defaults.tolerance),
        max_iters: p.max_iters,
        dangling: match p.dangling {
            Dangling::Redistribute => DanglingMode::Redistribute,
            Dangling::Skip => DanglingMode::Skip,
        },
    }
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub localities: usize,
    pub parts: usize,
    pub latency_us: u64,
}

pub fn runtime_config(knobs: &RuntimeKnobs, c: &Config) -> Result<RuntimeConfig> {
    let transport = match (knobs.transport, knobs.rank) {
        (Transport::Inproc, None) => TransportKind::Inproc,
        (Transport::Inproc, Some(_)) => bail!("--rank needs --transport socket"),
        (Transport::Socket, None) => TransportKind::Socket(SocketConfig::loopback()),
        (Transport::Socket, Some(rank)) => {
            ensure!(
                knobs.peers.len() == c.localities,
                "{} peer addresses for {} localities",
                knobs.peers.len(),
                c.localities
            );
            TransportKind::Socket(SocketConfig::rank(rank, knobs.peers.clone()))
        }
    };
    let cfg = RuntimeConfig::default()
        .with_localities(c.localities)
        .with_workers(knobs.workers, knobs.reserved)
        .with_coalescing(knobs.coalesce, Duration::from_micros(knobs.coalesce_delay_us))
        .with_latency(Duration::from_micros(c.latency_us))
        .with_transport(transport);
    cfg.validate()?;
    Ok(cfg)
}

/// Final result of a run as seen by this process.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Triangles(u64),
    Ranks {
        /// Present where locality 0 is hosted.
        ranks: Option<Vec<f64>>,
        iterations: usize,
        converged: bool,
    },
    Bfs {
        distances: Option<Vec<u32>>,
        parents: Option<Vec<u32>>,
        reached: u64,
    },
}

impl Outcome {
    /// The number reported in the `result` column.
    pub fn summary(&self) -> u64 {
        match self {
            Outcome::Triangles(t) => *t,
            Outcome::Ranks { iterations, .. } => *iterations as u64,
            Outcome::Bfs { reached, .. } => *reached,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Outcome::Triangles(t) => format!("{t} triangles"),
            Outcome::Ranks {
                iterations, converged, ..
            } => format!(
                "{} after {iterations} iterations",
                if *converged { "converged" } else { "not converged" }
            ),
            Outcome::Bfs { reached, .. } => format!("{reached} vertices reached"),
        }
    }

    /// Test hook: damage the gathered result at `v`.
    pub fn corrupt(&mut self, v: u32) {
        match self {
            Outcome::Triangles(t) => *t += 1,
            Outcome::Ranks { ranks: Some(r), .. } => {
                if let Some(x) = r.get_mut(v as usize) {
                    *x += 1.0;
                }
            }
            Outcome::Bfs {
                distances: Some(d), ..
            } => {
                if let Some(x) = d.get_mut(v as usize) {
                    *x = if *x == UNREACHED { 0 } else { *x + 1 };
                }
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub times: Vec<Duration>,
    pub outcome: Outcome,
    /// Per hosted locality, while the graph was distributed.
    pub storage: Vec<u64>,
    /// Sent during the last repetition.
    pub last_rep: Traffic,
    /// Counters at the end, per hosted locality.
    pub totals: Vec<Metrics>,
}

impl Execution {
    pub fn median(&self) -> Duration {
        let mut t = self.times.clone();
        t.sort();
        t[t.len() / 2]
    }

    pub fn min(&self) -> Duration {
        self.times.iter().copied().min().unwrap_or_default()
    }
}

/// Messages sent by the hosted localities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Traffic {
    pub parcels: u64,
    pub wire_messages: u64,
    pub bytes: u64,
}

impl Traffic {
    fn of(metrics: &[Metrics]) -> Self {
        let sum = |f: fn(&Metrics) -> u64| metrics.iter().map(f).sum();
        Self {
            parcels: sum(|m| m.parcels_sent),
            wire_messages: sum(|m| m.wire_messages_sent),
            bytes: sum(|m| m.bytes_sent),
        }
    }

    fn since(self, before: Self) -> Self {
        Self {
            parcels: self.parcels - before.parcels,
            wire_messages: self.wire_messages - before.wire_messages,
            bytes: self.bytes - before.bytes,
        }
    }
}

/// Distributes `g` once, then times `reps` runs of the algorithm.
pub fn execute(
    rt: &Runtime,
    alg: Algorithm,
    g: &CsrGraph,
    parts: usize,
    params: &AlgorithmParams,
    reps: usize,
) -> Result<Execution> {
    ensure!(reps >= 1, "--reps must be at least 1");
    let map = PartitionMap::new(g.num_vertices(), rt.num_localities(), parts)?;
    let mut times = Vec::with_capacity(reps);
    let mut last_rep = Traffic::default();
    let mut timed = |f: &mut dyn FnMut() -> Result<Outcome>| -> Result<Outcome> {
        let mut outcome = None;
        for _ in 0..reps {
            let before = Traffic::of(&rt.metrics());
            let t = Instant::now();
            outcome = Some(f()?);
            times.push(t.elapsed());
            last_rep = Traffic::of(&rt.metrics()).since(before);
        }
        Ok(outcome.expect("at least one repetition"))
    };
    let storage = || rt.metrics().iter().map(|m| m.graph_storage_bytes).collect::<Vec<_>>();

    let (outcome, storage) = match alg {
        Algorithm::Tc => {
            let dist = DistCsr::distribute(rt, &to_upper_dag(g)?, map)?;
            let storage = storage();
            let opts = TcOptions {
                parallel_inner: params.parallel_inner,
            };
            let out = timed(&mut || Ok(Outcome::Triangles(tc_dist_with(rt, &dist, opts)?)));
            dist.release(rt);
            (out?, storage)
        }
        Algorithm::Bfs => {
            let dist = DistCsr::distribute(rt, g, map)?;
            let storage = storage();
            let opts = BfsOptions {
                batch_remote: !params.unbatched,
            };
            let out = timed(&mut || {
                let out = bfs_dist(rt, &dist, params.source, opts)?;
                let distances = out.distances.gather(rt);
                let parents = out.parents.gather(rt);
                out.distances.release(rt);
                out.parents.release(rt);
                let reached = 1 + out.stats.iter().filter_map(|s| s.frontier).sum::<u64>();
                Ok(Outcome::Bfs {
                    distances: distances?,
                    parents: parents?,
                    reached,
                })
            });
            dist.release(rt);
            (out?, storage)
        }
        Algorithm::Pagerank => {
            let graph = PageRankGraph::new(rt, g, map)?;
            let storage = storage();
            let pr = pagerank_params(params, g.num_vertices());
            let out = timed(&mut || {
                let out = pagerank_dist(rt, &graph, &pr)?;
                let ranks = out.ranks.gather(rt);
                out.ranks.release(rt);
                Ok(Outcome::Ranks {
                    ranks: ranks?,
                    iterations: out.iterations,
                    converged: out.converged,
                })
            });
            graph.release(rt);
            (out?, storage)
        }
    };
    Ok(Execution {
        times,
        outcome,
        storage,
        last_rep,
        totals: rt.metrics(),
    })
}

/// Sequential reference for one algorithm on one graph.
#[derive(Debug, Clone)]
pub enum Oracle {
    Triangles { count: u64, method: &'static str },
    Ranks(Vec<f64>),
    Bfs(Vec<u32>),
}

pub fn oracle(alg: Algorithm, g: &CsrGraph, params: &AlgorithmParams, max_vertices: usize) -> Result<Oracle> {
    let n = g.num_vertices();
    ensure!(
        n <= max_vertices,
        "the graph has {n} vertices but in-process oracles are limited to {max_vertices}; \
         use a smaller graph or raise --oracle-max-vertices"
    );
    Ok(match alg {
        Algorithm::Tc if n <= BRUTEFORCE_MAX_VERTICES => Oracle::Triangles {
            count: tc_bruteforce(&g.to_edge_list())?,
            method: "brute force",
        },
        Algorithm::Tc => Oracle::Triangles {
            count: tc_seq(&to_upper_dag(g)?)?,
            method: "sequential intersection",
        },
        Algorithm::Pagerank => Oracle::Ranks(pagerank_seq(g, &pagerank_params(params, n))?.ranks),
        Algorithm::Bfs => Oracle::Bfs(bfs_seq(g, params.source)?.distances),
    })
}

/// `None` where the gathered result lives in another process.
pub fn check(oracle: &Oracle, g: &CsrGraph, source: u32, outcome: &Outcome) -> Option<Verdict> {
    match (oracle, outcome) {
        (Oracle::Triangles { count, .. }, Outcome::Triangles(t)) => Some(compare_counts(*count, *t)),
        (Oracle::Ranks(want), Outcome::Ranks { ranks, .. }) => {
            Some(compare_ranks(want, ranks.as_ref()?, RANK_TOLERANCE))
        }
        (Oracle::Bfs(want), Outcome::Bfs { distances, parents, .. }) => {
            let (d, p) = (distances.as_ref()?, parents.as_ref()?);
            match compare_distances(want, d) {
                Verdict::Pass => Some(validate_bfs_tree(g, source, d, p)),
                fail => Some(fail),
            }
        }
        _ => Some(Verdict::Fail("result kind does not match the oracle".into())),
    }
}

pub fn start(knobs: &RuntimeKnobs, c: &Config) -> Result<Runtime> {
    Ok(start_runtime(runtime_config(knobs, c)?)?)
}

pub fn row(alg: Algorithm, graph: &str, knobs: &RuntimeKnobs, c: &Config, reps: usize) -> Row {
    Row {
        algorithm: alg.name().into(),
        graph: graph.into(),
        transport: match knobs.transport {
            Transport::Inproc => "inproc".into(),
            Transport::Socket => "socket".into(),
        },
        status: "error".into(),
        localities: c.localities,
        workers: knobs.workers,
        reserved: knobs.reserved,
        parts: c.parts,
        coalesce: knobs.coalesce,
        delay_us: knobs.coalesce_delay_us,
        latency_us: c.latency_us,
        reps,
        ..Row::default()
    }
}

pub fn fill(row: &mut Row, ex: &Execution) {
    row.status = "ok".into();
    row.result = Some(ex.outcome.summary());
    row.median_ms = Some(ex.median().as_secs_f64() * 1e3);
    row.min_ms = Some(ex.min().as_secs_f64() * 1e3);
    row.parcels = Some(ex.last_rep.parcels);
    row.wire_messages = Some(ex.last_rep.wire_messages);
    row.bytes = Some(ex.last_rep.bytes);
    row.storage_min = ex.storage.iter().copied().min();
    row.storage_max = ex.storage.iter().copied().max();
    row.storage_total = Some(ex.storage.iter().sum());
}

pub fn write_edges(edges: &EdgeList, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => asyncgraph::graph::save_edge_list(edges, p).with_context(|| format!("writing {}", p.display()))?,
        None => asyncgraph::graph::write_edge_list(edges, std::io::stdout().lock())?,
    }
    Ok(())
}
