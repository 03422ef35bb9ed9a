use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "asyncgraph", version, about = "Distributed graph algorithms on an asynchronous many-task runtime")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic graph as an edge-list file.
    Generate(GenerateArgs),
    /// Run one algorithm on one configuration and print a report.
    Run(RunArgs),
    /// Compare distributed results with the sequential oracles over a grid
    /// of configurations.
    Verify(SweepArgs),
    /// Time a sweep of configurations and emit one table row per
    /// configuration.
    Bench(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub model: GenerateModel,
    /// Output path.
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenerateModel {
    /// Uniform random pairs.
    Urand {
        #[arg(long)]
        scale: u32,
        #[arg(long, default_value_t = 16)]
        degree: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Recursive quadrant sampling.
    Kron {
        #[arg(long)]
        scale: u32,
        #[arg(long, default_value_t = 16)]
        factor: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Quadrant probabilities a,b,c,d.
        #[arg(long, value_delimiter = ',', default_values_t = [0.57, 0.19, 0.19, 0.05])]
        probs: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Bfs,
    Pagerank,
    Tc,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bfs => "bfs",
            Algorithm::Pagerank => "pagerank",
            Algorithm::Tc => "tc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Transport {
    Inproc,
    Socket,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dangling {
    Redistribute,
    Skip,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct GraphSource {
    /// Edge-list file ("N M" header, then "src dst" lines).
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Uniform random graph: SCALE DEGREE SEED.
    #[arg(long, num_args = 3, value_names = ["SCALE", "DEGREE", "SEED"])]
    pub urand: Option<Vec<u64>>,
    /// Kronecker graph with the default probabilities: SCALE FACTOR SEED.
    #[arg(long, num_args = 3, value_names = ["SCALE", "FACTOR", "SEED"])]
    pub kron: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Args)]
pub struct AlgorithmParams {
    /// BFS source vertex.
    #[arg(long, default_value_t = 0)]
    pub source: u32,
    #[arg(long, default_value_t = 0.85)]
    pub damping: f64,
    /// PageRank stops once the global L1 change drops below this; the
    /// default is 1e-7 times the vertex count.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value_t = Dangling::Redistribute)]
    pub dangling: Dangling,
    /// BFS: one claim message per remote edge instead of per destination.
    #[arg(long)]
    pub unbatched: bool,
    /// TC: split each partition's vertex loop across the workers.
    #[arg(long)]
    pub parallel_inner: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RuntimeKnobs {
    /// Workers per locality.
    #[arg(short = 'W', long, default_value_t = 4)]
    pub workers: usize,
    /// Workers per locality reserved for incoming remote actions.
    #[arg(short = 'R', long, default_value_t = 1)]
    pub reserved: usize,
    /// Parcels per destination before a batch is sent.
    #[arg(short = 'K', long, default_value_t = 16)]
    pub coalesce: usize,
    /// Longest a buffered parcel waits before its batch is sent.
    #[arg(long, default_value_t = 200)]
    pub coalesce_delay_us: u64,
    #[arg(long, value_enum, default_value_t = Transport::Inproc)]
    pub transport: Transport,
    /// This process's locality when running one process per locality.
    #[arg(long, env = "ASYNCGRAPH_RANK", requires = "peers")]
    pub rank: Option<u32>,
    /// Listen address of every locality, in locality order.
    #[arg(long, env = "ASYNCGRAPH_PEERS", value_delimiter = ',')]
    pub peers: Vec<SocketAddr>,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Write the table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the table as JSON (same rows as the CSV).
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(value_enum)]
    pub algorithm: Algorithm,
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub params: AlgorithmParams,
    #[command(flatten)]
    pub knobs: RuntimeKnobs,
    /// Localities.
    #[arg(short = 'L', long, default_value_t = 1)]
    pub localities: usize,
    /// Partitions per locality; defaults to 4 per worker.
    #[arg(short = 'P', long)]
    pub parts: Option<usize>,
    /// Injected one-way delay of every inproc cross-locality delivery.
    #[arg(long, default_value_t = 0)]
    pub latency_us: u64,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// Compare the last repetition with the sequential oracle.
    #[arg(long)]
    pub verify: bool,
    /// Alter the gathered result at this vertex before verification.
    #[arg(long, hide = true)]
    pub corrupt_vertex: Option<u32>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub algorithm: Algorithm,
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub params: AlgorithmParams,
    #[command(flatten)]
    pub knobs: RuntimeKnobs,
    #[arg(short = 'L', long, value_delimiter = ',', default_values_t = [1, 2, 4])]
    pub localities: Vec<usize>,
    /// Partitions per locality; defaults to 4 per worker.
    #[arg(short = 'P', long, value_delimiter = ',')]
    pub parts: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0])]
    pub latency_us: Vec<u64>,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    /// Refuse oracle runs above this many vertices.
    #[arg(long, default_value_t = 1 << 22)]
    pub oracle_max_vertices: usize,
    #[arg(long, hide = true)]
    pub corrupt_vertex: Option<u32>,
    #[command(flatten)]
    pub output: Output,
}
