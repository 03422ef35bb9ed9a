use std::io::Write;

use anyhow::{ensure, Result};
use asyncgraph::algorithms::UNREACHED;
use asyncgraph::graph::{generate_kronecker, generate_urand, CsrGraph, KroneckerProbs};

use crate::args::{GenerateArgs, GenerateModel, RunArgs, SweepArgs};
use crate::exec::{self, Config, Oracle};
use crate::report::{self, Row};

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let edges = match &args.model {
        GenerateModel::Urand { scale, degree, seed } => generate_urand(*scale, *degree, *seed)?,
        GenerateModel::Kron {
            scale,
            factor,
            seed,
            probs,
        } => {
            ensure!(probs.len() == 4, "--probs takes four values a,b,c,d, got {}", probs.len());
            let probs = KroneckerProbs::new(probs[0], probs[1], probs[2], probs[3]);
            generate_kronecker(*scale, *factor, *seed, probs)?
        }
    };
    exec::write_edges(&edges, args.out.as_deref())?;
    if args.out.is_some() {
        println!("N={} M={}", edges.num_vertices, edges.len());
    }
    Ok(())
}

/// Exit status: 0 on success (and PASS when verifying), 1 on FAIL.
pub fn run(args: &RunArgs) -> Result<i32> {
    let loaded = exec::load_graph(&args.source)?;
    let g = exec::csr_for(args.algorithm, &loaded)?;
    let config = Config {
        localities: args.localities,
        parts: args.parts.unwrap_or(4 * args.knobs.workers),
        latency_us: args.latency_us,
    };
    let rt = exec::start(&args.knobs, &config)?;
    let hosts_root = rt.locality(0).is_ok();
    let mut ex = exec::execute(&rt, args.algorithm, &g, config.parts, &args.params, args.reps)?;
    rt.stop()?;
    if let Some(v) = args.corrupt_vertex {
        ex.outcome.corrupt(v);
    }
    let mut row = exec::row(args.algorithm, &loaded.label, &args.knobs, &config, args.reps);
    exec::fill(&mut row, &ex);
    let verdict = if args.verify {
        let oracle = exec::oracle(args.algorithm, &g, &args.params, usize::MAX)?;
        exec::check(&oracle, &g, args.params.source, &ex.outcome)
    } else {
        None
    };
    if let Some(v) = &verdict {
        row.verdict = if v.is_pass() { "PASS" } else { "FAIL" }.into();
    }
    if !hosts_root {
        return Ok(0);
    }

    let mut out = std::io::stdout().lock();
    writeln!(out, "{} on {} ({} vertices, {} edges)", row.algorithm, row.graph, g.num_vertices(), g.num_edges())?;
    writeln!(
        out,
        "L={} W={} R={} P={} K={} delay={}us latency={}us transport={}",
        row.localities, row.workers, row.reserved, row.parts, row.coalesce, row.delay_us, row.latency_us, row.transport
    )?;
    writeln!(out, "result: {}", ex.outcome.describe())?;
    let times: Vec<String> = ex.times.iter().map(|t| format!("{:.3}", t.as_secs_f64() * 1e3)).collect();
    writeln!(
        out,
        "time: median {:.3} ms, min {:.3} ms, reps [{}] ms",
        row.median_ms.unwrap_or_default(),
        row.min_ms.unwrap_or_default(),
        times.join(", ")
    )?;
    writeln!(
        out,
        "last rep: {} parcels, {} wire messages, {} bytes",
        ex.last_rep.parcels, ex.last_rep.wire_messages, ex.last_rep.bytes
    )?;
    writeln!(out, "locality  storage_bytes  tasks  steals  parcels_sent  wire_sent  bytes_sent  served")?;
    for (m, s) in ex.totals.iter().zip(&ex.storage) {
        writeln!(
            out,
            "{:>8}  {:>13}  {:>5}  {:>6}  {:>12}  {:>9}  {:>10}  {:>6}",
            m.locality, s, m.tasks_executed, m.steals, m.parcels_sent, m.wire_messages_sent, m.bytes_sent, m.remote_actions_served
        )?;
    }
    if let Some(v) = &verdict {
        writeln!(out, "verify: {v}")?;
    }
    report::save(&[row], args.output.csv.as_deref(), args.output.json.as_deref())?;
    Ok(match verdict {
        Some(v) if !v.is_pass() => 1,
        _ => 0,
    })
}

fn configs(args: &SweepArgs) -> Result<Vec<Config>> {
    ensure!(!args.localities.is_empty(), "no locality counts given");
    let parts = if args.parts.is_empty() {
        vec![4 * args.knobs.workers]
    } else {
        args.parts.clone()
    };
    let mut out = Vec::new();
    for &localities in &args.localities {
        for &parts in &parts {
            for &latency_us in &args.latency_us {
                out.push(Config {
                    localities,
                    parts,
                    latency_us,
                });
            }
        }
    }
    Ok(out)
}

/// Runs every configuration; failed ones become `error` rows. With an
/// oracle, each row also gets a verdict. Returns the rows and whether all
/// configurations succeeded (and passed).
fn sweep(
    args: &SweepArgs,
    label: &str,
    g: &CsrGraph,
    oracle: Option<&Oracle>,
    log: &mut dyn Write,
) -> Result<(Vec<Row>, bool)> {
    let mut rows = Vec::new();
    let mut all_ok = true;
    for c in configs(args)? {
        let mut row = exec::row(args.algorithm, label, &args.knobs, &c, args.reps);
        let tag = format!("L={} P={} latency={}us", c.localities, c.parts, c.latency_us);
        let result = exec::start(&args.knobs, &c).and_then(|rt| {
            let ex = exec::execute(&rt, args.algorithm, g, c.parts, &args.params, args.reps);
            let stopped = rt.stop();
            let ex = ex?;
            stopped?;
            Ok(ex)
        });
        match result {
            Ok(mut ex) => {
                if let Some(v) = args.corrupt_vertex {
                    ex.outcome.corrupt(v);
                }
                exec::fill(&mut row, &ex);
                if let Some(o) = oracle {
                    if let Some(v) = exec::check(o, g, args.params.source, &ex.outcome) {
                        all_ok &= v.is_pass();
                        row.verdict = if v.is_pass() { "PASS" } else { "FAIL" }.into();
                        writeln!(log, "{tag}: {v}")?;
                    }
                }
            }
            Err(e) => {
                all_ok = false;
                eprintln!("{tag}: {e:#}");
                writeln!(log, "{tag}: ERROR {e:#}")?;
            }
        }
        rows.push(row);
    }
    Ok((rows, all_ok))
}

pub fn verify(args: &SweepArgs) -> Result<i32> {
    let loaded = exec::load_graph(&args.source)?;
    let g = exec::csr_for(args.algorithm, &loaded)?;
    let oracle = exec::oracle(args.algorithm, &g, &args.params, args.oracle_max_vertices)?;
    let mut out = std::io::stdout().lock();
    match &oracle {
        Oracle::Triangles { count, method } => writeln!(out, "oracle ({method}): {count} triangles")?,
        Oracle::Ranks(_) => writeln!(out, "oracle: sequential power iteration")?,
        Oracle::Bfs(d) => writeln!(
            out,
            "oracle: sequential BFS, {} vertices reached",
            d.iter().filter(|&&x| x != UNREACHED).count()
        )?,
    }
    let (rows, ok) = sweep(args, &loaded.label, &g, Some(&oracle), &mut out)?;
    writeln!(out, "{}", if ok { "PASS" } else { "FAIL" })?;
    report::save(&rows, args.output.csv.as_deref(), args.output.json.as_deref())?;
    Ok(if ok { 0 } else { 1 })
}

pub fn bench(args: &SweepArgs) -> Result<i32> {
    let loaded = exec::load_graph(&args.source)?;
    let g = exec::csr_for(args.algorithm, &loaded)?;
    let (rows, ok) = sweep(args, &loaded.label, &g, None, &mut std::io::sink())?;
    if args.output.csv.is_none() {
        report::write_csv(&rows, std::io::stdout().lock())?;
    }
    report::save(&rows, args.output.csv.as_deref(), args.output.json.as_deref())?;
    Ok(if ok { 0 } else { 1 })
}
