use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// One configuration's outcome. Field order is the CSV column order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Row {
    pub algorithm: String,
    pub graph: String,
    pub transport: String,
    /// `ok` or `error`.
    pub status: String,
    /// `PASS`, `FAIL` or empty when not verified.
    pub verdict: String,
    pub localities: usize,
    pub workers: usize,
    pub reserved: usize,
    pub parts: usize,
    pub coalesce: usize,
    pub delay_us: u64,
    pub latency_us: u64,
    pub reps: usize,
    /// Triangle count, PageRank iterations or BFS reached vertices.
    pub result: Option<u64>,
    pub median_ms: Option<f64>,
    pub min_ms: Option<f64>,
    /// Summed over hosted localities, last repetition only.
    pub parcels: Option<u64>,
    pub wire_messages: Option<u64>,
    pub bytes: Option<u64>,
    /// Per-locality graph storage while distributed.
    pub storage_min: Option<u64>,
    pub storage_max: Option<u64>,
    pub storage_total: Option<u64>,
}

pub const CSV_HEADER: &str = "algorithm,graph,transport,status,verdict,localities,workers,reserved,parts,coalesce,delay_us,latency_us,reps,result,median_ms,min_ms,parcels,wire_messages,bytes,storage_min,storage_max,storage_total";

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[Row], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}

pub fn save(rows: &[Row], csv: Option<&Path>, json: Option<&Path>) -> Result<()> {
    if let Some(p) = csv {
        let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
        write_csv(rows, f)?;
    }
    if let Some(p) = json {
        let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
        write_json(rows, f)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_field_order() {
        let mut buf = Vec::new();
        csv::Writer::from_writer(&mut buf).serialize(Row::default()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn missing_values_are_empty_cells_and_nulls() {
        let row = Row {
            algorithm: "tc".into(),
            status: "error".into(),
            ..Row::default()
        };
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&row), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(",0,,,,,,,,,"), "{text}");
        let mut buf = Vec::new();
        write_json(&[row], &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert!(v[0]["median_ms"].is_null());
    }
}
