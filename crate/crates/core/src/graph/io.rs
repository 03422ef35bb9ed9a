//! Plain-text edge lists: a header line `N M`, then `M` lines of `src dst`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{EdgeList, GraphError, Result, VertexId};

fn parse_err(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_fields<const K: usize>(line_no: usize, line: &str) -> Result<[u64; K]> {
    let mut out = [0u64; K];
    let mut fields = line.split_whitespace();
    for slot in out.iter_mut() {
        let tok = fields
            .next()
            .ok_or_else(|| parse_err(line_no, format!("expected {K} fields")))?;
        *slot = tok
            .parse()
            .map_err(|_| parse_err(line_no, format!("invalid integer {tok:?}")))?;
    }
    if let Some(extra) = fields.next() {
        return Err(parse_err(line_no, format!("unexpected token {extra:?}")));
    }
    Ok(out)
}

pub fn read_edge_list<R: Read>(reader: R) -> Result<EdgeList> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| parse_err(1, "missing header"))?;
    let [n, m] = parse_fields::<2>(1, &header)?;
    if n > VertexId::MAX as u64 {
        return Err(GraphError::TooManyVertices(n as usize));
    }
    let n = n as usize;

    let mut edges = Vec::with_capacity(m.min(1 << 26) as usize);
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let [src, dst] = parse_fields::<2>(line_no, &line)?;
        if src as usize >= n || dst as usize >= n {
            return Err(parse_err(
                line_no,
                format!("endpoint out of range for {n} vertices"),
            ));
        }
        edges.push((src as VertexId, dst as VertexId));
    }
    if edges.len() as u64 != m {
        return Err(parse_err(
            1,
            format!("header declares {m} edges, found {}", edges.len()),
        ));
    }
    Ok(EdgeList {
        num_vertices: n,
        edges,
    })
}

pub fn write_edge_list<W: Write>(edges: &EdgeList, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "{} {}", edges.num_vertices, edges.edges.len())?;
    for (u, v) in &edges.edges {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<EdgeList> {
    read_edge_list(File::open(path)?)
}

pub fn save_edge_list(edges: &EdgeList, path: impl AsRef<Path>) -> Result<()> {
    write_edge_list(edges, File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_small_file() {
        let e = read_edge_list("3 2\n0 1\n1 2\n".as_bytes()).unwrap();
        assert_eq!(e.num_vertices, 3);
        assert_eq!(e.edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn header_only() {
        let e = read_edge_list("4 0\n".as_bytes()).unwrap();
        assert_eq!(e.num_vertices, 4);
        assert!(e.edges.is_empty());
    }

    #[test]
    fn reports_line_of_bad_token() {
        match read_edge_list("3 1\n0 x\n".as_bytes()) {
            Err(GraphError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_and_count_mismatch() {
        assert!(matches!(
            read_edge_list("2 1\n0 2\n".as_bytes()),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(read_edge_list("3 2\n0 1\n".as_bytes()).is_err());
        assert!(read_edge_list("".as_bytes()).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.el");
        let e = EdgeList::new(5, vec![(0, 4), (3, 3), (2, 1), (0, 4)]).unwrap();
        save_edge_list(&e, &path).unwrap();
        assert_eq!(load_edge_list(&path).unwrap(), e);
    }
}
