//! Checks of distributed results against oracles and structural rules.

use std::fmt;

use crate::graph::{Adjacency, CsrGraph, VertexId};

use super::seq::{NO_PARENT, UNREACHED};

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    fn from_check(r: Result<(), String>) -> Self {
        match r {
            Ok(()) => Verdict::Pass,
            Err(m) => Verdict::Fail(m),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("PASS"),
            Verdict::Fail(m) => write!(f, "FAIL: {m}"),
        }
    }
}

/// Index of the first differing element, or of the shorter length.
pub fn first_mismatch<T: PartialEq>(a: &[T], b: &[T]) -> Option<usize> {
    a.iter()
        .zip(b)
        .position(|(x, y)| x != y)
        .or((a.len() != b.len()).then(|| a.len().min(b.len())))
}

/// Largest `|a[i] - b[i]|` and where it occurs.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> (f64, usize) {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .enumerate()
        .fold((0.0, 0), |best, (i, d)| if d > best.0 || d.is_nan() { (d, i) } else { best })
}

pub fn compare_counts(expected: u64, got: u64) -> Verdict {
    if expected == got {
        Verdict::Pass
    } else {
        Verdict::Fail(format!("triangle count {got}, oracle {expected}"))
    }
}

pub fn compare_distances(expected: &[u32], got: &[u32]) -> Verdict {
    match first_mismatch(expected, got) {
        None => Verdict::Pass,
        Some(i) if i < expected.len() && i < got.len() => Verdict::Fail(format!(
            "distance of vertex {i} is {}, oracle {}",
            show(got[i]),
            show(expected[i])
        )),
        Some(_) => Verdict::Fail(format!(
            "{} distances, oracle has {}",
            got.len(),
            expected.len()
        )),
    }
}

fn show(d: u32) -> String {
    if d == UNREACHED {
        "unreached".into()
    } else {
        d.to_string()
    }
}

pub fn compare_ranks(expected: &[f64], got: &[f64], tolerance: f64) -> Verdict {
    if expected.len() != got.len() {
        return Verdict::Fail(format!("{} ranks, oracle has {}", got.len(), expected.len()));
    }
    let (diff, i) = max_abs_diff(expected, got);
    if diff <= tolerance {
        Verdict::Pass
    } else {
        Verdict::Fail(format!(
            "rank of vertex {i} is {}, oracle {} (|diff| {diff:e} > {tolerance:e})",
            got[i], expected[i]
        ))
    }
}

/// Checks that `parents` is a BFS tree of `g` rooted at `source` consistent
/// with `distances`, without consulting an oracle.
pub fn validate_bfs_tree(g: &CsrGraph, source: VertexId, distances: &[u32], parents: &[VertexId]) -> Verdict {
    Verdict::from_check(check_tree(g, source, distances, parents))
}

fn check_tree(g: &CsrGraph, source: VertexId, distances: &[u32], parents: &[VertexId]) -> Result<(), String> {
    let n = g.num_vertices();
    if distances.len() != n || parents.len() != n {
        return Err(format!(
            "{} distances and {} parents for {n} vertices",
            distances.len(),
            parents.len()
        ));
    }
    let s = source as usize;
    if distances[s] != 0 || parents[s] != source {
        return Err(format!("source {source} has distance {} and parent {}", distances[s], parents[s]));
    }
    for v in 0..n {
        let (d, p) = (distances[v], parents[v]);
        if (d == UNREACHED) != (p == NO_PARENT) {
            return Err(format!("vertex {v}: distance {} but parent {p}", show(d)));
        }
        if d == UNREACHED || v == s {
            continue;
        }
        if p as usize >= n {
            return Err(format!("vertex {v}: parent {p} out of range"));
        }
        if !g.has_edge(p, v as VertexId) {
            return Err(format!("vertex {v}: parent {p} is not a neighbor"));
        }
        if distances[p as usize].checked_add(1) != Some(d) {
            return Err(format!(
                "vertex {v}: distance {d} but parent {p} has distance {}",
                show(distances[p as usize])
            ));
        }
    }
    // Every edge out of a reached vertex must reach a vertex at most one
    // level deeper.
    for u in 0..n as VertexId {
        let du = distances[u as usize];
        if du == UNREACHED {
            continue;
        }
        for &v in g.neighbors(u) {
            if distances[v as usize] == UNREACHED || distances[v as usize] > du + 1 {
                return Err(format!(
                    "edge ({u}, {v}): distance {} after {du}",
                    show(distances[v as usize])
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::seq::bfs_seq;
    use crate::graph::{build_csr, symmetrize, EdgeList};

    #[test]
    fn mismatch_positions() {
        assert_eq!(first_mismatch(&[1, 2, 3], &[1, 2, 3]), None);
        assert_eq!(first_mismatch(&[1, 2, 3], &[1, 5, 3]), Some(1));
        assert_eq!(first_mismatch(&[1, 2], &[1, 2, 3]), Some(2));
        assert_eq!(max_abs_diff(&[0.0, 1.0], &[0.0, 1.5]), (0.5, 1));
    }

    #[test]
    fn tree_validator_accepts_oracle_and_rejects_corruption() {
        let e = symmetrize(&EdgeList::new(5, vec![(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap()).unwrap();
        let g = build_csr(&e, true).unwrap();
        let r = bfs_seq(&g, 0).unwrap();
        assert!(validate_bfs_tree(&g, 0, &r.distances, &r.parents).is_pass());
        let mut bad = r.parents.clone();
        bad[2] = 0;
        assert!(!validate_bfs_tree(&g, 0, &r.distances, &bad).is_pass());
        let mut d = r.distances.clone();
        d[3] = 2;
        let v = compare_distances(&r.distances, &d);
        assert!(matches!(&v, Verdict::Fail(m) if m.contains("vertex 3")), "{v}");
    }
}
