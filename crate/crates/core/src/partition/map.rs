use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::graph::{GraphError, VertexId};
use crate::runtime::LocalityId;
use crate::{Error, Result};

/// `L·P` contiguous vertex ranges whose sizes differ by at most one;
/// partitions `[k·P, (k+1)·P)` belong to locality `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionMap {
    num_vertices: usize,
    localities: u32,
    parts_per_locality: usize,
    base: usize,
    /// The first `extra` partitions hold `base + 1` vertices.
    extra: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub index: usize,
    pub locality: LocalityId,
    pub range: Range<VertexId>,
}

impl PartitionMap {
    pub fn new(num_vertices: usize, localities: u32, parts_per_locality: usize) -> Result<Self> {
        if localities == 0 || parts_per_locality == 0 {
            return Err(Error::InvalidInput(format!(
                "need at least one partition, got L={localities} P={parts_per_locality}"
            )));
        }
        if num_vertices > VertexId::MAX as usize {
            return Err(GraphError::TooManyVertices(num_vertices).into());
        }
        let total = localities as usize * parts_per_locality;
        Ok(Self {
            num_vertices,
            localities,
            parts_per_locality,
            base: num_vertices / total,
            extra: num_vertices % total,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_localities(&self) -> u32 {
        self.localities
    }

    pub fn parts_per_locality(&self) -> usize {
        self.parts_per_locality
    }

    pub fn num_partitions(&self) -> usize {
        self.localities as usize * self.parts_per_locality
    }

    fn start(&self, p: usize) -> usize {
        p * self.base + p.min(self.extra)
    }

    pub fn partition_range(&self, p: usize) -> Range<VertexId> {
        self.start(p) as VertexId..self.start(p + 1) as VertexId
    }

    pub fn partition(&self, p: usize) -> Partition {
        Partition {
            index: p,
            locality: self.locality_of_partition(p),
            range: self.partition_range(p),
        }
    }

    pub fn partitions(&self) -> impl Iterator<Item = Partition> + '_ {
        (0..self.num_partitions()).map(|p| self.partition(p))
    }

    pub fn locality_of_partition(&self, p: usize) -> LocalityId {
        (p / self.parts_per_locality) as LocalityId
    }

    /// Global indices of the partitions owned by `loc`.
    pub fn owned_partitions(&self, loc: LocalityId) -> Range<usize> {
        let p = self.parts_per_locality;
        loc as usize * p..(loc as usize + 1) * p
    }

    /// The contiguous vertex range owned by `loc`.
    pub fn locality_range(&self, loc: LocalityId) -> Range<VertexId> {
        let parts = self.owned_partitions(loc);
        self.start(parts.start) as VertexId..self.start(parts.end) as VertexId
    }

    /// Partition index of `v`, unchecked.
    pub fn partition_of(&self, v: VertexId) -> usize {
        let v = v as usize;
        let big = self.extra * (self.base + 1);
        if v < big {
            v / (self.base + 1)
        } else {
            self.extra + (v - big) / self.base
        }
    }

    /// Owning locality of `v`, unchecked.
    #[inline]
    pub fn owner(&self, v: VertexId) -> LocalityId {
        self.locality_of_partition(self.partition_of(v))
    }

    pub fn owner_of(&self, v: VertexId) -> Result<(LocalityId, usize)> {
        if v as usize >= self.num_vertices {
            return Err(GraphError::VertexOutOfRange {
                vertex: v as usize,
                num_vertices: self.num_vertices,
            }
            .into());
        }
        let p = self.partition_of(v);
        Ok((self.locality_of_partition(p), p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eight_over_two_by_two() {
        let m = PartitionMap::new(8, 2, 2).unwrap();
        let ranges: Vec<_> = m.partitions().map(|p| p.range).collect();
        assert_eq!(ranges, vec![0..2, 2..4, 4..6, 6..8]);
        assert_eq!(m.locality_range(0), 0..4);
        assert_eq!(m.owner_of(5).unwrap(), (1, 2));
        assert_eq!(m.owner_of(0).unwrap(), (0, 0));
        assert!(m.owner_of(8).is_err());
    }

    #[test]
    fn single_partition_and_empty_map() {
        let m = PartitionMap::new(10, 1, 1).unwrap();
        assert_eq!(m.partition_range(0), 0..10);
        let e = PartitionMap::new(0, 3, 2).unwrap();
        assert!(e.partitions().all(|p| p.range.is_empty()));
        assert!(PartitionMap::new(4, 0, 1).is_err());
    }

    proptest! {
        #[test]
        fn ranges_cover_balance_and_agree_with_owner(
            n in 0usize..2000, l in 1u32..9, p in 1usize..9,
        ) {
            let m = PartitionMap::new(n, l, p).unwrap();
            let mut next = 0;
            let sizes: Vec<usize> = m.partitions().map(|part| {
                assert_eq!(part.range.start as usize, next);
                next = part.range.end as usize;
                part.range.len()
            }).collect();
            prop_assert_eq!(next, n);
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            for v in 0..n as VertexId {
                let (loc, part) = m.owner_of(v).unwrap();
                prop_assert!(m.partition_range(part).contains(&v));
                prop_assert_eq!(loc as usize, part / p);
                prop_assert!(m.locality_range(loc).contains(&v));
            }
        }
    }
}
