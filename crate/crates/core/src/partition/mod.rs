//! Block partitioning of vertices over localities, the distributed CSR
//! graph and distributed per-vertex arrays.

mod dist_array;
mod dist_csr;
mod map;

pub use dist_array::{ArrayPart, DistArray, Element};
pub use dist_csr::{for_each_owned_partition, CsrSlice, DistCsr, LocalGraph};
pub use map::{Partition, PartitionMap};
