use std::marker::PhantomData;
use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::graph::VertexId;
use crate::runtime::{GlobalId, Locality, LocalityId, Runtime, RuntimeError};
use crate::{Error, Result};

use super::PartitionMap;

/// Values storable in a [`DistArray`]: anything that round-trips through
/// 64 bits, so every element can be updated atomically.
pub trait Element: Copy + Send + Sync + 'static {
    fn to_bits(self) -> u64;
    fn from_bits(bits: u64) -> Self;
}

impl Element for f64 {
    fn to_bits(self) -> u64 {
        f64::to_bits(self)
    }
    fn from_bits(bits: u64) -> Self {
        f64::from_bits(bits)
    }
}

macro_rules! int_element {
    ($($t:ty),*) => {$(
        impl Element for $t {
            fn to_bits(self) -> u64 {
                self as u64
            }
            fn from_bits(bits: u64) -> Self {
                bits as $t
            }
        }
    )*};
}

int_element!(u32, u64, usize, i64);

/// The slice of a [`DistArray`] owned by one locality.
pub struct ArrayPart<T> {
    locality: LocalityId,
    range: Range<VertexId>,
    cells: Vec<AtomicU64>,
    _t: PhantomData<fn() -> T>,
}

impl<T: Element> ArrayPart<T> {
    fn new(locality: LocalityId, range: Range<VertexId>, f: impl Fn(VertexId) -> T) -> Self {
        let cells = range.clone().map(|v| AtomicU64::new(f(v).to_bits())).collect();
        Self {
            locality,
            range,
            cells,
            _t: PhantomData,
        }
    }

    #[inline]
    fn cell(&self, v: VertexId) -> Result<&AtomicU64, RuntimeError> {
        if !self.range.contains(&v) {
            return Err(RuntimeError::NotLocal {
                vertex: v as usize,
                locality: self.locality,
            });
        }
        Ok(&self.cells[(v - self.range.start) as usize])
    }

    pub fn range(&self) -> Range<VertexId> {
        self.range.clone()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn get(&self, v: VertexId) -> Result<T, RuntimeError> {
        Ok(T::from_bits(self.cell(v)?.load(Ordering::Acquire)))
    }

    #[inline]
    pub fn set(&self, v: VertexId, x: T) -> Result<(), RuntimeError> {
        self.cell(v)?.store(x.to_bits(), Ordering::Release);
        Ok(())
    }

    /// Stores `new` if the element equals `current`; returns the previous
    /// value either way.
    pub fn compare_exchange(&self, v: VertexId, current: T, new: T) -> Result<Result<T, T>, RuntimeError> {
        Ok(self
            .cell(v)?
            .compare_exchange(current.to_bits(), new.to_bits(), Ordering::AcqRel, Ordering::Acquire)
            .map(T::from_bits)
            .map_err(T::from_bits))
    }

    pub fn fetch_update(
        &self,
        v: VertexId,
        mut f: impl FnMut(T) -> Option<T>,
    ) -> Result<Result<T, T>, RuntimeError> {
        Ok(self
            .cell(v)?
            .fetch_update(Ordering::AcqRel, Ordering::Acquire, |b| {
                f(T::from_bits(b)).map(T::to_bits)
            })
            .map(T::from_bits)
            .map_err(T::from_bits))
    }

    pub fn fill(&self, x: T) {
        for c in &self.cells {
            c.store(x.to_bits(), Ordering::Release);
        }
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.cells
            .iter()
            .map(|c| T::from_bits(c.load(Ordering::Acquire)))
            .collect()
    }
}

impl ArrayPart<f64> {
    /// Atomic `+=`; returns the previous value.
    pub fn fetch_add(&self, v: VertexId, x: f64) -> Result<f64, RuntimeError> {
        Ok(self
            .fetch_update(v, |old| Some(old + x))?
            .unwrap_or_else(|never| never))
    }
}

impl<T> std::fmt::Debug for ArrayPart<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ArrayPart")
            .field("locality", &self.locality)
            .field("range", &self.range)
            .finish()
    }
}

/// A length-`N` array split along a [`PartitionMap`]: each locality stores
/// the elements of the vertices it owns and may only touch those directly.
pub struct DistArray<T> {
    id: GlobalId,
    map: Arc<PartitionMap>,
    _t: PhantomData<fn() -> T>,
}

impl<T> Clone for DistArray<T> {
    fn clone(&self) -> Self {
        Self {
            id: self.id,
            map: self.map.clone(),
            _t: PhantomData,
        }
    }
}

impl<T> std::fmt::Debug for DistArray<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DistArray").field("id", &self.id).finish()
    }
}

impl<T: Element + serde::Serialize + serde::de::DeserializeOwned> DistArray<T> {
    pub fn new(rt: &Runtime, map: &PartitionMap, init: T) -> Self {
        Self::from_fn(rt, map, |_| init)
    }

    pub fn from_fn(rt: &Runtime, map: &PartitionMap, f: impl Fn(VertexId) -> T) -> Self {
        let map = Arc::new(map.clone());
        let id = rt.next_global_id();
        for loc in rt.localities() {
            let part = ArrayPart::new(loc.id(), map.locality_range(loc.id()), &f);
            loc.register_component(id, Arc::new(part));
        }
        Self {
            id,
            map,
            _t: PhantomData,
        }
    }

    pub fn from_slice(rt: &Runtime, map: &PartitionMap, values: &[T]) -> Result<Self> {
        if values.len() != map.num_vertices() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} vertices",
                values.len(),
                map.num_vertices()
            )));
        }
        Ok(Self::from_fn(rt, map, |v| values[v as usize]))
    }

    pub fn id(&self) -> GlobalId {
        self.id
    }

    pub fn map(&self) -> &PartitionMap {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.map.num_vertices()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn local(&self, loc: &Locality) -> Result<Arc<ArrayPart<T>>, RuntimeError> {
        loc.component::<ArrayPart<T>>(self.id)
    }

    /// Collective: locality 0 receives all elements in vertex order.
    pub async fn gather_at_root(&self, loc: &Locality) -> Result<Option<Vec<T>>, RuntimeError> {
        let mine = self.local(loc)?.to_vec();
        let parts = loc.gather(&mine).await?;
        Ok(parts.map(|parts| parts.into_iter().flatten().collect()))
    }

    /// Driver-side gather. `Some` in the process hosting locality 0.
    pub fn gather(&self, rt: &Runtime) -> Result<Option<Vec<T>>> {
        if rt.hosts_all() {
            let mut out = Vec::with_capacity(self.len());
            for loc in rt.localities() {
                out.extend(self.local(loc)?.to_vec());
            }
            return Ok(Some(out));
        }
        let this = self.clone();
        let parts = rt.spmd(move |loc| {
            let this = this.clone();
            async move { this.gather_at_root(&loc).await }
        })?;
        Ok(parts.into_iter().flatten().next())
    }

    pub fn release(&self, rt: &Runtime) {
        for loc in rt.localities() {
            loc.unregister_component(self.id);
        }
    }
}
