//! Binomial-tree collectives rooted at locality 0.

use std::collections::HashMap;
use std::sync::atomic::Ordering;
use std::sync::Arc;
use std::time::Instant;

use parking_lot::Mutex;
use serde::de::DeserializeOwned;
use serde::Serialize;

use super::counters::bump;
use super::future::{channel, Future, Promise};
use super::locality::{Locality, LocalityId};
use super::wire::{self, COLLECTIVE_ACTION};
use super::{Result, RuntimeError};

/// (collective sequence number, phase, sender)
pub(crate) type Key = (u64, u8, LocalityId);

const REDUCE: u8 = 0;
const BROADCAST: u8 = 1;
const GATHER: u8 = 2;

enum Slot {
    Arrived(Vec<u8>),
    Waiting(Promise<Vec<u8>>),
}

#[derive(Default)]
pub(crate) struct Mailbox {
    slots: Mutex<HashMap<Key, Slot>>,
}

impl Mailbox {
    pub(crate) fn put(&self, key: Key, data: Vec<u8>) {
        let mut slots = self.slots.lock();
        match slots.remove(&key) {
            Some(Slot::Waiting(p)) => {
                drop(slots);
                p.set_value(data);
            }
            Some(Slot::Arrived(_)) => {
                eprintln!("duplicate collective message {key:?}");
            }
            None => {
                slots.insert(key, Slot::Arrived(data));
            }
        }
    }

    fn take(&self, key: Key) -> std::result::Result<Vec<u8>, Future<Vec<u8>>> {
        let mut slots = self.slots.lock();
        match slots.remove(&key) {
            Some(Slot::Arrived(data)) => Ok(data),
            Some(Slot::Waiting(_)) => unreachable!("two receivers for {key:?}"),
            None => {
                let (p, f) = channel();
                slots.insert(key, Slot::Waiting(p));
                Err(f)
            }
        }
    }

    fn expire(&self, key: Key) -> Option<Promise<Vec<u8>>> {
        let mut slots = self.slots.lock();
        match slots.remove(&key) {
            Some(Slot::Waiting(p)) => Some(p),
            Some(other) => {
                slots.insert(key, other);
                None
            }
            None => None,
        }
    }

    pub(crate) fn close(&self) {
        let slots = std::mem::take(&mut *self.slots.lock());
        for (_, slot) in slots {
            if let Slot::Waiting(p) = slot {
                p.fail(RuntimeError::ShuttingDown);
            }
        }
    }
}

impl Locality {
    fn next_collective(&self) -> u64 {
        bump(&self.inner.counters.collectives, 1);
        self.inner.collective_seq.fetch_add(1, Ordering::Relaxed)
    }

    fn post(&self, dest: LocalityId, key: Key, data: Vec<u8>) -> Result<()> {
        let (seq, phase, from) = key;
        let payload = wire::serialize(&(seq, phase, from, data))?;
        self.inner.send_parcel(dest, COLLECTIVE_ACTION, 0, &payload);
        self.inner.flush_to(dest);
        Ok(())
    }

    async fn receive(&self, key: Key) -> Result<Vec<u8>> {
        let fut = match self.inner.mailbox.take(key) {
            Ok(data) => return Ok(data),
            Err(fut) => fut,
        };
        let weak = Arc::downgrade(&self.inner);
        let timeout = self.inner.collective_timeout;
        self.inner.timer.schedule(Instant::now() + timeout, move || {
            if let Some(me) = weak.upgrade() {
                if let Some(p) = me.mailbox.expire(key) {
                    p.fail(RuntimeError::Timeout(format!(
                        "collective {} phase {} from locality {} not received within {timeout:?}",
                        key.0, key.1, key.2
                    )));
                }
            }
        });
        fut.await
    }

    /// Folds every locality's `value` with `op`; all localities get the
    /// result. Each locality must call this the same number of times in the
    /// same order. Children are folded in a fixed order, so the result is
    /// reproducible for a fixed set of inputs.
    pub async fn all_reduce<T, F>(&self, value: T, op: F) -> Result<T>
    where
        T: Serialize + DeserializeOwned + Send,
        F: Fn(T, T) -> T + Send,
    {
        let seq = self.next_collective();
        let (r, l) = (self.id(), self.num_localities());
        let mut acc = value;
        let mut mask = 1u32;
        while mask < l {
            if r & mask != 0 {
                self.post(r - mask, (seq, REDUCE, r), wire::serialize(&acc)?)?;
                break;
            }
            if r + mask < l {
                let child = self.receive((seq, REDUCE, r + mask)).await?;
                acc = op(acc, wire::deserialize(&child)?);
            }
            mask <<= 1;
        }
        let bytes = if r == 0 {
            wire::serialize(&acc)?
        } else {
            self.receive((seq, BROADCAST, r & (r - 1))).await?
        };
        // Children of r are r + m for every power of two m below r's lowest
        // set bit (all powers for the root).
        let limit = if r == 0 { l.next_power_of_two() } else { r & r.wrapping_neg() };
        let mut m = 1u32;
        while m < limit {
            if r + m < l {
                self.post(r + m, (seq, BROADCAST, r), bytes.clone())?;
            }
            m <<= 1;
        }
        wire::deserialize(&bytes)
    }

    pub async fn barrier(&self) -> Result<()> {
        self.all_reduce((), |_, _| ()).await
    }

    /// Collects every locality's bytes at locality 0, in locality order.
    /// Other localities get `None`.
    pub async fn gather_bytes(&self, data: Vec<u8>) -> Result<Option<Vec<Vec<u8>>>> {
        let seq = self.next_collective();
        let r = self.id();
        if r != 0 {
            self.post(0, (seq, GATHER, r), data)?;
            return Ok(None);
        }
        let mut all = Vec::with_capacity(self.num_localities() as usize);
        all.push(data);
        for from in 1..self.num_localities() {
            all.push(self.receive((seq, GATHER, from)).await?);
        }
        Ok(Some(all))
    }

    pub async fn gather<T: Serialize + DeserializeOwned>(&self, value: &T) -> Result<Option<Vec<T>>> {
        let parts = self.gather_bytes(wire::serialize(value)?).await?;
        parts
            .map(|parts| parts.iter().map(|b| wire::deserialize(b)).collect())
            .transpose()
    }
}
