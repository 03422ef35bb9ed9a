//! Per-destination parcel batching.
//!
//! A batch is handed to the transport when it reaches `max_messages`
//! parcels, when its oldest parcel has waited `max_delay` (the caller arms a
//! timer when [`Enqueued::Arm`] is returned), or on an explicit flush.

use std::time::Duration;

use parking_lot::Mutex;

use super::wire::{encode_frame, REPLY_ACTION};

#[derive(Debug, Default)]
pub(crate) struct Batch {
    pub(crate) bytes: Vec<u8>,
    pub(crate) parcels: usize,
    /// Reply tokens of requests in this batch, failed if the send fails.
    pub(crate) tokens: Vec<u64>,
}

#[derive(Default)]
struct Slot {
    batch: Batch,
    epoch: u64,
}

impl Slot {
    fn take(&mut self) -> Batch {
        self.epoch += 1;
        std::mem::take(&mut self.batch)
    }
}

#[derive(Debug)]
pub(crate) enum Enqueued {
    Send(Batch),
    /// First parcel of a new batch: flush epoch `.0` after the delay.
    Arm(u64),
    Buffered,
}

pub(crate) struct Coalescer {
    max_messages: usize,
    max_delay: Duration,
    slots: Vec<Mutex<Slot>>,
}

impl Coalescer {
    pub(crate) fn new(destinations: usize, max_messages: usize, max_delay: Duration) -> Self {
        Self {
            max_messages,
            max_delay,
            slots: (0..destinations).map(|_| Mutex::default()).collect(),
        }
    }

    pub(crate) fn max_delay(&self) -> Duration {
        self.max_delay
    }

    pub(crate) fn enqueue(&self, dest: usize, action: u32, token: u64, payload: &[u8]) -> Enqueued {
        let mut slot = self.slots[dest].lock();
        encode_frame(&mut slot.batch.bytes, action, token, payload);
        slot.batch.parcels += 1;
        if token != 0 && action != REPLY_ACTION {
            slot.batch.tokens.push(token);
        }
        if slot.batch.parcels >= self.max_messages {
            Enqueued::Send(slot.take())
        } else if slot.batch.parcels == 1 {
            Enqueued::Arm(slot.epoch)
        } else {
            Enqueued::Buffered
        }
    }

    pub(crate) fn flush(&self, dest: usize) -> Option<Batch> {
        let mut slot = self.slots[dest].lock();
        (slot.batch.parcels > 0).then(|| slot.take())
    }

    /// Flushes only if the batch armed at `epoch` is still buffered.
    pub(crate) fn flush_epoch(&self, dest: usize, epoch: u64) -> Option<Batch> {
        let mut slot = self.slots[dest].lock();
        (slot.epoch == epoch && slot.batch.parcels > 0).then(|| slot.take())
    }

    pub(crate) fn buffered(&self) -> usize {
        self.slots.iter().map(|s| s.lock().batch.parcels).sum()
    }

    pub(crate) fn destinations(&self) -> usize {
        self.slots.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::wire::decode_frames;

    #[test]
    fn k1_sends_every_parcel() {
        let c = Coalescer::new(2, 1, Duration::from_millis(1));
        for i in 0..5 {
            match c.enqueue(1, 3, i + 1, b"x") {
                Enqueued::Send(b) => assert_eq!(b.parcels, 1),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn k16_groups_sixteen() {
        let c = Coalescer::new(2, 16, Duration::from_millis(1));
        let mut sent = Vec::new();
        let mut arms = 0;
        for i in 0..160 {
            match c.enqueue(0, 3, i + 1, &[i as u8]) {
                Enqueued::Send(b) => sent.push(b),
                Enqueued::Arm(_) => arms += 1,
                Enqueued::Buffered => {}
            }
        }
        assert_eq!(sent.len(), 10);
        assert_eq!(arms, 10);
        let frames = decode_frames(&sent[3].bytes).unwrap();
        assert_eq!(frames.len(), 16);
        assert_eq!(frames[0].payload, &[48]);
        assert_eq!(sent[3].tokens.len(), 16);
    }

    #[test]
    fn stale_epoch_does_not_flush_new_batch() {
        let c = Coalescer::new(1, 4, Duration::from_millis(1));
        let Enqueued::Arm(e0) = c.enqueue(0, 1, 0, b"a") else { panic!() };
        assert!(c.flush(0).is_some());
        let Enqueued::Arm(e1) = c.enqueue(0, 1, 0, b"b") else { panic!() };
        assert!(c.flush_epoch(0, e0).is_none());
        assert_eq!(c.buffered(), 1);
        assert_eq!(c.flush_epoch(0, e1).unwrap().parcels, 1);
        assert!(c.flush(0).is_none());
    }
}
