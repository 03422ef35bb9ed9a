//! A single background thread that runs callbacks at deadlines.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Instant;

use parking_lot::{Condvar, Mutex};

type Callback = Box<dyn FnOnce() + Send>;

struct Entry {
    at: Instant,
    seq: u64,
    f: Callback,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.at == other.at && self.seq == other.seq
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Reversed so the max-heap pops the earliest deadline first, FIFO on ties.
    fn cmp(&self, other: &Self) -> Ordering {
        other.at.cmp(&self.at).then(other.seq.cmp(&self.seq))
    }
}

#[derive(Default)]
struct Queue {
    heap: BinaryHeap<Entry>,
    seq: u64,
    running: usize,
    shutdown: bool,
}

struct Inner {
    queue: Mutex<Queue>,
    cv: Condvar,
}

pub(crate) struct Timer {
    inner: Arc<Inner>,
    thread: Mutex<Option<JoinHandle<()>>>,
}

impl Timer {
    pub(crate) fn start() -> std::io::Result<Self> {
        let inner = Arc::new(Inner {
            queue: Mutex::new(Queue::default()),
            cv: Condvar::new(),
        });
        let worker = inner.clone();
        let thread = std::thread::Builder::new()
            .name("timer".into())
            .spawn(move || run(&worker))?;
        Ok(Self {
            inner,
            thread: Mutex::new(Some(thread)),
        })
    }

    pub(crate) fn schedule(&self, at: Instant, f: impl FnOnce() + Send + 'static) {
        let mut q = self.inner.queue.lock();
        if q.shutdown {
            return;
        }
        let seq = q.seq;
        q.seq += 1;
        let earliest = q.heap.peek().is_none_or(|e| at < e.at);
        q.heap.push(Entry {
            at,
            seq,
            f: Box::new(f),
        });
        drop(q);
        if earliest {
            self.inner.cv.notify_one();
        }
    }

    /// Callbacks scheduled or currently executing.
    #[cfg(test)]
    pub(crate) fn pending(&self) -> usize {
        let q = self.inner.queue.lock();
        q.heap.len() + q.running
    }

    /// Stops the thread; callbacks not yet due are dropped.
    pub(crate) fn shutdown(&self) {
        {
            let mut q = self.inner.queue.lock();
            q.shutdown = true;
        }
        self.inner.cv.notify_one();
        if let Some(t) = self.thread.lock().take() {
            let _ = t.join();
        }
        let dropped = std::mem::take(&mut self.inner.queue.lock().heap);
        drop(dropped);
    }
}

impl Drop for Timer {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn run(inner: &Inner) {
    let mut q = inner.queue.lock();
    loop {
        if q.shutdown {
            return;
        }
        let now = Instant::now();
        match q.heap.peek() {
            None => inner.cv.wait(&mut q),
            Some(e) if e.at <= now => {
                let e = q.heap.pop().unwrap();
                q.running += 1;
                drop(q);
                (e.f)();
                q = inner.queue.lock();
                q.running -= 1;
            }
            Some(e) => {
                let at = e.at;
                inner.cv.wait_until(&mut q, at);
            }
        }
    }
}
