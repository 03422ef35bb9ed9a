use std::any::Any;
use std::collections::HashMap;
use std::fmt;
use std::future::Future as StdFuture;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Weak};
use std::time::{Duration, Instant};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use super::action::{Action, ActionTable};
use super::coalesce::{Batch, Coalescer, Enqueued};
use super::collective::Mailbox;
use super::counters::{bump, Counters};
use super::future::{channel, panic_message, Future};
use super::pool::Pool;
use super::timer::Timer;
use super::transport::Transport;
use super::wire::{self, COLLECTIVE_ACTION, REPLY_ACTION};
use super::{Metrics, Result, RuntimeError};

pub type LocalityId = u32;

/// Name of a distributed object. Every locality registers its part of the
/// object under the same id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GlobalId(pub u64);

impl fmt::Display for GlobalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gid:{}", self.0)
    }
}

type ReplyHandler = Box<dyn FnOnce(Result<&[u8]>) + Send>;

pub(crate) struct LocalityInner {
    pub(crate) id: LocalityId,
    pub(crate) num_localities: u32,
    pub(crate) pool: Arc<Pool>,
    pub(crate) counters: Arc<Counters>,
    actions: Arc<ActionTable>,
    registry: RwLock<HashMap<GlobalId, Arc<dyn Any + Send + Sync>>>,
    coalescer: Coalescer,
    pending: Mutex<HashMap<u64, ReplyHandler>>,
    next_seq: AtomicU64,
    pub(crate) mailbox: Mailbox,
    pub(crate) collective_seq: AtomicU64,
    pub(crate) collective_timeout: Duration,
    transport: Arc<dyn Transport>,
    pub(crate) timer: Arc<Timer>,
    closing: AtomicBool,
}

/// Handle to one locality: its task pool, its registered components and
/// its endpoint for parcels and collectives. Cheap to clone.
#[derive(Clone)]
pub struct Locality {
    pub(crate) inner: Arc<LocalityInner>,
}

impl fmt::Debug for Locality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Locality")
            .field("id", &self.inner.id)
            .field("of", &self.inner.num_localities)
            .finish()
    }
}

pub(crate) struct LocalityParts {
    pub(crate) id: LocalityId,
    pub(crate) num_localities: u32,
    pub(crate) pool: Arc<Pool>,
    pub(crate) counters: Arc<Counters>,
    pub(crate) actions: Arc<ActionTable>,
    pub(crate) coalesce_max_messages: usize,
    pub(crate) coalesce_max_delay: Duration,
    pub(crate) collective_timeout: Duration,
    pub(crate) transport: Arc<dyn Transport>,
    pub(crate) timer: Arc<Timer>,
}

impl LocalityInner {
    pub(crate) fn new(p: LocalityParts) -> Arc<Self> {
        Arc::new(Self {
            id: p.id,
            num_localities: p.num_localities,
            pool: p.pool,
            counters: p.counters,
            actions: p.actions,
            registry: RwLock::default(),
            coalescer: Coalescer::new(
                p.num_localities as usize,
                p.coalesce_max_messages,
                p.coalesce_max_delay,
            ),
            pending: Mutex::default(),
            next_seq: AtomicU64::new(1),
            mailbox: Mailbox::default(),
            collective_seq: AtomicU64::new(0),
            collective_timeout: p.collective_timeout,
            transport: p.transport,
            timer: p.timer,
            closing: AtomicBool::new(false),
        })
    }

    fn run_handler(self: &Arc<Self>, action: u32, payload: &[u8]) -> Result<Vec<u8>> {
        let entry = self
            .actions
            .get(action)
            .ok_or(RuntimeError::UnregisteredAction(action))?;
        let here = Locality {
            inner: self.clone(),
        };
        catch_unwind(AssertUnwindSafe(|| (entry.handler)(&here, payload)))
            .unwrap_or_else(|p| Err(RuntimeError::TaskPanicked(panic_message(p))))
    }

    fn invoke<A: Action>(self: &Arc<Self>, dest: LocalityId, args: &A::Args) -> Result<Future<A::Output>> {
        if self.closing.load(Ordering::Acquire) {
            return Err(RuntimeError::ShuttingDown);
        }
        if dest >= self.num_localities {
            return Err(RuntimeError::NoSuchLocality(dest));
        }
        if !self.actions.contains(A::ID) {
            return Err(RuntimeError::UnregisteredAction(A::ID));
        }
        let payload = wire::serialize(args)?;
        bump(&self.counters.actions_invoked, 1);
        let (promise, fut) = channel::<A::Output>();
        if dest == self.id {
            let me = self.clone();
            self.pool.spawn_raw(
                Box::pin(async move {
                    let out = me.run_handler(A::ID, &payload);
                    promise.set(out.and_then(|b| wire::deserialize(&b)));
                }),
                true,
            );
            return Ok(fut);
        }
        let seq = self.next_seq.fetch_add(1, Ordering::Relaxed);
        let token = wire::make_token(self.id, seq);
        let on_reply: ReplyHandler = Box::new(move |r: Result<&[u8]>| {
            promise.set(r.and_then(wire::deserialize::<A::Output>));
        });
        self.pending.lock().insert(token, on_reply);
        self.send_parcel(dest, A::ID, token, &payload);
        Ok(fut)
    }

    pub(crate) fn send_parcel(self: &Arc<Self>, dest: LocalityId, action: u32, token: u64, payload: &[u8]) {
        bump(&self.counters.parcels_sent, 1);
        match self.coalescer.enqueue(dest as usize, action, token, payload) {
            Enqueued::Send(batch) => self.transmit(dest, batch),
            Enqueued::Arm(epoch) => {
                let weak: Weak<Self> = Arc::downgrade(self);
                self.timer
                    .schedule(Instant::now() + self.coalescer.max_delay(), move || {
                        if let Some(me) = weak.upgrade() {
                            if let Some(batch) = me.coalescer.flush_epoch(dest as usize, epoch) {
                                me.transmit(dest, batch);
                            }
                        }
                    });
            }
            Enqueued::Buffered => {}
        }
    }

    fn transmit(&self, dest: LocalityId, batch: Batch) {
        bump(&self.counters.wire_messages_sent, 1);
        bump(&self.counters.bytes_sent, batch.bytes.len() as u64);
        if let Err(e) = self.transport.send(self.id, dest, batch.bytes) {
            let msg = e.to_string();
            for token in batch.tokens {
                let handler = self.pending.lock().remove(&token);
                if let Some(h) = handler {
                    h(Err(RuntimeError::Transport(msg.clone())));
                }
            }
        }
    }

    pub(crate) fn flush_to(&self, dest: LocalityId) {
        if let Some(batch) = self.coalescer.flush(dest as usize) {
            self.transmit(dest, batch);
        }
    }

    pub(crate) fn flush_all(&self) {
        for dest in 0..self.coalescer.destinations() {
            self.flush_to(dest as LocalityId);
        }
    }

    /// Entry point for transports: queues processing of one wire message.
    pub(crate) fn deliver(self: &Arc<Self>, bytes: Vec<u8>) {
        bump(&self.counters.bytes_received, bytes.len() as u64);
        let me = self.clone();
        self.pool
            .spawn_raw(Box::pin(async move { me.process(&bytes) }), true);
    }

    /// Handles every frame of a wire message, then sends the replies it
    /// produced without waiting for the coalescing delay.
    fn process(self: &Arc<Self>, bytes: &[u8]) {
        let frames = match wire::decode_frames(bytes) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("locality {}: dropping malformed message: {e}", self.id);
                return;
            }
        };
        bump(&self.counters.parcels_received, frames.len() as u64);
        let mut reply_to: Vec<LocalityId> = Vec::new();
        for frame in frames {
            match frame.action {
                REPLY_ACTION => self.complete(frame.token, frame.payload),
                COLLECTIVE_ACTION => match wire::deserialize(frame.payload) {
                    Ok((seq, phase, from, data)) => self.mailbox.put((seq, phase, from), data),
                    Err(e) => eprintln!("locality {}: bad collective message: {e}", self.id),
                },
                action => {
                    bump(&self.counters.remote_actions_served, 1);
                    let result = self.run_handler(action, frame.payload);
                    let Some(src) = wire::token_source(frame.token) else {
                        continue;
                    };
                    let reply = match result {
                        Ok(mut b) => {
                            b.insert(0, 0);
                            b
                        }
                        Err(e) => {
                            let mut b = vec![1u8];
                            b.extend_from_slice(e.to_string().as_bytes());
                            b
                        }
                    };
                    self.send_parcel(src, REPLY_ACTION, frame.token, &reply);
                    if !reply_to.contains(&src) {
                        reply_to.push(src);
                    }
                }
            }
        }
        for src in reply_to {
            self.flush_to(src);
        }
    }

    fn complete(&self, token: u64, payload: &[u8]) {
        let Some(handler) = self.pending.lock().remove(&token) else {
            return;
        };
        let outcome = match payload.split_first() {
            Some((0, body)) => Ok(body),
            Some((_, msg)) => Err(RuntimeError::Remote(String::from_utf8_lossy(msg).into_owned())),
            None => Err(RuntimeError::Transport("empty reply".into())),
        };
        handler(outcome);
    }

    pub(crate) fn pending_replies(&self) -> usize {
        self.pending.lock().len()
    }

    pub(crate) fn buffered(&self) -> usize {
        self.coalescer.buffered()
    }

    /// Fails everything still waiting and releases components.
    pub(crate) fn close(&self) {
        self.closing.store(true, Ordering::Release);
        let pending = std::mem::take(&mut *self.pending.lock());
        for (_, h) in pending {
            h(Err(RuntimeError::ShuttingDown));
        }
        self.mailbox.close();
        self.registry.write().clear();
    }
}

impl Locality {
    pub fn id(&self) -> LocalityId {
        self.inner.id
    }

    pub fn num_localities(&self) -> u32 {
        self.inner.num_localities
    }

    /// Spawns a task on this locality's compute workers.
    pub fn spawn<F, T>(&self, fut: F) -> Future<T>
    where
        F: StdFuture<Output = T> + Send + 'static,
        T: Send + 'static,
    {
        self.inner.pool.spawn(fut, false)
    }

    /// Runs action `A` on `dest` and returns its result as a future. The
    /// parcel goes through the coalescer; invoking on this locality runs the
    /// action as a local task instead.
    pub fn remote_invoke<A: Action>(&self, dest: LocalityId, args: A::Args) -> Future<A::Output> {
        self.inner
            .invoke::<A>(dest, &args)
            .unwrap_or_else(Future::failed)
    }

    /// Sends every buffered parcel now.
    pub fn flush(&self) {
        self.inner.flush_all();
    }

    pub fn metrics(&self) -> Metrics {
        self.inner.counters.snapshot(self.inner.id)
    }

    pub(crate) fn counters(&self) -> &Counters {
        &self.inner.counters
    }

    pub(crate) fn counters_arc(&self) -> Arc<Counters> {
        self.inner.counters.clone()
    }

    pub fn register_component<T: Any + Send + Sync>(&self, id: GlobalId, component: Arc<T>) {
        self.inner.registry.write().insert(id, component);
    }

    pub fn component<T: Any + Send + Sync>(&self, id: GlobalId) -> Result<Arc<T>> {
        let any = self
            .inner
            .registry
            .read()
            .get(&id)
            .cloned()
            .ok_or(RuntimeError::NoSuchComponent(id.0))?;
        any.downcast::<T>()
            .map_err(|_| RuntimeError::NoSuchComponent(id.0))
    }

    pub fn unregister_component(&self, id: GlobalId) -> bool {
        self.inner.registry.write().remove(&id).is_some()
    }
}
