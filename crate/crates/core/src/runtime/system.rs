use std::future::Future as StdFuture;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use parking_lot::Mutex;

use super::action::{Action, ActionTable};
use super::config::{RuntimeConfig, TransportKind};
use super::counters::{bump, Counters};
use super::future::Future;
use super::locality::{GlobalId, Locality, LocalityId, LocalityInner, LocalityParts};
use super::pool::{Pool, PoolHandle};
use super::socket::SocketTransport;
use super::timer::Timer;
use super::transport::{Inproc, Router, Transport};
use super::{Metrics, Result, RuntimeError};

pub struct RuntimeBuilder {
    config: RuntimeConfig,
    actions: ActionTable,
}

impl RuntimeBuilder {
    pub fn new(config: RuntimeConfig) -> Self {
        Self {
            config,
            actions: ActionTable::new(),
        }
    }

    pub fn register<A: Action>(mut self) -> Result<Self> {
        self.actions.register::<A>()?;
        Ok(self)
    }

    pub fn actions_mut(&mut self) -> &mut ActionTable {
        &mut self.actions
    }

    pub fn start(self) -> Result<Runtime> {
        Runtime::start_with(self.config, self.actions)
    }
}

/// The localities hosted by this process plus the shared timer and
/// transport. Dropping a runtime stops it without reporting drain errors;
/// call [`Runtime::stop`] to see them.
pub struct Runtime {
    config: RuntimeConfig,
    localities: Vec<Locality>,
    pools: Mutex<Vec<PoolHandle>>,
    timer: Arc<Timer>,
    transport: Arc<dyn Transport>,
    next_gid: AtomicU64,
    stopped: AtomicBool,
}

impl std::fmt::Debug for Runtime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Runtime")
            .field("localities", &self.config.localities)
            .field("hosted", &self.localities.len())
            .finish()
    }
}

impl Runtime {
    pub fn builder(config: RuntimeConfig) -> RuntimeBuilder {
        RuntimeBuilder::new(config)
    }

    fn start_with(config: RuntimeConfig, actions: ActionTable) -> Result<Self> {
        config.validate()?;
        let io = |what: &str| {
            let what = what.to_string();
            move |e: std::io::Error| RuntimeError::Other(format!("{what}: {e}"))
        };
        let l = config.localities as u32;
        let hosted = config.hosted_localities();
        let timer = Arc::new(Timer::start().map_err(io("timer thread"))?);
        let router = Arc::new(Router::default());
        let transport: Arc<dyn Transport> = match &config.transport {
            TransportKind::Inproc => Arc::new(Inproc::new(
                router.clone(),
                config.injected_latency,
                timer.clone(),
            )),
            TransportKind::Socket(sock) => {
                Arc::new(SocketTransport::start(sock, l, &hosted, router.clone())?)
            }
        };
        let actions = actions.into_shared();
        let mut pools = Vec::new();
        let mut localities = Vec::new();
        let mut slots = vec![None; l as usize];
        for &id in &hosted {
            let counters = Arc::new(Counters::default());
            let handle = Pool::start(
                &format!("loc{id}"),
                config.workers_per_locality,
                config.reserved_remote_workers,
                counters.clone(),
            )
            .map_err(io("worker threads"))?;
            let inner = LocalityInner::new(LocalityParts {
                id,
                num_localities: l,
                pool: handle.pool.clone(),
                counters,
                actions: actions.clone(),
                coalesce_max_messages: config.coalesce_max_messages,
                coalesce_max_delay: config.coalesce_max_delay,
                collective_timeout: config.collective_timeout,
                transport: transport.clone(),
                timer: timer.clone(),
            });
            slots[id as usize] = Some(Arc::downgrade(&inner));
            pools.push(handle);
            localities.push(Locality { inner });
        }
        router.install(slots);
        Ok(Self {
            config,
            localities,
            pools: Mutex::new(pools),
            timer,
            transport,
            next_gid: AtomicU64::new(1),
            stopped: AtomicBool::new(false),
        })
    }

    pub fn config(&self) -> &RuntimeConfig {
        &self.config
    }

    pub fn num_localities(&self) -> u32 {
        self.config.localities as u32
    }

    /// Localities run by this process, in id order.
    pub fn localities(&self) -> &[Locality] {
        &self.localities
    }

    pub fn locality(&self, id: LocalityId) -> Result<&Locality> {
        self.localities
            .iter()
            .find(|l| l.id() == id)
            .ok_or(RuntimeError::NoSuchLocality(id))
    }

    /// True when every locality of the run lives in this process.
    pub fn hosts_all(&self) -> bool {
        self.localities.len() == self.config.localities
    }

    /// Ids for distributed objects. Processes that create objects in the same
    /// order agree on their ids.
    pub fn next_global_id(&self) -> GlobalId {
        GlobalId(self.next_gid.fetch_add(1, Ordering::Relaxed))
    }

    pub fn spawn_on<F, T>(&self, id: LocalityId, fut: F) -> Future<T>
    where
        F: StdFuture<Output = T> + Send + 'static,
        T: Send + 'static,
    {
        match self.locality(id) {
            Ok(l) => l.spawn(fut),
            Err(e) => Future::failed(e),
        }
    }

    /// Runs `f` once on every hosted locality as a compute task and blocks
    /// until all of them finish. Results are in locality order.
    pub fn spmd<F, Fut, T>(&self, f: F) -> Result<Vec<T>>
    where
        F: Fn(Locality) -> Fut,
        Fut: StdFuture<Output = Result<T>> + Send + 'static,
        T: Send + 'static,
    {
        let futures: Vec<_> = self
            .localities
            .iter()
            .map(|l| l.spawn(f(l.clone())))
            .collect();
        let mut values = Vec::with_capacity(futures.len());
        let mut errors = Vec::new();
        for fut in futures {
            match fut.get() {
                Ok(Ok(v)) => values.push(v),
                Ok(Err(e)) | Err(e) => errors.push(e),
            }
        }
        if errors.is_empty() {
            Ok(values)
        } else {
            Err(RuntimeError::aggregate(errors))
        }
    }

    pub fn metrics(&self) -> Vec<Metrics> {
        self.localities.iter().map(Locality::metrics).collect()
    }

    pub fn total_metrics(&self) -> Metrics {
        Metrics::sum(&self.metrics())
    }

    fn in_flight(&self) -> u64 {
        let mut sent = 0u64;
        let mut received = 0u64;
        let mut other = 0u64;
        for l in &self.localities {
            let c = &l.inner.counters;
            sent += c.parcels_sent.load(Ordering::SeqCst);
            received += c.parcels_received.load(Ordering::SeqCst);
            other += (l.inner.buffered() + l.inner.pending_replies()) as u64;
        }
        if self.hosts_all() {
            other + sent.saturating_sub(received)
        } else {
            other
        }
    }

    fn quiescent(&self) -> bool {
        self.in_flight() == 0 && self.localities.iter().all(|l| l.inner.pool.is_idle())
    }

    /// Drains in-flight parcels, then joins every worker. Parcels still
    /// undelivered after the drain timeout are counted as dropped and
    /// reported.
    pub fn stop(self) -> Result<()> {
        self.shutdown()
    }

    fn shutdown(&self) -> Result<()> {
        if self.stopped.swap(true, Ordering::AcqRel) {
            return Ok(());
        }
        let deadline = Instant::now() + self.config.drain_timeout;
        let mut stable = 0;
        let mut result = Ok(());
        loop {
            for l in &self.localities {
                l.inner.flush_all();
            }
            // Two consecutive quiet observations guard against a message
            // passing between counters while they are read.
            if self.quiescent() {
                stable += 1;
                if stable >= 2 {
                    break;
                }
            } else {
                stable = 0;
            }
            if Instant::now() >= deadline {
                let undelivered = self.in_flight();
                if undelivered > 0 {
                    if let Some(l) = self.localities.first() {
                        bump(&l.inner.counters.dropped_parcels, undelivered);
                    }
                    result = Err(RuntimeError::Undelivered { undelivered });
                }
                break;
            }
            std::thread::sleep(Duration::from_micros(200));
        }
        if !self.hosts_all() && result.is_ok() {
            // Peers may still be sending to this process.
            let barrier: Vec<_> = self
                .localities
                .iter()
                .map(|l| {
                    let l2 = l.clone();
                    l.spawn(async move { l2.barrier().await })
                })
                .collect();
            for f in barrier {
                if let Ok(Err(e)) | Err(e) = f.get() {
                    result = Err(e);
                }
            }
        }
        for l in &self.localities {
            l.inner.close();
        }
        for mut p in self.pools.lock().drain(..) {
            p.shutdown();
        }
        self.timer.shutdown();
        self.transport.shutdown();
        result
    }
}

impl Drop for Runtime {
    fn drop(&mut self) {
        let _ = self.shutdown();
    }
}
