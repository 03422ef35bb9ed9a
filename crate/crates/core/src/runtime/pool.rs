//! Per-locality worker pool.
//!
//! Compute workers share locally spawned tasks through per-worker deques plus
//! a global injector, stealing from each other when idle. Tasks created for
//! incoming remote actions go to a separate queue that every worker may
//! drain, and that reserved workers drain exclusively.

use std::cell::RefCell;
use std::future::Future as StdFuture;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::pin::Pin;
use std::sync::atomic::{fence, AtomicBool, AtomicU8, AtomicUsize, Ordering};
use std::sync::Arc;
use std::task::{Context, Poll, Wake, Waker};
use std::thread::JoinHandle;
use std::time::Duration;

use crossbeam_deque::{Injector, Steal, Stealer, Worker};
use parking_lot::{Condvar, Mutex};

use super::counters::Counters;
use super::future::{channel, panic_message, Future};
use super::RuntimeError;

type BoxFuture = Pin<Box<dyn StdFuture<Output = ()> + Send>>;

const IDLE: u8 = 0;
const SCHEDULED: u8 = 1;
const RUNNING: u8 = 2;
const NOTIFIED: u8 = 3;
const COMPLETE: u8 = 4;

pub(crate) struct Task {
    state: AtomicU8,
    future: Mutex<Option<BoxFuture>>,
    pool: Arc<Pool>,
    remote: bool,
}

impl Wake for Task {
    fn wake(self: Arc<Self>) {
        self.wake_by_ref();
    }

    fn wake_by_ref(self: &Arc<Self>) {
        let mut s = self.state.load(Ordering::Acquire);
        loop {
            let next = match s {
                IDLE => SCHEDULED,
                RUNNING => NOTIFIED,
                _ => return,
            };
            match self
                .state
                .compare_exchange(s, next, Ordering::AcqRel, Ordering::Acquire)
            {
                Ok(_) => {
                    if s == IDLE {
                        self.pool.push(self.clone());
                    }
                    return;
                }
                Err(cur) => s = cur,
            }
        }
    }
}

impl Task {
    fn run(self: Arc<Self>) {
        self.state.store(RUNNING, Ordering::Release);
        let waker = Waker::from(self.clone());
        let mut cx = Context::from_waker(&waker);
        let mut slot = self.future.lock();
        let Some(fut) = slot.as_mut() else {
            return;
        };
        // User panics are caught by `CatchUnwind`; this guards runtime glue.
        let polled = catch_unwind(AssertUnwindSafe(|| fut.as_mut().poll(&mut cx)));
        match polled {
            Ok(Poll::Pending) => {
                drop(slot);
                if self
                    .state
                    .compare_exchange(RUNNING, IDLE, Ordering::AcqRel, Ordering::Acquire)
                    .is_err()
                {
                    self.state.store(SCHEDULED, Ordering::Release);
                    self.pool.push(self.clone());
                }
            }
            _ => {
                *slot = None;
                drop(slot);
                self.state.store(COMPLETE, Ordering::Release);
                self.pool.counters.add_task_executed();
            }
        }
    }
}

/// Polls the inner future, converting a panic into an error value.
struct CatchUnwind<F> {
    inner: Pin<Box<F>>,
}

impl<F: StdFuture> StdFuture for CatchUnwind<F> {
    type Output = Result<F::Output, RuntimeError>;

    fn poll(mut self: Pin<&mut Self>, cx: &mut Context<'_>) -> Poll<Self::Output> {
        let inner = self.inner.as_mut();
        match catch_unwind(AssertUnwindSafe(|| inner.poll(cx))) {
            Ok(Poll::Pending) => Poll::Pending,
            Ok(Poll::Ready(v)) => Poll::Ready(Ok(v)),
            Err(p) => Poll::Ready(Err(RuntimeError::TaskPanicked(panic_message(p)))),
        }
    }
}

pub(crate) struct Pool {
    injector: Injector<Arc<Task>>,
    remote: Injector<Arc<Task>>,
    stealers: Vec<Stealer<Arc<Task>>>,
    sleepers: AtomicUsize,
    running: AtomicUsize,
    lock: Mutex<()>,
    wakeup: Condvar,
    shutdown: AtomicBool,
    counters: Arc<Counters>,
}

struct WorkerCtx {
    pool: Arc<Pool>,
    index: usize,
    local: Option<Worker<Arc<Task>>>,
}

thread_local! {
    static CURRENT: RefCell<Option<WorkerCtx>> = const { RefCell::new(None) };
}

pub(crate) fn on_worker_thread() -> bool {
    CURRENT.with(|c| c.borrow().is_some())
}

/// Runs one queued task of the current worker's pool, if any.
pub(crate) fn help_one() -> bool {
    let found = CURRENT.with(|c| {
        let ctx = c.borrow();
        let ctx = ctx.as_ref()?;
        ctx.pool
            .find_task(ctx.index, ctx.local.as_ref())
            .map(|t| (t, ctx.pool.clone()))
    });
    match found {
        Some((task, pool)) => {
            pool.execute(task);
            true
        }
        None => false,
    }
}

pub(crate) struct PoolHandle {
    pub(crate) pool: Arc<Pool>,
    threads: Vec<JoinHandle<()>>,
}

impl Pool {
    /// Starts `workers` threads, the last `reserved` of which only serve
    /// remote-action tasks.
    pub(crate) fn start(
        name: &str,
        workers: usize,
        reserved: usize,
        counters: Arc<Counters>,
    ) -> std::io::Result<PoolHandle> {
        let compute = workers - reserved;
        let deques: Vec<Worker<Arc<Task>>> = (0..compute).map(|_| Worker::new_lifo()).collect();
        let pool = Arc::new(Pool {
            injector: Injector::new(),
            remote: Injector::new(),
            stealers: deques.iter().map(Worker::stealer).collect(),
            sleepers: AtomicUsize::new(0),
            running: AtomicUsize::new(0),
            lock: Mutex::new(()),
            wakeup: Condvar::new(),
            shutdown: AtomicBool::new(false),
            counters,
        });
        let mut threads = Vec::with_capacity(workers);
        let mut deques = deques.into_iter();
        for index in 0..workers {
            let local = deques.next();
            let pool = pool.clone();
            let handle = std::thread::Builder::new()
                .name(format!("{name}-w{index}"))
                .spawn(move || worker_main(pool, index, local))?;
            threads.push(handle);
        }
        Ok(PoolHandle { pool, threads })
    }

    pub(crate) fn spawn<F, T>(self: &Arc<Self>, fut: F, remote: bool) -> Future<T>
    where
        F: StdFuture<Output = T> + Send + 'static,
        T: Send + 'static,
    {
        let (promise, result) = channel();
        let wrapped = CatchUnwind {
            inner: Box::pin(fut),
        };
        self.spawn_raw(
            Box::pin(async move {
                promise.set(wrapped.await);
            }),
            remote,
        );
        result
    }

    pub(crate) fn spawn_raw(self: &Arc<Self>, fut: BoxFuture, remote: bool) {
        let task = Arc::new(Task {
            state: AtomicU8::new(SCHEDULED),
            future: Mutex::new(Some(fut)),
            pool: self.clone(),
            remote,
        });
        self.push(task);
    }

    fn push(self: &Arc<Self>, task: Arc<Task>) {
        if task.remote {
            self.remote.push(task);
        } else {
            let leftover = CURRENT.with(|c| {
                let ctx = c.borrow();
                match ctx.as_ref() {
                    Some(WorkerCtx {
                        pool,
                        local: Some(local),
                        ..
                    }) if Arc::ptr_eq(pool, self) => {
                        local.push(task);
                        None
                    }
                    _ => Some(task),
                }
            });
            if let Some(task) = leftover {
                self.injector.push(task);
            }
        }
        self.notify();
    }

    fn notify(&self) {
        fence(Ordering::SeqCst);
        if self.sleepers.load(Ordering::SeqCst) > 0 {
            let _g = self.lock.lock();
            self.wakeup.notify_all();
        }
    }

    fn has_work(&self, reserved: bool) -> bool {
        if !self.remote.is_empty() {
            return true;
        }
        !reserved && (!self.injector.is_empty() || self.stealers.iter().any(|s| !s.is_empty()))
    }

    /// True when nothing is queued or running.
    pub(crate) fn is_idle(&self) -> bool {
        !self.has_work(false) && self.running.load(Ordering::SeqCst) == 0
    }

    fn find_task(&self, index: usize, local: Option<&Worker<Arc<Task>>>) -> Option<Arc<Task>> {
        let Some(local) = local else {
            // Reserved worker.
            return steal_loop(|| self.remote.steal());
        };
        if let Some(t) = local.pop() {
            return Some(t);
        }
        if let Some(t) = steal_loop(|| self.injector.steal_batch_and_pop(local)) {
            return Some(t);
        }
        if let Some(t) = steal_loop(|| self.remote.steal()) {
            return Some(t);
        }
        let n = self.stealers.len();
        for k in 1..n {
            let victim = &self.stealers[(index + k) % n];
            if let Some(t) = steal_loop(|| victim.steal_batch_and_pop(local)) {
                self.counters.add_steal();
                return Some(t);
            }
        }
        None
    }

    fn execute(&self, task: Arc<Task>) {
        self.running.fetch_add(1, Ordering::SeqCst);
        task.run();
        self.running.fetch_sub(1, Ordering::SeqCst);
    }

    fn sleep(&self, reserved: bool) {
        let mut g = self.lock.lock();
        self.sleepers.fetch_add(1, Ordering::SeqCst);
        if !self.has_work(reserved) && !self.shutdown.load(Ordering::SeqCst) {
            self.wakeup.wait_for(&mut g, Duration::from_millis(50));
        }
        self.sleepers.fetch_sub(1, Ordering::SeqCst);
    }

    /// Drops every queued task. Dropping a task may wake others, so repeat
    /// until the queues stay empty.
    fn clear_queues(&self) {
        loop {
            let mut any = false;
            while let Some(t) = steal_loop(|| self.injector.steal()) {
                drop(t);
                any = true;
            }
            while let Some(t) = steal_loop(|| self.remote.steal()) {
                drop(t);
                any = true;
            }
            for s in &self.stealers {
                while let Some(t) = steal_loop(|| s.steal()) {
                    drop(t);
                    any = true;
                }
            }
            if !any {
                break;
            }
        }
    }
}

fn steal_loop<T>(mut f: impl FnMut() -> Steal<T>) -> Option<T> {
    loop {
        match f() {
            Steal::Success(t) => return Some(t),
            Steal::Empty => return None,
            Steal::Retry => continue,
        }
    }
}

fn worker_main(pool: Arc<Pool>, index: usize, local: Option<Worker<Arc<Task>>>) {
    let reserved = local.is_none();
    CURRENT.with(|c| {
        *c.borrow_mut() = Some(WorkerCtx {
            pool: pool.clone(),
            index,
            local,
        })
    });
    while !pool.shutdown.load(Ordering::SeqCst) {
        let task = CURRENT.with(|c| {
            let ctx = c.borrow();
            let ctx = ctx.as_ref().unwrap();
            pool.find_task(ctx.index, ctx.local.as_ref())
        });
        match task {
            Some(t) => pool.execute(t),
            None => pool.sleep(reserved),
        }
    }
    // Leftover local tasks would keep the pool alive through a cycle.
    let ctx = CURRENT.with(|c| c.borrow_mut().take());
    if let Some(WorkerCtx {
        local: Some(local), ..
    }) = ctx
    {
        while local.pop().is_some() {}
    }
}

impl PoolHandle {
    pub(crate) fn shutdown(&mut self) {
        self.pool.shutdown.store(true, Ordering::SeqCst);
        {
            let _g = self.pool.lock.lock();
            self.pool.wakeup.notify_all();
        }
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
        self.pool.clear_queues();
    }
}

impl Drop for PoolHandle {
    fn drop(&mut self) {
        if !self.threads.is_empty() {
            self.shutdown();
        }
    }
}
