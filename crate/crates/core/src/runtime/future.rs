//! Single-assignment futures and promises.
//!
//! A [`Future`] settles exactly once, either with a value or a
//! [`RuntimeError`]. It can be awaited from runtime tasks (suspending the
//! task, not the worker), retrieved with a blocking [`Future::get`], or
//! chained with [`Future::then`].

use std::any::Any;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::pin::Pin;
use std::sync::Arc;
use std::task::{Context, Poll, Waker};
use std::time::Duration;

use parking_lot::{Condvar, Mutex};

use super::pool;
use super::RuntimeError;

pub type Outcome<T> = Result<T, RuntimeError>;

type Continuation<T> = Box<dyn FnOnce(Outcome<T>) + Send>;

enum Slot<T> {
    Pending {
        waker: Option<Waker>,
        continuation: Option<Continuation<T>>,
    },
    Ready(Outcome<T>),
    Consumed,
}

struct Shared<T> {
    slot: Mutex<Slot<T>>,
    ready: Condvar,
}

/// Read side of a single-assignment cell.
#[must_use = "futures do nothing unless awaited, retrieved or chained"]
pub struct Future<T> {
    shared: Arc<Shared<T>>,
}

/// Write side of a single-assignment cell. Dropping an unset promise fails
/// its future with [`RuntimeError::BrokenPromise`].
pub struct Promise<T> {
    shared: Option<Arc<Shared<T>>>,
}

pub fn channel<T>() -> (Promise<T>, Future<T>) {
    let shared = Arc::new(Shared {
        slot: Mutex::new(Slot::Pending {
            waker: None,
            continuation: None,
        }),
        ready: Condvar::new(),
    });
    (
        Promise {
            shared: Some(shared.clone()),
        },
        Future { shared },
    )
}

pub(crate) fn panic_message(payload: Box<dyn Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

fn settle<T>(shared: &Shared<T>, outcome: Outcome<T>) {
    let mut slot = shared.slot.lock();
    match std::mem::replace(&mut *slot, Slot::Consumed) {
        Slot::Pending {
            waker,
            continuation,
        } => {
            if let Some(cont) = continuation {
                drop(slot);
                cont(outcome);
                return;
            }
            *slot = Slot::Ready(outcome);
            drop(slot);
            shared.ready.notify_all();
            if let Some(w) = waker {
                w.wake();
            }
        }
        // A promise is consumed by `set`, so a second settle cannot happen.
        _ => unreachable!("future settled twice"),
    }
}

impl<T> Promise<T> {
    pub fn set(mut self, outcome: Outcome<T>) {
        let shared = self.shared.take().expect("promise already used");
        settle(&shared, outcome);
    }

    pub fn set_value(self, value: T) {
        self.set(Ok(value));
    }

    pub fn fail(self, error: RuntimeError) {
        self.set(Err(error));
    }
}

impl<T> Drop for Promise<T> {
    fn drop(&mut self) {
        if let Some(shared) = self.shared.take() {
            settle(&shared, Err(RuntimeError::BrokenPromise));
        }
    }
}

impl<T: Send + 'static> Future<T> {
    pub fn ready(value: T) -> Self {
        let (p, f) = channel();
        p.set_value(value);
        f
    }

    pub fn failed(error: RuntimeError) -> Self {
        let (p, f) = channel();
        p.fail(error);
        f
    }

    pub fn is_ready(&self) -> bool {
        !matches!(*self.shared.slot.lock(), Slot::Pending { .. })
    }

    /// Attaches `f` to run exactly once with this future's value. A failure
    /// skips `f` and propagates; a panic inside `f` fails the result.
    pub fn then<U, F>(self, f: F) -> Future<U>
    where
        U: Send + 'static,
        F: FnOnce(T) -> U + Send + 'static,
    {
        let (promise, next) = channel();
        self.on_settle(move |outcome| match outcome {
            Ok(v) => promise.set(
                catch_unwind(AssertUnwindSafe(|| f(v)))
                    .map_err(|p| RuntimeError::TaskPanicked(panic_message(p))),
            ),
            Err(e) => promise.fail(e),
        });
        next
    }

    /// Runs `cont` with the outcome, inline if already settled, otherwise on
    /// the thread that settles it.
    fn on_settle(self, cont: impl FnOnce(Outcome<T>) + Send + 'static) {
        let mut slot = self.shared.slot.lock();
        match std::mem::replace(&mut *slot, Slot::Consumed) {
            Slot::Ready(outcome) => {
                drop(slot);
                cont(outcome);
            }
            Slot::Pending { waker, .. } => {
                *slot = Slot::Pending {
                    waker,
                    continuation: Some(Box::new(cont)),
                };
            }
            Slot::Consumed => unreachable!("future consumed twice"),
        }
    }

    /// Blocks until the value is available. On a runtime worker thread the
    /// worker keeps executing other queued tasks while it waits.
    pub fn get(self) -> Outcome<T> {
        loop {
            {
                let mut slot = self.shared.slot.lock();
                if let Slot::Ready(_) = &*slot {
                    if let Slot::Ready(v) = std::mem::replace(&mut *slot, Slot::Consumed) {
                        return v;
                    }
                }
                if !pool::on_worker_thread() {
                    self.shared
                        .ready
                        .wait_for(&mut slot, Duration::from_millis(50));
                    continue;
                }
            }
            if !pool::help_one() {
                let mut slot = self.shared.slot.lock();
                if matches!(*slot, Slot::Pending { .. }) {
                    self.shared
                        .ready
                        .wait_for(&mut slot, Duration::from_micros(200));
                }
            }
        }
    }
}

impl<T: Send + 'static> Future<Outcome<T>> {
    /// Merges a nested failure into the outer one.
    pub fn flatten(self) -> Future<T> {
        let (promise, next) = channel();
        self.on_settle(move |outcome| promise.set(outcome.and_then(|inner| inner)));
        next
    }
}

impl<T> std::future::Future for Future<T> {
    type Output = Outcome<T>;

    fn poll(self: Pin<&mut Self>, cx: &mut Context<'_>) -> Poll<Outcome<T>> {
        let mut slot = self.shared.slot.lock();
        match &mut *slot {
            Slot::Pending { waker, .. } => {
                match waker {
                    Some(w) if w.will_wake(cx.waker()) => {}
                    _ => *waker = Some(cx.waker().clone()),
                }
                Poll::Pending
            }
            Slot::Ready(_) => match std::mem::replace(&mut *slot, Slot::Consumed) {
                Slot::Ready(v) => Poll::Ready(v),
                _ => unreachable!(),
            },
            Slot::Consumed => panic!("future polled after completion"),
        }
    }
}

/// Awaits every future, then reports all values or the collected failures.
pub async fn wait_all<T>(futures: Vec<Future<T>>) -> Outcome<Vec<T>> {
    let mut values = Vec::with_capacity(futures.len());
    let mut errors = Vec::new();
    for f in futures {
        match f.await {
            Ok(v) => values.push(v),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(values)
    } else {
        Err(RuntimeError::aggregate(errors))
    }
}

/// Blocking counterpart of [`wait_all`] for driver threads.
pub fn wait_all_blocking<T: Send + 'static>(futures: Vec<Future<T>>) -> Outcome<Vec<T>> {
    let mut values = Vec::with_capacity(futures.len());
    let mut errors = Vec::new();
    for f in futures {
        match f.get() {
            Ok(v) => values.push(v),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(values)
    } else {
        Err(RuntimeError::aggregate(errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn then_on_ready() {
        assert_eq!(Future::ready(2).then(|x| x + 1).get().unwrap(), 3);
    }

    #[test]
    fn chain_of_thens_in_order() {
        let (p, f) = channel::<Vec<u32>>();
        let mut f = f;
        for i in 0..100 {
            f = f.then(move |mut v| {
                v.push(i);
                v
            });
        }
        p.set_value(Vec::new());
        assert_eq!(f.get().unwrap(), (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn then_skips_on_failure() {
        let calls = Arc::new(AtomicUsize::new(0));
        let c = calls.clone();
        let f = Future::<u32>::failed(RuntimeError::Other("boom".into())).then(move |x| {
            c.fetch_add(1, Ordering::SeqCst);
            x
        });
        assert!(matches!(f.get(), Err(RuntimeError::Other(_))));
        assert_eq!(calls.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn continuation_panic_fails_future() {
        let f = Future::ready(1).then(|_: i32| -> i32 { panic!("nope") });
        assert!(matches!(f.get(), Err(RuntimeError::TaskPanicked(m)) if m == "nope"));
    }

    #[test]
    fn dropped_promise_breaks_future() {
        let (p, f) = channel::<u8>();
        drop(p);
        assert!(matches!(f.get(), Err(RuntimeError::BrokenPromise)));
    }

    #[test]
    fn get_blocks_until_set_from_other_thread() {
        let (p, f) = channel();
        let h = std::thread::spawn(move || {
            std::thread::sleep(Duration::from_millis(20));
            p.set_value(9u8);
        });
        assert_eq!(f.get().unwrap(), 9);
        h.join().unwrap();
    }

    #[test]
    fn wait_all_collects_failures_after_all_settle() {
        assert!(wait_all_blocking(Vec::<Future<u8>>::new()).unwrap().is_empty());
        let fs = vec![
            Future::ready(1),
            Future::failed(RuntimeError::Other("a".into())),
            Future::ready(3),
        ];
        match wait_all_blocking(fs) {
            Err(RuntimeError::Other(m)) => assert_eq!(m, "a"),
            other => panic!("unexpected {other:?}"),
        }
        let fs = vec![
            Future::<u8>::failed(RuntimeError::Other("a".into())),
            Future::failed(RuntimeError::Other("b".into())),
        ];
        assert!(matches!(wait_all_blocking(fs), Err(RuntimeError::Aggregate(v)) if v.len() == 2));
    }
}
