use std::sync::{Arc, OnceLock, Weak};
use std::time::{Duration, Instant};

use super::locality::{LocalityId, LocalityInner};
use super::timer::Timer;
use super::{Result, RuntimeError};

pub(crate) trait Transport: Send + Sync {
    /// Hands one wire message (a run of frames) to `dest`.
    fn send(&self, from: LocalityId, dest: LocalityId, bytes: Vec<u8>) -> Result<()>;
    fn shutdown(&self);
}

/// Maps destination ids to the localities hosted by this process.
#[derive(Default)]
pub(crate) struct Router {
    slots: OnceLock<Vec<Option<Weak<LocalityInner>>>>,
}

impl Router {
    pub(crate) fn install(&self, slots: Vec<Option<Weak<LocalityInner>>>) {
        let _ = self.slots.set(slots);
    }

    /// Blocks until [`Router::install`] ran; socket readers may start first.
    pub(crate) fn deliver(&self, dest: LocalityId, bytes: Vec<u8>) -> Result<()> {
        let target = self
            .slots
            .wait()
            .get(dest as usize)
            .and_then(|w| w.as_ref()?.upgrade());
        match target {
            Some(loc) => {
                loc.deliver(bytes);
                Ok(())
            }
            None => Err(RuntimeError::Transport(format!(
                "locality {dest} is not hosted by this process"
            ))),
        }
    }
}

/// All localities in one process. Without injected latency a message is
/// queued on the destination directly from the sending thread.
pub(crate) struct Inproc {
    router: Arc<Router>,
    latency: Duration,
    timer: Arc<Timer>,
}

impl Inproc {
    pub(crate) fn new(router: Arc<Router>, latency: Duration, timer: Arc<Timer>) -> Self {
        Self {
            router,
            latency,
            timer,
        }
    }
}

impl Transport for Inproc {
    fn send(&self, _from: LocalityId, dest: LocalityId, bytes: Vec<u8>) -> Result<()> {
        if self.latency.is_zero() {
            return self.router.deliver(dest, bytes);
        }
        let router = self.router.clone();
        self.timer.schedule(Instant::now() + self.latency, move || {
            let _ = router.deliver(dest, bytes);
        });
        Ok(())
    }

    fn shutdown(&self) {}
}
