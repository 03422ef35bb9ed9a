//! Asynchronous many-task runtime: localities with work-stealing worker
//! pools, active-message parcels with coalescing, futures with
//! continuations, collectives and performance counters.

mod action;
mod coalesce;
mod collective;
mod config;
pub(crate) mod counters;
mod future;
mod locality;
mod pool;
mod system;
mod socket;
mod timer;
mod transport;
mod wire;

pub use action::{Action, ActionId, ActionTable};
pub use config::{RuntimeConfig, SocketConfig, TransportKind};
pub use counters::Metrics;
pub use future::{channel, wait_all, wait_all_blocking, Future, Outcome, Promise};
pub use locality::{GlobalId, Locality, LocalityId};
pub use system::{Runtime, RuntimeBuilder};
pub use wire::{decode_frames, encode_frame, Frame};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("invalid runtime configuration: {0}")]
    Config(String),
    #[error("task panicked: {0}")]
    TaskPanicked(String),
    #[error("promise dropped without a value")]
    BrokenPromise,
    #[error("action {0} is not registered")]
    UnregisteredAction(u32),
    #[error("duplicate action id {0}")]
    DuplicateAction(u32),
    #[error("locality {0} does not exist")]
    NoSuchLocality(u32),
    #[error("remote action failed: {0}")]
    Remote(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("serialization error: {0}")]
    Serialization(String),
    #[error("timed out: {0}")]
    Timeout(String),
    #[error("component {0} not found or of another type")]
    NoSuchComponent(u64),
    #[error("vertex {vertex} is not owned by locality {locality}")]
    NotLocal { vertex: usize, locality: u32 },
    #[error("{undelivered} parcels undelivered after drain timeout")]
    Undelivered { undelivered: u64 },
    #[error("runtime is shutting down")]
    ShuttingDown,
    #[error("{} of the awaited futures failed; first: {}", .0.len(), .0[0])]
    Aggregate(Vec<RuntimeError>),
    #[error("{0}")]
    Other(String),
}

impl RuntimeError {
    /// Collapses a list of failures; a single failure is returned as-is.
    pub fn aggregate(mut errors: Vec<RuntimeError>) -> Self {
        if errors.len() == 1 {
            errors.pop().unwrap()
        } else {
            RuntimeError::Aggregate(errors)
        }
    }
}

pub type Result<T, E = RuntimeError> = std::result::Result<T, E>;
