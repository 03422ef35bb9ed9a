use std::net::SocketAddr;
use std::time::Duration;

use super::{Result, RuntimeError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportKind {
    /// All localities share this process; parcels travel through in-memory
    /// queues, optionally delayed by `injected_latency`.
    Inproc,
    /// Length-prefixed binary frames over TCP.
    Socket(SocketConfig),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SocketConfig {
    /// Listen address of every locality, indexed by locality id. Empty means
    /// every locality is hosted here and binds an ephemeral loopback port.
    pub peers: Vec<SocketAddr>,
    /// Localities hosted by this process. Empty means all of them.
    pub hosted: Vec<u32>,
    pub connect_timeout: Duration,
}

impl SocketConfig {
    pub fn loopback() -> Self {
        Self {
            peers: Vec::new(),
            hosted: Vec::new(),
            connect_timeout: Duration::from_secs(10),
        }
    }

    /// One process per locality: this process hosts `rank` only.
    pub fn rank(rank: u32, peers: Vec<SocketAddr>) -> Self {
        Self {
            peers,
            hosted: vec![rank],
            connect_timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RuntimeConfig {
    pub localities: usize,
    pub workers_per_locality: usize,
    /// Workers per locality that only run incoming remote actions.
    pub reserved_remote_workers: usize,
    /// A batch to one destination is sent once it holds this many parcels.
    pub coalesce_max_messages: usize,
    /// ... or once its oldest parcel has waited this long.
    pub coalesce_max_delay: Duration,
    pub transport: TransportKind,
    /// Added to every cross-locality delivery (inproc only).
    pub injected_latency: Duration,
    pub collective_timeout: Duration,
    pub drain_timeout: Duration,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self {
            localities: 1,
            workers_per_locality: 4,
            reserved_remote_workers: 1,
            coalesce_max_messages: 16,
            coalesce_max_delay: Duration::from_micros(200),
            transport: TransportKind::Inproc,
            injected_latency: Duration::ZERO,
            collective_timeout: Duration::from_secs(120),
            drain_timeout: Duration::from_secs(10),
        }
    }
}

impl RuntimeConfig {
    pub fn with_localities(mut self, localities: usize) -> Self {
        self.localities = localities;
        self
    }

    pub fn with_workers(mut self, workers: usize, reserved: usize) -> Self {
        self.workers_per_locality = workers;
        self.reserved_remote_workers = reserved;
        self
    }

    pub fn with_coalescing(mut self, max_messages: usize, max_delay: Duration) -> Self {
        self.coalesce_max_messages = max_messages;
        self.coalesce_max_delay = max_delay;
        self
    }

    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.injected_latency = latency;
        self
    }

    pub fn with_transport(mut self, transport: TransportKind) -> Self {
        self.transport = transport;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(RuntimeError::Config(m));
        if self.localities == 0 || self.localities > u16::MAX as usize {
            return err(format!("localities must be in [1, 65535], got {}", self.localities));
        }
        if self.workers_per_locality == 0 {
            return err("workers_per_locality must be >= 1".into());
        }
        if self.reserved_remote_workers >= self.workers_per_locality {
            return err(format!(
                "reserved_remote_workers ({}) must be < workers_per_locality ({})",
                self.reserved_remote_workers, self.workers_per_locality
            ));
        }
        if self.coalesce_max_messages == 0 {
            return err("coalesce_max_messages must be >= 1".into());
        }
        if let TransportKind::Socket(sock) = &self.transport {
            if !self.injected_latency.is_zero() {
                return err("injected latency is only supported by the inproc transport".into());
            }
            if !sock.peers.is_empty() && sock.peers.len() != self.localities {
                return err(format!(
                    "{} peer addresses for {} localities",
                    sock.peers.len(),
                    self.localities
                ));
            }
            if sock.peers.is_empty() && !sock.hosted.is_empty() {
                return err("hosting a subset of localities requires peer addresses".into());
            }
            if let Some(&r) = sock.hosted.iter().find(|&&r| r as usize >= self.localities) {
                return err(format!("hosted locality {r} out of range"));
            }
        }
        Ok(())
    }

    /// Locality ids this process runs.
    pub fn hosted_localities(&self) -> Vec<u32> {
        match &self.transport {
            TransportKind::Socket(s) if !s.hosted.is_empty() => {
                let mut h = s.hosted.clone();
                h.sort_unstable();
                h.dedup();
                h
            }
            _ => (0..self.localities as u32).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        RuntimeConfig::default().validate().unwrap();
        assert!(RuntimeConfig::default().with_workers(2, 2).validate().is_err());
        assert!(RuntimeConfig::default().with_localities(0).validate().is_err());
        assert!(RuntimeConfig::default()
            .with_coalescing(0, Duration::ZERO)
            .validate()
            .is_err());
        let sock = RuntimeConfig::default()
            .with_transport(TransportKind::Socket(SocketConfig::loopback()))
            .with_latency(Duration::from_millis(1));
        assert!(sock.validate().is_err());
    }
}
