use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

macro_rules! counters {
    ($($field:ident),* $(,)?) => {
        #[derive(Debug, Default)]
        pub(crate) struct Counters {
            $(pub(crate) $field: AtomicU64,)*
        }

        /// Point-in-time snapshot of one locality's counters.
        #[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
        pub struct Metrics {
            pub locality: u32,
            $(pub $field: u64,)*
        }

        impl Counters {
            pub(crate) fn snapshot(&self, locality: u32) -> Metrics {
                Metrics {
                    locality,
                    $($field: self.$field.load(Ordering::Relaxed),)*
                }
            }
        }

        impl Metrics {
            /// `(name, value)` pairs in declaration order.
            pub fn fields(&self) -> Vec<(&'static str, u64)> {
                vec![$((stringify!($field), self.$field),)*]
            }
        }
    };
}

counters!(
    tasks_executed,
    steals,
    parcels_sent,
    parcels_received,
    wire_messages_sent,
    bytes_sent,
    bytes_received,
    remote_actions_served,
    actions_invoked,
    collectives,
    graph_storage_bytes,
    dropped_parcels,
);

impl Counters {
    pub(crate) fn add_task_executed(&self) {
        self.tasks_executed.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn add_steal(&self) {
        self.steals.fetch_add(1, Ordering::Relaxed);
    }
}

pub(crate) fn bump(counter: &AtomicU64, n: u64) {
    counter.fetch_add(n, Ordering::Relaxed);
}

impl Metrics {
    /// Flat `locality.<id>.<name>=<value>` lines.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for (name, value) in self.fields() {
            let _ = writeln!(out, "locality.{}.{}={}", self.locality, name, value);
        }
        out
    }

    /// Element-wise sum over localities.
    pub fn sum<'a>(all: impl IntoIterator<Item = &'a Metrics>) -> Metrics {
        let mut total = Metrics::default();
        for m in all {
            total.tasks_executed += m.tasks_executed;
            total.steals += m.steals;
            total.parcels_sent += m.parcels_sent;
            total.parcels_received += m.parcels_received;
            total.wire_messages_sent += m.wire_messages_sent;
            total.bytes_sent += m.bytes_sent;
            total.bytes_received += m.bytes_received;
            total.remote_actions_served += m.remote_actions_served;
            total.actions_invoked += m.actions_invoked;
            total.collectives += m.collectives;
            total.graph_storage_bytes += m.graph_storage_bytes;
            total.dropped_parcels += m.dropped_parcels;
        }
        total
    }

    /// Counter-wise difference `self - before`, saturating at zero.
    pub fn since(&self, before: &Metrics) -> Metrics {
        let mut out = self.clone();
        let pairs = [
            (&mut out.tasks_executed, before.tasks_executed),
            (&mut out.steals, before.steals),
            (&mut out.parcels_sent, before.parcels_sent),
            (&mut out.parcels_received, before.parcels_received),
            (&mut out.wire_messages_sent, before.wire_messages_sent),
            (&mut out.bytes_sent, before.bytes_sent),
            (&mut out.bytes_received, before.bytes_received),
            (&mut out.remote_actions_served, before.remote_actions_served),
            (&mut out.actions_invoked, before.actions_invoked),
            (&mut out.collectives, before.collectives),
            (&mut out.dropped_parcels, before.dropped_parcels),
        ];
        for (field, b) in pairs {
            *field = field.saturating_sub(b);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_dump_lists_every_counter() {
        let c = Counters::default();
        bump(&c.parcels_sent, 3);
        let m = c.snapshot(2);
        let kv = m.to_kv();
        assert!(kv.contains("locality.2.parcels_sent=3\n"));
        assert_eq!(kv.lines().count(), m.fields().len());
    }
}
