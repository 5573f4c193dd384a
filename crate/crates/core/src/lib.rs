//! Deterministic delay-tolerant network simulator.
//!
//! Nodes move under random waypoint mobility, sample their own position with
//! optional uniform noise, and exchange messages over short-range links under
//! one of four routers: Centroid, CenterMass, Vector and Epidemic. Runs are
//! reproducible from a single seed and produce an ordered event log from
//! which metrics, the contact-graph oracle and invariant audits are derived.

pub mod audit;
pub mod buffer;
pub mod config;
pub mod error;
pub mod events;
pub mod harness;
pub mod metrics;
pub mod mobility;
pub mod oracle;
pub mod positioning;
pub mod routers;
pub mod sim;
pub mod time;

pub use config::{parse_config, GroupConfig, SimConfig, TrafficConfig};
pub use error::{Result, SimError};
pub use events::{EventKind, EventLog, SimEvent};
pub use routers::{RouterKind, RouterSpec};
pub use sim::{run, RunOutput, World};
pub use time::SimTime;

pub type NodeId = u32;
pub type MessageId = u64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub id: MessageId,
    pub src: NodeId,
    pub dst: NodeId,
    pub size_bytes: u64,
    pub created_at: SimTime,
    pub ttl: SimTime,
}

impl Message {
    pub fn expires_at(&self) -> SimTime {
        self.created_at.saturating_add(self.ttl)
    }
}
