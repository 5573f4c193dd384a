//! Encounter-driven routing protocols.
//!
//! Every router answers the same question when a link comes up: given what
//! the host holds and what the peer advertised, which messages go across and
//! in what order. The answer is a [`TransferPlan`] with four phases:
//!
//! 1. purge messages the peer reports as acknowledged,
//! 2. messages addressed to the peer,
//! 3. messages addressed to one of the peer's current neighbors,
//! 4. a spread list capped by the per-encounter message limit.
//!
//! Phases 2 and 3 never count against the limit. The protocols differ only
//! in how they size the limit and which spread candidates they admit.

mod ack;
mod centermass;
mod centroid;
mod epidemic;
mod vector;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub use ack::{record_delivery_ack, AckSet};
pub use centermass::{centermass_forward_filter, centermass_on_encounter, merge_centroid_tables, CentroidTable, TableEntry};
pub use centroid::{centroid_fraction, centroid_on_encounter, message_limit};
pub use epidemic::epidemic_on_encounter;
pub use vector::{vector_fraction, vector_on_encounter, MIN_SPEED};

use crate::error::SimError;
use crate::events::Progress;
use crate::positioning::{CentroidState, Position, Velocity};
use crate::time::SimTime;
use crate::{MessageId, NodeId};

/// Amplitude used by the `-noisy` router variants when the config leaves
/// noise at zero.
pub const DEFAULT_NOISE_M: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RouterKind {
    Centroid,
    CenterMass,
    Vector,
    Epidemic,
}

impl RouterKind {
    pub const ALL: [RouterKind; 4] = [RouterKind::Centroid, RouterKind::CenterMass, RouterKind::Vector, RouterKind::Epidemic];

    pub fn as_str(&self) -> &'static str {
        match self {
            RouterKind::Centroid => "centroid",
            RouterKind::CenterMass => "centermass",
            RouterKind::Vector => "vector",
            RouterKind::Epidemic => "epidemic",
        }
    }
}

/// A router name as used in configs and on the command line, e.g.
/// `centermass` or `vector-noisy`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RouterSpec {
    pub kind: RouterKind,
    pub noisy: bool,
}

impl RouterSpec {
    pub const fn new(kind: RouterKind, noisy: bool) -> Self {
        RouterSpec { kind, noisy }
    }

    /// Noise amplitude this router's position samples see under a config
    /// whose own amplitude is `configured_m`.
    pub fn effective_noise(&self, configured_m: f64) -> f64 {
        if self.noisy && configured_m == 0.0 {
            DEFAULT_NOISE_M
        } else {
            configured_m
        }
    }
}

impl fmt::Display for RouterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.as_str())?;
        if self.noisy {
            f.write_str("-noisy")?;
        }
        Ok(())
    }
}

impl FromStr for RouterSpec {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let (base, noisy) = match lower.strip_suffix("-noisy") {
            Some(b) => (b, true),
            None => (lower.as_str(), false),
        };
        let kind = match base {
            "centroid" => RouterKind::Centroid,
            "centermass" => RouterKind::CenterMass,
            "vector" => RouterKind::Vector,
            "epidemic" => RouterKind::Epidemic,
            _ => return Err(SimError::UnknownRouter(s.to_string())),
        };
        Ok(RouterSpec { kind, noisy })
    }
}

/// What a router knows about one message it is carrying.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeldMessage {
    pub id: MessageId,
    pub dst: NodeId,
    pub created_at: SimTime,
}

/// Per-node routing state.
#[derive(Clone, Debug)]
pub struct NodeRouting {
    pub id: NodeId,
    pub centroid: CentroidState,
    pub last_sample: Option<Position>,
    pub velocity: Option<Velocity>,
    pub table: CentroidTable,
    pub acks: AckSet,
}

impl NodeRouting {
    pub fn new(id: NodeId) -> Self {
        NodeRouting {
            id,
            centroid: CentroidState::new(),
            last_sample: None,
            velocity: None,
            table: CentroidTable::new(),
            acks: AckSet::new(),
        }
    }

    /// Feeds one position sample taken `interval_s` after the previous one.
    pub fn observe_sample(&mut self, sample: Position, interval_s: f64) {
        self.centroid.update(sample);
        if let Some(prev) = self.last_sample {
            self.velocity = Some(crate::positioning::estimate_velocity(prev, sample, interval_s));
        }
        self.last_sample = Some(sample);
    }
}

/// What a node advertises to a peer at the start of an encounter.
#[derive(Clone, Debug, PartialEq)]
pub struct EncounterSummary {
    pub node: NodeId,
    pub centroid: Option<Position>,
    pub velocity: Option<Velocity>,
    pub messages: BTreeSet<MessageId>,
    pub acks: BTreeSet<MessageId>,
    /// Current neighbors, excluding the node it is exchanging with.
    pub neighbors: BTreeSet<NodeId>,
    /// Only filled in by CenterMass nodes.
    pub centroid_table: Option<CentroidTable>,
}

impl EncounterSummary {
    pub fn new(node: NodeId) -> Self {
        EncounterSummary {
            node,
            centroid: None,
            velocity: None,
            messages: BTreeSet::new(),
            acks: BTreeSet::new(),
            neighbors: BTreeSet::new(),
            centroid_table: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpreadItem {
    pub msg: MessageId,
    pub progress: Option<Progress>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TransferPlan {
    pub purge: Vec<MessageId>,
    pub direct: Vec<MessageId>,
    pub neighbor: Vec<MessageId>,
    pub spread: Vec<SpreadItem>,
    /// Cap on the spread phase; `None` means unlimited.
    pub limit: Option<usize>,
}

impl TransferPlan {
    pub fn is_empty(&self) -> bool {
        self.purge.is_empty() && self.direct.is_empty() && self.neighbor.is_empty() && self.spread.is_empty()
    }

    /// Number of transfers the plan asks for.
    pub fn transfer_count(&self) -> usize {
        self.direct.len() + self.neighbor.len() + self.spread.len()
    }
}

/// Decision of a spread-phase filter for one message.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Gate {
    Allow(Option<Progress>),
    Deny,
}

/// Builds the four-phase plan. `skip` hides messages already offered during
/// this encounter; `limit` is the spread budget still available.
pub(crate) fn assemble_plan(
    held: &[HeldMessage],
    peer: &EncounterSummary,
    limit: Option<usize>,
    skip: &dyn Fn(MessageId) -> bool,
    mut gate: impl FnMut(&HeldMessage) -> Gate,
) -> TransferPlan {
    let mut plan = TransferPlan { limit, ..TransferPlan::default() };
    let mut live: Vec<&HeldMessage> = Vec::with_capacity(held.len());
    for m in held {
        if peer.acks.contains(&m.id) {
            plan.purge.push(m.id);
        } else {
            live.push(m);
        }
    }
    live.sort_by_key(|m| (m.created_at, m.id));

    let mut spread_budget = limit.unwrap_or(usize::MAX);
    for m in live {
        if skip(m.id) || peer.messages.contains(&m.id) {
            continue;
        }
        if m.dst == peer.node {
            plan.direct.push(m.id);
        } else if peer.neighbors.contains(&m.dst) {
            plan.neighbor.push(m.id);
        } else if spread_budget > 0 {
            if let Gate::Allow(progress) = gate(m) {
                plan.spread.push(SpreadItem { msg: m.id, progress });
                spread_budget -= 1;
            }
        }
    }
    plan
}

/// Count of held messages that survive the peer's ACK list, the queue length
/// the limit is taken against.
pub(crate) fn queue_length(held: &[HeldMessage], peer: &EncounterSummary) -> usize {
    held.iter().filter(|m| !peer.acks.contains(&m.id)).count()
}

/// Runs the opening exchange of an encounter for `kind`, updating the
/// host's routing state (distance maximum, centroid table) as that protocol
/// requires.
pub fn on_encounter(
    kind: RouterKind,
    host: &mut NodeRouting,
    held: &[HeldMessage],
    peer: &EncounterSummary,
    now: SimTime,
) -> TransferPlan {
    match kind {
        RouterKind::Centroid => centroid_on_encounter(host, held, peer),
        RouterKind::CenterMass => centermass_on_encounter(host, held, peer, now),
        RouterKind::Vector => vector_on_encounter(host, held, peer),
        RouterKind::Epidemic => epidemic_on_encounter(held, peer),
    }
}

/// Re-plans an ongoing encounter after state changed on either side. The
/// limit fixed at the opening exchange is not recomputed; `remaining` is what
/// is left of it.
pub fn continue_encounter(
    kind: RouterKind,
    host: &NodeRouting,
    held: &[HeldMessage],
    peer: &EncounterSummary,
    remaining: Option<usize>,
    skip: &dyn Fn(MessageId) -> bool,
) -> TransferPlan {
    match kind {
        RouterKind::CenterMass => {
            assemble_plan(held, peer, remaining, skip, |m| centermass::gate(host, peer, m))
        }
        _ => assemble_plan(held, peer, remaining, skip, |_| Gate::Allow(None)),
    }
}
