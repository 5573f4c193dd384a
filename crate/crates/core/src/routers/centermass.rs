use std::collections::BTreeMap;

use super::centroid::{encounter_fraction, message_limit};
use super::{assemble_plan, queue_length, EncounterSummary, Gate, HeldMessage, NodeRouting, TransferPlan};
use crate::events::Progress;
use crate::positioning::Position;
use crate::time::SimTime;
use crate::NodeId;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableEntry {
    pub centroid: Position,
    pub observed_at: SimTime,
}

/// Last known centroid of every node met directly or heard about.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CentroidTable {
    entries: BTreeMap<NodeId, TableEntry>,
}

impl CentroidTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, node: NodeId) -> Option<&TableEntry> {
        self.entries.get(&node)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &TableEntry)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }

    /// Inserts unless an entry at least as new is already present.
    pub fn observe(&mut self, node: NodeId, centroid: Position, at: SimTime) {
        match self.entries.get(&node) {
            Some(e) if e.observed_at >= at => {}
            _ => {
                self.entries.insert(node, TableEntry { centroid, observed_at: at });
            }
        }
    }
}

impl FromIterator<(NodeId, TableEntry)> for CentroidTable {
    fn from_iter<I: IntoIterator<Item = (NodeId, TableEntry)>>(iter: I) -> Self {
        CentroidTable { entries: iter.into_iter().collect() }
    }
}

/// Union of both tables; a node present in both keeps the newer entry, and
/// `mine` wins ties.
pub fn merge_centroid_tables(mine: &CentroidTable, theirs: &CentroidTable) -> CentroidTable {
    let mut out = mine.clone();
    for (node, e) in theirs.iter() {
        match out.entries.get(&node) {
            Some(cur) if cur.observed_at >= e.observed_at => {}
            _ => {
                out.entries.insert(node, *e);
            }
        }
    }
    out
}

/// True iff handing a message to the peer strictly reduces its centroid
/// distance to the destination.
pub fn centermass_forward_filter(own: Position, peer: Position, destination: Position) -> bool {
    peer.distance(&destination) < own.distance(&destination)
}

pub(super) fn gate(host: &NodeRouting, peer: &EncounterSummary, m: &HeldMessage) -> Gate {
    let (Some(own), Some(theirs)) = (host.centroid.centroid(), peer.centroid) else {
        return Gate::Allow(None);
    };
    let Some(dst) = host.table.get(m.dst) else {
        // Destination centroid unknown: spread as plain Centroid would.
        return Gate::Allow(None);
    };
    if centermass_forward_filter(own, theirs, dst.centroid) {
        Gate::Allow(Some(Progress {
            sender_to_dst: own.distance(&dst.centroid),
            receiver_to_dst: theirs.distance(&dst.centroid),
        }))
    } else {
        Gate::Deny
    }
}

/// Centroid-router exchange with the direction filter on the spread phase.
/// Merges the peer's centroid table and records the peer's own centroid as
/// of `now` before filtering.
pub fn centermass_on_encounter(
    host: &mut NodeRouting,
    held: &[HeldMessage],
    peer: &EncounterSummary,
    now: SimTime,
) -> TransferPlan {
    if let Some(theirs) = &peer.centroid_table {
        host.table = merge_centroid_tables(&host.table, theirs);
    }
    if let Some(c) = peer.centroid {
        host.table.observe(peer.node, c, now);
    }
    let fraction = encounter_fraction(host, peer);
    let limit = message_limit(fraction, queue_length(held, peer));
    assemble_plan(held, peer, Some(limit), &|_| false, |m| gate(host, peer, m))
}
