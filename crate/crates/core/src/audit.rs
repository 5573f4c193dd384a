//! Invariant checks by replaying an event log.
//!
//! The replay rebuilds each node's buffer from creations, completed
//! transfers, drops and expiries, and tracks live links and the spread
//! budget of every encounter direction. It relies only on the log, so it can
//! audit logs read back from disk.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::events::{DropReason, EventKind, EventLog, Phase};
use crate::time::SimTime;
use crate::{MessageId, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rule {
    /// Buffered bytes exceed capacity once a timestamp's events are applied.
    BufferCapacity,
    /// A delivery after the message's expiry.
    DeliveryAfterTtl,
    /// More spread transfers in one encounter direction than its limit.
    SpreadLimit,
    /// A CenterMass spread that does not move the message closer.
    NoProgress,
    /// A node forwards, or is sent, a message it knows was delivered.
    AckHygiene,
    /// The sender does not hold the message it starts sending.
    NotHeld,
    /// A transfer on a link that is not up.
    DeadLink,
    /// A completion or abort with no matching start, or a link event that
    /// does not match the link state.
    Unmatched,
    /// Events out of order.
    Order,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub time: SimTime,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}: {}", self.time, self.rule, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AuditReport {
    pub violations: Vec<Violation>,
    pub events: usize,
    pub spread_transfers: usize,
    pub progress_checks: usize,
    pub deliveries: usize,
    pub capacity_checks: usize,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, rule: Rule) -> usize {
        self.violations.iter().filter(|v| v.rule == rule).count()
    }
}

struct MsgInfo {
    dst: NodeId,
    size: u64,
    expires_at: SimTime,
}

#[derive(Default)]
struct Encounter {
    spread: [usize; 2],
    limit: [Option<usize>; 2],
}

/// Replays `log` against a buffer capacity of `capacity` bytes.
pub fn audit_log(log: &EventLog, capacity: u64) -> AuditReport {
    let mut rep = AuditReport { events: log.events.len(), ..AuditReport::default() };
    let mut msgs: BTreeMap<MessageId, MsgInfo> = BTreeMap::new();
    let mut held: BTreeMap<NodeId, BTreeMap<MessageId, u64>> = BTreeMap::new();
    let mut acked: BTreeSet<(NodeId, MessageId)> = BTreeSet::new();
    let mut links: BTreeMap<(NodeId, NodeId), Encounter> = BTreeMap::new();
    let mut active: BTreeSet<(MessageId, NodeId, NodeId)> = BTreeSet::new();
    let mut touched: BTreeSet<NodeId> = BTreeSet::new();
    let centermass = log.meta.router.starts_with("centermass");

    let fail = |rep: &mut AuditReport, time, rule, detail: String| rep.violations.push(Violation { time, rule, detail });

    for (i, ev) in log.events.iter().enumerate() {
        let t = ev.time;
        if i > 0 && log.events[i - 1].order(ev) == std::cmp::Ordering::Greater {
            fail(&mut rep, t, Rule::Order, format!("event {i} sorts before its predecessor"));
        }
        match ev.kind {
            EventKind::MessageCreated { msg, src, dst, size, ttl } => {
                msgs.insert(msg, MsgInfo { dst, size, expires_at: t.saturating_add(ttl) });
                held.entry(src).or_default().insert(msg, size);
                touched.insert(src);
            }
            EventKind::LinkUp { a, b } => {
                if links.insert((a, b), Encounter::default()).is_some() {
                    fail(&mut rep, t, Rule::Unmatched, format!("link {a}-{b} up twice"));
                }
            }
            EventKind::LinkDown { a, b } => {
                if links.remove(&(a, b)).is_none() {
                    fail(&mut rep, t, Rule::Unmatched, format!("link {a}-{b} down while not up"));
                }
            }
            EventKind::TransferStarted { msg, from, to, phase, limit, progress } => {
                let key = (from.min(to), from.max(to));
                let d = usize::from(from > to);
                let Some(enc) = links.get_mut(&key) else {
                    fail(&mut rep, t, Rule::DeadLink, format!("msg {msg} sent {from}->{to} without a link"));
                    continue;
                };
                if phase == Phase::Spread {
                    rep.spread_transfers += 1;
                    enc.spread[d] += 1;
                    if enc.limit[d].is_none() {
                        enc.limit[d] = limit;
                    }
                    if enc.limit[d] != limit {
                        fail(&mut rep, t, Rule::SpreadLimit, format!("limit changed within encounter {from}->{to}"));
                    }
                    if let Some(l) = limit {
                        if enc.spread[d] > l {
                            fail(&mut rep, t, Rule::SpreadLimit, format!("spread {} > limit {l} on {from}->{to}", enc.spread[d]));
                        }
                    }
                    if centermass {
                        if let Some(p) = progress {
                            rep.progress_checks += 1;
                            if !(p.receiver_to_dst < p.sender_to_dst) {
                                fail(
                                    &mut rep,
                                    t,
                                    Rule::NoProgress,
                                    format!("msg {msg} {from}->{to}: {} !< {}", p.receiver_to_dst, p.sender_to_dst),
                                );
                            }
                        }
                    }
                }
                if !held.get(&from).is_some_and(|h| h.contains_key(&msg)) {
                    fail(&mut rep, t, Rule::NotHeld, format!("node {from} sends msg {msg} it does not hold"));
                }
                if acked.contains(&(from, msg)) || acked.contains(&(to, msg)) {
                    fail(&mut rep, t, Rule::AckHygiene, format!("msg {msg} {from}->{to} after its ACK was known"));
                }
                active.insert((msg, from, to));
            }
            EventKind::TransferCompleted { msg, from, to } => {
                if !active.remove(&(msg, from, to)) {
                    fail(&mut rep, t, Rule::Unmatched, format!("completion of unstarted {msg} {from}->{to}"));
                }
                if let Some(info) = msgs.get(&msg) {
                    if to != info.dst {
                        held.entry(to).or_default().insert(msg, info.size);
                        touched.insert(to);
                    }
                }
            }
            EventKind::TransferAborted { msg, from, to, .. } => {
                if !active.remove(&(msg, from, to)) {
                    fail(&mut rep, t, Rule::Unmatched, format!("abort of unstarted {msg} {from}->{to}"));
                }
            }
            EventKind::MessageDelivered { msg, to, .. } => {
                rep.deliveries += 1;
                if let Some(info) = msgs.get(&msg) {
                    if t > info.expires_at {
                        fail(&mut rep, t, Rule::DeliveryAfterTtl, format!("msg {msg} delivered after {}", info.expires_at));
                    }
                    if to != info.dst {
                        fail(&mut rep, t, Rule::Unmatched, format!("msg {msg} delivered to {to}, not its destination"));
                    }
                }
                acked.insert((to, msg));
            }
            EventKind::MessageDropped { msg, node, reason } => {
                if let Some(h) = held.get_mut(&node) {
                    h.remove(&msg);
                }
                if reason == DropReason::Acked {
                    acked.insert((node, msg));
                }
            }
            EventKind::MessageExpired { msg, node } => {
                if let Some(h) = held.get_mut(&node) {
                    h.remove(&msg);
                }
            }
        }

        let group_ends = log.events.get(i + 1).is_none_or(|next| next.time != t);
        if group_ends {
            for n in std::mem::take(&mut touched) {
                rep.capacity_checks += 1;
                let used: u64 = held.get(&n).map_or(0, |h| h.values().sum());
                if used > capacity {
                    fail(&mut rep, t, Rule::BufferCapacity, format!("node {n} holds {used} > {capacity} bytes"));
                }
            }
        }
    }
    rep
}
