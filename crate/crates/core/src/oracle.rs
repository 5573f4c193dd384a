//! Offline best-case delivery from a run's contact trace.
//!
//! Contacts are treated as having unlimited capacity: a message present at
//! either end of a live contact is present at both ends at once. The
//! resulting earliest-arrival times bound what any online router can do on
//! the same trace.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::error::{Result, SimError};
use crate::events::{EventKind, EventLog};
use crate::metrics::MetricsReport;
use crate::time::SimTime;
use crate::{Message, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Contact {
    pub a: NodeId,
    pub b: NodeId,
    pub up_at: SimTime,
    pub down_at: SimTime,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ContactTrace {
    pub contacts: Vec<Contact>,
}

impl ContactTrace {
    pub fn new(contacts: Vec<Contact>) -> Self {
        ContactTrace { contacts }
    }

    pub fn len(&self) -> usize {
        self.contacts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contacts.is_empty()
    }
}

/// Pairs every LinkUp with the next LinkDown of the same pair. Links still
/// up when the log ends are closed at the run's end time.
pub fn extract_contact_trace(log: &EventLog) -> Result<ContactTrace> {
    let mut open: BTreeMap<(NodeId, NodeId), (usize, SimTime)> = BTreeMap::new();
    let mut contacts = Vec::new();
    let end = log.events.last().map_or(log.meta.duration, |e| e.time.max(log.meta.duration));
    for (i, ev) in log.events.iter().enumerate() {
        match ev.kind {
            EventKind::LinkUp { a, b } => {
                let key = (a.min(b), a.max(b));
                if open.insert(key, (contacts.len(), ev.time)).is_some() {
                    return Err(SimError::EventLog {
                        line: i + 1,
                        message: format!("LinkUp for already-open link {}-{}", key.0, key.1),
                    });
                }
                contacts.push(Contact { a: key.0, b: key.1, up_at: ev.time, down_at: end });
            }
            EventKind::LinkDown { a, b } => {
                let key = (a.min(b), a.max(b));
                let (idx, _) = open.remove(&key).ok_or_else(|| SimError::EventLog {
                    line: i + 1,
                    message: format!("LinkDown without LinkUp for {}-{}", key.0, key.1),
                })?;
                contacts[idx].down_at = ev.time;
            }
            _ => {}
        }
    }
    Ok(ContactTrace { contacts })
}

/// Earliest time `dst` can hold a message that `src` holds from `t0`, or
/// `None` if that cannot happen by `t0 + ttl`.
pub fn earliest_arrival(trace: &ContactTrace, src: NodeId, dst: NodeId, t0: SimTime, ttl: SimTime) -> Option<SimTime> {
    earliest_arrival_indexed(&Adjacency::new(trace), src, dst, t0, ttl)
}

struct Adjacency<'a> {
    by_node: BTreeMap<NodeId, Vec<&'a Contact>>,
}

impl<'a> Adjacency<'a> {
    fn new(trace: &'a ContactTrace) -> Self {
        let mut by_node: BTreeMap<NodeId, Vec<&Contact>> = BTreeMap::new();
        for c in &trace.contacts {
            by_node.entry(c.a).or_default().push(c);
            by_node.entry(c.b).or_default().push(c);
        }
        Adjacency { by_node }
    }
}

fn earliest_arrival_indexed(adj: &Adjacency<'_>, src: NodeId, dst: NodeId, t0: SimTime, ttl: SimTime) -> Option<SimTime> {
    if src == dst {
        return Some(t0);
    }
    let deadline = t0.saturating_add(ttl);
    let mut label: BTreeMap<NodeId, SimTime> = BTreeMap::from([(src, t0)]);
    let mut heap = BinaryHeap::from([Reverse((t0, src))]);
    while let Some(Reverse((t, u))) = heap.pop() {
        if label.get(&u).is_some_and(|&best| best < t) {
            continue;
        }
        if u == dst {
            return Some(t);
        }
        for c in adj.by_node.get(&u).into_iter().flatten() {
            if c.down_at < t {
                continue;
            }
            let v = if c.a == u { c.b } else { c.a };
            let arrival = c.up_at.max(t);
            if arrival > deadline {
                continue;
            }
            if label.get(&v).is_none_or(|&best| arrival < best) {
                label.insert(v, arrival);
                heap.push(Reverse((arrival, v)));
            }
        }
    }
    None
}

/// Messages created at or after `warmup`, in creation order.
pub fn messages_from_log(log: &EventLog, warmup: SimTime) -> Vec<Message> {
    log.events
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::MessageCreated { msg, src, dst, size, ttl } if e.time >= warmup => {
                Some(Message { id: msg, src, dst, size_bytes: size, created_at: e.time, ttl })
            }
            _ => None,
        })
        .collect()
}

/// Best-case report. Nothing is transferred, so `forwarded` and the overhead
/// are 0 and efficacy does not apply.
pub fn oracle_report(trace: &ContactTrace, messages: &[Message]) -> MetricsReport {
    let adj = Adjacency::new(trace);
    let mut delivered = 0u64;
    let mut latency = 0.0;
    for m in messages {
        if let Some(t) = earliest_arrival_indexed(&adj, m.src, m.dst, m.created_at, m.ttl) {
            delivered += 1;
            latency += (t - m.created_at).as_secs_f64();
        }
    }
    let created = messages.len() as u64;
    MetricsReport {
        created,
        delivered,
        forwarded: 0,
        delivery_probability: if created > 0 { delivered as f64 / created as f64 } else { 0.0 },
        avg_latency_s: (delivered > 0).then(|| latency / delivered as f64),
        overhead_ratio: Some(0.0),
        efficacy: None,
    }
}

/// Extracts the trace and post-warmup messages of `log` and scores them.
pub fn oracle_report_from_log(log: &EventLog) -> Result<MetricsReport> {
    let trace = extract_contact_trace(log)?;
    Ok(oracle_report(&trace, &messages_from_log(log, log.meta.warmup)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{RunMeta, SimEvent};
    use proptest::prelude::*;

    fn s(x: u64) -> SimTime {
        SimTime::from_secs(x)
    }

    fn contact(a: NodeId, b: NodeId, up: u64, down: u64) -> Contact {
        Contact { a, b, up_at: s(up), down_at: s(down) }
    }

    fn chain() -> ContactTrace {
        ContactTrace::new(vec![contact(0, 1, 10, 11), contact(1, 2, 20, 21)])
    }

    fn msg(id: u64, src: NodeId, dst: NodeId, t0: u64, ttl: u64) -> Message {
        Message { id, src, dst, size_bytes: 1, created_at: s(t0), ttl: s(ttl) }
    }

    #[test]
    fn chain_example() {
        assert_eq!(earliest_arrival(&chain(), 0, 2, s(0), s(30)), Some(s(20)));
        assert_eq!(earliest_arrival(&chain(), 0, 2, s(0), s(15)), None);
        // Missing the first contact breaks the chain.
        assert_eq!(earliest_arrival(&chain(), 0, 2, s(12), s(100)), None);
        let r = oracle_report(&chain(), &[msg(0, 0, 2, 0, 30), msg(1, 0, 2, 0, 15)]);
        assert_eq!(r.delivery_probability, 0.5);
        assert_eq!(r.avg_latency_s, Some(20.0));
    }

    #[test]
    fn live_contact_at_creation() {
        let t = ContactTrace::new(vec![contact(3, 4, 0, 100)]);
        assert_eq!(earliest_arrival(&t, 4, 3, s(50), s(10)), Some(s(50)));
        assert_eq!(earliest_arrival(&t, 4, 3, s(100), s(10)), Some(s(100)));
    }

    #[test]
    fn static_and_empty_networks() {
        let full = ContactTrace::new(vec![contact(0, 1, 0, 1000), contact(0, 2, 0, 1000), contact(1, 2, 0, 1000)]);
        let msgs = [msg(0, 0, 1, 5, 10), msg(1, 2, 0, 7, 10), msg(2, 1, 2, 9, 10)];
        assert_eq!(oracle_report(&full, &msgs).delivery_probability, 1.0);
        assert_eq!(oracle_report(&ContactTrace::default(), &msgs).delivery_probability, 0.0);
    }

    fn ev(t: u64, kind: EventKind) -> SimEvent {
        SimEvent::new(s(t), kind)
    }

    #[test]
    fn extraction() {
        let meta = RunMeta { duration: s(100), ..RunMeta::default() };
        let log = EventLog {
            meta: meta.clone(),
            events: vec![
                ev(10, EventKind::LinkUp { a: 0, b: 1 }),
                ev(15, EventKind::LinkUp { a: 1, b: 2 }),
                ev(20, EventKind::LinkDown { a: 0, b: 1 }),
            ],
        };
        let t = extract_contact_trace(&log).unwrap();
        assert_eq!(t.contacts, vec![contact(0, 1, 10, 20), contact(1, 2, 15, 100)]);
        assert!(extract_contact_trace(&EventLog::default()).unwrap().is_empty());

        let bad = EventLog { meta: meta.clone(), events: vec![ev(5, EventKind::LinkDown { a: 0, b: 1 })] };
        assert!(extract_contact_trace(&bad).is_err());
        let twice = EventLog {
            meta,
            events: vec![ev(5, EventKind::LinkUp { a: 0, b: 1 }), ev(6, EventKind::LinkUp { a: 1, b: 0 })],
        };
        assert!(extract_contact_trace(&twice).is_err());
    }

    fn arb_trace() -> impl Strategy<Value = ContactTrace> {
        proptest::collection::vec((0u32..6, 0u32..6, 0u64..200, 0u64..30), 0..25).prop_map(|v| {
            ContactTrace::new(
                v.into_iter().filter(|(a, b, _, _)| a != b).map(|(a, b, up, len)| contact(a.min(b), a.max(b), up, up + len)).collect(),
            )
        })
    }

    /// Explicit flooding over time: a node is infected once any live contact
    /// touches an infected node. Iterates to a fixed point.
    fn flood(trace: &ContactTrace, src: NodeId, dst: NodeId, t0: SimTime, deadline: SimTime) -> Option<SimTime> {
        let mut best: BTreeMap<NodeId, SimTime> = BTreeMap::from([(src, t0)]);
        loop {
            let mut changed = false;
            for c in &trace.contacts {
                for (u, v) in [(c.a, c.b), (c.b, c.a)] {
                    if let Some(&tu) = best.get(&u) {
                        if tu <= c.down_at {
                            let arr = tu.max(c.up_at);
                            if arr <= deadline && best.get(&v).is_none_or(|&bv| arr < bv) {
                                best.insert(v, arr);
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                return best.get(&dst).copied();
            }
        }
    }

    proptest! {
        #[test]
        fn matches_flooding(trace in arb_trace(), src in 0u32..6, dst in 0u32..6, t0 in 0u64..100, ttl in 0u64..150) {
            prop_assume!(src != dst);
            let got = earliest_arrival(&trace, src, dst, s(t0), s(ttl));
            prop_assert_eq!(got, flood(&trace, src, dst, s(t0), s(t0 + ttl)));
        }

        #[test]
        fn ttl_monotone(trace in arb_trace(), t0 in 0u64..100, ttl in 0u64..100, extra in 0u64..100) {
            let msgs: Vec<Message> = (0..6u32).flat_map(|a| (0..6u32).filter(move |&b| b != a).map(move |b| (a, b)))
                .enumerate()
                .map(|(i, (a, b))| msg(i as u64, a, b, t0, ttl))
                .collect();
            let longer: Vec<Message> = msgs.iter().map(|m| Message { ttl: m.ttl + s(extra), ..m.clone() }).collect();
            prop_assert!(oracle_report(&trace, &longer).delivered >= oracle_report(&trace, &msgs).delivered);
        }
    }
}
