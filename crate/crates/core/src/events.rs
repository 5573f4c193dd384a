//! Simulation events and their line-oriented text form.
//!
//! One event per line: `<timestamp> <kind> <field=value>...`, fields in a
//! fixed order per kind. Lines starting with `#` carry run metadata as
//! `# key=value` and are otherwise ignored by readers.

use std::cmp::Ordering;
use std::fmt::{self, Write as _};

use crate::error::{Result, SimError};
use crate::time::SimTime;
use crate::{MessageId, NodeId};

/// Which part of an encounter's transfer plan a transfer came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    /// Addressed to the receiving peer.
    Direct,
    /// Addressed to one of the peer's current neighbors.
    Neighbor,
    /// Subject to the per-encounter message limit.
    Spread,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Direct => "direct",
            Phase::Neighbor => "neighbor",
            Phase::Spread => "spread",
        }
    }

    fn parse(s: &str) -> Option<Phase> {
        match s {
            "direct" => Some(Phase::Direct),
            "neighbor" => Some(Phase::Neighbor),
            "spread" => Some(Phase::Spread),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DropReason {
    /// Evicted to make room for an incoming or newly created message.
    Evicted,
    /// Purged after learning the message was acknowledged.
    Acked,
    /// A freshly created message that did not fit in its source's buffer.
    NoSpace,
}

impl DropReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            DropReason::Evicted => "evicted",
            DropReason::Acked => "acked",
            DropReason::NoSpace => "nospace",
        }
    }

    fn parse(s: &str) -> Option<DropReason> {
        match s {
            "evicted" => Some(DropReason::Evicted),
            "acked" => Some(DropReason::Acked),
            "nospace" => Some(DropReason::NoSpace),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AbortReason {
    LinkDown,
    Expired,
    Acked,
}

impl AbortReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            AbortReason::LinkDown => "linkdown",
            AbortReason::Expired => "expired",
            AbortReason::Acked => "acked",
        }
    }

    fn parse(s: &str) -> Option<AbortReason> {
        match s {
            "linkdown" => Some(AbortReason::LinkDown),
            "expired" => Some(AbortReason::Expired),
            "acked" => Some(AbortReason::Acked),
            _ => None,
        }
    }
}

/// Distances to the destination centroid recorded when CenterMass admits a
/// spread transfer: sender's and receiver's, at plan time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Progress {
    pub sender_to_dst: f64,
    pub receiver_to_dst: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EventKind {
    MessageCreated { msg: MessageId, src: NodeId, dst: NodeId, size: u64, ttl: SimTime },
    LinkUp { a: NodeId, b: NodeId },
    LinkDown { a: NodeId, b: NodeId },
    TransferStarted {
        msg: MessageId,
        from: NodeId,
        to: NodeId,
        phase: Phase,
        /// Encounter message limit, present for spread transfers.
        limit: Option<usize>,
        progress: Option<Progress>,
    },
    TransferCompleted { msg: MessageId, from: NodeId, to: NodeId },
    TransferAborted { msg: MessageId, from: NodeId, to: NodeId, reason: AbortReason },
    MessageDelivered { msg: MessageId, from: NodeId, to: NodeId },
    MessageDropped { msg: MessageId, node: NodeId, reason: DropReason },
    MessageExpired { msg: MessageId, node: NodeId },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::MessageCreated { .. } => "MessageCreated",
            EventKind::LinkUp { .. } => "LinkUp",
            EventKind::LinkDown { .. } => "LinkDown",
            EventKind::TransferStarted { .. } => "TransferStarted",
            EventKind::TransferCompleted { .. } => "TransferCompleted",
            EventKind::TransferAborted { .. } => "TransferAborted",
            EventKind::MessageDelivered { .. } => "MessageDelivered",
            EventKind::MessageDropped { .. } => "MessageDropped",
            EventKind::MessageExpired { .. } => "MessageExpired",
        }
    }

    /// Tie-break rank among events sharing a timestamp. Teardown precedes
    /// completion, completion precedes new work.
    pub fn rank(&self) -> u8 {
        match self {
            EventKind::LinkDown { .. } => 0,
            EventKind::TransferAborted { .. } => 1,
            EventKind::TransferCompleted { .. } => 2,
            EventKind::MessageDelivered { .. } => 3,
            EventKind::MessageExpired { .. } => 4,
            EventKind::MessageCreated { .. } => 5,
            EventKind::MessageDropped { .. } => 6,
            EventKind::LinkUp { .. } => 7,
            EventKind::TransferStarted { .. } => 8,
        }
    }

    /// The node ids used for ordering, primary node first.
    pub fn node_key(&self) -> (NodeId, NodeId) {
        match *self {
            EventKind::MessageCreated { src, dst, .. } => (src, dst),
            EventKind::LinkUp { a, b } | EventKind::LinkDown { a, b } => (a, b),
            EventKind::TransferStarted { from, to, .. }
            | EventKind::TransferCompleted { from, to, .. }
            | EventKind::TransferAborted { from, to, .. }
            | EventKind::MessageDelivered { from, to, .. } => (from, to),
            EventKind::MessageDropped { node, .. } | EventKind::MessageExpired { node, .. } => (node, node),
        }
    }

    pub fn message(&self) -> Option<MessageId> {
        match *self {
            EventKind::MessageCreated { msg, .. }
            | EventKind::TransferStarted { msg, .. }
            | EventKind::TransferCompleted { msg, .. }
            | EventKind::TransferAborted { msg, .. }
            | EventKind::MessageDelivered { msg, .. }
            | EventKind::MessageDropped { msg, .. }
            | EventKind::MessageExpired { msg, .. } => Some(msg),
            EventKind::LinkUp { .. } | EventKind::LinkDown { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimEvent {
    pub time: SimTime,
    pub kind: EventKind,
}

impl SimEvent {
    pub fn new(time: SimTime, kind: EventKind) -> Self {
        SimEvent { time, kind }
    }

    /// Total order over events: timestamp, kind rank, node ids, message id.
    /// Events equal under this key keep their emission order (stable sort).
    pub fn order(&self, other: &SimEvent) -> Ordering {
        self.time
            .cmp(&other.time)
            .then(self.kind.rank().cmp(&other.kind.rank()))
            .then(self.kind.node_key().cmp(&other.kind.node_key()))
            .then(self.kind.message().cmp(&other.kind.message()))
    }
}

impl fmt::Display for SimEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.time, self.kind.name())?;
        match &self.kind {
            EventKind::MessageCreated { msg, src, dst, size, ttl } => {
                write!(f, " msg={msg} src={src} dst={dst} size={size} ttl={ttl}")
            }
            EventKind::LinkUp { a, b } | EventKind::LinkDown { a, b } => write!(f, " a={a} b={b}"),
            EventKind::TransferStarted { msg, from, to, phase, limit, progress } => {
                write!(f, " msg={msg} from={from} to={to} phase={}", phase.as_str())?;
                if let Some(l) = limit {
                    write!(f, " limit={l}")?;
                }
                if let Some(p) = progress {
                    write!(f, " d_from={:?} d_to={:?}", p.sender_to_dst, p.receiver_to_dst)?;
                }
                Ok(())
            }
            EventKind::TransferCompleted { msg, from, to } | EventKind::MessageDelivered { msg, from, to } => {
                write!(f, " msg={msg} from={from} to={to}")
            }
            EventKind::TransferAborted { msg, from, to, reason } => {
                write!(f, " msg={msg} from={from} to={to} reason={}", reason.as_str())
            }
            EventKind::MessageDropped { msg, node, reason } => {
                write!(f, " msg={msg} node={node} reason={}", reason.as_str())
            }
            EventKind::MessageExpired { msg, node } => write!(f, " msg={msg} node={node}"),
        }
    }
}

/// Descriptive run parameters written as `#` header lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunMeta {
    pub router: String,
    pub bandwidth_bps: u64,
    pub buffer_bytes: u64,
    pub noise_m: f64,
    pub seed: u64,
    pub warmup: SimTime,
    pub duration: SimTime,
    pub nodes: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventLog {
    pub meta: RunMeta,
    pub events: Vec<SimEvent>,
}

impl EventLog {
    pub fn to_text(&self) -> String {
        let m = &self.meta;
        let mut out = String::with_capacity(self.events.len() * 48 + 256);
        let _ = writeln!(out, "# router={}", m.router);
        let _ = writeln!(out, "# bandwidth_bps={}", m.bandwidth_bps);
        let _ = writeln!(out, "# buffer_bytes={}", m.buffer_bytes);
        let _ = writeln!(out, "# noise_m={:?}", m.noise_m);
        let _ = writeln!(out, "# seed={}", m.seed);
        let _ = writeln!(out, "# warmup={}", m.warmup);
        let _ = writeln!(out, "# duration={}", m.duration);
        let _ = writeln!(out, "# nodes={}", m.nodes);
        for e in &self.events {
            let _ = writeln!(out, "{e}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<EventLog> {
        let mut log = EventLog::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let l = raw.trim();
            if l.is_empty() {
                continue;
            }
            if let Some(h) = l.strip_prefix('#') {
                parse_meta(&mut log.meta, h.trim()).map_err(|message| SimError::EventLog { line, message })?;
                continue;
            }
            let ev = parse_event(l).map_err(|message| SimError::EventLog { line, message })?;
            log.events.push(ev);
        }
        Ok(log)
    }

    pub fn is_sorted(&self) -> bool {
        self.events.windows(2).all(|w| w[0].order(&w[1]) != Ordering::Greater)
    }
}

fn parse_meta(meta: &mut RunMeta, h: &str) -> std::result::Result<(), String> {
    let Some((k, v)) = h.split_once('=') else {
        return Ok(());
    };
    let num_err = |_| format!("bad header value `{h}`");
    match k.trim() {
        "router" => meta.router = v.to_string(),
        "bandwidth_bps" => meta.bandwidth_bps = v.parse().map_err(num_err)?,
        "buffer_bytes" => meta.buffer_bytes = v.parse().map_err(num_err)?,
        "noise_m" => meta.noise_m = v.parse().map_err(|_| format!("bad header value `{h}`"))?,
        "seed" => meta.seed = v.parse().map_err(num_err)?,
        "warmup" => meta.warmup = v.parse().map_err(|_| format!("bad header value `{h}`"))?,
        "duration" => meta.duration = v.parse().map_err(|_| format!("bad header value `{h}`"))?,
        "nodes" => meta.nodes = v.parse().map_err(num_err)?,
        _ => {}
    }
    Ok(())
}

struct Fields<'a> {
    it: std::str::SplitWhitespace<'a>,
}

impl<'a> Fields<'a> {
    fn next_raw(&mut self, key: &str) -> std::result::Result<&'a str, String> {
        let tok = self.it.next().ok_or_else(|| format!("missing field `{key}`"))?;
        let (k, v) = tok.split_once('=').ok_or_else(|| format!("malformed field `{tok}`"))?;
        if k != key {
            return Err(format!("expected field `{key}`, found `{k}`"));
        }
        Ok(v)
    }

    fn next<T: std::str::FromStr>(&mut self, key: &str) -> std::result::Result<T, String> {
        let v = self.next_raw(key)?;
        v.parse().map_err(|_| format!("bad value `{v}` for `{key}`"))
    }

    fn optional<T: std::str::FromStr>(&mut self, key: &str) -> std::result::Result<Option<T>, String> {
        let mut peek = self.it.clone();
        match peek.next() {
            Some(tok) if tok.split_once('=').map(|(k, _)| k) == Some(key) => self.next(key).map(Some),
            _ => Ok(None),
        }
    }

    fn finish(mut self) -> std::result::Result<(), String> {
        match self.it.next() {
            None => Ok(()),
            Some(t) => Err(format!("unexpected trailing field `{t}`")),
        }
    }
}

fn parse_event(line: &str) -> std::result::Result<SimEvent, String> {
    let mut it = line.split_whitespace();
    let ts = it.next().ok_or("empty line")?;
    let time: SimTime = ts.parse().map_err(|_| format!("bad timestamp `{ts}`"))?;
    let kind = it.next().ok_or("missing event kind")?;
    let mut f = Fields { it };
    let kind = match kind {
        "MessageCreated" => EventKind::MessageCreated {
            msg: f.next("msg")?,
            src: f.next("src")?,
            dst: f.next("dst")?,
            size: f.next("size")?,
            ttl: f.next("ttl")?,
        },
        "LinkUp" => EventKind::LinkUp { a: f.next("a")?, b: f.next("b")? },
        "LinkDown" => EventKind::LinkDown { a: f.next("a")?, b: f.next("b")? },
        "TransferStarted" => {
            let msg = f.next("msg")?;
            let from = f.next("from")?;
            let to = f.next("to")?;
            let phase_s = f.next_raw("phase")?;
            let phase = Phase::parse(phase_s).ok_or_else(|| format!("unknown phase `{phase_s}`"))?;
            let limit = f.optional("limit")?;
            let progress = match f.optional::<f64>("d_from")? {
                Some(sender_to_dst) => Some(Progress { sender_to_dst, receiver_to_dst: f.next("d_to")? }),
                None => None,
            };
            EventKind::TransferStarted { msg, from, to, phase, limit, progress }
        }
        "TransferCompleted" => EventKind::TransferCompleted { msg: f.next("msg")?, from: f.next("from")?, to: f.next("to")? },
        "TransferAborted" => {
            let msg = f.next("msg")?;
            let from = f.next("from")?;
            let to = f.next("to")?;
            let r = f.next_raw("reason")?;
            let reason = AbortReason::parse(r).ok_or_else(|| format!("unknown abort reason `{r}`"))?;
            EventKind::TransferAborted { msg, from, to, reason }
        }
        "MessageDelivered" => EventKind::MessageDelivered { msg: f.next("msg")?, from: f.next("from")?, to: f.next("to")? },
        "MessageDropped" => {
            let msg = f.next("msg")?;
            let node = f.next("node")?;
            let r = f.next_raw("reason")?;
            let reason = DropReason::parse(r).ok_or_else(|| format!("unknown drop reason `{r}`"))?;
            EventKind::MessageDropped { msg, node, reason }
        }
        "MessageExpired" => EventKind::MessageExpired { msg: f.next("msg")?, node: f.next("node")? },
        other => return Err(format!("unknown event kind `{other}`")),
    };
    f.finish()?;
    Ok(SimEvent { time, kind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_events() -> Vec<SimEvent> {
        let t = SimTime::from_micros(1_000_100_000);
        vec![
            SimEvent::new(t, EventKind::MessageCreated { msg: 0, src: 1, dst: 2, size: 750_000, ttl: SimTime::from_secs(18_000) }),
            SimEvent::new(t, EventKind::LinkUp { a: 1, b: 4 }),
            SimEvent::new(t, EventKind::TransferStarted { msg: 0, from: 1, to: 4, phase: Phase::Spread, limit: Some(3), progress: Some(Progress { sender_to_dst: 120.5, receiver_to_dst: 0.1 + 0.2 }) }),
            SimEvent::new(t, EventKind::TransferStarted { msg: 0, from: 1, to: 4, phase: Phase::Direct, limit: None, progress: None }),
            SimEvent::new(t, EventKind::TransferCompleted { msg: 0, from: 1, to: 4 }),
            SimEvent::new(t, EventKind::TransferAborted { msg: 0, from: 1, to: 4, reason: AbortReason::LinkDown }),
            SimEvent::new(t, EventKind::MessageDelivered { msg: 0, from: 4, to: 2 }),
            SimEvent::new(t, EventKind::MessageDropped { msg: 0, node: 4, reason: DropReason::Acked }),
            SimEvent::new(t, EventKind::MessageExpired { msg: 0, node: 4 }),
            SimEvent::new(t, EventKind::LinkDown { a: 1, b: 4 }),
        ]
    }

    #[test]
    fn text_roundtrip_is_lossless() {
        let log = EventLog {
            meta: RunMeta {
                router: "centermass-noisy".into(),
                bandwidth_bps: 125_000,
                buffer_bytes: 5_000_000,
                noise_m: 20.0,
                seed: 3,
                warmup: SimTime::from_secs(1000),
                duration: SimTime::from_secs(7200),
                nodes: 30,
            },
            events: sample_events(),
        };
        let text = log.to_text();
        let back = EventLog::parse(&text).unwrap();
        assert_eq!(back, log);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn line_format() {
        let e = SimEvent::new(SimTime::from_micros(12_500_000), EventKind::LinkUp { a: 3, b: 9 });
        assert_eq!(e.to_string(), "12.500000 LinkUp a=3 b=9");
    }

    #[test]
    fn parse_errors_report_line() {
        let err = EventLog::parse("1.0 LinkUp a=1 b=2\n2.0 Bogus x=1\n").unwrap_err();
        assert_eq!(err, SimError::EventLog { line: 2, message: "unknown event kind `Bogus`".into() });
        assert!(EventLog::parse("1.0 LinkUp a=1").is_err());
        assert!(EventLog::parse("1.0 LinkUp b=1 a=2").is_err());
        assert!(EventLog::parse("1.0 LinkUp a=1 b=2 c=3").is_err());
    }

    #[test]
    fn rank_orders_teardown_first() {
        let t = SimTime::from_secs(5);
        let mut evs = vec![
            SimEvent::new(t, EventKind::TransferStarted { msg: 1, from: 0, to: 1, phase: Phase::Direct, limit: None, progress: None }),
            SimEvent::new(t, EventKind::LinkDown { a: 2, b: 3 }),
            SimEvent::new(SimTime::from_secs(4), EventKind::LinkUp { a: 9, b: 10 }),
        ];
        evs.sort_by(SimEvent::order);
        assert_eq!(evs[0].kind.name(), "LinkUp");
        assert_eq!(evs[1].kind.name(), "LinkDown");
    }

    proptest! {
        #[test]
        fn progress_floats_roundtrip(a in 0.0f64..1e7, b in 0.0f64..1e7, us in 0u64..10_000_000_000) {
            let e = SimEvent::new(SimTime::from_micros(us), EventKind::TransferStarted {
                msg: 7, from: 1, to: 2, phase: Phase::Spread, limit: Some(2),
                progress: Some(Progress { sender_to_dst: a, receiver_to_dst: b }),
            });
            let back = parse_event(&e.to_string()).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
