//! The time-stepped world engine.
//!
//! Each step of length `timestep_s` runs, in order:
//!
//! 1. transfers that finish inside the step complete at their exact time,
//!    and a link freed before the step boundary immediately starts its next
//!    transfer;
//! 2. nodes move;
//! 3. position samples are taken when a sampling boundary is crossed;
//! 4. expired messages are purged and stale ACKs pruned;
//! 5. links are recomputed, torn-down links abort their transfers and new
//!    links run the router's opening exchange in ascending pair order, and
//!    linked nodes pick up any ACKs their peers learned;
//! 6. scheduled messages are created;
//! 7. every idle link direction starts its next planned transfer.
//!
//! Nothing started at an instant is aborted at that same instant, so the
//! rank order used to break timestamp ties never puts an effect before its
//! cause.
//!
//! Events produced within a step are sorted by [`SimEvent::order`] before
//! they are appended, so the log is totally ordered.

mod connectivity;
mod traffic;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::iter::Peekable;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use connectivity::{link_key, links_in_range, update_connectivity, LinkKey};
pub use traffic::{TrafficGenerator, TrafficItem};

use crate::buffer::Buffer;
use crate::config::SimConfig;
use crate::error::Result;
use crate::events::{AbortReason, DropReason, EventKind, EventLog, Phase, Progress, RunMeta, SimEvent};
use crate::mobility::{init_node, Bounds, MobilityState};
use crate::positioning::{sample_position, Position};
use crate::routers::{self, EncounterSummary, HeldMessage, NodeRouting, RouterKind, RouterSpec, TransferPlan};
use crate::time::{transfer_duration, SimTime};
use crate::{Message, MessageId, NodeId};

const STREAM_MOBILITY: u64 = 1 << 32;
const STREAM_GPS: u64 = 2 << 32;
const STREAM_TRAFFIC: u64 = 3 << 32;

/// Independent generator for one (purpose, index) stream of a run seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transfer {
    pub msg: MessageId,
    pub sender: NodeId,
    pub receiver: NodeId,
    pub phase: Phase,
    pub progress: Option<Progress>,
    pub started_at: SimTime,
    pub completes_at: SimTime,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeSnapshot {
    pub id: NodeId,
    pub group: usize,
    pub position: Position,
    pub centroid: Option<Position>,
    pub sample_count: u64,
    pub max_centroid_distance: f64,
    pub buffer_used: u64,
    pub buffered: Vec<MessageId>,
    pub acks: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorldSnapshot {
    pub time: SimTime,
    pub steps: u64,
    pub nodes: Vec<NodeSnapshot>,
    pub links: Vec<LinkKey>,
    pub messages: Vec<Message>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub log: EventLog,
    pub snapshot: WorldSnapshot,
}

/// Runs `config` to completion under `router`.
pub fn run(config: &SimConfig, router: RouterSpec) -> Result<RunOutput> {
    let mut world = World::new(config, router)?;
    while world.step() {}
    Ok(world.finish())
}

struct Node {
    mobility: MobilityState,
    mob_rng: ChaCha8Rng,
    gps_rng: ChaCha8Rng,
    routing: NodeRouting,
    buffer: Buffer,
    neighbors: BTreeSet<NodeId>,
    sending: BTreeMap<MessageId, u32>,
    incoming: BTreeSet<MessageId>,
    /// Bumped whenever anything a peer's plan depends on changes.
    version: u64,
    /// Bumped whenever the node learns a new ACK.
    ack_version: u64,
}

#[derive(Clone, Copy, Debug)]
struct Planned {
    msg: MessageId,
    phase: Phase,
    progress: Option<Progress>,
}

#[derive(Default)]
struct Direction {
    queue: VecDeque<Planned>,
    active: Option<Transfer>,
    limit: Option<usize>,
    spread_used: usize,
    offered: BTreeSet<MessageId>,
    seen: (u64, u64),
    /// Receiver's `ack_version` when the sender last took its ACK list.
    acks_seen: Option<u64>,
}

struct Link {
    dirs: [Direction; 2],
}

fn endpoints(key: LinkKey, d: usize) -> (NodeId, NodeId) {
    if d == 0 {
        key
    } else {
        (key.1, key.0)
    }
}

pub struct World {
    cfg: SimConfig,
    router: RouterSpec,
    noise_m: f64,
    bounds: Bounds,
    dt: SimTime,
    gps_interval: SimTime,
    total_steps: u64,
    steps_done: u64,
    now: SimTime,
    nodes: Vec<Node>,
    messages: Vec<Message>,
    expiries: BTreeSet<(SimTime, MessageId)>,
    links: BTreeMap<LinkKey, Link>,
    completions: BTreeSet<(SimTime, NodeId, NodeId, usize)>,
    traffic: Peekable<TrafficGenerator<ChaCha8Rng>>,
    log: Vec<SimEvent>,
    batch: Vec<SimEvent>,
}

impl World {
    pub fn new(config: &SimConfig, router: RouterSpec) -> Result<World> {
        config.validate()?;
        let cfg = config.clone();
        let bounds = Bounds::new(cfg.world_width_m, cfg.world_height_m);
        let noise_m = router.effective_noise(cfg.noise_amplitude_m);
        let dt = SimTime::from_secs_f64(cfg.timestep_s);
        let duration = SimTime::from_secs_f64(cfg.duration_s);
        let total_steps = duration.as_micros() / dt.as_micros();

        let mut nodes = Vec::with_capacity(cfg.node_count());
        for (gi, g) in cfg.node_groups.iter().enumerate() {
            for _ in 0..g.count {
                let id = nodes.len() as NodeId;
                let mut mob_rng = stream_rng(cfg.seed, STREAM_MOBILITY | u64::from(id));
                let mobility = init_node(gi, g, bounds, &mut mob_rng);
                nodes.push(Node {
                    mobility,
                    mob_rng,
                    gps_rng: stream_rng(cfg.seed, STREAM_GPS | u64::from(id)),
                    routing: NodeRouting::new(id),
                    buffer: Buffer::new(cfg.buffer_bytes),
                    neighbors: BTreeSet::new(),
                    sending: BTreeMap::new(),
                    incoming: BTreeSet::new(),
                    version: 0,
                    ack_version: 0,
                });
            }
        }

        let traffic = TrafficGenerator::new(
            cfg.traffic.clone(),
            nodes.len(),
            cfg.warmup_s,
            cfg.duration_s,
            stream_rng(cfg.seed, STREAM_TRAFFIC),
        )
        .peekable();

        let mut world = World {
            gps_interval: SimTime::from_secs_f64(cfg.gps_interval_s).max(SimTime::from_micros(1)),
            cfg,
            router,
            noise_m,
            bounds,
            dt,
            total_steps,
            steps_done: 0,
            now: SimTime::ZERO,
            nodes,
            messages: Vec::new(),
            expiries: BTreeSet::new(),
            links: BTreeMap::new(),
            completions: BTreeSet::new(),
            traffic,
            log: Vec::new(),
            batch: Vec::new(),
        };
        world.sample_positions();
        Ok(world)
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn steps_done(&self) -> u64 {
        self.steps_done
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    pub fn events(&self) -> &[SimEvent] {
        &self.log
    }

    /// Buffered bytes per node, excluding reservations for transfers in
    /// flight.
    pub fn buffer_usage(&self) -> Vec<u64> {
        self.nodes.iter().map(|n| n.buffer.used()).collect()
    }

    pub fn buffer_capacity(&self) -> u64 {
        self.cfg.buffer_bytes
    }

    pub fn active_transfers(&self) -> Vec<Transfer> {
        self.links.values().flat_map(|l| l.dirs.iter().filter_map(|d| d.active.clone())).collect()
    }

    /// Advances one timestep. Returns false once the run is over.
    pub fn step(&mut self) -> bool {
        if self.steps_done >= self.total_steps {
            return false;
        }
        let prev = self.now;
        self.steps_done += 1;
        let t = SimTime::from_micros(self.steps_done * self.dt.as_micros());
        self.now = t;

        self.complete_transfers(t);
        self.move_nodes(prev, t);
        if t.as_micros() / self.gps_interval.as_micros() > prev.as_micros() / self.gps_interval.as_micros() {
            self.sample_positions();
        }
        self.expire_messages(t);
        for n in &mut self.nodes {
            if n.routing.acks.prune(t) > 0 {
                n.version += 1;
            }
        }
        self.update_links(t);
        self.exchange_acks(t);
        self.create_messages(t);
        self.pump_all(t);

        self.batch.sort_by(SimEvent::order);
        self.log.append(&mut self.batch);
        true
    }

    pub fn snapshot(&self) -> WorldSnapshot {
        WorldSnapshot {
            time: self.now,
            steps: self.steps_done,
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| NodeSnapshot {
                    id: i as NodeId,
                    group: n.mobility.group,
                    position: n.mobility.true_position,
                    centroid: n.routing.centroid.centroid(),
                    sample_count: n.routing.centroid.sample_count(),
                    max_centroid_distance: n.routing.centroid.max_centroid_distance(),
                    buffer_used: n.buffer.used(),
                    buffered: n.buffer.entries().iter().map(|e| e.msg).collect(),
                    acks: n.routing.acks.len(),
                })
                .collect(),
            links: self.links.keys().copied().collect(),
            messages: self.messages.clone(),
        }
    }

    pub fn finish(self) -> RunOutput {
        let snapshot = self.snapshot();
        let meta = RunMeta {
            router: self.router.to_string(),
            bandwidth_bps: self.cfg.bandwidth_bps,
            buffer_bytes: self.cfg.buffer_bytes,
            noise_m: self.noise_m,
            seed: self.cfg.seed,
            warmup: SimTime::from_secs_f64(self.cfg.warmup_s),
            duration: SimTime::from_micros(self.total_steps * self.dt.as_micros()),
            nodes: self.nodes.len(),
        };
        RunOutput { log: EventLog { meta, events: self.log }, snapshot }
    }

    fn emit(&mut self, time: SimTime, kind: EventKind) {
        self.batch.push(SimEvent::new(time, kind));
    }

    fn kind(&self) -> RouterKind {
        self.router.kind
    }

    fn move_nodes(&mut self, prev: SimTime, t: SimTime) {
        let now = prev.as_secs_f64();
        let dt = (t - prev).as_secs_f64();
        let bounds = self.bounds;
        for n in &mut self.nodes {
            let g = &self.cfg.node_groups[n.mobility.group];
            n.mobility.advance(g, bounds, now, dt, &mut n.mob_rng);
        }
    }

    fn sample_positions(&mut self) {
        let interval = self.gps_interval.as_secs_f64();
        for n in &mut self.nodes {
            let s = sample_position(n.mobility.true_position, self.noise_m, &mut n.gps_rng);
            n.routing.observe_sample(s, interval);
        }
    }

    fn held(&self, node: NodeId) -> Vec<HeldMessage> {
        self.nodes[node as usize]
            .buffer
            .entries()
            .iter()
            .map(|e| {
                let m = &self.messages[e.msg as usize];
                HeldMessage { id: m.id, dst: m.dst, created_at: m.created_at }
            })
            .collect()
    }

    fn summary(&self, node: NodeId, peer: NodeId) -> EncounterSummary {
        let n = &self.nodes[node as usize];
        EncounterSummary {
            node,
            centroid: n.routing.centroid.centroid(),
            velocity: n.routing.velocity,
            messages: n.buffer.entries().iter().map(|e| e.msg).collect(),
            acks: n.routing.acks.ids(),
            neighbors: n.neighbors.iter().copied().filter(|&x| x != peer).collect(),
            centroid_table: (self.kind() == RouterKind::CenterMass).then(|| n.routing.table.clone()),
        }
    }

    fn bump(&mut self, node: NodeId) {
        self.nodes[node as usize].version += 1;
    }

    fn complete_transfers(&mut self, upto: SimTime) {
        while let Some(&(tc, a, b, d)) = self.completions.first() {
            if tc > upto {
                break;
            }
            self.completions.pop_first();
            self.finish_transfer((a, b), d, tc);
            // A link freed exactly on the step boundary is refilled by the
            // step's own pump, after link changes and ACK exchange.
            if tc < upto {
                self.pump((a, b), d, tc);
            }
        }
    }

    fn finish_transfer(&mut self, key: LinkKey, d: usize, tc: SimTime) {
        let tr = self
            .links
            .get_mut(&key)
            .and_then(|l| l.dirs[d].active.take())
            .expect("completion for an idle link");
        let msg = self.messages[tr.msg as usize].clone();
        let (from, to) = (tr.sender, tr.receiver);
        self.release_sender(from, msg.id);
        self.nodes[to as usize].incoming.remove(&msg.id);

        if tc > msg.expires_at() {
            if to != msg.dst {
                self.nodes[to as usize].buffer.release(msg.id);
            }
            self.emit(tc, EventKind::TransferAborted { msg: msg.id, from, to, reason: AbortReason::Expired });
            return;
        }

        self.emit(tc, EventKind::TransferCompleted { msg: msg.id, from, to });
        if to == msg.dst {
            if self.nodes[to as usize].routing.acks.record(msg.id, msg.expires_at()) {
                self.nodes[to as usize].ack_version += 1;
                self.emit(tc, EventKind::MessageDelivered { msg: msg.id, from, to });
            }
        } else {
            let committed = self.nodes[to as usize].buffer.commit(msg.id, tc);
            debug_assert!(committed, "no reservation for completed transfer");
        }
        self.bump(from);
        self.bump(to);
    }

    fn release_sender(&mut self, node: NodeId, msg: MessageId) {
        let sending = &mut self.nodes[node as usize].sending;
        if let Some(c) = sending.get_mut(&msg) {
            *c -= 1;
            if *c == 0 {
                sending.remove(&msg);
            }
        }
    }

    fn abort(&mut self, key: LinkKey, d: usize, reason: AbortReason, now: SimTime) {
        let Some(tr) = self.links.get_mut(&key).and_then(|l| l.dirs[d].active.take()) else {
            return;
        };
        self.completions.remove(&(tr.completes_at, key.0, key.1, d));
        self.release_sender(tr.sender, tr.msg);
        let to = tr.receiver;
        self.nodes[to as usize].incoming.remove(&tr.msg);
        if to != self.messages[tr.msg as usize].dst {
            self.nodes[to as usize].buffer.release(tr.msg);
        }
        self.bump(to);
        self.emit(now, EventKind::TransferAborted { msg: tr.msg, from: tr.sender, to, reason });
    }

    fn expire_messages(&mut self, t: SimTime) {
        while let Some(&(exp, m)) = self.expiries.first() {
            if exp > t {
                break;
            }
            self.expiries.pop_first();
            let doomed: Vec<(LinkKey, usize)> = self
                .links
                .iter()
                .flat_map(|(&k, l)| (0..2).filter(move |&d| l.dirs[d].active.as_ref().is_some_and(|tr| tr.msg == m)).map(move |d| (k, d)))
                .collect();
            for (k, d) in doomed {
                self.abort(k, d, AbortReason::Expired, t);
            }
            for i in 0..self.nodes.len() {
                if self.nodes[i].buffer.remove(m).is_some() {
                    self.nodes[i].version += 1;
                    self.emit(t, EventKind::MessageExpired { msg: m, node: i as NodeId });
                }
            }
        }
    }

    /// Records every id in `acks` the node did not know yet, aborting its
    /// transfers of those messages and purging its copies.
    fn learn_acks(&mut self, node: NodeId, acks: &BTreeSet<MessageId>, now: SimTime) {
        for &m in acks {
            if self.nodes[node as usize].routing.acks.contains(m) {
                continue;
            }
            let exp = self.messages[m as usize].expires_at();
            self.nodes[node as usize].routing.acks.record(m, exp);
            self.nodes[node as usize].ack_version += 1;
            let peers: Vec<NodeId> = self.nodes[node as usize].neighbors.iter().copied().collect();
            for p in peers {
                let key = link_key(node, p);
                for d in 0..2 {
                    let hit = self.links.get(&key).and_then(|l| l.dirs[d].active.as_ref()).is_some_and(|tr| tr.msg == m);
                    if hit {
                        self.abort(key, d, AbortReason::Acked, now);
                    }
                }
            }
            if self.nodes[node as usize].buffer.remove(m).is_some() {
                self.emit(now, EventKind::MessageDropped { msg: m, node, reason: DropReason::Acked });
            }
            self.bump(node);
        }
    }

    fn update_links(&mut self, t: SimTime) {
        let positions: Vec<Position> = self.nodes.iter().map(|n| n.mobility.true_position).collect();
        let previous: BTreeSet<LinkKey> = self.links.keys().copied().collect();
        let (_, ups, downs) = update_connectivity(&previous, &positions, self.cfg.transmit_range_m);

        for key in downs {
            for d in 0..2 {
                self.abort(key, d, AbortReason::LinkDown, t);
            }
            self.links.remove(&key);
            self.nodes[key.0 as usize].neighbors.remove(&key.1);
            self.nodes[key.1 as usize].neighbors.remove(&key.0);
            self.bump(key.0);
            self.bump(key.1);
            self.emit(t, EventKind::LinkDown { a: key.0, b: key.1 });
        }
        for &key in &ups {
            self.links.insert(key, Link { dirs: [Direction::default(), Direction::default()] });
            self.nodes[key.0 as usize].neighbors.insert(key.1);
            self.nodes[key.1 as usize].neighbors.insert(key.0);
            self.bump(key.0);
            self.bump(key.1);
            self.emit(t, EventKind::LinkUp { a: key.0, b: key.1 });
        }
        for key in ups {
            self.open_encounter(key, t);
        }
    }

    fn open_encounter(&mut self, key: LinkKey, t: SimTime) {
        let (a, b) = key;
        let sa = self.summary(a, b);
        let sb = self.summary(b, a);
        let held_a = self.held(a);
        let held_b = self.held(b);
        let kind = self.kind();
        let plan_ab = routers::on_encounter(kind, &mut self.nodes[a as usize].routing, &held_a, &sb, t);
        let plan_ba = routers::on_encounter(kind, &mut self.nodes[b as usize].routing, &held_b, &sa, t);
        self.learn_acks(a, &sb.acks, t);
        self.learn_acks(b, &sa.acks, t);
        let seen = [
            (self.nodes[a as usize].version, self.nodes[b as usize].version),
            (self.nodes[b as usize].version, self.nodes[a as usize].version),
        ];
        let link = self.links.get_mut(&key).expect("link just created");
        for (d, plan) in [plan_ab, plan_ba].into_iter().enumerate() {
            let dir = &mut link.dirs[d];
            dir.limit = plan.limit;
            dir.seen = seen[d];
            enqueue(dir, plan);
        }
    }

    /// Linked nodes keep exchanging ACK lists for as long as the link lasts;
    /// a list is only re-read when it changed.
    fn exchange_acks(&mut self, t: SimTime) {
        let keys: Vec<LinkKey> = self.links.keys().copied().collect();
        for key in keys {
            for d in 0..2 {
                let (from, to) = endpoints(key, d);
                let peer_version = self.nodes[to as usize].ack_version;
                if self.links[&key].dirs[d].acks_seen == Some(peer_version) {
                    continue;
                }
                let acks = self.nodes[to as usize].routing.acks.ids();
                self.learn_acks(from, &acks, t);
                if let Some(link) = self.links.get_mut(&key) {
                    link.dirs[d].acks_seen = Some(peer_version);
                }
            }
        }
    }

    fn create_messages(&mut self, t: SimTime) {
        let ttl = SimTime::from_secs_f64(self.cfg.traffic.ttl_s);
        while let Some(item) = self.traffic.next_if(|it| it.at <= t) {
            let id = self.messages.len() as MessageId;
            let msg = Message { id, src: item.src, dst: item.dst, size_bytes: item.size_bytes, created_at: t, ttl };
            self.emit(t, EventKind::MessageCreated { msg: id, src: msg.src, dst: msg.dst, size: msg.size_bytes, ttl });
            self.expiries.insert((msg.expires_at(), id));
            self.messages.push(msg);

            let node = &mut self.nodes[item.src as usize];
            let sending = &node.sending;
            match node.buffer.admit(id, item.size_bytes, t, |m| sending.contains_key(&m)) {
                Ok(victims) => {
                    for v in victims {
                        self.emit(t, EventKind::MessageDropped { msg: v, node: item.src, reason: DropReason::Evicted });
                    }
                }
                Err(_) => {
                    self.emit(t, EventKind::MessageDropped { msg: id, node: item.src, reason: DropReason::NoSpace });
                }
            }
            self.bump(item.src);
        }
    }

    fn pump_all(&mut self, now: SimTime) {
        let keys: Vec<LinkKey> = self.links.keys().copied().collect();
        for key in keys {
            for d in 0..2 {
                self.pump(key, d, now);
            }
        }
    }

    /// Starts the next transfer on an idle link direction, re-planning when
    /// the queue is exhausted and either endpoint changed since the last plan.
    fn pump(&mut self, key: LinkKey, d: usize, now: SimTime) {
        let (from, to) = endpoints(key, d);
        loop {
            let Some(link) = self.links.get_mut(&key) else {
                return;
            };
            let dir = &mut link.dirs[d];
            if dir.active.is_some() {
                return;
            }
            if let Some(item) = dir.queue.pop_front() {
                if self.try_start(key, d, item, now) {
                    return;
                }
                continue;
            }
            let versions = (self.nodes[from as usize].version, self.nodes[to as usize].version);
            if dir.seen == versions {
                return;
            }
            if !self.replan(key, d) {
                return;
            }
        }
    }

    /// ACKs are learned by the per-step exchange, not here, so a replan never
    /// aborts a transfer started at the same instant.
    fn replan(&mut self, key: LinkKey, d: usize) -> bool {
        let (from, to) = endpoints(key, d);
        let peer = self.summary(to, from);
        let held = self.held(from);
        let seen = (self.nodes[from as usize].version, self.nodes[to as usize].version);
        let kind = self.kind();
        let link = self.links.get_mut(&key).expect("replanning a live link");
        let dir = &mut link.dirs[d];
        let remaining = dir.limit.map(|l| l.saturating_sub(dir.spread_used));
        let offered = &dir.offered;
        let plan = routers::continue_encounter(kind, &self.nodes[from as usize].routing, &held, &peer, remaining, &|m| {
            offered.contains(&m)
        });
        dir.seen = seen;
        let any = plan.transfer_count() > 0;
        enqueue(dir, plan);
        any
    }

    fn try_start(&mut self, key: LinkKey, d: usize, item: Planned, now: SimTime) -> bool {
        let (from, to) = endpoints(key, d);
        let msg = &self.messages[item.msg as usize];
        let (mid, dst, size, expires) = (msg.id, msg.dst, msg.size_bytes, msg.expires_at());
        if now >= expires || !self.nodes[from as usize].buffer.contains(mid) {
            return false;
        }
        {
            let r = &self.nodes[to as usize];
            if r.routing.acks.contains(mid) || r.buffer.contains(mid) || r.incoming.contains(&mid) {
                return false;
            }
        }
        let limit = self.links[&key].dirs[d].limit;
        if item.phase == Phase::Spread {
            let used = self.links[&key].dirs[d].spread_used;
            if limit.is_some_and(|l| used >= l) {
                return false;
            }
        }
        if to != dst {
            let node = &mut self.nodes[to as usize];
            let sending = &node.sending;
            match node.buffer.reserve(mid, size, |m| sending.contains_key(&m)) {
                Ok(victims) => {
                    if !victims.is_empty() {
                        node.version += 1;
                    }
                    for v in victims {
                        self.emit(now, EventKind::MessageDropped { msg: v, node: to, reason: DropReason::Evicted });
                    }
                }
                Err(_) => return false,
            }
        }

        let completes_at = now + transfer_duration(size, self.cfg.bandwidth_bps);
        *self.nodes[from as usize].sending.entry(mid).or_insert(0) += 1;
        self.nodes[to as usize].incoming.insert(mid);
        let dir = &mut self.links.get_mut(&key).expect("live link").dirs[d];
        if item.phase == Phase::Spread {
            dir.spread_used += 1;
        }
        dir.active = Some(Transfer {
            msg: mid,
            sender: from,
            receiver: to,
            phase: item.phase,
            progress: item.progress,
            started_at: now,
            completes_at,
        });
        self.completions.insert((completes_at, key.0, key.1, d));
        let limit = if item.phase == Phase::Spread { limit } else { None };
        self.emit(
            now,
            EventKind::TransferStarted { msg: mid, from, to, phase: item.phase, limit, progress: item.progress },
        );
        true
    }
}

fn enqueue(dir: &mut Direction, plan: TransferPlan) {
    let direct = plan.direct.into_iter().map(|msg| Planned { msg, phase: Phase::Direct, progress: None });
    let neighbor = plan.neighbor.into_iter().map(|msg| Planned { msg, phase: Phase::Neighbor, progress: None });
    let spread = plan.spread.into_iter().map(|s| Planned { msg: s.msg, phase: Phase::Spread, progress: s.progress });
    for p in direct.chain(neighbor).chain(spread) {
        dir.offered.insert(p.msg);
        dir.queue.push_back(p);
    }
}
