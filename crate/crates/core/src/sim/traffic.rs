use rand::Rng;

use crate::config::TrafficConfig;
use crate::time::SimTime;
use crate::NodeId;

/// One scheduled message creation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrafficItem {
    pub at: SimTime,
    pub src: NodeId,
    pub dst: NodeId,
    pub size_bytes: u64,
}

/// Uniform random traffic: gaps drawn from the configured interval, source
/// and destination uniform over distinct nodes, sizes uniform in bytes.
///
/// The first creation falls one gap after `start`; nothing is scheduled at or
/// past `end`.
pub struct TrafficGenerator<R> {
    rng: R,
    cfg: TrafficConfig,
    nodes: u32,
    next_at: f64,
    end: f64,
}

impl<R: Rng> TrafficGenerator<R> {
    pub fn new(cfg: TrafficConfig, nodes: usize, start_s: f64, end_s: f64, mut rng: R) -> Self {
        let first = start_s + draw_gap(&cfg, &mut rng);
        TrafficGenerator { rng, cfg, nodes: nodes as u32, next_at: first, end: end_s }
    }

    /// Time of the next creation, if any remains.
    pub fn peek_time(&self) -> Option<SimTime> {
        (self.nodes >= 2 && self.next_at < self.end).then(|| SimTime::from_secs_f64(self.next_at))
    }
}

fn draw_gap<R: Rng>(cfg: &TrafficConfig, rng: &mut R) -> f64 {
    if cfg.interval_max_s > cfg.interval_min_s {
        rng.random_range(cfg.interval_min_s..=cfg.interval_max_s)
    } else {
        cfg.interval_min_s
    }
}

impl<R: Rng> Iterator for TrafficGenerator<R> {
    type Item = TrafficItem;

    fn next(&mut self) -> Option<TrafficItem> {
        let at = self.peek_time()?;
        let src = self.rng.random_range(0..self.nodes);
        let dst = loop {
            let d = self.rng.random_range(0..self.nodes);
            if d != src {
                break d;
            }
        };
        let size_bytes = self.rng.random_range(self.cfg.size_min_bytes..=self.cfg.size_max_bytes);
        self.next_at += draw_gap(&self.cfg, &mut self.rng);
        Some(TrafficItem { at, src, dst, size_bytes })
    }
}
