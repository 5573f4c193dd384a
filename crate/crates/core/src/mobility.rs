//! Group-based random waypoint movement on a rectangular plane.

use rand::Rng;

use crate::config::GroupConfig;
use crate::positioning::Position;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub width: f64,
    pub height: f64,
}

impl Bounds {
    pub fn new(width: f64, height: f64) -> Self {
        Bounds { width, height }
    }

    pub fn contains(&self, p: &Position) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Position {
        Position::new(rng.random_range(0.0..=self.width), rng.random_range(0.0..=self.height))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MobilityState {
    pub group: usize,
    pub true_position: Position,
    pub waypoint: Position,
    pub speed: f64,
    /// Absolute simulated time (seconds) at which the node may move again.
    pub pause_until: f64,
}

fn draw_speed<R: Rng + ?Sized>(g: &GroupConfig, rng: &mut R) -> f64 {
    if g.speed_max > g.speed_min {
        rng.random_range(g.speed_min..=g.speed_max)
    } else {
        g.speed_min
    }
}

fn draw_pause<R: Rng + ?Sized>(g: &GroupConfig, rng: &mut R) -> f64 {
    if g.pause_max > g.pause_min {
        rng.random_range(g.pause_min..=g.pause_max)
    } else {
        g.pause_min
    }
}

/// Places every node uniformly at random and draws its first leg.
///
/// `rngs` supplies one generator per node so each node's trajectory is an
/// independent stream; it must yield at least as many generators as nodes.
pub fn init_nodes<R, I>(groups: &[GroupConfig], bounds: Bounds, rngs: I) -> Vec<MobilityState>
where
    R: Rng,
    I: IntoIterator<Item = R>,
{
    let mut rngs = rngs.into_iter();
    let mut out = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        for _ in 0..g.count {
            let mut rng = rngs.next().expect("one rng per node");
            out.push(init_node(gi, g, bounds, &mut rng));
        }
    }
    out
}

pub fn init_node<R: Rng + ?Sized>(group: usize, g: &GroupConfig, bounds: Bounds, rng: &mut R) -> MobilityState {
    let true_position = bounds.random_point(rng);
    let waypoint = bounds.random_point(rng);
    let speed = draw_speed(g, rng);
    MobilityState { group, true_position, waypoint, speed, pause_until: 0.0 }
}

impl MobilityState {
    pub fn is_paused(&self, now: f64) -> bool {
        now < self.pause_until
    }

    /// Moves the node through the step `[now, now + dt)`.
    ///
    /// A paused node stays put. A moving node covers `speed * dt` toward its
    /// waypoint, stopping exactly on it; arrival starts a pause and draws the
    /// next waypoint and speed.
    pub fn advance<R: Rng + ?Sized>(&mut self, g: &GroupConfig, bounds: Bounds, now: f64, dt: f64, rng: &mut R) {
        debug_assert!(dt > 0.0);
        if self.is_paused(now) {
            return;
        }
        let step = self.speed * dt;
        let to_go = self.true_position.distance(&self.waypoint);
        if to_go <= step {
            self.true_position = self.waypoint;
            self.pause_until = now + dt + draw_pause(g, rng);
            self.waypoint = bounds.random_point(rng);
            self.speed = draw_speed(g, rng);
        } else if step > 0.0 {
            let k = step / to_go;
            let p = self.true_position;
            self.true_position = Position::new(
                p.x + (self.waypoint.x - p.x) * k,
                p.y + (self.waypoint.y - p.y) * k,
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rngs(n: u64) -> impl Iterator<Item = ChaCha8Rng> {
        (0..n).map(ChaCha8Rng::seed_from_u64)
    }

    #[test]
    fn table1_node_count() {
        let cfg = SimConfig::table1();
        let b = Bounds::new(cfg.world_width_m, cfg.world_height_m);
        let nodes = init_nodes(&cfg.node_groups, b, rngs(1000));
        assert_eq!(nodes.len(), 126);
        assert!(nodes.iter().all(|n| b.contains(&n.true_position)));
        assert_eq!(nodes.iter().filter(|n| n.group == 2).count(), 6);
    }

    #[test]
    fn empty_group() {
        let g = vec![GroupConfig::new("none", 0, (1.0, 2.0), (0.0, 1.0))];
        assert!(init_nodes(&g, Bounds::new(10.0, 10.0), rngs(4)).is_empty());
    }

    #[test]
    fn pause_holds_position() {
        let g = GroupConfig::new("p", 1, (1.0, 1.0), (120.0, 120.0));
        let b = Bounds::new(100.0, 100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = MobilityState {
            group: 0,
            true_position: Position::new(10.0, 10.0),
            waypoint: Position::new(10.05, 10.0),
            speed: 1.0,
            pause_until: 0.0,
        };
        let dt = 0.1;
        s.advance(&g, b, 0.0, dt, &mut rng);
        assert_eq!(s.true_position, Position::new(10.05, 10.0));
        let parked = s.true_position;
        let mut now = dt;
        for _ in 0..1200 {
            s.advance(&g, b, now, dt, &mut rng);
            assert_eq!(s.true_position, parked);
            now = (now * 10.0 + 1.0).round() / 10.0;
        }
        s.advance(&g, b, now, dt, &mut rng);
        assert_ne!(s.true_position, parked);
    }

    #[test]
    fn arrival_time_matches_kinematics() {
        let g = GroupConfig::new("c", 1, (7.0, 7.0), (0.0, 0.0));
        let b = Bounds::new(1000.0, 1000.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let start = Position::new(100.0, 100.0);
        let wp = Position::new(400.0, 500.0);
        let mut s = MobilityState { group: 0, true_position: start, waypoint: wp, speed: 7.0, pause_until: 0.0 };
        let dt = 0.1;
        let mut steps = 0u32;
        while s.true_position != wp {
            s.advance(&g, b, steps as f64 * dt, dt, &mut rng);
            steps += 1;
        }
        let expected = start.distance(&wp) / 7.0;
        let simulated = steps as f64 * dt;
        assert!((simulated - expected).abs() <= dt, "{simulated} vs {expected}");
    }

    #[test]
    fn displacement_and_bounds_hold() {
        let cfg = SimConfig::desk();
        let b = Bounds::new(cfg.world_width_m, cfg.world_height_m);
        let mut nodes = init_nodes(&cfg.node_groups, b, rngs(30));
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let dt = 0.1;
        for step in 0..20_000 {
            let now = step as f64 * dt;
            for n in nodes.iter_mut() {
                let g = &cfg.node_groups[n.group];
                let before = n.true_position;
                n.advance(g, b, now, dt, &mut rng);
                assert!(before.distance(&n.true_position) <= g.speed_max * dt + 1e-9);
                assert!(b.contains(&n.true_position));
                assert!(n.speed >= g.speed_min && n.speed <= g.speed_max);
            }
        }
    }
}
