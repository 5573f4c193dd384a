//! Planar geometry, noisy GPS sampling and the centroid running mean.

use std::ops::{Add, Sub};

use rand::Rng;

use crate::error::SimError;

/// A location in meters on the simulation plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add<Velocity> for Position {
    type Output = Position;
    fn add(self, v: Velocity) -> Position {
        Position::new(self.x + v.vx, self.y + v.vy)
    }
}

impl Sub for Position {
    type Output = Velocity;
    /// Displacement from `rhs` to `self`.
    fn sub(self, rhs: Position) -> Velocity {
        Velocity::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// A 2-D vector in m/s (or a plain displacement in meters).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Velocity {
    pub vx: f64,
    pub vy: f64,
}

impl Velocity {
    pub const fn new(vx: f64, vy: f64) -> Self {
        Velocity { vx, vy }
    }

    pub fn magnitude(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    pub fn scale(self, k: f64) -> Velocity {
        Velocity::new(self.vx * k, self.vy * k)
    }

    pub fn dot(&self, o: &Velocity) -> f64 {
        self.vx * o.vx + self.vy * o.vy
    }

    pub fn cross(&self, o: &Velocity) -> f64 {
        self.vx * o.vy - self.vy * o.vx
    }
}

/// Position sampler with uniform per-axis noise of amplitude `noise_amplitude_m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GpsSampler {
    pub interval_s: f64,
    pub noise_amplitude_m: f64,
}

impl GpsSampler {
    pub fn new(interval_s: f64, noise_amplitude_m: f64) -> Result<Self, SimError> {
        if !(interval_s > 0.0) || !interval_s.is_finite() {
            return Err(SimError::InvalidArgument(format!(
                "gps interval must be positive, got {interval_s}"
            )));
        }
        if !(noise_amplitude_m >= 0.0) || !noise_amplitude_m.is_finite() {
            return Err(SimError::InvalidArgument(format!(
                "noise amplitude must be non-negative, got {noise_amplitude_m}"
            )));
        }
        Ok(GpsSampler { interval_s, noise_amplitude_m })
    }

    pub fn sample<R: Rng + ?Sized>(&self, truth: Position, rng: &mut R) -> Position {
        sample_position(truth, self.noise_amplitude_m, rng)
    }
}

/// Adds independent uniform noise in `[-amplitude, amplitude]` to each axis.
///
/// A zero amplitude returns `truth` unchanged and consumes no randomness.
pub fn sample_position<R: Rng + ?Sized>(truth: Position, amplitude: f64, rng: &mut R) -> Position {
    if amplitude <= 0.0 {
        return truth;
    }
    let dx = rng.random_range(-amplitude..=amplitude);
    let dy = rng.random_range(-amplitude..=amplitude);
    Position::new(truth.x + dx, truth.y + dy)
}

/// Running mean of every position sample a node has taken.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CentroidState {
    centroid: Position,
    sample_count: u64,
    max_centroid_distance_m: f64,
}

impl CentroidState {
    pub fn new() -> Self {
        Self::default()
    }

    /// `None` until the first sample arrives.
    pub fn centroid(&self) -> Option<Position> {
        (self.sample_count > 0).then_some(self.centroid)
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    /// Longest centroid distance observed at any encounter so far.
    pub fn max_centroid_distance(&self) -> f64 {
        self.max_centroid_distance_m
    }

    /// Folds one sample in: `C += (x - C) / t` with `t` the new sample count.
    pub fn update(&mut self, sample: Position) {
        self.sample_count += 1;
        let t = self.sample_count as f64;
        self.centroid.x += (sample.x - self.centroid.x) / t;
        self.centroid.y += (sample.y - self.centroid.y) / t;
    }

    /// Raises the running maximum; never lowers it.
    pub fn observe_distance(&mut self, distance_m: f64) {
        if distance_m > self.max_centroid_distance_m {
            self.max_centroid_distance_m = distance_m;
        }
    }
}

pub fn update_centroid(mut state: CentroidState, sample: Position) -> CentroidState {
    state.update(sample);
    state
}

/// Arithmetic mean of `samples`, computed in one pass.
pub fn batch_centroid(samples: &[Position]) -> Result<Position, SimError> {
    if samples.is_empty() {
        return Err(SimError::InvalidArgument("centroid of an empty sample list".into()));
    }
    let n = samples.len() as f64;
    let (sx, sy) = samples.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Ok(Position::new(sx / n, sy / n))
}

/// Finite-difference velocity between two consecutive samples.
pub fn estimate_velocity(previous: Position, current: Position, interval_s: f64) -> Velocity {
    assert!(interval_s > 0.0, "sampling interval must be positive");
    (current - previous).scale(1.0 / interval_s)
}
