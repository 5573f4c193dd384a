//! Simulation parameters, the two shipped presets and the INI-style parser.
//!
//! The text format is line oriented:
//!
//! ```text
//! # comment
//! preset = desk            ; optional, must come before any other key
//! duration_s = 7200
//! bandwidth_bps = 125000
//!
//! [group:pedestrians]
//! count = 20
//! speed_min = 0.5
//! speed_max = 1.5
//! pause_min = 0
//! pause_max = 120
//! ```
//!
//! Missing keys keep their preset value. A file that declares any
//! `[group:<name>]` section replaces the preset's node groups entirely.

use crate::error::{Result, SimError};

#[derive(Clone, Debug, PartialEq)]
pub struct GroupConfig {
    pub name: String,
    pub count: usize,
    pub speed_min: f64,
    pub speed_max: f64,
    pub pause_min: f64,
    pub pause_max: f64,
}

impl GroupConfig {
    pub fn new(name: &str, count: usize, speed: (f64, f64), pause: (f64, f64)) -> Self {
        GroupConfig {
            name: name.to_string(),
            count,
            speed_min: speed.0,
            speed_max: speed.1,
            pause_min: pause.0,
            pause_max: pause.1,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SimError::InvalidConfig(format!("group `{}`: {m}", self.name)));
        let nums = [self.speed_min, self.speed_max, self.pause_min, self.pause_max];
        if nums.iter().any(|v| !v.is_finite()) {
            return bad("non-finite speed or pause".into());
        }
        if !(0.0 <= self.speed_min && self.speed_min <= self.speed_max) {
            return bad(format!("need 0 <= speed_min <= speed_max, got {}..{}", self.speed_min, self.speed_max));
        }
        if !(0.0 <= self.pause_min && self.pause_min <= self.pause_max) {
            return bad(format!("need 0 <= pause_min <= pause_max, got {}..{}", self.pause_min, self.pause_max));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrafficConfig {
    pub interval_min_s: f64,
    pub interval_max_s: f64,
    pub size_min_bytes: u64,
    pub size_max_bytes: u64,
    pub ttl_s: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            interval_min_s: 25.0,
            interval_max_s: 35.0,
            size_min_bytes: 500_000,
            size_max_bytes: 1_000_000,
            ttl_s: 5.0 * 3600.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub duration_s: f64,
    pub warmup_s: f64,
    pub timestep_s: f64,
    pub world_width_m: f64,
    pub world_height_m: f64,
    pub transmit_range_m: f64,
    pub bandwidth_bps: u64,
    pub buffer_bytes: u64,
    pub node_groups: Vec<GroupConfig>,
    pub traffic: TrafficConfig,
    pub noise_amplitude_m: f64,
    pub gps_interval_s: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig::table1()
    }
}

impl SimConfig {
    /// The full-scale parameter set: 126 nodes, 12 h, 10 m range.
    pub fn table1() -> Self {
        SimConfig {
            duration_s: 12.0 * 3600.0,
            warmup_s: 1000.0,
            timestep_s: 0.1,
            world_width_m: 4500.0,
            world_height_m: 3400.0,
            transmit_range_m: 10.0,
            bandwidth_bps: 10_000_000,
            buffer_bytes: 5_000_000,
            node_groups: vec![
                GroupConfig::new("pedestrians", 80, (0.5, 1.5), (0.0, 120.0)),
                GroupConfig::new("cars", 40, (2.7, 13.9), (0.0, 120.0)),
                GroupConfig::new("trams", 6, (7.0, 10.0), (10.0, 30.0)),
            ],
            traffic: TrafficConfig::default(),
            noise_amplitude_m: 0.0,
            gps_interval_s: 1.0,
            seed: 0,
        }
    }

    /// Small preset that finishes in seconds: 30 nodes on 2 km x 2 km for 2 h
    /// with a 50 m range.
    pub fn desk() -> Self {
        SimConfig {
            duration_s: 2.0 * 3600.0,
            world_width_m: 2000.0,
            world_height_m: 2000.0,
            transmit_range_m: 50.0,
            node_groups: vec![
                GroupConfig::new("pedestrians", 20, (0.5, 1.5), (0.0, 120.0)),
                GroupConfig::new("cars", 8, (2.7, 13.9), (0.0, 120.0)),
                GroupConfig::new("trams", 2, (7.0, 10.0), (10.0, 30.0)),
            ],
            ..SimConfig::table1()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "table1" => Some(SimConfig::table1()),
            "desk" => Some(SimConfig::desk()),
            _ => None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_groups.iter().map(|g| g.count).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        let finite = [
            self.duration_s,
            self.warmup_s,
            self.timestep_s,
            self.world_width_m,
            self.world_height_m,
            self.transmit_range_m,
            self.noise_amplitude_m,
            self.gps_interval_s,
            self.traffic.interval_min_s,
            self.traffic.interval_max_s,
            self.traffic.ttl_s,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all numeric parameters must be finite");
        }
        if self.warmup_s < 0.0 {
            return bad("warmup_s must be >= 0");
        }
        if self.duration_s < 0.0 {
            return bad("duration_s must be >= 0");
        }
        // A zero-length run is allowed and simply produces an empty log.
        if self.duration_s > 0.0 && self.duration_s <= self.warmup_s {
            return bad("duration_s must exceed warmup_s");
        }
        if self.timestep_s <= 0.0 || crate::time::SimTime::from_secs_f64(self.timestep_s).as_micros() == 0 {
            return bad("timestep_s must be > 0 (and at least one microsecond)");
        }
        if self.gps_interval_s <= 0.0 {
            return bad("gps_interval_s must be > 0");
        }
        if self.world_width_m <= 0.0 || self.world_height_m <= 0.0 {
            return bad("world dimensions must be > 0");
        }
        if self.transmit_range_m <= 0.0 {
            return bad("transmit_range_m must be > 0");
        }
        if self.bandwidth_bps == 0 {
            return bad("bandwidth_bps must be > 0");
        }
        if self.buffer_bytes == 0 {
            return bad("buffer_bytes must be > 0");
        }
        if self.noise_amplitude_m < 0.0 {
            return bad("noise_amplitude_m must be >= 0");
        }
        let t = &self.traffic;
        if !(0.0 < t.interval_min_s && t.interval_min_s <= t.interval_max_s) {
            return bad("need 0 < msg_interval_min_s <= msg_interval_max_s");
        }
        if !(0 < t.size_min_bytes && t.size_min_bytes <= t.size_max_bytes) {
            return bad("need 0 < msg_size_min_bytes <= msg_size_max_bytes");
        }
        if t.ttl_s <= 0.0 {
            return bad("msg_ttl_s must be > 0");
        }
        for g in &self.node_groups {
            g.validate()?;
        }
        Ok(())
    }
}

/// Parses the INI-style format into a validated config on top of the `table1`
/// defaults (or the preset named by a leading `preset = ...`).
pub fn parse_config(text: &str) -> Result<SimConfig> {
    parse_config_with_base(text, SimConfig::table1())
}

pub fn parse_config_with_base(text: &str, base: SimConfig) -> Result<SimConfig> {
    let mut cfg = base;
    let mut groups: Vec<GroupConfig> = Vec::new();
    let mut section: Option<usize> = None;
    let mut seen_key = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| SimError::Parse { line, message };
        let stripped = strip_comment(raw).trim();
        if stripped.is_empty() {
            continue;
        }
        if let Some(header) = stripped.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| err(format!("unterminated section header `{stripped}`")))?
                .trim();
            let name = header
                .strip_prefix("group:")
                .ok_or_else(|| err(format!("unknown section `[{header}]`, expected `[group:<name>]`")))?
                .trim();
            if name.is_empty() {
                return Err(err("group name is empty".into()));
            }
            if groups.iter().any(|g| g.name == name) {
                return Err(err(format!("duplicate group `{name}`")));
            }
            groups.push(GroupConfig::new(name, 0, (0.0, 0.0), (0.0, 0.0)));
            section = Some(groups.len() - 1);
            continue;
        }
        let (key, value) = stripped
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| err(format!("expected `key = value`, got `{stripped}`")))?;
        if value.is_empty() {
            return Err(err(format!("missing value for `{key}`")));
        }

        if let Some(gi) = section {
            let g = &mut groups[gi];
            match key {
                "count" => g.count = parse_num(value).map_err(err)?,
                "speed_min" => g.speed_min = parse_num(value).map_err(err)?,
                "speed_max" => g.speed_max = parse_num(value).map_err(err)?,
                "pause_min" => g.pause_min = parse_num(value).map_err(err)?,
                "pause_max" => g.pause_max = parse_num(value).map_err(err)?,
                _ => return Err(err(format!("unknown group key `{key}`"))),
            }
            continue;
        }

        match key {
            "preset" => {
                if seen_key {
                    return Err(err("`preset` must precede all other keys".into()));
                }
                cfg = SimConfig::preset(value)
                    .ok_or_else(|| err(format!("unknown preset `{value}` (expected table1 or desk)")))?;
            }
            "duration_s" => cfg.duration_s = parse_num(value).map_err(err)?,
            "warmup_s" => cfg.warmup_s = parse_num(value).map_err(err)?,
            "timestep_s" => cfg.timestep_s = parse_num(value).map_err(err)?,
            "world_width_m" => cfg.world_width_m = parse_num(value).map_err(err)?,
            "world_height_m" => cfg.world_height_m = parse_num(value).map_err(err)?,
            "transmit_range_m" => cfg.transmit_range_m = parse_num(value).map_err(err)?,
            "bandwidth_bps" => cfg.bandwidth_bps = parse_num(value).map_err(err)?,
            "buffer_bytes" => cfg.buffer_bytes = parse_num(value).map_err(err)?,
            "noise_amplitude_m" => cfg.noise_amplitude_m = parse_num(value).map_err(err)?,
            "gps_interval_s" => cfg.gps_interval_s = parse_num(value).map_err(err)?,
            "seed" => cfg.seed = parse_num(value).map_err(err)?,
            "msg_interval_min_s" => cfg.traffic.interval_min_s = parse_num(value).map_err(err)?,
            "msg_interval_max_s" => cfg.traffic.interval_max_s = parse_num(value).map_err(err)?,
            "msg_size_min_bytes" => cfg.traffic.size_min_bytes = parse_num(value).map_err(err)?,
            "msg_size_max_bytes" => cfg.traffic.size_max_bytes = parse_num(value).map_err(err)?,
            "msg_ttl_s" => cfg.traffic.ttl_s = parse_num(value).map_err(err)?,
            _ => return Err(err(format!("unknown key `{key}`"))),
        }
        seen_key = true;
    }

    if !groups.is_empty() {
        cfg.node_groups = groups;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn strip_comment(line: &str) -> &str {
    let cut = line.find(['#', ';']).unwrap_or(line.len());
    &line[..cut]
}

fn parse_num<T: std::str::FromStr>(value: &str) -> std::result::Result<T, String> {
    value
        .replace('_', "")
        .parse()
        .map_err(|_| format!("cannot parse `{value}` as a number"))
}
