//! Parameter sweeps over one config axis, routers and seeds.
//!
//! A sweep spec is a config file with an extra `[sweep]` section:
//!
//! ```text
//! preset = desk
//!
//! [sweep]
//! axis = bandwidth_bps
//! values = 125000, 10000000
//! routers = centroid, centermass, vector, epidemic
//! seeds = 1, 2, 3, 4
//! ```

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::{parse_config, SimConfig};
use crate::error::{Result, SimError};
use crate::events::EventLog;
use crate::metrics::{aggregate, aggregate_row, compute_report, report_row, MetricsReport, RowKey, CSV_HEADER};
use crate::routers::RouterSpec;
use crate::sim::run;
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    BandwidthBps,
    BufferBytes,
    NoiseAmplitudeM,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::BandwidthBps => "bandwidth_bps",
            Axis::BufferBytes => "buffer_bytes",
            Axis::NoiseAmplitudeM => "noise_amplitude_m",
        }
    }

    /// `base` with this axis set to `value`.
    pub fn apply(&self, base: &SimConfig, value: f64) -> Result<SimConfig> {
        let mut cfg = base.clone();
        let whole = || {
            if value >= 0.0 && value.fract() == 0.0 && value <= u64::MAX as f64 {
                Ok(value as u64)
            } else {
                Err(SimError::InvalidArgument(format!("{} needs a whole number, got {value}", self.as_str())))
            }
        };
        match self {
            Axis::BandwidthBps => cfg.bandwidth_bps = whole()?,
            Axis::BufferBytes => cfg.buffer_bytes = whole()?,
            Axis::NoiseAmplitudeM => cfg.noise_amplitude_m = value,
        }
        Ok(cfg)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Axis> {
        match s.trim() {
            "bandwidth_bps" => Ok(Axis::BandwidthBps),
            "buffer_bytes" => Ok(Axis::BufferBytes),
            "noise_amplitude_m" | "noise_m" => Ok(Axis::NoiseAmplitudeM),
            other => Err(SimError::InvalidArgument(format!(
                "unknown sweep axis `{other}` (expected bandwidth_bps, buffer_bytes or noise_amplitude_m)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: SimConfig,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub routers: Vec<RouterSpec>,
    pub seeds: Vec<u64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(SimError::InvalidArgument(format!("sweep needs at least one {what}")));
        if self.values.is_empty() {
            return empty("axis value");
        }
        if self.routers.is_empty() {
            return empty("router");
        }
        if self.seeds.is_empty() {
            return empty("seed");
        }
        self.base.validate()?;
        for &v in &self.values {
            self.axis.apply(&self.base, v)?.validate()?;
        }
        Ok(())
    }

    /// Every (router, value, seed) cell in output order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.routers.len() * self.values.len() * self.seeds.len());
        for &router in &self.routers {
            for &value in &self.values {
                for &seed in &self.seeds {
                    out.push(Cell { router, value, seed });
                }
            }
        }
        out
    }

    pub fn cell_config(&self, cell: &Cell) -> Result<SimConfig> {
        let mut cfg = self.axis.apply(&self.base, cell.value)?;
        cfg.seed = cell.seed;
        Ok(cfg)
    }
}

/// Splits out the `[sweep]` section and parses the rest as a config.
pub fn parse_sweep_spec(text: &str) -> Result<SweepSpec> {
    let mut config_text = String::with_capacity(text.len());
    let mut in_sweep = false;
    let mut axis = None;
    let mut values = None;
    let mut routers = None;
    let mut seeds = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| SimError::Parse { line, message };
        let trimmed = raw.split(['#', ';']).next().unwrap_or("").trim();
        if trimmed.starts_with('[') {
            in_sweep = trimmed == "[sweep]";
        }
        if !in_sweep {
            config_text.push_str(raw);
            config_text.push('\n');
            continue;
        }
        // Blank out the line so config errors keep their line numbers.
        config_text.push('\n');
        if trimmed.is_empty() || trimmed == "[sweep]" {
            continue;
        }
        let (k, v) = trimmed.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{trimmed}`")))?;
        let items: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        match k.trim() {
            "axis" => axis = Some(v.parse::<Axis>().map_err(|e| err(e.to_string()))?),
            "values" => {
                values = Some(
                    items
                        .iter()
                        .map(|s| s.replace('_', "").parse::<f64>().map_err(|_| err(format!("bad value `{s}`"))))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            "routers" => {
                routers = Some(
                    items.iter().map(|s| s.parse::<RouterSpec>().map_err(|e| err(e.to_string()))).collect::<Result<Vec<_>>>()?,
                )
            }
            "seeds" => {
                seeds = Some(
                    items
                        .iter()
                        .map(|s| s.parse::<u64>().map_err(|_| err(format!("bad seed `{s}`"))))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            other => return Err(err(format!("unknown sweep key `{other}`"))),
        }
    }

    let missing = |k: &str| SimError::InvalidArgument(format!("sweep spec is missing `{k}`"));
    let spec = SweepSpec {
        base: parse_config(&config_text)?,
        axis: axis.ok_or_else(|| missing("axis"))?,
        values: values.ok_or_else(|| missing("values"))?,
        routers: routers.ok_or_else(|| missing("routers"))?,
        seeds: seeds.ok_or_else(|| missing("seeds"))?,
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub router: RouterSpec,
    pub value: f64,
    pub seed: u64,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "router={} value={} seed={}", self.router, self.value, self.seed)
    }
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub cell: Cell,
    pub key: RowKey,
    pub report: MetricsReport,
    /// Kept only when asked for.
    pub log: Option<EventLog>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub axis: Axis,
    pub results: Vec<CellResult>,
}

/// Runs one cell on its own; the result is identical to the same cell's run
/// inside a sweep.
pub fn run_cell(spec: &SweepSpec, cell: Cell, keep_log: bool) -> Result<CellResult> {
    let wrap = |e: SimError| SimError::Cell { cell: cell.to_string(), source: Box::new(e) };
    let cfg = spec.cell_config(&cell).map_err(wrap)?;
    let out = run(&cfg, cell.router).map_err(wrap)?;
    let report = compute_report(&out.log, SimTime::from_secs_f64(cfg.warmup_s));
    let key = RowKey {
        router: cell.router.to_string(),
        bandwidth_bps: cfg.bandwidth_bps,
        buffer_bytes: cfg.buffer_bytes,
        noise_m: cell.router.effective_noise(cfg.noise_amplitude_m),
    };
    Ok(CellResult { cell, key, report, log: keep_log.then_some(out.log) })
}

/// Runs every cell, in parallel, and returns results in spec order.
pub fn run_sweep(spec: &SweepSpec, keep_logs: bool) -> Result<SweepResult> {
    spec.validate()?;
    let results = spec.cells().into_par_iter().map(|c| run_cell(spec, c, keep_logs)).collect::<Vec<_>>();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { axis: spec.axis, results })
}

impl SweepResult {
    /// Per-seed rows, each (router, value) group followed by its aggregate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        let mut i = 0;
        while i < self.results.len() {
            let head = &self.results[i].cell;
            let group: Vec<&CellResult> = self.results[i..]
                .iter()
                .take_while(|r| r.cell.router == head.router && r.cell.value == head.value)
                .collect();
            for r in &group {
                out.push_str(&report_row(&r.key, r.cell.seed, &r.report));
                out.push('\n');
            }
            let reports: Vec<MetricsReport> = group.iter().map(|r| r.report.clone()).collect();
            let agg = aggregate(&reports).expect("group is nonempty");
            out.push_str(&aggregate_row(&group[0].key, &agg));
            out.push('\n');
            i += group.len();
        }
        out
    }

    pub fn reports_for(&self, router: RouterSpec, value: f64) -> Vec<&MetricsReport> {
        self.results.iter().filter(|r| r.cell.router == router && r.cell.value == value).map(|r| &r.report).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routers::RouterKind;

    const SPEC: &str = "\
preset = desk
duration_s = 1200
warmup_s = 100

[sweep]
axis = bandwidth_bps
values = 125_000, 10000000
routers = centroid, epidemic
seeds = 1, 2
";

    #[test]
    fn parses_spec() {
        let s = parse_sweep_spec(SPEC).unwrap();
        assert_eq!(s.axis, Axis::BandwidthBps);
        assert_eq!(s.values, vec![125_000.0, 10_000_000.0]);
        assert_eq!(s.routers, vec![RouterSpec::new(RouterKind::Centroid, false), RouterSpec::new(RouterKind::Epidemic, false)]);
        assert_eq!(s.seeds, vec![1, 2]);
        assert_eq!(s.base.duration_s, 1200.0);
        assert_eq!(s.cells().len(), 8);
    }

    #[test]
    fn spec_errors() {
        assert!(parse_sweep_spec("[sweep]\naxis = speed\nvalues=1\nrouters=centroid\nseeds=1\n").is_err());
        assert!(parse_sweep_spec("[sweep]\naxis = buffer_bytes\nvalues=\nrouters=centroid\nseeds=1\n").is_err());
        assert!(parse_sweep_spec("[sweep]\naxis = buffer_bytes\nvalues=1.5\nrouters=centroid\nseeds=1\n").is_err());
        assert!(parse_sweep_spec("[sweep]\naxis = buffer_bytes\nvalues=1\nrouters=prophet\nseeds=1\n").is_err());
        assert!(parse_sweep_spec("[sweep]\naxis = buffer_bytes\nvalues=1\nrouters=centroid\n").is_err());
        match parse_sweep_spec("bogus = 1\n[sweep]\naxis = buffer_bytes\nvalues=1\nrouters=centroid\nseeds=1\n") {
            Err(SimError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn row_layout_and_cell_isolation() {
        let spec = parse_sweep_spec(SPEC).unwrap();
        let res = run_sweep(&spec, false).unwrap();
        let csv = res.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        // 2 routers x 2 values, each with 2 seed rows and 1 aggregate row.
        assert_eq!(lines.len(), 1 + 4 * 3);
        assert!(lines[3].starts_with("centroid,125000,5000000,0,mean,"));
        assert!(lines[4].starts_with("centroid,10000000,5000000,0,1,"));

        let alone = run_cell(&spec, res.results[5].cell, false).unwrap();
        assert_eq!(alone.report, res.results[5].report);
    }

    #[test]
    fn single_cell_has_two_rows() {
        let spec = parse_sweep_spec(
            "preset = desk\nduration_s = 300\nwarmup_s = 10\n[sweep]\naxis = noise_amplitude_m\nvalues = 20\nrouters = vector\nseeds = 7\n",
        )
        .unwrap();
        let csv = run_sweep(&spec, false).unwrap().to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().starts_with("vector,10000000,5000000,20,mean,"));
    }
}
