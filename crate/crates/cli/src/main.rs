use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use centroid_dtn::harness::{parse_sweep_spec, run_sweep};
use centroid_dtn::metrics::{compute_report, report_row, RowKey, CSV_HEADER};
use centroid_dtn::oracle::oracle_report_from_log;
use centroid_dtn::{parse_config, run, EventLog, RouterSpec, SimTime};

#[derive(Parser)]
#[command(name = "dtnsim", version, about = "Deterministic DTN routing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its metrics row.
    Simulate {
        /// INI config file; an empty file means the full-scale defaults.
        #[arg(long)]
        config: PathBuf,
        /// centroid, centermass, vector or epidemic, optionally with `-noisy`.
        #[arg(long)]
        router: RouterSpec,
        #[arg(long)]
        seed: u64,
        /// Position noise amplitude in meters, overriding the config.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the event log here.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Run every (router, value, seed) cell of a sweep spec.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write each cell's event log into this directory.
        #[arg(long)]
        events_dir: Option<PathBuf>,
    },
    /// Best-case delivery computed from an event log's contact trace.
    Oracle {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn simulate(config: &Path, router: RouterSpec, seed: u64, noise: Option<f64>, out: &Path, events: Option<&Path>) -> Result<()> {
    let mut cfg = parse_config(&read(config)?).with_context(|| format!("in {}", config.display()))?;
    cfg.seed = seed;
    if let Some(n) = noise {
        cfg.noise_amplitude_m = n;
    }
    let result = run(&cfg, router)?;
    let report = compute_report(&result.log, SimTime::from_secs_f64(cfg.warmup_s));
    let key = RowKey {
        router: router.to_string(),
        bandwidth_bps: cfg.bandwidth_bps,
        buffer_bytes: cfg.buffer_bytes,
        noise_m: result.log.meta.noise_m,
    };
    write(out, &format!("{CSV_HEADER}\n{}\n", report_row(&key, seed, &report)))?;
    if let Some(path) = events {
        write(path, &result.log.to_text())?;
    }
    Ok(())
}

fn sweep(spec_path: &Path, out: &Path, events_dir: Option<&Path>) -> Result<()> {
    let spec = parse_sweep_spec(&read(spec_path)?).with_context(|| format!("in {}", spec_path.display()))?;
    let result = run_sweep(&spec, events_dir.is_some())?;
    write(out, &result.to_csv())?;
    if let Some(dir) = events_dir {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for r in &result.results {
            let name = format!("{}_{}_{}.log", r.cell.router, r.cell.value, r.cell.seed);
            write(&dir.join(name), &r.log.as_ref().expect("logs requested").to_text())?;
        }
    }
    Ok(())
}

fn oracle(events: &Path, out: &Path) -> Result<()> {
    let log = EventLog::parse(&read(events)?).with_context(|| format!("in {}", events.display()))?;
    let report = oracle_report_from_log(&log)?;
    let m = &log.meta;
    let key = RowKey { router: "oracle".into(), bandwidth_bps: m.bandwidth_bps, buffer_bytes: m.buffer_bytes, noise_m: m.noise_m };
    write(out, &format!("{CSV_HEADER}\n{}\n", report_row(&key, m.seed, &report)))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate { config, router, seed, noise, out, events } => {
            simulate(&config, router, seed, noise, &out, events.as_deref())
        }
        Command::Sweep { spec, out, events_dir } => sweep(&spec, &out, events_dir.as_deref()),
        Command::Oracle { events, out } => oracle(&events, &out),
    }
}
