use std::collections::BTreeMap;
use std::fmt::Write as _;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::events::{EventKind, EventLog};
use crate::time::SimTime;
use crate::MessageId;

/// Column order shared by every CSV this crate writes.
pub const CSV_HEADER: &str =
    "router,bandwidth_bps,buffer_bytes,noise_m,seed,created,delivered,forwarded,delivery_prob,avg_latency_s,overhead,efficacy";

/// Rendered in place of a ratio that has no value because nothing was
/// delivered.
pub const UNDEFINED: &str = "undefined";
/// Rendered in place of a metric that does not apply to the row.
pub const NOT_APPLICABLE: &str = "n/a";

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub created: u64,
    pub delivered: u64,
    pub forwarded: u64,
    pub delivery_probability: f64,
    /// `None` when nothing was delivered.
    pub avg_latency_s: Option<f64>,
    /// `None` when nothing was delivered.
    pub overhead_ratio: Option<f64>,
    /// `None` only for reports where efficacy is meaningless (the oracle).
    pub efficacy: Option<f64>,
}

pub fn overhead_ratio(forwarded: u64, delivered: u64) -> Option<f64> {
    (delivered > 0).then(|| (forwarded as f64 - delivered as f64) / delivered as f64)
}

/// Delivery probability over overhead, with the overhead clamped below at 1.
/// An undefined overhead (no deliveries) gives 0.
pub fn efficacy(delivery_probability: f64, overhead: Option<f64>) -> f64 {
    match overhead {
        Some(o) => delivery_probability / o.max(1.0),
        None => 0.0,
    }
}

impl MetricsReport {
    pub fn from_counts(created: u64, delivered: u64, forwarded: u64, latency_sum_s: f64) -> Self {
        let dp = if created > 0 { delivered as f64 / created as f64 } else { 0.0 };
        let overhead = overhead_ratio(forwarded, delivered);
        MetricsReport {
            created,
            delivered,
            forwarded,
            delivery_probability: dp,
            avg_latency_s: (delivered > 0).then(|| latency_sum_s / delivered as f64),
            overhead_ratio: overhead,
            efficacy: Some(efficacy(dp, overhead)),
        }
    }
}

/// Reduces an event log to its metrics, counting only messages created at or
/// after `warmup`.
pub fn compute_report(log: &EventLog, warmup: SimTime) -> MetricsReport {
    let mut created: BTreeMap<MessageId, SimTime> = BTreeMap::new();
    let mut first_delivery: BTreeMap<MessageId, SimTime> = BTreeMap::new();
    let mut forwarded = 0u64;
    for ev in &log.events {
        match ev.kind {
            EventKind::MessageCreated { msg, .. } if ev.time >= warmup => {
                created.insert(msg, ev.time);
            }
            EventKind::TransferCompleted { msg, .. } if created.contains_key(&msg) => forwarded += 1,
            EventKind::MessageDelivered { msg, .. } if created.contains_key(&msg) => {
                first_delivery.entry(msg).or_insert(ev.time);
            }
            _ => {}
        }
    }
    let latency_sum: f64 = first_delivery.iter().map(|(m, t)| (*t - created[m]).as_secs_f64()).sum();
    MetricsReport::from_counts(created.len() as u64, first_delivery.len() as u64, forwarded, latency_sum)
}

/// Mean of a metric across runs with its 95% Student-t half-width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    /// `None` with fewer than two values.
    pub half_width: Option<f64>,
}

pub fn mean_ci(values: &[f64]) -> Option<Stat> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let half_width = (n >= 2).then(|| {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        if var == 0.0 {
            return 0.0;
        }
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("dof >= 1").inverse_cdf(0.975);
        t * (var / n as f64).sqrt()
    });
    Some(Stat { n, mean, half_width })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateReport {
    pub runs: usize,
    pub created: Stat,
    pub delivered: Stat,
    pub forwarded: Stat,
    pub delivery_probability: Stat,
    /// Taken over the runs where the metric is defined.
    pub avg_latency_s: Option<Stat>,
    pub overhead_ratio: Option<Stat>,
    pub efficacy: Option<Stat>,
}

pub fn aggregate(reports: &[MetricsReport]) -> Option<AggregateReport> {
    if reports.is_empty() {
        return None;
    }
    let col = |f: &dyn Fn(&MetricsReport) -> f64| mean_ci(&reports.iter().map(f).collect::<Vec<_>>()).expect("nonempty");
    let opt = |f: &dyn Fn(&MetricsReport) -> Option<f64>| mean_ci(&reports.iter().filter_map(f).collect::<Vec<_>>());
    Some(AggregateReport {
        runs: reports.len(),
        created: col(&|r| r.created as f64),
        delivered: col(&|r| r.delivered as f64),
        forwarded: col(&|r| r.forwarded as f64),
        delivery_probability: col(&|r| r.delivery_probability),
        avg_latency_s: opt(&|r| r.avg_latency_s),
        overhead_ratio: opt(&|r| r.overhead_ratio),
        efficacy: opt(&|r| r.efficacy),
    })
}

/// The leading columns that identify a row.
#[derive(Clone, Debug, PartialEq)]
pub struct RowKey {
    pub router: String,
    pub bandwidth_bps: u64,
    pub buffer_bytes: u64,
    pub noise_m: f64,
}

fn float(v: f64) -> String {
    format!("{v:.6}")
}

fn opt_float(v: Option<f64>, missing: &str) -> String {
    v.map_or_else(|| missing.to_string(), float)
}

fn stat(s: &Stat) -> String {
    match s.half_width {
        Some(hw) => format!("{:.6}+-{:.6}", s.mean, hw),
        None => float(s.mean),
    }
}

fn opt_stat(s: &Option<Stat>, missing: &str) -> String {
    s.as_ref().map_or_else(|| missing.to_string(), stat)
}

fn key_cols(key: &RowKey) -> String {
    format!("{},{},{},{}", key.router, key.bandwidth_bps, key.buffer_bytes, key.noise_m)
}

pub fn report_row(key: &RowKey, seed: u64, r: &MetricsReport) -> String {
    let mut s = key_cols(key);
    write!(
        s,
        ",{seed},{},{},{},{},{},{},{}",
        r.created,
        r.delivered,
        r.forwarded,
        float(r.delivery_probability),
        opt_float(r.avg_latency_s, UNDEFINED),
        opt_float(r.overhead_ratio, UNDEFINED),
        opt_float(r.efficacy, NOT_APPLICABLE),
    )
    .expect("writing to a String");
    s
}

/// Aggregate row: seed column `mean`, each metric as `mean+-half_width`.
pub fn aggregate_row(key: &RowKey, a: &AggregateReport) -> String {
    let mut s = key_cols(key);
    write!(
        s,
        ",mean,{},{},{},{},{},{},{}",
        stat(&a.created),
        stat(&a.delivered),
        stat(&a.forwarded),
        stat(&a.delivery_probability),
        opt_stat(&a.avg_latency_s, UNDEFINED),
        opt_stat(&a.overhead_ratio, UNDEFINED),
        opt_stat(&a.efficacy, NOT_APPLICABLE),
    )
    .expect("writing to a String");
    s
}
