//! Acceptance checks. Runs as a plain binary so every criterion's verdict is
//! printed on its own line regardless of test-output capture.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use centroid_dtn::audit::audit_log;
use centroid_dtn::config::{GroupConfig, SimConfig};
use centroid_dtn::events::EventKind;
use centroid_dtn::harness::{run_sweep, Axis, SweepResult, SweepSpec};
use centroid_dtn::metrics::{efficacy, overhead_ratio, MetricsReport};
use centroid_dtn::oracle::{earliest_arrival, oracle_report_from_log, Contact, ContactTrace};
use centroid_dtn::positioning::{CentroidState, Position};
use centroid_dtn::routers::{RouterKind, RouterSpec};
use centroid_dtn::{run, SimTime};

const SEEDS: [u64; 4] = [1, 2, 3, 4];
const NOISE_M: f64 = 20.0;
const MAX_DEGRADATION_PP: f64 = 5.0;

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn acceptance_spec() -> SweepSpec {
    SweepSpec {
        base: SimConfig::desk(),
        axis: Axis::NoiseAmplitudeM,
        values: vec![0.0, NOISE_M],
        routers: RouterKind::ALL.iter().map(|&k| RouterSpec::new(k, false)).collect(),
        seeds: SEEDS.to_vec(),
    }
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn reports(sweep: &SweepResult, kind: RouterKind, noise: f64) -> Vec<&MetricsReport> {
    let r = sweep.reports_for(RouterSpec::new(kind, false), noise);
    assert_eq!(r.len(), SEEDS.len());
    r
}

fn mean_dp(sweep: &SweepResult, kind: RouterKind, noise: f64) -> f64 {
    mean(reports(sweep, kind, noise).iter().map(|r| r.delivery_probability))
}

/// Sum with Neumaier compensation; the reference for the running mean.
fn compensated_mean(xs: &[f64]) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = sum + x;
        c += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    (sum + c) / xs.len() as f64
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(1..=10_000usize);
        let (cx, cy) = (rng.random_range(-5000.0..5000.0), rng.random_range(-5000.0..5000.0));
        let spread = rng.random_range(0.0..3000.0);
        let pts: Vec<Position> = (0..n)
            .map(|_| Position::new(cx + rng.random_range(-spread..=spread), cy + rng.random_range(-spread..=spread)))
            .collect();
        let mut state = CentroidState::new();
        for &p in &pts {
            state.update(p);
        }
        let inc = state.centroid().expect("nonempty");
        let bx = compensated_mean(&pts.iter().map(|p| p.x).collect::<Vec<_>>());
        let by = compensated_mean(&pts.iter().map(|p| p.y).collect::<Vec<_>>());
        let scale = bx.hypot(by).max(1.0);
        worst = worst.max(inc.distance(&Position::new(bx, by)) / scale);
    }
    let elapsed = start.elapsed();
    Verdict {
        id: 1,
        name: "incremental centroid equals batch mean",
        pass: worst <= 1e-9 && elapsed < Duration::from_secs(5),
        detail: format!("max relative error {worst:.3e} over 1000 sequences in {:.2}s", elapsed.as_secs_f64()),
    }
}

fn criterion_2(sweep: &SweepResult, elapsed: Duration) -> Verdict {
    let degr = |k| 100.0 * (mean_dp(sweep, k, 0.0) - mean_dp(sweep, k, NOISE_M));
    let (c, cm, v) = (degr(RouterKind::Centroid), degr(RouterKind::CenterMass), degr(RouterKind::Vector));
    let bounded = c <= MAX_DEGRADATION_PP && cm <= MAX_DEGRADATION_PP;
    let below_vector = c <= v && cm <= v;
    Verdict {
        id: 2,
        name: "noise resilience",
        pass: bounded && below_vector && elapsed < Duration::from_secs(600),
        detail: format!(
            "degradation pp: centroid {c:.3}, centermass {cm:.3}, vector {v:.3}; <= {MAX_DEGRADATION_PP}: {bounded}; <= vector: {below_vector}"
        ),
    }
}

fn criterion_3(sweep: &SweepResult) -> Verdict {
    let mut exceptions = Vec::new();
    let mut margin = i64::MAX;
    for r in &sweep.results {
        let log = r.log.as_ref().expect("logs kept");
        let oracle = oracle_report_from_log(log).expect("well-formed log");
        assert_eq!(oracle.created, r.report.created);
        margin = margin.min(oracle.delivered as i64 - r.report.delivered as i64);
        if oracle.delivered < r.report.delivered {
            exceptions.push(format!("{}: oracle {} < {}", r.cell, oracle.delivered, r.report.delivered));
        }
    }
    Verdict {
        id: 3,
        name: "oracle dominance",
        pass: exceptions.is_empty(),
        detail: format!("{} cells, {} exceptions, smallest margin {margin} {:?}", sweep.results.len(), exceptions.len(), exceptions),
    }
}

fn mean_overhead(sweep: &SweepResult, k: RouterKind) -> f64 {
    mean(reports(sweep, k, 0.0).iter().map(|r| r.overhead_ratio.expect("deliveries happened")))
}

fn mean_efficacy(sweep: &SweepResult, k: RouterKind) -> f64 {
    mean(reports(sweep, k, 0.0).iter().map(|r| r.efficacy.expect("online router")))
}

fn criterion_4(sweep: &SweepResult) -> Verdict {
    let (v, cm, e) = (
        mean_overhead(sweep, RouterKind::Vector),
        mean_overhead(sweep, RouterKind::CenterMass),
        mean_overhead(sweep, RouterKind::Epidemic),
    );
    Verdict {
        id: 4,
        name: "overhead ordering",
        pass: v >= 3.0 * cm && e >= cm,
        detail: format!("mean overhead vector {v:.3}, centermass {cm:.3} (x3 = {:.3}), epidemic {e:.3}", 3.0 * cm),
    }
}

fn criterion_5(sweep: &SweepResult) -> Verdict {
    let (cm, c, v) = (
        mean_efficacy(sweep, RouterKind::CenterMass),
        mean_efficacy(sweep, RouterKind::Centroid),
        mean_efficacy(sweep, RouterKind::Vector),
    );
    Verdict {
        id: 5,
        name: "efficacy ordering",
        pass: cm >= c && c >= v,
        detail: format!("mean efficacy centermass {cm:.5} >= centroid {c:.5} >= vector {v:.5}"),
    }
}

fn criterion_6() -> Verdict {
    let o = overhead_ratio(30, 10);
    let e1 = efficacy(1.0, Some(1.0));
    let e0 = efficacy(0.0, overhead_ratio(25, 0));
    let zero = MetricsReport::from_counts(40, 0, 25, 0.0).efficacy;
    Verdict {
        id: 6,
        name: "metric formula anchors",
        pass: o == Some(2.0) && e1 == 1.0 && e0 == 0.0 && zero == Some(0.0),
        detail: format!("overhead(30,10) = {o:?}, efficacy(1,1) = {e1}, efficacy(delivered 0) = {e0}"),
    }
}

/// Two nodes parked next to each other exchanging fixed-size messages.
fn timing_run(size: u64, bandwidth: u64) -> Vec<SimTime> {
    let mut cfg = SimConfig::desk();
    cfg.duration_s = 400.0;
    cfg.warmup_s = 5.0;
    cfg.world_width_m = 5.0;
    cfg.world_height_m = 5.0;
    cfg.node_groups = vec![GroupConfig::new("parked", 2, (0.0, 0.0), (0.0, 0.0))];
    cfg.bandwidth_bps = bandwidth;
    cfg.traffic.size_min_bytes = size;
    cfg.traffic.size_max_bytes = size;
    let log = run(&cfg, RouterSpec::new(RouterKind::Epidemic, false)).expect("valid config").log;
    let mut started = BTreeMap::new();
    let mut durations = Vec::new();
    for ev in &log.events {
        match ev.kind {
            EventKind::TransferStarted { msg, from, to, .. } => {
                started.insert((msg, from, to), ev.time);
            }
            EventKind::TransferCompleted { msg, from, to } => durations.push(ev.time - started[&(msg, from, to)]),
            _ => {}
        }
    }
    durations
}

fn criterion_7() -> Verdict {
    let fast = timing_run(1_000_000, 10_000_000);
    let slow = timing_run(500_000, 125_000);
    let exact = |d: &[SimTime], want: SimTime| !d.is_empty() && d.iter().all(|&x| x == want);
    let ok_fast = exact(&fast, SimTime::from_micros(800_000));
    let ok_slow = exact(&slow, SimTime::from_secs(32));
    Verdict {
        id: 7,
        name: "transfer timing",
        pass: ok_fast && ok_slow,
        detail: format!(
            "1 MB @ 10 Mb/s: {} transfers, durations {:?}; 0.5 MB @ 125 Kb/s: {} transfers, durations {:?}",
            fast.len(),
            fast.iter().map(|d| d.to_string()).collect::<std::collections::BTreeSet<_>>(),
            slow.len(),
            slow.iter().map(|d| d.to_string()).collect::<std::collections::BTreeSet<_>>(),
        ),
    }
}

fn criterion_8(first: &SweepResult, spec: &SweepSpec, first_elapsed: Duration) -> Verdict {
    let start = Instant::now();
    let second = run_sweep(spec, true).expect("sweep runs");
    let elapsed = first_elapsed + start.elapsed();
    let csv_same = first.to_csv() == second.to_csv();
    let logs_same = first
        .results
        .iter()
        .zip(&second.results)
        .all(|(a, b)| a.log.as_ref().map(|l| l.to_text()) == b.log.as_ref().map(|l| l.to_text()));
    Verdict {
        id: 8,
        name: "determinism",
        pass: csv_same && logs_same && elapsed < Duration::from_secs(600),
        detail: format!(
            "csv identical: {csv_same}, {} event logs identical: {logs_same}, two sweeps in {:.1}s",
            first.results.len(),
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion_9() -> Verdict {
    let s = SimTime::from_secs;
    let trace = ContactTrace::new(vec![
        Contact { a: 0, b: 1, up_at: s(10), down_at: s(11) },
        Contact { a: 1, b: 2, up_at: s(20), down_at: s(21) },
    ]);
    let long = earliest_arrival(&trace, 0, 2, s(0), s(30));
    let short = earliest_arrival(&trace, 0, 2, s(0), s(15));
    Verdict {
        id: 9,
        name: "oracle chain case",
        pass: long == Some(s(20)) && short.is_none(),
        detail: format!("ttl 30 -> {long:?}, ttl 15 -> {short:?}"),
    }
}

fn criterion_10(sweep: &SweepResult) -> Verdict {
    let mut violations = Vec::new();
    let (mut events, mut spreads, mut progress) = (0, 0, 0);
    for r in &sweep.results {
        let log = r.log.as_ref().expect("logs kept");
        let a = audit_log(log, r.key.buffer_bytes);
        events += a.events;
        spreads += a.spread_transfers;
        progress += a.progress_checks;
        violations.extend(a.violations.into_iter().map(|v| format!("{}: {v}", r.cell)));
    }
    Verdict {
        id: 10,
        name: "invariant sweep",
        pass: violations.is_empty() && progress > 0 && spreads > 0,
        detail: format!(
            "{} logs, {events} events, {spreads} spread transfers, {progress} progress checks, {} violations {:?}",
            sweep.results.len(),
            violations.len(),
            violations.iter().take(5).collect::<Vec<_>>()
        ),
    }
}

fn main() -> ExitCode {
    let spec = acceptance_spec();
    let start = Instant::now();
    let sweep = run_sweep(&spec, true).expect("acceptance sweep runs");
    let sweep_time = start.elapsed();

    let verdicts = vec![
        criterion_1(),
        criterion_2(&sweep, sweep_time),
        criterion_3(&sweep),
        criterion_4(&sweep),
        criterion_5(&sweep),
        criterion_6(),
        criterion_7(),
        criterion_8(&sweep, &spec, sweep_time),
        criterion_9(),
        criterion_10(&sweep),
    ];

    for v in &verdicts {
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {:<40} {status}: {}", v.id, v.name, v.detail);
    }
    let passed = verdicts.iter().filter(|v| v.pass).count();
    println!("acceptance: {passed}/{} criteria pass", verdicts.len());
    if passed == verdicts.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
