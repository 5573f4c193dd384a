//! Python bindings: configs, single runs, metrics, the oracle and sweeps.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use centroid_dtn::harness::{parse_sweep_spec, run_sweep};
use centroid_dtn::metrics::{self, MetricsReport};
use centroid_dtn::oracle::oracle_report_from_log;
use centroid_dtn::{EventLog, RouterSpec, SimConfig, SimError, SimTime};

fn py_err(e: SimError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Simulation parameters. Build one with `desk()`, `table1()` or `parse(text)`.
#[pyclass(name = "Config", module = "centroid_dtn_py", skip_from_py_object)]
#[derive(Clone)]
pub struct PyConfig {
    inner: SimConfig,
}

#[pymethods]
impl PyConfig {
    #[staticmethod]
    fn desk() -> Self {
        PyConfig { inner: SimConfig::desk() }
    }

    #[staticmethod]
    fn table1() -> Self {
        PyConfig { inner: SimConfig::table1() }
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        centroid_dtn::parse_config(text).map(|inner| PyConfig { inner }).map_err(py_err)
    }

    #[getter]
    fn duration_s(&self) -> f64 {
        self.inner.duration_s
    }
    #[setter]
    fn set_duration_s(&mut self, v: f64) {
        self.inner.duration_s = v;
    }
    #[getter]
    fn warmup_s(&self) -> f64 {
        self.inner.warmup_s
    }
    #[setter]
    fn set_warmup_s(&mut self, v: f64) {
        self.inner.warmup_s = v;
    }
    #[getter]
    fn bandwidth_bps(&self) -> u64 {
        self.inner.bandwidth_bps
    }
    #[setter]
    fn set_bandwidth_bps(&mut self, v: u64) {
        self.inner.bandwidth_bps = v;
    }
    #[getter]
    fn buffer_bytes(&self) -> u64 {
        self.inner.buffer_bytes
    }
    #[setter]
    fn set_buffer_bytes(&mut self, v: u64) {
        self.inner.buffer_bytes = v;
    }
    #[getter]
    fn noise_amplitude_m(&self) -> f64 {
        self.inner.noise_amplitude_m
    }
    #[setter]
    fn set_noise_amplitude_m(&mut self, v: f64) {
        self.inner.noise_amplitude_m = v;
    }
    #[getter]
    fn ttl_s(&self) -> f64 {
        self.inner.traffic.ttl_s
    }
    #[setter]
    fn set_ttl_s(&mut self, v: f64) {
        self.inner.traffic.ttl_s = v;
    }
    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }
    #[setter]
    fn set_seed(&mut self, v: u64) {
        self.inner.seed = v;
    }
    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(nodes={}, duration_s={}, bandwidth_bps={}, buffer_bytes={}, noise_amplitude_m={}, seed={})",
            self.inner.node_count(),
            self.inner.duration_s,
            self.inner.bandwidth_bps,
            self.inner.buffer_bytes,
            self.inner.noise_amplitude_m,
            self.inner.seed
        )
    }
}

/// Metrics of one run. Undefined values are `None`.
#[pyclass(name = "Report", module = "centroid_dtn_py", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyReport {
    created: u64,
    delivered: u64,
    forwarded: u64,
    delivery_probability: f64,
    avg_latency_s: Option<f64>,
    overhead_ratio: Option<f64>,
    efficacy: Option<f64>,
}

impl From<MetricsReport> for PyReport {
    fn from(r: MetricsReport) -> Self {
        PyReport {
            created: r.created,
            delivered: r.delivered,
            forwarded: r.forwarded,
            delivery_probability: r.delivery_probability,
            avg_latency_s: r.avg_latency_s,
            overhead_ratio: r.overhead_ratio,
            efficacy: r.efficacy,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "None".into(), |x| format!("{x:.4}"))
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "Report(created={}, delivered={}, forwarded={}, delivery_probability={:.4}, overhead_ratio={}, efficacy={})",
            self.created,
            self.delivered,
            self.forwarded,
            self.delivery_probability,
            opt(self.overhead_ratio),
            opt(self.efficacy)
        )
    }
}

/// Outcome of `run`: the router's report, the oracle's report and the event log text.
#[pyclass(name = "RunResult", module = "centroid_dtn_py", frozen, get_all)]
pub struct PyRunResult {
    report: Py<PyReport>,
    oracle: Py<PyReport>,
    log: String,
    events: usize,
}

fn router(name: &str) -> PyResult<RouterSpec> {
    name.parse().map_err(py_err)
}

fn parse_log(text: &str) -> PyResult<EventLog> {
    EventLog::parse(text).map_err(py_err)
}

/// Runs one simulation. `seed` overrides the config's seed.
#[pyfunction]
#[pyo3(signature = (config, router_name, seed=None))]
fn run(py: Python<'_>, config: &PyConfig, router_name: &str, seed: Option<u64>) -> PyResult<PyRunResult> {
    let spec = router(router_name)?;
    let mut cfg = config.inner.clone();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = centroid_dtn::run(&cfg, spec).map_err(py_err)?;
    let report = metrics::compute_report(&out.log, SimTime::from_secs_f64(cfg.warmup_s));
    let oracle = oracle_report_from_log(&out.log).map_err(py_err)?;
    Ok(PyRunResult {
        report: Py::new(py, PyReport::from(report))?,
        oracle: Py::new(py, PyReport::from(oracle))?,
        events: out.log.events.len(),
        log: out.log.to_text(),
    })
}

/// Metrics from an event log's text; the warmup comes from its header.
#[pyfunction]
fn compute_report(log: &str) -> PyResult<PyReport> {
    let log = parse_log(log)?;
    Ok(metrics::compute_report(&log, log.meta.warmup).into())
}

/// Best-case delivery over the contacts recorded in an event log.
#[pyfunction]
fn oracle_report(log: &str) -> PyResult<PyReport> {
    let log = parse_log(log)?;
    oracle_report_from_log(&log).map(Into::into).map_err(py_err)
}

/// Runs a sweep spec (a config plus a `[sweep]` section) and returns its CSV.
#[pyfunction]
fn sweep(spec: &str) -> PyResult<String> {
    let spec = parse_sweep_spec(spec).map_err(py_err)?;
    run_sweep(&spec, false).map(|r| r.to_csv()).map_err(py_err)
}

#[pyfunction]
fn overhead_ratio(forwarded: u64, delivered: u64) -> Option<f64> {
    metrics::overhead_ratio(forwarded, delivered)
}

#[pyfunction]
#[pyo3(signature = (delivery_probability, overhead=None))]
fn efficacy(delivery_probability: f64, overhead: Option<f64>) -> f64 {
    metrics::efficacy(delivery_probability, overhead)
}

/// Mean and 95% half-width; the half-width is `None` for a single value.
#[pyfunction]
fn mean_ci(values: Vec<f64>) -> Option<(f64, Option<f64>)> {
    metrics::mean_ci(&values).map(|s| (s.mean, s.half_width))
}

#[pymodule]
fn centroid_dtn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(compute_report, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_report, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(overhead_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(efficacy, m)?)?;
    m.add_function(wrap_pyfunction!(mean_ci, m)?)?;
    m.add("CSV_HEADER", metrics::CSV_HEADER)?;
    Ok(())
}
