use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dbar_core::estimator::{geometric_weights, mk_cost};
use dbar_core::kernel::{check_order as core_check_order, continuity_rate as core_continuity_rate};
use dbar_core::{
    CertifiedPair, CoupledPair as CorePair, Error, HazardSequence, OrderVerdict, OrderedSuffix, SymbolPair,
    TimeKeyedRandomness,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Usage(_) | Error::Config(_) | Error::InvalidProbability { .. } | Error::InvalidSpec(_) => {
            PyValueError::new_err(e.to_string())
        }
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_pair(s: &str) -> PyResult<SymbolPair> {
    SymbolPair::ALL
        .into_iter()
        .find(|p| p.to_string() == s || format!("{}{}", p.x(), p.y()) == s)
        .ok_or_else(|| PyValueError::new_err(format!("unknown symbol pair {s:?}; use \"00\", \"01\" or \"11\"")))
}

/// A binary chain: iid, finite-order Markov or renewal.
#[pyclass(name = "ChainSpec", frozen, skip_from_py_object, module = "dbar")]
#[derive(Clone)]
struct ChainSpec(dbar_core::ChainSpec);

#[pymethods]
impl ChainSpec {
    #[staticmethod]
    fn iid(p: f64) -> PyResult<Self> {
        dbar_core::ChainSpec::iid(p).map(Self).map_err(to_py)
    }

    /// `table[i]` is `p(1 | past)` where bit `j - 1` of `i` is the symbol at lag `j`.
    #[staticmethod]
    fn markov(order: usize, table: Vec<f64>) -> PyResult<Self> {
        dbar_core::ChainSpec::markov(order, table).map(Self).map_err(to_py)
    }

    /// Hazard `q_l = q_inf + amplitude * ratio^l`.
    #[staticmethod]
    fn renewal_geometric(q_inf: f64, amplitude: f64, ratio: f64) -> PyResult<Self> {
        let h = HazardSequence::geometric(q_inf, amplitude, ratio).map_err(to_py)?;
        Ok(Self(dbar_core::ChainSpec::renewal(h)))
    }

    /// Hazard `q_1, ..., q_n` followed by `q_inf`.
    #[staticmethod]
    fn renewal_explicit(values: Vec<f64>, q_inf: f64) -> PyResult<Self> {
        let h = HazardSequence::explicit(values, q_inf).map_err(to_py)?;
        Ok(Self(dbar_core::ChainSpec::renewal(h)))
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.0.family()
    }

    fn continuity_rate(&self, k: usize) -> f64 {
        core_continuity_rate(&self.0, k)
    }

    /// Stationary `P(X_0 = 1)` as `(value, std_error, bias_bound)`.
    #[pyo3(signature = (method = "closed_form", burn_in = 1000, length = 1_000_000, seed = 0))]
    fn marginal(&self, method: &str, burn_in: usize, length: usize, seed: u64) -> PyResult<(f64, f64, f64)> {
        marginal_oracle(self, method, burn_in, length, seed)
    }

    fn __repr__(&self) -> String {
        format!("ChainSpec({:?})", self.0)
    }
}

/// `(ordered, witness)`; the witness describes a violating pair of pasts.
#[pyfunction]
fn check_order(x: &ChainSpec, y: &ChainSpec) -> (bool, Option<String>) {
    match core_check_order(&x.0, &y.0) {
        OrderVerdict::Ordered => (true, None),
        OrderVerdict::Violated(w) => (false, Some(w.to_string())),
        OrderVerdict::Inconclusive(why) => (false, Some(format!("inconclusive: {why}"))),
    }
}

#[pyfunction]
#[pyo3(signature = (spec, method = "closed_form", burn_in = 1000, length = 1_000_000, seed = 0))]
fn marginal_oracle(spec: &ChainSpec, method: &str, burn_in: usize, length: usize, seed: u64) -> PyResult<(f64, f64, f64)> {
    let method = match method {
        "closed_form" => dbar_core::OracleMethod::ClosedForm,
        "forward_sim" => dbar_core::OracleMethod::ForwardSim { burn_in, length, seed },
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    let m = dbar_core::marginal_oracle(&spec.0, method).map_err(to_py)?;
    Ok((m.value, m.std_error, m.bias_bound))
}

/// Minimal ordered coupling of two chains, certified on construction.
#[pyclass(name = "CoupledPair", frozen, module = "dbar")]
struct CoupledPair(CertifiedPair);

#[pymethods]
impl CoupledPair {
    #[new]
    #[pyo3(signature = (x, y, kmax = 64, tol = 1e-12))]
    fn new(x: &ChainSpec, y: &ChainSpec, kmax: usize, tol: f64) -> PyResult<Self> {
        let pair = CorePair::new(x.0.clone(), y.0.clone()).map_err(to_py)?;
        pair.certify(kmax, tol).map(Self).map_err(to_py)
    }

    /// Certified lower bound on `prod_k alpha_k`.
    #[getter]
    fn product_lower_bound(&self) -> f64 {
        self.0.product_lower_bound()
    }

    #[getter]
    fn clamp_warnings(&self) -> u64 {
        self.0.clamp_warnings()
    }

    fn alpha(&self, k: usize) -> PyResult<f64> {
        self.0.alpha_global(k).map_err(to_py)
    }

    fn lambda_k(&self, k: usize) -> PyResult<f64> {
        self.0.lambda(k).map_err(to_py)
    }

    /// `r_k(ab | s)` for the suffix `s` given as two time-ordered strings.
    fn r_lower(&self, ab: &str, x: &str, y: &str) -> PyResult<f64> {
        let s = OrderedSuffix::from_strings(x, y).map_err(to_py)?;
        self.0.r_lower(s.depth(), parse_pair(ab)?, &s).map_err(to_py)
    }

    fn kernel(&self, ab: &str, x: &str, y: &str) -> PyResult<f64> {
        let s = OrderedSuffix::from_strings(x, y).map_err(to_py)?;
        Ok(self.0.kernel_at(parse_pair(ab)?, &s))
    }

    fn memory_length(&self, xi: f64) -> PyResult<usize> {
        self.0.memory_length(xi).map_err(to_py)
    }

    /// Perfect sample of `[m, n]` as a dict of columns.
    #[pyo3(signature = (m, n, seed = 1, replica = 0))]
    fn perfect_sample<'py>(&self, py: Python<'py>, m: i64, n: i64, seed: u64, replica: u64) -> PyResult<Bound<'py, PyDict>> {
        let rng = TimeKeyedRandomness::new(seed);
        let path = py.detach(|| dbar_core::perfect_sample(&self.0, &rng, replica, m, n)).map_err(to_py)?;
        let start = (m - path.backtrack_time()) as usize;
        let d = PyDict::new(py);
        d.set_item("t", (m..=n).collect::<Vec<_>>())?;
        d.set_item("x", path.window_symbols().iter().map(|s| s.x()).collect::<Vec<_>>())?;
        d.set_item("y", path.window_symbols().iter().map(|s| s.y()).collect::<Vec<_>>())?;
        d.set_item("L", path.window_memory_lengths().to_vec())?;
        d.set_item("regen", path.regen_flags()[start..].to_vec())?;
        d.set_item("T", path.backtrack_time())?;
        Ok(d)
    }

    /// Mismatch-rate estimate over `replicas` windows of length `window`.
    #[pyo3(signature = (replicas = 200, window = 5000, seed = 1))]
    fn estimate_dbar<'py>(&self, py: Python<'py>, replicas: usize, window: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let report = py.detach(|| dbar_core::estimate_dbar(&self.0, replicas, window, seed)).map_err(to_py)?;
        let mk = mk_cost(&geometric_weights(window, window / 2, 0.5), &report).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("empirical_mismatch", report.empirical_mismatch)?;
        d.set_item("ci_halfwidth", report.ci_halfwidth)?;
        d.set_item("theoretical_dbar", report.theoretical_dbar)?;
        d.set_item("regen_rate", report.regen_rate_empirical)?;
        d.set_item("regen_rate_theoretical", report.regen_rate_theoretical)?;
        d.set_item("mk_cost", mk.value)?;
        d.set_item("pass", report.passes() && mk.agrees())?;
        for row in report.rows() {
            d.set_item(format!("{}_pass", row.name), row.pass)?;
        }
        Ok(d)
    }
}

#[pymodule]
pub fn dbar(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ChainSpec>()?;
    m.add_class::<CoupledPair>()?;
    m.add_function(wrap_pyfunction!(check_order, m)?)?;
    m.add_function(wrap_pyfunction!(marginal_oracle, m)?)?;
    Ok(())
}
