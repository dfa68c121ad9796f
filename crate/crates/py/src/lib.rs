//! Python bindings: the pure-state tensor type, the two normal forms, the
//! monotone catalog and the equivalence probe. Density-operator workflows go
//! through the JSON entry points, matching the CLI wire format.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use mpnf_core::json as tjson;
use mpnf_core::lu;
use mpnf_core::monotones;
use mpnf_core::slocc::{self, Gauge, SloccConfig};
use mpnf_core::states;
use mpnf_core::tensor::{MultiTensor, State};
use mpnf_core::MpnfError;

fn err(e: MpnfError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "MultiTensor", frozen, from_py_object)]
#[derive(Clone)]
struct PyMultiTensor {
    inner: MultiTensor,
}

#[pymethods]
impl PyMultiTensor {
    /// Build from party dimensions and row-major entries (party 1 slowest).
    #[new]
    fn new(dims: Vec<usize>, entries: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self { inner: MultiTensor::new(dims, entries).map_err(err)? })
    }

    /// Canonical states: bell, ghz<p>, w, two-bell-product, ghz-224,
    /// ghz-223, unbounded.
    #[staticmethod]
    #[pyo3(signature = (name, normalized = true, a = None))]
    fn canonical(name: &str, normalized: bool, a: Option<f64>) -> PyResult<Self> {
        let id = states::parse_name(name, a).map_err(err)?;
        Ok(Self { inner: states::make(id, normalized).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match tjson::state_from_str(text).map_err(err)? {
            State::Pure(t) => Ok(Self { inner: t }),
            State::Density(_) => Err(PyValueError::new_err(
                "JSON describes a density operator; use the *_json entry points",
            )),
        }
    }

    fn to_json(&self) -> String {
        tjson::pure_to_value(&self.inner).to_string()
    }

    fn dims(&self) -> Vec<usize> {
        self.inner.dims().to_vec()
    }

    fn entries(&self) -> Vec<Complex64> {
        self.inner.data().to_vec()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn normalized(&self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.normalized().map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("MultiTensor(dims={:?}, norm={:.6})", self.inner.dims(), self.inner.norm())
    }
}

#[pyclass(name = "NormalFormResult", frozen)]
struct PyNormalFormResult {
    #[pyo3(get)]
    status: String,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    trace_history: Vec<f64>,
    #[pyo3(get)]
    filters: Vec<Vec<Vec<Complex64>>>,
    sigma: State,
}

#[pymethods]
impl PyNormalFormResult {
    /// The normal form as a pure tensor (None for density-operator inputs or
    /// diverged runs that zeroed the state).
    fn sigma_tensor(&self) -> Option<PyMultiTensor> {
        match &self.sigma {
            State::Pure(t) => Some(PyMultiTensor { inner: t.clone() }),
            State::Density(_) => None,
        }
    }

    fn sigma_json(&self) -> String {
        tjson::state_to_value(&self.sigma).to_string()
    }

    fn sigma_trace(&self) -> f64 {
        self.sigma.trace()
    }

    fn __repr__(&self) -> String {
        format!(
            "NormalFormResult(status={}, iterations={}, trace={:.6e})",
            self.status,
            self.iterations,
            self.sigma.trace()
        )
    }
}

fn matrix_to_rows(m: &ndarray::Array2<Complex64>) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[[i, j]]).collect()).collect()
}

fn slocc_config(
    epsilon_id: Option<f64>,
    max_sweeps: Option<usize>,
    zero_threshold: Option<f64>,
    gauge: &str,
) -> PyResult<SloccConfig> {
    let mut cfg = SloccConfig::default();
    if let Some(v) = epsilon_id {
        cfg.epsilon_id = v;
    }
    if let Some(v) = max_sweeps {
        cfg.max_sweeps = v;
    }
    if let Some(v) = zero_threshold {
        cfg.zero_threshold = v;
    }
    cfg.gauge = match gauge {
        "raw" => Gauge::Raw,
        "hermitian" => Gauge::Hermitian,
        other => return Err(PyValueError::new_err(format!("unknown gauge `{other}`"))),
    };
    Ok(cfg)
}

fn wrap_result(r: slocc::NormalFormResult) -> PyNormalFormResult {
    PyNormalFormResult {
        status: r.status.as_str().to_string(),
        iterations: r.iterations,
        trace_history: r.trace_history.clone(),
        filters: r.filters.ops().iter().map(matrix_to_rows).collect(),
        sigma: r.sigma,
    }
}

/// Determinant-1 filtering normal form of a pure state.
#[pyfunction]
#[pyo3(signature = (psi, epsilon_id = None, max_sweeps = None, zero_threshold = None, gauge = "raw"))]
fn normal_form(
    psi: &PyMultiTensor,
    epsilon_id: Option<f64>,
    max_sweeps: Option<usize>,
    zero_threshold: Option<f64>,
    gauge: &str,
) -> PyResult<PyNormalFormResult> {
    let cfg = slocc_config(epsilon_id, max_sweeps, zero_threshold, gauge)?;
    let r = slocc::normal_form(&State::Pure(psi.inner.clone()), &cfg).map_err(err)?;
    Ok(wrap_result(r))
}

/// Same, for pure or density-operator tensor JSON; returns the result JSON.
#[pyfunction]
#[pyo3(signature = (state_json, epsilon_id = None, max_sweeps = None, zero_threshold = None, gauge = "raw"))]
fn normal_form_json(
    state_json: &str,
    epsilon_id: Option<f64>,
    max_sweeps: Option<usize>,
    zero_threshold: Option<f64>,
    gauge: &str,
) -> PyResult<String> {
    let cfg = slocc_config(epsilon_id, max_sweeps, zero_threshold, gauge)?;
    let state = tjson::state_from_str(state_json).map_err(err)?;
    let r = slocc::normal_form(&state, &cfg).map_err(err)?;
    Ok(r.to_json().to_string())
}

/// Filters rescaled to operator norm 1 plus the success-probability proxy.
#[pyfunction]
fn optimal_filter_json(state_json: &str) -> PyResult<String> {
    let state = tjson::state_from_str(state_json).map_err(err)?;
    let report = slocc::optimal_filter_report(&state, &SloccConfig::default()).map_err(err)?;
    Ok(report.to_json().to_string())
}

/// Rotate away unsupported subdimensions; returns the reduced state.
#[pyfunction]
fn reduce_subdimensions(psi: &PyMultiTensor) -> PyResult<PyMultiTensor> {
    let (reduced, _) = slocc::reduce_subdimensions(&psi.inner).map_err(err)?;
    Ok(PyMultiTensor { inner: reduced })
}

/// Evaluate a catalog monotone.
#[pyfunction]
fn monotone(id: &str, psi: &PyMultiTensor) -> PyResult<f64> {
    let spec = monotones::catalog_spec(id).map_err(err)?;
    Ok(monotones::evaluate(&spec, &psi.inner).map_err(err)?.value)
}

/// (id, description, dims, degree) for every built-in monotone.
#[pyfunction]
fn monotone_catalog() -> Vec<(String, String, Vec<usize>, usize)> {
    monotones::catalog()
        .into_iter()
        .map(|s| (s.id, s.description, s.dims, s.degree))
        .collect()
}

/// Max relative deviation under `trials` random determinant-1 operator sets.
#[pyfunction]
#[pyo3(signature = (id, psi, trials = 100, seed = 0))]
fn check_invariance(id: &str, psi: &PyMultiTensor, trials: usize, seed: u64) -> PyResult<(f64, bool)> {
    let spec = monotones::catalog_spec(id).map_err(err)?;
    let report = monotones::check_invariance(&spec, &psi.inner, trials, seed).map_err(err)?;
    Ok((report.max_relative_deviation, report.pass))
}

/// Worst violation of the averaged non-increase under two-outcome filters.
#[pyfunction]
#[pyo3(signature = (id, psi, trials = 100, seed = 0))]
fn check_monotonicity(id: &str, psi: &PyMultiTensor, trials: usize, seed: u64) -> PyResult<(f64, bool)> {
    let spec = monotones::catalog_spec(id).map_err(err)?;
    let report = monotones::check_monotonicity(&spec, &psi.inner, trials, seed).map_err(err)?;
    Ok((report.max_violation, report.pass))
}

#[pyclass(name = "LuNormalFormResult", frozen)]
struct PyLuResult {
    #[pyo3(get)]
    status: String,
    #[pyo3(get)]
    zero_pattern: Vec<(Vec<usize>, f64)>,
    #[pyo3(get)]
    max_pattern_residual: f64,
    #[pyo3(get)]
    unitaries: Vec<Vec<Vec<Complex64>>>,
    psi_nf: MultiTensor,
}

#[pymethods]
impl PyLuResult {
    fn psi_nf(&self) -> PyMultiTensor {
        PyMultiTensor { inner: self.psi_nf.clone() }
    }

    fn __repr__(&self) -> String {
        format!(
            "LuNormalFormResult(status={}, pattern_entries={}, max_residual={:.3e})",
            self.status,
            self.zero_pattern.len(),
            self.max_pattern_residual
        )
    }
}

/// Local-unitary normal form with the enforced zero pattern.
#[pyfunction]
fn lu_normal_form(psi: &PyMultiTensor) -> PyResult<PyLuResult> {
    let r = lu::lu_normal_form(&psi.inner, &lu::LuConfig::default()).map_err(err)?;
    Ok(PyLuResult {
        status: r.status.as_str().to_string(),
        max_pattern_residual: r.max_pattern_residual(),
        zero_pattern: r.zero_pattern_report.clone(),
        unitaries: r.unitaries.ops().iter().map(matrix_to_rows).collect(),
        psi_nf: r.psi_nf,
    })
}

/// Zero positions the LU normal form enforces for a shape.
#[pyfunction]
fn expected_zero_pattern(dims: Vec<usize>) -> Vec<Vec<usize>> {
    lu::expected_zero_pattern(&dims)
}

/// m·n(n−1)/2 for m parties of equal dimension n.
#[pyfunction]
fn zero_count(n: usize, m: usize) -> usize {
    lu::zero_count(n, m)
}

/// "equivalent_likely" | "inequivalent" | "inconclusive".
#[pyfunction]
#[pyo3(signature = (psi1, psi2, restarts = 4, seed = 0))]
fn lu_equivalence(
    psi1: &PyMultiTensor,
    psi2: &PyMultiTensor,
    restarts: usize,
    seed: u64,
) -> PyResult<String> {
    let report = lu::lu_equivalence_probe(&psi1.inner, &psi2.inner, restarts, seed).map_err(err)?;
    Ok(report.verdict.as_str().to_string())
}

#[pymodule]
fn mpnf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMultiTensor>()?;
    m.add_class::<PyNormalFormResult>()?;
    m.add_class::<PyLuResult>()?;
    m.add_function(wrap_pyfunction!(normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(normal_form_json, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_filter_json, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_subdimensions, m)?)?;
    m.add_function(wrap_pyfunction!(monotone, m)?)?;
    m.add_function(wrap_pyfunction!(monotone_catalog, m)?)?;
    m.add_function(wrap_pyfunction!(check_invariance, m)?)?;
    m.add_function(wrap_pyfunction!(check_monotonicity, m)?)?;
    m.add_function(wrap_pyfunction!(lu_normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(expected_zero_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(zero_count, m)?)?;
    m.add_function(wrap_pyfunction!(lu_equivalence, m)?)?;
    Ok(())
}
