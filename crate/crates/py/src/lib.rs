//! Python bindings. Reports come back as plain dicts decoded from the same
//! JSON the CLI writes.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use nncert::analysis::{self, BisectionConfig, VisibilityFamily};
use nncert::generators::{BipartiteBox, ExampleKind};
use nncert::oracles::{self, OracleConfig};
use nncert::{format, Error, ScenarioShape};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Numeric(_) | Error::NoBracket(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Probability table `p(a,b,c|x,z)` of the 3-chain network.
#[pyclass(name = "Correlation", module = "nncert_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyCorrelation {
    inner: nncert::Correlation,
}

#[pymethods]
impl PyCorrelation {
    /// Minimal scenario from 32 probabilities in `(x, z, a, b, c)` order.
    #[new]
    fn new(values: Vec<f64>) -> PyResult<Self> {
        let inner = nncert::Correlation::new(ScenarioShape::MINIMAL, values).map_err(to_py_err)?;
        Ok(PyCorrelation { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyCorrelation {
            inner: format::from_json(text).map_err(to_py_err)?,
        })
    }

    fn to_json(&self) -> String {
        format::to_json(&self.inner)
    }

    /// `(card_x, card_y, card_z, card_a, card_b, card_c)`.
    #[getter]
    fn shape(&self) -> (usize, usize, usize, usize, usize, usize) {
        let s = self.inner.shape();
        (s.card_x, s.card_y, s.card_z, s.card_a, s.card_b, s.card_c)
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn get(&self, x: usize, z: usize, a: usize, b: usize, c: usize) -> PyResult<f64> {
        let s = self.inner.shape();
        if x >= s.card_x || z >= s.card_z || a >= s.card_a || b >= s.card_b || c >= s.card_c {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.inner.get(x, z, a, b, c))
    }

    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner.validate())
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn check_s2<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner.check_s2(tol))
    }

    /// Exchanges the roles of Alice and Charlie.
    fn mirror(&self) -> Self {
        PyCorrelation {
            inner: self.inner.mirror(),
        }
    }

    fn max_abs_diff(&self, other: &PyCorrelation) -> f64 {
        self.inner.max_abs_diff(&other.inner)
    }

    fn __eq__(&self, other: &PyCorrelation) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Correlation({})", self.inner.shape())
    }
}

fn oracle_config(
    eps: f64,
    grid_n: usize,
    refine_rounds: usize,
    restarts: usize,
    seed: u64,
) -> OracleConfig {
    OracleConfig {
        eps,
        grid_n,
        refine_rounds,
        restarts,
        seed,
        ..OracleConfig::default()
    }
}

/// Named example correlation, e.g. `generate("mnn2", {"theta": 0.39})`.
#[pyfunction]
#[pyo3(signature = (name, params = None))]
fn generate(name: &str, params: Option<BTreeMap<String, f64>>) -> PyResult<PyCorrelation> {
    let kind = ExampleKind::from_name(name).map_err(to_py_err)?;
    let inner = kind.generate(&params.unwrap_or_default()).map_err(to_py_err)?;
    Ok(PyCorrelation { inner })
}

/// Full classification report as a dict.
#[pyfunction]
#[pyo3(signature = (corr, eps = 1e-7, grid_n = 64, refine_rounds = 3, restarts = 16, seed = 0))]
fn classify<'py>(
    py: Python<'py>,
    corr: &PyCorrelation,
    eps: f64,
    grid_n: usize,
    refine_rounds: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = oracle_config(eps, grid_n, refine_rounds, restarts, seed);
    let report = py
        .detach(|| oracles::classify(&corr.inner, &cfg))
        .map_err(to_py_err)?;
    to_dict(py, &report)
}

/// CHSH value of Alice and Charlie with Bob summed out.
#[pyfunction]
fn chsh(corr: &PyCorrelation) -> PyResult<f64> {
    let pbox = BipartiteBox::from_correlation(&corr.inner).map_err(to_py_err)?;
    Ok(analysis::chsh(&pbox).map_err(to_py_err)?.value)
}

#[pyfunction]
fn postselected_chsh(corr: &PyCorrelation, b: usize) -> PyResult<f64> {
    Ok(analysis::postselected_chsh(&corr.inner, b)
        .map_err(to_py_err)?
        .value)
}

#[pyfunction]
fn fritz_chsh(corr: &PyCorrelation, z: usize) -> PyResult<f64> {
    Ok(analysis::fritz_chsh(&corr.inner, z).map_err(to_py_err)?.value)
}

/// Mixing weights for which `mnn1(mu, v, pps)` is MNN.
#[pyfunction]
#[pyo3(signature = (v, pps = 0.25, tol = 1e-3))]
fn mu_range<'py>(py: Python<'py>, v: f64, pps: f64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let bis = BisectionConfig {
        tol,
        ..BisectionConfig::default()
    };
    let result = py
        .detach(|| analysis::mu_range(v, pps, &bis, &OracleConfig::default()))
        .map_err(to_py_err)?;
    to_dict(py, &result)
}

/// Critical visibility of `"mnn1q"` (parameter mu) or `"mnn2"` (parameter theta).
#[pyfunction]
#[pyo3(signature = (family, param, tol = 1e-3))]
fn critical_visibility<'py>(
    py: Python<'py>,
    family: &str,
    param: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let family = match family {
        "mnn1q" => VisibilityFamily::Mnn1Quantum { mu: param },
        "mnn2" => VisibilityFamily::Mnn2 { theta: param },
        other => {
            return Err(PyValueError::new_err(format!(
                "family must be mnn1q or mnn2, got {other:?}"
            )))
        }
    };
    let bis = BisectionConfig {
        tol,
        ..BisectionConfig::default()
    };
    let result = py
        .detach(|| analysis::critical_visibility(family, &bis, &OracleConfig::default()))
        .map_err(to_py_err)?;
    to_dict(py, &result)
}

#[pymodule]
pub fn nncert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCorrelation>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(chsh, m)?)?;
    m.add_function(wrap_pyfunction!(postselected_chsh, m)?)?;
    m.add_function(wrap_pyfunction!(fritz_chsh, m)?)?;
    m.add_function(wrap_pyfunction!(mu_range, m)?)?;
    m.add_function(wrap_pyfunction!(critical_visibility, m)?)?;
    let names: Vec<&str> = ExampleKind::ALL.iter().map(|k| k.name()).collect();
    m.add("EXAMPLES", names)?;
    Ok(())
}
