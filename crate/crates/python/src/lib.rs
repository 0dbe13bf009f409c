//! Python bindings: model types, closed-form evaluation, optimizers and the
//! Monte Carlo checks.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dense_ee::optimizer::{self, SearchLimits};
use dense_ee::simulator::{self, Geometry, McConfig};
use dense_ee::{model, Error};

create_exception!(dense_ee_py, InfeasibleError, PyValueError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Infeasible(_) => InfeasibleError::new_err(e.to_string()),
        Error::Simulation(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "PropagationModel", module = "dense_ee_py")]
struct PyPropagation {
    #[pyo3(get, set)]
    alpha: f64,
    #[pyo3(get, set)]
    omega: f64,
    #[pyo3(get, set)]
    noise: f64,
    #[pyo3(get, set)]
    block_len: u32,
}

impl PyPropagation {
    fn inner(&self) -> model::PropagationModel {
        model::PropagationModel {
            alpha: self.alpha,
            omega: self.omega,
            noise: self.noise,
            block_len: self.block_len,
        }
    }
}

#[pymethods]
impl PyPropagation {
    #[new]
    #[pyo3(signature = (alpha=3.76, omega=1e13, noise=1e-20, block_len=400))]
    fn new(alpha: f64, omega: f64, noise: f64, block_len: u32) -> PyResult<Self> {
        let p = model::PropagationModel::new(alpha, omega, noise, block_len).map_err(to_py)?;
        Ok(PyPropagation {
            alpha: p.alpha,
            omega: p.omega,
            noise: p.noise,
            block_len: p.block_len,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "PropagationModel(alpha={}, omega={:e}, noise={:e}, block_len={})",
            self.alpha, self.omega, self.noise, self.block_len
        )
    }
}

#[pyclass(name = "HardwareModel", module = "dense_ee_py")]
struct PyHardware {
    #[pyo3(get, set)]
    eta: f64,
    #[pyo3(get, set)]
    c0: f64,
    #[pyo3(get, set)]
    c1: f64,
    #[pyo3(get, set)]
    d0: f64,
    #[pyo3(get, set)]
    d1: f64,
}

impl PyHardware {
    fn inner(&self) -> model::HardwareModel {
        model::HardwareModel {
            eta: self.eta,
            c0: self.c0,
            c1: self.c1,
            d0: self.d0,
            d1: self.d1,
        }
    }

    fn wrap(h: model::HardwareModel) -> Self {
        PyHardware {
            eta: h.eta,
            c0: h.c0,
            c1: h.c1,
            d0: h.d0,
            d1: h.d1,
        }
    }
}

#[pymethods]
impl PyHardware {
    /// Coefficients in J/symbol. With no arguments, the reference hardware.
    #[new]
    #[pyo3(signature = (eta=None, c0=None, c1=None, d0=None, d1=None))]
    fn new(
        eta: Option<f64>,
        c0: Option<f64>,
        c1: Option<f64>,
        d0: Option<f64>,
        d1: Option<f64>,
    ) -> PyResult<Self> {
        let r = model::HardwareModel::default();
        let h = model::HardwareModel {
            eta: eta.unwrap_or(r.eta),
            c0: c0.unwrap_or(r.c0),
            c1: c1.unwrap_or(r.c1),
            d0: d0.unwrap_or(r.d0),
            d1: d1.unwrap_or(r.d1),
        };
        h.validate().map_err(to_py)?;
        Ok(PyHardware::wrap(h))
    }

    /// Power figures in Watt, converted with `symbol_time`.
    #[staticmethod]
    #[pyo3(signature = (eta, c0_watt, c1_watt, d0_watt, d1, symbol_time=5e-8))]
    fn from_watts(
        eta: f64,
        c0_watt: f64,
        c1_watt: f64,
        d0_watt: f64,
        d1: f64,
        symbol_time: f64,
    ) -> PyResult<Self> {
        let h = model::HardwareModel::from_watts(eta, c0_watt, c1_watt, d0_watt, d1, symbol_time);
        h.validate().map_err(to_py)?;
        Ok(PyHardware::wrap(h))
    }

    fn __repr__(&self) -> String {
        format!(
            "HardwareModel(eta={}, c0={:e}, c1={:e}, d0={:e}, d1={:e})",
            self.eta, self.c0, self.c1, self.d0, self.d1
        )
    }
}

#[pyclass(name = "OperatingPoint", module = "dense_ee_py")]
struct PyOperatingPoint {
    #[pyo3(get, set)]
    lambda_: f64,
    #[pyo3(get, set)]
    m: f64,
    #[pyo3(get, set)]
    k: f64,
    #[pyo3(get, set)]
    beta: f64,
    #[pyo3(get, set)]
    rho: f64,
    #[pyo3(get, set)]
    gamma: f64,
}

impl PyOperatingPoint {
    fn inner(&self) -> model::OperatingPoint {
        model::OperatingPoint {
            lambda: self.lambda_,
            m: self.m,
            k: self.k,
            beta: self.beta,
            rho: self.rho,
            gamma: self.gamma,
        }
    }
}

#[pymethods]
impl PyOperatingPoint {
    /// `lambda_ = inf` selects the dense limit; `rho = inf` drops noise.
    #[new]
    #[pyo3(signature = (m, k, beta, gamma, lambda_=f64::INFINITY, rho=f64::INFINITY))]
    fn new(m: f64, k: f64, beta: f64, gamma: f64, lambda_: f64, rho: f64) -> Self {
        PyOperatingPoint {
            lambda_,
            m,
            k,
            beta,
            rho,
            gamma,
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "OperatingPoint(m={}, k={}, beta={}, gamma={}, lambda_={}, rho={:e})",
            self.m, self.k, self.beta, self.gamma, self.lambda_, self.rho
        )
    }
}

#[pyclass(name = "EEReport", module = "dense_ee_py", frozen)]
struct PyReport {
    #[pyo3(get)]
    sinr: f64,
    #[pyo3(get)]
    se_per_ue: f64,
    #[pyo3(get)]
    ase: f64,
    #[pyo3(get)]
    aec: f64,
    #[pyo3(get)]
    ee: f64,
    #[pyo3(get)]
    feasible: bool,
    #[pyo3(get)]
    per_cell: bool,
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "EEReport(sinr={:.6}, se_per_ue={:.6}, ase={:e}, aec={:e}, ee={:e}, feasible={}, per_cell={})",
            self.sinr, self.se_per_ue, self.ase, self.aec, self.ee, self.feasible, self.per_cell
        )
    }
}

impl From<model::EEReport> for PyReport {
    fn from(r: model::EEReport) -> Self {
        PyReport {
            sinr: r.sinr,
            se_per_ue: r.se_per_ue,
            ase: r.ase,
            aec: r.aec,
            ee: r.ee,
            feasible: r.feasible,
            per_cell: r.per_cell,
        }
    }
}

fn prop_or_default(prop: Option<PyRef<'_, PyPropagation>>) -> model::PropagationModel {
    prop.map(|p| p.inner()).unwrap_or_default()
}

fn hw_or_default(hw: Option<PyRef<'_, PyHardware>>) -> model::HardwareModel {
    hw.map(|h| h.inner()).unwrap_or_default()
}

#[pyfunction]
#[pyo3(signature = (pt, prop=None))]
fn sinr_lower_bound(pt: PyRef<'_, PyOperatingPoint>, prop: Option<PyRef<'_, PyPropagation>>) -> PyResult<f64> {
    model::sinr_lower_bound(&pt.inner(), &prop_or_default(prop)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (pt, prop=None))]
fn se_lower_bound(pt: PyRef<'_, PyOperatingPoint>, prop: Option<PyRef<'_, PyPropagation>>) -> PyResult<f64> {
    model::se_lower_bound(&pt.inner(), &prop_or_default(prop)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (pt, prop=None, hw=None))]
fn energy_efficiency(
    pt: PyRef<'_, PyOperatingPoint>,
    prop: Option<PyRef<'_, PyPropagation>>,
    hw: Option<PyRef<'_, PyHardware>>,
) -> PyResult<PyReport> {
    model::energy_efficiency(&pt.inner(), &prop_or_default(prop), &hw_or_default(hw))
        .map(Into::into)
        .map_err(to_py)
}

/// Smallest pilot reuse factor meeting `gamma` (may be below 1).
#[pyfunction]
#[pyo3(signature = (m, k, gamma, rho=f64::INFINITY, prop=None))]
fn optimal_pilot_reuse(
    m: f64,
    k: f64,
    gamma: f64,
    rho: f64,
    prop: Option<PyRef<'_, PyPropagation>>,
) -> PyResult<f64> {
    optimizer::optimal_pilot_reuse(m, k, rho, gamma, &prop_or_default(prop))
        .map(|s| s.beta_star)
        .map_err(to_py)
}

/// Dense-limit optimum: relaxed and integer `(M, K)`.
#[pyfunction]
#[pyo3(signature = (gamma, prop=None, hw=None, m_max=512))]
fn optimize_dense<'py>(
    py: Python<'py>,
    gamma: f64,
    prop: Option<PyRef<'_, PyPropagation>>,
    hw: Option<PyRef<'_, PyHardware>>,
    m_max: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let (relaxed, integer) =
        optimizer::optimize_dense(gamma, &prop_or_default(prop), &hw_or_default(hw), m_max)
            .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("relaxed_m", relaxed.m_star)?;
    d.set_item("relaxed_k", relaxed.k_star)?;
    d.set_item("relaxed_ee", relaxed.ee)?;
    d.set_item("iterations", relaxed.iterations)?;
    d.set_item("trajectory", relaxed.trajectory)?;
    d.set_item("m", integer.m)?;
    d.set_item("k", integer.k)?;
    d.set_item("beta", integer.beta)?;
    d.set_item("ee", integer.ee)?;
    Ok(d)
}

/// Best integer `(M, K)` under the UE density `mu`, with `lambda = mu / K`.
#[pyfunction]
#[pyo3(signature = (mu, gamma, prop=None, hw=None, m_max=512, k_max=None))]
fn optimize_for_ue_density<'py>(
    py: Python<'py>,
    mu: f64,
    gamma: f64,
    prop: Option<PyRef<'_, PyPropagation>>,
    hw: Option<PyRef<'_, PyHardware>>,
    m_max: u32,
    k_max: Option<u32>,
) -> PyResult<Bound<'py, PyDict>> {
    let (p, h) = (prop_or_default(prop), hw_or_default(hw));
    let limits = SearchLimits { m_max, k_max };
    let o = py
        .detach(|| optimizer::optimize_for_ue_density(mu, gamma, &p, &h, &limits))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("m", o.optimum.m)?;
    d.set_item("k", o.optimum.k)?;
    d.set_item("beta", o.optimum.beta)?;
    d.set_item("lambda", o.lambda)?;
    d.set_item("rho", o.rho)?;
    d.set_item("ee", o.report.ee)?;
    Ok(d)
}

/// Runs the Monte Carlo checks; returns one dict per check.
#[pyfunction]
#[pyo3(signature = (
    realizations=10_000, seed=42, lambda_=10.0, m=89, k=10, beta=7.24, rho=1e-19,
    window_radius=None, geometry="bs_centric", prop=None
))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    realizations: usize,
    seed: u64,
    lambda_: f64,
    m: u32,
    k: u32,
    beta: f64,
    rho: f64,
    window_radius: Option<f64>,
    geometry: &str,
    prop: Option<PyRef<'_, PyPropagation>>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let geometry: Geometry = geometry.parse().map_err(to_py)?;
    let cfg = McConfig {
        realization_count: realizations,
        window_radius,
        seed,
        lambda: lambda_,
        m,
        k,
        beta,
        rho,
        geometry,
        ..McConfig::default()
    };
    let p = prop_or_default(prop);
    let report = py.detach(|| simulator::validate(&cfg, &p)).map_err(to_py)?;
    report
        .checks
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("check", c.name)?;
            d.set_item("estimate", c.estimate)?;
            d.set_item("reference", c.reference)?;
            d.set_item("std_error", c.std_error)?;
            d.set_item("tolerance", c.tolerance)?;
            d.set_item("status", c.status.as_str())?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn dense_ee_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPropagation>()?;
    m.add_class::<PyHardware>()?;
    m.add_class::<PyOperatingPoint>()?;
    m.add_class::<PyReport>()?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add_function(wrap_pyfunction!(sinr_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(se_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(energy_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_pilot_reuse, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_dense, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_for_ue_density, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
