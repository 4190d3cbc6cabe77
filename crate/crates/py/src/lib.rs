//! Python bindings: model parameters, the invariant, the Fisher-information
//! pipeline and the sweeps built on it.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use quantos::analysis as an;
use quantos::metrology as me;
use quantos::model as mo;
use quantos::Error;

create_exception!(quantos, QuantosError, PyException, "Numerical failure inside quantos.");

fn to_py(e: Error) -> PyErr {
    let msg = format!("[{}] {e}", e.code());
    match e {
        Error::InvalidParams(_) => PyValueError::new_err(msg),
        _ => QuantosError::new_err(msg),
    }
}

#[pyclass(name = "ModelParams", module = "quantos", get_all, set_all)]
#[derive(Debug, Clone)]
pub struct PyModelParams {
    t1: f64,
    t2: f64,
    gamma: f64,
    big_gamma: f64,
    n_modes: usize,
    omega: f64,
    probe_amplitude: f64,
    probe_port: usize,
}

impl From<mo::ModelParams> for PyModelParams {
    fn from(p: mo::ModelParams) -> Self {
        Self {
            t1: p.t1,
            t2: p.t2,
            gamma: p.gamma,
            big_gamma: p.big_gamma,
            n_modes: p.n_modes,
            omega: p.omega,
            probe_amplitude: p.probe_amplitude,
            probe_port: p.probe_port,
        }
    }
}

impl PyModelParams {
    fn core(&self) -> PyResult<mo::ModelParams> {
        let p = mo::ModelParams {
            t1: self.t1,
            t2: self.t2,
            gamma: self.gamma,
            big_gamma: self.big_gamma,
            n_modes: self.n_modes,
            omega: self.omega,
            probe_amplitude: self.probe_amplitude,
            probe_port: self.probe_port,
        };
        p.validate().map_err(to_py)?;
        Ok(p)
    }
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (t1=None, t2=None, gamma=None, big_gamma=None, n_modes=None, omega=None, probe_amplitude=None, probe_port=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        t1: Option<f64>,
        t2: Option<f64>,
        gamma: Option<f64>,
        big_gamma: Option<f64>,
        n_modes: Option<usize>,
        omega: Option<f64>,
        probe_amplitude: Option<f64>,
        probe_port: Option<usize>,
    ) -> PyResult<Self> {
        let d = mo::ModelParams::default();
        let p = Self {
            t1: t1.unwrap_or(d.t1),
            t2: t2.unwrap_or(d.t2),
            gamma: gamma.unwrap_or(d.gamma),
            big_gamma: big_gamma.unwrap_or(d.big_gamma),
            n_modes: n_modes.unwrap_or(d.n_modes),
            omega: omega.unwrap_or(d.omega),
            probe_amplitude: probe_amplitude.unwrap_or(d.probe_amplitude),
            probe_port: probe_port.unwrap_or(d.probe_port),
        };
        p.core()?;
        Ok(p)
    }

    fn validate(&self) -> PyResult<()> {
        self.core().map(|_| ())
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelParams(t1={}, t2={}, gamma={}, big_gamma={}, n_modes={}, omega={}, probe_amplitude={}, probe_port={})",
            self.t1, self.t2, self.gamma, self.big_gamma, self.n_modes, self.omega, self.probe_amplitude, self.probe_port
        )
    }
}

#[pyclass(name = "FisherResult", module = "quantos", get_all, frozen)]
pub struct PyFisherResult {
    value: f64,
    mean_term: f64,
    cov_term: f64,
}

#[pyclass(name = "GrowthFit", module = "quantos", get_all, frozen)]
pub struct PyGrowthFit {
    alpha: f64,
    two_alpha: f64,
    intercept: f64,
    window_min: usize,
    window_max: usize,
    r_squared: f64,
    saturated_value: Option<f64>,
}

impl From<an::GrowthFit> for PyGrowthFit {
    fn from(f: an::GrowthFit) -> Self {
        Self {
            alpha: f.alpha,
            two_alpha: f.two_alpha(),
            intercept: f.intercept,
            window_min: f.window.0,
            window_max: f.window.1,
            r_squared: f.r_squared,
            saturated_value: f.saturated_value,
        }
    }
}

#[pyclass(name = "SweepRow", module = "quantos", get_all, frozen)]
pub struct PySweepRow {
    params: PyModelParams,
    fisher: f64,
    mean_term: f64,
    cov_term: f64,
    nu: Option<i32>,
    stable: bool,
    /// Error code when the point could not be evaluated.
    failure: Option<String>,
}

#[pyclass(name = "ClassicalShift", module = "quantos", get_all, frozen)]
pub struct PyClassicalShift {
    n_modes: usize,
    big_gamma: f64,
    delta_e0: f64,
    alpha_c_running: f64,
}

#[pyclass(name = "CramerRaoCheck", module = "quantos", get_all, frozen)]
pub struct PyCramerRaoCheck {
    n_samples: usize,
    batches: usize,
    mean_estimate: f64,
    mle_variance: f64,
    inverse_fisher: f64,
    ratio: f64,
}

#[pyfunction]
#[pyo3(signature = (t1, t2, gamma, n_k=mo::DEFAULT_K_POINTS))]
fn winding_number(t1: f64, t2: f64, gamma: f64, n_k: usize) -> PyResult<i32> {
    mo::winding_number(mo::BlochParams::new(t1, t2, gamma), n_k).map_err(to_py)
}

#[pyfunction]
fn analytic_phase(t1: f64, t2: f64, gamma: f64) -> PyResult<i32> {
    mo::analytic_phase(mo::BlochParams::new(t1, t2, gamma)).map_err(to_py)
}

/// Lattice matrix as a list of rows of complex numbers.
#[pyfunction]
fn real_space_hamiltonian(params: &PyModelParams) -> PyResult<Vec<Vec<Complex64>>> {
    let h = mo::real_space_hamiltonian(&params.core()?).map_err(to_py)?;
    Ok(h.matrix.row_iter().map(|r| r.iter().copied().collect()).collect())
}

/// Eigenvalues sorted by modulus and the stability flag.
#[pyfunction]
fn stability(params: &PyModelParams) -> PyResult<(Vec<Complex64>, bool)> {
    let r = mo::real_space_hamiltonian(&params.core()?).map_err(to_py)?.stability();
    Ok((r.eigenvalues, r.stable))
}

#[pyfunction]
fn fisher_information(params: &PyModelParams) -> PyResult<PyFisherResult> {
    let f = an::fisher_point(&params.core()?).map_err(to_py)?;
    Ok(PyFisherResult {
        value: f.value,
        mean_term: f.mean_term,
        cov_term: f.cov_term,
    })
}

fn rows(sweep: an::SweepResult) -> Vec<PySweepRow> {
    sweep
        .rows
        .into_iter()
        .map(|r| PySweepRow {
            params: r.params.into(),
            fisher: r.fisher,
            mean_term: r.mean_term,
            cov_term: r.cov_term,
            nu: r.nu,
            stable: r.stable,
            failure: r.failure.map(|e| e.code().to_string()),
        })
        .collect()
}

#[pyfunction]
fn fisher_vs_n(py: Python<'_>, params: &PyModelParams, n_list: Vec<usize>) -> PyResult<Vec<PySweepRow>> {
    let p = params.core()?;
    let sweep = py.detach(|| an::fisher_vs_n(&p, &n_list)).map_err(to_py)?;
    Ok(rows(sweep))
}

#[pyfunction]
fn fit_growth_rate(n_values: Vec<usize>, fisher: Vec<f64>) -> PyResult<PyGrowthFit> {
    an::fit_growth(&n_values, &fisher).map(Into::into).map_err(to_py)
}

/// `(t1, t2, gamma, nu)` tuples, `t1` varying slowest.
#[pyfunction]
fn phase_diagram(py: Python<'_>, t1_grid: Vec<f64>, t2_grid: Vec<f64>, gamma: f64) -> PyResult<Vec<(f64, f64, f64, i32)>> {
    let pts = py.detach(|| an::phase_diagram(&t1_grid, &t2_grid, gamma)).map_err(to_py)?;
    Ok(pts.into_iter().map(|p| (p.t1, p.t2, p.gamma, p.nu)).collect())
}

/// `(omega, N, fisher, is_peak)` tuples ordered by `N`, then `omega`.
#[pyfunction]
fn omega_scan(
    py: Python<'_>,
    params: &PyModelParams,
    omegas: Vec<f64>,
    n_list: Vec<usize>,
) -> PyResult<Vec<(f64, usize, f64, bool)>> {
    let p = params.core()?;
    let scan = py.detach(|| an::omega_scan(&omegas, &n_list, &p)).map_err(to_py)?;
    Ok(scan
        .sweep
        .rows
        .iter()
        .map(|r| (r.params.omega, r.params.n_modes, r.fisher, scan.is_peak(r)))
        .collect())
}

/// Per-size edge shifts and the fitted classical rate (`None` without a window).
#[pyfunction]
fn classical_edge_shift(
    py: Python<'_>,
    params: &PyModelParams,
    n_list: Vec<usize>,
) -> PyResult<(Vec<PyClassicalShift>, Option<f64>)> {
    let p = params.core()?;
    let scan = py.detach(|| an::classical_edge_shift(&p, &n_list)).map_err(to_py)?;
    let shifts = scan
        .shifts
        .iter()
        .map(|s| PyClassicalShift {
            n_modes: s.n_modes,
            big_gamma: s.big_gamma,
            delta_e0: s.delta_e0,
            alpha_c_running: s.alpha_c_running,
        })
        .collect();
    Ok((shifts, scan.alpha_c().ok()))
}

#[pyfunction]
#[pyo3(signature = (n_samples=10_000, batches=200, seed=2024, true_gamma=0.5, bracket=(0.0, 1.0)))]
fn validate_cramer_rao(
    py: Python<'_>,
    n_samples: usize,
    batches: usize,
    seed: u64,
    true_gamma: f64,
    bracket: (f64, f64),
) -> PyResult<PyCramerRaoCheck> {
    let family = me::LocationFamily::heterodyne_vacuum();
    let c = py
        .detach(|| me::validate_cramer_rao(&family, true_gamma, n_samples, batches, seed, bracket))
        .map_err(to_py)?;
    Ok(PyCramerRaoCheck {
        n_samples: c.n_samples,
        batches: c.batches,
        mean_estimate: c.mean_estimate,
        mle_variance: c.mle_variance,
        inverse_fisher: c.inverse_fisher,
        ratio: c.ratio,
    })
}

#[pymodule]
#[pyo3(name = "quantos")]
fn quantos_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QuantosError", m.py().get_type::<QuantosError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyFisherResult>()?;
    m.add_class::<PyGrowthFit>()?;
    m.add_class::<PySweepRow>()?;
    m.add_class::<PyClassicalShift>()?;
    m.add_class::<PyCramerRaoCheck>()?;
    m.add_function(wrap_pyfunction!(winding_number, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_phase, m)?)?;
    m.add_function(wrap_pyfunction!(real_space_hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(stability, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_information, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_vs_n, m)?)?;
    m.add_function(wrap_pyfunction!(fit_growth_rate, m)?)?;
    m.add_function(wrap_pyfunction!(phase_diagram, m)?)?;
    m.add_function(wrap_pyfunction!(omega_scan, m)?)?;
    m.add_function(wrap_pyfunction!(classical_edge_shift, m)?)?;
    m.add_function(wrap_pyfunction!(validate_cramer_rao, m)?)?;
    Ok(())
}
