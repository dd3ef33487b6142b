//! Python bindings: the grids, problems, solvers and half-order operators,
//! exposed with plain lists at the boundary.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyTuple;

use convact::action::{BarProblem, Forcing, SdofProblem, SdofVariation};
use convact::error::Error;
use convact::fractional::{HalfOperatorScheme, HalfSchemeKind};
use convact::signals::{Field, Signal, SpaceTimeGrid, TimeGrid};
use convact::solver::SolverOptions;

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::SingularSystem { .. } | Error::FreeNodeCap { .. } | Error::Io(_) => {
            PyRuntimeError::new_err(err.to_string())
        }
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn signal_from(values: Vec<f64>, t_final: f64) -> PyResult<Signal> {
    if values.len() < 3 {
        return Err(PyValueError::new_err("need at least 3 samples"));
    }
    let grid = TimeGrid::new(t_final, values.len() - 1).map_err(to_py_err)?;
    Signal::new(grid, values).map_err(to_py_err)
}

fn scheme_from(name: &str, grid: TimeGrid) -> PyResult<HalfOperatorScheme> {
    let kind = match name {
        "grunwald_letnikov" => HalfSchemeKind::GrunwaldLetnikov,
        "direct_quadrature" => HalfSchemeKind::DirectQuadrature,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown scheme {other:?}; use 'grunwald_letnikov' or 'direct_quadrature'"
            )))
        }
    };
    Ok(HalfOperatorScheme::new(kind, grid))
}

fn parse_forcing(obj: Option<&Bound<'_, PyAny>>) -> PyResult<Forcing> {
    let Some(obj) = obj else {
        return Ok(Forcing::Zero);
    };
    if obj.is_none() {
        return Ok(Forcing::Zero);
    }
    let tuple = obj.cast::<PyTuple>().map_err(|_| {
        PyValueError::new_err(
            "forcing must be None, ('constant', value), ('sinusoid', amplitude, omega) or ('samples', values, t_final)",
        )
    })?;
    let tag: String = tuple.get_item(0)?.extract()?;
    match tag.as_str() {
        "constant" => Ok(Forcing::Constant(tuple.get_item(1)?.extract()?)),
        "sinusoid" => Ok(Forcing::Sinusoid {
            amplitude: tuple.get_item(1)?.extract()?,
            omega: tuple.get_item(2)?.extract()?,
        }),
        "samples" => {
            let values: Vec<f64> = tuple.get_item(1)?.extract()?;
            let t_final: f64 = tuple.get_item(2)?.extract()?;
            Ok(Forcing::Tabulated(signal_from(values, t_final)?))
        }
        other => Err(PyValueError::new_err(format!(
            "unknown forcing preset {other:?}"
        ))),
    }
}

/// A single-degree-of-freedom problem: `m u'' + c u' + k u = f`.
#[pyclass(name = "SdofProblem", skip_from_py_object)]
#[derive(Clone)]
struct PySdofProblem {
    inner: SdofProblem,
}

#[pymethods]
impl PySdofProblem {
    /// `f0=None` selects the natural impulse `m v0 + c u0`.
    #[new]
    #[pyo3(signature = (m, c, k, u0, v0, f0=None, forcing=None))]
    fn new(
        m: f64,
        c: f64,
        k: f64,
        u0: f64,
        v0: f64,
        f0: Option<f64>,
        forcing: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Self> {
        let forcing = parse_forcing(forcing)?;
        let inner = match f0 {
            Some(f0) => SdofProblem::new(m, c, k, forcing, u0, v0, f0),
            None => SdofProblem::with_natural_impulse(m, c, k, forcing, u0, v0),
        }
        .map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn f0(&self) -> f64 {
        self.inner.f0()
    }

    fn natural_impulse(&self) -> f64 {
        convact::action::natural_impulse_sdof(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "SdofProblem(m={}, c={}, k={}, u0={}, v0={}, f0={})",
            self.inner.mass(),
            self.inner.damping(),
            self.inner.stiffness(),
            self.inner.u0(),
            self.inner.v0(),
            self.inner.f0()
        )
    }
}

/// Outcome of a stationarity solve.
#[pyclass(name = "StationaryReport")]
struct PyStationaryReport {
    #[pyo3(get)]
    solution: Vec<f64>,
    #[pyo3(get)]
    residual_sup: f64,
    #[pyo3(get)]
    system_size: usize,
    #[pyo3(get)]
    condition_estimate: f64,
}

#[pyfunction]
#[pyo3(signature = (problem, t_final, n, max_free_nodes=6000))]
fn solve_sdof(
    problem: &PySdofProblem,
    t_final: f64,
    n: usize,
    max_free_nodes: usize,
) -> PyResult<PyStationaryReport> {
    let grid = TimeGrid::new(t_final, n).map_err(to_py_err)?;
    let opts = SolverOptions { max_free_nodes };
    let report =
        convact::solver::solve_sdof_with(&problem.inner, grid, &opts).map_err(to_py_err)?;
    Ok(PyStationaryReport {
        solution: report.solution.values().to_vec(),
        residual_sup: report.residual_sup,
        system_size: report.system_size,
        condition_estimate: report.condition_estimate,
    })
}

#[pyfunction]
fn reference_sdof(problem: &PySdofProblem, t_final: f64, n: usize) -> PyResult<Vec<f64>> {
    let grid = TimeGrid::new(t_final, n).map_err(to_py_err)?;
    Ok(convact::solver::reference_sdof(&problem.inner, grid)
        .values()
        .to_vec())
}

#[pyfunction]
fn certify_sdof(problem: &PySdofProblem, values: Vec<f64>, t_final: f64) -> PyResult<f64> {
    let u = signal_from(values, t_final)?;
    convact::solver::certify_stationarity_sdof(&problem.inner, &u).map_err(to_py_err)
}

#[pyfunction]
fn action_sdof(problem: &PySdofProblem, values: Vec<f64>, t_final: f64) -> PyResult<f64> {
    let u = signal_from(values, t_final)?;
    convact::action::action_sdof(&problem.inner, &u).map_err(to_py_err)
}

#[pyfunction]
fn variation_sdof(
    problem: &PySdofProblem,
    u: Vec<f64>,
    eta: Vec<f64>,
    t_final: f64,
) -> PyResult<f64> {
    let u = signal_from(u, t_final)?;
    let eta = SdofVariation::new(signal_from(eta, t_final)?).map_err(to_py_err)?;
    convact::action::variation_sdof(&problem.inner, &u, &eta).map_err(to_py_err)
}

#[pyfunction]
fn convolve(f: Vec<f64>, g: Vec<f64>, t_final: f64) -> PyResult<(f64, Vec<f64>)> {
    let f = signal_from(f, t_final)?;
    let g = signal_from(g, t_final)?;
    let r = convact::convolution::convolve(&f, &g).map_err(to_py_err)?;
    Ok((r.value_at_t, r.trace.values().to_vec()))
}

#[pyfunction]
fn conv_commutativity_residual(f: Vec<f64>, g: Vec<f64>, t_final: f64) -> PyResult<f64> {
    let f = signal_from(f, t_final)?;
    let g = signal_from(g, t_final)?;
    convact::convolution::conv_commutativity_residual(&f, &g).map_err(to_py_err)
}

#[pyfunction]
fn conv_ibp_residual(v: Vec<f64>, u: Vec<f64>, t_final: f64) -> PyResult<f64> {
    let v = signal_from(v, t_final)?;
    let u = signal_from(u, t_final)?;
    convact::convolution::conv_ibp_residual(&v, &u).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (u, t_final, scheme="grunwald_letnikov"))]
fn half_integral(u: Vec<f64>, t_final: f64, scheme: &str) -> PyResult<Vec<f64>> {
    let u = signal_from(u, t_final)?;
    let scheme = scheme_from(scheme, u.grid())?;
    Ok(convact::fractional::half_integral(&u, &scheme)
        .map_err(to_py_err)?
        .values()
        .to_vec())
}

#[pyfunction]
#[pyo3(signature = (u, t_final, scheme="grunwald_letnikov"))]
fn half_derivative(u: Vec<f64>, t_final: f64, scheme: &str) -> PyResult<Vec<f64>> {
    let u = signal_from(u, t_final)?;
    let scheme = scheme_from(scheme, u.grid())?;
    Ok(convact::fractional::half_derivative(&u, &scheme)
        .map_err(to_py_err)?
        .values()
        .to_vec())
}

/// Both sides of `[u^(1/2), u^(1/2)](t) = [u', u](t) + u(0) u(t)`.
#[pyfunction]
#[pyo3(signature = (u, t_final, scheme="grunwald_letnikov"))]
fn half_energy_identity(u: Vec<f64>, t_final: f64, scheme: &str) -> PyResult<(f64, f64)> {
    let u = signal_from(u, t_final)?;
    let scheme = scheme_from(scheme, u.grid())?;
    convact::fractional::half_energy_identity(&u, &scheme).map_err(to_py_err)
}

/// A one-dimensional (visco)elastic bar with homogeneous boundary data and
/// natural impulse fields; `u0`/`v0` are space-node profiles.
#[pyclass(name = "BarProblem")]
struct PyBarProblem {
    inner: BarProblem,
}

#[pymethods]
impl PyBarProblem {
    #[new]
    #[pyo3(signature = (rho, e_mod, gamma, l, t_final, nx, nt, u0, v0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        rho: f64,
        e_mod: f64,
        gamma: f64,
        l: f64,
        t_final: f64,
        nx: usize,
        nt: usize,
        u0: Vec<f64>,
        v0: Vec<f64>,
    ) -> PyResult<Self> {
        let time = TimeGrid::new(t_final, nt).map_err(to_py_err)?;
        let grid = SpaceTimeGrid::new(l, nx, time).map_err(to_py_err)?;
        let inner = BarProblem::with_natural_impulse(
            rho,
            e_mod,
            gamma,
            grid,
            Field::zeros(grid),
            u0,
            v0,
            Signal::zeros(time),
            Signal::zeros(time),
        )
        .map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn f_hat0(&self) -> Vec<f64> {
        self.inner.f_hat0().to_vec()
    }

    #[getter]
    fn p_hat0(&self) -> f64 {
        self.inner.p_hat0()
    }
}

fn field_rows(field: &Field) -> Vec<Vec<f64>> {
    (0..=field.grid().space_intervals())
        .map(|i| field.time_slice(i).to_vec())
        .collect()
}

#[pyclass(name = "BarReport")]
struct PyBarReport {
    /// Rows indexed by space node; each row is the time history.
    #[pyo3(get)]
    solution: Vec<Vec<f64>>,
    #[pyo3(get)]
    residual_sup: f64,
    #[pyo3(get)]
    system_size: usize,
    #[pyo3(get)]
    condition_estimate: f64,
}

#[pyfunction]
#[pyo3(signature = (problem, max_free_nodes=6000))]
fn solve_bar(problem: &PyBarProblem, max_free_nodes: usize) -> PyResult<PyBarReport> {
    let opts = SolverOptions { max_free_nodes };
    let report = convact::solver::solve_bar_with(&problem.inner, &opts).map_err(to_py_err)?;
    Ok(PyBarReport {
        solution: field_rows(&report.solution),
        residual_sup: report.residual_sup,
        system_size: report.system_size,
        condition_estimate: report.condition_estimate,
    })
}

#[pyfunction]
fn reference_bar_timestep(problem: &PyBarProblem) -> Vec<Vec<f64>> {
    field_rows(&convact::solver::reference_bar_timestep(&problem.inner))
}

#[pymodule]
fn convact_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySdofProblem>()?;
    m.add_class::<PyBarProblem>()?;
    m.add_class::<PyStationaryReport>()?;
    m.add_class::<PyBarReport>()?;
    m.add_function(wrap_pyfunction!(convolve, m)?)?;
    m.add_function(wrap_pyfunction!(conv_commutativity_residual, m)?)?;
    m.add_function(wrap_pyfunction!(conv_ibp_residual, m)?)?;
    m.add_function(wrap_pyfunction!(half_integral, m)?)?;
    m.add_function(wrap_pyfunction!(half_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(half_energy_identity, m)?)?;
    m.add_function(wrap_pyfunction!(action_sdof, m)?)?;
    m.add_function(wrap_pyfunction!(variation_sdof, m)?)?;
    m.add_function(wrap_pyfunction!(solve_sdof, m)?)?;
    m.add_function(wrap_pyfunction!(reference_sdof, m)?)?;
    m.add_function(wrap_pyfunction!(certify_sdof, m)?)?;
    m.add_function(wrap_pyfunction!(solve_bar, m)?)?;
    m.add_function(wrap_pyfunction!(reference_bar_timestep, m)?)?;
    Ok(())
}
