//! Python bindings. Structured results cross the boundary as JSON text and are
//! decoded with the stdlib `json` module on the Python side.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use soliton_lab::error::Error;
use soliton_lab::geometry::{IsotropyDecomposition, ScalingVector};
use soliton_lab::launch;
use soliton_lab::monitors::{growth_probe, ProbeOptions};
use soliton_lab::rescaled;
use soliton_lab::run::{self, RunConfig, RunResult};
use soliton_lab::solve::SolveOptions;
use soliton_lab::systems::{self, Ansatz, SolitonState};

fn err(e: Error) -> PyErr {
    match run::error_exit_code(&e) {
        run::exit::CONFIG | run::exit::DATA => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let json = PyModule::import(py, "json")?;
    Ok(json.call_method1("loads", (text,))?.unbind())
}

/// A validated run configuration.
#[pyclass(name = "RunConfig", module = "solitonlab", frozen)]
struct PyRunConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyRunConfig {
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        let inner = RunConfig::from_json_str(json).map_err(err)?;
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = RunConfig::load(&path).map_err(err)?;
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn run_id(&self) -> String {
        self.inner.run_id()
    }

    #[getter]
    fn system(&self) -> &'static str {
        self.inner.spec.ansatz.name()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.spec.epsilon
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.spec.c
    }

    #[getter]
    fn initial(&self) -> Vec<f64> {
        self.inner.spec.initial.clone()
    }

    /// Copy with one parameter replaced (`C`, `epsilon` or `initial[i]`).
    fn with_param(&self, name: &str, value: f64) -> PyResult<Self> {
        Ok(Self { inner: run::with_param(&self.inner, name, value).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// Launch state `[f.., ḟ.., u, u̇]` at `delta` (the configured default if
    /// omitted), projected onto the conservation constraint unless `project` is false.
    #[pyo3(signature = (delta=None, project=true))]
    fn launch(&self, delta: Option<f64>, project: bool) -> PyResult<(f64, Vec<f64>)> {
        let d = delta.unwrap_or_else(|| self.inner.delta());
        let mut s = launch::launch(&self.inner.spec, d).map_err(err)?;
        if project {
            s = launch::project_onto_constraint(&s, &self.inner.spec).map_err(err)?;
        }
        Ok((s.t, s.to_vec()))
    }

    /// Vector field at `(t, [f.., ḟ.., u, u̇])`.
    fn rhs(&self, t: f64, y: Vec<f64>) -> PyResult<Vec<f64>> {
        let s = state(&self.inner.spec.ansatz, t, &y)?;
        Ok(systems::rhs(&s, &self.inner.spec.ansatz, self.inner.spec.epsilon)
            .map_err(err)?
            .to_vec())
    }

    /// Conservation residual and its trace form at a state.
    fn conservation(&self, t: f64, y: Vec<f64>) -> PyResult<(f64, f64)> {
        let spec = &self.inner.spec;
        let s = state(&spec.ansatz, t, &y)?;
        let d = systems::rhs(&s, &spec.ansatz, spec.epsilon).map_err(err)?;
        Ok((
            systems::conservation_residual(&s, d.ddu, spec),
            systems::conservation_residual_trace_form(&s, spec),
        ))
    }

    /// Rescaled coordinates `[X.., Y.., 𝓛, t, u]` of a physical state.
    fn to_rescaled(&self, t: f64, y: Vec<f64>) -> PyResult<Vec<f64>> {
        let Ansatz::DancerWang(a) = &self.inner.spec.ansatz else {
            return Err(PyValueError::new_err("the rescaled chart needs the dancer_wang system"));
        };
        let s = state(&self.inner.spec.ansatz, t, &y)?;
        Ok(rescaled::to_rescaled(&s, a, 0.0).map_err(err)?.to_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "RunConfig(system={:?}, epsilon={}, C={}, run_id={:?})",
            self.system(),
            self.inner.spec.epsilon,
            self.inner.spec.c,
            self.inner.run_id()
        )
    }
}

fn state(ansatz: &Ansatz, t: f64, y: &[f64]) -> PyResult<SolitonState> {
    let k = ansatz.components();
    if y.len() != 2 * k + 2 {
        return Err(PyValueError::new_err(format!(
            "state has {} entries, expected {}",
            y.len(),
            2 * k + 2
        )));
    }
    Ok(SolitonState::from_slice(t, y))
}

/// Outcome of one run: trajectory, verdict and monitor report.
#[pyclass(name = "RunResult", module = "solitonlab", frozen)]
struct PyRunResult {
    inner: RunResult,
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn run_id(&self) -> &str {
        &self.inner.run_id
    }

    #[getter]
    fn verdict(&self) -> &'static str {
        self.inner.verdict.name()
    }

    #[getter]
    fn exit_code(&self) -> i32 {
        self.inner.exit_code
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.trajectory.states.iter().map(|s| s.t).collect()
    }

    /// Rows `[f.., ḟ.., u, u̇]`, one per sample.
    #[getter]
    fn states(&self) -> Vec<Vec<f64>> {
        self.inner.trajectory.states.iter().map(SolitonState::to_vec).collect()
    }

    /// Rescaled rows `[X.., Y.., 𝓛, t, u]` when that chart ran.
    #[getter]
    fn rescaled_states(&self) -> Option<Vec<Vec<f64>>> {
        self.inner
            .rescaled
            .as_ref()
            .map(|rt| rt.states.iter().map(|s| s.to_vec()).collect())
    }

    fn report(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.report)
    }

    fn diagnostics(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.diagnostics)
    }

    fn chart_comparison(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.chart_comparison)
    }

    fn trajectory_csv(&self) -> String {
        run::trajectory_csv(&self.inner.trajectory)
    }

    /// Writes the run artifacts into `dir`; returns the manifest.
    fn write(&self, py: Python<'_>, dir: PathBuf) -> PyResult<Py<PyAny>> {
        let manifest = run::write_run(&dir, &self.inner, 0.0).map_err(err)?;
        to_py(py, &manifest)
    }

    fn __len__(&self) -> usize {
        self.inner.trajectory.states.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "RunResult(run_id={:?}, verdict={:?}, samples={})",
            self.inner.run_id,
            self.verdict(),
            self.inner.trajectory.states.len()
        )
    }
}

/// Structure constants of an isotropy decomposition.
#[pyclass(name = "Decomposition", module = "solitonlab", frozen)]
struct PyDecomposition {
    inner: IsotropyDecomposition,
}

#[pymethods]
impl PyDecomposition {
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        Ok(Self { inner: IsotropyDecomposition::from_json_str(json).map_err(err)? })
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.dims().to_vec()
    }

    fn triple(&self, i: usize, j: usize, k: usize) -> PyResult<f64> {
        let s = self.inner.summands();
        if i >= s || j >= s || k >= s {
            return Err(PyValueError::new_err(format!("indices must be below {s}")));
        }
        Ok(self.inner.triple(i, j, k))
    }

    fn scalar_curvature(&self, x: Vec<f64>) -> PyResult<f64> {
        let xs = ScalingVector::new(x).map_err(err)?;
        self.inner.scalar_curvature(&xs).map_err(err)
    }

    fn ricci_eigenvalues(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let xs = ScalingVector::new(x).map_err(err)?;
        self.inner.ricci_eigenvalues(&xs).map_err(err)
    }

    fn validate(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.validate())
    }
}

#[pyfunction]
fn solve(config: &PyRunConfig) -> PyResult<PyRunResult> {
    Ok(PyRunResult { inner: run::execute(&config.inner).map_err(err)? })
}

/// Solves and writes artifacts into `out`.
#[pyfunction]
fn solve_to_dir(config: &PyRunConfig, out: PathBuf) -> PyResult<PyRunResult> {
    Ok(PyRunResult { inner: run::solve_to_dir(&config.inner, &out).map_err(err)? })
}

/// Grid sweep. `axes` use the CLI syntax, e.g. `"C=0:-2:6"`.
#[pyfunction]
#[pyo3(signature = (config, axes, out, jobs=1))]
fn sweep(config: &PyRunConfig, axes: Vec<String>, out: PathBuf, jobs: usize) -> PyResult<String> {
    let axes = axes
        .iter()
        .map(|a| a.parse::<run::GridAxis>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let cells = run::run_sweep(&config.inner, &axes, &out, jobs).map_err(err)?;
    Ok(run::sweep_summary_csv(&axes, &cells))
}

/// Empirical threshold below which `−u̇(tau) ≥ c`.
#[pyfunction]
fn probe_c0(py: Python<'_>, config: &PyRunConfig, c: f64, tau: f64) -> PyResult<Py<PyAny>> {
    let mut icfg = config.inner.integrator.clone();
    icfg.t_max = tau;
    let opts = SolveOptions { launch_delta: config.inner.launch_delta, ..SolveOptions::default() };
    let report = growth_probe(&config.inner.spec, c, tau, &icfg, &opts, &ProbeOptions::default())
        .map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
fn curvature(py: Python<'_>, decomposition_json: &str, x: Vec<f64>) -> PyResult<Py<PyAny>> {
    to_py(py, &run::curvature_query(decomposition_json, &x).map_err(err)?)
}

#[pymodule]
fn solitonlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", run::TOOL_VERSION)?;
    m.add_class::<PyRunConfig>()?;
    m.add_class::<PyRunResult>()?;
    m.add_class::<PyDecomposition>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_to_dir, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(probe_c0, m)?)?;
    m.add_function(wrap_pyfunction!(curvature, m)?)?;
    Ok(())
}
