//! Python module `satsec_py`. Configs travel as JSON strings so the Python
//! side needs nothing beyond the standard library.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use satsec::config::{ExperimentSpec, SweepVar};
use satsec::harness::{self, csv_string, evaluate, realization_channels, solve_method, verify_instance};
use satsec::sca::Method;

fn to_py(e: satsec::Error) -> PyErr {
    match e {
        satsec::Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Preset experiment JSON for a sweep variable (`p_b`, `p_s`, `m`, `q`, `delta`).
#[pyfunction]
#[pyo3(signature = (sweep = "p_b"))]
fn default_config(sweep: &str) -> PyResult<String> {
    default_config_json(sweep).map_err(to_py)
}

pub fn default_config_json(sweep: &str) -> satsec::Result<String> {
    ExperimentSpec::preset(SweepVar::parse(sweep)?).to_json()
}

/// Runs the sweep described by `config` and returns the CSV text.
#[pyfunction]
fn run_sweep(py: Python<'_>, config: &str) -> PyResult<String> {
    let spec = ExperimentSpec::from_json(config).map_err(to_py)?;
    let result = py.detach(|| harness::run_sweep(&spec)).map_err(to_py)?;
    Ok(csv_string(&result))
}

/// Solves realization `realization` at the base parameters and returns
/// `(sum secrecy rate, smallest TU margin, iterations)`.
#[pyfunction]
#[pyo3(signature = (config, realization = 0, method = "proposed"))]
fn solve(py: Python<'_>, config: &str, realization: usize, method: &str) -> PyResult<(f64, f64, usize)> {
    py.detach(|| solve_instance(config, realization, method)).map_err(to_py)
}

pub fn solve_instance(config: &str, realization: usize, method: &str) -> satsec::Result<(f64, f64, usize)> {
    let spec = ExperimentSpec::from_json(config)?;
    let method = Method::parse(method)?;
    let budget = spec.budget(spec.p_s_db, spec.p_b_db);
    let sca = spec.sca_config(spec.q_tu);
    let channels = realization_channels(&spec, realization, spec.m_antennas, spec.channel.csi.delta_bound)?;
    let sol = solve_method(method, &channels, &budget, &sca, spec.master_seed, realization)?;
    let out = evaluate(&sol, &channels, &budget, &sca)?;
    Ok((out.sum_r_su, out.tu_margin, out.iterations))
}

/// Solution checks of the proposed scheme on one realization, as JSON.
#[pyfunction]
#[pyo3(signature = (config, realization = 0))]
fn verify(py: Python<'_>, config: &str, realization: usize) -> PyResult<String> {
    py.detach(|| -> satsec::Result<String> {
        let spec = ExperimentSpec::from_json(config)?;
        let budget = spec.budget(spec.p_s_db, spec.p_b_db);
        let sca = spec.sca_config(spec.q_tu);
        let channels = realization_channels(&spec, realization, spec.m_antennas, spec.channel.csi.delta_bound)?;
        let sol = solve_method(Method::Proposed, &channels, &budget, &sca, spec.master_seed, realization)?;
        Ok(serde_json::to_string(&verify_instance(&sol, &channels, &budget, &sca)?)?)
    })
    .map_err(to_py)
}

#[pymodule]
fn satsec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
