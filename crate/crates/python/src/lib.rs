//! Python bindings for the `citesir` library.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use citesir::cohort::{self, CohortSummary, Metric, RankTable};
use citesir::{CitationSeries, EpidemicParams, Error, FitConfig};

fn to_py(err: Error) -> PyErr {
    match err.exit_code() {
        3 => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

/// SIR parameters: susceptible pool `s0`, transmission `beta`, removal `gamma`
/// (per month) and initial infectives `i0`.
#[pyclass(name = "EpidemicParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyParams(EpidemicParams);

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (s0, beta, gamma, i0 = 1.0))]
    fn new(s0: f64, beta: f64, gamma: f64, i0: f64) -> PyResult<Self> {
        EpidemicParams::new(s0, beta, gamma, i0).map(Self).map_err(to_py)
    }

    #[getter]
    fn s0(&self) -> f64 {
        self.0.s0()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma()
    }

    #[getter]
    fn i0(&self) -> f64 {
        self.0.i0()
    }

    #[getter]
    fn r0(&self) -> f64 {
        self.0.r0()
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho()
    }

    fn __repr__(&self) -> String {
        format!("EpidemicParams(s0={}, beta={}, gamma={}, i0={})", self.0.s0(), self.0.beta(), self.0.gamma(), self.0.i0())
    }
}

/// Cumulative citations `S0 - S(t)` sampled every `sample_step` months.
#[pyfunction]
#[pyo3(signature = (params, horizon = 180.0, sample_step = 1.0))]
fn integrate(params: &PyParams, horizon: f64, sample_step: f64) -> PyResult<Vec<f64>> {
    citesir::integrate(&params.0, horizon, sample_step).map(|t| t.upsilon).map_err(to_py)
}

/// Ultimate impact as a dict with `upsilon_inf`, `upsilon_rel`, `r0`, `rho`.
#[pyfunction]
fn ultimate_impact<'py>(py: Python<'py>, params: &PyParams) -> PyResult<Bound<'py, PyDict>> {
    let est = citesir::solve_ultimate_impact(&params.0);
    let d = PyDict::new(py);
    d.set_item("upsilon_inf", est.upsilon_inf)?;
    d.set_item("upsilon_rel", est.upsilon_rel)?;
    d.set_item("r0", est.r0)?;
    d.set_item("rho", est.rho)?;
    Ok(d)
}

/// Relative final size `u` solving `1 - exp(-u / rho) = u`.
#[pyfunction]
fn solve_upsilon(rho: f64) -> PyResult<f64> {
    citesir::solve_upsilon(rho).map_err(to_py)
}

/// Fit a monthly cumulative citation series; returns a dict of the fit record.
#[pyfunction]
#[pyo3(signature = (counts, restarts = 32, seed = 0, i0 = 1.0))]
fn fit<'py>(py: Python<'py>, counts: Vec<u64>, restarts: usize, seed: u64, i0: f64) -> PyResult<Bound<'py, PyDict>> {
    let series = CitationSeries::new("py", "", counts);
    let config = FitConfig { restarts, seed, i0, ..FitConfig::default() };
    let r = py.detach(|| citesir::fit(&series, &config)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("s0", r.params.s0())?;
    d.set_item("beta", r.params.beta())?;
    d.set_item("gamma", r.params.gamma())?;
    d.set_item("loss", r.loss)?;
    d.set_item("rmse", r.rmse)?;
    d.set_item("upsilon_inf", r.impact.upsilon_inf)?;
    d.set_item("upsilon_rel", r.impact.upsilon_rel)?;
    d.set_item("converged", r.converged)?;
    Ok(d)
}

/// Rank journals by a median metric (`s0`, `beta`, `gamma`, `r0`, `upsilon`),
/// largest first. `medians` maps journal to `(s0, beta, gamma, r0, upsilon)`.
#[pyfunction]
fn rank_journals(medians: Vec<(String, (f64, f64, f64, f64, f64))>, metric: &str) -> PyResult<Vec<(String, usize)>> {
    let metric: Metric = metric.parse().map_err(to_py)?;
    let summaries: Vec<CohortSummary> = medians
        .into_iter()
        .map(|(journal, (s0, beta, gamma, r0, upsilon))| CohortSummary {
            journal,
            n_papers: 0,
            median_s0: s0,
            median_beta: beta,
            median_gamma: gamma,
            median_r0: r0,
            median_upsilon: upsilon,
        })
        .collect();
    let table = cohort::rank_journals(&summaries, metric).map_err(to_py)?;
    Ok(table.journals.into_iter().zip(table.ranks).collect())
}

/// Kendall tau between two rankings given as `(journal, rank)` pairs.
#[pyfunction]
fn kendall_tau(a: Vec<(String, usize)>, b: Vec<(String, usize)>) -> PyResult<f64> {
    let a = RankTable::from_ranks("a", a).map_err(to_py)?;
    let b = RankTable::from_ranks("b", b).map_err(to_py)?;
    cohort::rank_correlation(&a, &b).map(|c| c.tau).map_err(to_py)
}

/// Fit `count = a * exp((year - 1900) / b)`; returns `(a, b)`.
#[pyfunction]
fn fit_exponential_growth(yearly_counts: Vec<(f64, f64)>) -> PyResult<(f64, f64)> {
    cohort::fit_exponential_growth(&yearly_counts).map(|g| (g.a, g.b)).map_err(to_py)
}

#[pymodule]
fn citesir_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(ultimate_impact, m)?)?;
    m.add_function(wrap_pyfunction!(solve_upsilon, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(rank_journals, m)?)?;
    m.add_function(wrap_pyfunction!(kendall_tau, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponential_growth, m)?)?;
    Ok(())
}
