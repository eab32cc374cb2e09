//! Python bindings for `depthbandit`.

use depthbandit::analysis::{fit_power_law as fit_law, GapProfile, GapSource};
use depthbandit::depth::{exact_depths_all, mc_estimate, round_rng, ExactDepth};
use depthbandit::depth::{NaiveSimplicial, PlanarSimplicial};
use depthbandit::{Answer, BanditConfig, DepthError, Task};
use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: DepthError) -> PyErr {
    match e {
        DepthError::IndexOutOfRange { .. } => PyIndexError::new_err(e.to_string()),
        DepthError::InvalidArgument(_)
        | DepthError::UnsupportedDimension { .. }
        | DepthError::DegenerateProfile
        | DepthError::Parse { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Points in `d` dimensions, one row each.
#[pyclass(name = "PointSet", frozen)]
pub struct PyPointSet {
    inner: depthbandit::PointSet,
}

#[pymethods]
impl PyPointSet {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = depthbandit::PointSet::from_rows(&rows).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// i.i.d. standard normal points.
    #[staticmethod]
    #[pyo3(signature = (n, d, seed = 0))]
    fn gaussian(n: usize, d: usize, seed: u64) -> PyResult<Self> {
        let inner = depthbandit::data::gaussian_points(n, d, seed).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, header = false))]
    fn from_csv(path: std::path::PathBuf, header: bool) -> PyResult<Self> {
        let inner = depthbandit::data::read_csv(&path, header).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().map(<[f64]>::to_vec).collect()
    }

    fn __repr__(&self) -> String {
        format!("PointSet(n={}, d={})", self.inner.len(), self.inner.dim())
    }
}

/// Outcome of an adaptive run.
#[pyclass(name = "RunReport", frozen)]
pub struct PyRunReport {
    inner: depthbandit::RunReport,
}

#[pymethods]
impl PyRunReport {
    /// An index (median), a sorted index list (top-k) or a list of clusters.
    #[getter]
    fn answer(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        Ok(match &self.inner.answer {
            Answer::Index(i) => i.into_pyobject(py)?.into_any().unbind(),
            Answer::Set(s) => s.clone().into_pyobject(py)?.into_any().unbind(),
            Answer::Clusters(c) => c.clone().into_pyobject(py)?.into_any().unbind(),
        })
    }

    /// `(index, mu_hat, pulls, exact)` per point.
    #[getter]
    fn per_point(&self) -> Vec<(usize, f64, u64, bool)> {
        self.inner
            .per_point
            .iter()
            .map(|a| (a.index, a.mu_hat, a.pulls, a.exact))
            .collect()
    }

    #[getter]
    fn rounds(&self) -> u32 {
        self.inner.rounds
    }

    #[getter]
    fn total_cost_units(&self) -> f64 {
        self.inner.total_cost_units
    }

    #[getter]
    fn exact_cost(&self) -> f64 {
        self.inner.exact_cost
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "RunReport(rounds={}, total_cost_units={})",
            self.inner.rounds, self.inner.total_cost_units
        )
    }
}

/// Exact simplicial depth of one point. `method` is `"auto"` (planar when
/// `d = 2`), `"planar"` or `"naive"`.
#[pyfunction]
#[pyo3(signature = (points, index, method = "auto"))]
fn exact_depth(points: &PyPointSet, index: usize, method: &str) -> PyResult<f64> {
    let p = &points.inner;
    let est = match method {
        "auto" if p.dim() == 2 => PlanarSimplicial::new(p).depth(index),
        "auto" | "naive" => NaiveSimplicial::new(p).depth(index),
        "planar" => PlanarSimplicial::new(p).depth(index),
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    est.map(|e| e.mean).map_err(to_py)
}

/// Exact depth of every point.
#[pyfunction]
fn exact_depths(points: &PyPointSet) -> PyResult<Vec<f64>> {
    exact_depths_all(&points.inner).map_err(to_py)
}

/// Monte-Carlo depth of one point from `samples` random simplices, with the
/// Hoeffding half-width at failure probability 0.05.
#[pyfunction]
#[pyo3(signature = (points, index, samples, seed = 0))]
fn mc_depth(points: &PyPointSet, index: usize, samples: usize, seed: u64) -> PyResult<(f64, f64)> {
    if samples == 0 {
        return Err(PyValueError::new_err("samples must be positive"));
    }
    if index >= points.inner.len() {
        return Err(to_py(DepthError::IndexOutOfRange {
            index,
            n: points.inner.len(),
        }));
    }
    let c = mc_estimate(&points.inner, &[index], samples, &mut round_rng(seed, 0));
    Ok((
        c.hits[0] as f64 / samples as f64,
        depthbandit::cli::mc_half_width(samples as u64),
    ))
}

fn config(
    task: Task,
    delta: f64,
    epsilon: f64,
    ct: f64,
    switch_factor: f64,
    seed: u64,
) -> BanditConfig {
    BanditConfig {
        delta,
        epsilon,
        schedule_scale: ct,
        switch_factor,
        exact_cost: None,
        task,
        seed,
        record_trace: false,
    }
}

fn run(points: &PyPointSet, cfg: BanditConfig) -> PyResult<PyRunReport> {
    depthbandit::run(&points.inner, &cfg)
        .map(|inner| PyRunReport { inner })
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (points, delta = 0.05, epsilon = 0.0, ct = 1.0, switch_factor = 1.0, seed = 0))]
fn adaptive_median(
    points: &PyPointSet,
    delta: f64,
    epsilon: f64,
    ct: f64,
    switch_factor: f64,
    seed: u64,
) -> PyResult<PyRunReport> {
    run(
        points,
        config(Task::Median, delta, epsilon, ct, switch_factor, seed),
    )
}

#[pyfunction]
#[pyo3(signature = (points, k, delta = 0.05, epsilon = 0.0, ct = 1.0, switch_factor = 1.0, seed = 0))]
fn adaptive_topk(
    points: &PyPointSet,
    k: usize,
    delta: f64,
    epsilon: f64,
    ct: f64,
    switch_factor: f64,
    seed: u64,
) -> PyResult<PyRunReport> {
    run(
        points,
        config(Task::TopK { k }, delta, epsilon, ct, switch_factor, seed),
    )
}

#[pyfunction]
#[pyo3(signature = (points, boundaries, delta = 0.05, epsilon = 0.0, ct = 1.0, switch_factor = 1.0, seed = 0))]
fn coarse_rank(
    points: &PyPointSet,
    boundaries: Vec<usize>,
    delta: f64,
    epsilon: f64,
    ct: f64,
    switch_factor: f64,
    seed: u64,
) -> PyResult<PyRunReport> {
    let task = Task::CoarseRank { boundaries };
    run(
        points,
        config(task, delta, epsilon, ct, switch_factor, seed),
    )
}

/// Fits `F(g) = g^alpha` to the normalized gaps of `depths`. Returns
/// `(alpha, r_squared, n_points_used)`.
#[pyfunction]
fn fit_power_law(depths: Vec<f64>) -> PyResult<(f64, f64, usize)> {
    let profile = GapProfile::from_depths(&depths, GapSource::Exact).map_err(to_py)?;
    let fit = fit_law(&profile).map_err(to_py)?;
    Ok((fit.alpha, fit.r_squared, fit.n_points_used))
}

#[pymodule]
fn pydepthbandit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPointSet>()?;
    m.add_class::<PyRunReport>()?;
    m.add_function(wrap_pyfunction!(exact_depth, m)?)?;
    m.add_function(wrap_pyfunction!(exact_depths, m)?)?;
    m.add_function(wrap_pyfunction!(mc_depth, m)?)?;
    m.add_function(wrap_pyfunction!(adaptive_median, m)?)?;
    m.add_function(wrap_pyfunction!(adaptive_topk, m)?)?;
    m.add_function(wrap_pyfunction!(coarse_rank, m)?)?;
    m.add_function(wrap_pyfunction!(fit_power_law, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_mapping_kinds() {
        Python::initialize();
        Python::attach(|py| {
            assert!(to_py(DepthError::IndexOutOfRange { index: 5, n: 4 })
                .is_instance_of::<PyIndexError>(py));
            assert!(
                to_py(DepthError::InvalidArgument("x".into())).is_instance_of::<PyValueError>(py)
            );
            assert!(to_py(DepthError::TooLarge { count: 2, cap: 1 })
                .is_instance_of::<PyRuntimeError>(py));
        });
    }

    #[test]
    fn bindings_run_the_square_example() {
        let pts = PyPointSet::new(vec![
            vec![0.0, 0.0],
            vec![4.0, 0.0],
            vec![0.0, 4.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        assert_eq!(exact_depths(&pts).unwrap(), vec![0.75, 0.75, 0.75, 1.0]);
        assert_eq!(exact_depth(&pts, 3, "naive").unwrap(), 1.0);
        let r = adaptive_median(&pts, 0.05, 0.0, 1.0, 1.0, 7).unwrap();
        assert_eq!(r.inner.answer, Answer::Index(3));
        assert!(r.to_json().unwrap().contains("\"answer\":3"));
    }
}
