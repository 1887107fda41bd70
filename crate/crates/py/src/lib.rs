//! Python bindings: thin wrappers over the core types plus module-level
//! functions for the estimation and certification operations. Verdicts and
//! trajectory reports cross the boundary as JSON strings.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::IntoPyObjectExt;

use martproj::classifier;
use martproj::dynamics;
use martproj::grid::{self, StateValue};
use martproj::quantum;
use martproj::transforms;

fn err(e: martproj::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(frozen, name = "TimeGrid", skip_from_py_object)]
#[derive(Clone)]
struct PyTimeGrid {
    inner: grid::TimeGrid,
}

#[pymethods]
impl PyTimeGrid {
    #[new]
    fn new(times: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: grid::make_grid(&times).map_err(err)?,
        })
    }

    /// Grid for the sine demo over [0, 3π] (anchors are exact members).
    #[staticmethod]
    fn sine_demo(points_per_segment: usize) -> PyResult<Self> {
        Ok(Self {
            inner: dynamics::sine_demo_grid(points_per_segment).map_err(err)?,
        })
    }

    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    fn window(&self, r: f64, t: f64) -> PyResult<PyWindow> {
        Ok(PyWindow {
            inner: self.inner.window(r, t).map_err(err)?,
        })
    }

    fn full_window(&self) -> PyWindow {
        PyWindow {
            inner: self.inner.full_window(),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("TimeGrid({:?})", self.inner.times())
    }
}

#[pyclass(frozen, name = "Window", skip_from_py_object)]
#[derive(Clone)]
struct PyWindow {
    inner: grid::Window,
}

#[pymethods]
impl PyWindow {
    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    fn start_time(&self) -> f64 {
        self.inner.start_time()
    }

    fn end_time(&self) -> f64 {
        self.inner.end_time()
    }

    fn is_singleton(&self) -> bool {
        self.inner.is_singleton()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Window([{}, {}], {} points)",
            self.inner.start_time(),
            self.inner.end_time(),
            self.inner.len()
        )
    }
}

#[pyclass(frozen, name = "Path", skip_from_py_object)]
#[derive(Clone)]
struct PyPath {
    inner: grid::Path,
}

#[pymethods]
impl PyPath {
    /// Scalar path: one real value per window point.
    #[staticmethod]
    fn scalar(window: &PyWindow, values: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: grid::scalar_path(window.inner.clone(), &values).map_err(err)?,
        })
    }

    /// Weight-vector path: one nonnegative vector per window point.
    #[staticmethod]
    fn weights(window: &PyWindow, rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let values = rows.into_iter().map(StateValue::Weights).collect();
        Ok(Self {
            inner: grid::make_path(window.inner.clone(), values).map_err(err)?,
        })
    }

    fn window(&self) -> PyWindow {
        PyWindow {
            inner: self.inner.window().clone(),
        }
    }

    fn times(&self) -> Vec<f64> {
        self.inner.window().times().to_vec()
    }

    /// List of floats for scalar paths, list of lists for weight paths.
    fn values(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        match self.inner.kind() {
            grid::StateKind::Scalar => {
                let v: Vec<f64> = self
                    .inner
                    .values()
                    .iter()
                    .map(|x| match x {
                        StateValue::Scalar(s) => *s,
                        _ => unreachable!(),
                    })
                    .collect();
                v.into_py_any(py)
            }
            grid::StateKind::Weights(_) => {
                let v: Vec<Vec<f64>> = self
                    .inner
                    .values()
                    .iter()
                    .map(|x| match x {
                        StateValue::Weights(w) => w.clone(),
                        _ => unreachable!(),
                    })
                    .collect();
                v.into_py_any(py)
            }
        }
    }

    fn restrict(&self, window: &PyWindow) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.restrict(&window.inner).map_err(err)?,
        })
    }

    fn sup_distance(&self, other: &Self) -> PyResult<f64> {
        self.inner.sup_distance(&other.inner).map_err(err)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self {
            inner: grid::Path::from_json(&value).map_err(err)?,
        })
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __len__(&self) -> usize {
        self.inner.window().len()
    }
}

#[pyclass(frozen, name = "RandomSource", skip_from_py_object)]
#[derive(Clone)]
struct PyRandomSource {
    inner: martproj::RandomSource,
}

#[pymethods]
impl PyRandomSource {
    #[new]
    fn new(seed: u64) -> Self {
        Self {
            inner: martproj::RandomSource::from_seed(seed),
        }
    }

    fn substream(&self, label: &str) -> Self {
        Self {
            inner: self.inner.substream(label),
        }
    }

    fn substream_index(&self, index: u64) -> Self {
        Self {
            inner: self.inner.substream_index(index),
        }
    }
}

#[pyclass(frozen, name = "FactorLaw", skip_from_py_object)]
#[derive(Clone)]
struct PyFactorLaw {
    inner: dynamics::FactorLaw,
}

#[pymethods]
impl PyFactorLaw {
    #[staticmethod]
    fn uniform(a: f64, b: f64) -> PyResult<Self> {
        Ok(Self {
            inner: dynamics::FactorLaw::uniform(a, b).map_err(err)?,
        })
    }

    #[staticmethod]
    fn lognormal(mu: f64, sigma: f64) -> PyResult<Self> {
        Ok(Self {
            inner: dynamics::FactorLaw::lognormal(mu, sigma).map_err(err)?,
        })
    }

    #[staticmethod]
    fn degenerate(c: f64) -> PyResult<Self> {
        Ok(Self {
            inner: dynamics::FactorLaw::degenerate(c).map_err(err)?,
        })
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn variance(&self) -> f64 {
        self.inner.variance()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(frozen, name = "NoiseLaw", skip_from_py_object)]
#[derive(Clone)]
struct PyNoiseLaw {
    inner: transforms::NoiseLaw,
}

#[pymethods]
impl PyNoiseLaw {
    #[staticmethod]
    fn degenerate(c: f64) -> Self {
        Self {
            inner: transforms::NoiseLaw::Degenerate { c },
        }
    }

    #[staticmethod]
    fn normal(mean: f64, sigma: f64) -> Self {
        Self {
            inner: transforms::NoiseLaw::Normal { mean, sigma },
        }
    }

    #[staticmethod]
    fn uniform(a: f64, b: f64) -> Self {
        Self {
            inner: transforms::NoiseLaw::Uniform { a, b },
        }
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(frozen, name = "Transform", from_py_object)]
#[derive(Clone)]
struct PyTransform {
    inner: transforms::StochasticTransform,
}

#[pymethods]
impl PyTransform {
    #[staticmethod]
    fn identity(window: &PyWindow) -> Self {
        Self {
            inner: transforms::StochasticTransform::identity(&window.inner),
        }
    }

    #[staticmethod]
    fn vertical_bump(window: &PyWindow, law: &PyNoiseLaw) -> PyResult<Self> {
        Ok(Self {
            inner: transforms::StochasticTransform::vertical_bump(&window.inner, law.inner)
                .map_err(err)?,
        })
    }

    #[staticmethod]
    fn vertical_bump_inverse(window: &PyWindow, law: &PyNoiseLaw) -> PyResult<Self> {
        Ok(Self {
            inner: transforms::StochasticTransform::vertical_bump_inverse(
                &window.inner,
                law.inner,
            )
            .map_err(err)?,
        })
    }

    #[staticmethod]
    fn interior_bump(window: &PyWindow, law: &PyNoiseLaw, tau_star: f64) -> PyResult<Self> {
        Ok(Self {
            inner: transforms::StochasticTransform::interior_bump(
                &window.inner,
                law.inner,
                tau_star,
            )
            .map_err(err)?,
        })
    }

    #[staticmethod]
    fn horizontal_stretch(window: &PyWindow, alpha: f64) -> PyResult<Self> {
        Ok(Self {
            inner: transforms::StochasticTransform::horizontal_stretch(&window.inner, alpha)
                .map_err(err)?,
        })
    }

    #[staticmethod]
    fn multiplicative(window: &PyWindow, law: &PyFactorLaw, target_time: f64) -> PyResult<Self> {
        Ok(Self {
            inner: transforms::StochasticTransform::multiplicative(
                &window.inner,
                law.inner,
                target_time,
            )
            .map_err(err)?,
        })
    }

    #[staticmethod]
    fn multiplicative_pointwise(window: &PyWindow, law: &PyFactorLaw) -> PyResult<Self> {
        Ok(Self {
            inner: transforms::StochasticTransform::multiplicative_pointwise(
                &window.inner,
                law.inner,
            )
            .map_err(err)?,
        })
    }

    #[staticmethod]
    fn restrict(source: &PyWindow, target: &PyWindow) -> PyResult<Self> {
        Ok(Self {
            inner: transforms::StochasticTransform::restrict_to(&source.inner, &target.inner)
                .map_err(err)?,
        })
    }

    #[staticmethod]
    fn constant_extend(source: &PyWindow, target: &PyWindow) -> PyResult<Self> {
        Ok(Self {
            inner: transforms::StochasticTransform::constant_extend(&source.inner, &target.inner)
                .map_err(err)?,
        })
    }

    #[staticmethod]
    fn sine_demo(source: &PyWindow, target: &PyWindow, epsilon_sigma: f64) -> PyResult<Self> {
        Ok(Self {
            inner: transforms::StochasticTransform::sine_demo(
                &source.inner,
                &target.inner,
                epsilon_sigma,
            )
            .map_err(err)?,
        })
    }

    fn apply(&self, path: &PyPath, src: &PyRandomSource) -> PyResult<PyPath> {
        Ok(PyPath {
            inner: self.inner.apply(&path.inner, &src.inner).map_err(err)?,
        })
    }

    fn source_window(&self) -> PyWindow {
        PyWindow {
            inner: self.inner.source_window().clone(),
        }
    }

    fn target_window(&self) -> PyWindow {
        PyWindow {
            inner: self.inner.target_window().clone(),
        }
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }
}

#[pyfunction]
fn compose(outer: &PyTransform, inner: &PyTransform) -> PyResult<PyTransform> {
    Ok(PyTransform {
        inner: transforms::compose(outer.inner.clone(), inner.inner.clone()).map_err(err)?,
    })
}

#[pyfunction]
fn compose_chain(stages: Vec<PyTransform>) -> PyResult<PyTransform> {
    Ok(PyTransform {
        inner: transforms::compose_chain(stages.into_iter().map(|t| t.inner).collect())
            .map_err(err)?,
    })
}

/// Returns `(equal, first_diff_time)`.
#[pyfunction]
fn commutator_check(
    t1: &PyTransform,
    t2: &PyTransform,
    x: &PyPath,
    src: &PyRandomSource,
) -> PyResult<(bool, Option<f64>)> {
    let report =
        transforms::commutator_check(&t1.inner, &t2.inner, &x.inner, &src.inner).map_err(err)?;
    Ok((report.equal, report.first_diff_time))
}

#[pyfunction]
fn invertibility_check(
    fwd: &PyTransform,
    inv: &PyTransform,
    x: &PyPath,
    src: &PyRandomSource,
) -> PyResult<bool> {
    transforms::invertibility_check(&fwd.inner, &inv.inner, &x.inner, &src.inner).map_err(err)
}

/// Returns `(mean, std_error, samples)`.
#[pyfunction]
fn cond_expectation(
    tf: &PyTransform,
    prefix: &PyPath,
    n: u64,
    src: &PyRandomSource,
) -> PyResult<(f64, f64, u64)> {
    let est = classifier::cond_expectation(&tf.inner, &prefix.inner, n, &src.inner).map_err(err)?;
    Ok((est.mean, est.std_error, est.samples))
}

/// Classification verdict as a JSON string.
#[pyfunction]
fn classify_projection(
    tf: &PyTransform,
    prefix: &PyPath,
    n: u64,
    z: f64,
    src: &PyRandomSource,
) -> PyResult<String> {
    let verdict =
        classifier::classify_projection(&tf.inner, &prefix.inner, n, z, &src.inner).map_err(err)?;
    Ok(verdict.to_json().to_string())
}

#[pyfunction]
fn gaussian_sine_path(grid: &PyTimeGrid, src: &PyRandomSource) -> PyResult<PyPath> {
    Ok(PyPath {
        inner: dynamics::gaussian_sine_path(&grid.inner, &src.inner).map_err(err)?,
    })
}

#[pyfunction]
fn multiplicative_weight_step(
    weights: Vec<f64>,
    law: &PyFactorLaw,
    src: &PyRandomSource,
) -> PyResult<Vec<f64>> {
    dynamics::multiplicative_weight_step(&weights, &law.inner, &src.inner).map_err(err)
}

/// Returns `(times, weights_per_time)`.
#[pyfunction]
fn simulate_weight_trajectory(
    outcomes: usize,
    grid: &PyTimeGrid,
    law: &PyFactorLaw,
    initial: Vec<f64>,
    src: &PyRandomSource,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let traj =
        dynamics::simulate_weight_trajectory(outcomes, &grid.inner, &law.inner, &initial, &src.inner)
            .map_err(err)?;
    let weights = (0..grid.inner.len()).map(|k| traj.weights_at(k).to_vec()).collect();
    Ok((grid.inner.times().to_vec(), weights))
}

#[pyfunction]
fn shannon_wiener(weights: Vec<f64>) -> PyResult<f64> {
    quantum::shannon_wiener(&weights).map_err(err)
}

#[pyfunction]
fn magnitudes(weights: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    quantum::magnitudes(&weights).map_err(err)
}

/// Density coordinates as a nested list of Python complex numbers.
#[pyfunction]
fn density_coordinates(weights: Vec<f64>, phases: Vec<f64>) -> PyResult<Vec<Vec<Complex64>>> {
    let state = quantum::PureStateSnapshot::new(weights, phases).map_err(err)?;
    Ok(quantum::density_coordinates(&state).coords)
}

fn verdict_json(v: quantum::StepVerdict) -> PyResult<String> {
    serde_json::to_string(&v).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Step verdict as a JSON string.
#[pyfunction]
fn verify_decoherence_step(
    weights: Vec<f64>,
    law: &PyFactorLaw,
    n: u64,
    src: &PyRandomSource,
) -> PyResult<String> {
    verdict_json(quantum::verify_decoherence_step(&weights, &law.inner, n, &src.inner).map_err(err)?)
}

/// Step verdict as a JSON string.
#[pyfunction]
fn verify_information_step(
    weights: Vec<f64>,
    law: &PyFactorLaw,
    n: u64,
    src: &PyRandomSource,
) -> PyResult<String> {
    verdict_json(quantum::verify_information_step(&weights, &law.inner, n, &src.inner).map_err(err)?)
}

/// Step verdict as a JSON string.
#[pyfunction]
fn verify_martingale_step(
    weights: Vec<f64>,
    law: &PyFactorLaw,
    n: u64,
    src: &PyRandomSource,
) -> PyResult<String> {
    verdict_json(quantum::verify_martingale_step(&weights, &law.inner, n, &src.inner).map_err(err)?)
}

/// Full-trajectory report as a JSON string. `clause` is one of
/// "super", "sub", "martingale".
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn run_full_trajectory(
    outcomes: usize,
    grid: &PyTimeGrid,
    law: &PyFactorLaw,
    initial: Vec<f64>,
    phases: Vec<f64>,
    n: u64,
    clause: &str,
    src: &PyRandomSource,
) -> PyResult<String> {
    let clause = match clause {
        "super" => quantum::TrajectoryClause::Super,
        "sub" => quantum::TrajectoryClause::Sub,
        "martingale" => quantum::TrajectoryClause::Martingale,
        other => {
            return Err(PyValueError::new_err(format!(
                "clause must be super | sub | martingale, got {other:?}"
            )))
        }
    };
    let report = quantum::run_full_trajectory(
        outcomes, &grid.inner, &law.inner, &initial, &phases, n, clause, &src.inner,
    )
    .map_err(err)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyfunction]
fn ks_statistic(a: Vec<f64>, b: Vec<f64>) -> f64 {
    martproj::stats::ks_statistic(&a, &b)
}

#[pymodule]
fn martproj_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTimeGrid>()?;
    m.add_class::<PyWindow>()?;
    m.add_class::<PyPath>()?;
    m.add_class::<PyRandomSource>()?;
    m.add_class::<PyFactorLaw>()?;
    m.add_class::<PyNoiseLaw>()?;
    m.add_class::<PyTransform>()?;
    m.add_function(wrap_pyfunction!(compose, m)?)?;
    m.add_function(wrap_pyfunction!(compose_chain, m)?)?;
    m.add_function(wrap_pyfunction!(commutator_check, m)?)?;
    m.add_function(wrap_pyfunction!(invertibility_check, m)?)?;
    m.add_function(wrap_pyfunction!(cond_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(classify_projection, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_sine_path, m)?)?;
    m.add_function(wrap_pyfunction!(multiplicative_weight_step, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_weight_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(shannon_wiener, m)?)?;
    m.add_function(wrap_pyfunction!(magnitudes, m)?)?;
    m.add_function(wrap_pyfunction!(density_coordinates, m)?)?;
    m.add_function(wrap_pyfunction!(verify_decoherence_step, m)?)?;
    m.add_function(wrap_pyfunction!(verify_information_step, m)?)?;
    m.add_function(wrap_pyfunction!(verify_martingale_step, m)?)?;
    m.add_function(wrap_pyfunction!(run_full_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(ks_statistic, m)?)?;
    Ok(())
}
