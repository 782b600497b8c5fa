//! Python bindings. Exact rationals cross the boundary as `"p/q"` strings.

use burnside_core::chains::{self, build_matrix, ChainSpec};
use burnside_core::orthopoly::{hahn_eval, HahnFamilyParams};
use burnside_core::rational::{parse_rational, to_f64, Rational};
use burnside_core::spectral;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Accepts ints, floats and strings such as "3/2" or "0.25".
fn rational_arg(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let text = obj.str()?.to_string();
    parse_rational(&text).map(|(r, _)| r).map_err(value_error)
}

fn strings(values: &[Rational]) -> Vec<String> {
    values.iter().map(ToString::to_string).collect()
}

/// The lumped chain on {0, ..., n} with twist `theta`.
#[pyclass(name = "Chain", module = "burnside")]
struct PyChain {
    spec: ChainSpec,
    matrix: chains::RowStochasticMatrix,
}

#[pymethods]
impl PyChain {
    #[new]
    #[pyo3(signature = (n, theta = None))]
    fn new(n: usize, theta: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let theta = match theta {
            Some(t) => rational_arg(t)?,
            None => Rational::from_integer(1.into()),
        };
        let spec = ChainSpec::new(n, theta).map_err(value_error)?;
        let matrix = build_matrix(&spec);
        Ok(Self { spec, matrix })
    }

    #[getter]
    fn n(&self) -> usize {
        self.spec.n()
    }

    #[getter]
    fn theta(&self) -> String {
        self.spec.theta().to_string()
    }

    /// Exact kernel entries as "p/q" strings.
    fn matrix(&self) -> Vec<Vec<String>> {
        self.matrix.entries().iter().map(|r| strings(r)).collect()
    }

    fn matrix_float(&self) -> Vec<Vec<f64>> {
        self.matrix.to_f64()
    }

    fn stationary(&self) -> Vec<String> {
        strings(&self.spec.stationary())
    }

    /// Eigenvalue attached to each polynomial degree 0..=n.
    fn eigenvalues(&self) -> PyResult<Vec<String>> {
        (0..=self.spec.n())
            .map(|d| spectral::degree_eigenvalue(self.spec.theta(), d).map(|v| v.to_string()))
            .collect::<Result<_, _>>()
            .map_err(value_error)
    }

    /// Sorted eigenvalues from a floating-point eigen-solver.
    fn numeric_eigenvalues(&self) -> PyResult<Vec<f64>> {
        spectral::numeric_eigenvalues(&self.matrix, &self.spec.stationary()).map_err(value_error)
    }

    /// True when every Hahn polynomial is an exact eigenfunction.
    fn verify(&self) -> PyResult<bool> {
        let params = HahnFamilyParams::symmetric(self.spec.n(), self.spec.theta().clone()).map_err(value_error)?;
        let table = burnside_core::orthopoly::PolyTable::hahn(params).map_err(value_error)?;
        Ok(spectral::verify_eigenpairs(&self.matrix, &table).map_err(value_error)?.passes())
    }

    /// Exact total variation to stationarity after 0..=l_max steps, as floats.
    #[pyo3(signature = (start, l_max))]
    fn tv_curve(&self, start: usize, l_max: usize) -> PyResult<Vec<f64>> {
        let pi = self.spec.stationary();
        self.matrix
            .distributions_from(start, l_max)
            .map_err(value_error)?
            .iter()
            .map(|law| spectral::tv_distance(law, &pi).map(|t| to_f64(&t)))
            .collect::<Result<_, _>>()
            .map_err(value_error)
    }

    /// A sampled path; the first entry is `start`.
    #[pyo3(signature = (start, steps, seed = 0))]
    fn sample(&self, start: usize, steps: usize, seed: u64) -> PyResult<Vec<usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        chains::lumped_trajectory(start, steps, &self.spec, seed, &mut rng)
            .map(|t| t.states)
            .map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!("Chain(n={}, theta={})", self.spec.n(), self.spec.theta())
    }
}

/// Closed-form eigenvalue for degree 2k.
#[pyfunction]
fn eigenvalue(theta: &Bound<'_, PyAny>, k: usize) -> PyResult<String> {
    spectral::eigenvalue_closed_form(&rational_arg(theta)?, k)
        .map(|v| v.to_string())
        .map_err(value_error)
}

/// Hahn polynomial Q_j(x) on {0, ..., n}.
#[pyfunction]
fn hahn(n: usize, alpha: &Bound<'_, PyAny>, beta: &Bound<'_, PyAny>, j: usize, x: usize) -> PyResult<String> {
    let params = HahnFamilyParams::new(n, rational_arg(alpha)?, rational_arg(beta)?).map_err(value_error)?;
    hahn_eval(&params, j, x).map(|v| v.to_string()).map_err(value_error)
}

/// Rows `(l, tv, lower, upper, pass)` of the two-sided distance bound for the
/// untwisted chain started from n.
#[pyfunction]
fn sandwich_check(n: usize, l_max: usize) -> PyResult<Vec<(usize, f64, f64, f64, bool)>> {
    Ok(spectral::sandwich_check(n, l_max)
        .map_err(value_error)?
        .into_iter()
        .map(|r| (r.l, to_f64(&r.tv), to_f64(&r.lower), to_f64(&r.upper), r.pass))
        .collect())
}

#[pyfunction]
fn transformation_identity_residual(theta: &Bound<'_, PyAny>, k: usize) -> PyResult<String> {
    spectral::transformation_identity_check(&rational_arg(theta)?, k)
        .map(|v| v.to_string())
        .map_err(value_error)
}

/// A path of the continuous chain on [0, 1], excluding the start.
#[pyfunction]
#[pyo3(signature = (theta, start, steps, seed = 0))]
fn continuous_path(theta: f64, start: f64, steps: usize, seed: u64) -> PyResult<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = start;
    (0..steps)
        .map(|_| {
            x = chains::continuous_step(x, theta, &mut rng).map_err(value_error)?;
            Ok(x)
        })
        .collect()
}

#[pymodule]
pub fn burnside(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", burnside_core::VERSION)?;
    m.add_class::<PyChain>()?;
    m.add_function(wrap_pyfunction!(eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(hahn, m)?)?;
    m.add_function(wrap_pyfunction!(sandwich_check, m)?)?;
    m.add_function(wrap_pyfunction!(transformation_identity_residual, m)?)?;
    m.add_function(wrap_pyfunction!(continuous_path, m)?)?;
    Ok(())
}
