//! Python bindings: sequences, states, photon statistics, zeros and sampling.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tgcs::gseq::GSequence;
use tgcs::states::{StateSpec, Truncation};

fn py_err(e: tgcs::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn truncation(k: Option<usize>) -> Truncation {
    k.map_or(Truncation::Infinite, Truncation::Finite)
}

/// Weight sequence `g(n)` defining a family of states.
#[pyclass(name = "Sequence", frozen)]
pub struct PySequence {
    inner: GSequence,
}

#[pymethods]
impl PySequence {
    #[staticmethod]
    fn factorial() -> Self {
        Self { inner: GSequence::Factorial }
    }

    #[staticmethod]
    fn ml_gamma(alpha: f64, beta: f64) -> PyResult<Self> {
        Ok(Self { inner: GSequence::ml_gamma(alpha, beta).map_err(py_err)? })
    }

    #[staticmethod]
    fn wright_product(lambda: f64, mu: f64) -> PyResult<Self> {
        Ok(Self { inner: GSequence::wright_product(lambda, mu).map_err(py_err)? })
    }

    #[staticmethod]
    fn g1(nu: f64, rho: f64, w: f64) -> PyResult<Self> {
        Ok(Self { inner: GSequence::g1(nu, rho, w).map_err(py_err)? })
    }

    #[staticmethod]
    fn table(values: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: GSequence::table(values).map_err(py_err)? })
    }

    /// `ln g(n)`.
    fn log_g(&self, n: usize) -> PyResult<f64> {
        self.inner.log_g(n).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Sequence({:?})", self.inner)
    }
}

#[pyclass(name = "QReport", frozen, get_all)]
pub struct PyQReport {
    q: f64,
    mean_n: f64,
    var_n: f64,
    regime: String,
    q_series: Option<f64>,
}

#[pyclass(name = "SampleRun", frozen, get_all)]
pub struct PySampleRun {
    seed: u64,
    n_samples: usize,
    counts: Vec<u64>,
    q_hat: Option<f64>,
    g2_hat: Option<f64>,
    stderr_q: Option<f64>,
}

/// A state with label `z`, truncated at `k` excitations (`None` for no
/// truncation).
#[pyclass(name = "State", frozen)]
pub struct PyState {
    inner: StateSpec,
}

#[pymethods]
impl PyState {
    #[new]
    #[pyo3(signature = (seq, z, k=None))]
    fn new(seq: &PySequence, z: Complex64, k: Option<usize>) -> PyResult<Self> {
        let inner = StateSpec::new(seq.inner.clone(), truncation(k), z).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn z(&self) -> Complex64 {
        self.inner.z()
    }

    #[getter]
    fn k(&self) -> Option<usize> {
        self.inner.k().finite()
    }

    fn log_normalization(&self) -> PyResult<f64> {
        tgcs::states::log_normalization_u(self.inner.seq(), self.inner.k(), self.inner.u()).map_err(py_err)
    }

    /// Excitation probabilities `p(0), p(1), ...`.
    fn distribution(&self) -> PyResult<Vec<f64>> {
        Ok(tgcs::states::excitation_distribution(&self.inner).map_err(py_err)?.probs)
    }

    fn mandel_q(&self) -> PyResult<PyQReport> {
        let r = tgcs::statistics::mandel_q(&self.inner).map_err(py_err)?;
        Ok(PyQReport {
            q: r.q,
            mean_n: r.mean_n,
            var_n: r.var_n,
            regime: format!("{:?}", r.regime),
            q_series: r.q_series,
        })
    }

    fn g2(&self) -> PyResult<f64> {
        tgcs::statistics::correlation_g2(&self.inner).map_err(py_err)
    }

    fn overlap(&self, other: &PyState) -> PyResult<Complex64> {
        tgcs::states::overlap(&self.inner, &other.inner).map_err(py_err)
    }

    fn sample(&self, n_samples: usize, seed: u64) -> PyResult<PySampleRun> {
        let r = tgcs::sampler::sample_state(&self.inner, n_samples, seed).map_err(py_err)?;
        Ok(PySampleRun {
            seed: r.seed,
            n_samples: r.n_samples,
            counts: r.counts,
            q_hat: r.q_hat,
            g2_hat: r.g2_hat,
            stderr_q: r.stderr_q,
        })
    }
}

/// Roots of `Σ_{n≤k} zⁿ/g(n)`, with their backward-error residuals.
#[pyfunction]
fn polynomial_roots(seq: &PySequence, k: usize) -> PyResult<(Vec<Complex64>, Vec<f64>)> {
    let r = tgcs::zeros::polynomial_roots(&seq.inner, k).map_err(py_err)?;
    Ok((r.roots, r.residuals))
}

#[pyfunction]
fn mittag_leffler(alpha: f64, beta: f64, x: f64) -> PyResult<f64> {
    tgcs::specfun::mittag_leffler(alpha, beta, x).map_err(py_err)
}

/// Runs the built-in verification suite; returns `(pass, [(name, residual, tol, pass)])`.
#[pyfunction]
fn verify() -> PyResult<(bool, Vec<(String, f64, f64, bool)>)> {
    let r = tgcs::cli::cmd_verify(&tgcs::cli::RunConfig::default())
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let rows = r.checks.into_iter().map(|c| (c.name, c.residual, c.tol, c.pass)).collect();
    Ok((r.pass, rows))
}

#[pymodule]
fn tgcs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySequence>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyQReport>()?;
    m.add_class::<PySampleRun>()?;
    m.add_function(wrap_pyfunction!(polynomial_roots, m)?)?;
    m.add_function(wrap_pyfunction!(mittag_leffler, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
