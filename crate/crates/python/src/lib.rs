//! Python bindings. Angles are radians; sequences are lists of ±1 ints.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use bell_lab::feasibility::{self, CorrelationTarget, Moments};
use bell_lab::inequality::{self, V3Evaluation, V4Evaluation};
use bell_lab::models::{self, Axis, OrderTag};
use bell_lab::protocol::{self, Alignment, ProtocolParams, SourcePair};
use bell_lab::seqcore::{self, Angle, DichotomicSequence};
use bell_lab::RngStream;

type LhvLists = (Vec<i8>, Vec<i8>, Vec<Vec<i8>>);

fn err(e: bell_lab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn seq(values: Vec<i64>) -> PyResult<DichotomicSequence> {
    DichotomicSequence::from_ints(&values).map_err(err)
}

fn ints(s: &DichotomicSequence) -> Vec<i8> {
    s.values().collect()
}

fn rad(theta: f64) -> Angle {
    Angle::from_radians(theta)
}

#[pyfunction]
fn canonicalize(theta: f64) -> f64 {
    seqcore::canonicalize(theta)
}

#[pyfunction]
fn correlation(x: Vec<i64>, y: Vec<i64>) -> PyResult<f64> {
    Ok(seqcore::correlation(&seq(x)?, &seq(y)?).map_err(err)?.value)
}

#[pyfunction]
fn sica3_residual(x: Vec<i64>, y: Vec<i64>, z: Vec<i64>) -> PyResult<i64> {
    seqcore::sica3_residual(&seq(x)?, &seq(y)?, &seq(z)?).map_err(err)
}

/// Returns `(lhs, rhs, holds)`.
#[pyfunction]
fn bell3_finite(x: Vec<i64>, y: Vec<i64>, z: Vec<i64>) -> PyResult<(f64, f64, bool)> {
    let b = seqcore::bell3_finite(&seq(x)?, &seq(y)?, &seq(z)?).map_err(err)?;
    Ok((b.lhs, b.rhs, b.holds))
}

/// Returns `(s_value, holds)`.
#[pyfunction]
fn chsh_finite(w: Vec<i64>, x: Vec<i64>, y: Vec<i64>, z: Vec<i64>) -> PyResult<(f64, bool)> {
    let c = seqcore::chsh_finite(&seq(w)?, &seq(x)?, &seq(y)?, &seq(z)?).map_err(err)?;
    Ok((c.s_value, c.holds))
}

/// Returns `(e, p)`.
#[pyfunction]
#[pyo3(signature = (theta_e, theta_p, n, seed, stream=0))]
fn singlet_batch(theta_e: f64, theta_p: f64, n: usize, seed: u64, stream: u64) -> PyResult<(Vec<i8>, Vec<i8>)> {
    let b = models::singlet_batch(rad(theta_e), rad(theta_p), n, RngStream::new(seed, stream)).map_err(err)?;
    Ok((ints(&b.e), ints(&b.p)))
}

/// Returns `(p, e, e_prime)`.
#[pyfunction]
#[pyo3(signature = (theta_p, theta_e, theta_e_prime, n, seed, stream=0, e_first=false))]
fn sequential_collapse_batch(
    theta_p: f64,
    theta_e: f64,
    theta_e_prime: f64,
    n: usize,
    seed: u64,
    stream: u64,
    e_first: bool,
) -> PyResult<(Vec<i8>, Vec<i8>, Vec<i8>)> {
    let order = if e_first { OrderTag::EFirst } else { OrderTag::PFirst };
    let b = models::sequential_collapse_batch(
        rad(theta_p),
        rad(theta_e),
        rad(theta_e_prime),
        order,
        n,
        RngStream::new(seed, stream),
    )
    .map_err(err)?;
    Ok((ints(&b.p), ints(&b.e), ints(b.e_prime.as_ref().expect("triple batch"))))
}

/// Returns `(p, e, e_prime)`.
#[pyfunction]
#[pyo3(signature = (theta_e, theta_e_prime, theta_p, coupling, n, seed, stream=0))]
fn nonlocal_toy_batch(
    theta_e: f64,
    theta_e_prime: f64,
    theta_p: f64,
    coupling: f64,
    n: usize,
    seed: u64,
    stream: u64,
) -> PyResult<(Vec<i8>, Vec<i8>, Vec<i8>)> {
    let b = models::nonlocal_toy_batch(
        rad(theta_e),
        rad(theta_e_prime),
        rad(theta_p),
        coupling,
        n,
        RngStream::new(seed, stream),
    )
    .map_err(err)?;
    Ok((ints(&b.p), ints(&b.e), ints(b.e_prime.as_ref().expect("triple batch"))))
}

/// `extra_axes` is a list of `("alice" | "bob", theta)`. Returns `(e, p, extras)`.
#[pyfunction]
#[pyo3(signature = (theta_e, theta_p, extra_axes, n, seed, stream=0))]
fn lhv_batch(
    theta_e: f64,
    theta_p: f64,
    extra_axes: Vec<(String, f64)>,
    n: usize,
    seed: u64,
    stream: u64,
) -> PyResult<LhvLists> {
    let axes = extra_axes
        .iter()
        .map(|(side, theta)| match side.as_str() {
            "alice" => Ok(Axis::alice(rad(*theta))),
            "bob" => Ok(Axis::bob(rad(*theta))),
            other => Err(PyValueError::new_err(format!("side must be 'alice' or 'bob', got {other:?}"))),
        })
        .collect::<PyResult<Vec<_>>>()?;
    let b = models::lhv_batch(rad(theta_e), rad(theta_p), &axes, n, RngStream::new(seed, stream)).map_err(err)?;
    Ok((ints(&b.e), ints(&b.p), b.extra.iter().map(|(_, s)| ints(s)).collect()))
}

#[pyfunction]
fn qm_correlation(theta1: f64, theta2: f64) -> f64 {
    inequality::qm_correlation(rad(theta1), rad(theta2))
}

fn v3_dict<'py>(py: Python<'py>, e: &V3Evaluation) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("lhs", e.lhs)?;
    d.set_item("rhs", e.rhs)?;
    d.set_item("violated", e.violated)?;
    d.set_item("combined_lhs", e.combined_lhs)?;
    d.set_item("combined_rhs", e.combined_rhs)?;
    Ok(d)
}

fn v4_dict<'py>(py: Python<'py>, e: &V4Evaluation) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("s_value", e.s_value)?;
    d.set_item("bound", e.bound)?;
    d.set_item("violated", e.violated)?;
    Ok(d)
}

#[pyfunction]
fn v3_canonical(py: Python<'_>) -> PyResult<Bound<'_, PyDict>> {
    v3_dict(py, &inequality::v3_evaluate(&inequality::v3_canonical()).map_err(err)?)
}

#[pyfunction]
fn v3_from_angles(py: Python<'_>, theta_p: f64, theta_e: f64, theta_e_prime: f64) -> PyResult<Bound<'_, PyDict>> {
    let s = inequality::v3_from_angles(rad(theta_p), rad(theta_e), rad(theta_e_prime));
    v3_dict(py, &inequality::v3_evaluate(&s).map_err(err)?)
}

#[pyfunction]
fn v4_canonical(py: Python<'_>) -> PyResult<Bound<'_, PyDict>> {
    v4_dict(py, &inequality::v4_evaluate(&inequality::v4_canonical()).map_err(err)?)
}

#[pyfunction]
fn v4_from_angles(
    py: Python<'_>,
    theta_e: f64,
    theta_e_prime: f64,
    theta_p: f64,
    theta_p_prime: f64,
) -> PyResult<Bound<'_, PyDict>> {
    let s = inequality::v4_from_angles(rad(theta_e), rad(theta_e_prime), rad(theta_p), rad(theta_p_prime));
    v4_dict(py, &inequality::v4_evaluate(&s).map_err(err)?)
}

/// Outcome of [`joint_feasible`].
#[pyclass(frozen, name = "FeasibilityResult")]
struct PyFeasibility {
    inner: feasibility::FeasibilityResult,
}

#[pymethods]
impl PyFeasibility {
    #[getter]
    fn feasible(&self) -> bool {
        self.inner.feasible
    }

    #[getter]
    fn boundary(&self) -> bool {
        self.inner.boundary
    }

    #[getter]
    fn verdict(&self) -> &'static str {
        self.inner.verdict()
    }

    /// Probabilities of the 2^n sign assignments; bit i of the index set means variable i is -1.
    #[getter]
    fn witness(&self) -> Option<Vec<f64>> {
        self.inner.witness.clone()
    }

    #[getter]
    fn certificate_inequality(&self) -> Option<String> {
        self.inner.certificate.as_ref().map(|c| c.inequality.clone())
    }

    /// Separating functional at the target (negative when infeasible).
    #[getter]
    fn certificate_value(&self) -> Option<f64> {
        self.inner.certificate.as_ref().map(|c| c.value_at_target)
    }

    fn __repr__(&self) -> String {
        format!("FeasibilityResult({}, boundary={})", self.inner.verdict(), self.inner.boundary)
    }
}

/// `pairs` is a list of `(i, j, value)`. `moments` is `None` (all zero),
/// `"free"`, or a list of per-variable means.
#[pyfunction]
#[pyo3(signature = (n, pairs, moments=None, labels=None))]
fn joint_feasible(
    n: usize,
    pairs: Vec<(usize, usize, f64)>,
    moments: Option<Bound<'_, PyAny>>,
    labels: Option<Vec<String>>,
) -> PyResult<PyFeasibility> {
    let moments = match moments {
        None => Moments::Zero,
        Some(m) => {
            if let Ok(s) = m.extract::<String>() {
                match s.as_str() {
                    "free" => Moments::Free,
                    "zero" => Moments::Zero,
                    other => return Err(PyValueError::new_err(format!("unknown moments {other:?}"))),
                }
            } else {
                Moments::Values(m.extract::<Vec<f64>>()?)
            }
        }
    };
    let mut target = CorrelationTarget::new(n, &pairs).with_moments(moments);
    if let Some(l) = labels {
        let refs: Vec<&str> = l.iter().map(String::as_str).collect();
        target = target.with_labels(&refs);
    }
    let inner = feasibility::joint_feasible(&target).map_err(err)?;
    Ok(PyFeasibility { inner })
}

/// Result of [`run_protocol`].
#[pyclass(frozen, name = "ProtocolSignature")]
struct PySignature {
    inner: protocol::ProtocolSignature,
}

#[pymethods]
impl PySignature {
    /// `(V_pp, V_pm, V_mp, V_mm)`
    #[getter]
    fn cells(&self) -> (f64, f64, f64, f64) {
        let v = self.inner.signature;
        (v.pp, v.pm, v.mp, v.mm)
    }

    #[getter]
    fn counts(&self) -> (u64, u64, u64, u64) {
        let c = self.inner.counts;
        (c.pp, c.pm, c.mp, c.mm)
    }

    #[getter]
    fn trials(&self) -> u64 {
        self.inner.params.trials
    }

    #[getter]
    fn mean_blocks_to_trigger(&self) -> f64 {
        self.inner.mean_blocks_to_trigger
    }

    fn __repr__(&self) -> String {
        let v = self.inner.signature;
        format!("ProtocolSignature(pp={}, pm={}, mp={}, mm={})", v.pp, v.pm, v.mp, v.mm)
    }
}

#[pyfunction]
#[pyo3(signature = (rho, seed, trials=10_000, block_len=1001, threshold=100, alignment="isochronous", persistence=None, stream=0))]
#[allow(clippy::too_many_arguments)]
fn run_protocol(
    rho: f64,
    seed: u64,
    trials: u64,
    block_len: u64,
    threshold: u64,
    alignment: &str,
    persistence: Option<f64>,
    stream: u64,
) -> PyResult<PySignature> {
    let alignment = match alignment {
        "isochronous" => Alignment::IsochronousBlock,
        "successive" => Alignment::SuccessiveBlock,
        other => return Err(PyValueError::new_err(format!("unknown alignment {other:?}"))),
    };
    let sources = match persistence {
        None => SourcePair::memoryless(rho),
        Some(p) => SourcePair::markov(rho, p),
    };
    let params = ProtocolParams {
        block_len,
        threshold,
        trials,
        alignment,
        ..ProtocolParams::default()
    };
    let inner = protocol::run_protocol(&sources, &params, RngStream::new(seed, stream)).map_err(err)?;
    Ok(PySignature { inner })
}

/// Returns `(distance, threshold, distinguishable)`.
#[pyfunction]
fn discriminate(a: &PySignature, b: &PySignature) -> PyResult<(f64, f64, bool)> {
    let d = protocol::discriminate(&a.inner, &b.inner).map_err(err)?;
    Ok((d.distance, d.threshold, d.distinguishable))
}

#[pymodule]
fn bell_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(canonicalize, m)?)?;
    m.add_function(wrap_pyfunction!(correlation, m)?)?;
    m.add_function(wrap_pyfunction!(sica3_residual, m)?)?;
    m.add_function(wrap_pyfunction!(bell3_finite, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_finite, m)?)?;
    m.add_function(wrap_pyfunction!(singlet_batch, m)?)?;
    m.add_function(wrap_pyfunction!(sequential_collapse_batch, m)?)?;
    m.add_function(wrap_pyfunction!(nonlocal_toy_batch, m)?)?;
    m.add_function(wrap_pyfunction!(lhv_batch, m)?)?;
    m.add_function(wrap_pyfunction!(qm_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(v3_canonical, m)?)?;
    m.add_function(wrap_pyfunction!(v3_from_angles, m)?)?;
    m.add_function(wrap_pyfunction!(v4_canonical, m)?)?;
    m.add_function(wrap_pyfunction!(v4_from_angles, m)?)?;
    m.add_function(wrap_pyfunction!(joint_feasible, m)?)?;
    m.add_function(wrap_pyfunction!(run_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(discriminate, m)?)?;
    m.add_class::<PyFeasibility>()?;
    m.add_class::<PySignature>()?;
    Ok(())
}
