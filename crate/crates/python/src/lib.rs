//! Python bindings for `woven-core`.
//!
//! Frame elements are 0-based in the Rust API; the `sigma` and `assignment`
//! fields of verdicts use the 1-based convention of the JSON reports.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use woven_core::certificates::{self as cert, CertificateName, CertificateResult, Direction, DualVariant};
use woven_core::duality::{self, PerturbationSequence};
use woven_core::error::Error;
use woven_core::frame::{self, Frame};
use woven_core::io;
use woven_core::numerics::Matrix;
use woven_core::weaving::{self, Threads, WeavingVerdict};

create_exception!(woven, WovenError, PyValueError, "Invalid input or failed numerical precondition.");

fn err(e: Error) -> PyErr {
    WovenError::new_err(e.to_string())
}

fn io_err(e: io::IoError) -> PyErr {
    WovenError::new_err(e.to_string())
}

fn threads(k: Option<usize>) -> PyResult<Threads> {
    match k {
        None => Ok(Threads::Auto),
        Some(0) => Err(WovenError::new_err("threads must be at least 1")),
        Some(k) => Ok(Threads::Fixed(k)),
    }
}

/// A finite sequence of vectors in R^dim.
#[pyclass(name = "Frame", module = "woven", frozen)]
#[derive(Clone)]
struct PyFrame {
    inner: Frame,
}

impl From<Frame> for PyFrame {
    fn from(inner: Frame) -> Self {
        PyFrame { inner }
    }
}

#[pymethods]
impl PyFrame {
    #[new]
    #[pyo3(signature = (vectors, dim = None))]
    fn new(vectors: Vec<Vec<f64>>, dim: Option<usize>) -> PyResult<Self> {
        let dim = dim.or_else(|| vectors.first().map(Vec::len)).unwrap_or(0);
        if let Some(x) = vectors.iter().flatten().find(|x| !x.is_finite()) {
            return Err(WovenError::new_err(format!("non-finite entry {x}")));
        }
        Ok(Frame::new(dim, &vectors).map_err(err)?.into())
    }

    #[staticmethod]
    fn orthonormal_basis(dim: usize) -> Self {
        Frame::orthonormal_basis(dim).into()
    }

    /// Parses the JSON frame-file format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(io::parse_frame(text.as_bytes()).map_err(io_err)?.into())
    }

    fn to_json(&self) -> String {
        io::frame_to_json(&self.inner)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn vectors(&self) -> Vec<Vec<f64>> {
        self.inner.vectors()
    }

    fn frame_operator(&self) -> Vec<Vec<f64>> {
        self.inner.frame_operator().to_rows()
    }

    /// Optimal `(lower, upper)` frame bounds.
    fn bounds(&self) -> PyResult<(f64, f64)> {
        let b = self.inner.bounds().map_err(err)?;
        Ok((b.lower, b.upper))
    }

    fn riesz_bounds(&self) -> PyResult<(f64, f64)> {
        let b = self.inner.riesz_bounds().map_err(err)?;
        Ok((b.lower, b.upper))
    }

    fn is_frame(&self) -> PyResult<bool> {
        self.inner.is_frame().map_err(err)
    }

    fn rank(&self) -> PyResult<usize> {
        self.inner.rank().map_err(err)
    }

    /// `(excess, riesz_indices, redundant_indices)` with 0-based indices.
    fn excess(&self) -> PyResult<(usize, Vec<usize>, Vec<usize>)> {
        let e = self.inner.excess().map_err(err)?;
        Ok((e.excess, e.riesz_indices, e.redundant_indices))
    }

    fn scaled(&self, c: f64) -> Self {
        self.inner.scaled(c).into()
    }

    fn canonical_dual(&self) -> PyResult<Self> {
        Ok(duality::canonical_dual(&self.inner).map_err(err)?.into())
    }

    fn canonical_parseval(&self) -> PyResult<Self> {
        Ok(duality::canonical_parseval(&self.inner).map_err(err)?.into())
    }

    /// A seeded member of the dual family and its perturbation vectors.
    #[pyo3(signature = (seed, scale = 1.0))]
    fn random_dual(&self, seed: u64, scale: f64) -> PyResult<(Self, Vec<Vec<f64>>)> {
        let (d, u) = duality::random_dual(&self.inner, seed, scale).map_err(err)?;
        Ok((d.into(), u.vectors()))
    }

    fn is_dual_of(&self, other: &PyFrame) -> PyResult<bool> {
        frame::verify_duality(&other.inner, &self.inner).map_err(err)
    }

    fn __eq__(&self, other: &PyFrame) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Frame(dim={}, vectors={:?})", self.inner.dim(), self.inner.vectors())
    }
}

#[pyclass(name = "WeavingVerdict", module = "woven", frozen, get_all)]
struct PyVerdict {
    woven: bool,
    universal_lower: f64,
    universal_upper: f64,
    partitions_checked: u64,
    /// For pairs: sorted 1-based indices taken from the first frame.
    sigma: Option<Vec<usize>>,
    /// 1-based frame number for each element of the failing weaving.
    assignment: Option<Vec<usize>>,
}

impl From<&WeavingVerdict> for PyVerdict {
    fn from(v: &WeavingVerdict) -> Self {
        let w = v.witness.as_ref();
        PyVerdict {
            woven: v.woven,
            universal_lower: v.universal_lower,
            universal_upper: v.universal_upper,
            partitions_checked: v.partitions_checked,
            sigma: w.filter(|w| w.assignment.frames == 2).map(|w| w.assignment.sigma().iter().map(|i| i + 1).collect()),
            assignment: w.map(|w| w.assignment.choice.iter().map(|c| c + 1).collect()),
        }
    }
}

#[pymethods]
impl PyVerdict {
    fn __repr__(&self) -> String {
        format!(
            "WeavingVerdict(woven={}, universal_lower={}, universal_upper={}, sigma={:?})",
            self.woven, self.universal_lower, self.universal_upper, self.sigma
        )
    }
}

#[pyclass(name = "CertificateResult", module = "woven", frozen)]
struct PyCertificate {
    inner: CertificateResult,
}

#[pymethods]
impl PyCertificate {
    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name.as_str()
    }

    #[getter]
    fn applicable(&self) -> bool {
        self.inner.applicable
    }

    #[getter]
    fn guaranteed_lower(&self) -> Option<f64> {
        self.inner.guaranteed_lower
    }

    #[getter]
    fn guaranteed_upper(&self) -> Option<f64> {
        self.inner.guaranteed_upper
    }

    #[getter]
    fn failed_condition(&self) -> Option<String> {
        self.inner.failed_condition.clone()
    }

    #[getter]
    fn quantities(&self) -> BTreeMap<String, f64> {
        self.inner.quantities.clone()
    }

    /// Whether every concluded family passes the exhaustive oracle.
    fn is_sound(&self, py: Python<'_>) -> PyResult<bool> {
        py.detach(|| cert::check_soundness(&self.inner)).map(|r| r.sound).map_err(err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.inner).expect("finite quantities")
    }

    fn __repr__(&self) -> String {
        format!(
            "CertificateResult(name={}, applicable={}, guaranteed_lower={:?}, guaranteed_upper={:?})",
            self.inner.name, self.inner.applicable, self.inner.guaranteed_lower, self.inner.guaranteed_upper
        )
    }
}

fn frames_of(fs: &[PyRef<'_, PyFrame>]) -> Vec<Frame> {
    fs.iter().map(|f| f.inner.clone()).collect()
}

#[pyfunction]
#[pyo3(signature = (phi, psi, threads = None))]
fn exhaustive_pair(py: Python<'_>, phi: &PyFrame, psi: &PyFrame, threads: Option<usize>) -> PyResult<PyVerdict> {
    let t = self::threads(threads)?;
    let v = py.detach(|| weaving::exhaustive_pair_with(&phi.inner, &psi.inner, t)).map_err(err)?;
    Ok((&v).into())
}

#[pyfunction]
#[pyo3(signature = (frames, threads = None))]
fn exhaustive_multi(py: Python<'_>, frames: Vec<PyRef<'_, PyFrame>>, threads: Option<usize>) -> PyResult<PyVerdict> {
    let t = self::threads(threads)?;
    let fs = frames_of(&frames);
    let v = py.detach(|| weaving::exhaustive_multi_with(&fs, t)).map_err(err)?;
    Ok((&v).into())
}

#[pyfunction]
fn riesz_woven(phi: &PyFrame, psi: &PyFrame) -> PyResult<bool> {
    weaving::riesz_woven(&phi.inner, &psi.inner).map_err(err)
}

#[pyfunction]
fn verify_duality(phi: &PyFrame, psi: &PyFrame) -> PyResult<bool> {
    frame::verify_duality(&phi.inner, &psi.inner).map_err(err)
}

/// Random non-woven pairs as `(trial, phi, psi, verdict)` tuples.
#[pyfunction]
fn counterexample_search(
    py: Python<'_>,
    dim: usize,
    n: usize,
    trials: usize,
    seed: u64,
) -> PyResult<Vec<(usize, PyFrame, PyFrame, PyVerdict)>> {
    let found = py.detach(|| weaving::counterexample_search(dim, n, trials, seed)).map_err(err)?;
    Ok(found
        .iter()
        .map(|c| (c.trial, c.phi.clone().into(), c.psi.clone().into(), (&c.verdict).into()))
        .collect())
}

fn perturbation(vectors: Option<Vec<Vec<f64>>>, dim: usize, what: &str) -> PyResult<PerturbationSequence> {
    let vs = vectors.ok_or_else(|| WovenError::new_err(format!("this certificate requires {what}")))?;
    let f = Frame::new(dim, &vs).map_err(err)?;
    PerturbationSequence::from_frame(&f).map_err(err)
}

/// Evaluates one certificate.
///
/// `u` and `v` are perturbation sequences given as vector lists; for
/// `operator_multiplier`, `u` is the operator as a list of rows.
#[pyfunction]
#[pyo3(signature = (name, frames, *, u = None, v = None, eps = None, alpha = None, beta = None, variant = None, direction = None))]
#[allow(clippy::too_many_arguments)]
fn certify(
    py: Python<'_>,
    name: &str,
    frames: Vec<PyRef<'_, PyFrame>>,
    u: Option<Vec<Vec<f64>>>,
    v: Option<Vec<Vec<f64>>>,
    eps: Option<f64>,
    alpha: Option<Vec<f64>>,
    beta: Option<Vec<f64>>,
    variant: Option<&str>,
    direction: Option<&str>,
) -> PyResult<PyCertificate> {
    use CertificateName as N;
    let name: CertificateName = name.parse().map_err(err)?;
    let fs = frames_of(&frames);
    let want = match name {
        N::CanonicalDualSelf | N::OperatorMultiplier | N::RedundantSmallNorm | N::DualFamily => Some(1),
        N::TransitiveBridge => Some(3),
        N::DualsToFrames => Some(4),
        N::BesselUnion => None,
        _ => Some(2),
    };
    if want.is_some_and(|k| k != fs.len()) || fs.is_empty() {
        return Err(WovenError::new_err(format!("{name} takes {} frame(s), got {}", want.unwrap_or(1), fs.len())));
    }
    let dim = fs[0].dim();
    let variant: DualVariant = variant.map(str::parse).transpose().map_err(err)?.unwrap_or_default();
    let direction: Direction =
        direction.map(str::parse).transpose().map_err(err)?.unwrap_or(Direction::OriginalsToDuals);
    let need = |x: Option<f64>, what: &str| x.ok_or_else(|| WovenError::new_err(format!("{name} requires {what}")));
    let r = match name {
        N::SynthesisProximity => cert::cert_synthesis_proximity(&fs[0], &fs[1]),
        N::OperatorMultiplier => {
            let rows = u.ok_or_else(|| WovenError::new_err("operator_multiplier requires u"))?;
            let m = Matrix::from_rows(&rows).map_err(err)?;
            cert::cert_operator_multiplier(&fs[0], &m)
        }
        N::TransitiveBridge => py.detach(|| cert::cert_transitive_bridge_frames(&fs[0], &fs[1], &fs[2])),
        N::BesselUnion => cert::cert_bessel_union(&fs),
        N::RedundantSmallNorm => {
            let u = perturbation(u, dim, "u")?;
            cert::cert_redundant_small_norm(&fs[0], &u, need(eps, "eps")?)
        }
        N::DualTransfer => {
            let u = perturbation(u, dim, "u")?;
            py.detach(|| cert::cert_dual_transfer(&fs[0], &fs[1], &u))
        }
        N::CanonicalDualSelf => cert::cert_canonical_dual_self(&fs[0]),
        N::DualFamily => cert::cert_dual_family(&fs[0], &perturbation(u, dim, "u")?),
        N::ParsevalDualPair => {
            let (u, v) = (perturbation(u, dim, "u")?, perturbation(v, dim, "v")?);
            py.detach(|| cert::cert_parseval_dual_pair(&fs[0], &fs[1], &u, &v))
        }
        N::PerturbedDuals => {
            let (u, v) = (perturbation(u, dim, "u")?, perturbation(v, dim, "v")?);
            py.detach(|| cert::cert_perturbed_duals(&fs[0], &fs[1], &u, &v, variant))
        }
        N::DualsToFrames => py.detach(|| cert::cert_duals_to_frames(&fs[0], &fs[1], &fs[2], &fs[3])),
        N::CanonicalPair => py.detach(|| cert::cert_canonical_pair(&fs[0], &fs[1], direction)),
        N::CanonicalParseval => py.detach(|| cert::cert_canonical_parseval(&fs[0], &fs[1])),
        N::ScalarWeaving => {
            let a = alpha.ok_or_else(|| WovenError::new_err("scalar_weaving requires alpha"))?;
            let b = beta.ok_or_else(|| WovenError::new_err("scalar_weaving requires beta"))?;
            py.detach(|| cert::cert_scalar_weaving(&fs[0], &fs[1], &a, &b))
        }
    };
    Ok(PyCertificate { inner: r.map_err(err)? })
}

/// Runs the command-line front end in-process; returns `(code, stdout, stderr)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut errs = Vec::new();
    let code = woven_core::cli::run(std::iter::once("woven".to_owned()).chain(args), &mut out, &mut errs);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&errs).into_owned())
}

#[pymodule]
fn woven(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("WovenError", m.py().get_type::<WovenError>())?;
    m.add_class::<PyFrame>()?;
    m.add_class::<PyVerdict>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(exhaustive_pair, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_multi, m)?)?;
    m.add_function(wrap_pyfunction!(riesz_woven, m)?)?;
    m.add_function(wrap_pyfunction!(verify_duality, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample_search, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add("CERTIFICATES", CertificateName::ALL.iter().map(|n| n.as_str()).collect::<Vec<_>>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
