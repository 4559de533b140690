//! Python bindings: `import pyheckesum`.

use heckesum::basis::NewformLocalData;
use heckesum::density::{self, DensityConfig, Group};
use heckesum::newform_sums::{self, SyntheticSpectrum};
use heckesum::petersson::{self, TruncationPolicy, WeightLevel};
use heckesum::{arith, bessel, factor, kloosterman, oracles, Error, FactoredInteger};
use num_bigint::BigInt;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NotConverged { .. } | Error::Quadrature(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for heckesum::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn fac(n: u64) -> PyResult<FactoredInteger> {
    factor(n).py()
}

fn policy(tol: Option<f64>, cmax: Option<u64>) -> PyResult<TruncationPolicy> {
    let p = match (tol, cmax) {
        (Some(_), Some(_)) => return Err(PyValueError::new_err("give tol or cmax, not both")),
        (_, Some(c)) => TruncationPolicy::fixed(c),
        (Some(t), None) => TruncationPolicy::tolerance(t),
        (None, None) => TruncationPolicy::default(),
    };
    p.validate().py()?;
    Ok(p)
}

/// A truncated series: value, rigorous tail bound, terms summed.
#[pyclass(frozen, get_all, skip_from_py_object, name = "TruncatedSum")]
#[derive(Clone)]
struct PyTruncatedSum {
    value: f64,
    tail_bound: f64,
    terms_used: u64,
    converged: bool,
}

#[pymethods]
impl PyTruncatedSum {
    fn __repr__(&self) -> String {
        format!(
            "TruncatedSum(value={}, tail_bound={:e}, terms_used={}, converged={})",
            self.value, self.tail_bound, self.terms_used, self.converged
        )
    }
}

impl From<petersson::TruncatedSum> for PyTruncatedSum {
    fn from(s: petersson::TruncatedSum) -> Self {
        PyTruncatedSum { value: s.value, tail_bound: s.tail_bound, terms_used: s.terms_used, converged: s.converged }
    }
}

#[pyclass(frozen, get_all, name = "PureSumReport")]
struct PyPureSumReport {
    sum: PyTruncatedSum,
    heuristic_bound: f64,
    oscillation: f64,
    diagonal: f64,
    x: u64,
    y: u64,
}

impl From<newform_sums::PureSumReport> for PyPureSumReport {
    fn from(r: newform_sums::PureSumReport) -> Self {
        PyPureSumReport {
            sum: r.sum.into(),
            heuristic_bound: r.heuristic_bound,
            oscillation: r.oscillation,
            diagonal: r.diagonal,
            x: r.x,
            y: r.y,
        }
    }
}

#[pyclass(frozen, get_all, name = "CardinalityReport")]
struct PyCardinalityReport {
    estimate: Py<PyPureSumReport>,
    main_term: f64,
    sandwich: (f64, f64),
    oracle_dim: Option<u64>,
    rounded: i64,
}

#[pyclass(frozen, get_all, name = "OneLevelEstimate")]
struct PyOneLevelEstimate {
    e: f64,
    p_star: PyTruncatedSum,
    card: u64,
    p_star_over_card: f64,
    d1: f64,
    heuristic_error: f64,
}

/// Hecke eigenvalue data of one newform, read from the JSON eigen-data format.
#[pyclass(frozen, name = "NewformLocalData")]
struct PyNewform {
    inner: NewformLocalData,
}

#[pymethods]
impl PyNewform {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyNewform { inner: NewformLocalData::from_json(text).py()? })
    }

    #[getter]
    fn k(&self) -> u32 {
        self.inner.k()
    }

    #[getter]
    fn level(&self) -> u64 {
        self.inner.level().value()
    }

    fn lambda_p(&self, p: u64) -> PyResult<f64> {
        self.inner.lambda_p(p).py()
    }

    fn hecke_lambda(&self, n: u64) -> PyResult<f64> {
        self.inner.hecke_lambda(&fac(n)?).py()
    }

    fn mu_f(&self, c: u64) -> PyResult<f64> {
        self.inner.mu_f(&fac(c)?).py()
    }

    fn r_f(&self, c: u64) -> PyResult<f64> {
        self.inner.r_f(&fac(c)?).py()
    }

    fn rho_f(&self, c: u64) -> PyResult<f64> {
        self.inner.rho_f(&fac(c)?).py()
    }

    fn xi(&self, d: u64, ell: u64) -> PyResult<f64> {
        self.inner.xi(&fac(d)?, &fac(ell)?).py()
    }

    fn xi_one_sum_direct(&self, l: u64) -> PyResult<f64> {
        self.inner.xi_one_sum_direct(&fac(l)?).py()
    }

    fn xi_one_sum_closed(&self, l: u64, n: u64) -> PyResult<f64> {
        self.inner.xi_one_sum_closed(&fac(l)?, &fac(n)?).py()
    }

    fn z_local(&self, p: u64) -> PyResult<f64> {
        self.inner.z_local(p).py()
    }

    fn z_n(&self, n: u64) -> PyResult<f64> {
        self.inner.z_n(&fac(n)?).py()
    }
}

/// Prime factorization as a list of `(p, e)`.
#[pyfunction(name = "factor")]
fn py_factor(n: u64) -> PyResult<Vec<(u64, u32)>> {
    Ok(fac(n)?.factors().to_vec())
}

#[pyfunction]
fn moebius(n: u64) -> PyResult<i32> {
    Ok(arith::moebius(&fac(n)?))
}

#[pyfunction]
fn euler_phi(n: u64) -> PyResult<u64> {
    Ok(arith::euler_phi(&fac(n)?))
}

#[pyfunction]
fn eta(n: u64) -> PyResult<u64> {
    Ok(arith::eta(&fac(n)?))
}

#[pyfunction(name = "kloosterman")]
fn py_kloosterman(m: i64, n: i64, c: u64) -> PyResult<f64> {
    kloosterman::kloosterman(m, n, c).py()
}

#[pyfunction]
fn bessel_j(nu: u32, x: f64) -> PyResult<f64> {
    bessel::bessel_j(nu, x).py()
}

/// Petersson sum `Delta_{k,N}(m, n)`.
#[pyfunction]
#[pyo3(signature = (k, level, m, n, tol=None, cmax=None))]
fn delta(py: Python<'_>, k: u32, level: u64, m: u64, n: u64, tol: Option<f64>, cmax: Option<u64>) -> PyResult<PyTruncatedSum> {
    let wl = WeightLevel::new(k, level).py()?;
    let p = policy(tol, cmax)?;
    let s = py.detach(|| petersson::delta_full(&wl, m, n, &p)).py()?;
    Ok(s.into())
}

/// Pure newform sum `Delta*_{k,N}(n)` truncated at `L <= x`, `m <= y`.
#[pyfunction]
#[pyo3(signature = (k, level, n, x=None, y=None, tol=None))]
fn pure_sum(py: Python<'_>, k: u32, level: u64, n: u64, x: Option<u64>, y: Option<u64>, tol: Option<f64>) -> PyResult<PyPureSumReport> {
    let p = policy(tol, None)?;
    let lv = fac(level)?;
    let r = py.detach(|| newform_sums::pure_sum(k, &lv, n, x, y, &p)).py()?;
    Ok(r.into())
}

#[pyfunction]
#[pyo3(signature = (k, level, x=None, y=None, tol=None))]
fn cardinality_estimate(
    py: Python<'_>,
    k: u32,
    level: u64,
    x: Option<u64>,
    y: Option<u64>,
    tol: Option<f64>,
) -> PyResult<PyCardinalityReport> {
    let p = policy(tol, None)?;
    let lv = fac(level)?;
    let c = py.detach(|| newform_sums::cardinality_estimate(k, &lv, x, y, &p)).py()?;
    Ok(PyCardinalityReport {
        estimate: Py::new(py, PyPureSumReport::from(c.estimate))?,
        main_term: c.main_term,
        sandwich: c.sandwich,
        oracle_dim: c.oracle_dim,
        rounded: c.rounded,
    })
}

/// Round trip of the level-raising identity and its Moebius inverse on a
/// random synthetic spectrum.
#[pyfunction]
#[pyo3(signature = (k, level, m, n, seed=0))]
fn inversion_pair_check(k: u32, level: u64, m: u64, n: u64, seed: u64) -> PyResult<bool> {
    let lv = fac(level)?;
    let mut primes: Vec<u64> = fac(m)?.primes().chain(fac(n)?.primes()).collect();
    primes.sort_unstable();
    primes.dedup();
    let spec = SyntheticSpectrum::generate(k, &lv, &primes, 2, 1.9, seed).py()?;
    Ok(newform_sums::inversion_pair_check(k, &lv, m, n, &spec).py()?.passed)
}

#[pyfunction]
fn ramanujan_tau(max: usize) -> PyResult<Vec<BigInt>> {
    oracles::ramanujan_tau(max).py()
}

#[pyfunction]
fn dim_cusp(k: u32, level: u64) -> PyResult<u64> {
    oracles::dim_cusp(k, &fac(level)?).py()
}

#[pyfunction]
fn newform_dim(k: u32, level: u64) -> PyResult<u64> {
    oracles::newform_dim(k, &fac(level)?).py()
}

/// `(time_side, fourier_side)` of `int phi W_1(G)` for the Fejer function of support `sigma`.
#[pyfunction]
fn rmt_integral(group: &str, sigma: f64) -> PyResult<(f64, f64)> {
    let g: Group = group.parse().py()?;
    let phi = density::fejer_pair(sigma).py()?;
    let r = density::rmt_integral(g, &phi).py()?;
    Ok((r.time_side, r.fourier_side))
}

#[pyfunction]
fn support_limit(k: u32, level: f64) -> PyResult<f64> {
    density::support_limit(k, level).py()
}

#[pyfunction]
#[pyo3(signature = (k, level, sigma, u, r=None, tol=None))]
fn one_level_estimate(
    py: Python<'_>,
    k: u32,
    level: u64,
    sigma: f64,
    u: f64,
    r: Option<f64>,
    tol: Option<f64>,
) -> PyResult<PyOneLevelEstimate> {
    let mut cfg = DensityConfig::new(k, fac(level)?, u);
    if let Some(r) = r {
        cfg.r = r;
    }
    cfg.policy = policy(tol, None)?;
    let phi = density::fejer_pair(sigma).py()?;
    let e = py.detach(|| density::one_level_estimate(&cfg, &phi)).py()?;
    Ok(PyOneLevelEstimate {
        e: e.e,
        p_star: e.p_star.sum.into(),
        card: e.card,
        p_star_over_card: e.p_star_over_card,
        d1: e.d1,
        heuristic_error: e.heuristic_error,
    })
}

#[pymodule]
fn pyheckesum(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", heckesum::VERSION)?;
    m.add_class::<PyTruncatedSum>()?;
    m.add_class::<PyPureSumReport>()?;
    m.add_class::<PyCardinalityReport>()?;
    m.add_class::<PyOneLevelEstimate>()?;
    m.add_class::<PyNewform>()?;
    m.add_function(wrap_pyfunction!(py_factor, m)?)?;
    m.add_function(wrap_pyfunction!(moebius, m)?)?;
    m.add_function(wrap_pyfunction!(euler_phi, m)?)?;
    m.add_function(wrap_pyfunction!(eta, m)?)?;
    m.add_function(wrap_pyfunction!(py_kloosterman, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(pure_sum, m)?)?;
    m.add_function(wrap_pyfunction!(cardinality_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(inversion_pair_check, m)?)?;
    m.add_function(wrap_pyfunction!(ramanujan_tau, m)?)?;
    m.add_function(wrap_pyfunction!(dim_cusp, m)?)?;
    m.add_function(wrap_pyfunction!(newform_dim, m)?)?;
    m.add_function(wrap_pyfunction!(rmt_integral, m)?)?;
    m.add_function(wrap_pyfunction!(support_limit, m)?)?;
    m.add_function(wrap_pyfunction!(one_level_estimate, m)?)?;
    Ok(())
}
