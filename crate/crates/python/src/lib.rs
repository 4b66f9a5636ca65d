//! Python bindings. Real numbers cross the boundary as decimal strings so no
//! precision is lost to `float`.

// The pyfunction macro expands `?` into a PyErr-to-PyErr conversion.
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qfzeta::bernoulli;
use qfzeta::dyadic::{self, QRepresentation};
use qfzeta::euler;
use qfzeta::lfunc;
use qfzeta::{Error, Half, PrecReal, QuadraticCharacter};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NotFundamental(_) | Error::Domain(_) | Error::Parity(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::PrecisionInsufficient(_) | Error::Overflow(_) => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn character(delta: i64) -> PyResult<QuadraticCharacter> {
    QuadraticCharacter::from_delta(delta).map_err(py_err)
}

fn half(i: u8) -> PyResult<Half> {
    Half::from_index(i).map_err(py_err)
}

fn real(text: &str, digits: u32) -> PyResult<PrecReal> {
    PrecReal::parse(text, digits + 10).map_err(py_err)
}

fn plain(x: &PrecReal) -> String {
    x.to_plain_string(x.digits() as usize)
}

/// Kronecker character of a fundamental discriminant.
#[pyclass(name = "Character", frozen)]
struct PyCharacter {
    inner: QuadraticCharacter,
}

#[pymethods]
impl PyCharacter {
    #[new]
    fn new(delta: i64) -> PyResult<Self> {
        Ok(PyCharacter {
            inner: character(delta)?,
        })
    }

    #[getter]
    fn discriminant(&self) -> i64 {
        self.inner.discriminant().delta()
    }

    #[getter]
    fn modulus(&self) -> u64 {
        self.inner.modulus()
    }

    /// 0 for real fields, 1 for imaginary ones.
    #[getter]
    fn parity(&self) -> u8 {
        self.inner.parity()
    }

    fn chi(&self, n: i64) -> i8 {
        self.inner.chi(n)
    }

    /// `χ(1), …, χ(count)`.
    fn values(&self, count: usize) -> Vec<i8> {
        self.inner.values(count)
    }

    /// `(re, im)` of the Gauss sum.
    #[pyo3(signature = (digits = 50))]
    fn gauss_sum(&self, digits: u32) -> (String, String) {
        let (re, im) = self.inner.gauss_sum(digits);
        (plain(&re), plain(&im))
    }

    fn __repr__(&self) -> String {
        format!("Character({})", self.discriminant())
    }
}

/// `B_k` as a fraction string.
#[pyfunction]
fn bernoulli_number(k: usize) -> PyResult<String> {
    Ok(bernoulli::bernoulli_number(k).map_err(py_err)?.to_string())
}

/// `B_{0,χ}, …, B_{n_max,χ}` as fraction strings.
#[pyfunction]
fn gen_bernoulli(delta: i64, n_max: usize) -> PyResult<Vec<String>> {
    let table = bernoulli::gen_bernoulli(&character(delta)?, n_max).map_err(py_err)?;
    Ok(table.values().iter().map(|r| r.to_string()).collect())
}

#[pyfunction]
#[pyo3(signature = (sigma, digits = 50))]
fn zeta(sigma: &str, digits: u32) -> PyResult<String> {
    let s = real(sigma, digits)?;
    Ok(plain(&lfunc::zeta_real(&s, digits).map_err(py_err)?))
}

#[pyfunction]
#[pyo3(signature = (delta, sigma, digits = 50))]
fn dirichlet_l(delta: i64, sigma: &str, digits: u32) -> PyResult<String> {
    let s = real(sigma, digits)?;
    Ok(plain(
        &lfunc::dirichlet_l(&character(delta)?, &s, digits).map_err(py_err)?,
    ))
}

/// `qᵢ(σ)` from ζ and L; `which` is 1 or 2.
#[pyfunction]
#[pyo3(signature = (delta, which, sigma, digits = 50))]
fn q_analytic(delta: i64, which: u8, sigma: &str, digits: u32) -> PyResult<String> {
    let rep = QRepresentation::new(half(which)?, character(delta)?);
    let s = real(sigma, digits)?;
    Ok(plain(
        &dyadic::q_analytic(&rep, &s, digits).map_err(py_err)?,
    ))
}

/// `(closed form, decimal)` of `qᵢ(n)` for even `n` and `delta > 0`.
#[pyfunction]
#[pyo3(signature = (delta, which, n, digits = 50))]
fn q_exact_even(delta: i64, which: u8, n: u32, digits: u32) -> PyResult<(String, String)> {
    let rep = QRepresentation::new(half(which)?, character(delta)?);
    let v = dyadic::q_exact_even(&rep, n).map_err(py_err)?;
    Ok((v.to_string(), plain(&v.render(digits))))
}

/// Dyadic series for `pᵢ(σ)`: value, certified log error bound and per-term paths.
#[pyfunction]
#[pyo3(signature = (delta, which, sigma, terms = 12, digits = 50))]
fn p_series<'py>(
    py: Python<'py>,
    delta: i64,
    which: u8,
    sigma: &str,
    terms: usize,
    digits: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let c = character(delta)?;
    let s = real(sigma, digits)?;
    let r = dyadic::p_series(half(which)?, &c, &s, terms, digits).map_err(py_err)?;
    let d = PyDict::new_bound(py);
    d.set_item("value", plain(&r.value))?;
    d.set_item("log_tail_bound", r.tail_bound.to_sci_string())?;
    d.set_item("terms", r.terms)?;
    d.set_item(
        "paths",
        r.paths.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
    )?;
    Ok(d)
}

/// Truncated Euler product over primes up to `prime_limit`: `(value, log tail bound)`.
#[pyfunction]
#[pyo3(signature = (delta, which, sigma, prime_limit = 100_000, digits = 50))]
fn p_product(
    delta: i64,
    which: u8,
    sigma: &str,
    prime_limit: u64,
    digits: u32,
) -> PyResult<(String, String)> {
    let c = character(delta)?;
    let s = real(sigma, digits)?;
    let r = euler::p_product(&c, half(which)?, &s, prime_limit, digits).map_err(py_err)?;
    Ok((plain(&r.value), r.tail_bound.to_sci_string()))
}

type TableRow = (usize, Option<i64>, Option<i64>);

/// Rows `(N, error_exponent, tail_bound_exponent)`, raising the digits as
/// needed up to `max_digits`.
#[pyfunction]
#[pyo3(signature = (delta, which, sigma = "2", n_max = 10, digits = 50, max_digits = 4000))]
fn error_table(
    delta: i64,
    which: u8,
    sigma: &str,
    n_max: usize,
    digits: u32,
    max_digits: u32,
) -> PyResult<Vec<TableRow>> {
    let c = character(delta)?;
    let s = real(sigma, digits)?;
    let t = dyadic::error_table_auto(&c, half(which)?, &s, n_max, digits, max_digits)
        .map_err(py_err)?;
    Ok(t.rows
        .iter()
        .map(|r| (r.n, r.exponent, r.tail_exponent))
        .collect())
}

#[pymodule]
fn qfzeta_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCharacter>()?;
    m.add_function(wrap_pyfunction!(bernoulli_number, m)?)?;
    m.add_function(wrap_pyfunction!(gen_bernoulli, m)?)?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(dirichlet_l, m)?)?;
    m.add_function(wrap_pyfunction!(q_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(q_exact_even, m)?)?;
    m.add_function(wrap_pyfunction!(p_series, m)?)?;
    m.add_function(wrap_pyfunction!(p_product, m)?)?;
    m.add_function(wrap_pyfunction!(error_table, m)?)?;
    Ok(())
}
