//! Python module `ccf`.
//!
//! Build with `--features extension-module` and load the shared library as
//! `ccf.so` (see `python/smoke_test.py`).

use ccf::numerics::RetryPolicy;
use ccf::quadforms::{class_group, Discriminant};
use ccf::shimura::{class_invariant_poly, find_modification, is_class_invariant, FunctionSymbol, InvariantPoly};
use ccf::Error;
use num_bigint::BigInt;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::PrecisionExhausted { .. } | Error::RoundingUncertified { .. } => PyArithmeticError::new_err(e.to_string()),
        Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn policy(bits: Option<u32>) -> RetryPolicy {
    bits.map(RetryPolicy::starting_at).unwrap_or_default()
}

/// Reduced forms (a, b, c) of discriminant `d`.
#[pyfunction]
fn reduced_forms(d: i64) -> PyResult<Vec<(i64, i64, i64)>> {
    let g = class_group(Discriminant::new(d).map_err(py_err)?).map_err(py_err)?;
    Ok(g.forms().iter().map(|f| (f.a, f.b, f.c)).collect())
}

#[pyfunction]
fn class_number(d: i64) -> PyResult<usize> {
    Ok(class_group(Discriminant::new(d).map_err(py_err)?).map_err(py_err)?.order())
}

/// Hilbert class polynomial coefficients, constant term first.
#[pyfunction]
#[pyo3(signature = (d, bits = None))]
fn hilbert_class_poly(d: i64, bits: Option<u32>) -> PyResult<Vec<BigInt>> {
    let p = ccf::hilbert::hilbert_class_poly(d, &policy(bits)).map_err(py_err)?;
    Ok(p.poly.coeffs().to_vec())
}

/// Class polynomial of `function` (e.g. "f2", "gamma2", "eta:3,5") at `d`.
///
/// When the function is not a class invariant and `modify` is set, a root of
/// unity multiple that is one is searched for instead. Returns the name of the
/// function used and the coefficients, constant term first; coefficients in
/// the quadratic field come as pairs (u, v) meaning u + v*w.
#[pyfunction]
#[pyo3(signature = (function, d, bits = None, modify = true))]
fn invariant_poly(py: Python<'_>, function: &str, d: i64, bits: Option<u32>, modify: bool) -> PyResult<(String, Py<PyAny>)> {
    let mut f = FunctionSymbol::parse(function).map_err(py_err)?;
    if modify && !is_class_invariant(&f, d).map_err(py_err)?.invariant {
        f = find_modification(&f, d)
            .map_err(py_err)?
            .map(|(g, _)| g)
            .ok_or_else(|| PyValueError::new_err(format!("no modification of {function} is a class invariant for D = {d}")))?;
    }
    let p = class_invariant_poly(&f, d, &policy(bits)).map_err(py_err)?;
    let obj = match &p.poly {
        InvariantPoly::Rational(q) => q.coeffs().to_vec().into_pyobject(py)?.into_any().unbind(),
        InvariantPoly::Quadratic(q) => q.coeffs.clone().into_pyobject(py)?.into_any().unbind(),
    };
    Ok((f.to_string(), obj))
}

/// Runs the command-line front end; returns (exit_code, stdout, stderr).
#[pyfunction]
fn run(args: Vec<String>) -> (i32, String, String) {
    let out = ccf_cli::run(std::iter::once("ccf".to_string()).chain(args));
    (out.code, out.stdout, out.stderr)
}

#[pymodule]
#[pyo3(name = "ccf")]
fn ccf_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(reduced_forms, m)?)?;
    m.add_function(wrap_pyfunction!(class_number, m)?)?;
    m.add_function(wrap_pyfunction!(hilbert_class_poly, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_poly, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
