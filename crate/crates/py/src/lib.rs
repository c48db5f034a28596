//! Python bindings. Structured results are returned as JSON text.

use lambda_sync::catalog;
use lambda_sync::flow::{self, ExpansionContext, InvarianceParams};
use lambda_sync::ktheory::{bowen_franks, extract_matrix_system, k0_tower, k1_tower, DEFAULT_WINDOW};
use lambda_sync::lgs::{build_lambda_sync_lgs, validate_lgs, LambdaGraphSystem};
use lambda_sync::oracle;
use lambda_sync::{Alphabet, Subshift};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(lambda_sync_py, LambdaSyncError, PyException);

fn err(e: lambda_sync::Error) -> PyErr {
    LambdaSyncError::new_err(e.to_string())
}

/// A subshift from spec JSON or a catalog name.
fn subshift(spec: &str) -> PyResult<Subshift> {
    if spec.trim_start().starts_with('{') {
        Subshift::from_json(spec).map_err(err)
    } else {
        catalog::from_name(spec).map_err(err)
    }
}

fn context(alphabet: Vec<String>, symbol: &str, fresh: &str) -> PyResult<ExpansionContext> {
    ExpansionContext::new(&Alphabet::new(alphabet).map_err(err)?, symbol, fresh).map_err(err)
}

#[pyfunction]
fn is_admissible(spec: &str, word: &str) -> PyResult<bool> {
    let sub = subshift(spec)?;
    oracle::is_admissible(&sub, &sub.parse(word).map_err(err)?).map_err(err)
}

#[pyfunction]
fn enumerate_words(spec: &str, length: usize) -> PyResult<Vec<String>> {
    let sub = subshift(spec)?;
    Ok(oracle::enumerate_words(&sub, length).map_err(err)?.iter().map(|w| sub.render(w)).collect())
}

#[pyfunction]
#[pyo3(signature = (spec, levels, word_cap=None, horizon=None))]
fn build_lgs(spec: &str, levels: usize, word_cap: Option<usize>, horizon: Option<usize>) -> PyResult<String> {
    let sub = subshift(spec)?;
    let w = word_cap.unwrap_or(2 * levels + 4);
    let h = horizon.unwrap_or(levels + 4);
    Ok(build_lambda_sync_lgs(&sub, levels, w, h).map_err(err)?.to_json())
}

#[pyfunction]
fn vertex_counts(lgs: &str) -> PyResult<Vec<usize>> {
    Ok(LambdaGraphSystem::from_json(lgs).map_err(err)?.vertex_counts())
}

#[pyfunction]
fn validate(lgs: &str) -> PyResult<String> {
    let report = validate_lgs(&LambdaGraphSystem::from_json(lgs).map_err(err)?);
    serde_json::to_string(&report).map_err(|e| LambdaSyncError::new_err(e.to_string()))
}

#[pyfunction]
#[pyo3(signature = (lgs, window=DEFAULT_WINDOW))]
fn groups(lgs: &str, window: usize) -> PyResult<String> {
    let ms = extract_matrix_system(&LambdaGraphSystem::from_json(lgs).map_err(err)?);
    let k0 = k0_tower(&ms, window).map_err(err)?;
    let k1 = k1_tower(&ms, window).map_err(err)?;
    let bf = match bowen_franks(&k0, &k1) {
        Ok((a, b)) => serde_json::json!({ "bf0": a.to_string(), "bf1": b.to_string() }),
        Err(e) => serde_json::json!({ "undetermined": e.to_string() }),
    };
    Ok(serde_json::json!({ "k0": k0.to_json(), "k1": k1.to_json(), "bowen_franks": bf }).to_string())
}

#[pyfunction]
#[pyo3(signature = (spec, symbol=None, fresh=flow::DEFAULT_FRESH))]
fn expand(spec: &str, symbol: Option<&str>, fresh: &str) -> PyResult<String> {
    let sub = subshift(spec)?;
    Ok(flow::expand_subshift(&sub, symbol, Some(fresh)).map_err(err)?.spec().to_json())
}

#[pyfunction]
fn xi(alphabet: Vec<String>, symbol: &str, fresh: &str, word: &str) -> PyResult<String> {
    let c = context(alphabet, symbol, fresh)?;
    let w = c.inner().parse(word).map_err(err)?;
    Ok(c.outer().render(&c.xi(&w).map_err(err)?))
}

#[pyfunction]
fn eta(alphabet: Vec<String>, symbol: &str, fresh: &str, word: &str) -> PyResult<String> {
    let c = context(alphabet, symbol, fresh)?;
    let w = c.outer().parse(word).map_err(err)?;
    Ok(c.inner().render(&c.eta(&w).map_err(err)?))
}

#[pyfunction]
fn phi(alphabet: Vec<String>, symbol: &str, fresh: &str, word: &str) -> PyResult<String> {
    let c = context(alphabet, symbol, fresh)?;
    let w = c.inner().parse(word).map_err(err)?;
    Ok(c.outer().render(&c.phi(&w).map_err(err)?))
}

#[pyfunction]
fn psi(alphabet: Vec<String>, symbol: &str, fresh: &str, word: &str) -> PyResult<String> {
    let c = context(alphabet, symbol, fresh)?;
    let w = c.outer().parse(word).map_err(err)?;
    Ok(c.inner().render(&c.psi(&w).map_err(err)?))
}

#[pyfunction]
#[pyo3(signature = (spec, levels, window=DEFAULT_WINDOW))]
fn invariance_report(spec: &str, levels: usize, window: usize) -> PyResult<String> {
    let sub = subshift(spec)?;
    let params = InvarianceParams { window, ..InvarianceParams::default() };
    let report = flow::invariance_report(&sub, levels, &params).map_err(err)?;
    serde_json::to_string(&report.rows).map_err(|e| LambdaSyncError::new_err(e.to_string()))
}

#[pyfunction]
fn fischer_cover(spec: &str) -> PyResult<String> {
    let cover = catalog::fischer_cover(&subshift(spec)?).map_err(err)?;
    serde_json::to_string(&cover.to_file()).map_err(|e| LambdaSyncError::new_err(e.to_string()))
}

#[pymodule]
fn lambda_sync_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LambdaSyncError", m.py().get_type::<LambdaSyncError>())?;
    m.add_function(wrap_pyfunction!(is_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_words, m)?)?;
    m.add_function(wrap_pyfunction!(build_lgs, m)?)?;
    m.add_function(wrap_pyfunction!(vertex_counts, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(groups, m)?)?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(xi, m)?)?;
    m.add_function(wrap_pyfunction!(eta, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(invariance_report, m)?)?;
    m.add_function(wrap_pyfunction!(fischer_cover, m)?)?;
    Ok(())
}
