//! Python bindings for the simcensus engine: parse a support spec, close the
//! generated subalgebra, and run the witness construction and the
//! simple-module census from Python. Reports come back as JSON strings so
//! callers can `json.loads` them.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use simcensus::census;
use simcensus::closure;
use simcensus::model::{build_generators, SupportSpec};
use simcensus::pipeline::{parse_field_arg, verify_spec, VerificationLevel, VerifyOptions};
use simcensus::witness::LeadingFactor;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A validated support spec: dimensions, multiplicities and lambda scales.
#[pyclass(name = "SupportSpec", frozen)]
struct PySupportSpec {
    inner: Arc<SupportSpec>,
}

#[pymethods]
impl PySupportSpec {
    /// Parse the inline grammar `n:a[,n:a]...` with the default lambda
    /// scheme; `field` is `"q"` or `"fp:<prime>"`.
    #[staticmethod]
    #[pyo3(signature = (text, field = "q"))]
    fn parse_inline(text: &str, field: &str) -> PyResult<Self> {
        let field = parse_field_arg(field).map_err(PyValueError::new_err)?;
        let spec = SupportSpec::parse_inline(field, text)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PySupportSpec { inner: Arc::new(spec) })
    }

    /// Parse the JSON format:
    /// `{"field": "Q" | {"Fp": p}, "entries": [{"n":.., "a":.., "lambdas": [..]?}]}`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec =
            SupportSpec::from_json(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PySupportSpec { inner: Arc::new(spec) })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    /// Total linear dimension: sum of `a_n * n^2`.
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    /// The support dimensions, increasing.
    fn support(&self) -> Vec<usize> {
        self.inner.support()
    }

    /// All components as `(n, i)` pairs, `i` 1-based.
    fn components(&self) -> Vec<(usize, usize)> {
        self.inner.components().iter().map(|c| (c.n, c.i)).collect()
    }

    /// Lambda values at dimension `n`, as exact strings.
    fn lambdas(&self, n: usize) -> PyResult<Vec<String>> {
        let entry = self
            .inner
            .entry(n)
            .ok_or_else(|| PyValueError::new_err(format!("dimension {n} not in support")))?;
        Ok(entry.lambdas.iter().map(|l| l.to_string()).collect())
    }

    fn __repr__(&self) -> String {
        let entries: Vec<String> = self
            .inner
            .entries()
            .iter()
            .map(|e| format!("{}:{}", e.n, e.multiplicity))
            .collect();
        format!(
            "SupportSpec({} over {}, dim {})",
            entries.join(","),
            self.inner.field(),
            self.inner.dimension()
        )
    }
}

/// Dimension of the subalgebra generated by the two canonical generators.
#[pyfunction]
fn closure_dimension(spec: &PySupportSpec) -> PyResult<usize> {
    let (_, e, sigma) = build_generators(&spec.inner);
    let basis = closure::generate(&spec.inner, &[e, sigma], true)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(basis.dimension())
}

/// Support dimensions of `e sigma^i e`: the dimensions in the support that
/// divide `i`.
#[pyfunction]
fn relation_support(spec: &PySupportSpec, i: usize) -> Vec<usize> {
    let (_, e, sigma) = build_generators(&spec.inner);
    census::relation_support(&e, &sigma, i, &spec.inner)
}

/// Separator corner values per component, as `{"n:i": exact string}`.
#[pyfunction]
fn witness_corners(spec: &PySupportSpec) -> PyResult<BTreeMap<String, String>> {
    let (_, e, sigma) = build_generators(&spec.inner);
    let basis = closure::generate(&spec.inner, &[e.clone(), sigma.clone()], true)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let ledger = simcensus::witness::run_induction(
        &spec.inner,
        &e,
        &sigma,
        &basis,
        LeadingFactor::Standard,
    )
    .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(ledger
        .components()
        .map(|w| (w.component().to_string(), w.corner().to_string()))
        .collect())
}

/// Run the full verification pipeline and return the JSON report as a string.
///
/// A report with `checks_passed: false` is still returned (that is a
/// verification outcome, not an exception); configuration problems raise
/// `ValueError` and internal consistency failures raise `RuntimeError`.
#[pyfunction]
#[pyo3(signature = (spec, level = "full", leading_factor = "standard", probe_max = None, threads = 1))]
fn run_census(
    spec: &PySupportSpec,
    level: &str,
    leading_factor: &str,
    probe_max: Option<usize>,
    threads: usize,
) -> PyResult<String> {
    let opts = VerifyOptions {
        level: match level {
            "fast" => VerificationLevel::Fast,
            "full" => VerificationLevel::Full,
            other => {
                return Err(PyValueError::new_err(format!(
                    "level must be \"fast\" or \"full\", got {other:?}"
                )))
            }
        },
        leading_factor: match leading_factor {
            "standard" => LeadingFactor::Standard,
            "paper" => LeadingFactor::Paper,
            other => {
                return Err(PyValueError::new_err(format!(
                    "leading_factor must be \"standard\" or \"paper\", got {other:?}"
                )))
            }
        },
        probe_max,
        threads,
    };
    let outcome = verify_spec(&spec.inner, &opts);
    match outcome.exit_code {
        0 | 1 => Ok(outcome
            .report
            .expect("verification outcomes carry a report")
            .to_json_string()),
        2 => Err(PyValueError::new_err(
            outcome.error.unwrap_or_else(|| "invalid configuration".into()),
        )),
        _ => Err(PyRuntimeError::new_err(
            outcome.error.unwrap_or_else(|| "internal consistency failure".into()),
        )),
    }
}

#[pymodule]
fn simcensus_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySupportSpec>()?;
    m.add_function(wrap_pyfunction!(closure_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(relation_support, m)?)?;
    m.add_function(wrap_pyfunction!(witness_corners, m)?)?;
    m.add_function(wrap_pyfunction!(run_census, m)?)?;
    Ok(())
}
