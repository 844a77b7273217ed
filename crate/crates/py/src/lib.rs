use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use stratdef::capacity::{self, UPoly};
use stratdef::constructions::{build_fixed_blowup, build_frac_construction, build_partition_pathology};
use stratdef::families::{parse_hypothesis, parse_neighborhood};
use stratdef::formula;
use stratdef::rational::{format_rational, parse_rational, Q};
use stratdef::solve::{self, fm_eliminate, LinearSystem};
use stratdef::transform::{complexity_report, strategic_transform};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn q(text: &str) -> PyResult<Q> {
    parse_rational(text).map_err(|e| PyValueError::new_err(format!("not a rational: {}", e.0)))
}

/// Turns a serializable value into Python objects through `json.loads`.
fn to_py<T: serde::Serialize>(py: Python<'_>, v: &T) -> PyResult<PyObject> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import_bound("json")?.call_method1("loads", (text,))?.unbind())
}

/// A parsed first-order formula.
#[pyclass(name = "Formula", module = "stratdef_py")]
#[derive(Clone)]
struct PyFormula {
    inner: formula::Formula,
}

#[pymethods]
impl PyFormula {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyFormula { inner: formula::parse(text).map_err(value_err)? })
    }

    fn fragment(&self) -> String {
        format!("{:?}", self.inner.fragment())
    }

    /// Format and degree of the graph form.
    fn complexity(&self, py: Python<'_>) -> PyResult<PyObject> {
        let g = formula::to_graph_form(&self.inner).map_err(value_err)?;
        to_py(py, &formula::complexity(&g).map_err(value_err)?)
    }

    /// Exact truth value of a quantifier-free formula. Values are rational
    /// strings such as `"1/2"`.
    #[pyo3(signature = (x=vec![], y=vec![], a=vec![], w=vec![]))]
    fn evaluate(&self, x: Vec<String>, y: Vec<String>, a: Vec<String>, w: Vec<String>) -> PyResult<bool> {
        let conv = |v: Vec<String>| v.iter().map(|s| q(s)).collect::<PyResult<Vec<_>>>();
        let sigma = solve::Assignment::new().with_x(conv(x)?).with_y(conv(y)?).with_a(conv(a)?).with_w(conv(w)?);
        solve::eval_qf(&self.inner, &sigma).map_err(value_err)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", self.inner.to_string())
    }
}

/// Strategic transform of a hypothesis and a neighborhood, each given as a
/// registry spec (`halfspace:l=2`) or a `Formula`.
#[pyfunction]
fn transform(py: Python<'_>, hypothesis: &Bound<'_, PyAny>, neighborhood: &Bound<'_, PyAny>) -> PyResult<PyObject> {
    let h = match hypothesis.extract::<PyFormula>() {
        Ok(f) => f.inner,
        Err(_) => parse_hypothesis(&hypothesis.extract::<String>()?).map_err(value_err)?.emit_formula(),
    };
    let n = match neighborhood.extract::<PyFormula>() {
        Ok(f) => f.inner,
        Err(_) => parse_neighborhood(&neighborhood.extract::<String>()?)
            .map_err(value_err)?
            .emit_formula()
            .ok_or_else(|| PyValueError::new_err("neighborhood has no definable formula"))?,
    };
    let spec = strategic_transform(&h, &n).map_err(value_err)?;
    let report = complexity_report(&spec);
    let out = serde_json::json!({
        "formula": spec.result.to_string(),
        "F_out": report.format_out,
        "D_out": report.degree_out,
        "report": report,
    });
    to_py(py, &out)
}

/// Eliminates the named variables from a conjunction of linear atoms.
#[pyfunction]
fn fm_elim(text: &str, eliminate: Vec<String>) -> PyResult<String> {
    let f = formula::parse(text).map_err(value_err)?;
    let sys = LinearSystem::from_formula(&f).map_err(value_err)?;
    let out = fm_eliminate(&sys, &eliminate).map_err(value_err)?;
    Ok(out.to_formula().map_err(value_err)?.to_string())
}

/// Builds a shattering construction and returns its certificate.
#[pyfunction]
#[pyo3(signature = (construction, n, r="1", rp="1/2", scan_cap=1_000_000))]
fn verify_blowup(py: Python<'_>, construction: &str, n: usize, r: &str, rp: &str, scan_cap: u64) -> PyResult<PyObject> {
    let inst = match construction {
        "fixed" => build_fixed_blowup(n, &q(r)?, &q(rp)?),
        "partition" => build_partition_pathology(n),
        "frac" => build_frac_construction(n, &q(r)?, scan_cap),
        other => return Err(PyValueError::new_err(format!("unknown construction `{other}`"))),
    }
    .map_err(value_err)?;
    to_py(py, &inst)
}

/// Exact strategic label of a family/neighborhood pair (or `None` when the
/// oracles cannot decide it).
#[pyfunction]
#[pyo3(signature = (family, params, x, neighborhood=None))]
fn label(family: &str, params: Vec<String>, x: Vec<String>, neighborhood: Option<&str>) -> PyResult<Option<bool>> {
    let h = parse_hypothesis(family).map_err(value_err)?;
    let n = neighborhood.map(parse_neighborhood).transpose().map_err(value_err)?;
    let labeler = capacity::ExactLabeler::new(h.as_ref(), n.as_deref()).map_err(value_err)?;
    let a = params.iter().map(|s| q(s)).collect::<PyResult<Vec<_>>>()?;
    let x = x.iter().map(|s| q(s)).collect::<PyResult<Vec<_>>>()?;
    match labeler.label(&a, &x) {
        Ok(b) => Ok(Some(b)),
        Err(capacity::CapacityError::Family(stratdef::families::FamilyError::Undecided(_))) => Ok(None),
        Err(e) => Err(value_err(e)),
    }
}

/// `(sum_{i<=d} C(m, i), (em/d)^d)`; the exact part as a Python int.
#[pyfunction]
fn sauer_bound(py: Python<'_>, m: u64, d: u64) -> PyResult<(PyObject, f64)> {
    let b = capacity::sauer_bound(m, d).map_err(value_err)?;
    let exact = py.import_bound("builtins")?.getattr("int")?.call1((b.exact.to_string(),))?.unbind();
    Ok((exact, b.upper))
}

/// Smallest m with `C (2m)^k exp(-eps m / 2) <= delta`.
#[pyfunction]
fn erm_threshold(c: &str, k: u32, eps: &str, delta: &str) -> PyResult<u64> {
    capacity::erm_threshold(&q(c)?, k, &q(eps)?, &q(delta)?).map_err(value_err)
}

/// Distinct sign vectors of univariate polynomials given as ascending
/// coefficient lists of rational strings.
#[pyfunction]
fn sign_patterns(polys: Vec<Vec<String>>) -> PyResult<Vec<Vec<i8>>> {
    let ps = polys
        .iter()
        .map(|c| Ok(UPoly::new(c.iter().map(|s| q(s)).collect::<PyResult<Vec<_>>>()?)))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(capacity::sign_patterns_univariate(&ps).into_iter().collect())
}

/// Exact earth mover's distance under the line metric `|i - j|`.
#[pyfunction]
fn emd(x: Vec<String>, y: Vec<String>) -> PyResult<String> {
    let l = x.len();
    let ball = stratdef::families::EmdBall::new(stratdef::families::EmdBall::line_metric(l), Q::from_integer(1.into()))
        .map_err(value_err)?;
    let xs = x.iter().map(|s| q(s)).collect::<PyResult<Vec<_>>>()?;
    let ys = y.iter().map(|s| q(s)).collect::<PyResult<Vec<_>>>()?;
    Ok(format_rational(&ball.emd(&xs, &ys).map_err(value_err)?))
}

#[pymodule]
fn stratdef_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyFormula>()?;
    m.add_function(wrap_pyfunction!(transform, m)?)?;
    m.add_function(wrap_pyfunction!(fm_elim, m)?)?;
    m.add_function(wrap_pyfunction!(verify_blowup, m)?)?;
    m.add_function(wrap_pyfunction!(label, m)?)?;
    m.add_function(wrap_pyfunction!(sauer_bound, m)?)?;
    m.add_function(wrap_pyfunction!(erm_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(sign_patterns, m)?)?;
    m.add_function(wrap_pyfunction!(emd, m)?)?;
    Ok(())
}
