use num_rational::Ratio;
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tlae::formula::{expand_all, neg_closure, parse, parse_action};
use tlae::instrumentality::{analyze as analyze_report, AnalysisOptions};
use tlae::model::{export_dot, validate as validate_model, ModelDoc};
use tlae::sat::{is_theorem, satisfiable, SatConfig, SatResult, TheoremResult};
use tlae::{EvalContext, Signature, TreeModel};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Formula", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFormula {
    inner: tlae::Formula,
}

#[pymethods]
impl PyFormula {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyFormula { inner: parse(text).map_err(err)? })
    }

    /// The formula with every macro replaced by its definition.
    #[pyo3(signature = (agents = None))]
    fn expand(&self, agents: Option<usize>) -> PyResult<Self> {
        let agents = agents.unwrap_or_else(|| self.inner.required_counts().0.max(1));
        Ok(PyFormula { inner: expand_all(&self.inner, agents).map_err(err)? })
    }

    fn is_macro_free(&self) -> bool {
        self.inner.is_macro_free()
    }

    fn modal_depth(&self) -> usize {
        self.inner.modal_depth()
    }

    /// Indexed members of the negation closure, starting at 1.
    #[pyo3(signature = (agents = None, actions = None))]
    fn closure(&self, agents: Option<usize>, actions: Option<usize>) -> PyResult<Vec<(usize, String)>> {
        let (a, d) = self.inner.required_counts();
        let sig = Signature::with_counts(agents.unwrap_or(1).max(a), actions.unwrap_or(1).max(d));
        let f = expand_all(&self.inner, sig.agent_count()).map_err(err)?;
        Ok(neg_closure(&[f], &sig).iter().enumerate().map(|(i, g)| (i + 1, g.to_string())).collect())
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", self.inner.to_string())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

fn formula_arg(f: &Bound<'_, PyAny>) -> PyResult<tlae::Formula> {
    if let Ok(p) = f.cast::<PyFormula>() {
        return Ok(p.get().inner.clone());
    }
    parse(&f.extract::<String>()?).map_err(err)
}

#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: TreeModel,
}

impl PyModel {
    fn moment(&self, id: &str) -> PyResult<usize> {
        self.inner.index_of(id).ok_or_else(|| PyKeyError::new_err(id.to_string()))
    }
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyModel { inner: TreeModel::from_json(text).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(err)?;
        Self::from_json(&text)
    }

    fn to_json(&self) -> String {
        self.inner.to_doc().to_json()
    }

    fn moments(&self) -> Vec<String> {
        self.inner.moments().iter().map(|m| m.id.clone()).collect()
    }

    fn children(&self, moment: &str) -> PyResult<Vec<String>> {
        let w = self.moment(moment)?;
        Ok(self.inner.children(w).iter().map(|&c| self.inner.id(c).to_string()).collect())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Frame property report as a dict.
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let report = validate_model(&self.inner);
        let d = PyDict::new(py);
        d.set_item("ok", report.ok())?;
        let props = PyDict::new(py);
        for p in &report.properties {
            props.set_item(&p.property, p.offending.clone())?;
        }
        d.set_item("offending", props)?;
        Ok(d)
    }

    fn check(&self, moment: &str, formula: &Bound<'_, PyAny>) -> PyResult<bool> {
        let w = self.moment(moment)?;
        EvalContext::new(&self.inner).eval_extended(w, &formula_arg(formula)?).map_err(err)
    }

    /// Moments where the formula holds.
    fn satisfying(&self, formula: &Bound<'_, PyAny>) -> PyResult<Vec<String>> {
        let f = formula_arg(formula)?;
        let mut ctx = EvalContext::new(&self.inner);
        let mut out = Vec::new();
        for w in 0..self.inner.len() {
            if ctx.eval_extended(w, &f).map_err(err)? {
                out.push(self.inner.id(w).to_string());
            }
        }
        Ok(out)
    }

    fn to_dot(&self) -> String {
        export_dot(&self.inner)
    }

    #[pyo3(signature = (moment, goal, agent = "a1", ratio_min = None, witness_min = None, interval = None, candidates = None))]
    #[allow(clippy::too_many_arguments)]
    fn analyze<'py>(
        &self,
        py: Python<'py>,
        moment: &str,
        goal: &Bound<'_, PyAny>,
        agent: &str,
        ratio_min: Option<&str>,
        witness_min: Option<usize>,
        interval: Option<u32>,
        candidates: Option<Vec<String>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let w = self.moment(moment)?;
        let a = self.inner.signature().agent_index(agent).ok_or_else(|| PyKeyError::new_err(agent.to_string()))?;
        let ratio_min = ratio_min.map(|r| r.trim().parse::<Ratio<u64>>().map_err(err)).transpose()?;
        let candidates = candidates.map(|c| c.iter().map(|s| parse_action(s).map_err(err)).collect::<PyResult<Vec<_>>>()).transpose()?;
        let opts = AnalysisOptions { interval, witness_min, ratio_min, candidates };
        let report = analyze_report(&self.inner, w, a, &formula_arg(goal)?, &opts).map_err(err)?;
        json_to_py(py, &report.to_json())
    }
}

fn config(agents: Option<usize>, actions: Option<usize>, bound_depth: Option<usize>) -> SatConfig {
    let mut cfg = SatConfig::default();
    if agents.is_some() || actions.is_some() {
        cfg.signature = Some(Signature::with_counts(agents.unwrap_or(1), actions.unwrap_or(1)));
    }
    if let Some(d) = bound_depth {
        cfg.bound_depth = d;
    }
    cfg
}

/// Returns `("sat", model, moment)`, `("unsat", trace, None)` or
/// `("unknown", reason, None)`.
#[pyfunction]
#[pyo3(signature = (formula, agents = None, actions = None, bound_depth = None))]
fn sat<'py>(
    py: Python<'py>,
    formula: &Bound<'_, PyAny>,
    agents: Option<usize>,
    actions: Option<usize>,
    bound_depth: Option<usize>,
) -> PyResult<(String, Py<PyAny>, Option<String>)> {
    let f = formula_arg(formula)?;
    Ok(match satisfiable(&f, &config(agents, actions, bound_depth)).map_err(err)? {
        SatResult::Sat { model, moment } => {
            let id = model.id(moment).to_string();
            ("sat".into(), Py::new(py, PyModel { inner: model })?.into_any(), Some(id))
        }
        SatResult::Unsat { trace } => ("unsat".into(), trace.into_pyobject(py)?.into_any().unbind(), None),
        SatResult::Unknown { reason } => ("unknown".into(), reason.into_pyobject(py)?.into_any().unbind(), None),
    })
}

/// `"valid"`, `"countermodel"` or `"unknown"`.
#[pyfunction]
#[pyo3(signature = (formula, agents = None, actions = None))]
fn theorem(formula: &Bound<'_, PyAny>, agents: Option<usize>, actions: Option<usize>) -> PyResult<&'static str> {
    let f = formula_arg(formula)?;
    Ok(match is_theorem(&f, &config(agents, actions, None)).map_err(err)? {
        TheoremResult::Valid { .. } => "valid",
        TheoremResult::Countermodel { .. } => "countermodel",
        TheoremResult::Unknown { .. } => "unknown",
    })
}

#[pyfunction]
fn fixture(name: &str) -> PyResult<PyModel> {
    Ok(PyModel { inner: tlae::fixtures::load(name).ok_or_else(|| PyKeyError::new_err(name.to_string()))? })
}

#[pyfunction]
fn validate_json<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    let doc = ModelDoc::from_json(text).map_err(err)?;
    let report = tlae::model::validate_doc(&doc);
    let out = report.properties.iter().map(|p| (p.property.clone(), p.ok)).collect::<Vec<_>>();
    Ok(out.into_pyobject(py)?.into_any())
}

#[pymodule]
#[pyo3(name = "tlae")]
fn tlae_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFormula>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(sat, m)?)?;
    m.add_function(wrap_pyfunction!(theorem, m)?)?;
    m.add_function(wrap_pyfunction!(fixture, m)?)?;
    m.add_function(wrap_pyfunction!(validate_json, m)?)?;
    Ok(())
}
