//! Python bindings: parse, run, analyse and legacy-check TinyLinks programs.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tinylinks_core::analysis::{self, AnalysisReport};
use tinylinks_core::concrete::{self, DEFAULT_MAX_STEPS};
use tinylinks_core::frontend::pretty_value;
use tinylinks_core::harness::{self, GenConfig, ProgramVerdict};
use tinylinks_core::legacy;
use tinylinks_core::Expr;

create_exception!(tinylinks, ParseError, PyValueError);

/// A parsed program.
#[pyclass(module = "tinylinks", frozen, from_py_object)]
#[derive(Clone)]
struct Program {
    expr: Expr,
}

#[pymethods]
impl Program {
    #[new]
    fn new(source: &str) -> PyResult<Self> {
        parse_source(source)
    }

    /// Canonical source text.
    fn pretty(&self) -> String {
        tinylinks_core::pretty(&self.expr)
    }

    /// Number of AST nodes.
    fn size(&self) -> usize {
        self.expr.size()
    }

    fn __str__(&self) -> String {
        self.pretty()
    }

    fn __repr__(&self) -> String {
        format!("Program({:?})", self.pretty())
    }

    fn __eq__(&self, other: &Program) -> bool {
        self.expr == other.expr
    }
}

fn parse_source(source: &str) -> PyResult<Program> {
    tinylinks_core::parse(source)
        .map(|expr| Program { expr })
        .map_err(|e| ParseError::new_err(e.to_string()))
}

/// Either a `Program` or source text.
#[derive(FromPyObject)]
enum Source {
    Program(Program),
    Text(String),
}

impl Source {
    fn expr(self) -> PyResult<Expr> {
        match self {
            Source::Program(p) => Ok(p.expr),
            Source::Text(s) => Ok(parse_source(&s)?.expr),
        }
    }
}

#[pyfunction]
fn parse(source: &str) -> PyResult<Program> {
    parse_source(source)
}

/// Outcome of a concrete run.
#[pyclass(module = "tinylinks", frozen, get_all)]
struct RunResult {
    /// `"wrong-free"`, `"wrong"` or `"skipped"`.
    verdict: String,
    value: String,
    /// predicate -> (value, mark)
    events: BTreeMap<String, (i64, String)>,
    steps: u64,
    text: String,
}

#[pymethods]
impl RunResult {
    #[getter]
    fn is_wrong(&self) -> bool {
        self.verdict == "wrong"
    }

    fn __str__(&self) -> String {
        self.text.clone()
    }

    fn __repr__(&self) -> String {
        format!("RunResult({:?}, {:?})", self.verdict, self.text)
    }
}

fn verdict_name(v: concrete::RunVerdict) -> String {
    match v {
        concrete::RunVerdict::WrongFree => "wrong-free",
        concrete::RunVerdict::Wrong => "wrong",
        concrete::RunVerdict::Skipped => "skipped",
    }
    .to_string()
}

#[pyfunction]
#[pyo3(signature = (program, max_steps = DEFAULT_MAX_STEPS))]
fn run(program: Source, max_steps: u64) -> PyResult<RunResult> {
    let r = concrete::run_with_budget(&program.expr()?, max_steps);
    Ok(RunResult {
        verdict: verdict_name(r.verdict),
        value: r.value.clone(),
        events: r
            .events
            .iter()
            .map(|(q, (d, m))| (q.clone(), (*d, m.to_string())))
            .collect(),
        steps: r.steps,
        text: r.to_string(),
    })
}

/// Result of the types-and-effects analysis.
#[pyclass(module = "tinylinks", frozen, get_all)]
struct Analysis {
    /// `"safe"` or `"unsafe"`.
    verdict: String,
    reason: Option<String>,
    message: Option<String>,
    #[pyo3(name = "type")]
    ty: Option<String>,
    dval: Option<String>,
    constraints: Vec<(String, String)>,
    correspondence: BTreeMap<String, String>,
    events: BTreeMap<String, (String, String)>,
    text: String,
}

#[pymethods]
impl Analysis {
    #[getter]
    fn is_safe(&self) -> bool {
        self.verdict == "safe"
    }

    fn __str__(&self) -> String {
        self.text.clone()
    }

    fn __repr__(&self) -> String {
        format!("Analysis({:?}, {:?})", self.verdict, self.text)
    }
}

impl From<&AnalysisReport> for Analysis {
    fn from(r: &AnalysisReport) -> Self {
        let v = r.view();
        Analysis {
            verdict: if r.is_safe() { "safe" } else { "unsafe" }.to_string(),
            reason: v.reason.map(|r| r.as_str().to_string()),
            message: v.message,
            ty: v.ty,
            dval: v.dval,
            constraints: v.constraints.into_iter().map(|[a, q]| (a, q)).collect(),
            correspondence: v.correspondence,
            events: v.events,
            text: r.to_string(),
        }
    }
}

/// An analysis session. Fresh variables keep counting across calls, so
/// successive results are numbered consistently.
#[pyclass(module = "tinylinks", name = "Analyzer")]
struct PyAnalyzer {
    inner: analysis::Analyzer,
}

#[pymethods]
impl PyAnalyzer {
    #[new]
    fn new() -> Self {
        PyAnalyzer {
            inner: analysis::Analyzer::new(),
        }
    }

    fn analyze(&mut self, program: Source) -> PyResult<Analysis> {
        Ok(Analysis::from(&self.inner.analyze(&program.expr()?)))
    }
}

#[pyfunction]
fn analyze(program: Source) -> PyResult<Analysis> {
    Ok(Analysis::from(&analysis::analyze(&program.expr()?)))
}

/// Result of the legacy type-and-effect rules.
#[pyclass(module = "tinylinks", frozen, get_all)]
struct LegacyResult {
    accepted: bool,
    #[pyo3(name = "type")]
    ty: Option<String>,
    effects: Vec<String>,
    /// Failing rule and premise when no derivation exists.
    rule: Option<String>,
    premise: Option<String>,
    text: String,
}

#[pymethods]
impl LegacyResult {
    fn __str__(&self) -> String {
        self.text.clone()
    }

    fn __repr__(&self) -> String {
        format!("LegacyResult({}, {:?})", self.accepted, self.text)
    }
}

#[pyfunction]
fn legacy_check(program: Source) -> PyResult<LegacyResult> {
    let r = legacy::check_program(&program.expr()?);
    let text = r.to_string();
    Ok(match r.outcome {
        Ok(j) => LegacyResult {
            accepted: r.accepted,
            ty: Some(j.ty.to_string()),
            effects: j
                .post
                .iter()
                .map(|ev| format!("{}({})", ev.pred, pretty_value(&ev.arg)))
                .collect(),
            rule: None,
            premise: None,
            text,
        },
        Err(e) => LegacyResult {
            accepted: false,
            ty: None,
            effects: vec![],
            rule: Some(e.rule.to_string()),
            premise: Some(e.premise),
            text,
        },
    })
}

/// Differential check of the three semantics.
#[pyclass(module = "tinylinks", frozen, get_all)]
struct FuzzReport {
    counts: BTreeMap<String, usize>,
    /// Programs judged safe that went wrong.
    analyzer_violations: Vec<String>,
    /// Programs accepted by the legacy rules that went wrong.
    legacy_violations: Vec<String>,
    /// Programs that went wrong although the analysis found no effect error.
    effects_violations: Vec<String>,
    lines: Vec<String>,
}

#[pymethods]
impl FuzzReport {
    #[getter]
    fn sound(&self) -> bool {
        self.analyzer_violations.is_empty() && self.effects_violations.is_empty()
    }

    fn __str__(&self) -> String {
        self.lines.join("\n")
    }
}

fn programs_of(vs: &[ProgramVerdict]) -> Vec<String> {
    vs.iter().map(|v| v.program.clone()).collect()
}

#[pyfunction]
#[pyo3(signature = (depth = 3, preds = None, ints = None, seed = 0, random = None, typed = false, max_steps = DEFAULT_MAX_STEPS))]
#[allow(clippy::too_many_arguments)]
fn fuzz(
    py: Python<'_>,
    depth: usize,
    preds: Option<Vec<String>>,
    ints: Option<Vec<i64>>,
    seed: u64,
    random: Option<usize>,
    typed: bool,
    max_steps: u64,
) -> PyResult<FuzzReport> {
    if depth == 0 {
        return Err(PyValueError::new_err("depth must be positive"));
    }
    if random.is_none() && depth > 3 {
        return Err(PyValueError::new_err(
            "exhaustive enumeration is limited to depth 3; pass random=N",
        ));
    }
    let defaults = GenConfig::default();
    let cfg = GenConfig {
        max_depth: depth,
        preds: preds.unwrap_or(defaults.preds),
        ints: ints.unwrap_or(defaults.ints),
        seed,
        max_steps,
    };
    let r = py.detach(|| {
        let programs = match (random, typed) {
            (Some(n), true) => harness::gen_typed(&cfg, n),
            (Some(n), false) => harness::gen_random(&cfg, n),
            (None, _) => harness::gen_programs(&cfg),
        };
        harness::check_programs(&programs, cfg.max_steps)
    });
    let c = &r.counts;
    let counts = [
        ("programs", c.programs),
        ("legacy_accept", c.legacy_accept),
        ("legacy_reject", c.legacy_reject),
        ("safe", c.safe),
        ("unsafe", c.unsafe_),
        ("wrong_free", c.wrong_free),
        ("wrong", c.wrong),
        ("skipped", c.skipped),
        ("incomplete", c.incomplete),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Ok(FuzzReport {
        counts,
        analyzer_violations: programs_of(&r.analyzer_violations),
        legacy_violations: programs_of(&r.legacy_violations),
        effects_violations: programs_of(&r.effects_violations),
        lines: r.lines(),
    })
}

#[pymodule]
fn tinylinks(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add_class::<Program>()?;
    m.add_class::<RunResult>()?;
    m.add_class::<Analysis>()?;
    m.add_class::<PyAnalyzer>()?;
    m.add_class::<LegacyResult>()?;
    m.add_class::<FuzzReport>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(legacy_check, m)?)?;
    m.add_function(wrap_pyfunction!(fuzz, m)?)?;
    Ok(())
}
