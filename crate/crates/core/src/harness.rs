//! Small-program enumeration and the differential soundness oracle.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{AnalysisReport, Analyzer, Verdict};
use crate::concrete::{run_with_budget, RunVerdict, DEFAULT_MAX_STEPS};
use crate::frontend::{pretty, Constructor, Event, Expr, Ident, PrimOp, Value};
use crate::legacy;

pub const HELLO: &str = "Hello!";

const OPS: [PrimOp; 4] = [PrimOp::Add, PrimOp::Sub, PrimOp::Mul, PrimOp::Div];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenConfig {
    pub max_depth: usize,
    pub preds: Vec<String>,
    pub ints: Vec<i64>,
    pub seed: u64,
    pub max_steps: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            max_depth: 3,
            preds: vec!["p".into(), "q".into()],
            ints: vec![0, 1],
            seed: 0,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl GenConfig {
    pub fn with_depth(max_depth: usize) -> Self {
        Self {
            max_depth: max_depth.max(1),
            ..Self::default()
        }
    }
}

fn binder(depth: usize) -> Ident {
    format!("x{depth}")
}

fn label(depth: usize) -> Ident {
    format!("l{depth}")
}

/// Exhaustive enumerator. Binders introduced at depth `d` are named `x{d}`
/// (labels `l{d}`), so names never clash within one program.
struct Enumerator<'c> {
    cfg: &'c GenConfig,
}

impl Enumerator<'_> {
    fn atoms(&self, scope: &[Ident]) -> Vec<Value> {
        let mut out: Vec<Value> = self.cfg.ints.iter().map(|&n| Value::num(n)).collect();
        out.push(Value::str(HELLO));
        out.extend(scope.iter().map(|x| Value::var(x.clone())));
        out
    }

    fn values(&self, d: usize, scope: &[Ident]) -> Vec<Value> {
        let mut out = self.atoms(scope);
        if d < 2 {
            return out;
        }
        let smaller = self.values(d - 1, scope);
        out.extend(smaller.iter().map(|v| Value::text(v.clone())));
        out.extend(
            smaller
                .iter()
                .map(|v| Value::elem(Value::str(HELLO), v.clone())),
        );
        out.extend(self.exprs(d - 1, scope).into_iter().map(Value::href));
        let mut inner = scope.to_vec();
        inner.push(label(d));
        out.extend(
            self.exprs(d - 1, &inner)
                .into_iter()
                .map(|e| Value::form(vec![label(d)], e)),
        );
        let mut inner = scope.to_vec();
        inner.push(binder(d));
        out.extend(
            self.exprs(d - 1, &inner)
                .into_iter()
                .map(|e| Value::lambda(binder(d), e)),
        );
        out
    }

    fn exprs(&self, d: usize, scope: &[Ident]) -> Vec<Expr> {
        let mut out: Vec<Expr> = self.values(d, scope).into_iter().map(Expr::val).collect();
        if d < 2 {
            return out;
        }
        let vs = self.values(d - 1, scope);
        let es = self.exprs(d - 1, scope);
        out.extend(vs.iter().map(|v| Expr::get(v.clone())));
        for u in &vs {
            out.push(Expr::Post(vec![], u.clone()));
            for v in &vs {
                out.push(Expr::Post(vec![(label(d), v.clone())], u.clone()));
            }
        }
        for q in &self.cfg.preds {
            out.extend(vs.iter().map(|v| Expr::event(q.as_str(), v.clone())));
        }
        for q in &self.cfg.preds {
            out.extend(vs.iter().map(|v| Expr::assert(q.as_str(), v.clone())));
        }
        let mut inner = scope.to_vec();
        inner.push(binder(d));
        let bodies = self.exprs(d - 1, &inner);
        for e1 in &es {
            for e2 in &bodies {
                out.push(Expr::let_(binder(d), e1.clone(), e2.clone()));
            }
        }
        for op in OPS {
            for a in &es {
                for b in &es {
                    out.push(Expr::prim(op, a.clone(), b.clone()));
                }
            }
        }
        for u in vs.iter().filter(|u| callable(u)) {
            for v in vs.iter().filter(|v| *v != u) {
                out.push(Expr::App(u.clone(), v.clone()));
            }
        }
        out
    }
}

/// Callees are restricted to identifiers and abstractions.
fn callable(v: &Value) -> bool {
    matches!(v, Value::Var(_) | Value::Lambda(..))
}

/// Every closed program up to `cfg.max_depth`, in a fixed order.
pub fn gen_programs(cfg: &GenConfig) -> Vec<Expr> {
    Enumerator { cfg }.exprs(cfg.max_depth.max(1), &[])
}

/// Seeded random programs of nesting depth up to `depth`.
pub struct RandomGen {
    cfg: GenConfig,
    rng: ChaCha8Rng,
    next_binder: usize,
}

impl RandomGen {
    pub fn new(cfg: &GenConfig) -> Self {
        Self {
            cfg: cfg.clone(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            next_binder: 0,
        }
    }

    fn fresh(&mut self, prefix: &str) -> Ident {
        self.next_binder += 1;
        format!("{prefix}{}", self.next_binder)
    }

    fn pred(&mut self) -> String {
        self.cfg
            .preds
            .choose(&mut self.rng)
            .cloned()
            .unwrap_or_else(|| "p".into())
    }

    fn atom(&mut self, scope: &[Ident]) -> Value {
        let k = self.rng.gen_range(0..self.cfg.ints.len() + 1 + scope.len());
        if k < self.cfg.ints.len() {
            Value::num(self.cfg.ints[k])
        } else if k == self.cfg.ints.len() {
            Value::str(HELLO)
        } else {
            Value::var(scope[k - self.cfg.ints.len() - 1].clone())
        }
    }

    pub fn value(&mut self, d: usize, scope: &[Ident]) -> Value {
        if d < 2 || self.rng.gen_bool(0.3) {
            return self.atom(scope);
        }
        match self.rng.gen_range(0..5) {
            0 => Value::text(self.value(d - 1, scope)),
            1 => {
                let tag = if self.rng.gen_bool(0.8) {
                    Value::str(HELLO)
                } else {
                    self.atom(scope)
                };
                Value::elem(tag, self.value(d - 1, scope))
            }
            2 => Value::href(self.expr(d - 1, scope)),
            3 => {
                let l = self.fresh("l");
                let mut inner = scope.to_vec();
                inner.push(l.clone());
                Value::form(vec![l], self.expr(d - 1, &inner))
            }
            _ => {
                let x = self.fresh("x");
                let mut inner = scope.to_vec();
                inner.push(x.clone());
                Value::lambda(x, self.expr(d - 1, &inner))
            }
        }
    }

    pub fn expr(&mut self, d: usize, scope: &[Ident]) -> Expr {
        if d < 2 {
            return Expr::val(self.atom(scope));
        }
        match self.rng.gen_range(0..10) {
            0 => Expr::val(self.value(d, scope)),
            1 => Expr::get(self.value(d - 1, scope)),
            2 => {
                let fields = if self.rng.gen_bool(0.7) {
                    vec![(self.fresh("l"), self.value(d - 1, scope))]
                } else {
                    vec![]
                };
                Expr::Post(fields, self.value(d - 1, scope))
            }
            3 => {
                let q = self.pred();
                Expr::event(q, self.value(d - 1, scope))
            }
            4 => {
                let q = self.pred();
                Expr::assert(q, self.value(d - 1, scope))
            }
            5 | 6 => {
                let x = self.fresh("x");
                let e1 = self.expr(d - 1, scope);
                let mut inner = scope.to_vec();
                inner.push(x.clone());
                Expr::let_(x, e1, self.expr(d - 1, &inner))
            }
            7 => {
                let op = *OPS.choose(&mut self.rng).unwrap();
                Expr::prim(op, self.expr(d - 1, scope), self.expr(d - 1, scope))
            }
            8 => self.switch(d, scope),
            _ => {
                let u = if !scope.is_empty() && self.rng.gen_bool(0.5) {
                    Value::var(scope.choose(&mut self.rng).unwrap().clone())
                } else {
                    let x = self.fresh("x");
                    let mut inner = scope.to_vec();
                    inner.push(x.clone());
                    Value::lambda(x, self.expr(d - 1, &inner))
                };
                let mut v = self.value(d - 1, scope);
                if v == u {
                    v = Value::num(0);
                }
                Expr::App(u, v)
            }
        }
    }

    fn switch(&mut self, d: usize, scope: &[Ident]) -> Expr {
        let scrutinee = self.value(d - 1, scope);
        let pattern = match self.rng.gen_range(0..4) {
            0 => Constructor::Num(*self.cfg.ints.choose(&mut self.rng).unwrap_or(&0)),
            1 => Constructor::Succ,
            2 => Constructor::Text,
            _ => Constructor::Str(HELLO.into()),
        };
        let binders: Vec<Ident> = (0..pattern.arity()).map(|_| self.fresh("x")).collect();
        let mut inner = scope.to_vec();
        inner.extend(binders.iter().cloned());
        Expr::Switch {
            scrutinee,
            pattern,
            binders,
            matched: Box::new(self.expr(d - 1, &inner)),
            otherwise: Box::new(self.expr(d - 1, scope)),
        }
    }

    /// A closed program of depth at most `d`.
    pub fn program(&mut self, d: usize) -> Expr {
        self.next_binder = 0;
        self.expr(d.max(1), &[])
    }
}

/// `n` random closed programs of depth at most `cfg.max_depth`.
pub fn gen_random(cfg: &GenConfig, n: usize) -> Vec<Expr> {
    let mut g = RandomGen::new(cfg);
    (0..n).map(|_| g.program(cfg.max_depth)).collect()
}

/// Value sorts steering [`TypedGen`] towards well-typed programs.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Sort {
    Int,
    Str,
    Unit,
    Xml,
    Link,
    Form,
    /// A one-argument function.
    Fun(Box<Sort>, Box<Sort>),
}

const BASE_SORTS: [Sort; 6] = [
    Sort::Int,
    Sort::Str,
    Sort::Unit,
    Sort::Xml,
    Sort::Link,
    Sort::Form,
];

/// Seeded random programs built mostly by sort, so that many of them are
/// accepted and the interesting cases (events, assertions, pages,
/// functions with pre- and post-conditions) are well represented. A small
/// fraction of choices ignore the sort to keep ill-typed programs around.
pub struct TypedGen {
    cfg: GenConfig,
    rng: ChaCha8Rng,
    next_binder: usize,
}

impl TypedGen {
    pub fn new(cfg: &GenConfig) -> Self {
        Self {
            cfg: cfg.clone(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            next_binder: 0,
        }
    }

    fn fresh(&mut self, prefix: &str) -> Ident {
        self.next_binder += 1;
        format!("{prefix}{}", self.next_binder)
    }

    fn any_sort(&mut self, depth: usize) -> Sort {
        if depth > 0 && self.rng.gen_bool(0.2) {
            let arg = self.arg_sort(depth - 1);
            Sort::Fun(Box::new(arg), Box::new(self.any_sort(depth - 1)))
        } else {
            BASE_SORTS.choose(&mut self.rng).unwrap().clone()
        }
    }

    fn arg_sort(&mut self, depth: usize) -> Sort {
        match self.rng.gen_range(0..6) {
            0 => Sort::Link,
            1 => Sort::Form,
            2 if depth > 0 => Sort::Fun(Box::new(Sort::Int), Box::new(self.any_sort(depth - 1))),
            _ => Sort::Int,
        }
    }

    fn int(&mut self) -> Value {
        Value::num(*self.cfg.ints.choose(&mut self.rng).unwrap_or(&0))
    }

    fn pred(&mut self) -> String {
        self.cfg
            .preds
            .choose(&mut self.rng)
            .cloned()
            .unwrap_or_else(|| "p".into())
    }

    fn value(&mut self, sort: &Sort, d: usize, scope: &[(Ident, Sort)]) -> Value {
        if self.rng.gen_bool(0.03) {
            let s = self.any_sort(1);
            return self.value_of(&s, d, scope);
        }
        self.value_of(sort, d, scope)
    }

    fn value_of(&mut self, sort: &Sort, d: usize, scope: &[(Ident, Sort)]) -> Value {
        let vars: Vec<&Ident> = scope
            .iter()
            .filter(|(_, s)| s == sort)
            .map(|(x, _)| x)
            .collect();
        if !vars.is_empty() && self.rng.gen_bool(0.4) {
            return Value::var((*vars.choose(&mut self.rng).unwrap()).clone());
        }
        let d1 = d.saturating_sub(1);
        let leaf = d <= 1;
        match sort {
            Sort::Int if leaf || self.rng.gen_bool(0.8) => self.int(),
            Sort::Int => Value::Con(Constructor::Succ, vec![self.value(&Sort::Int, d1, scope)]),
            Sort::Str => Value::str(HELLO),
            Sort::Unit => Value::unit(),
            Sort::Xml if leaf || self.rng.gen_bool(0.6) => Value::text(Value::str(HELLO)),
            Sort::Xml => Value::elem(Value::str(HELLO), self.value(&Sort::Xml, d1, scope)),
            Sort::Link => Value::href(self.expr(&Sort::Xml, d1, scope)),
            Sort::Form => {
                let l = self.fresh("l");
                let mut inner = scope.to_vec();
                inner.push((l.clone(), Sort::Str));
                Value::form(vec![l], self.expr(&Sort::Xml, d1, &inner))
            }
            Sort::Fun(arg, result) => {
                let x = self.fresh("x");
                let mut inner = scope.to_vec();
                inner.push((x.clone(), (**arg).clone()));
                Value::lambda(x, self.expr(result, d1, &inner))
            }
        }
    }

    fn expr(&mut self, sort: &Sort, d: usize, scope: &[(Ident, Sort)]) -> Expr {
        if d <= 1 {
            return Expr::val(self.value(sort, 1, scope));
        }
        let d1 = d - 1;
        match self.rng.gen_range(0..10) {
            0 | 1 => {
                let x = self.fresh("x");
                let s = self.any_sort(1);
                let rhs = if self.rng.gen_bool(0.5) {
                    self.effect(d1, scope)
                } else {
                    self.expr(&s, d1, scope)
                };
                let mut inner = scope.to_vec();
                inner.push((x.clone(), s));
                Expr::let_(x, rhs, self.expr(sort, d1, &inner))
            }
            2 | 3 => {
                let arg = self.arg_sort(1);
                let callee = Sort::Fun(Box::new(arg.clone()), Box::new(sort.clone()));
                let u = self.value(&callee, d1, scope);
                let u = if matches!(u, Value::Var(_) | Value::Lambda(..)) {
                    u
                } else {
                    Value::lambda("z", Expr::val(u))
                };
                let v = self.value(&arg, d1, scope);
                Expr::App(u, v)
            }
            4 => Expr::Switch {
                scrutinee: self.value(&Sort::Int, d1, scope),
                pattern: Constructor::Succ,
                binders: vec!["n".into()],
                matched: Box::new(self.expr(
                    sort,
                    d1,
                    &[scope, &[("n".into(), Sort::Int)]].concat(),
                )),
                otherwise: Box::new(self.expr(sort, d1, scope)),
            },
            5 => {
                let k = self.int();
                let Value::Con(c, _) = k else { unreachable!() };
                Expr::Switch {
                    scrutinee: self.value(&Sort::Int, d1, scope),
                    pattern: c,
                    binders: vec![],
                    matched: Box::new(self.expr(sort, d1, scope)),
                    otherwise: Box::new(self.expr(sort, d1, scope)),
                }
            }
            _ => match sort {
                Sort::Xml if self.rng.gen_bool(0.5) => {
                    Expr::get(self.value(&Sort::Link, d1, scope))
                }
                Sort::Xml => {
                    let l = self.fresh("l");
                    Expr::Post(
                        vec![(l, self.value(&Sort::Str, d1, scope))],
                        self.value(&Sort::Form, d1, scope),
                    )
                }
                Sort::Unit => self.effect(d, scope),
                Sort::Int => {
                    let op = *OPS.choose(&mut self.rng).unwrap();
                    Expr::prim(
                        op,
                        self.expr(&Sort::Int, d1, scope),
                        self.expr(&Sort::Int, d1, scope),
                    )
                }
                _ => Expr::val(self.value(sort, d, scope)),
            },
        }
    }

    fn effect(&mut self, d: usize, scope: &[(Ident, Sort)]) -> Expr {
        let q = self.pred();
        let v = self.value(&Sort::Int, d.min(2), scope);
        if self.rng.gen_bool(0.5) {
            Expr::event(q, v)
        } else {
            Expr::assert(q, v)
        }
    }

    /// `get` on a link or `post` on a form, of depth at most `d`.
    pub fn page_request(&mut self, d: usize) -> Expr {
        self.next_binder = 0;
        let d = d.max(2);
        if self.rng.gen_bool(0.5) {
            Expr::get(self.value_of(&Sort::Link, d - 1, &[]))
        } else {
            let l = self.fresh("l");
            Expr::Post(
                vec![(l, Value::str(HELLO))],
                self.value_of(&Sort::Form, d - 1, &[]),
            )
        }
    }

    /// A closed program of depth at most `d` meant to produce a page.
    pub fn program(&mut self, d: usize) -> Expr {
        self.next_binder = 0;
        self.expr(&Sort::Xml, d.max(1), &[])
    }
}

/// `n` sort-directed random programs of depth at most `cfg.max_depth`.
pub fn gen_typed(cfg: &GenConfig, n: usize) -> Vec<Expr> {
    let mut g = TypedGen::new(cfg);
    (0..n).map(|_| g.program(cfg.max_depth)).collect()
}

/// Outcome of the three semantics on one program.
#[derive(Clone, Debug, Serialize)]
pub struct ProgramVerdict {
    pub index: usize,
    pub program: String,
    pub legacy_accepts: bool,
    pub analysis: Verdict,
    /// No `Error` and no pending assertion in the analyser's answer.
    pub effects_safe: bool,
    pub concrete: RunVerdict,
}

impl fmt::Display for ProgramVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "#{} legacy={} analysis={} concrete={} : {}",
            self.index,
            if self.legacy_accepts {
                "accept"
            } else {
                "reject"
            },
            match self.analysis {
                Verdict::Safe => "safe",
                Verdict::Unsafe => "unsafe",
            },
            match self.concrete {
                RunVerdict::WrongFree => "wrong-free",
                RunVerdict::Wrong => "wrong",
                RunVerdict::Skipped => "skipped",
            },
            self.program
        )
    }
}

pub fn judge(index: usize, program: &Expr, max_steps: u64) -> ProgramVerdict {
    let report: AnalysisReport = Analyzer::new().analyze(program);
    ProgramVerdict {
        index,
        program: pretty(program),
        legacy_accepts: legacy::check_program(program).accepted,
        analysis: report.verdict,
        effects_safe: report.effects_safe(),
        concrete: run_with_budget(program, max_steps).verdict,
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Counts {
    pub programs: usize,
    pub legacy_accept: usize,
    pub legacy_reject: usize,
    pub safe: usize,
    #[serde(rename = "unsafe")]
    pub unsafe_: usize,
    pub wrong_free: usize,
    pub wrong: usize,
    pub skipped: usize,
    /// Wrong-free but rejected by the analyser.
    pub incomplete: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SoundnessReport {
    pub counts: Counts,
    /// Safe but Wrong under the analyser.
    pub analyzer_violations: Vec<ProgramVerdict>,
    /// Effects-safe but Wrong, a stronger check on the analyser.
    pub effects_violations: Vec<ProgramVerdict>,
    /// Accepted by the legacy rules but Wrong.
    pub legacy_violations: Vec<ProgramVerdict>,
    pub skipped: Vec<ProgramVerdict>,
}

impl SoundnessReport {
    pub fn analyzer_sound(&self) -> bool {
        self.analyzer_violations.is_empty() && self.effects_violations.is_empty()
    }

    /// The report as text, one line per listed program.
    pub fn lines(&self) -> Vec<String> {
        let c = &self.counts;
        let mut out = vec![
            format!("programs {}", c.programs),
            format!(
                "legacy accept {} reject {}",
                c.legacy_accept, c.legacy_reject
            ),
            format!("analysis safe {} unsafe {}", c.safe, c.unsafe_),
            format!(
                "concrete wrong-free {} wrong {} skipped {}",
                c.wrong_free, c.wrong, c.skipped
            ),
            format!("incomplete {}", c.incomplete),
            format!("analyzer violations {}", self.analyzer_violations.len()),
            format!("effects violations {}", self.effects_violations.len()),
            format!("legacy violations {}", self.legacy_violations.len()),
        ];
        for (tag, list) in [
            ("analyzer-violation", &self.analyzer_violations),
            ("effects-violation", &self.effects_violations),
            ("legacy-violation", &self.legacy_violations),
            ("skipped", &self.skipped),
        ] {
            out.extend(list.iter().map(|v| format!("{tag} {v}")));
        }
        out
    }
}

impl fmt::Display for SoundnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Judges every program in parallel and merges in index order.
pub fn check_programs(programs: &[Expr], max_steps: u64) -> SoundnessReport {
    let verdicts: Vec<ProgramVerdict> = programs
        .par_iter()
        .enumerate()
        .map(|(i, p)| judge(i, p, max_steps))
        .collect();
    let mut r = SoundnessReport::default();
    for v in verdicts {
        let c = &mut r.counts;
        c.programs += 1;
        if v.legacy_accepts {
            c.legacy_accept += 1;
        } else {
            c.legacy_reject += 1;
        }
        match v.analysis {
            Verdict::Safe => c.safe += 1,
            Verdict::Unsafe => c.unsafe_ += 1,
        }
        match v.concrete {
            RunVerdict::WrongFree => {
                c.wrong_free += 1;
                if v.analysis == Verdict::Unsafe {
                    c.incomplete += 1;
                }
            }
            RunVerdict::Wrong => c.wrong += 1,
            RunVerdict::Skipped => c.skipped += 1,
        }
        if v.concrete == RunVerdict::Wrong {
            if v.analysis == Verdict::Safe {
                r.analyzer_violations.push(v.clone());
            }
            if v.effects_safe {
                r.effects_violations.push(v.clone());
            }
            if v.legacy_accepts {
                r.legacy_violations.push(v.clone());
            }
        }
        if v.concrete == RunVerdict::Skipped {
            r.skipped.push(v);
        }
    }
    r
}

/// Exhaustive differential check up to `cfg.max_depth`.
pub fn soundness_check(cfg: &GenConfig) -> SoundnessReport {
    check_programs(&gen_programs(cfg), cfg.max_steps)
}

/// Differential check on `n` seeded random programs.
pub fn random_check(cfg: &GenConfig, n: usize) -> SoundnessReport {
    check_programs(&gen_random(cfg, n), cfg.max_steps)
}

/// Differential check on `n` sort-directed random programs.
pub fn typed_check(cfg: &GenConfig, n: usize) -> SoundnessReport {
    check_programs(&gen_typed(cfg, n), cfg.max_steps)
}

/// `get` and `post` requests on every enumerated link and form value of
/// depth below `cfg.max_depth`.
pub fn page_requests(cfg: &GenConfig) -> Vec<Expr> {
    let d = cfg.max_depth.max(2);
    let pages = Enumerator { cfg }
        .values(d - 1, &[])
        .into_iter()
        .filter(|v| matches!(v, Value::Href(_) | Value::Form(..)));
    let mut out = Vec::new();
    for v in pages {
        out.push(Expr::get(v.clone()));
        out.push(Expr::Post(vec![], v.clone()));
        out.push(Expr::Post(vec![(label(d), Value::str(HELLO))], v));
    }
    out
}

/// Events that a program may raise, for building input environments.
pub fn events_of(cfg: &GenConfig) -> Vec<Event> {
    cfg.preds
        .iter()
        .flat_map(|q| {
            cfg.ints.iter().map(move |&n| Event {
                pred: q.clone(),
                arg: Value::num(n),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    #[test]
    fn depth_one_is_the_literals() {
        let ps = gen_programs(&GenConfig::with_depth(1));
        assert_eq!(ps.len(), 3);
        assert_eq!(
            ps.iter().map(pretty).collect::<Vec<_>>(),
            vec!["0", "1", "\"Hello!\""]
        );
    }

    #[test]
    fn deterministic() {
        let cfg = GenConfig::with_depth(2);
        assert_eq!(gen_programs(&cfg), gen_programs(&cfg));
        let cfg = GenConfig {
            seed: 7,
            max_depth: 5,
            ..GenConfig::default()
        };
        assert_eq!(gen_random(&cfg, 50), gen_random(&cfg, 50));
    }

    #[test]
    fn canonical_counterexample_appears_by_depth_three() {
        let target = parse(r#"get(Text("Hello!"))"#).unwrap();
        assert!(!gen_programs(&GenConfig::with_depth(2)).contains(&target));
        assert!(gen_programs(&GenConfig::with_depth(3)).contains(&target));
    }

    #[test]
    fn no_self_application() {
        for p in gen_programs(&GenConfig::with_depth(3)) {
            if let Expr::App(u, v) = &p {
                assert_ne!(u, v);
            }
        }
    }

    #[test]
    fn depth_two_is_sound() {
        let r = soundness_check(&GenConfig::with_depth(2));
        assert!(r.analyzer_sound(), "{r}");
        assert!(r.skipped.is_empty());
    }

    #[test]
    fn event_then_assert_is_safe_on_both_sides() {
        let p = parse(r#"var x = event p(1); var y = assert p(1); Text("Hello!")"#).unwrap();
        let v = judge(0, &p, DEFAULT_MAX_STEPS);
        assert!(v.legacy_accepts);
        assert_eq!(v.analysis, Verdict::Safe);
        assert_eq!(v.concrete, RunVerdict::WrongFree);
    }

    #[test]
    fn typed_programs_are_sound_and_often_safe() {
        let cfg = GenConfig {
            seed: 11,
            max_depth: 6,
            ..GenConfig::default()
        };
        let r = typed_check(&cfg, 2000);
        assert!(r.analyzer_sound(), "{r}");
        assert!(r.counts.safe > 200, "{:?}", r.counts);
    }

    #[test]
    fn random_programs_are_closed_and_reparse() {
        let cfg = GenConfig {
            seed: 3,
            max_depth: 5,
            ..GenConfig::default()
        };
        for p in gen_random(&cfg, 200)
            .into_iter()
            .chain(gen_typed(&cfg, 200))
        {
            assert_eq!(parse(&pretty(&p)).unwrap(), p);
        }
    }
}
