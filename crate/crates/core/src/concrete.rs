//! Concrete denotational semantics.
//!
//! Values live in the [`Eval`] sum; closures capture the defining identifier
//! environment but never an events environment, which is supplied at use
//! time. Every dynamic type confusion produces `(Wrong, ι)`.

use std::fmt;
use std::rc::Rc;

use serde::Serialize;

use crate::eenv::{EventEnv, Mark};
use crate::frontend::{escape_str, Constructor, Event, Expr, PrimOp, Value};

/// Concrete denotable values are integers.
pub type Dval = i64;

pub type ConcreteEventEnv = EventEnv<Dval>;

pub const DEFAULT_MAX_STEPS: u64 = 100_000;
pub const DEFAULT_MAX_DEPTH: usize = 200;

#[derive(Clone)]
pub enum Eval<'p> {
    Int(i64),
    Str(String),
    Unit,
    XmlText(String),
    XmlElem(Rc<Eval<'p>>, Rc<Eval<'p>>),
    Nil,
    Cons(Rc<Eval<'p>>, Rc<Eval<'p>>),
    Tuple(Rc<[Eval<'p>]>),
    HrefC(Rc<Suspension<'p>>),
    FormC(Rc<FormClosure<'p>>),
    FunC(Rc<FunClosure<'p>>),
    Wrong,
}

/// `λφ'. ⟦E⟧ ρ φ'`
pub struct Suspension<'p> {
    body: &'p Expr,
    env: Env<'p>,
}

/// `λφ'. λvl. ⟦E⟧ (bindList ρ ll vl) φ'`
pub struct FormClosure<'p> {
    labels: &'p [String],
    body: &'p Expr,
    env: Env<'p>,
}

/// `λφ'. λv. ⟦E⟧ ρ[x ↦ v] φ'`
pub struct FunClosure<'p> {
    param: &'p str,
    body: &'p Expr,
    env: Env<'p>,
}

impl<'p> Eval<'p> {
    pub fn is_wrong(&self) -> bool {
        matches!(self, Eval::Wrong)
    }

    fn is_xml(&self) -> bool {
        matches!(
            self,
            Eval::XmlText(_) | Eval::XmlElem(..) | Eval::HrefC(_) | Eval::FormC(_)
        )
    }
}

impl fmt::Display for Eval<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eval::Int(n) => write!(f, "{n}"),
            Eval::Str(s) => f.write_str(&escape_str(s)),
            Eval::Unit => f.write_str("Unit"),
            Eval::XmlText(s) => write!(f, "Xml(Text({}))", escape_str(s)),
            Eval::XmlElem(t, c) => write!(f, "Xml(Elem({t}, {c}))"),
            Eval::Nil => f.write_str("Nil"),
            Eval::Cons(h, t) => write!(f, "Cons({h}, {t})"),
            Eval::Tuple(vs) => {
                f.write_str("Tuple(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
            Eval::HrefC(_) => f.write_str("<link>"),
            Eval::FormC(_) => f.write_str("<form>"),
            Eval::FunC(_) => f.write_str("<fun>"),
            Eval::Wrong => f.write_str("Wrong"),
        }
    }
}

impl fmt::Debug for Eval<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Persistent identifier environment.
#[derive(Clone, Default)]
pub struct Env<'p>(Option<Rc<EnvNode<'p>>>);

struct EnvNode<'p> {
    name: &'p str,
    value: Eval<'p>,
    next: Env<'p>,
}

impl<'p> Env<'p> {
    pub fn empty() -> Self {
        Env(None)
    }

    pub fn bind(&self, name: &'p str, value: Eval<'p>) -> Self {
        Env(Some(Rc::new(EnvNode {
            name,
            value,
            next: self.clone(),
        })))
    }

    pub fn lookup(&self, name: &str) -> Option<&Eval<'p>> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if node.name == name {
                return Some(&node.value);
            }
            cur = &node.next.0;
        }
        None
    }
}

/// Raised when the evaluation budget runs out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("evaluation budget exhausted")]
pub struct Exhausted;

type Outcome<'p> = Result<(Eval<'p>, ConcreteEventEnv), Exhausted>;

fn wrong<'p>() -> Outcome<'p> {
    Ok((Eval::Wrong, EventEnv::iota()))
}

/// Evaluator with a step budget and a nesting bound. Neither is reachable
/// without self-application, the only source of non-termination.
pub struct Evaluator {
    steps: u64,
    max_steps: u64,
    depth: usize,
    max_depth: usize,
}

impl Default for Evaluator {
    fn default() -> Self {
        Evaluator::new(DEFAULT_MAX_STEPS)
    }
}

impl Evaluator {
    pub fn new(max_steps: u64) -> Self {
        Evaluator {
            steps: 0,
            max_steps,
            depth: 0,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn tick(&mut self) -> Result<(), Exhausted> {
        self.steps += 1;
        if self.steps > self.max_steps {
            Err(Exhausted)
        } else {
            Ok(())
        }
    }

    /// `⟦V⟧ ρ` for values. Construction never touches the events environment.
    pub fn eval_value<'p>(&mut self, v: &'p Value, env: &Env<'p>) -> Result<Eval<'p>, Exhausted> {
        self.tick()?;
        Ok(match v {
            Value::Var(x) => env.lookup(x).cloned().unwrap_or(Eval::Wrong),
            Value::Lambda(x, body) => Eval::FunC(Rc::new(FunClosure {
                param: x,
                body,
                env: env.clone(),
            })),
            Value::Href(body) => Eval::HrefC(Rc::new(Suspension {
                body,
                env: env.clone(),
            })),
            Value::Form(labels, body) => Eval::FormC(Rc::new(FormClosure {
                labels,
                body,
                env: env.clone(),
            })),
            Value::Con(c, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    let v = self.eval_value(a, env)?;
                    if v.is_wrong() {
                        return Ok(Eval::Wrong);
                    }
                    vals.push(v);
                }
                construct(c, vals)
            }
        })
    }

    /// `⟦E⟧ ρ φ` for expressions.
    pub fn eval_expr<'p>(
        &mut self,
        e: &'p Expr,
        env: &Env<'p>,
        phi: &ConcreteEventEnv,
    ) -> Outcome<'p> {
        self.tick()?;
        self.depth += 1;
        if self.depth > self.max_depth {
            self.depth -= 1;
            return Err(Exhausted);
        }
        let out = self.eval_expr_inner(e, env, phi);
        self.depth -= 1;
        out
    }

    fn eval_expr_inner<'p>(
        &mut self,
        e: &'p Expr,
        env: &Env<'p>,
        phi: &ConcreteEventEnv,
    ) -> Outcome<'p> {
        match e {
            Expr::Val(v) => {
                let v = self.eval_value(v, env)?;
                if v.is_wrong() {
                    return wrong();
                }
                Ok((v, phi.clone()))
            }
            Expr::Let(x, rhs, body) => {
                let (v, phi1) = self.eval_expr(rhs, env, phi)?;
                if v.is_wrong() {
                    return wrong();
                }
                self.eval_expr(body, &env.bind(x, v), &phi1)
            }
            Expr::Prim(op, a, b) => {
                let (va, phi1) = self.eval_expr(a, env, phi)?;
                if va.is_wrong() {
                    return wrong();
                }
                let (vb, phi2) = self.eval_expr(b, env, &phi1)?;
                match (va, vb) {
                    (Eval::Int(m), Eval::Int(n)) => match prim(*op, m, n) {
                        Some(r) => Ok((Eval::Int(r), phi2)),
                        None => wrong(),
                    },
                    _ => wrong(),
                }
            }
            Expr::App(u, v) => {
                let f = self.eval_value(u, env)?;
                let arg = self.eval_value(v, env)?;
                match (f, arg) {
                    (_, Eval::Wrong) => wrong(),
                    (Eval::FunC(clo), arg) => {
                        let env2 = clo.env.bind(clo.param, arg);
                        self.eval_expr(clo.body, &env2, phi)
                    }
                    _ => wrong(),
                }
            }
            Expr::Get(v) => match self.eval_value(v, env)? {
                Eval::HrefC(s) => self.eval_expr(s.body, &s.env, phi),
                _ => wrong(),
            },
            Expr::Post(fields, target) => {
                let form = self.eval_value(target, env)?;
                // checkStringList, then the form check
                let mut strings = Vec::with_capacity(fields.len());
                for (i, (label, v)) in fields.iter().enumerate() {
                    if fields[..i].iter().any(|(l, _)| l == label) {
                        return wrong();
                    }
                    match self.eval_value(v, env)? {
                        Eval::Str(s) => strings.push(s),
                        _ => return wrong(),
                    }
                }
                match form {
                    Eval::FormC(clo) => {
                        let mut env2 = clo.env.clone();
                        for (i, label) in clo.labels.iter().enumerate() {
                            let s = strings.get(i).cloned().unwrap_or_default();
                            env2 = env2.bind(label, Eval::Str(s));
                        }
                        self.eval_expr(clo.body, &env2, phi)
                    }
                    _ => wrong(),
                }
            }
            Expr::EventAnn(Event { pred, arg }) => match self.eval_value(arg, env)? {
                Eval::Int(n) => Ok((Eval::Unit, phi.bind(pred, n, Mark::E))),
                _ => wrong(),
            },
            Expr::AssertAnn(Event { pred, arg }) => match self.eval_value(arg, env)? {
                Eval::Int(n) => match phi.get(pred) {
                    Some(&(bound, _)) if bound == n => {
                        Ok((Eval::Unit, phi.bind(pred, bound, Mark::EA)))
                    }
                    _ => wrong(),
                },
                _ => wrong(),
            },
            Expr::Switch {
                scrutinee,
                pattern,
                binders,
                matched,
                otherwise,
            } => {
                let v = self.eval_value(scrutinee, env)?;
                if v.is_wrong() {
                    return wrong();
                }
                match destructure(pattern, &v) {
                    Some(parts) => {
                        let mut env2 = env.clone();
                        for (x, part) in binders.iter().zip(parts) {
                            env2 = env2.bind(x, part);
                        }
                        self.eval_expr(matched, &env2, phi)
                    }
                    None => self.eval_expr(otherwise, env, phi),
                }
            }
        }
    }
}

/// Wrapping arithmetic; only division by zero goes wrong.
fn prim(op: PrimOp, m: i64, n: i64) -> Option<i64> {
    Some(match op {
        PrimOp::Add => m.wrapping_add(n),
        PrimOp::Sub => m.wrapping_sub(n),
        PrimOp::Mul => m.wrapping_mul(n),
        PrimOp::Div => {
            if n == 0 {
                return None;
            }
            m.wrapping_div(n)
        }
    })
}

fn construct<'p>(c: &Constructor, mut args: Vec<Eval<'p>>) -> Eval<'p> {
    if args.len() != c.arity() {
        return Eval::Wrong;
    }
    match c {
        Constructor::Unit => Eval::Unit,
        Constructor::Zero => Eval::Int(0),
        Constructor::Num(n) => Eval::Int(*n),
        Constructor::Str(s) => Eval::Str(s.clone()),
        Constructor::Nil => Eval::Nil,
        Constructor::Succ => match args.pop() {
            Some(Eval::Int(n)) => Eval::Int(n.wrapping_add(1)),
            _ => Eval::Wrong,
        },
        Constructor::Text => match args.pop() {
            Some(Eval::Str(s)) => Eval::XmlText(s),
            _ => Eval::Wrong,
        },
        Constructor::Elem => {
            let child = args.pop().expect("arity");
            let tag = args.pop().expect("arity");
            if matches!(tag, Eval::Str(_)) && child.is_xml() {
                Eval::XmlElem(Rc::new(tag), Rc::new(child))
            } else {
                Eval::Wrong
            }
        }
        Constructor::Cons => {
            let tail = args.pop().expect("arity");
            let head = args.pop().expect("arity");
            Eval::Cons(Rc::new(head), Rc::new(tail))
        }
        Constructor::Tuple(_) => Eval::Tuple(args.into()),
    }
}

/// Components bound by a matching `case`, or `None` when the pattern fails.
fn destructure<'p>(pattern: &Constructor, v: &Eval<'p>) -> Option<Vec<Eval<'p>>> {
    match (pattern, v) {
        (Constructor::Unit, Eval::Unit) | (Constructor::Nil, Eval::Nil) => Some(vec![]),
        (Constructor::Zero, Eval::Int(0)) => Some(vec![]),
        (Constructor::Num(k), Eval::Int(n)) if k == n => Some(vec![]),
        (Constructor::Succ, Eval::Int(n)) if *n > 0 => Some(vec![Eval::Int(n - 1)]),
        (Constructor::Str(s), Eval::Str(t)) if s == t => Some(vec![]),
        (Constructor::Cons, Eval::Cons(h, t)) => Some(vec![(**h).clone(), (**t).clone()]),
        (Constructor::Tuple(k), Eval::Tuple(vs)) if *k == vs.len() => Some(vs.to_vec()),
        (Constructor::Elem, Eval::XmlElem(t, c)) => Some(vec![(**t).clone(), (**c).clone()]),
        (Constructor::Text, Eval::XmlText(s)) => Some(vec![Eval::Str(s.clone())]),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunVerdict {
    /// The run finished without producing `Wrong`.
    WrongFree,
    /// The run produced `Wrong`.
    Wrong,
    /// The evaluation budget ran out before a result.
    Skipped,
}

/// Outcome of running a closed program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub verdict: RunVerdict,
    /// Final value in its stable text form.
    pub value: String,
    pub events: ConcreteEventEnv,
    pub steps: u64,
}

impl RunReport {
    pub fn is_wrong(&self) -> bool {
        self.verdict == RunVerdict::Wrong
    }

    pub fn is_safe(&self) -> bool {
        self.verdict == RunVerdict::WrongFree
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.verdict {
            RunVerdict::Skipped => write!(
                f,
                "skipped: evaluation budget exhausted after {} steps",
                self.steps
            ),
            _ => write!(f, "{}, {}", self.value, self.events),
        }
    }
}

pub fn run(program: &Expr) -> RunReport {
    run_with_budget(program, DEFAULT_MAX_STEPS)
}

pub fn run_with_budget(program: &Expr, max_steps: u64) -> RunReport {
    let mut ev = Evaluator::new(max_steps);
    match ev.eval_expr(program, &Env::empty(), &EventEnv::empty()) {
        Ok((v, phi)) => RunReport {
            verdict: if v.is_wrong() {
                RunVerdict::Wrong
            } else {
                RunVerdict::WrongFree
            },
            value: v.to_string(),
            events: phi,
            steps: ev.steps(),
        },
        Err(Exhausted) => RunReport {
            verdict: RunVerdict::Skipped,
            value: String::new(),
            events: EventEnv::iota(),
            steps: ev.steps(),
        },
    }
}
