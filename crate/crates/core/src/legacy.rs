//! The original dependent type-and-effect rules.
//!
//! `get`, `post`, `event`, `assert` and application follow the published
//! rules (T-Get, T-Post, T-Event, T-Assert, T-App). Everything else uses a
//! minimal standard completion, marked "completion" below. Text, Elem, href
//! and form values all receive the single type `xml`, which is why a program
//! such as `get(Text("Hello!"))` is accepted and then goes wrong.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::frontend::{pretty_value, Constructor, Event, Expr, Ident, Value};

pub type EffectSet = BTreeSet<Event>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LType {
    Unit,
    Int,
    String,
    Xml,
    List(Box<LType>),
    Tuple(Vec<LType>),
    /// `⟨x:T₁⟩{F₁} → T₂{F₂}`
    Fun(Box<DepFun>),
    /// Inference variable of the completion rules.
    Var(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepFun {
    pub param: Ident,
    pub arg: LType,
    pub pre: EffectSet,
    pub result: LType,
    pub post: EffectSet,
}

pub fn render_effects(f: &EffectSet) -> String {
    let items: Vec<String> = f
        .iter()
        .map(|ev| format!("{}({})", ev.pred, pretty_value(&ev.arg)))
        .collect();
    if items.is_empty() {
        "{ }".to_string()
    } else {
        format!("{{ {} }}", items.join(", "))
    }
}

impl fmt::Display for LType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LType::Unit => f.write_str("unit"),
            LType::Int => f.write_str("int"),
            LType::String => f.write_str("string"),
            LType::Xml => f.write_str("xml"),
            LType::List(t) => write!(f, "list({t})"),
            LType::Tuple(ts) => {
                f.write_str("(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" * ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
            LType::Fun(d) => write!(
                f,
                "<{}:{}>{} -> {} {}",
                d.param,
                d.arg,
                render_effects(&d.pre),
                d.result,
                render_effects(&d.post)
            ),
            LType::Var(i) => write!(f, "'t{i}"),
        }
    }
}

/// A rule whose premise does not hold.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("FAIL({rule}, {premise})")]
pub struct LegacyFail {
    pub rule: &'static str,
    pub premise: String,
}

fn fail<T>(rule: &'static str, premise: impl Into<String>) -> Result<T, LegacyFail> {
    Err(LegacyFail {
        rule,
        premise: premise.into(),
    })
}

/// `⟨_:T⟩{F'}`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Judgment {
    pub ty: LType,
    pub post: EffectSet,
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.ty, render_effects(&self.post))
    }
}

type Gamma = BTreeMap<Ident, LType>;

/// Replaces the identifier `x` by `by` in an event value. Binders are not
/// entered; event arguments are first-order in practice.
fn subst_value(v: &Value, x: &str, by: &Value) -> Value {
    match v {
        Value::Var(y) if y == x => by.clone(),
        Value::Con(c, args) => Value::Con(
            c.clone(),
            args.iter().map(|a| subst_value(a, x, by)).collect(),
        ),
        v => v.clone(),
    }
}

fn subst_effects(f: &EffectSet, x: &str, by: &Value) -> EffectSet {
    f.iter()
        .map(|ev| Event {
            pred: ev.pred.clone(),
            arg: subst_value(&ev.arg, x, by),
        })
        .collect()
}

fn subst_type(t: &LType, x: &str, by: &Value) -> LType {
    match t {
        LType::List(t) => LType::List(Box::new(subst_type(t, x, by))),
        LType::Tuple(ts) => LType::Tuple(ts.iter().map(|t| subst_type(t, x, by)).collect()),
        LType::Fun(d) if d.param != x => LType::Fun(Box::new(DepFun {
            param: d.param.clone(),
            arg: subst_type(&d.arg, x, by),
            pre: subst_effects(&d.pre, x, by),
            result: subst_type(&d.result, x, by),
            post: subst_effects(&d.post, x, by),
        })),
        t => t.clone(),
    }
}

fn value_vars(v: &Value, out: &mut BTreeSet<Ident>) {
    match v {
        Value::Var(x) => {
            out.insert(x.clone());
        }
        Value::Con(_, args) => args.iter().for_each(|a| value_vars(a, out)),
        _ => {}
    }
}

/// Free identifiers of the effect annotations in a type.
fn type_fv(t: &LType) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    match t {
        LType::List(t) => out = type_fv(t),
        LType::Tuple(ts) => ts.iter().for_each(|t| out.extend(type_fv(t))),
        LType::Fun(d) => {
            for ev in d.pre.iter().chain(&d.post) {
                value_vars(&ev.arg, &mut out);
            }
            out.extend(type_fv(&d.arg));
            out.extend(type_fv(&d.result));
            out.remove(&d.param);
        }
        _ => {}
    }
    out
}

#[derive(Default)]
pub struct LegacyChecker {
    vars: Vec<Option<LType>>,
}

impl LegacyChecker {
    pub fn new() -> Self {
        Self::default()
    }

    fn fresh(&mut self) -> LType {
        self.vars.push(None);
        LType::Var(self.vars.len() as u32 - 1)
    }

    /// Resolves inference variables as far as they are known.
    pub fn resolve(&self, t: &LType) -> LType {
        match t {
            LType::Var(i) => match &self.vars[*i as usize] {
                Some(t) => self.resolve(t),
                None => t.clone(),
            },
            LType::List(t) => LType::List(Box::new(self.resolve(t))),
            LType::Tuple(ts) => LType::Tuple(ts.iter().map(|t| self.resolve(t)).collect()),
            LType::Fun(d) => LType::Fun(Box::new(DepFun {
                param: d.param.clone(),
                arg: self.resolve(&d.arg),
                pre: d.pre.clone(),
                result: self.resolve(&d.result),
                post: d.post.clone(),
            })),
            t => t.clone(),
        }
    }

    fn occurs(&self, i: u32, t: &LType) -> bool {
        match self.resolve(t) {
            LType::Var(j) => i == j,
            LType::List(t) => self.occurs(i, &t),
            LType::Tuple(ts) => ts.iter().any(|t| self.occurs(i, t)),
            LType::Fun(d) => self.occurs(i, &d.arg) || self.occurs(i, &d.result),
            _ => false,
        }
    }

    /// Type equality of the completion rules; function types must agree on
    /// their effect annotations up to renaming of the parameter.
    fn unify(&mut self, a: &LType, b: &LType, rule: &'static str) -> Result<(), LegacyFail> {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (&a, &b) {
            (LType::Var(i), LType::Var(j)) if i == j => Ok(()),
            (LType::Var(i), t) | (t, LType::Var(i)) => {
                if self.occurs(*i, t) {
                    return fail(rule, format!("{a} = {b}"));
                }
                self.vars[*i as usize] = Some(t.clone());
                Ok(())
            }
            (LType::List(x), LType::List(y)) => self.unify(x, y, rule),
            (LType::Tuple(xs), LType::Tuple(ys)) if xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    self.unify(x, y, rule)?;
                }
                Ok(())
            }
            (LType::Fun(d), LType::Fun(e)) => {
                let renamed = Value::Var(d.param.clone());
                let e_pre = subst_effects(&e.pre, &e.param, &renamed);
                let e_post = subst_effects(&e.post, &e.param, &renamed);
                if d.pre != e_pre || d.post != e_post {
                    return fail(rule, format!("{a} = {b}"));
                }
                self.unify(&d.arg, &e.arg, rule)?;
                let e_result = subst_type(&e.result, &e.param, &renamed);
                self.unify(&d.result, &e_result, rule)
            }
            (x, y) if x == y => Ok(()),
            _ => fail(rule, format!("{a} = {b}")),
        }
    }

    /// Value typing `Γ;F ⊢ V : T`.
    pub fn check_value(
        &mut self,
        gamma: &Gamma,
        f: &EffectSet,
        v: &Value,
    ) -> Result<LType, LegacyFail> {
        match v {
            Value::Var(x) => match gamma.get(x) {
                Some(t) => Ok(t.clone()),
                None => fail("T-Var", format!("{x} in dom(Gamma)")),
            },
            Value::Con(c, args) => {
                let mut ts = Vec::with_capacity(args.len());
                for a in args {
                    ts.push(self.check_value(gamma, f, a)?);
                }
                // completion: constructor typing
                match c {
                    Constructor::Unit => Ok(LType::Unit),
                    Constructor::Zero | Constructor::Num(_) => Ok(LType::Int),
                    Constructor::Str(_) => Ok(LType::String),
                    Constructor::Succ => {
                        self.unify(&ts[0], &LType::Int, "T-Succ")?;
                        Ok(LType::Int)
                    }
                    Constructor::Nil => Ok(LType::List(Box::new(self.fresh()))),
                    Constructor::Cons => {
                        let list = LType::List(Box::new(ts[0].clone()));
                        self.unify(&ts[1], &list, "T-Cons")?;
                        Ok(list)
                    }
                    Constructor::Tuple(_) => Ok(LType::Tuple(ts)),
                    Constructor::Text => {
                        self.unify(&ts[0], &LType::String, "T-Text")?;
                        Ok(LType::Xml)
                    }
                    Constructor::Elem => {
                        self.unify(&ts[0], &LType::String, "T-Elem")?;
                        self.unify(&ts[1], &LType::Xml, "T-Elem")?;
                        Ok(LType::Xml)
                    }
                }
            }
            // completion: a link is an xml value whose body has no effects
            Value::Href(body) => {
                let j = self.check_expr(gamma, f, body, &mut None)?;
                self.unify(&j.ty, &LType::Xml, "T-Href")?;
                if !j.post.is_empty() {
                    return fail("T-Href", format!("{} = {{ }}", render_effects(&j.post)));
                }
                Ok(LType::Xml)
            }
            // completion: as href, with the labels bound to strings
            Value::Form(labels, body) => {
                let mut inner = gamma.clone();
                for l in labels {
                    inner.insert(l.clone(), LType::String);
                }
                let j = self.check_expr(&inner, f, body, &mut None)?;
                self.unify(&j.ty, &LType::Xml, "T-Form")?;
                if !j.post.is_empty() {
                    return fail("T-Form", format!("{} = {{ }}", render_effects(&j.post)));
                }
                Ok(LType::Xml)
            }
            // completion: the precondition is the set of assertions the body
            // cannot justify by itself
            Value::Lambda(x, body) => {
                let arg = self.fresh();
                let mut inner = gamma.clone();
                inner.insert(x.clone(), arg.clone());
                let mut required = Some(EffectSet::new());
                let j = self.check_expr(&inner, &EffectSet::new(), body, &mut required)?;
                Ok(LType::Fun(Box::new(DepFun {
                    param: x.clone(),
                    arg,
                    pre: required.unwrap_or_default(),
                    result: j.ty,
                    post: j.post,
                })))
            }
        }
    }

    /// Expression typing `Γ;F ⊢ E : ⟨_:T⟩{F'}`. When `required` is set,
    /// assertions missing from `F` are recorded there instead of failing.
    pub fn check_expr(
        &mut self,
        gamma: &Gamma,
        f: &EffectSet,
        e: &Expr,
        required: &mut Option<EffectSet>,
    ) -> Result<Judgment, LegacyFail> {
        let unit = |post| Judgment {
            ty: LType::Unit,
            post,
        };
        match e {
            Expr::Val(v) => Ok(Judgment {
                ty: self.check_value(gamma, f, v)?,
                post: EffectSet::new(),
            }),
            // completion: effects of the bound expression are visible in the body
            Expr::Let(x, rhs, body) => {
                let j1 = self.check_expr(gamma, f, rhs, required)?;
                let mut inner = gamma.clone();
                inner.insert(x.clone(), j1.ty);
                let f1: EffectSet = f.union(&j1.post).cloned().collect();
                let j2 = self.check_expr(&inner, &f1, body, required)?;
                Ok(Judgment {
                    ty: j2.ty,
                    post: j1.post.union(&j2.post).cloned().collect(),
                })
            }
            // completion
            Expr::Prim(_, a, b) => {
                let ja = self.check_expr(gamma, f, a, required)?;
                self.unify(&ja.ty, &LType::Int, "T-Prim")?;
                let fa: EffectSet = f.union(&ja.post).cloned().collect();
                let jb = self.check_expr(gamma, &fa, b, required)?;
                self.unify(&jb.ty, &LType::Int, "T-Prim")?;
                Ok(Judgment {
                    ty: LType::Int,
                    post: ja.post.union(&jb.post).cloned().collect(),
                })
            }
            Expr::Get(v) => {
                let t = self.check_value(gamma, f, v)?;
                self.unify(&t, &LType::Xml, "T-Get")?;
                Ok(Judgment {
                    ty: LType::Xml,
                    post: EffectSet::new(),
                })
            }
            Expr::Post(fields, target) => {
                for (_, v) in fields {
                    let t = self.check_value(gamma, f, v)?;
                    self.unify(&t, &LType::String, "T-Post")?;
                }
                let t = self.check_value(gamma, f, target)?;
                self.unify(&t, &LType::Xml, "T-Post")?;
                Ok(Judgment {
                    ty: LType::Xml,
                    post: EffectSet::new(),
                })
            }
            Expr::EventAnn(ev) => {
                self.scope_check(gamma, f, ev, "T-Event")?;
                self.check_value(gamma, f, &ev.arg)?;
                Ok(unit(EffectSet::from([ev.clone()])))
            }
            Expr::AssertAnn(ev) => {
                self.scope_check(gamma, f, ev, "T-Assert")?;
                if !f.contains(ev) {
                    match required {
                        Some(req) => {
                            req.insert(ev.clone());
                        }
                        None => {
                            return fail(
                                "T-Assert",
                                format!("{}({}) in F", ev.pred, pretty_value(&ev.arg)),
                            )
                        }
                    }
                }
                self.check_value(gamma, f, &ev.arg)?;
                Ok(unit(EffectSet::from([ev.clone()])))
            }
            Expr::App(u, v) => {
                let t = self.check_value(gamma, f, u)?;
                let LType::Fun(d) = self.resolve(&t) else {
                    return fail("T-App", format!("{} is a function type", self.resolve(&t)));
                };
                let fv = type_fv(&LType::Fun(d.clone()));
                if !fv.is_empty() {
                    let names: Vec<&str> = fv.iter().map(String::as_str).collect();
                    return fail(
                        "T-App",
                        format!("fv(T) = {{ }}, found {{ {} }}", names.join(", ")),
                    );
                }
                let tv = self.check_value(gamma, f, v)?;
                self.unify(&tv, &d.arg, "T-App")?;
                let pre = subst_effects(&d.pre, &d.param, v);
                for ev in &pre {
                    if !f.contains(ev) {
                        match required {
                            Some(req) => {
                                req.insert(ev.clone());
                            }
                            None => {
                                return fail(
                                    "T-App",
                                    format!("{} is a subset of F", render_effects(&pre)),
                                )
                            }
                        }
                    }
                }
                Ok(Judgment {
                    ty: subst_type(&d.result, &d.param, v),
                    post: subst_effects(&d.post, &d.param, v),
                })
            }
            // completion: both branches under F, effects that surely happen
            Expr::Switch {
                scrutinee,
                pattern,
                binders,
                matched,
                otherwise,
            } => {
                let ts = self.check_value(gamma, f, scrutinee)?;
                let (pat_ty, parts) = match pattern {
                    Constructor::Unit => (LType::Unit, vec![]),
                    Constructor::Zero | Constructor::Num(_) => (LType::Int, vec![]),
                    Constructor::Succ => (LType::Int, vec![LType::Int]),
                    Constructor::Str(_) => (LType::String, vec![]),
                    Constructor::Nil => (LType::List(Box::new(self.fresh())), vec![]),
                    Constructor::Cons => {
                        let elem = self.fresh();
                        let list = LType::List(Box::new(elem.clone()));
                        (list.clone(), vec![elem, list])
                    }
                    Constructor::Tuple(n) => {
                        let elems: Vec<LType> = (0..*n).map(|_| self.fresh()).collect();
                        (LType::Tuple(elems.clone()), elems)
                    }
                    Constructor::Elem => (LType::Xml, vec![LType::String, LType::Xml]),
                    Constructor::Text => (LType::Xml, vec![LType::String]),
                };
                self.unify(&ts, &pat_ty, "T-Switch")?;
                let mut inner = gamma.clone();
                for (x, t) in binders.iter().zip(parts) {
                    inner.insert(x.clone(), t);
                }
                let j1 = self.check_expr(&inner, f, matched, required)?;
                let j2 = self.check_expr(gamma, f, otherwise, required)?;
                self.unify(&j1.ty, &j2.ty, "T-Switch")?;
                Ok(Judgment {
                    ty: j1.ty,
                    post: j1.post.intersection(&j2.post).cloned().collect(),
                })
            }
        }
    }

    /// `fv(F, L) ⊆ dom(Γ)`
    fn scope_check(
        &self,
        gamma: &Gamma,
        f: &EffectSet,
        ev: &Event,
        rule: &'static str,
    ) -> Result<(), LegacyFail> {
        let mut fv = BTreeSet::new();
        value_vars(&ev.arg, &mut fv);
        for e in f {
            value_vars(&e.arg, &mut fv);
        }
        match fv.iter().find(|x| !gamma.contains_key(*x)) {
            Some(x) => fail(rule, format!("{x} in dom(Gamma)")),
            None => Ok(()),
        }
    }
}

/// `∅;F ⊢ E : ⟨_:T⟩{F'}` for a closed expression.
pub fn typecheck(f: &EffectSet, e: &Expr) -> Result<Judgment, LegacyFail> {
    let mut checker = LegacyChecker::new();
    let j = checker.check_expr(&Gamma::new(), f, e, &mut None)?;
    Ok(Judgment {
        ty: checker.resolve(&j.ty),
        post: j.post,
    })
}

/// Outcome of the legacy judgment on a whole program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegacyReport {
    pub accepted: bool,
    pub outcome: Result<Judgment, LegacyFail>,
}

impl fmt::Display for LegacyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Ok(j) if self.accepted => write!(f, "{j}"),
            Ok(j) => write!(f, "FAIL(T-Program, {} = xml)", j.ty),
            Err(e) => write!(f, "{e}"),
        }
    }
}

/// A program is accepted when `∅;∅ ⊢ E : ⟨_:xml⟩{F'}`. The post-condition
/// is not required to be empty, so programs that raise and then assert
/// their own events are accepted.
pub fn check_program(program: &Expr) -> LegacyReport {
    let mut checker = LegacyChecker::new();
    let outcome = checker
        .check_expr(&Gamma::new(), &EffectSet::new(), program, &mut None)
        .map(|j| {
            let accepted = checker.unify(&j.ty, &LType::Xml, "T-Program").is_ok();
            (
                Judgment {
                    ty: checker.resolve(&j.ty),
                    post: j.post,
                },
                accepted,
            )
        });
    match outcome {
        Ok((j, accepted)) => LegacyReport {
            accepted,
            outcome: Ok(j),
        },
        Err(e) => LegacyReport {
            accepted: false,
            outcome: Err(e),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn ev(p: &str, n: i64) -> Event {
        Event {
            pred: p.into(),
            arg: Value::num(n),
        }
    }

    #[test]
    fn get_of_text_is_accepted() {
        let r = check_program(&parse(r#"get(Text("Hello!"))"#).unwrap());
        assert!(r.accepted);
        assert_eq!(r.to_string(), "xml { }");
    }

    #[test]
    fn event_has_its_effect() {
        let j = typecheck(&EffectSet::new(), &Expr::event("p", Value::num(3))).unwrap();
        assert_eq!(j.ty, LType::Unit);
        assert_eq!(j.post, EffectSet::from([ev("p", 3)]));
    }

    #[test]
    fn assert_requires_the_event_in_f() {
        let e = Expr::assert("p", Value::num(3));
        let err = typecheck(&EffectSet::new(), &e).unwrap_err();
        assert_eq!(err.rule, "T-Assert");
        assert_eq!(err.to_string(), "FAIL(T-Assert, p(3) in F)");
        let j = typecheck(&EffectSet::from([ev("p", 3)]), &e).unwrap();
        assert_eq!(j.ty, LType::Unit);
        assert_eq!(j.post, EffectSet::from([ev("p", 3)]));
    }

    #[test]
    fn get_and_post_rules() {
        assert!(typecheck(&EffectSet::new(), &parse("get(1)").unwrap()).is_err());
        let j = typecheck(
            &EffectSet::new(),
            &parse(r#"post({a = "s"}, Text("x"))"#).unwrap(),
        )
        .unwrap();
        assert_eq!(j.ty, LType::Xml);
        let err = typecheck(
            &EffectSet::new(),
            &parse(r#"post({a = 1}, Text("x"))"#).unwrap(),
        )
        .unwrap_err();
        assert_eq!(err.rule, "T-Post");
    }

    #[test]
    fn application_substitutes_the_argument() {
        let src = r#"fun buy(value, dbpass) { var _ = assert PriceIs(value); Text("Hello") }
                     var _ = event PriceIs(5);
                     buy(5, "a")"#;
        let r = check_program(&parse(src).unwrap());
        assert!(r.accepted, "{r}");
        let src = r#"fun buy(value, dbpass) { var _ = assert PriceIs(value); Text("Hello") }
                     buy(5, "a")"#;
        let r = check_program(&parse(src).unwrap());
        assert!(!r.accepted);
        assert!(
            matches!(r.outcome, Err(LegacyFail { rule: "T-App", .. })),
            "{r}"
        );
    }

    #[test]
    fn application_of_a_non_function_fails() {
        let r = check_program(&parse("var f = 1; f(2)").unwrap());
        assert!(matches!(r.outcome, Err(LegacyFail { rule: "T-App", .. })));
    }

    #[test]
    fn function_type_rendering() {
        let j = typecheck(
            &EffectSet::new(),
            &parse("fun (x) { var _ = assert p(x); Text(\"a\") }").unwrap(),
        )
        .unwrap();
        assert_eq!(j.to_string(), "<x:'t0>{ p(x) } -> xml { p(x) } { }");
    }

    #[test]
    fn href_and_form_are_xml() {
        let r = check_program(&parse(r#"href(href(Text("Hello")))"#).unwrap());
        assert!(r.accepted);
        let r = check_program(&parse(r#"get(form([a], Text(a)))"#).unwrap());
        assert!(r.accepted);
        let r = check_program(&parse("href(event p(1))").unwrap());
        assert!(!r.accepted);
    }

    #[test]
    fn event_then_assert_accepted() {
        let r =
            check_program(&parse(r#"var _ = event p(1); var _ = assert p(1); Text("a")"#).unwrap());
        assert!(r.accepted, "{r}");
    }

    #[test]
    fn switch_keeps_common_effects() {
        let src = "switch (1) { case 0 -> { event p(1) } _ -> { event p(1) } }";
        let j = typecheck(&EffectSet::new(), &parse(src).unwrap()).unwrap();
        assert_eq!(j.post, EffectSet::from([ev("p", 1)]));
        let src = "switch (1) { case 0 -> { event p(1) } _ -> { Unit } }";
        let j = typecheck(&EffectSet::new(), &parse(src).unwrap()).unwrap();
        assert!(j.post.is_empty());
    }
}
