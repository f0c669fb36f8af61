//! Abstract semantic equations over [`AbsValue`].
//!
//! One substitution is threaded through a whole run: every unification
//! extends it, and values are normalised against it when compared. This is
//! the same as carrying a substitution in each value and merging them at
//! every combination point, because the merge never forgets a binding.

use std::collections::BTreeSet;
use std::rc::Rc;

use crate::eenv::Mark;
use crate::frontend::{Constructor, Event, Expr, PrimOp, Value};
use crate::terms::{Fresh, Subst, Term, Var};

use super::domain::*;
use super::{AnalysisError, Reason};

/// Abstract value. The bottom element `Error` is the `Err` side of [`AResult`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbsValue {
    pub ty: Term,
    pub dval: AbsDval,
    pub constr: Constr,
    pub corr: TPred,
    /// Derived from a function parameter, so the constraints of the actual
    /// value are not known here.
    pub open: bool,
}

impl AbsValue {
    fn simple(ty: Term, dval: AbsDval) -> AbsValue {
        AbsValue {
            ty,
            dval,
            constr: Constr::empty(),
            corr: TPred::zeta(),
            open: false,
        }
    }

    /// Same constraints, correspondence and openness as `src`.
    fn inheriting(ty: Term, dval: AbsDval, src: &AbsValue) -> AbsValue {
        AbsValue {
            ty,
            dval,
            constr: src.constr.clone(),
            corr: src.corr.clone(),
            open: src.open,
        }
    }

    fn combined(ty: Term, dval: AbsDval, parts: &[&AbsValue]) -> AbsValue {
        let mut constr = Constr::empty();
        let mut corr = TPred::zeta();
        let mut open = false;
        for p in parts {
            constr = constr.union(&p.constr);
            corr = corr.meet(&p.corr);
            open |= p.open;
        }
        AbsValue {
            ty,
            dval,
            constr,
            corr,
            open,
        }
    }

    pub fn apply(&self, theta: &Subst) -> AbsValue {
        AbsValue {
            ty: theta.apply(&self.ty),
            dval: self.dval.apply(theta),
            constr: self.constr.apply(theta),
            corr: self.corr.apply(theta),
            open: self.open,
        }
    }
}

pub type AResult<T> = Result<T, AnalysisError>;

fn fail<T>(reason: Reason, message: impl Into<String>) -> AResult<T> {
    Err(AnalysisError::new(reason, message))
}

/// Persistent abstract environment.
#[derive(Clone, Default)]
pub struct Scope<'p>(Option<Rc<ScopeNode<'p>>>);

pub struct ScopeNode<'p> {
    name: &'p str,
    value: AbsValue,
    next: Scope<'p>,
}

impl<'p> Scope<'p> {
    pub fn empty() -> Self {
        Scope(None)
    }

    pub fn bind(&self, name: &'p str, value: AbsValue) -> Self {
        Scope(Some(Rc::new(ScopeNode {
            name,
            value,
            next: self.clone(),
        })))
    }

    pub fn lookup(&self, name: &str) -> Option<&AbsValue> {
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

/// Analysis state. Fresh-variable counters persist across runs of the same
/// analyser; the substitution is reset at every top-level run.
#[derive(Default)]
pub struct Analyzer {
    fresh: Fresh,
    pub(super) subst: Subst,
    /// Annotation variables of links and functions invoked while their value
    /// was open: a constraint later found on one of them was never checked.
    blind: BTreeSet<Var>,
}

impl Analyzer {
    pub fn new() -> Analyzer {
        Analyzer::default()
    }

    pub(super) fn reset_run(&mut self) {
        self.subst = Subst::identity();
        self.blind.clear();
    }

    /// Substitution accumulated by the current run.
    pub fn subst(&self) -> &Subst {
        &self.subst
    }

    pub(super) fn fresh_ann(&mut self) -> Var {
        self.fresh.ann()
    }

    pub(super) fn unify(&mut self, a: &Term, b: &Term, what: &str) -> AResult<()> {
        self.subst
            .unify(a, b)
            .map_err(|e| AnalysisError::new(Reason::TypeClash, format!("{what}: {e}")))
    }

    fn norm_env(&self, phi: &AbsEventEnv) -> AbsEventEnv {
        apply_env(phi, &self.subst)
    }

    fn norm_dval(&self, d: &AbsDval) -> AbsDval {
        d.apply(&self.subst)
    }

    /// Rejects constraints that sit on a blindly invoked variable.
    fn guard_blind(&self, c: &Constr, what: &str) -> AResult<()> {
        if self.blind.is_empty() {
            return Ok(());
        }
        let blind: BTreeSet<Var> = self.blind.iter().map(|v| self.subst.apply_var(v)).collect();
        match c
            .iter()
            .find(|(v, _)| blind.contains(&self.subst.apply_var(v)))
        {
            Some((_, q)) => fail(
                Reason::UnmetPrecondition,
                format!("{what}: requirement on {q} reaches an unchecked invocation"),
            ),
            None => Ok(()),
        }
    }

    /// Every predicate of `discharged` has a specific value in `f` that has
    /// occurred in `phi`.
    fn discharge(&self, f: &TPred, discharged: &Constr, phi: &AbsEventEnv) -> bool {
        let needed = f.restrict_in(discharged);
        discharged.preds().iter().all(|q| needed.get(q).is_some())
            && check(&needed, &self.norm_env(phi))
    }

    /// Correspondence kept after discharging: predicates still named by the
    /// residual constraints survive.
    fn keep_for(f: &TPred, discharged: &Constr, residual: &Constr) -> TPred {
        let still = residual.preds();
        let drop: BTreeSet<String> = discharged
            .preds()
            .into_iter()
            .filter(|q| !still.contains(q))
            .collect();
        f.without_preds(&drop)
    }

    /// `⟦V⟧ ρ φ` for values.
    pub fn aval<'p>(
        &mut self,
        v: &'p Value,
        rho: &Scope<'p>,
        phi: &AbsEventEnv,
    ) -> AResult<AbsValue> {
        match v {
            Value::Var(x) => match rho.lookup(x) {
                Some(a) => Ok(a.clone()),
                None => fail(Reason::TypeClash, format!("unbound identifier {x}")),
            },
            Value::Con(c, args) => self.aval_con(c, args, rho, phi),
            Value::Lambda(x, body) => self.aval_lambda(x, body, rho, phi),
            Value::Href(body) => {
                let gamma = self.fresh.ann();
                self.suspension(body, rho, phi, gamma.clone(), "href")
                    .map(|(c, f, open)| AbsValue {
                        ty: self.subst.apply(&Term::link(gamma)),
                        dval: AbsDval::NoDval,
                        constr: c,
                        corr: f,
                        open,
                    })
            }
            Value::Form(labels, body) => {
                let gamma = self.fresh.ann();
                let mut inner = rho.clone();
                for l in labels {
                    inner = inner.bind(l, AbsValue::simple(Term::string(), AbsDval::NoDval));
                }
                self.suspension(body, &inner, phi, gamma.clone(), "form")
                    .map(|(c, f, open)| AbsValue {
                        ty: self.subst.apply(&Term::form(gamma)),
                        dval: AbsDval::NoDval,
                        constr: c,
                        corr: f,
                        open,
                    })
            }
        }
    }

    /// Body of a link or form: no new events, an XML result, and the new
    /// assertions become requirements on `gamma`.
    fn suspension<'p>(
        &mut self,
        body: &'p Expr,
        rho: &Scope<'p>,
        phi: &AbsEventEnv,
        gamma: Var,
        what: &str,
    ) -> AResult<(Constr, TPred, bool)> {
        let (val, phi1) = self.aexp(body, rho, phi)?;
        let delta = env_delta(&self.norm_env(&phi1), &self.norm_env(phi));
        if let Some(q) = delta.evented.iter().next() {
            return fail(
                Reason::UnmetPrecondition,
                format!("{what}: suspended body generates event {q}"),
            );
        }
        self.subst
            .unify(&val.ty, &Term::xml(gamma.clone()))
            .map_err(|e| AnalysisError::new(Reason::NotXml, format!("{what}: {e}")))?;
        let gamma = self.subst.apply_var(&gamma);
        let required: Constr = delta
            .asserted
            .iter()
            .map(|q| (gamma.clone(), q.clone()))
            .collect();
        let constr = val.constr.union(&required).apply(&self.subst);
        let corr = cb([&val.corr, &eenv_to_tpred(&delta.diff)]).apply(&self.subst);
        Ok((constr, corr, val.open))
    }

    fn aval_lambda<'p>(
        &mut self,
        x: &'p str,
        body: &'p Expr,
        rho: &Scope<'p>,
        phi: &AbsEventEnv,
    ) -> AResult<AbsValue> {
        let alpha = self.fresh.ty();
        let g1 = self.fresh.ann();
        let g2 = self.fresh.ann();
        let xv = self.fresh.ide(Some(x));
        let param = AbsValue {
            ty: Term::Var(alpha.clone()),
            dval: AbsDval::VarD(xv.clone()),
            constr: Constr::empty(),
            corr: TPred::zeta(),
            open: true,
        };
        let (val, phi1) = self.aexp(body, &rho.bind(x, param), phi)?;
        let delta = env_delta(&self.norm_env(&phi1), &self.norm_env(phi));
        let pre = delta.asserted.iter().map(|q| (g1.clone(), q.clone()));
        let post = delta.evented.iter().map(|q| (g2.clone(), q.clone()));
        let constr = val.constr.union(&pre.chain(post).collect());
        let corr = cb([&val.corr, &eenv_to_tpred(&delta.diff)]);
        let ty = Term::fun(xv, Term::Var(alpha), g1, val.ty.clone(), g2);
        Ok(AbsValue {
            ty: self.subst.apply(&ty),
            dval: AbsDval::NoDval,
            constr: constr.apply(&self.subst),
            corr: corr.apply(&self.subst),
            open: val.open,
        })
    }

    fn aval_con<'p>(
        &mut self,
        c: &Constructor,
        args: &'p [Value],
        rho: &Scope<'p>,
        phi: &AbsEventEnv,
    ) -> AResult<AbsValue> {
        if args.len() != c.arity() {
            return fail(
                Reason::TypeClash,
                format!("constructor arity mismatch for {c:?}"),
            );
        }
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.aval(a, rho, phi)?);
        }
        let parts: Vec<&AbsValue> = vals.iter().collect();
        Ok(match c {
            Constructor::Unit => AbsValue::simple(Term::unit(), AbsDval::NoDval),
            Constructor::Zero => AbsValue::simple(Term::int(), AbsDval::NInt(0)),
            Constructor::Num(n) => AbsValue::simple(Term::int(), AbsDval::NInt(*n)),
            Constructor::Str(_) => AbsValue::simple(Term::string(), AbsDval::NoDval),
            Constructor::Nil => {
                let alpha = self.fresh.ty();
                AbsValue::simple(Term::list(Term::Var(alpha)), AbsDval::NoDval)
            }
            Constructor::Succ => {
                self.unify(&vals[0].ty, &Term::int(), "Succ")?;
                let d = match self.norm_dval(&vals[0].dval) {
                    AbsDval::NInt(n) => AbsDval::NInt(n.wrapping_add(1)),
                    _ => AbsDval::Top,
                };
                AbsValue::inheriting(Term::int(), d, &vals[0])
            }
            Constructor::Text => {
                self.unify(&vals[0].ty, &Term::string(), "Text")?;
                let gamma = self.fresh.ann();
                AbsValue::inheriting(Term::xml(gamma), AbsDval::NoDval, &vals[0])
            }
            Constructor::Elem => {
                self.unify(&vals[0].ty, &Term::string(), "Elem")?;
                let child = self.fresh.ann();
                self.unify(&vals[1].ty, &Term::xml(child), "Elem")?;
                let gamma = self.fresh.ann();
                AbsValue::combined(Term::xml(gamma), AbsDval::NoDval, &parts)
            }
            Constructor::Cons => {
                let list = Term::list(vals[0].ty.clone());
                self.unify(&vals[1].ty, &list, "Cons")?;
                AbsValue::combined(self.subst.apply(&list), AbsDval::NoDval, &parts)
            }
            Constructor::Tuple(_) => {
                let ty = Term::tuple(vals.iter().map(|v| self.subst.apply(&v.ty)).collect());
                AbsValue::combined(ty, AbsDval::NoDval, &parts)
            }
        })
    }

    /// `⟦E⟧ ρ φ` for expressions. `Err` stands for `(Error, ι)`.
    pub fn aexp<'p>(
        &mut self,
        e: &'p Expr,
        rho: &Scope<'p>,
        phi: &AbsEventEnv,
    ) -> AResult<(AbsValue, AbsEventEnv)> {
        match e {
            Expr::Val(v) => Ok((self.aval(v, rho, phi)?, phi.clone())),
            Expr::Let(x, rhs, body) => {
                let (v1, phi1) = self.aexp(rhs, rho, phi)?;
                let (v2, phi2) = self.aexp(body, &rho.bind(x, v1.clone()), &phi1)?;
                Ok((v2, phi2))
            }
            Expr::Prim(op, a, b) => {
                let (va, phi1) = self.aexp(a, rho, phi)?;
                let (vb, phi2) = self.aexp(b, rho, &phi1)?;
                let what = op.symbol();
                self.unify(&va.ty, &Term::int(), what)?;
                self.unify(&vb.ty, &Term::int(), what)?;
                let d = match (self.norm_dval(&va.dval), self.norm_dval(&vb.dval)) {
                    (_, AbsDval::NInt(0)) if *op == PrimOp::Div => {
                        return fail(Reason::TypeClash, "division by zero");
                    }
                    (AbsDval::NInt(m), AbsDval::NInt(n)) => AbsDval::NInt(match op {
                        PrimOp::Add => m.wrapping_add(n),
                        PrimOp::Sub => m.wrapping_sub(n),
                        PrimOp::Mul => m.wrapping_mul(n),
                        PrimOp::Div => m.wrapping_div(n),
                    }),
                    (_, _) if *op == PrimOp::Div => {
                        return fail(Reason::TypeClash, "division by an unknown divisor");
                    }
                    _ => AbsDval::Top,
                };
                Ok((AbsValue::combined(Term::int(), d, &[&va, &vb]), phi2))
            }
            Expr::App(u, v) => self.aexp_app(u, v, rho, phi),
            Expr::Get(v) => {
                let val = self.aval(v, rho, phi)?;
                let gamma = self.fresh.ann();
                self.unify(&val.ty, &Term::link(gamma.clone()), "get")?;
                let out = self.invoke_page(&val, &gamma, Constr::empty(), phi, "get")?;
                Ok((out, phi.clone()))
            }
            Expr::Post(fields, target) => {
                let mut seen = BTreeSet::new();
                let mut extra = Constr::empty();
                for (label, fv) in fields {
                    if !seen.insert(label) {
                        return fail(Reason::TypeClash, format!("post: duplicate label {label}"));
                    }
                    let a = self.aval(fv, rho, phi)?;
                    self.unify(&a.ty, &Term::string(), "post")?;
                    extra = extra.union(&a.constr);
                }
                let val = self.aval(target, rho, phi)?;
                let gamma = self.fresh.ann();
                self.unify(&val.ty, &Term::form(gamma.clone()), "post")?;
                let out = self.invoke_page(&val, &gamma, extra, phi, "post")?;
                Ok((out, phi.clone()))
            }
            Expr::EventAnn(Event { pred, arg }) => {
                let (val, d) = self.event_value(pred, arg, rho, phi, "event")?;
                match self.norm_env(phi).get(pred) {
                    None => {}
                    Some((e, m)) if *e == d && m.occurred() => {}
                    Some(_) => {
                        return fail(
                            Reason::BadEventValue,
                            format!("event: {pred} is already bound differently"),
                        );
                    }
                }
                Ok((val, phi.bind(pred, d, Mark::E)))
            }
            Expr::AssertAnn(Event { pred, arg }) => {
                let (val, d) = self.event_value(pred, arg, rho, phi, "assert")?;
                let mark = match self.norm_env(phi).get(pred) {
                    None => Mark::A,
                    Some((e, m)) if *e == d => {
                        if m.occurred() {
                            Mark::EA
                        } else {
                            Mark::A
                        }
                    }
                    Some(_) => {
                        return fail(
                            Reason::BadEventValue,
                            format!("assert: {pred} is bound to another value"),
                        );
                    }
                };
                Ok((val, phi.bind(pred, d, mark)))
            }
            Expr::Switch {
                scrutinee,
                pattern,
                binders,
                matched,
                otherwise,
            } => self.aexp_switch(scrutinee, pattern, binders, matched, otherwise, rho, phi),
        }
    }

    /// Shared part of `event` and `assert`: an integer with a specific value.
    fn event_value<'p>(
        &mut self,
        pred: &str,
        arg: &'p Value,
        rho: &Scope<'p>,
        phi: &AbsEventEnv,
        what: &str,
    ) -> AResult<(AbsValue, AbsDval)> {
        let val = self.aval(arg, rho, phi)?;
        let d = self.norm_dval(&val.dval);
        if !d.is_specific() {
            return fail(
                Reason::BadEventValue,
                format!("{what}: {pred} needs a known integer or parameter, got {d}"),
            );
        }
        self.unify(&val.ty, &Term::int(), what)?;
        Ok((AbsValue::inheriting(Term::unit(), AbsDval::NoDval, &val), d))
    }

    /// `get`/`post` after the link or form type has been unified with `gamma`.
    fn invoke_page(
        &mut self,
        val: &AbsValue,
        gamma: &Var,
        extra: Constr,
        phi: &AbsEventEnv,
        what: &str,
    ) -> AResult<AbsValue> {
        let gamma = self.subst.apply_var(gamma);
        let constr = val.constr.union(&extra).apply(&self.subst);
        let corr = val.corr.apply(&self.subst);
        let discharged = constr.on_vars(&BTreeSet::from([gamma.clone()]));
        if !self.discharge(&corr, &discharged, phi) {
            return fail(
                Reason::UnmetPrecondition,
                format!("{what}: no preconditions"),
            );
        }
        let residual = constr.minus(&discharged);
        self.guard_blind(&residual, what)?;
        if val.open {
            self.blind.insert(gamma.clone());
        }
        // The returned page is plain XML; its annotation is unrelated to the
        // requirements just discharged.
        let page = self.fresh_ann();
        Ok(AbsValue {
            ty: Term::xml(page),
            dval: AbsDval::NoDval,
            corr: Self::keep_for(&corr, &discharged, &residual),
            constr: residual,
            open: val.open,
        })
    }

    fn aexp_app<'p>(
        &mut self,
        u: &'p Value,
        v: &'p Value,
        rho: &Scope<'p>,
        phi: &AbsEventEnv,
    ) -> AResult<(AbsValue, AbsEventEnv)> {
        let f = self.aval(u, rho, phi)?;
        let a = self.aval(v, rho, phi)?;
        let x = self.fresh.ide(None);
        let alpha = self.fresh.ty();
        let g1 = self.fresh.ann();
        let g2 = self.fresh.ann();
        let expected = Term::fun(x.clone(), a.ty.clone(), g1, Term::Var(alpha.clone()), g2);
        self.unify(&f.ty, &expected, "apply_fun")?;

        let theta = &self.subst;
        let fty = theta.apply(&f.ty);
        let (pre, post) = fty.pr_ps_vars();
        let c1 = f.constr.apply(theta);
        let c2 = a.constr.apply(theta);
        let c_pre = c1.on_vars(&pre);
        let c_post = c1.on_vars(&post);
        let f1 = f
            .corr
            .apply(theta)
            .bind_param(&theta.apply_var(&x), &a.dval.apply(theta));
        if !self.discharge(&f1, &c_pre, phi) {
            return fail(Reason::UnmetPrecondition, "apply_fun: no preconditions");
        }
        let consumed = c_pre.union(&c_post);
        let residual = c1.union(&c2).minus(&consumed);
        self.guard_blind(&residual, "apply_fun")?;
        if f.open {
            self.blind.extend(pre.iter().chain(post.iter()).cloned());
        }

        // post-condition events: must agree with what has already happened
        let phi_n = self.norm_env(phi);
        let mut posts = TPred::zeta();
        for q in c_post.preds() {
            let d = f1.get(&q).cloned().unwrap_or(AbsDval::Top);
            match phi_n.get(&q) {
                None => {}
                Some((e, m)) if *e == d && d.is_specific() && m.occurred() => {}
                Some(_) => {
                    return fail(
                        Reason::BadEventValue,
                        format!("apply_fun: post-condition event {q} conflicts with the current binding"),
                    );
                }
            }
            posts.insert(&q, d);
        }
        let phi_out = incl(&phi_n, &posts);

        let corr = cb([
            &Self::keep_for(&f1, &consumed, &residual),
            &a.corr.apply(&self.subst),
        ]);
        let out = AbsValue {
            ty: self.subst.apply(&Term::Var(alpha)),
            dval: AbsDval::Top,
            constr: residual,
            corr,
            open: f.open || a.open,
        };
        Ok((out, phi_out))
    }

    #[allow(clippy::too_many_arguments)]
    fn aexp_switch<'p>(
        &mut self,
        scrutinee: &'p Value,
        pattern: &Constructor,
        binders: &'p [String],
        matched: &'p Expr,
        otherwise: &'p Expr,
        rho: &Scope<'p>,
        phi: &AbsEventEnv,
    ) -> AResult<(AbsValue, AbsEventEnv)> {
        let s = self.aval(scrutinee, rho, phi)?;
        if binders.len() != pattern.arity() {
            return fail(Reason::TypeClash, "switch: binder count mismatch");
        }
        let (pat_ty, parts): (Term, Vec<(Term, AbsDval)>) = match pattern {
            Constructor::Unit => (Term::unit(), vec![]),
            Constructor::Zero | Constructor::Num(_) => (Term::int(), vec![]),
            Constructor::Succ => {
                let pred = match self.norm_dval(&s.dval) {
                    AbsDval::NInt(n) if n > 0 => AbsDval::NInt(n - 1),
                    _ => AbsDval::Top,
                };
                (Term::int(), vec![(Term::int(), pred)])
            }
            Constructor::Str(_) => (Term::string(), vec![]),
            Constructor::Nil => (Term::list(Term::Var(self.fresh.ty())), vec![]),
            Constructor::Cons => {
                let elem = Term::Var(self.fresh.ty());
                let list = Term::list(elem.clone());
                (
                    list.clone(),
                    vec![(elem, AbsDval::Top), (list, AbsDval::NoDval)],
                )
            }
            Constructor::Tuple(n) => {
                let elems: Vec<Term> = (0..*n).map(|_| Term::Var(self.fresh.ty())).collect();
                let parts = elems.iter().map(|t| (t.clone(), AbsDval::Top)).collect();
                (Term::tuple(elems), parts)
            }
            Constructor::Elem => {
                let child = self.fresh.ann();
                let gamma = self.fresh.ann();
                (
                    Term::xml(gamma),
                    vec![
                        (Term::string(), AbsDval::NoDval),
                        (Term::xml(child), AbsDval::NoDval),
                    ],
                )
            }
            Constructor::Text => {
                let gamma = self.fresh.ann();
                (Term::xml(gamma), vec![(Term::string(), AbsDval::NoDval)])
            }
        };
        self.unify(&s.ty, &pat_ty, "switch")?;

        let mut inner = rho.clone();
        for (x, (ty, d)) in binders.iter().zip(parts) {
            inner = inner.bind(x, AbsValue::inheriting(ty, d, &s));
        }
        // A known integer decides numeric patterns; the dead branch is skipped.
        let decided = match (pattern, self.norm_dval(&s.dval)) {
            (Constructor::Zero, AbsDval::NInt(n)) => Some(n == 0),
            (Constructor::Num(k), AbsDval::NInt(n)) => Some(n == *k),
            (Constructor::Succ, AbsDval::NInt(n)) => Some(n > 0),
            _ => None,
        };
        if let Some(hit) = decided {
            let (v, phi1) = if hit {
                self.aexp(matched, &inner, phi)?
            } else {
                self.aexp(otherwise, rho, phi)?
            };
            let d = self.norm_dval(&v.dval);
            let out = AbsValue::combined(self.subst.apply(&v.ty), d, &[&s, &v]);
            return Ok((out.apply(&self.subst), self.norm_env(&phi1)));
        }
        let (v1, phi1) = self.aexp(matched, &inner, phi)?;
        let (v2, phi2) = self.aexp(otherwise, rho, phi)?;
        self.unify(&v1.ty, &v2.ty, "switch")?;
        let d1 = self.norm_dval(&v1.dval);
        let d = if d1 == self.norm_dval(&v2.dval) {
            d1
        } else {
            AbsDval::Top
        };
        let out = AbsValue::combined(self.subst.apply(&v1.ty), d, &[&s, &v1, &v2]);
        let out = out.apply(&self.subst);
        Ok((out, join_envs(&self.norm_env(&phi1), &self.norm_env(&phi2))))
    }
}

/// Merge of the events environments of two branches.
///
/// An event that occurred on one side only, or with different values, is
/// kept as `(Top, E)`: it may have happened, so no later event, assertion or
/// requirement on it can be satisfied. Assertion-only marks are kept so the
/// obligation is not lost.
pub fn join_envs(a: &AbsEventEnv, b: &AbsEventEnv) -> AbsEventEnv {
    let mut out = AbsEventEnv::empty();
    let preds: BTreeSet<&String> = a.preds().chain(b.preds()).collect();
    for q in preds {
        let (d, m) = match (a.get(q), b.get(q)) {
            (Some((d1, m1)), Some((d2, m2))) => {
                let d = if d1 == d2 { d1.clone() } else { AbsDval::Top };
                let m = if *m1 == Mark::A || *m2 == Mark::A {
                    Mark::A
                } else if *m1 == Mark::EA && *m2 == Mark::EA {
                    Mark::EA
                } else {
                    Mark::E
                };
                (d, m)
            }
            (Some((d, Mark::A)), None) | (None, Some((d, Mark::A))) => (d.clone(), Mark::A),
            (Some(_), None) | (None, Some(_)) => (AbsDval::Top, Mark::E),
            (None, None) => unreachable!(),
        };
        out.insert(q, d, m);
    }
    out
}
