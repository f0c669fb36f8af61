//! Simple-type terms with type, annotation and identifier variables, and
//! kind-restricted unification.
//!
//! An annotation variable unifies only with another annotation variable and
//! an identifier variable only with another identifier variable. When two
//! variables of the same kind meet, the newer one is bound to the older one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    Type,
    Ann,
    Ide,
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarKind::Type => "type",
            VarKind::Ann => "annotation",
            VarKind::Ide => "identifier",
        })
    }
}

/// A variable. Identity is `(kind, index)`; the hint only affects rendering.
#[derive(Clone, Debug)]
pub struct Var {
    pub kind: VarKind,
    pub index: u32,
    pub hint: Option<Arc<str>>,
}

impl Var {
    pub fn new(kind: VarKind, index: u32) -> Var {
        Var {
            kind,
            index,
            hint: None,
        }
    }

    pub fn ty(index: u32) -> Var {
        Var::new(VarKind::Type, index)
    }

    pub fn ann(index: u32) -> Var {
        Var::new(VarKind::Ann, index)
    }

    pub fn ide(index: u32, hint: Option<&str>) -> Var {
        Var {
            kind: VarKind::Ide,
            index,
            hint: hint.map(Arc::from),
        }
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.index == other.index
    }
}

impl Eq for Var {}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.kind, self.index).cmp(&(other.kind, other.index))
    }
}

impl std::hash::Hash for Var {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
        self.index.hash(state);
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, &self.hint) {
            (VarKind::Type, _) => write!(f, "_typevar{}_", self.index),
            (VarKind::Ann, _) => write!(f, "_annvar{}_", self.index),
            (VarKind::Ide, Some(h)) => write!(f, "_#{h}#var{}_", self.index),
            (VarKind::Ide, None) => write!(f, "_var{}_", self.index),
        }
    }
}

/// Function symbols of the signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Unit,
    Int,
    String,
    Xml,
    Link,
    Form,
    List,
    /// `fun(x, argument, pre, result, post)`
    Fun,
    Tuple(usize),
}

impl Symbol {
    pub fn arity(self) -> usize {
        match self {
            Symbol::Unit | Symbol::Int | Symbol::String => 0,
            Symbol::Xml | Symbol::Link | Symbol::Form | Symbol::List => 1,
            Symbol::Fun => 5,
            Symbol::Tuple(n) => n,
        }
    }

    /// Kind required at argument position `i`.
    pub fn arg_kind(self, i: usize) -> VarKind {
        match (self, i) {
            (Symbol::Xml | Symbol::Link | Symbol::Form, _) => VarKind::Ann,
            (Symbol::Fun, 0) => VarKind::Ide,
            (Symbol::Fun, 2 | 4) => VarKind::Ann,
            _ => VarKind::Type,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Symbol::Unit => "Unit",
            Symbol::Int => "Integer",
            Symbol::String => "String",
            Symbol::Xml => "Xml",
            Symbol::Link => "Link",
            Symbol::Form => "Form",
            Symbol::List => "List",
            Symbol::Fun => "Function",
            Symbol::Tuple(_) => "Tuple",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn unit() -> Term {
        Term::App(Symbol::Unit, vec![])
    }

    pub fn int() -> Term {
        Term::App(Symbol::Int, vec![])
    }

    pub fn string() -> Term {
        Term::App(Symbol::String, vec![])
    }

    pub fn xml(gamma: Var) -> Term {
        Term::App(Symbol::Xml, vec![Term::Var(gamma)])
    }

    pub fn link(gamma: Var) -> Term {
        Term::App(Symbol::Link, vec![Term::Var(gamma)])
    }

    pub fn form(gamma: Var) -> Term {
        Term::App(Symbol::Form, vec![Term::Var(gamma)])
    }

    pub fn list(t: Term) -> Term {
        Term::App(Symbol::List, vec![t])
    }

    pub fn tuple(ts: Vec<Term>) -> Term {
        Term::App(Symbol::Tuple(ts.len()), ts)
    }

    pub fn fun(x: Var, arg: Term, pre: Var, result: Term, post: Var) -> Term {
        Term::App(
            Symbol::Fun,
            vec![Term::Var(x), arg, Term::Var(pre), result, Term::Var(post)],
        )
    }

    /// Kind of the term: its variable's kind, or `Type` for applications.
    pub fn kind(&self) -> VarKind {
        match self {
            Term::Var(v) => v.kind,
            Term::App(..) => VarKind::Type,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::App(..) => None,
        }
    }

    pub fn occurs(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Arity and argument kinds respected throughout, and the term itself is a type.
    pub fn is_well_formed(&self) -> bool {
        self.kind() == VarKind::Type && self.well_formed_at(VarKind::Type)
    }

    fn well_formed_at(&self, kind: VarKind) -> bool {
        match self {
            Term::Var(v) => v.kind == kind,
            Term::App(s, args) => {
                kind == VarKind::Type
                    && args.len() == s.arity()
                    && !matches!(s, Symbol::Tuple(n) if *n < 2)
                    && args
                        .iter()
                        .enumerate()
                        .all(|(i, a)| a.well_formed_at(s.arg_kind(i)))
            }
        }
    }

    /// Precondition and post-condition variables of an outermost `fun`.
    pub fn pr_ps_vars(&self) -> (BTreeSet<Var>, BTreeSet<Var>) {
        match self {
            Term::App(Symbol::Fun, args) => {
                let pick = |t: &Term| t.as_var().into_iter().cloned().collect();
                (pick(&args[2]), pick(&args[4]))
            }
            _ => (BTreeSet::new(), BTreeSet::new()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(s, args) => {
                write!(f, "{}(", s.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum UnifyError {
    #[error("cannot unify {0} with {1}")]
    Clash(Term, Term),
    #[error("{0} occurs in {1}")]
    Occurs(Var, Term),
    #[error("{kind} variable {0} cannot be bound to {1}", kind = .0.kind)]
    Kind(Var, Term),
}

/// Idempotent substitution.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    map: BTreeMap<Var, Term>,
}

impl Subst {
    /// ε
    pub fn identity() -> Subst {
        Subst::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    /// Solved-form equations `{v = θ(v)}`.
    pub fn to_eqs(&self) -> Vec<(Term, Term)> {
        self.map
            .iter()
            .map(|(v, t)| (Term::Var(v.clone()), t.clone()))
            .collect()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::App(s, args) => Term::App(*s, args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    /// Image of a variable; identifier and annotation variables always map to variables.
    pub fn apply_var(&self, v: &Var) -> Var {
        match self.map.get(v) {
            Some(Term::Var(w)) => w.clone(),
            _ => v.clone(),
        }
    }

    pub fn is_idempotent(&self) -> bool {
        self.map
            .values()
            .all(|t| t.vars().iter().all(|v| !self.map.contains_key(v)))
    }

    /// Binds `v` to `t`, where `t` is already instantiated and does not mention `v`.
    fn bind(&mut self, v: Var, t: Term) {
        let single = Subst {
            map: BTreeMap::from([(v.clone(), t.clone())]),
        };
        for range in self.map.values_mut() {
            if range.occurs(&v) {
                *range = single.apply(range);
            }
        }
        self.map.insert(v, t);
    }

    /// Extends the substitution with a most general solution of `a = b`.
    /// On failure the substitution may hold part of the solution.
    pub fn unify(&mut self, a: &Term, b: &Term) -> Result<(), UnifyError> {
        let mut work = vec![(a.clone(), b.clone())];
        while let Some((l, r)) = work.pop() {
            match (self.apply(&l), self.apply(&r)) {
                (Term::Var(x), Term::Var(y)) => {
                    if x == y {
                        continue;
                    }
                    if x.kind != y.kind {
                        return Err(UnifyError::Kind(x, Term::Var(y)));
                    }
                    let (older, newer) = if x.index <= y.index { (x, y) } else { (y, x) };
                    self.bind(newer, Term::Var(older));
                }
                (Term::Var(x), t) | (t, Term::Var(x)) => {
                    if x.kind != VarKind::Type {
                        return Err(UnifyError::Kind(x, t));
                    }
                    if t.occurs(&x) {
                        return Err(UnifyError::Occurs(x, t));
                    }
                    self.bind(x, t);
                }
                (Term::App(s1, a1), Term::App(s2, a2)) => {
                    if s1 != s2 {
                        return Err(UnifyError::Clash(Term::App(s1, a1), Term::App(s2, a2)));
                    }
                    work.extend(a1.into_iter().zip(a2).rev());
                }
            }
        }
        Ok(())
    }

    pub fn unify_all<'a>(
        &mut self,
        eqs: impl IntoIterator<Item = &'a (Term, Term)>,
    ) -> Result<(), UnifyError> {
        for (l, r) in eqs {
            self.unify(l, r)?;
        }
        Ok(())
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        f.write_str("}")
    }
}

/// Most general unifier of a set of equations.
pub fn mgu(eqs: &[(Term, Term)]) -> Result<Subst, UnifyError> {
    let mut theta = Subst::identity();
    theta.unify_all(eqs)?;
    Ok(theta)
}

/// Merges two substitutions by solving the union of their solved forms.
pub fn compose(theta1: &Subst, theta2: &Subst) -> Result<Subst, UnifyError> {
    let mut theta = theta1.clone();
    theta.unify_all(&theta2.to_eqs())?;
    Ok(theta)
}

/// Per-kind counters handing out fresh variables.
#[derive(Clone, Debug, Default)]
pub struct Fresh {
    ty: u32,
    ann: u32,
    ide: u32,
}

impl Fresh {
    pub fn new() -> Fresh {
        Fresh::default()
    }

    pub fn ty(&mut self) -> Var {
        self.ty += 1;
        Var::ty(self.ty - 1)
    }

    pub fn ann(&mut self) -> Var {
        self.ann += 1;
        Var::ann(self.ann - 1)
    }

    pub fn ide(&mut self, hint: Option<&str>) -> Var {
        self.ide += 1;
        Var::ide(self.ide - 1, hint)
    }

    pub fn next(&mut self, kind: VarKind) -> Var {
        match kind {
            VarKind::Type => self.ty(),
            VarKind::Ann => self.ann(),
            VarKind::Ide => self.ide(None),
        }
    }
}

/// Alpha-equivalence: equal up to a kind-preserving bijective renaming of variables.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, fw: &mut BTreeMap<Var, Var>, bw: &mut BTreeMap<Var, Var>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                if x.kind != y.kind {
                    return false;
                }
                match (fw.get(x), bw.get(y)) {
                    (None, None) => {
                        fw.insert(x.clone(), y.clone());
                        bw.insert(y.clone(), x.clone());
                        true
                    }
                    (Some(y2), Some(x2)) => y2 == y && x2 == x,
                    _ => false,
                }
            }
            (Term::App(s, xs), Term::App(t, ys)) => {
                s == t && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, fw, bw))
            }
            _ => false,
        }
    }
    go(a, b, &mut BTreeMap::new(), &mut BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(i: u32) -> Term {
        Term::Var(Var::ty(i))
    }

    #[test]
    fn type_variable_binds_to_int() {
        let theta = mgu(&[(tv(0), Term::int())]).unwrap();
        assert_eq!(theta.apply(&tv(0)), Term::int());
    }

    #[test]
    fn annotation_variable_rejects_constructor() {
        let err = mgu(&[(Term::Var(Var::ann(0)), Term::int())]).unwrap_err();
        assert!(matches!(err, UnifyError::Kind(..)));
    }

    #[test]
    fn xml_does_not_unify_with_link() {
        let err = mgu(&[(Term::xml(Var::ann(1)), Term::link(Var::ann(2)))]).unwrap_err();
        assert!(matches!(err, UnifyError::Clash(..)));
    }

    #[test]
    fn function_types_unify_slotwise() {
        let (x, y) = (Var::ide(0, Some("x")), Var::ide(1, Some("y")));
        let (a, b) = (Var::ty(0), Var::ty(1));
        let (g1, g2, d1, d2) = (Var::ann(0), Var::ann(1), Var::ann(2), Var::ann(3));
        let l = Term::fun(x.clone(), tv(0), g1.clone(), tv(0), g2.clone());
        let r = Term::fun(y.clone(), Term::int(), d1.clone(), tv(1), d2.clone());
        let theta = mgu(&[(l.clone(), r.clone())]).unwrap();
        assert_eq!(theta.apply(&l), theta.apply(&r));
        assert_eq!(theta.apply_var(&y), x);
        assert_eq!(theta.apply(&Term::Var(a)), Term::int());
        assert_eq!(theta.apply(&Term::Var(b)), Term::int());
        assert_eq!(theta.apply_var(&d1), g1);
        assert_eq!(theta.apply_var(&d2), g2);
        assert!(theta.is_idempotent());
    }

    #[test]
    fn occurs_check() {
        let err = mgu(&[(tv(0), Term::list(tv(0)))]).unwrap_err();
        assert!(matches!(err, UnifyError::Occurs(..)));
    }

    #[test]
    fn identifier_variable_only_meets_identifier_variables() {
        let err = mgu(&[(Term::Var(Var::ide(0, None)), Term::Var(Var::ann(0)))]).unwrap_err();
        assert!(matches!(err, UnifyError::Kind(..)));
        let err = mgu(&[(tv(0), Term::Var(Var::ann(0)))]).unwrap_err();
        assert!(matches!(err, UnifyError::Kind(..)));
    }

    #[test]
    fn apply_is_pointwise() {
        let mut theta = Subst::identity();
        theta.unify(&tv(0), &Term::int()).unwrap();
        assert_eq!(theta.apply(&Term::xml(Var::ann(0))), Term::xml(Var::ann(0)));

        let mut theta = Subst::identity();
        theta
            .unify(&Term::Var(Var::ann(0)), &Term::Var(Var::ann(5)))
            .unwrap();
        let t = Term::fun(
            Var::ide(0, None),
            tv(0),
            Var::ann(5),
            Term::int(),
            Var::ann(5),
        );
        assert_eq!(
            theta.apply(&t),
            Term::fun(
                Var::ide(0, None),
                tv(0),
                Var::ann(0),
                Term::int(),
                Var::ann(0)
            )
        );
    }

    #[test]
    fn compose_examples() {
        let theta = mgu(&[(tv(0), Term::int())]).unwrap();
        assert_eq!(compose(&Subst::identity(), &theta).unwrap(), theta);

        let t1 = mgu(&[(tv(0), Term::int())]).unwrap();
        let t2 = mgu(&[(tv(1), Term::string())]).unwrap();
        let c = compose(&t1, &t2).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.apply(&tv(1)), Term::string());

        let t1 = mgu(&[(tv(0), tv(1))]).unwrap();
        let t2 = mgu(&[(tv(1), Term::int())]).unwrap();
        let c = compose(&t1, &t2).unwrap();
        assert_eq!(c.apply(&tv(0)), Term::int());
        assert_eq!(c.apply(&tv(1)), Term::int());
        for t in [tv(0), tv(1), Term::list(tv(0)), tv(2)] {
            assert_eq!(c.apply(&t), c.apply(&t1.apply(&t)));
            assert_eq!(c.apply(&t), c.apply(&t2.apply(&t)));
        }

        let t2 = mgu(&[(tv(0), Term::string())]).unwrap();
        assert!(compose(&mgu(&[(tv(0), Term::int())]).unwrap(), &t2).is_err());
    }

    #[test]
    fn older_variable_wins() {
        let theta = mgu(&[(tv(3), tv(1))]).unwrap();
        assert_eq!(theta.apply(&tv(3)), tv(1));
        let theta = mgu(&[(tv(1), tv(3))]).unwrap();
        assert_eq!(theta.apply(&tv(3)), tv(1));
    }

    #[test]
    fn rendering() {
        let t = Term::fun(
            Var::ide(0, Some("value")),
            Term::int(),
            Var::ann(0),
            Term::xml(Var::ann(4)),
            Var::ann(1),
        );
        assert_eq!(
            t.to_string(),
            "Function(_#value#var0_, Integer(), _annvar0_, Xml(_annvar4_), _annvar1_)"
        );
        assert_eq!(tv(7).to_string(), "_typevar7_");
    }

    #[test]
    fn well_formedness() {
        assert!(Term::xml(Var::ann(0)).is_well_formed());
        assert!(!Term::App(Symbol::Xml, vec![tv(0)]).is_well_formed());
        assert!(!Term::App(Symbol::Fun, vec![tv(0); 5]).is_well_formed());
        assert!(!Term::Var(Var::ann(0)).is_well_formed());
    }

    #[test]
    fn pr_ps_vars_takes_outermost_slots() {
        let inner = Term::fun(
            Var::ide(1, None),
            tv(1),
            Var::ann(2),
            Term::unit(),
            Var::ann(3),
        );
        let t = Term::fun(
            Var::ide(0, None),
            Term::int(),
            Var::ann(0),
            inner,
            Var::ann(1),
        );
        let (pre, post) = t.pr_ps_vars();
        assert_eq!(pre, BTreeSet::from([Var::ann(0)]));
        assert_eq!(post, BTreeSet::from([Var::ann(1)]));
        assert!(Term::xml(Var::ann(0)).pr_ps_vars().0.is_empty());
    }

    #[test]
    fn alpha_equivalence() {
        assert!(alpha_eq(&Term::list(tv(0)), &Term::list(tv(9))));
        assert!(!alpha_eq(
            &Term::tuple(vec![tv(0), tv(0)]),
            &Term::tuple(vec![tv(1), tv(2)])
        ));
        assert!(!alpha_eq(&Term::xml(Var::ann(0)), &Term::link(Var::ann(0))));
    }

    #[test]
    fn fresh_counters_are_per_kind() {
        let mut fresh = Fresh::new();
        assert_eq!(fresh.ty(), Var::ty(0));
        assert_eq!(fresh.ann(), Var::ann(0));
        assert_eq!(fresh.ann(), Var::ann(1));
        assert_eq!(fresh.ide(Some("x")).to_string(), "_#x#var0_");
    }
}
