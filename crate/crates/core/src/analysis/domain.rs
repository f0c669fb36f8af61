//! Abstract denotable values, constraint sets and correspondence functions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::eenv::{EventEnv, Mark};
use crate::terms::{Subst, Var};

/// Abstraction of a denotable value. Flat lattice: `NoDval` below the
/// specific values, `Top` above them.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AbsDval {
    NoDval,
    NInt(i64),
    /// The value bound to a function parameter, named by its identifier variable.
    VarD(Var),
    Top,
}

impl AbsDval {
    /// Meet under the dual order used by correspondence functions.
    pub fn meet(&self, other: &AbsDval) -> AbsDval {
        match (self, other) {
            (AbsDval::NoDval, d) | (d, AbsDval::NoDval) => d.clone(),
            (a, b) if a == b => a.clone(),
            _ => AbsDval::Top,
        }
    }

    /// `NInt` or `VarD`: the only values an event may carry.
    pub fn is_specific(&self) -> bool {
        matches!(self, AbsDval::NInt(_) | AbsDval::VarD(_))
    }

    pub fn apply(&self, theta: &Subst) -> AbsDval {
        match self {
            AbsDval::VarD(x) => AbsDval::VarD(theta.apply_var(x)),
            d => d.clone(),
        }
    }
}

impl fmt::Display for AbsDval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbsDval::NoDval => f.write_str("No_dval"),
            AbsDval::NInt(n) => write!(f, "{n}"),
            AbsDval::VarD(x) => write!(f, "{x}"),
            AbsDval::Top => f.write_str("Unknown"),
        }
    }
}

pub type AbsEventEnv = EventEnv<AbsDval>;

pub fn apply_env(phi: &AbsEventEnv, theta: &Subst) -> AbsEventEnv {
    if theta.is_empty() {
        return phi.clone();
    }
    phi.map_values(|d| d.apply(theta))
}

/// Set of (annotation variable, predicate) pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Constr(BTreeSet<(Var, String)>);

impl Constr {
    pub fn empty() -> Constr {
        Constr::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, String)>) -> Constr {
        Constr(pairs.into_iter().collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Var, String)> {
        self.0.iter()
    }

    pub fn contains(&self, v: &Var, pred: &str) -> bool {
        self.0.iter().any(|(w, q)| w == v && q == pred)
    }

    pub fn preds(&self) -> BTreeSet<String> {
        self.0.iter().map(|(_, q)| q.clone()).collect()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.0.iter().map(|(v, _)| v.clone()).collect()
    }

    pub fn union(&self, other: &Constr) -> Constr {
        Constr(self.0.union(&other.0).cloned().collect())
    }

    pub fn minus(&self, other: &Constr) -> Constr {
        Constr(self.0.difference(&other.0).cloned().collect())
    }

    /// Pairs whose variable is in `vars`.
    pub fn on_vars(&self, vars: &BTreeSet<Var>) -> Constr {
        Constr(
            self.0
                .iter()
                .filter(|(v, _)| vars.contains(v))
                .cloned()
                .collect(),
        )
    }

    /// `θ(C)`
    pub fn apply(&self, theta: &Subst) -> Constr {
        if theta.is_empty() {
            return self.clone();
        }
        Constr(
            self.0
                .iter()
                .map(|(v, q)| (theta.apply_var(v), q.clone()))
                .collect(),
        )
    }
}

impl FromIterator<(Var, String)> for Constr {
    fn from_iter<I: IntoIterator<Item = (Var, String)>>(iter: I) -> Self {
        Constr::from_pairs(iter)
    }
}

/// Renders as `[(_annvar2_,PriceIs), ...]`, ordered by variable index.
impl fmt::Display for Constr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (v, q)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({v},{q})")?;
        }
        f.write_str("]")
    }
}

/// Correspondence function from predicates to abstract values. The empty map is ζ.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TPred(BTreeMap<String, AbsDval>);

impl TPred {
    /// ζ
    pub fn zeta() -> TPred {
        TPred::default()
    }

    pub fn get(&self, pred: &str) -> Option<&AbsDval> {
        self.0.get(pred)
    }

    pub fn insert(&mut self, pred: &str, d: AbsDval) {
        self.0.insert(pred.to_string(), d);
    }

    pub fn with(mut self, pred: &str, d: AbsDval) -> TPred {
        self.insert(pred, d);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &AbsDval)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Binary glb: absent is the unit, conflicting bindings meet pointwise.
    pub fn meet(&self, other: &TPred) -> TPred {
        let mut out = self.clone();
        for (q, d) in &other.0 {
            let merged = match out.0.get(q) {
                Some(e) => e.meet(d),
                None => d.clone(),
            };
            out.0.insert(q.clone(), merged);
        }
        out
    }

    /// `f ↓ C`: drop the predicates occurring in `C`.
    pub fn restrict_out(&self, c: &Constr) -> TPred {
        self.without_preds(&c.preds())
    }

    /// `f <- C`: keep only the predicates occurring in `C`.
    pub fn restrict_in(&self, c: &Constr) -> TPred {
        let keep = c.preds();
        TPred(
            self.0
                .iter()
                .filter(|(q, _)| keep.contains(*q))
                .map(|(q, d)| (q.clone(), d.clone()))
                .collect(),
        )
    }

    pub fn without_preds(&self, drop: &BTreeSet<String>) -> TPred {
        TPred(
            self.0
                .iter()
                .filter(|(q, _)| !drop.contains(*q))
                .map(|(q, d)| (q.clone(), d.clone()))
                .collect(),
        )
    }

    /// `f[x, d]`: rebind every predicate bound to `VarD(x)`.
    pub fn bind_param(&self, x: &Var, d: &AbsDval) -> TPred {
        TPred(
            self.0
                .iter()
                .map(|(q, e)| {
                    let e = match e {
                        AbsDval::VarD(y) if y == x => d.clone(),
                        e => e.clone(),
                    };
                    (q.clone(), e)
                })
                .collect(),
        )
    }

    /// `θ(f)`
    pub fn apply(&self, theta: &Subst) -> TPred {
        if theta.is_empty() {
            return self.clone();
        }
        TPred(
            self.0
                .iter()
                .map(|(q, d)| (q.clone(), d.apply(theta)))
                .collect(),
        )
    }
}

impl FromIterator<(String, AbsDval)> for TPred {
    fn from_iter<I: IntoIterator<Item = (String, AbsDval)>>(iter: I) -> Self {
        TPred(iter.into_iter().collect())
    }
}

impl fmt::Display for TPred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (q, d)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{q} -> {d}")?;
        }
        f.write_str("}")
    }
}

/// `cb`: glb of a set of correspondence functions.
pub fn cb<'a>(fs: impl IntoIterator<Item = &'a TPred>) -> TPred {
    fs.into_iter().fold(TPred::zeta(), |acc, f| acc.meet(f))
}

/// True iff every event required by `f` has occurred in `phi` with exactly
/// the required value. `Top` and `NoDval` requirements are never met.
pub fn check(f: &TPred, phi: &AbsEventEnv) -> bool {
    f.iter().all(|(q, d)| {
        d.is_specific() && matches!(phi.get(q), Some((e, m)) if e == d && m.occurred())
    })
}

/// Differences between two events environments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnvDelta {
    /// Predicates newly marked asserted-only.
    pub asserted: BTreeSet<String>,
    /// Predicates newly marked occurred.
    pub evented: BTreeSet<String>,
    /// Bindings of the newer environment that are new or changed.
    pub diff: AbsEventEnv,
}

/// `env_delta(φ₂, φ₁)` compares the newer `phi2` against the older `phi1`.
pub fn env_delta(phi2: &AbsEventEnv, phi1: &AbsEventEnv) -> EnvDelta {
    let mut delta = EnvDelta::default();
    for (q, (d, m)) in phi2.iter() {
        let before = phi1.get(q);
        if before == Some(&(d.clone(), *m)) {
            continue;
        }
        delta.diff.insert(q, d.clone(), *m);
        let was_occurred = before.is_some_and(|(_, m)| m.occurred());
        let was_asserted_only = before.is_some_and(|(_, m)| *m == Mark::A);
        if *m == Mark::A && !was_asserted_only {
            delta.asserted.insert(q.clone());
        }
        if m.occurred() && !was_occurred {
            delta.evented.insert(q.clone());
        }
    }
    delta
}

/// Forgets the marks.
pub fn eenv_to_tpred(phi: &AbsEventEnv) -> TPred {
    phi.iter()
        .map(|(q, (d, _))| (q.clone(), d.clone()))
        .collect()
}

/// Post-condition events become occurred: `φ[q ↦ (f q, E)]` for each `q` in `f`.
pub fn incl(phi: &AbsEventEnv, f: &TPred) -> AbsEventEnv {
    let mut out = phi.clone();
    for (q, d) in f.iter() {
        out.insert(q, d.clone(), Mark::E);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(k: i64) -> AbsDval {
        AbsDval::NInt(k)
    }

    fn tp(entries: &[(&str, AbsDval)]) -> TPred {
        entries
            .iter()
            .map(|(q, d)| (q.to_string(), d.clone()))
            .collect()
    }

    fn env(entries: &[(&str, AbsDval, Mark)]) -> AbsEventEnv {
        entries
            .iter()
            .map(|(q, d, m)| (q.to_string(), (d.clone(), *m)))
            .collect()
    }

    #[test]
    fn cb_examples() {
        let f = tp(&[("p", n(1))]);
        assert_eq!(cb([&f, &TPred::zeta()]), f);
        let x = AbsDval::VarD(Var::ide(0, Some("x")));
        assert_eq!(
            cb([&f, &tp(&[("q", x.clone())])]),
            tp(&[("p", n(1)), ("q", x)])
        );
        assert_eq!(cb([&f, &tp(&[("p", n(2))])]), tp(&[("p", AbsDval::Top)]));
        assert_eq!(cb([&f, &tp(&[("p", AbsDval::NoDval)])]), f);
    }

    #[test]
    fn restrictions() {
        let f = tp(&[("p", n(1)), ("q", n(2))]);
        let c = Constr::from_pairs([(Var::ann(0), "p".to_string())]);
        assert_eq!(f.restrict_out(&c), tp(&[("q", n(2))]));
        assert_eq!(f.restrict_in(&c), tp(&[("p", n(1))]));
        assert_eq!(f.restrict_out(&Constr::empty()), f);
        assert_eq!(f.restrict_in(&Constr::empty()), TPred::zeta());
        assert_eq!(TPred::zeta().restrict_out(&c), TPred::zeta());
    }

    #[test]
    fn bind_param_examples() {
        let x = Var::ide(0, Some("x"));
        assert_eq!(
            tp(&[("p", AbsDval::VarD(x.clone()))]).bind_param(&x, &n(5)),
            tp(&[("p", n(5))])
        );
        assert_eq!(tp(&[("p", n(1))]).bind_param(&x, &n(5)), tp(&[("p", n(1))]));
        assert_eq!(TPred::zeta().bind_param(&x, &n(5)), TPred::zeta());
    }

    #[test]
    fn check_examples() {
        assert!(check(&TPred::zeta(), &env(&[("p", n(3), Mark::A)])));
        assert!(check(&tp(&[("p", n(1))]), &env(&[("p", n(1), Mark::E)])));
        assert!(check(&tp(&[("p", n(1))]), &env(&[("p", n(1), Mark::EA)])));
        assert!(!check(&tp(&[("p", n(1))]), &env(&[("p", n(1), Mark::A)])));
        assert!(!check(&tp(&[("p", n(1))]), &env(&[("p", n(2), Mark::E)])));
        assert!(!check(&tp(&[("p", n(1))]), &AbsEventEnv::empty()));
        assert!(!check(
            &tp(&[("p", AbsDval::Top)]),
            &env(&[("p", AbsDval::Top, Mark::E)])
        ));
    }

    #[test]
    fn env_delta_examples() {
        let phi = env(&[("p", n(1), Mark::E)]);
        assert_eq!(env_delta(&phi, &phi), EnvDelta::default());
        let d = env_delta(&phi, &AbsEventEnv::empty());
        assert!(d.asserted.is_empty());
        assert_eq!(d.evented, BTreeSet::from(["p".to_string()]));
        assert_eq!(d.diff, phi);
        let phi_a = env(&[("p", n(1), Mark::A)]);
        let d = env_delta(&phi_a, &AbsEventEnv::empty());
        assert_eq!(d.asserted, BTreeSet::from(["p".to_string()]));
        assert!(d.evented.is_empty());
        // asserting an occurred event is neither new assertion nor new event
        let d = env_delta(&env(&[("p", n(1), Mark::EA)]), &phi);
        assert!(d.asserted.is_empty() && d.evented.is_empty());
        assert_eq!(d.diff.len(), 1);
    }

    #[test]
    fn eenv_to_tpred_drops_marks() {
        assert_eq!(eenv_to_tpred(&AbsEventEnv::empty()), TPred::zeta());
        let x = AbsDval::VarD(Var::ide(2, None));
        assert_eq!(
            eenv_to_tpred(&env(&[("p", n(1), Mark::E), ("q", x.clone(), Mark::A)])),
            tp(&[("p", n(1)), ("q", x)])
        );
    }

    #[test]
    fn incl_examples() {
        let phi = env(&[("p", n(2), Mark::A)]);
        assert_eq!(incl(&phi, &TPred::zeta()), phi);
        assert_eq!(
            incl(&AbsEventEnv::empty(), &tp(&[("p", n(1))])),
            env(&[("p", n(1), Mark::E)])
        );
        assert_eq!(
            incl(&phi, &tp(&[("p", n(2))])),
            env(&[("p", n(2), Mark::E)])
        );
    }

    #[test]
    fn rendering() {
        let x = Var::ide(0, Some("value"));
        let c = Constr::from_pairs([(Var::ann(2), "PriceIs".to_string())]);
        assert_eq!(c.to_string(), "[(_annvar2_,PriceIs)]");
        assert_eq!(
            tp(&[("PriceIs", AbsDval::VarD(x))]).to_string(),
            "{PriceIs -> _#value#var0_}"
        );
        assert_eq!(AbsDval::Top.to_string(), "Unknown");
        assert_eq!(AbsDval::NoDval.to_string(), "No_dval");
    }
}
