//! Types-and-effects analysis as an abstract interpretation of the concrete
//! semantics, with separate `link` and `form` types.

mod domain;
mod semantics;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

pub use domain::{
    apply_env, cb, check, eenv_to_tpred, env_delta, incl, AbsDval, AbsEventEnv, Constr, EnvDelta,
    TPred,
};
pub use semantics::{join_envs, AResult, AbsValue, Analyzer, Scope};

use crate::eenv::Mark;
use crate::frontend::Expr;
use crate::terms::{Symbol, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    TypeClash,
    UnmetPrecondition,
    BadEventValue,
    NotXml,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::TypeClash => "type-clash",
            Reason::UnmetPrecondition => "unmet-precondition",
            Reason::BadEventValue => "bad-event-value",
            Reason::NotXml => "not-xml",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The bottom abstract value, with the reason it was reached.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct AnalysisError {
    pub reason: Reason,
    pub message: String,
}

impl AnalysisError {
    pub fn new(reason: Reason, message: impl Into<String>) -> Self {
        AnalysisError {
            reason,
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Safe,
    Unsafe,
}

/// Result of analysing a program that did not reach `Error`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summary {
    pub ty: Term,
    pub dval: AbsDval,
    pub constr: Constr,
    pub corr: TPred,
    pub events: AbsEventEnv,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(type - : {} {} {} {}, {})",
            self.ty, self.dval, self.constr, self.corr, self.events
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisReport {
    pub verdict: Verdict,
    pub reason: Option<Reason>,
    /// Why the verdict is unsafe.
    pub message: Option<String>,
    /// `None` when the analysis reached `Error`.
    pub summary: Option<Summary>,
}

impl AnalysisReport {
    pub fn is_safe(&self) -> bool {
        self.verdict == Verdict::Safe
    }

    /// No `Error` and no undischarged assertion: enough for a Wrong-free run
    /// whatever the type of the result.
    pub fn effects_safe(&self) -> bool {
        self.summary
            .as_ref()
            .is_some_and(|s| s.events.iter().all(|(_, (_, m))| *m != Mark::A))
    }

    pub fn view(&self) -> ReportView {
        let s = self.summary.as_ref();
        ReportView {
            verdict: self.verdict,
            reason: self.reason,
            message: self.message.clone(),
            ty: s.map(|s| s.ty.to_string()),
            dval: s.map(|s| s.dval.to_string()),
            constraints: s
                .map(|s| {
                    s.constr
                        .iter()
                        .map(|(v, q)| [v.to_string(), q.clone()])
                        .collect()
                })
                .unwrap_or_default(),
            correspondence: s
                .map(|s| {
                    s.corr
                        .iter()
                        .map(|(q, d)| (q.clone(), d.to_string()))
                        .collect()
                })
                .unwrap_or_default(),
            events: s
                .map(|s| {
                    s.events
                        .iter()
                        .map(|(q, (d, m))| (q.clone(), (d.to_string(), m.to_string())))
                        .collect()
                })
                .unwrap_or_default(),
        }
    }
}

/// `(type - : <type> <dval> [<constraints>] {<correspondence>}, {<events>})`,
/// or `Exception: No_type "<message>"` when the analysis reached `Error`.
impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.summary, &self.message) {
            (Some(s), _) => write!(f, "{s}"),
            (None, Some(m)) => write!(f, "Exception: No_type {m:?}"),
            (None, None) => f.write_str("Exception: No_type"),
        }
    }
}

/// Serialisable form of a report with every term rendered as text.
#[derive(Clone, Debug, Serialize)]
pub struct ReportView {
    pub verdict: Verdict,
    pub reason: Option<Reason>,
    pub message: Option<String>,
    #[serde(rename = "type")]
    pub ty: Option<String>,
    pub dval: Option<String>,
    pub constraints: Vec<[String; 2]>,
    pub correspondence: BTreeMap<String, String>,
    pub events: BTreeMap<String, (String, String)>,
}

impl Analyzer {
    /// `⟦E⟧ ∅ φ` on a closed expression, for callers that supply their own
    /// events environment.
    pub fn analyze_in(&mut self, e: &Expr, phi: &AbsEventEnv) -> AResult<(AbsValue, AbsEventEnv)> {
        self.reset_run();
        let (v, phi1) = self.aexp(e, &Scope::empty(), phi)?;
        Ok((v.apply(&self.subst), phi1))
    }

    /// Top-level judgment: no requirement on the environment, and an XML result
    /// without pending requirements.
    pub fn analyze(&mut self, program: &Expr) -> AnalysisReport {
        let (v, phi) = match self.analyze_in(program, &AbsEventEnv::empty()) {
            Ok(r) => r,
            Err(e) => {
                return AnalysisReport {
                    verdict: Verdict::Unsafe,
                    reason: Some(e.reason),
                    message: Some(e.message),
                    summary: None,
                }
            }
        };
        let summary = Summary {
            ty: v.ty.clone(),
            dval: v.dval.clone(),
            constr: v.constr.clone(),
            corr: v.corr.clone(),
            events: apply_env(&phi, &self.subst),
        };
        let unsafe_because = |reason, message: String| AnalysisReport {
            verdict: Verdict::Unsafe,
            reason: Some(reason),
            message: Some(message),
            summary: Some(summary.clone()),
        };
        if let Some((q, _)) = summary.events.iter().find(|(_, (_, m))| *m == Mark::A) {
            return unsafe_because(
                Reason::UnmetPrecondition,
                format!("assertion on {q} is not preceded by its event"),
            );
        }
        // Structural check: an unresolved type variable is not known to be a page.
        let ty = self.subst.apply(&v.ty);
        if !matches!(&ty, Term::App(Symbol::Xml, _)) {
            return unsafe_because(Reason::NotXml, format!("result type {ty} is not xml"));
        }
        let ty_vars = ty.vars();
        if let Some((_, q)) = v
            .constr
            .apply(&self.subst)
            .iter()
            .find(|(g, _)| ty_vars.contains(g))
        {
            return unsafe_because(
                Reason::UnmetPrecondition,
                format!("result still requires {q}"),
            );
        }
        AnalysisReport {
            verdict: Verdict::Safe,
            reason: None,
            message: None,
            summary: Some(summary),
        }
    }
}

/// Analyses a closed program with a fresh analyser.
pub fn analyze(program: &Expr) -> AnalysisReport {
    Analyzer::new().analyze(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, Value};
    use crate::terms::{alpha_eq, Var};

    fn report(src: &str) -> AnalysisReport {
        analyze(&parse(src).unwrap())
    }

    fn n(k: i64) -> AbsDval {
        AbsDval::NInt(k)
    }

    #[test]
    fn get_of_text_is_a_type_clash() {
        let r = report(r#"get(Text("Hello!"))"#);
        assert_eq!(r.verdict, Verdict::Unsafe);
        assert_eq!(r.reason, Some(Reason::TypeClash));
        assert!(r.summary.is_none());
    }

    #[test]
    fn get_of_href_is_safe_xml() {
        let r = report(r#"get(href(Text("x")))"#);
        assert!(r.is_safe(), "{r}");
        let s = r.summary.unwrap();
        assert!(alpha_eq(&s.ty, &Term::xml(Var::ann(0))));
        assert!(s.events.is_empty());
        assert!(s.constr.is_empty());
    }

    #[test]
    fn href_of_text() {
        let mut a = Analyzer::new();
        let e = parse(r#"href(Text("h"))"#).unwrap();
        let (v, phi) = a.analyze_in(&e, &AbsEventEnv::empty()).unwrap();
        assert!(alpha_eq(&v.ty, &Term::link(Var::ann(0))));
        assert_eq!(v.dval, AbsDval::NoDval);
        assert!(v.constr.is_empty() && v.corr.is_empty() && phi.is_empty());
    }

    #[test]
    fn href_with_event_is_rejected() {
        let r = report("href(event p(1))");
        assert!(r.summary.is_none());
    }

    #[test]
    fn nested_href_is_rejected() {
        let r = report(r#"href(href(Text("Hello")))"#);
        assert_eq!(r.verdict, Verdict::Unsafe);
        assert_eq!(r.reason, Some(Reason::NotXml));
    }

    #[test]
    fn assert_registers_a_precondition() {
        let mut a = Analyzer::new();
        let (v, phi) = a
            .analyze_in(&Expr::assert("q", Value::num(3)), &AbsEventEnv::empty())
            .unwrap();
        assert_eq!(v.ty, Term::unit());
        assert_eq!(phi, AbsEventEnv::empty().bind("q", n(3), Mark::A));
        assert_eq!(
            report("assert q(3)").reason,
            Some(Reason::UnmetPrecondition)
        );
    }

    #[test]
    fn event_then_assert_is_effect_safe() {
        let r = report("var _ = event p(1); var _ = assert p(1); Text(\"ok\")");
        assert!(r.is_safe(), "{r}");
        assert_eq!(r.summary.unwrap().events.to_string(), "{p -> (1, EA)}");
    }

    #[test]
    fn conflicting_events_are_rejected() {
        assert_eq!(
            report("var _ = event p(1); event p(2)").reason,
            Some(Reason::BadEventValue)
        );
        assert_eq!(
            report("var _ = event p(1); assert p(2)").reason,
            Some(Reason::BadEventValue)
        );
    }

    #[test]
    fn event_needs_specific_value() {
        assert_eq!(
            report(r#"event p("a")"#).reason,
            Some(Reason::BadEventValue)
        );
        // folded arithmetic keeps the value known
        assert_eq!(
            report("var n = 1 + 1; event p(n)").reason,
            Some(Reason::NotXml)
        );
        assert_eq!(
            report("var f = fun (y) { var n = y + 1; event p(n) }; Text(\"a\")").reason,
            Some(Reason::BadEventValue)
        );
    }

    #[test]
    fn precondition_of_link_is_checked_at_get() {
        let ok = r#"var l = href(var _ = assert p(1); Text("a")); var _ = event p(1); get(l)"#;
        assert!(report(ok).is_safe());
        let bad = r#"var l = href(var _ = assert p(1); Text("a")); get(l)"#;
        let r = report(bad);
        assert_eq!(r.reason, Some(Reason::UnmetPrecondition));
        assert_eq!(r.message.as_deref(), Some("get: no preconditions"));
        let wrong_value =
            r#"var l = href(var _ = assert p(1); Text("a")); var _ = event p(0); get(l)"#;
        assert!(!report(wrong_value).is_safe());
    }

    #[test]
    fn form_and_post() {
        let ok = r#"post({a = "x"}, form([a], Text(a)))"#;
        assert!(report(ok).is_safe(), "{}", report(ok));
        assert_eq!(
            report(r#"post({a = 1}, form([a], Text(a)))"#).reason,
            Some(Reason::TypeClash)
        );
        assert_eq!(
            report(r#"get(form([a], Text(a)))"#).reason,
            Some(Reason::TypeClash)
        );
        assert_eq!(
            report(r#"post({}, href(Text("a")))"#).reason,
            Some(Reason::TypeClash)
        );
    }

    #[test]
    fn function_post_conditions_flow_to_the_caller() {
        let src =
            r#"var f = fun (x) { event p(x) }; var _ = f(1); var _ = assert p(1); Text("ok")"#;
        assert!(report(src).is_safe(), "{}", report(src));
        let src =
            r#"var f = fun (x) { event p(x) }; var _ = f(1); var _ = assert p(2); Text("ok")"#;
        assert!(!report(src).is_safe());
    }

    #[test]
    fn higher_order_preconditions_are_not_lost() {
        let src = r#"var g = fun (k) { k(1) };
                     var needs = fun (y) { var _ = assert p(y); Text("a") };
                     g(needs)"#;
        assert!(!report(src).is_safe());
        let src = r#"var h = fun (l) { get(l) };
                     var l = href(var _ = assert p(1); Text("a"));
                     h(l)"#;
        assert!(!report(src).is_safe());
    }

    #[test]
    fn reusing_a_curried_function() {
        let src = r#"fun buy(value, dbpass) { var _ = assert PriceIs(value); Text("Hello") }
                     var _ = event PriceIs(5);
                     var _ = event Other(6);
                     var _ = buy(5, "a");
                     buy(5, "b")"#;
        let r = report(src);
        assert!(r.is_safe(), "{r}");
    }

    #[test]
    fn switch_join_poisons_one_sided_events() {
        let src = r#"var _ = switch (1) { case 0 -> { event p(1) } _ -> { Unit } }; assert p(1)"#;
        assert!(!report(src).is_safe());
        let src = r#"var _ = switch (1) { case 0 -> { event p(1) } _ -> { event p(1) } };
                     var _ = assert p(1); Text("x")"#;
        assert!(report(src).is_safe());
    }

    #[test]
    fn join_envs_cases() {
        let a = AbsEventEnv::empty()
            .bind("p", n(1), Mark::E)
            .bind("r", n(1), Mark::A);
        let b = AbsEventEnv::empty()
            .bind("p", n(2), Mark::EA)
            .bind("q", n(3), Mark::E);
        let j = join_envs(&a, &b);
        assert_eq!(j.get("p"), Some(&(AbsDval::Top, Mark::E)));
        assert_eq!(j.get("q"), Some(&(AbsDval::Top, Mark::E)));
        assert_eq!(j.get("r"), Some(&(n(1), Mark::A)));
    }

    #[test]
    fn division() {
        assert!(report("var x = 4 / 2; Text(\"a\")").is_safe());
        assert!(!report("var x = 4 / 0; Text(\"a\")").is_safe());
        assert!(!report("var f = fun (y) { 4 / y }; Text(\"a\")").is_safe());
    }

    #[test]
    fn unbound_identifier() {
        assert_eq!(report("x").reason, Some(Reason::TypeClash));
    }

    #[test]
    fn lambda_packaging() {
        let mut a = Analyzer::new();
        let e = parse("fun (x) { var _ = assert p(x); event q(1) }").unwrap();
        let (v, _) = a.analyze_in(&e, &AbsEventEnv::empty()).unwrap();
        let (pre, post) = v.ty.pr_ps_vars();
        let pre = pre.into_iter().next().unwrap();
        let post = post.into_iter().next().unwrap();
        assert!(v.constr.contains(&pre, "p"));
        assert!(v.constr.contains(&post, "q"));
        assert_eq!(v.corr.get("q"), Some(&n(1)));
        assert!(matches!(v.corr.get("p"), Some(AbsDval::VarD(_))));
    }

    #[test]
    fn report_view_serialises() {
        let r = report(r#"var _ = event p(1); Text("a")"#);
        let v = r.view();
        assert_eq!(v.events.get("p"), Some(&("1".to_string(), "E".to_string())));
        assert_eq!(v.verdict, Verdict::Safe);
    }
}
