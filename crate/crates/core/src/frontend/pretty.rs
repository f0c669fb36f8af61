//! Surface-syntax printer. `parse(&pretty(e)) == e` for every well-formed AST.

use std::fmt::Write;

use super::ast::*;

pub fn pretty(e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, e);
    out
}

pub fn pretty_value(v: &Value) -> String {
    let mut out = String::new();
    value(&mut out, v);
    out
}

pub fn escape_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn comma_sep<T>(out: &mut String, items: &[T], mut f: impl FnMut(&mut String, &T)) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        f(out, item);
    }
}

fn value(out: &mut String, v: &Value) {
    match v {
        Value::Var(x) => out.push_str(x),
        Value::Con(Constructor::Num(n), _) => {
            let _ = write!(out, "{n}");
        }
        Value::Con(Constructor::Str(s), _) => out.push_str(&escape_str(s)),
        Value::Con(c, args) => {
            out.push_str(c.keyword().expect("keyword constructor"));
            if !args.is_empty() {
                out.push('(');
                comma_sep(out, args, value);
                out.push(')');
            }
        }
        Value::Href(e) => {
            out.push_str("href(");
            expr(out, e);
            out.push(')');
        }
        Value::Lambda(x, body) => {
            let _ = write!(out, "fun ({x}) {{ ");
            expr(out, body);
            out.push_str(" }");
        }
        Value::Form(labels, e) => {
            out.push_str("form([");
            comma_sep(out, labels, |o, l| o.push_str(l));
            out.push_str("], ");
            expr(out, e);
            out.push(')');
        }
    }
}

fn event(out: &mut String, kw: &str, ev: &Event) {
    let _ = write!(out, "{kw} {}(", ev.pred);
    value(out, &ev.arg);
    out.push(')');
}

/// Operand of a binary operator; `var` and lower-precedence operators need parentheses.
fn operand(out: &mut String, e: &Expr, min_prec: u8) {
    let needs_parens = match e {
        Expr::Let(..) => true,
        Expr::Prim(op, ..) => op.precedence() < min_prec,
        _ => false,
    };
    if needs_parens {
        out.push('(');
        expr(out, e);
        out.push(')');
    } else {
        expr(out, e);
    }
}

fn expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Val(v) => value(out, v),
        Expr::Let(x, rhs, body) => {
            let _ = write!(out, "var {x} = ");
            if matches!(**rhs, Expr::Let(..)) {
                out.push('(');
                expr(out, rhs);
                out.push(')');
            } else {
                expr(out, rhs);
            }
            out.push_str("; ");
            expr(out, body);
        }
        Expr::Prim(op, a, b) => {
            operand(out, a, op.precedence());
            let _ = write!(out, " {op} ");
            operand(out, b, op.precedence() + 1);
        }
        Expr::App(u, v) => {
            value(out, u);
            out.push('(');
            value(out, v);
            out.push(')');
        }
        Expr::Post(fields, target) => {
            out.push_str("post({");
            comma_sep(out, fields, |o, (l, v)| {
                let _ = write!(o, "{l} = ");
                value(o, v);
            });
            out.push_str("}, ");
            value(out, target);
            out.push(')');
        }
        Expr::Get(v) => {
            out.push_str("get(");
            value(out, v);
            out.push(')');
        }
        Expr::EventAnn(ev) => event(out, "event", ev),
        Expr::AssertAnn(ev) => event(out, "assert", ev),
        Expr::Switch {
            scrutinee,
            pattern,
            binders,
            matched,
            otherwise,
        } => {
            out.push_str("switch (");
            value(out, scrutinee);
            out.push_str(") { case ");
            match pattern {
                Constructor::Num(n) => {
                    let _ = write!(out, "{n}");
                }
                Constructor::Str(s) => out.push_str(&escape_str(s)),
                c => {
                    out.push_str(c.keyword().expect("keyword constructor"));
                    if !binders.is_empty() {
                        out.push('(');
                        comma_sep(out, binders, |o, b| o.push_str(b));
                        out.push(')');
                    }
                }
            }
            out.push_str(" -> { ");
            expr(out, matched);
            out.push_str(" } _ -> { ");
            expr(out, otherwise);
            out.push_str(" } }");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn renders_get_and_lambda() {
        assert_eq!(
            pretty(&Expr::Get(Value::text(Value::str("x")))),
            r#"get(Text("x"))"#
        );
        assert_eq!(
            pretty(&Expr::Val(Value::lambda("x", Expr::Val(Value::var("x"))))),
            "fun (x) { x }"
        );
    }

    #[test]
    fn parenthesises_nested_operators() {
        let one = || Expr::Val(Value::num(1));
        let e = Expr::prim(
            PrimOp::Sub,
            one(),
            Expr::prim(PrimOp::Sub, one(), Expr::let_("x", one(), one())),
        );
        let s = pretty(&e);
        assert_eq!(s, "1 - (1 - (var x = 1; 1))");
        assert_eq!(parse(&s).unwrap(), e);
    }

    #[test]
    fn strings_round_trip_with_escapes() {
        let e = Expr::Val(Value::str("a\"b\\c\nd"));
        assert_eq!(parse(&pretty(&e)).unwrap(), e);
    }

    #[test]
    fn let_in_rhs_position() {
        let one = || Expr::Val(Value::num(1));
        let e = Expr::let_(
            "x",
            Expr::let_("y", one(), one()),
            Expr::Val(Value::var("x")),
        );
        assert_eq!(parse(&pretty(&e)).unwrap(), e);
    }

    #[test]
    fn application_of_non_variable_callee() {
        let e = Expr::App(
            Value::lambda("x", Expr::Val(Value::var("x"))),
            Value::href(Expr::Val(Value::num(0))),
        );
        assert_eq!(parse(&pretty(&e)).unwrap(), e);
    }
}
