use std::collections::BTreeSet;

use super::ast::*;
use super::lexer::{tokenize, Spanned, Tok};
use super::ParseError;

/// Words that cannot be used as variables, labels or predicates.
pub const KEYWORDS: &[&str] = &[
    "var", "fun", "get", "post", "event", "assert", "switch", "case", "href", "form", "Unit",
    "Zero", "Succ", "Nil", "Cons", "Tuple", "Elem", "Text",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

fn constructor_for(word: &str) -> Option<Constructor> {
    Some(match word {
        "Unit" => Constructor::Unit,
        "Zero" => Constructor::Zero,
        "Succ" => Constructor::Succ,
        "Nil" => Constructor::Nil,
        "Cons" => Constructor::Cons,
        "Tuple" => Constructor::Tuple(0),
        "Elem" => Constructor::Elem,
        "Text" => Constructor::Text,
        _ => return None,
    })
}

/// Parses a complete TinyLinks program.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(source)?;
    let used: BTreeSet<String> = toks
        .iter()
        .filter_map(|t| match &t.tok {
            Tok::Ident(s) => Some(s.clone()),
            _ => None,
        })
        .collect();
    let mut p = Parser {
        toks,
        pos: 0,
        used,
        next_tmp: 0,
    };
    let e = p.expr()?;
    p.expect(&Tok::Eof)?;
    Ok(e)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    /// Identifiers present in the source; temporaries avoid them.
    used: BTreeSet<String>,
    next_tmp: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError::new(s.line, s.col, msg)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error(format!(
            "expected {wanted}, found {}",
            self.peek().describe()
        ))
    }

    fn expect(&mut self, t: &Tok) -> Result<(), ParseError> {
        if self.peek() == t {
            self.advance();
            Ok(())
        } else {
            let wanted = match t {
                Tok::Eof => "end of input".to_string(),
                other => other.describe(),
            };
            Err(self.unexpected(&wanted))
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<(), ParseError> {
        if self.eat_word(w) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{w}`")))
        }
    }

    /// A plain identifier (not a keyword).
    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn fresh_tmp(&mut self) -> String {
        loop {
            let name = format!("_a{}", self.next_tmp);
            self.next_tmp += 1;
            if !self.used.contains(&name) {
                self.used.insert(name.clone());
                return name;
            }
        }
    }

    fn starts_expr(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => s != "case",
            Tok::Int(_) | Tok::Str(_) | Tok::LParen | Tok::Minus => true,
            _ => false,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat_word("var") {
            let x = self.ident("a variable name")?;
            self.expect(&Tok::Eq)?;
            let rhs = self.expr()?;
            self.expect(&Tok::Semi)?;
            let body = self.expr()?;
            return Ok(Expr::Let(x, Box::new(rhs), Box::new(body)));
        }
        if self.is_word("fun") && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.advance();
            let name = self.ident("a function name")?;
            let f = self.fun_rest()?;
            self.eat(&Tok::Semi);
            let body = if self.starts_expr() {
                self.expr()?
            } else {
                Expr::Val(Value::Var(name.clone()))
            };
            return Ok(Expr::Let(name, Box::new(Expr::Val(f)), Box::new(body)));
        }
        self.binary(0)
    }

    fn binop(&self) -> Option<PrimOp> {
        match self.peek() {
            Tok::Plus => Some(PrimOp::Add),
            Tok::Minus => Some(PrimOp::Sub),
            Tok::Star => Some(PrimOp::Mul),
            Tok::Slash => Some(PrimOp::Div),
            _ => None,
        }
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op) = self.binop() {
            if op.precedence() < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::Prim(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::LParen) {
            let e = self.expr()?;
            self.expect(&Tok::RParen)?;
            return Ok(e);
        }
        if self.eat_word("get") {
            self.expect(&Tok::LParen)?;
            let v = self.value()?;
            self.expect(&Tok::RParen)?;
            return Ok(Expr::Get(v));
        }
        if self.eat_word("post") {
            self.expect(&Tok::LParen)?;
            self.expect(&Tok::LBrace)?;
            let mut fields = Vec::new();
            if !self.eat(&Tok::RBrace) {
                loop {
                    let l = self.ident("a label")?;
                    self.expect(&Tok::Eq)?;
                    let v = self.value()?;
                    fields.push((l, v));
                    if self.eat(&Tok::RBrace) {
                        break;
                    }
                    self.expect(&Tok::Comma)?;
                }
            }
            self.expect(&Tok::Comma)?;
            let target = self.value()?;
            self.expect(&Tok::RParen)?;
            return Ok(Expr::Post(fields, target));
        }
        if self.is_word("event") || self.is_word("assert") {
            let is_event = self.is_word("event");
            self.advance();
            let pred = self.ident("a predicate name")?;
            self.expect(&Tok::LParen)?;
            let arg = self.value()?;
            self.expect(&Tok::RParen)?;
            let ev = Event { pred, arg };
            return Ok(if is_event {
                Expr::EventAnn(ev)
            } else {
                Expr::AssertAnn(ev)
            });
        }
        if self.eat_word("switch") {
            return self.switch();
        }
        self.call_chain()
    }

    fn switch(&mut self) -> Result<Expr, ParseError> {
        self.expect(&Tok::LParen)?;
        let scrutinee = self.value()?;
        self.expect(&Tok::RParen)?;
        self.expect(&Tok::LBrace)?;
        self.expect_word("case")?;
        let (pattern, binders) = self.pattern()?;
        self.expect(&Tok::Arrow)?;
        let matched = self.braced()?;
        self.expect_word("_")?;
        self.expect(&Tok::Arrow)?;
        let otherwise = self.braced()?;
        self.expect(&Tok::RBrace)?;
        Ok(Expr::Switch {
            scrutinee,
            pattern,
            binders,
            matched: Box::new(matched),
            otherwise: Box::new(otherwise),
        })
    }

    fn braced(&mut self) -> Result<Expr, ParseError> {
        self.expect(&Tok::LBrace)?;
        let e = self.expr()?;
        self.expect(&Tok::RBrace)?;
        Ok(e)
    }

    fn pattern(&mut self) -> Result<(Constructor, Vec<Ident>), ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok((Constructor::Num(n), Vec::new()))
            }
            Tok::Minus => {
                self.advance();
                let n = self.negative_int()?;
                Ok((Constructor::Num(n), Vec::new()))
            }
            Tok::Str(s) => {
                self.advance();
                Ok((Constructor::Str(s), Vec::new()))
            }
            Tok::Ident(w) => {
                let Some(c) = constructor_for(&w) else {
                    return Err(self.unexpected("a constructor pattern"));
                };
                self.advance();
                let mut binders = Vec::new();
                if self.eat(&Tok::LParen) {
                    loop {
                        binders.push(self.ident("a pattern variable")?);
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        self.expect(&Tok::Comma)?;
                    }
                }
                let c = self.check_arity(c, binders.len())?;
                Ok((c, binders))
            }
            _ => Err(self.unexpected("a constructor pattern")),
        }
    }

    fn check_arity(&self, c: Constructor, n: usize) -> Result<Constructor, ParseError> {
        if let Constructor::Tuple(_) = c {
            if n < 2 {
                return Err(self.error(format!("Tuple needs at least 2 components, got {n}")));
            }
            return Ok(Constructor::Tuple(n));
        }
        if c.arity() != n {
            return Err(self.error(format!(
                "constructor {} expects {} argument(s), got {n}",
                c.keyword().unwrap_or("?"),
                c.arity()
            )));
        }
        Ok(c)
    }

    fn negative_int(&mut self) -> Result<i64, ParseError> {
        match self.peek() {
            Tok::Int(n) => {
                let n = *n;
                self.advance();
                Ok(-n)
            }
            _ => Err(self.unexpected("an integer after `-`")),
        }
    }

    /// A value optionally followed by argument lists: `f(a, b)(c)`.
    fn call_chain(&mut self) -> Result<Expr, ParseError> {
        let head = self.value()?;
        if self.peek() != &Tok::LParen {
            return Ok(Expr::Val(head));
        }
        let mut args = Vec::new();
        while self.eat(&Tok::LParen) {
            loop {
                args.push(self.value()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        // f(a1)...(an) => var t1 = f(a1); var t2 = t1(a2); ... tn-1(an)
        let mut args = args.into_iter();
        let first = args.next().expect("at least one argument");
        let mut lets = Vec::new();
        let mut call = Expr::App(head, first);
        for arg in args {
            let tmp = self.fresh_tmp();
            lets.push((tmp.clone(), call));
            call = Expr::App(Value::Var(tmp), arg);
        }
        Ok(lets.into_iter().rev().fold(call, |body, (x, rhs)| {
            Expr::Let(x, Box::new(rhs), Box::new(body))
        }))
    }

    /// `(params) { body }` after `fun [name]`, curried.
    fn fun_rest(&mut self) -> Result<Value, ParseError> {
        self.expect(&Tok::LParen)?;
        let mut params = Vec::new();
        loop {
            params.push(self.ident("a parameter name")?);
            if self.eat(&Tok::RParen) {
                break;
            }
            self.expect(&Tok::Comma)?;
        }
        let body = self.braced()?;
        let mut params = params.into_iter().rev();
        let last = params.next().expect("at least one parameter");
        let mut f = Value::Lambda(last, Box::new(body));
        for p in params {
            f = Value::Lambda(p, Box::new(Expr::Val(f)));
        }
        Ok(f)
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(Value::num(n))
            }
            Tok::Minus => {
                self.advance();
                Ok(Value::num(self.negative_int()?))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Value::str(s))
            }
            Tok::Ident(w) => {
                if let Some(c) = constructor_for(&w) {
                    self.advance();
                    let mut args = Vec::new();
                    if c.arity() > 0 || matches!(c, Constructor::Tuple(_)) {
                        self.expect(&Tok::LParen)?;
                        loop {
                            args.push(self.value()?);
                            if self.eat(&Tok::RParen) {
                                break;
                            }
                            self.expect(&Tok::Comma)?;
                        }
                    } else if self.peek() == &Tok::LParen {
                        return Err(self.error(format!("constructor {w} takes no arguments")));
                    }
                    let c = self.check_arity(c, args.len())?;
                    return Ok(Value::Con(c, args));
                }
                match w.as_str() {
                    "href" => {
                        self.advance();
                        self.expect(&Tok::LParen)?;
                        let e = self.expr()?;
                        self.expect(&Tok::RParen)?;
                        Ok(Value::Href(Box::new(e)))
                    }
                    "form" => {
                        self.advance();
                        self.expect(&Tok::LParen)?;
                        self.expect(&Tok::LBracket)?;
                        let mut labels = Vec::new();
                        if !self.eat(&Tok::RBracket) {
                            loop {
                                labels.push(self.ident("a label")?);
                                if self.eat(&Tok::RBracket) {
                                    break;
                                }
                                self.expect(&Tok::Comma)?;
                            }
                        }
                        self.expect(&Tok::Comma)?;
                        let e = self.expr()?;
                        self.expect(&Tok::RParen)?;
                        Ok(Value::Form(labels, Box::new(e)))
                    }
                    "fun" => {
                        self.advance();
                        self.fun_rest()
                    }
                    _ if is_keyword(&w) => Err(self.unexpected("a value")),
                    _ => {
                        self.advance();
                        Ok(Value::Var(w))
                    }
                }
            }
            _ => Err(self.unexpected("a value")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn get_of_text() {
        assert_eq!(
            parse(r#"get(Text("Hello!"))"#).unwrap(),
            Expr::Get(Value::text(Value::str("Hello!")))
        );
    }

    #[test]
    fn event_with_numeral() {
        assert_eq!(
            parse("event PriceIs(3)").unwrap(),
            Expr::event("PriceIs", Value::num(3))
        );
    }

    #[test]
    fn named_function_is_curried_let() {
        let src = r#"fun buy(value, dbpass) { var _ = assert PriceIs(value); Text("Hello") }"#;
        let body = Expr::let_(
            "_",
            Expr::assert("PriceIs", Value::var("value")),
            Expr::Val(Value::text(Value::str("Hello"))),
        );
        let f = Value::lambda("value", Expr::Val(Value::lambda("dbpass", body)));
        assert_eq!(
            parse(src).unwrap(),
            Expr::let_("buy", Expr::Val(f), Expr::Val(Value::var("buy")))
        );
    }

    #[test]
    fn multi_argument_application_goes_through_temporaries() {
        let e = parse("f(1, 2)").unwrap();
        assert_eq!(
            e,
            Expr::let_(
                "_a0",
                Expr::App(Value::var("f"), Value::num(1)),
                Expr::App(Value::var("_a0"), Value::num(2))
            )
        );
    }

    #[test]
    fn temporaries_avoid_source_names() {
        let e = parse("var _a0 = 1; f(_a0)(2)").unwrap();
        let Expr::Let(_, _, body) = e else { panic!() };
        let Expr::Let(tmp, _, _) = *body else {
            panic!()
        };
        assert_eq!(tmp, "_a1");
    }

    #[test]
    fn precedence_is_conventional() {
        let e = parse("1 + 2 * 3 - 4").unwrap();
        let n = |k| Box::new(Expr::Val(Value::num(k)));
        assert_eq!(
            e,
            Expr::Prim(
                PrimOp::Sub,
                Box::new(Expr::Prim(
                    PrimOp::Add,
                    n(1),
                    Box::new(Expr::Prim(PrimOp::Mul, n(2), n(3)))
                )),
                n(4)
            )
        );
    }

    #[test]
    fn negative_literals_and_subtraction() {
        let e = parse("1 - -2").unwrap();
        assert_eq!(
            e,
            Expr::prim(
                PrimOp::Sub,
                Expr::Val(Value::num(1)),
                Expr::Val(Value::num(-2))
            )
        );
    }

    #[test]
    fn switch_with_binders() {
        let e = parse("switch (x) { case Cons(h, t) -> { h } _ -> { 0 } }").unwrap();
        match e {
            Expr::Switch {
                pattern, binders, ..
            } => {
                assert_eq!(pattern, Constructor::Cons);
                assert_eq!(binders, vec!["h".to_string(), "t".to_string()]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn form_and_post() {
        let e = parse(r#"post({name = "bob"}, form([name], Text(name)))"#).unwrap();
        assert_eq!(
            e,
            Expr::Post(
                vec![("name".into(), Value::str("bob"))],
                Value::form(
                    vec!["name".into()],
                    Expr::Val(Value::text(Value::var("name")))
                )
            )
        );
    }

    #[test]
    fn arity_errors() {
        assert!(parse("Text(1, 2)").is_err());
        assert!(parse("Cons(1)").is_err());
        assert!(parse("Tuple(1)").is_err());
        assert!(parse("Nil(1)").is_err());
        assert!(parse("switch (x) { case Succ -> { 1 } _ -> { 2 } }").is_err());
    }

    #[test]
    fn error_positions() {
        let err = parse("var x = 1;\n  get(").unwrap_err();
        assert_eq!((err.line, err.col), (2, 7));
        let err = parse("get(Text(\"a\")) )").unwrap_err();
        assert_eq!((err.line, err.col), (1, 16));
    }

    #[test]
    fn keywords_are_not_variables() {
        assert!(parse("var get = 1; get").is_err());
        assert!(parse("event Text(1)").is_err());
    }
}
