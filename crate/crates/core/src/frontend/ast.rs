//! Abstract syntax of TinyLinks.
//!
//! Functions take exactly one parameter and applications exactly one
//! argument; the parser curries the multi-argument surface forms.

use std::fmt;

pub type Ident = String;
pub type Label = String;
pub type PredName = String;

/// Data constructors. `Num` and `Str` carry their literal payload.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constructor {
    Unit,
    Zero,
    Succ,
    /// Integer literal; sugar for a `Zero`/`Succ` tower that also covers negatives.
    Num(i64),
    Str(String),
    Nil,
    Cons,
    /// Tuple of the given width (at least 2).
    Tuple(usize),
    Elem,
    Text,
}

impl Constructor {
    pub fn arity(&self) -> usize {
        match self {
            Constructor::Unit
            | Constructor::Zero
            | Constructor::Num(_)
            | Constructor::Str(_)
            | Constructor::Nil => 0,
            Constructor::Succ | Constructor::Text => 1,
            Constructor::Cons | Constructor::Elem => 2,
            Constructor::Tuple(n) => *n,
        }
    }

    /// Keyword used in the surface syntax, `None` for literals.
    pub fn keyword(&self) -> Option<&'static str> {
        Some(match self {
            Constructor::Unit => "Unit",
            Constructor::Zero => "Zero",
            Constructor::Succ => "Succ",
            Constructor::Nil => "Nil",
            Constructor::Cons => "Cons",
            Constructor::Tuple(_) => "Tuple",
            Constructor::Elem => "Elem",
            Constructor::Text => "Text",
            Constructor::Num(_) | Constructor::Str(_) => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl PrimOp {
    pub fn symbol(self) -> &'static str {
        match self {
            PrimOp::Add => "+",
            PrimOp::Sub => "-",
            PrimOp::Mul => "*",
            PrimOp::Div => "/",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            PrimOp::Add | PrimOp::Sub => 1,
            PrimOp::Mul | PrimOp::Div => 2,
        }
    }
}

impl fmt::Display for PrimOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// An event `p(V)`: a predicate applied to a single value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub pred: PredName,
    pub arg: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Var(Ident),
    Con(Constructor, Vec<Value>),
    Href(Box<Expr>),
    Lambda(Ident, Box<Expr>),
    Form(Vec<Label>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Val(Value),
    Let(Ident, Box<Expr>, Box<Expr>),
    Prim(PrimOp, Box<Expr>, Box<Expr>),
    App(Value, Value),
    Post(Vec<(Label, Value)>, Value),
    Get(Value),
    EventAnn(Event),
    AssertAnn(Event),
    /// `switch (V) { case c(xs) -> E1 _ -> E2 }`
    Switch {
        scrutinee: Value,
        pattern: Constructor,
        binders: Vec<Ident>,
        matched: Box<Expr>,
        otherwise: Box<Expr>,
    },
}

// Smart constructors, mostly for tests and the enumerator.
impl Value {
    pub fn var(name: impl Into<Ident>) -> Value {
        Value::Var(name.into())
    }

    pub fn num(n: i64) -> Value {
        Value::Con(Constructor::Num(n), Vec::new())
    }

    pub fn str(s: impl Into<String>) -> Value {
        Value::Con(Constructor::Str(s.into()), Vec::new())
    }

    pub fn unit() -> Value {
        Value::Con(Constructor::Unit, Vec::new())
    }

    pub fn text(v: Value) -> Value {
        Value::Con(Constructor::Text, vec![v])
    }

    pub fn elem(tag: Value, child: Value) -> Value {
        Value::Con(Constructor::Elem, vec![tag, child])
    }

    pub fn href(e: Expr) -> Value {
        Value::Href(Box::new(e))
    }

    pub fn lambda(x: impl Into<Ident>, body: Expr) -> Value {
        Value::Lambda(x.into(), Box::new(body))
    }

    pub fn form(labels: Vec<Label>, body: Expr) -> Value {
        Value::Form(labels, Box::new(body))
    }
}

impl Expr {
    pub fn val(v: Value) -> Expr {
        Expr::Val(v)
    }

    pub fn let_(x: impl Into<Ident>, e1: Expr, e2: Expr) -> Expr {
        Expr::Let(x.into(), Box::new(e1), Box::new(e2))
    }

    pub fn prim(op: PrimOp, a: Expr, b: Expr) -> Expr {
        Expr::Prim(op, Box::new(a), Box::new(b))
    }

    pub fn get(v: Value) -> Expr {
        Expr::Get(v)
    }

    pub fn event(pred: impl Into<PredName>, arg: Value) -> Expr {
        Expr::EventAnn(Event {
            pred: pred.into(),
            arg,
        })
    }

    pub fn assert(pred: impl Into<PredName>, arg: Value) -> Expr {
        Expr::AssertAnn(Event {
            pred: pred.into(),
            arg,
        })
    }

    /// Number of nodes, counting values and expressions.
    pub fn size(&self) -> usize {
        match self {
            Expr::Val(v) | Expr::Get(v) => 1 + v.size(),
            Expr::Let(_, a, b) | Expr::Prim(_, a, b) => 1 + a.size() + b.size(),
            Expr::App(u, v) => 1 + u.size() + v.size(),
            Expr::Post(fields, v) => {
                1 + v.size() + fields.iter().map(|(_, v)| v.size()).sum::<usize>()
            }
            Expr::EventAnn(ev) | Expr::AssertAnn(ev) => 1 + ev.arg.size(),
            Expr::Switch {
                scrutinee,
                matched,
                otherwise,
                ..
            } => 1 + scrutinee.size() + matched.size() + otherwise.size(),
        }
    }
}

impl Value {
    pub fn size(&self) -> usize {
        match self {
            Value::Var(_) => 1,
            Value::Con(_, args) => 1 + args.iter().map(Value::size).sum::<usize>(),
            Value::Href(e) | Value::Lambda(_, e) | Value::Form(_, e) => 1 + e.size(),
        }
    }
}
