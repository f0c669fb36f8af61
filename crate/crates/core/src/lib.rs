//! TinyLinks: a small multi-tier web calculus with event-based assertions.
//!
//! The crate provides three semantics over one AST:
//!
//! * [`concrete`]: a denotational evaluator threading an events environment,
//!   where every run-time type confusion yields `Wrong`;
//! * [`analysis`]: the types-and-effects analyser obtained as an abstract
//!   interpretation of the concrete semantics, with separate `link`/`form` types;
//! * [`legacy`]: the original type-and-effect rules, which conflate links and
//!   forms with XML and therefore accept programs that go wrong.
//!
//! [`harness`] enumerates small programs and checks the three against each other.

pub mod analysis;
pub mod concrete;
pub mod eenv;
pub mod frontend;
pub mod harness;
pub mod legacy;
pub mod terms;

pub use frontend::{parse, pretty, Expr, ParseError, Value};
