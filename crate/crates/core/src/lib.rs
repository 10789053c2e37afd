//! Operational semantics for De Simone style rule formats.
//!
//! A rule file ([`rules`]) compiles to a [`Law`], which drives the
//! operational [`Model`] on closed terms. On top of the model sit bounded
//! trace semantics ([`trace`]) and congruence testing ([`analysis`]).
//! Weights are exact: booleans for nondeterminism, extended nonnegative
//! rationals for probabilities and general weights.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod law;
pub mod model;
pub mod monad;
pub mod rules;
pub mod semiring;
pub mod syntax;
pub mod trace;

pub use analysis::{
    congruence_test, counterexample_search, equivalent_pairs, generate_contexts,
    trace_equiv_bounded, Context, CongruenceReport, CongruenceViolation,
};
pub use error::{Error, Result};
pub use law::{Law, NaturalityMode, NaturalityReport, Point};
pub use model::{AnyModel, Model, StepResult};
pub use monad::{B0Elem, BElem, Either, FlatTerm, FormalSum};
pub use rules::{parse_spec, validate_format, Dialect, RuleSpec, SemiringKind};
pub use semiring::{Boolean, ExtRational, Semiring};
pub use syntax::{parse_closed_term, parse_term, ClosedTerm, Label, OpSym, Signature, Term, Var};
pub use trace::{
    ast_estimate, total_mass, trace_bounded, trace_direct, AstReport, AstVerdict, TraceTable, Word,
};
