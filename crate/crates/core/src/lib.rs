//! Reasoning about access-control policies in the Lithium fragment of
//! many-sorted first-order logic.
//!
//! A policy base is a conjunction `E0 and E1 and P` of ground environment
//! facts, universal environment rules, and permitting/denying policies. The
//! engine decides whether such a base entails a closed permission or
//! prohibition, whether the base is consistent, and whether a mixed base can
//! be separated into its permitting and denying parts — each verdict backed
//! by a replayable resolution derivation. Independent brute-force oracles
//! (exhaustive finite-model search and fuel-limited saturation) cross-check
//! the engine.
//!
//! Modules, bottom up:
//! - [`symbol`], [`term`], [`subst`], [`clause`], [`base`]: the data model.
//! - [`parser`]: the `.lith` text format.
//! - [`unify`]: most general unifiers, bipolar literals, constrained
//!   variables.
//! - [`equality`]: equality classes over E0, the equality-safe test, the
//!   equation-free transformation.
//! - [`resolution`]: binary resolution, the one-level restricted closure,
//!   fuel-limited saturation.
//! - [`derivation`]: replayable derivations and the independent checker.
//! - [`engine`]: membership, query answering, separation, consistency,
//!   definition unfolding.
//! - [`oracle`]: finite-model validity and ground saturation oracles.

pub mod base;
pub mod clause;
pub mod derivation;
pub mod engine;
pub mod equality;
pub mod index;
pub mod oracle;
pub mod parser;
pub mod resolution;
pub mod subst;
pub mod symbol;
pub mod term;
pub mod unify;

pub use base::{
    BaseError, ClauseOrigin, EnvRule, Goal, NamedGoal, Policy, PolicyBase, PolicySign, Query,
};
pub use clause::{CanonicalClause, Clause, Literal, Pred};
pub use derivation::{Derivation, ReplayError};
pub use engine::{
    answer, check_consistency, check_separation, membership, unfold_definitions, AnswerOptions,
    ConsistencyVerdict, ConsistencyWitness, MembershipReport, SeparationReport, SuggestedPath,
    UnfoldOutcome, Verdict, DEFAULT_FUEL,
};
pub use equality::{equality_safe, to_equation_free, EqClasses, SafeReport};
pub use oracle::{
    finite_model_valid, ground_saturation_valid, FiniteModel, FiniteVerdict, OracleCaps,
    SaturationVerdict,
};
pub use parser::{parse_base, render, render_document, ParseError};
pub use resolution::{restricted_closure, saturate, ClosureResult, Resolvent};
pub use subst::Substitution;
pub use symbol::{Sort, Symbol, SymbolKind, SymbolTable};
pub use term::{SortError, Term, Variable};
pub use unify::{bipolar_report, constrained_vars, mgu, BipolarReport, ConstrainedMode};
