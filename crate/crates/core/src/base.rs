//! Policies, environments, policy bases and queries.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::clause::{Clause, Literal};
use crate::symbol::{Symbol, SymbolTable};
use crate::term::{check_args, SortError, Term};

/// Whether a policy (or query) grants or denies the permission.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum PolicySign {
    Permit,
    Deny,
}

impl fmt::Display for PolicySign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySign::Permit => f.write_str("permit"),
            PolicySign::Deny => f.write_str("deny"),
        }
    }
}

/// A standard policy: `forall xs (l1 & ... & lk => (!)Permitted(t, t', ..))`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Policy {
    pub label: String,
    pub antecedent: Vec<Literal>,
    head: Literal,
}

impl Policy {
    pub fn new(
        label: &str,
        sign: PolicySign,
        antecedent: Vec<Literal>,
        head_args: Vec<Term>,
        permitted: &Symbol,
    ) -> Result<Policy, BaseError> {
        check_args(permitted, &head_args).map_err(BaseError::Sort)?;
        let head = Literal::new(sign == PolicySign::Permit, permitted.clone(), head_args)
            .map_err(BaseError::Sort)?;
        Ok(Policy {
            label: label.to_string(),
            antecedent,
            head,
        })
    }

    pub fn sign(&self) -> PolicySign {
        if self.head.positive {
            PolicySign::Permit
        } else {
            PolicySign::Deny
        }
    }

    /// The `(!)Permitted(..)` conclusion literal.
    pub fn head(&self) -> &Literal {
        &self.head
    }

    pub fn subject(&self) -> &Term {
        &self.head.args[0]
    }

    pub fn action(&self) -> &Term {
        &self.head.args[1]
    }

    /// Clause form `{!l1, ..., !lk, (!)Permitted(..)}`; negations of negative
    /// antecedent literals come out positive and duplicates merge.
    pub fn clause(&self) -> Clause {
        let mut lits: Vec<Literal> = self.antecedent.iter().map(Literal::negated).collect();
        lits.push(self.head.clone());
        Clause::new(lits)
    }

    /// A simple policy never mentions `Permitted` in its antecedent.
    pub fn is_simple(&self) -> bool {
        !self.antecedent.iter().any(Literal::mentions_permitted)
    }
}

/// A universal environment fact `forall xs (l1 & ... & lk => l)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EnvRule {
    pub antecedent: Vec<Literal>,
    pub conclusion: Literal,
}

impl EnvRule {
    pub fn clause(&self) -> Clause {
        let mut lits: Vec<Literal> = self.antecedent.iter().map(Literal::negated).collect();
        lits.push(self.conclusion.clone());
        Clause::new(lits)
    }
}

/// Where a universal clause of `E1 and P` came from; indexes into
/// [`PolicyBase::e1`] / [`PolicyBase::policies`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ClauseOrigin {
    EnvRule(usize),
    Policy(usize),
}

/// Errors raised while assembling a policy base or query.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaseError {
    #[error("{0}")]
    Sort(SortError),
    #[error("environment fact `{0}` is not ground")]
    EnvFactNotGround(String),
    #[error("the environment must not mention Permitted: `{0}`")]
    PermittedInEnvironment(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("query goal mentions a variable: `{0}`")]
    GoalNotClosed(String),
}

/// A policy base `E0 and E1 and P`: ground facts, universal environment
/// rules, and policies, over one frozen symbol table.
#[derive(Clone, Debug)]
pub struct PolicyBase {
    pub symbols: Arc<SymbolTable>,
    pub e0: Vec<Literal>,
    pub e1: Vec<EnvRule>,
    pub policies: Vec<Policy>,
}

impl PolicyBase {
    pub fn new(
        symbols: Arc<SymbolTable>,
        e0: Vec<Literal>,
        e1: Vec<EnvRule>,
        policies: Vec<Policy>,
    ) -> Result<PolicyBase, BaseError> {
        for lit in &e0 {
            if !lit.is_ground() {
                return Err(BaseError::EnvFactNotGround(lit.to_string()));
            }
            if lit.mentions_permitted() {
                return Err(BaseError::PermittedInEnvironment(lit.to_string()));
            }
        }
        for rule in &e1 {
            if rule.conclusion.mentions_permitted()
                || rule.antecedent.iter().any(Literal::mentions_permitted)
            {
                return Err(BaseError::PermittedInEnvironment(rule.clause().to_string()));
            }
        }
        let mut labels: Vec<&str> = policies.iter().map(|p| p.label.as_str()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(BaseError::DuplicateLabel(w[0].to_string()));
        }
        Ok(PolicyBase {
            symbols,
            e0,
            e1,
            policies,
        })
    }

    pub fn empty(symbols: Arc<SymbolTable>) -> PolicyBase {
        PolicyBase {
            symbols,
            e0: Vec::new(),
            e1: Vec::new(),
            policies: Vec::new(),
        }
    }

    pub fn permitted(&self) -> Symbol {
        self.symbols.permitted()
    }

    /// F0: the positive ground equations of E0.
    pub fn f0(&self) -> impl Iterator<Item = &Literal> {
        self.e0.iter().filter(|l| l.is_equality() && l.positive)
    }

    /// F1: everything in E0 that is not a positive equation.
    pub fn f1(&self) -> impl Iterator<Item = &Literal> {
        self.e0.iter().filter(|l| !(l.is_equality() && l.positive))
    }

    /// The universal part `E1 and P` in clause form, with provenance, in
    /// document order (rules then policies).
    pub fn universal_clauses(&self) -> Vec<(ClauseOrigin, Clause)> {
        let mut out = Vec::with_capacity(self.e1.len() + self.policies.len());
        for (i, r) in self.e1.iter().enumerate() {
            out.push((ClauseOrigin::EnvRule(i), r.clause()));
        }
        for (i, p) in self.policies.iter().enumerate() {
            out.push((ClauseOrigin::Policy(i), p.clause()));
        }
        out
    }

    /// Human label for a universal clause origin.
    pub fn origin_label(&self, origin: ClauseOrigin) -> String {
        match origin {
            ClauseOrigin::EnvRule(i) => format!("env#{}", i + 1),
            ClauseOrigin::Policy(i) => self.policies[i].label.clone(),
        }
    }

    /// True when any equality literal occurs in the base.
    pub fn mentions_equality(&self) -> bool {
        self.e0.iter().any(Literal::is_equality)
            || self
                .universal_clauses()
                .iter()
                .any(|(_, c)| c.literals().iter().any(Literal::is_equality))
    }
}

/// A closed permission goal: `(permit|deny)(t, t', ..)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Goal {
    pub sign: PolicySign,
    pub args: Vec<Term>,
}

impl Goal {
    pub fn new(sign: PolicySign, args: Vec<Term>, permitted: &Symbol) -> Result<Goal, BaseError> {
        check_args(permitted, &args).map_err(BaseError::Sort)?;
        if let Some(bad) = args.iter().find(|t| !t.is_ground()) {
            return Err(BaseError::GoalNotClosed(bad.to_string()));
        }
        Ok(Goal { sign, args })
    }

    /// `(!)Permitted(args)`, positive for permit goals.
    pub fn literal(&self, permitted: &Symbol) -> Literal {
        Literal::new(
            self.sign == PolicySign::Permit,
            permitted.clone(),
            self.args.clone(),
        )
        .expect("goal already checked against the Permitted signature")
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.sign)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// A standard query: does the base entail the goal?
#[derive(Clone, Debug)]
pub struct Query {
    pub base: PolicyBase,
    pub goal: Goal,
}

impl Query {
    pub fn new(base: PolicyBase, goal: Goal) -> Query {
        Query { base, goal }
    }

    pub fn goal_literal(&self) -> Literal {
        self.goal.literal(&self.base.permitted())
    }
}

/// A query named in a source document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedGoal {
    pub name: String,
    pub goal: Goal,
}
