//! Equality classes over E0, the equality-safe test, and the
//! equation-free transformation.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::base::{ClauseOrigin, EnvRule, Policy, PolicyBase, Query};
use crate::clause::Literal;
use crate::term::Term;

/// One merged class of closed terms, members in term order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqClass {
    pub members: Vec<Term>,
    pub representative: Term,
}

/// The partition of E0's closed terms under the reflexive-symmetric-
/// transitive closure of its positive equations. No congruence propagation:
/// equality-safety guarantees it can never fire (and the safety check
/// reports the inputs where it could).
///
/// The representative of a class is its unique non-constant member when one
/// exists, otherwise the least constant in term order. Terms not mentioned
/// by any equation form implicit singleton classes.
#[derive(Clone, Debug, Default)]
pub struct EqClasses {
    classes: Vec<EqClass>,
    by_term: HashMap<Term, usize>,
}

impl EqClasses {
    /// Builds classes from the positive ground equations of `e0`.
    pub fn build<'a>(e0: impl IntoIterator<Item = &'a Literal>) -> EqClasses {
        let mut terms: Vec<Term> = Vec::new();
        let mut index: HashMap<Term, usize> = HashMap::new();
        let mut parent: Vec<usize> = Vec::new();
        let mut intern = |t: &Term, terms: &mut Vec<Term>, parent: &mut Vec<usize>| -> usize {
            if let Some(&i) = index.get(t) {
                return i;
            }
            let i = terms.len();
            terms.push(t.clone());
            parent.push(i);
            index.insert(t.clone(), i);
            i
        };

        fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }

        for lit in e0 {
            if !(lit.is_equality() && lit.positive) {
                continue;
            }
            let a = intern(&lit.args[0], &mut terms, &mut parent);
            let b = intern(&lit.args[1], &mut terms, &mut parent);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[rb] = ra;
            }
        }

        let mut groups: HashMap<usize, Vec<Term>> = HashMap::new();
        for i in 0..terms.len() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(terms[i].clone());
        }
        let mut classes: Vec<EqClass> = groups
            .into_values()
            .map(|mut members| {
                members.sort();
                let representative = choose_representative(&members);
                EqClass {
                    members,
                    representative,
                }
            })
            .collect();
        classes.sort_by(|a, b| a.members.cmp(&b.members));

        let mut by_term = HashMap::new();
        for (i, class) in classes.iter().enumerate() {
            for m in &class.members {
                by_term.insert(m.clone(), i);
            }
        }
        EqClasses { classes, by_term }
    }

    pub fn classes(&self) -> &[EqClass] {
        &self.classes
    }

    /// True when no class has two or more members.
    pub fn is_trivial(&self) -> bool {
        self.classes.iter().all(|c| c.members.len() < 2)
    }

    pub fn class_of(&self, t: &Term) -> Option<&EqClass> {
        self.by_term.get(t).map(|&i| &self.classes[i])
    }

    /// The class representative of `t`, or `t`'s own image for singletons.
    pub fn representative<'a>(&'a self, t: &'a Term) -> &'a Term {
        match self.class_of(t) {
            Some(c) => &c.representative,
            None => t,
        }
    }

    /// Replaces every closed term that belongs to a class by its class
    /// representative, innermost constants included. Expansion through a
    /// representative tracks visited classes so it terminates even on
    /// inputs that fail the safety check.
    pub fn rewrite_term(&self, t: &Term) -> Term {
        self.rewrite_guarded(t, &mut Vec::new())
    }

    fn rewrite_guarded(&self, t: &Term, visiting: &mut Vec<usize>) -> Term {
        match t {
            Term::Var(_) => t.clone(),
            Term::App(sym, args) => {
                if let Some(&class) = self.by_term.get(t) {
                    let rep = &self.classes[class].representative;
                    if rep != t && !visiting.contains(&class) {
                        visiting.push(class);
                        let out = match rep {
                            Term::App(rsym, rargs) => Term::App(
                                rsym.clone(),
                                rargs
                                    .iter()
                                    .map(|a| self.rewrite_guarded(a, visiting))
                                    .collect(),
                            ),
                            Term::Var(_) => rep.clone(),
                        };
                        visiting.pop();
                        return out;
                    }
                }
                Term::App(
                    sym.clone(),
                    args.iter()
                        .map(|a| self.rewrite_guarded(a, visiting))
                        .collect(),
                )
            }
        }
    }

    pub fn rewrite_literal(&self, lit: &Literal) -> Literal {
        Literal {
            positive: lit.positive,
            pred: lit.pred.clone(),
            args: lit.args.iter().map(|a| self.rewrite_term(a)).collect(),
        }
    }

    pub fn rewrite_clause(&self, clause: &crate::clause::Clause) -> crate::clause::Clause {
        crate::clause::Clause::new(
            clause
                .literals()
                .iter()
                .map(|l| self.rewrite_literal(l))
                .collect(),
        )
    }
}

fn choose_representative(members: &[Term]) -> Term {
    let non_constants: Vec<&Term> = members
        .iter()
        .filter(|t| !matches!(t, Term::App(_, args) if args.is_empty()))
        .collect();
    match non_constants.as_slice() {
        [] => members[0].clone(),
        // Least non-constant; unique under equality-safety.
        rest => (*rest.iter().min().expect("non-empty")).clone(),
    }
}

/// A reason a query is not equality-safe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SafetyViolation {
    /// A clause of `E1 and P` carries a positive equality disjunct.
    PositiveUniversalEquation {
        origin: ClauseOrigin,
        label: String,
        literal: Literal,
    },
    /// An equality class holds two distinct function-mentioning terms.
    TwoFunctionTerms { left: Term, right: Term },
    /// An equality class holds a term and a proper subterm of it.
    SubtermChain { sub: Term, sup: Term },
    /// Representative expansion would loop through these class
    /// representatives, so the transformation has no finite result.
    CyclicRepresentatives { cycle: Vec<Term> },
}

impl fmt::Display for SafetyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SafetyViolation::PositiveUniversalEquation { label, literal, .. } => {
                write!(f, "`{label}` has a positive equality disjunct `{literal}`")
            }
            SafetyViolation::TwoFunctionTerms { left, right } => {
                write!(f, "E0 equates two function terms: `{left}` and `{right}`")
            }
            SafetyViolation::SubtermChain { sub, sup } => {
                write!(f, "E0 equates `{sup}` with its own subterm `{sub}`")
            }
            SafetyViolation::CyclicRepresentatives { cycle } => {
                write!(f, "E0 equations chain representatives in a cycle: ")?;
                for (i, t) in cycle.iter().enumerate() {
                    if i > 0 {
                        write!(f, " -> ")?;
                    }
                    write!(f, "`{t}`")?;
                }
                Ok(())
            }
        }
    }
}

/// Result of the equality-safe test.
#[derive(Clone, Debug)]
pub struct SafeReport {
    pub safe: bool,
    pub violations: Vec<SafetyViolation>,
}

/// Checks that a base is equality-safe: no positive equality disjunct in
/// `E1 and P`, no class with two function terms, no class chaining a term
/// with its own subterm, and acyclic representative expansion.
pub fn equality_safe(base: &PolicyBase) -> SafeReport {
    let mut violations = Vec::new();
    for (origin, clause) in base.universal_clauses() {
        for lit in clause.literals() {
            if lit.is_equality() && lit.positive {
                violations.push(SafetyViolation::PositiveUniversalEquation {
                    origin,
                    label: base.origin_label(origin),
                    literal: lit.clone(),
                });
            }
        }
    }

    let classes = EqClasses::build(base.e0.iter());
    for class in classes.classes() {
        let funcs: Vec<&Term> = class
            .members
            .iter()
            .filter(|t| t.mentions_function())
            .collect();
        if funcs.len() >= 2 {
            violations.push(SafetyViolation::TwoFunctionTerms {
                left: funcs[0].clone(),
                right: funcs[1].clone(),
            });
        }
        for a in &class.members {
            for b in &class.members {
                if b.has_proper_subterm(a) {
                    violations.push(SafetyViolation::SubtermChain {
                        sub: a.clone(),
                        sup: b.clone(),
                    });
                }
            }
        }
    }

    if let Some(cycle) = representative_cycle(&classes) {
        violations.push(SafetyViolation::CyclicRepresentatives { cycle });
    }

    SafeReport {
        safe: violations.is_empty(),
        violations,
    }
}

/// Finds a cycle in the class graph where class A points at class B when
/// A's representative contains a proper subterm belonging to B.
fn representative_cycle(classes: &EqClasses) -> Option<Vec<Term>> {
    let n = classes.classes().len();
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, class) in classes.classes().iter().enumerate() {
        let mut targets = Vec::new();
        class.representative.for_each_subterm(&mut |sub| {
            if sub != &class.representative {
                if let Some(other) = classes.by_term.get(sub) {
                    if *other != i && !targets.contains(other) {
                        targets.push(*other);
                    }
                }
            }
        });
        edges[i] = targets;
    }
    // Iterative DFS with colors.
    let mut color = vec![0u8; n];
    for start in 0..n {
        if color[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        let mut path = vec![start];
        color[start] = 1;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if *next < edges[node].len() {
                let target = edges[node][*next];
                *next += 1;
                match color[target] {
                    0 => {
                        color[target] = 1;
                        stack.push((target, 0));
                        path.push(target);
                    }
                    1 => {
                        let from = path.iter().position(|&p| p == target).unwrap_or(0);
                        return Some(
                            path[from..]
                                .iter()
                                .map(|&c| classes.classes()[c].representative.clone())
                                .collect(),
                        );
                    }
                    _ => {}
                }
            } else {
                color[node] = 2;
                stack.pop();
                path.pop();
            }
        }
    }
    None
}

/// The transformation failed because the query is not equality-safe.
#[derive(Debug, Clone, Error)]
#[error("query is not equality-safe: {}", .0.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct NotEqualitySafe(pub SafeReport);

fn transform_base_unchecked(base: &PolicyBase) -> (PolicyBase, EqClasses) {
    let classes = EqClasses::build(base.f0());
    let e0: Vec<Literal> = base.f1().map(|l| classes.rewrite_literal(l)).collect();
    let e1: Vec<EnvRule> = base
        .e1
        .iter()
        .map(|r| EnvRule {
            antecedent: r
                .antecedent
                .iter()
                .map(|l| classes.rewrite_literal(l))
                .collect(),
            conclusion: classes.rewrite_literal(&r.conclusion),
        })
        .collect();
    let permitted = base.permitted();
    let policies: Vec<Policy> = base
        .policies
        .iter()
        .map(|p| {
            Policy::new(
                &p.label,
                p.sign(),
                p.antecedent.iter().map(|l| classes.rewrite_literal(l)).collect(),
                p.head().args.iter().map(|t| classes.rewrite_term(t)).collect(),
                &permitted,
            )
            .expect("rewriting preserves sorts")
        })
        .collect();
    (
        PolicyBase {
            symbols: base.symbols.clone(),
            e0,
            e1,
            policies,
        },
        classes,
    )
}

/// Base-level equation-free transformation (used where no goal is in play,
/// e.g. environment satisfiability).
pub fn to_equation_free_base(base: &PolicyBase) -> Result<PolicyBase, NotEqualitySafe> {
    let report = equality_safe(base);
    if !report.safe {
        return Err(NotEqualitySafe(report));
    }
    if base.f0().next().is_none() {
        return Ok(base.clone());
    }
    Ok(transform_base_unchecked(base).0)
}

/// Converts an equality-safe query into an equation-free one with the same
/// validity: positive ground equations are dropped from E0 and every closed
/// term in a class is replaced by its representative throughout F1, E1, P
/// and the goal. Negative equalities stay.
pub fn to_equation_free(q: &Query) -> Result<Query, NotEqualitySafe> {
    let report = equality_safe(&q.base);
    if !report.safe {
        return Err(NotEqualitySafe(report));
    }
    if q.base.f0().next().is_none() {
        return Ok(q.clone());
    }
    let (base, classes) = transform_base_unchecked(&q.base);
    let goal = crate::base::Goal {
        sign: q.goal.sign,
        args: q.goal.args.iter().map(|t| classes.rewrite_term(t)).collect(),
    };
    Ok(Query { base, goal })
}
