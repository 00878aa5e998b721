//! Replayable derivations.
//!
//! A `Derivation` records input clauses and inference steps down to the
//! empty clause. Every step carries its pivots and unifier and can be
//! checked independently: the checker re-standardizes the parents exactly
//! as `resolve` does and recomputes the conclusion, so a verdict's witness
//! never has to be trusted.

use std::fmt;

use thiserror::Error;

use crate::clause::{Clause, Literal};
use crate::resolution::{ClosureResult, Provenance};
use crate::subst::Substitution;

/// Reference to an earlier clause in a derivation.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ClauseRef {
    Input(usize),
    Step(usize),
}

impl fmt::Display for ClauseRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClauseRef::Input(i) => write!(f, "in{i}"),
            ClauseRef::Step(i) => write!(f, "s{i}"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum StepKind {
    /// Binary resolution on a complementary pivot pair. Pivots are literals
    /// of the standardized parents (left renumbered from 0, right following).
    Resolve {
        left: ClauseRef,
        right: ClauseRef,
        left_pivot: Literal,
        right_pivot: Literal,
        unifier: Substitution,
    },
    /// Resolution against the implicit `forall x (x = x)` clause; the pivot
    /// is a negative equality of the renumbered parent whose sides the
    /// unifier equalizes.
    Reflexivity {
        parent: ClauseRef,
        pivot: Literal,
        unifier: Substitution,
    },
    /// Binary factoring: two same-sign literals of the renumbered parent
    /// merged under the unifier.
    Factor {
        parent: ClauseRef,
        left_pivot: Literal,
        right_pivot: Literal,
        unifier: Substitution,
    },
}

#[derive(Clone, Debug)]
pub struct Step {
    pub kind: StepKind,
    pub result: Clause,
}

/// A derivation: labeled inputs plus checked inference steps. A refutation
/// ends in the empty clause.
#[derive(Clone, Debug, Default)]
pub struct Derivation {
    pub inputs: Vec<(String, Clause)>,
    pub steps: Vec<Step>,
}

/// Why a replay failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {step}: reference to a clause that does not exist yet")]
    DanglingReference { step: usize },
    #[error("step {step}: pivot `{pivot}` is not a literal of the standardized parent")]
    MissingPivot { step: usize, pivot: String },
    #[error("step {step}: pivots are not complementary under the unifier")]
    PivotsNotComplementary { step: usize },
    #[error("step {step}: factoring pivots do not merge under the unifier")]
    FactorMismatch { step: usize },
    #[error("step {step}: recorded result differs from the recomputed clause")]
    WrongResult { step: usize },
    #[error("derivation does not end in the empty clause")]
    NoRefutation,
}

impl Derivation {
    pub fn conclusion(&self) -> Option<&Clause> {
        self.steps.last().map(|s| &s.result)
    }

    /// True when the final step derives the empty clause.
    pub fn is_refutation(&self) -> bool {
        matches!(self.conclusion(), Some(c) if c.is_empty())
            || self.inputs.iter().any(|(_, c)| c.is_empty()) && self.steps.is_empty()
    }

    fn clause_at(&self, r: ClauseRef, before: usize) -> Option<&Clause> {
        match r {
            ClauseRef::Input(i) => self.inputs.get(i).map(|(_, c)| c),
            ClauseRef::Step(i) if i < before => Some(&self.steps[i].result),
            ClauseRef::Step(_) => None,
        }
    }

    /// Recomputes every step and checks the recorded conclusions, then
    /// checks the derivation ends in the empty clause.
    pub fn verify(&self) -> Result<(), ReplayError> {
        for (at, step) in self.steps.iter().enumerate() {
            let recomputed = self.recompute(at, step)?;
            if recomputed != step.result {
                return Err(ReplayError::WrongResult { step: at });
            }
        }
        if self.is_refutation() {
            Ok(())
        } else {
            Err(ReplayError::NoRefutation)
        }
    }

    fn recompute(&self, at: usize, step: &Step) -> Result<Clause, ReplayError> {
        match &step.kind {
            StepKind::Resolve {
                left,
                right,
                left_pivot,
                right_pivot,
                unifier,
            } => {
                let lc = self
                    .clause_at(*left, at)
                    .ok_or(ReplayError::DanglingReference { step: at })?;
                let rc = self
                    .clause_at(*right, at)
                    .ok_or(ReplayError::DanglingReference { step: at })?;
                let (l, r) = Clause::standardize_apart(lc, rc);
                if !l.contains(left_pivot) {
                    return Err(ReplayError::MissingPivot {
                        step: at,
                        pivot: left_pivot.to_string(),
                    });
                }
                if !r.contains(right_pivot) {
                    return Err(ReplayError::MissingPivot {
                        step: at,
                        pivot: right_pivot.to_string(),
                    });
                }
                let lp = left_pivot.apply(unifier);
                let rp = right_pivot.apply(unifier);
                if !lp.complements(&rp) {
                    return Err(ReplayError::PivotsNotComplementary { step: at });
                }
                Ok(l.without(left_pivot)
                    .union(&r.without(right_pivot))
                    .apply(unifier))
            }
            StepKind::Reflexivity {
                parent,
                pivot,
                unifier,
            } => {
                let pc = self
                    .clause_at(*parent, at)
                    .ok_or(ReplayError::DanglingReference { step: at })?;
                let work = pc.renumbered_from(0);
                if !work.contains(pivot) {
                    return Err(ReplayError::MissingPivot {
                        step: at,
                        pivot: pivot.to_string(),
                    });
                }
                if pivot.positive || !pivot.is_equality() {
                    return Err(ReplayError::PivotsNotComplementary { step: at });
                }
                let applied = pivot.apply(unifier);
                if applied.args[0] != applied.args[1] {
                    return Err(ReplayError::PivotsNotComplementary { step: at });
                }
                Ok(work.without(pivot).apply(unifier))
            }
            StepKind::Factor {
                parent,
                left_pivot,
                right_pivot,
                unifier,
            } => {
                let pc = self
                    .clause_at(*parent, at)
                    .ok_or(ReplayError::DanglingReference { step: at })?;
                let work = pc.renumbered_from(0);
                for pivot in [left_pivot, right_pivot] {
                    if !work.contains(pivot) {
                        return Err(ReplayError::MissingPivot {
                            step: at,
                            pivot: pivot.to_string(),
                        });
                    }
                }
                if left_pivot.positive != right_pivot.positive
                    || left_pivot.apply(unifier) != right_pivot.apply(unifier)
                {
                    return Err(ReplayError::FactorMismatch { step: at });
                }
                Ok(work.apply(unifier))
            }
        }
    }

    /// Structured text: one line per input and per step with clause,
    /// parents, pivot and unifier.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (i, (label, clause)) in self.inputs.iter().enumerate() {
            out.push_str(&format!("in{i} [{label}]  {clause}\n"));
        }
        for (i, step) in self.steps.iter().enumerate() {
            match &step.kind {
                StepKind::Resolve {
                    left,
                    right,
                    left_pivot,
                    right_pivot,
                    unifier,
                } => {
                    out.push_str(&format!(
                        "s{i}  resolve {left} x {right} on ({left_pivot}) ~ ({right_pivot}) via {unifier}  =>  {}\n",
                        step.result
                    ));
                }
                StepKind::Reflexivity {
                    parent,
                    pivot,
                    unifier,
                } => {
                    out.push_str(&format!(
                        "s{i}  reflexivity {parent} on ({pivot}) via {unifier}  =>  {}\n",
                        step.result
                    ));
                }
                StepKind::Factor {
                    parent,
                    left_pivot,
                    right_pivot,
                    unifier,
                } => {
                    out.push_str(&format!(
                        "s{i}  factor {parent} on ({left_pivot}) ~ ({right_pivot}) via {unifier}  =>  {}\n",
                        step.result
                    ));
                }
            }
        }
        out
    }
}

/// Extracts the derivation of a stored clause from a closure, labeling
/// inputs with `labels` (parallel to the closure's input list).
pub fn from_closure(closure: &ClosureResult, target: usize, labels: &[String]) -> Derivation {
    // Collect the needed stored indices in dependency order.
    let mut needed: Vec<usize> = Vec::new();
    let mut stack = vec![target];
    while let Some(i) = stack.pop() {
        if needed.contains(&i) {
            continue;
        }
        needed.push(i);
        match &closure.clauses[i].provenance {
            Provenance::Input(_) => {}
            Provenance::Resolvent { left, right, .. } => {
                stack.push(*left);
                stack.push(*right);
            }
            Provenance::Factor { parent, .. } | Provenance::Reflexivity { parent, .. } => {
                stack.push(*parent)
            }
        }
    }
    needed.sort_unstable();

    let mut derivation = Derivation::default();
    let mut refs: Vec<Option<ClauseRef>> = vec![None; closure.clauses.len()];
    for &i in &needed {
        let stored = &closure.clauses[i];
        let r = match &stored.provenance {
            Provenance::Input(at) => {
                let label = labels
                    .get(*at)
                    .cloned()
                    .unwrap_or_else(|| format!("input {at}"));
                derivation.inputs.push((label, stored.clause.clone()));
                ClauseRef::Input(derivation.inputs.len() - 1)
            }
            Provenance::Resolvent {
                left,
                right,
                pivot,
                unifier,
            } => {
                derivation.steps.push(Step {
                    kind: StepKind::Resolve {
                        left: refs[*left].expect("parents precede children"),
                        right: refs[*right].expect("parents precede children"),
                        left_pivot: pivot.0.clone(),
                        right_pivot: pivot.1.clone(),
                        unifier: unifier.clone(),
                    },
                    result: stored.clause.clone(),
                });
                ClauseRef::Step(derivation.steps.len() - 1)
            }
            Provenance::Factor {
                parent,
                pivot,
                unifier,
            } => {
                derivation.steps.push(Step {
                    kind: StepKind::Factor {
                        parent: refs[*parent].expect("parents precede children"),
                        left_pivot: pivot.0.clone(),
                        right_pivot: pivot.1.clone(),
                        unifier: unifier.clone(),
                    },
                    result: stored.clause.clone(),
                });
                ClauseRef::Step(derivation.steps.len() - 1)
            }
            Provenance::Reflexivity {
                parent,
                pivot,
                unifier,
            } => {
                derivation.steps.push(Step {
                    kind: StepKind::Reflexivity {
                        parent: refs[*parent].expect("parents precede children"),
                        pivot: pivot.clone(),
                        unifier: unifier.clone(),
                    },
                    result: stored.clause.clone(),
                });
                ClauseRef::Step(derivation.steps.len() - 1)
            }
        };
        refs[i] = Some(r);
    }
    derivation
}
