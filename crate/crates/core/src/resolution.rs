//! Binary resolution, the one-level restricted closure, and a fuel-limited
//! breadth-first saturation used as fallback and oracle.

use std::collections::HashMap;

use thiserror::Error;

use crate::clause::{CanonicalClause, Clause, Literal};
use crate::subst::Substitution;
use crate::unify::{
    self, bipolar_report, mgu, mgu_terms, unconstrained_count, BipolarReport, ConstrainedMode,
};

/// One resolution inference. The pivot literals belong to the two parents
/// after `Clause::standardize_apart`, and the unifier is their most general
/// unifier over that numbering.
#[derive(Clone, Debug)]
pub struct Resolvent {
    pub clause: Clause,
    pub pivot: (Literal, Literal),
    pub unifier: Substitution,
}

/// Resolution against the implicit reflexivity clause `forall x (x = x)`:
/// a negative equality literal whose sides unify is discharged.
#[derive(Clone, Debug)]
pub struct ReflexResolvent {
    pub clause: Clause,
    pub pivot: Literal,
    pub unifier: Substitution,
}

/// The two arguments of `resolve` are the same clause (up to renaming);
/// a clause never resolves with itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("cannot resolve a clause with itself")]
pub struct SameClause;

/// All binary resolvents of two distinct clauses: one per pair of
/// opposite-sign literals with unifiable atoms, in literal order of the
/// standardized parents.
pub fn resolve(c1: &Clause, c2: &Clause) -> Result<Vec<Resolvent>, SameClause> {
    if c1.canonical() == c2.canonical() {
        return Err(SameClause);
    }
    let (left, right) = Clause::standardize_apart(c1, c2);
    let mut out = Vec::new();
    for lp in left.literals() {
        for rp in right.literals() {
            if lp.positive == rp.positive || lp.pred != rp.pred {
                continue;
            }
            if let Ok(sigma) = mgu(lp, rp) {
                let clause = left.without(lp).union(&right.without(rp)).apply(&sigma);
                out.push(Resolvent {
                    clause,
                    pivot: (lp.clone(), rp.clone()),
                    unifier: sigma,
                });
            }
        }
    }
    Ok(out)
}

/// Resolvents of `c` against the reflexivity clause, one per negative
/// equality literal with unifiable sides.
pub fn resolve_with_reflexivity(c: &Clause) -> Vec<ReflexResolvent> {
    let work = c.renumbered_from(0);
    let mut out = Vec::new();
    for lit in work.literals() {
        if !lit.is_equality() || lit.positive {
            continue;
        }
        if let Ok(sigma) = mgu_terms(&lit.args[0], &lit.args[1]) {
            out.push(ReflexResolvent {
                clause: work.without(lit).apply(&sigma),
                pivot: lit.clone(),
                unifier: sigma,
            });
        }
    }
    out
}

/// Binary factors of `c`: same-sign literal pairs merged under their mgu.
pub fn factors(c: &Clause) -> Vec<(Clause, (Literal, Literal), Substitution)> {
    let work = c.renumbered_from(0);
    let lits = work.literals();
    let mut out = Vec::new();
    for i in 0..lits.len() {
        for j in i + 1..lits.len() {
            let (a, b) = (&lits[i], &lits[j]);
            if a.positive != b.positive || a.pred != b.pred {
                continue;
            }
            if let Ok(sigma) = mgu(a, b) {
                out.push((work.apply(&sigma), (a.clone(), b.clone()), sigma));
            }
        }
    }
    out
}

/// Does `general` theta-subsume `specific` (some instance of `general` is a
/// sub-disjunction of `specific`)?
pub fn subsumes(general: &Clause, specific: &Clause) -> bool {
    if general.len() > specific.len() {
        return false;
    }
    let (specific, general) = Clause::standardize_apart(specific, general);
    fn go(pats: &[Literal], target: &Clause, subst: &Substitution) -> bool {
        let Some((first, rest)) = pats.split_first() else {
            return true;
        };
        for candidate in target.literals() {
            let mut attempt = subst.clone();
            if unify::match_literal(first, candidate, &mut attempt) && go(rest, target, &attempt) {
                return true;
            }
        }
        false
    }
    go(general.literals(), &specific, &Substitution::new())
}

/// How a stored clause came to be.
#[derive(Clone, Debug)]
pub enum Provenance {
    /// Index into the input clause list.
    Input(usize),
    Resolvent {
        left: usize,
        right: usize,
        pivot: (Literal, Literal),
        unifier: Substitution,
    },
    Factor {
        parent: usize,
        pivot: (Literal, Literal),
        unifier: Substitution,
    },
    Reflexivity {
        parent: usize,
        pivot: Literal,
        unifier: Substitution,
    },
}

#[derive(Clone, Debug)]
pub struct StoredClause {
    pub clause: Clause,
    pub provenance: Provenance,
    pub depth: usize,
}

/// Result of a closure computation: clauses with provenance, duplicate-free
/// modulo variable renaming.
#[derive(Clone, Debug)]
pub struct ClosureResult {
    pub clauses: Vec<StoredClause>,
    /// Fuel ran out before the set closed.
    pub exhausted: bool,
    /// Number of clauses generated (before de-duplication).
    pub generated: u64,
}

impl ClosureResult {
    pub fn empty_clause(&self) -> Option<usize> {
        self.clauses.iter().position(|s| s.clause.is_empty())
    }

    pub fn contains(&self, c: &Clause) -> bool {
        let canon = c.canonical();
        self.clauses.iter().any(|s| s.clause.canonical() == canon)
    }
}

/// Some input clause carries two or more bipolar literals, so the one-level
/// closure would be incomplete (and the full closure can be infinite).
#[derive(Debug, Clone, Error)]
#[error("restricted closure precondition violated: clause(s) {offenders:?} carry two or more bipolar literals")]
pub struct PreconditionViolated {
    pub offenders: Vec<usize>,
    pub report: BipolarReport,
}

/// The one-level resolution closure: the inputs plus every pairwise
/// resolvent. Valid when each input clause has at most one bipolar literal;
/// resolvents then carry no bipolars and are never parents.
pub fn restricted_closure(clauses: &[Clause]) -> Result<ClosureResult, PreconditionViolated> {
    let report = bipolar_report(clauses, None);
    let offenders = report.offenders();
    if !offenders.is_empty() {
        return Err(PreconditionViolated { offenders, report });
    }
    let k = clauses
        .iter()
        .enumerate()
        .map(|(i, c)| {
            unconstrained_count(
                c,
                ConstrainedMode::Relative {
                    report: &report,
                    clause: i,
                },
            )
        })
        .max()
        .unwrap_or(0);

    let mut stored: Vec<StoredClause> = Vec::new();
    let mut seen: HashMap<CanonicalClause, usize> = HashMap::new();
    let mut generated = 0u64;
    for (i, c) in clauses.iter().enumerate() {
        let canon = c.canonical();
        if seen.contains_key(&canon) {
            continue;
        }
        seen.insert(canon, stored.len());
        stored.push(StoredClause {
            clause: c.clone(),
            provenance: Provenance::Input(i),
            depth: 0,
        });
    }
    let inputs = stored.len();
    for i in 0..inputs {
        for j in i + 1..inputs {
            let Ok(resolvents) = resolve(&stored[i].clause, &stored[j].clause) else {
                continue;
            };
            for r in resolvents {
                generated += 1;
                let canon = r.clause.canonical();
                if seen.contains_key(&canon) {
                    continue;
                }
                assert!(
                    unconstrained_count(&r.clause, ConstrainedMode::Plain) <= 2 * k,
                    "resolvent exceeds the 2k unconstrained-variable bound"
                );
                seen.insert(canon, stored.len());
                stored.push(StoredClause {
                    clause: r.clause,
                    provenance: Provenance::Resolvent {
                        left: i,
                        right: j,
                        pivot: r.pivot,
                        unifier: r.unifier,
                    },
                    depth: 1,
                });
            }
        }
    }
    let n = clauses.len();
    assert!(
        stored.len() <= n + n.saturating_mul(n.saturating_sub(1)),
        "closure size bound violated"
    );
    assert!(stored.iter().all(|s| s.depth <= 1));
    Ok(ClosureResult {
        clauses: stored,
        exhausted: false,
        generated,
    })
}

/// Breadth-first saturation with the reflexivity clause built in, binary
/// factoring, tautology deletion and forward subsumption. Stops when the
/// set closes, the empty clause appears, or the number of generated clauses
/// exceeds `fuel`.
pub fn saturate(clauses: &[Clause], fuel: u64) -> ClosureResult {
    let mut stored: Vec<StoredClause> = Vec::new();
    let mut seen: HashMap<CanonicalClause, usize> = HashMap::new();
    let mut generated = 0u64;
    let mut found_empty = false;

    for (i, c) in clauses.iter().enumerate() {
        let canon = c.canonical();
        if seen.contains_key(&canon) {
            continue;
        }
        seen.insert(canon, stored.len());
        found_empty |= c.is_empty();
        stored.push(StoredClause {
            clause: c.clone(),
            provenance: Provenance::Input(i),
            depth: 0,
        });
    }

    let mut frontier: Vec<usize> = (0..stored.len()).collect();
    let mut exhausted = false;
    while !frontier.is_empty() && !found_empty && !exhausted {
        let level_end = stored.len();
        let mut next: Vec<usize> = Vec::new();
        let is_new = |idx: usize, frontier: &[usize]| frontier.contains(&idx);

        'level: for fi in 0..frontier.len() {
            let i = frontier[fi];
            let mut candidates: Vec<(Clause, Provenance)> = Vec::new();

            for r in resolve_with_reflexivity(&stored[i].clause) {
                candidates.push((
                    r.clause,
                    Provenance::Reflexivity {
                        parent: i,
                        pivot: r.pivot,
                        unifier: r.unifier,
                    },
                ));
            }
            for (clause, pivot, unifier) in factors(&stored[i].clause) {
                candidates.push((
                    clause,
                    Provenance::Factor {
                        parent: i,
                        pivot,
                        unifier,
                    },
                ));
            }
            for j in 0..level_end {
                if j == i || (is_new(j, &frontier) && j > i) {
                    continue;
                }
                let Ok(resolvents) = resolve(&stored[i].clause, &stored[j].clause) else {
                    continue;
                };
                for r in resolvents {
                    candidates.push((
                        r.clause,
                        Provenance::Resolvent {
                            left: i,
                            right: j,
                            pivot: r.pivot,
                            unifier: r.unifier,
                        },
                    ));
                }
            }

            for (clause, provenance) in candidates {
                generated += 1;
                if generated > fuel {
                    exhausted = true;
                    break 'level;
                }
                if clause.is_tautology() {
                    continue;
                }
                let canon = clause.canonical();
                if seen.contains_key(&canon) {
                    continue;
                }
                if stored.iter().any(|s| subsumes(&s.clause, &clause)) {
                    continue;
                }
                let depth = stored[i].depth + 1;
                seen.insert(canon, stored.len());
                next.push(stored.len());
                let empty = clause.is_empty();
                stored.push(StoredClause {
                    clause,
                    provenance,
                    depth,
                });
                if empty {
                    found_empty = true;
                    break 'level;
                }
            }
        }
        frontier = next;
    }

    ClosureResult {
        clauses: stored,
        exhausted,
        generated,
    }
}
