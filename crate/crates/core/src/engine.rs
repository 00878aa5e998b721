//! The decision procedure: membership diagnosis, query answering,
//! permit/deny separation, consistency, and definition unfolding.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::base::{EnvRule, Goal, Policy, PolicyBase, PolicySign, Query};
use crate::clause::{Clause, Literal};
use crate::derivation::{ClauseRef, Derivation, Step, StepKind};
use crate::equality::{equality_safe, to_equation_free, EqClasses, SafeReport};
use crate::index::LiteralIndex;
use crate::oracle::{ground_saturation_valid, SaturationVerdict};
use crate::resolution::{restricted_closure, resolve, Provenance};
use crate::subst::Substitution;
use crate::symbol::Sort;
use crate::term::Term;
use crate::unify::{
    bipolar_report, match_literal, mgu, mgu_terms, unconstrained_count, BipolarReport,
    ConstrainedMode,
};

/// Default saturation fuel (generated clauses).
pub const DEFAULT_FUEL: u64 = 50_000;

/// Which evaluation route the membership analysis recommends.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SuggestedPath {
    /// Basic equality-free environment, no bipolars, all policy variables
    /// constrained: near-linear evaluation.
    FastPath,
    /// In the fragment; evaluation through the restricted closure.
    FullPath,
    /// Outside the fragment; only fuel-limited saturation applies.
    Fallback,
}

impl fmt::Display for SuggestedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuggestedPath::FastPath => f.write_str("fast-path"),
            SuggestedPath::FullPath => f.write_str("full-path"),
            SuggestedPath::Fallback => f.write_str("fallback"),
        }
    }
}

/// Result of the membership analysis for one query.
#[derive(Clone, Debug)]
pub struct MembershipReport {
    pub in_lithium: bool,
    pub equality_safe: SafeReport,
    /// Bipolar analysis of `E1 and P` relative to E0's equations; its
    /// clause list is the rewritten universal part.
    pub bipolar: BipolarReport,
    /// Labels parallel to the analyzed clauses (rules, then policies).
    pub clause_labels: Vec<String>,
    /// Per-clause count of variables unconstrained relative to the query.
    pub per_clause_k: Vec<usize>,
    pub suggested_path: SuggestedPath,
}

impl MembershipReport {
    /// Clauses with two or more bipolar literals, with their pairs.
    pub fn offenders(&self) -> Vec<(String, Vec<(Literal, Literal)>)> {
        self.bipolar
            .offenders()
            .into_iter()
            .map(|i| {
                let pairs = self
                    .bipolar
                    .pairs_of(i)
                    .into_iter()
                    .map(|p| {
                        (
                            self.bipolar.literal(p.left).clone(),
                            self.bipolar.literal(p.right).clone(),
                        )
                    })
                    .collect();
                (self.clause_labels[i].clone(), pairs)
            })
            .collect()
    }

    pub fn max_k(&self) -> usize {
        self.per_clause_k.iter().copied().max().unwrap_or(0)
    }
}

impl fmt::Display for MembershipReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "in fragment: {}; suggested path: {}",
            self.in_lithium, self.suggested_path
        )?;
        if !self.equality_safe.safe {
            for v in &self.equality_safe.violations {
                writeln!(f, "  not equality-safe: {v}")?;
            }
        }
        for (label, pairs) in self.offenders() {
            writeln!(f, "  `{label}` carries {} bipolar literals:", pairs.len())?;
            for (a, b) in pairs {
                writeln!(f, "    ({a}) ~ ({b})")?;
            }
        }
        for (i, k) in self.per_clause_k.iter().enumerate() {
            writeln!(f, "  k({}) = {k}", self.clause_labels[i])?;
        }
        Ok(())
    }
}

/// Options for `answer`.
#[derive(Clone, Debug)]
pub struct AnswerOptions {
    /// Run fuel-limited saturation when the query is outside the fragment.
    pub fallback: bool,
    /// Saturation fuel in generated clauses.
    pub fuel: u64,
}

impl Default for AnswerOptions {
    fn default() -> Self {
        AnswerOptions {
            fallback: false,
            fuel: DEFAULT_FUEL,
        }
    }
}

/// The engine's answer to a query.
#[derive(Clone, Debug)]
pub enum Verdict {
    /// The base entails the goal; the derivation replays to the empty
    /// clause.
    Valid(Box<Derivation>),
    /// The base does not entail the goal.
    Invalid,
    /// The query is outside the fragment and fallback was not requested.
    NotInLithium(Box<MembershipReport>),
    /// Fallback saturation ran out of fuel.
    Unknown { fuel_spent: u64 },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid(_))
    }

    pub fn word(&self) -> &'static str {
        match self {
            Verdict::Valid(_) => "valid",
            Verdict::Invalid => "invalid",
            Verdict::NotInLithium(_) => "not-in-lithium",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

/// Membership analysis: equality safety, equality classes, bipolar counts
/// relative to E0's equations, and per-clause unconstrained-variable
/// counts. In the fragment iff equality-safe and every universal clause has
/// at most one bipolar literal.
pub fn membership(q: &Query) -> MembershipReport {
    let safe = equality_safe(&q.base);
    let classes = EqClasses::build(q.base.f0());
    let universal = q.base.universal_clauses();
    let clause_labels: Vec<String> = universal
        .iter()
        .map(|(o, _)| q.base.origin_label(*o))
        .collect();
    let clauses: Vec<Clause> = universal.into_iter().map(|(_, c)| c).collect();
    let bipolar = bipolar_report(&clauses, Some(&classes));
    let per_clause_k: Vec<usize> = (0..bipolar.clauses.len())
        .map(|i| {
            unconstrained_count(
                &bipolar.clauses[i],
                ConstrainedMode::Relative {
                    report: &bipolar,
                    clause: i,
                },
            )
        })
        .collect();
    let in_lithium = safe.safe && bipolar.max_count() <= 1;
    let fast = q.base.e1.is_empty()
        && !q.base.mentions_equality()
        && bipolar.pairs.is_empty()
        && bipolar
            .clauses
            .iter()
            .all(|c| unconstrained_count(c, ConstrainedMode::Plain) == 0);
    let suggested_path = if !in_lithium {
        SuggestedPath::Fallback
    } else if fast {
        SuggestedPath::FastPath
    } else {
        SuggestedPath::FullPath
    };
    MembershipReport {
        in_lithium,
        equality_safe: safe,
        bipolar,
        clause_labels,
        per_clause_k,
        suggested_path,
    }
}

/// Decides a standard query.
///
/// In-fragment queries run the complete pipeline: equation-free transform,
/// environment clash scan, restricted closure, and the goal-instance search
/// over the closure. Out-of-fragment queries return `NotInLithium`, or with
/// `options.fallback` run fuel-limited saturation on the negated query
/// (Valid or Unknown only — outside the tractability guarantee).
pub fn answer(q: &Query, options: &AnswerOptions) -> Verdict {
    let report = membership(q);
    if !report.in_lithium {
        if options.fallback {
            return match ground_saturation_valid(q, options.fuel) {
                SaturationVerdict::Valid(d) => Verdict::Valid(d),
                SaturationVerdict::Unknown { fuel_spent } => Verdict::Unknown { fuel_spent },
            };
        }
        return Verdict::NotInLithium(Box::new(report));
    }
    let q = to_equation_free(q).expect("membership implies equality safety");
    answer_in_fragment(&q)
}

fn answer_in_fragment(q: &Query) -> Verdict {
    let goal_lit = q.goal_literal();
    let index = LiteralIndex::build(q.base.e0.iter());

    // Condition (i): an inconsistent ground environment makes any goal
    // vacuously entailed.
    if let Some((lit, partner)) = index.find_clash() {
        return Verdict::Valid(Box::new(clash_witness(&lit, partner.as_ref())));
    }

    // Condition (ii): some closure clause instantiates into the negated
    // environment plus the goal.
    let universal = q.base.universal_clauses();
    let labels: Vec<String> = universal
        .iter()
        .map(|(o, _)| q.base.origin_label(*o))
        .collect();
    let clauses: Vec<Clause> = universal.into_iter().map(|(_, c)| c).collect();
    let closure = restricted_closure(&clauses)
        .expect("in-fragment clauses carry at most one bipolar literal each");
    for at in 0..closure.clauses.len() {
        let work = closure.clauses[at].clause.renumbered_from(0);
        if let Some(sigma) = goal_instance(&work, &goal_lit, &index) {
            let derivation = build_witness(&closure, at, &labels, &goal_lit, &index, &sigma);
            debug_assert_eq!(derivation.verify(), Ok(()));
            return Verdict::Valid(Box::new(derivation));
        }
    }
    Verdict::Invalid
}

/// Searches a substitution sending every literal of `work` into
/// `{negations of E0} ∪ {goal literal} ∪ {s != s}`:
/// goal-sign `Permitted` literals unify with the goal atom (an
/// opposite-sign `Permitted` literal disqualifies the clause), negative
/// equalities unify their own sides, and the remainder grounds against
/// complements of indexed environment literals.
fn goal_instance(work: &Clause, goal: &Literal, index: &LiteralIndex) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    for lit in work.literals() {
        if !lit.mentions_permitted() {
            continue;
        }
        if lit.positive != goal.positive {
            return None;
        }
        let step = mgu(&lit.apply(&sigma), goal).ok()?;
        sigma = sigma.then(&step);
    }
    for lit in work.literals() {
        if !lit.is_equality() {
            continue;
        }
        // Universal clauses of an equation-free base carry only negative
        // equalities, and those land only in {s != s}.
        let current = lit.apply(&sigma);
        let step = mgu_terms(&current.args[0], &current.args[1]).ok()?;
        sigma = sigma.then(&step);
    }
    let remaining: Vec<Literal> = work
        .literals()
        .iter()
        .filter(|l| !l.mentions_permitted() && !l.is_equality())
        .map(|l| l.apply(&sigma))
        .collect();
    let grounding = ground_against_env(&remaining, index)?;
    Some(sigma.then(&grounding))
}

/// Grounds the environment part of a clause against the index: each literal
/// must become the complement of an indexed literal. Independent
/// per-variable search when every literal mentions at most one variable,
/// exhaustive backtracking over the indexed candidates otherwise.
fn ground_against_env(literals: &[Literal], index: &LiteralIndex) -> Option<Substitution> {
    let mut open: Vec<&Literal> = Vec::new();
    for lit in literals {
        if lit.is_ground() {
            if !index.contains_complement(lit) {
                return None;
            }
        } else {
            open.push(lit);
        }
    }
    if open.is_empty() {
        return Some(Substitution::new());
    }
    let single_var = open.iter().all(|l| distinct_vars(l) <= 1);
    if single_var {
        let mut groups: BTreeMap<u32, Vec<&Literal>> = BTreeMap::new();
        for lit in open {
            let mut var = None;
            lit.for_each_var(&mut |v| var = Some(v.id));
            groups.entry(var.expect("non-ground")).or_default().push(lit);
        }
        let mut total = Substitution::new();
        for (_, lits) in groups {
            let solved = solve_single_var_group(&lits, index)?;
            total = total.then(&solved);
        }
        Some(total)
    } else {
        backtrack_grounding(&open, index, &Substitution::new())
    }
}

fn distinct_vars(lit: &Literal) -> usize {
    let mut seen: Vec<u32> = Vec::new();
    lit.for_each_var(&mut |v| {
        if !seen.contains(&v.id) {
            seen.push(v.id);
        }
    });
    seen.len()
}

/// All literals share one variable: candidates come from matching the
/// first literal against its indexed complements, checked on the rest.
fn solve_single_var_group(lits: &[&Literal], index: &LiteralIndex) -> Option<Substitution> {
    let first = lits[0];
    for target in index.complements_of(first.pred.name(), first.positive) {
        let mut attempt = Substitution::new();
        if !match_literal(&first.negated(), target, &mut attempt) {
            continue;
        }
        if lits[1..]
            .iter()
            .all(|l| index.contains_complement(&l.apply(&attempt)))
        {
            return Some(attempt);
        }
    }
    None
}

/// General backtracking over indexed complements, literal by literal.
fn backtrack_grounding(
    open: &[&Literal],
    index: &LiteralIndex,
    sigma: &Substitution,
) -> Option<Substitution> {
    let Some((first, rest)) = open.split_first() else {
        return Some(sigma.clone());
    };
    let current = first.apply(sigma);
    if current.is_ground() {
        if index.contains_complement(&current) {
            return backtrack_grounding(rest, index, sigma);
        }
        return None;
    }
    for target in index.complements_of(current.pred.name(), current.positive) {
        let mut attempt = Substitution::new();
        if !match_literal(&current.negated(), target, &mut attempt) {
            continue;
        }
        if let Some(done) = backtrack_grounding(rest, index, &sigma.then(&attempt)) {
            return Some(done);
        }
    }
    None
}

fn add_input(derivation: &mut Derivation, label: &str, clause: Clause) -> ClauseRef {
    if let Some(at) = derivation.inputs.iter().position(|(_, c)| *c == clause) {
        return ClauseRef::Input(at);
    }
    derivation.inputs.push((label.to_string(), clause));
    ClauseRef::Input(derivation.inputs.len() - 1)
}

/// Witness for an environment contradiction: a complementary ground pair
/// or a `t != t` literal.
fn clash_witness(lit: &Literal, partner: Option<&Literal>) -> Derivation {
    let mut derivation = Derivation::default();
    match partner {
        Some(neg) => {
            let l = add_input(&mut derivation, "env fact", Clause::new(vec![lit.clone()]));
            let r = add_input(&mut derivation, "env fact", Clause::new(vec![neg.clone()]));
            derivation.steps.push(Step {
                kind: StepKind::Resolve {
                    left: l,
                    right: r,
                    left_pivot: lit.clone(),
                    right_pivot: neg.clone(),
                    unifier: Substitution::new(),
                },
                result: Clause::empty(),
            });
        }
        None => {
            let p = add_input(&mut derivation, "env fact", Clause::new(vec![lit.clone()]));
            derivation.steps.push(Step {
                kind: StepKind::Reflexivity {
                    parent: p,
                    pivot: lit.clone(),
                    unifier: Substitution::new(),
                },
                result: Clause::empty(),
            });
        }
    }
    derivation
}

/// Builds the refutation behind a condition-(ii) match: the clause's
/// closure provenance, then one resolution step per literal against the
/// negated goal, the reflexivity clause, or an environment fact. The full
/// grounding substitution rides on the first elimination step, so later
/// steps are ground and use empty unifiers.
fn build_witness(
    closure: &crate::resolution::ClosureResult,
    at: usize,
    labels: &[String],
    goal: &Literal,
    index: &LiteralIndex,
    sigma: &Substitution,
) -> Derivation {
    let stored = &closure.clauses[at];
    let mut derivation = Derivation::default();
    let mut cur_ref = match &stored.provenance {
        Provenance::Input(i) => add_input(&mut derivation, &labels[*i], stored.clause.clone()),
        Provenance::Resolvent {
            left,
            right,
            pivot,
            unifier,
        } => {
            // Restricted-closure parents are always inputs.
            let (lstored, rstored) = (&closure.clauses[*left], &closure.clauses[*right]);
            let (Provenance::Input(li), Provenance::Input(ri)) =
                (&lstored.provenance, &rstored.provenance)
            else {
                unreachable!("restricted-closure resolvents have input parents")
            };
            let l = add_input(&mut derivation, &labels[*li], lstored.clause.clone());
            let r = add_input(&mut derivation, &labels[*ri], rstored.clause.clone());
            derivation.steps.push(Step {
                kind: StepKind::Resolve {
                    left: l,
                    right: r,
                    left_pivot: pivot.0.clone(),
                    right_pivot: pivot.1.clone(),
                    unifier: unifier.clone(),
                },
                result: stored.clause.clone(),
            });
            ClauseRef::Step(0)
        }
        _ => unreachable!("restricted closure stores inputs and resolvents only"),
    };
    let mut cur = stored.clause.clone();
    let mut pending = Some(sigma.clone());
    let goal_unit = Clause::new(vec![goal.negated()]);

    loop {
        let work = cur.renumbered_from(0);
        if work.is_empty() {
            break;
        }
        let step_sigma = pending.take().unwrap_or_default();
        let (kind, result);
        if let Some(pivot) = work
            .literals()
            .iter()
            .find(|l| l.mentions_permitted())
            .cloned()
        {
            let unit_ref = add_input(&mut derivation, "negated goal", goal_unit.clone());
            result = work.without(&pivot).apply(&step_sigma);
            kind = StepKind::Resolve {
                left: cur_ref,
                right: unit_ref,
                left_pivot: pivot,
                right_pivot: goal.negated(),
                unifier: step_sigma,
            };
        } else if let Some(pivot) = work.literals().iter().find(|l| l.is_equality()).cloned() {
            result = work.without(&pivot).apply(&step_sigma);
            kind = StepKind::Reflexivity {
                parent: cur_ref,
                pivot,
                unifier: step_sigma,
            };
        } else {
            let pivot = work.literals()[0].clone();
            let unit_lit = pivot.apply(&step_sigma).negated();
            debug_assert!(index.contains(&unit_lit), "match plan guaranteed the fact");
            let unit_ref = add_input(
                &mut derivation,
                "env fact",
                Clause::new(vec![unit_lit.clone()]),
            );
            result = work.without(&pivot).apply(&step_sigma);
            kind = StepKind::Resolve {
                left: cur_ref,
                right: unit_ref,
                left_pivot: pivot,
                right_pivot: unit_lit,
                unifier: step_sigma,
            };
        }
        derivation.steps.push(Step {
            kind,
            result: result.clone(),
        });
        cur_ref = ClauseRef::Step(derivation.steps.len() - 1);
        cur = result;
    }
    derivation
}

// --- separation ---

/// Status of one permit x deny resolvent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResolventStatus {
    /// Implied by the environment (an E1 instance, a ground E0 fact, or a
    /// tautology).
    ImpliedByE,
    /// An instance of the named policy conjunct.
    ImpliedByConjunct(String),
    /// Not known to be implied; adding it to the environment would repair
    /// separation.
    Missing,
}

#[derive(Clone, Debug)]
pub struct SeparationResolvent {
    pub permit_label: String,
    pub deny_label: String,
    pub resolvent: Clause,
    pub status: ResolventStatus,
}

/// Outcome of the permit/deny separation check.
#[derive(Clone, Debug)]
pub struct SeparationReport {
    pub satisfied: bool,
    pub resolvents: Vec<SeparationResolvent>,
    /// Permitting policies whose clause carries a negative `Permitted`
    /// literal; these block the separation shortcut.
    pub impure_policies: Vec<String>,
}

impl fmt::Display for SeparationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "separation satisfied: {}", self.satisfied)?;
        for label in &self.impure_policies {
            writeln!(f, "  impure permitting policy: {label}")?;
        }
        for r in &self.resolvents {
            let status = match &r.status {
                ResolventStatus::ImpliedByE => "implied by the environment".to_string(),
                ResolventStatus::ImpliedByConjunct(q) => format!("instance of `{q}`"),
                ResolventStatus::Missing => "missing".to_string(),
            };
            writeln!(
                f,
                "  {} x {}: {}  [{status}]",
                r.permit_label, r.deny_label, r.resolvent
            )?;
        }
        Ok(())
    }
}

/// Checks whether the permitting and denying policies can be separated:
/// every resolvent of a permitting and a denying policy on a
/// `Permitted`-mentioning pivot must already be implied, and every
/// permitting policy must be pure. The implication test is syntactic
/// (exact instance of a conjunct, ground E0 lookup, or tautology) and errs
/// toward `Missing`, never toward a false `satisfied`.
pub fn check_separation(base: &PolicyBase) -> SeparationReport {
    let permits: Vec<&Policy> = base
        .policies
        .iter()
        .filter(|p| p.sign() == PolicySign::Permit)
        .collect();
    let denies: Vec<&Policy> = base
        .policies
        .iter()
        .filter(|p| p.sign() == PolicySign::Deny)
        .collect();
    let impure_policies: Vec<String> = permits
        .iter()
        .filter(|p| {
            p.clause()
                .literals()
                .iter()
                .any(|l| l.mentions_permitted() && !l.positive)
        })
        .map(|p| p.label.clone())
        .collect();

    let index = LiteralIndex::build(base.e0.iter());
    let conjuncts = base.universal_clauses();
    let mut resolvents = Vec::new();
    for p in &permits {
        for d in &denies {
            let Ok(rs) = resolve(&p.clause(), &d.clause()) else {
                continue;
            };
            for r in rs {
                if !r.pivot.0.mentions_permitted() {
                    continue;
                }
                let status = implication_status(&r.clause, base, &conjuncts, &index);
                resolvents.push(SeparationResolvent {
                    permit_label: p.label.clone(),
                    deny_label: d.label.clone(),
                    resolvent: r.clause,
                    status,
                });
            }
        }
    }
    let satisfied = impure_policies.is_empty()
        && resolvents
            .iter()
            .all(|r| r.status != ResolventStatus::Missing);
    SeparationReport {
        satisfied,
        resolvents,
        impure_policies,
    }
}

fn implication_status(
    f: &Clause,
    base: &PolicyBase,
    conjuncts: &[(crate::base::ClauseOrigin, Clause)],
    index: &LiteralIndex,
) -> ResolventStatus {
    if f.is_tautology() {
        return ResolventStatus::ImpliedByE;
    }
    for (origin, clause) in conjuncts {
        if instance_of(clause, f) {
            return match origin {
                crate::base::ClauseOrigin::EnvRule(_) => ResolventStatus::ImpliedByE,
                crate::base::ClauseOrigin::Policy(_) => {
                    ResolventStatus::ImpliedByConjunct(base.origin_label(*origin))
                }
            };
        }
    }
    if f.literals()
        .iter()
        .any(|l| l.is_ground() && index.contains(l))
    {
        return ResolventStatus::ImpliedByE;
    }
    ResolventStatus::Missing
}

/// Is `f` exactly an instance of `e` (some substitution sends e's literal
/// set onto f's)?
fn instance_of(e: &Clause, f: &Clause) -> bool {
    let (f, e) = Clause::standardize_apart(f, e);
    fn go(pats: &[Literal], e: &Clause, f: &Clause, sigma: &Substitution) -> bool {
        let Some((first, rest)) = pats.split_first() else {
            return e.apply(sigma) == *f;
        };
        for candidate in f.literals() {
            let mut attempt = sigma.clone();
            if match_literal(first, candidate, &mut attempt) && go(rest, e, f, &attempt) {
                return true;
            }
        }
        false
    }
    go(e.literals(), &e, &f, &Substitution::new())
}

// --- consistency ---

/// Witness that a base is inconsistent.
#[derive(Clone, Debug)]
pub enum ConsistencyWitness {
    /// The environment alone is contradictory.
    Environment(Box<Derivation>),
    /// Both a permission and a prohibition of the same fresh action follow.
    PermitAndDeny {
        permit: Box<Derivation>,
        deny: Box<Derivation>,
    },
}

#[derive(Clone, Debug)]
pub enum ConsistencyVerdict {
    Consistent,
    Inconsistent(ConsistencyWitness),
    Unknown,
}

impl ConsistencyVerdict {
    pub fn word(&self) -> &'static str {
        match self {
            ConsistencyVerdict::Consistent => "consistent",
            ConsistencyVerdict::Inconsistent(_) => "inconsistent",
            ConsistencyVerdict::Unknown => "unknown",
        }
    }
}

enum EnvSat {
    Satisfiable,
    Unsatisfiable(Box<Derivation>),
    Unknown,
}

/// Consistency of a policy base. When the separation check succeeds the
/// base is satisfiable iff the environment is (checked by clash scan plus
/// saturation of E0 and E1). Otherwise the base is inconsistent iff it
/// both permits and denies an action on fresh constants.
pub fn check_consistency(base: &PolicyBase, options: &AnswerOptions) -> ConsistencyVerdict {
    let separation = check_separation(base);
    if separation.satisfied {
        return match env_satisfiable(base, options.fuel) {
            EnvSat::Satisfiable => ConsistencyVerdict::Consistent,
            EnvSat::Unsatisfiable(d) => {
                ConsistencyVerdict::Inconsistent(ConsistencyWitness::Environment(d))
            }
            EnvSat::Unknown => ConsistencyVerdict::Unknown,
        };
    }

    // Fresh constants, one per sort required by the Permitted signature,
    // outside the user namespace.
    let mut table = (*base.symbols).clone();
    let permitted = table.permitted();
    let mut fresh: BTreeMap<Sort, Term> = BTreeMap::new();
    for sort in permitted.arg_sorts() {
        if !fresh.contains_key(sort) {
            let sym = table.fresh_constant("c", sort.clone());
            fresh.insert(sort.clone(), Term::constant(sym).expect("constant"));
        }
    }
    let args: Vec<Term> = permitted
        .arg_sorts()
        .iter()
        .map(|s| fresh[s].clone())
        .collect();
    let base = PolicyBase {
        symbols: Arc::new(table),
        e0: base.e0.clone(),
        e1: base.e1.clone(),
        policies: base.policies.clone(),
    };
    let opts = AnswerOptions {
        fallback: true,
        fuel: options.fuel,
    };
    let permit_goal = Goal::new(PolicySign::Permit, args.clone(), &permitted)
        .expect("fresh goal is well-sorted and closed");
    let deny_goal =
        Goal::new(PolicySign::Deny, args, &permitted).expect("fresh goal is well-sorted and closed");
    let vp = answer(&Query::new(base.clone(), permit_goal), &opts);
    let vd = answer(&Query::new(base, deny_goal), &opts);
    match (vp, vd) {
        (Verdict::Valid(p), Verdict::Valid(d)) => {
            ConsistencyVerdict::Inconsistent(ConsistencyWitness::PermitAndDeny {
                permit: p,
                deny: d,
            })
        }
        (Verdict::Invalid, _) | (_, Verdict::Invalid) => ConsistencyVerdict::Consistent,
        _ => ConsistencyVerdict::Unknown,
    }
}

fn env_satisfiable(base: &PolicyBase, fuel: u64) -> EnvSat {
    let env_base = PolicyBase {
        symbols: base.symbols.clone(),
        e0: base.e0.clone(),
        e1: base.e1.clone(),
        policies: Vec::new(),
    };
    let index = LiteralIndex::build(env_base.e0.iter());
    if let Some((lit, partner)) = index.find_clash() {
        return EnvSat::Unsatisfiable(Box::new(clash_witness(&lit, partner.as_ref())));
    }
    let safe = equality_safe(&env_base).safe;
    let work = if safe {
        match crate::equality::to_equation_free_base(&env_base) {
            Ok(b) => b,
            Err(_) => env_base.clone(),
        }
    } else {
        env_base.clone()
    };
    // Re-scan: the transform can surface a clash (a disequality collapsing
    // to t != t).
    let index = LiteralIndex::build(work.e0.iter());
    if let Some((lit, partner)) = index.find_clash() {
        return EnvSat::Unsatisfiable(Box::new(clash_witness(&lit, partner.as_ref())));
    }
    let mut labels: Vec<String> = Vec::new();
    let mut clauses: Vec<Clause> = Vec::new();
    for (i, lit) in work.e0.iter().enumerate() {
        labels.push(format!("env fact {}", i + 1));
        clauses.push(Clause::new(vec![lit.clone()]));
    }
    for (origin, clause) in work.universal_clauses() {
        labels.push(work.origin_label(origin));
        clauses.push(clause);
    }
    let result = crate::resolution::saturate(&clauses, fuel);
    if let Some(at) = result.empty_clause() {
        return EnvSat::Unsatisfiable(Box::new(crate::derivation::from_closure(
            &result, at, &labels,
        )));
    }
    if result.exhausted || !safe {
        // Saturation without paramodulation cannot certify satisfiability
        // in the presence of positive equations.
        EnvSat::Unknown
    } else {
        EnvSat::Satisfiable
    }
}

// --- definition unfolding ---

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnfoldError {
    #[error("`{0}` is not a declared predicate")]
    NotAPredicate(String),
    #[error("`{0}` is not unary; only unary predicates can be unfolded")]
    NotUnary(String),
    #[error("`{pred}` has no defining rules of the form `l1 & ... & lk => {pred}(x)`")]
    NoDefinitions { pred: String },
    #[error("rule `{rule}` is not a definition of `{pred}`: its conclusion is not `{pred}` over a variable")]
    BadDefinitionShape { pred: String, rule: String },
    #[error("`{pred}` occurs positively outside its definitions, in `{clause}`")]
    PositiveOccurrenceElsewhere { pred: String, clause: String },
    #[error("policy `{policy}` uses `{pred}` negated; negative uses cannot be unfolded")]
    NegativeUse { pred: String, policy: String },
}

/// Result of unfolding: the rewritten base plus which definition rules
/// (as E1 indices of the input base) were used and which the pruning pass
/// discarded.
#[derive(Clone, Debug)]
pub struct UnfoldOutcome {
    pub base: PolicyBase,
    pub used_definitions: Vec<usize>,
    pub pruned_definitions: Vec<usize>,
}

/// Replaces defined predicates in policy antecedents by their definition
/// bodies. A predicate is defined by the E1 rules concluding it positively
/// over a variable; a policy using m defined literals with c_1, ..., c_m
/// active definitions becomes c_1 x ... x c_m policies. With `prune`,
/// definitions whose bodies cannot ground against E0 are dropped first.
/// Used definition rules leave the environment.
pub fn unfold_definitions(
    base: &PolicyBase,
    preds: &[String],
    prune: bool,
) -> Result<UnfoldOutcome, UnfoldError> {
    let mut defined: Vec<(String, Vec<usize>)> = Vec::new();
    for name in preds {
        let sym = base
            .symbols
            .symbol(name)
            .filter(|s| s.kind() == crate::symbol::SymbolKind::Predicate)
            .ok_or_else(|| UnfoldError::NotAPredicate(name.clone()))?;
        if sym.arity() != 1 {
            return Err(UnfoldError::NotUnary(name.clone()));
        }
        let mut rules = Vec::new();
        for (i, rule) in base.e1.iter().enumerate() {
            let concluded = rule.conclusion.pred.name() == name && rule.conclusion.positive;
            if concluded {
                if !matches!(rule.conclusion.args[0], Term::Var(_)) {
                    return Err(UnfoldError::BadDefinitionShape {
                        pred: name.clone(),
                        rule: rule.clause().to_string(),
                    });
                }
                rules.push(i);
            }
            // A positive clause occurrence outside a conclusion comes from
            // a negated antecedent literal.
            if rule
                .antecedent
                .iter()
                .any(|l| l.pred.name() == name && !l.positive)
            {
                return Err(UnfoldError::PositiveOccurrenceElsewhere {
                    pred: name.clone(),
                    clause: rule.clause().to_string(),
                });
            }
        }
        if rules.is_empty() {
            return Err(UnfoldError::NoDefinitions { pred: name.clone() });
        }
        for policy in &base.policies {
            if policy
                .antecedent
                .iter()
                .any(|l| l.pred.name() == name && !l.positive)
            {
                return Err(UnfoldError::NegativeUse {
                    pred: name.clone(),
                    policy: policy.label.clone(),
                });
            }
        }
        defined.push((name.clone(), rules));
    }

    // Pruning: a definition survives iff its body can ground into E0.
    let index = LiteralIndex::build(base.e0.iter());
    let mut pruned_definitions: Vec<usize> = Vec::new();
    let mut active: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (name, rules) in &defined {
        let kept: Vec<usize> = rules
            .iter()
            .copied()
            .filter(|&i| {
                if !prune {
                    return true;
                }
                let grounds = body_grounds_in_env(&base.e1[i], &index);
                if !grounds {
                    pruned_definitions.push(i);
                }
                grounds
            })
            .collect();
        active.insert(name.as_str(), kept);
    }

    let permitted = base.permitted();
    let mut policies: Vec<Policy> = Vec::new();
    let mut used_definitions: Vec<usize> = Vec::new();
    for policy in &base.policies {
        let positions: Vec<usize> = policy
            .antecedent
            .iter()
            .enumerate()
            .filter(|(_, l)| active.contains_key(l.pred.name()))
            .map(|(i, _)| i)
            .collect();
        if positions.is_empty() {
            policies.push(policy.clone());
            continue;
        }
        for &pos in &positions {
            let pred = policy.antecedent[pos].pred.name();
            for &rule in &active[pred] {
                if !used_definitions.contains(&rule) {
                    used_definitions.push(rule);
                }
            }
        }
        let choices: Vec<&Vec<usize>> = positions
            .iter()
            .map(|&pos| &active[policy.antecedent[pos].pred.name()])
            .collect();
        let combos = cartesian(&choices);
        let many = combos.len() > 1;
        for (n, combo) in combos.into_iter().enumerate() {
            let label = if many {
                format!("{}_{}", policy.label, n + 1)
            } else {
                policy.label.clone()
            };
            policies.push(expand_policy(
                policy,
                &positions,
                &combo,
                &base.e1,
                &label,
                &permitted,
            ));
        }
    }

    // Definitions of used predicates leave E1 (both the expanded and the
    // pruned ones); everything else stays.
    let used_preds: Vec<&str> = defined
        .iter()
        .filter(|(name, _)| {
            base.policies.iter().any(|p| {
                p.antecedent
                    .iter()
                    .any(|l| l.pred.name() == name.as_str())
            })
        })
        .map(|(name, _)| name.as_str())
        .collect();
    let e1: Vec<EnvRule> = base
        .e1
        .iter()
        .enumerate()
        .filter(|(i, rule)| {
            let is_def_of_used = used_preds.contains(&rule.conclusion.pred.name())
                && defined
                    .iter()
                    .any(|(n, rules)| n == rule.conclusion.pred.name() && rules.contains(i));
            !is_def_of_used
        })
        .map(|(_, r)| r.clone())
        .collect();
    used_definitions.sort_unstable();
    pruned_definitions.sort_unstable();
    pruned_definitions.dedup();

    let base = PolicyBase::new(base.symbols.clone(), base.e0.clone(), e1, policies)
        .expect("unfolding preserves base invariants");
    Ok(UnfoldOutcome {
        base,
        used_definitions,
        pruned_definitions,
    })
}

fn body_grounds_in_env(rule: &EnvRule, index: &LiteralIndex) -> bool {
    fn go(lits: &[Literal], index: &LiteralIndex, sigma: &Substitution) -> bool {
        let Some((first, rest)) = lits.split_first() else {
            return true;
        };
        let current = first.apply(sigma);
        if current.is_ground() {
            return index.contains(&current) && go(rest, index, sigma);
        }
        for target in index.with_pred(current.pred.name(), current.positive) {
            let mut attempt = Substitution::new();
            if match_literal(&current, target, &mut attempt) && go(rest, index, &sigma.then(&attempt))
            {
                return true;
            }
        }
        false
    }
    go(&rule.antecedent, index, &Substitution::new())
}

fn cartesian(choices: &[&Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for list in choices {
        let mut next = Vec::new();
        for prefix in &out {
            for &c in list.iter() {
                let mut row = prefix.clone();
                row.push(c);
                next.push(row);
            }
        }
        out = next;
    }
    if choices.iter().any(|l| l.is_empty()) {
        return Vec::new();
    }
    out
}

fn expand_policy(
    policy: &Policy,
    positions: &[usize],
    combo: &[usize],
    rules: &[EnvRule],
    label: &str,
    permitted: &crate::symbol::Symbol,
) -> Policy {
    let mut next_var: u32 = 0;
    let bump = |v: &crate::term::Variable, next: &mut u32| {
        if v.id >= *next {
            *next = v.id + 1;
        }
    };
    for lit in policy.antecedent.iter().chain([policy.head()]) {
        lit.for_each_var(&mut |v| bump(v, &mut next_var));
    }

    let mut antecedent: Vec<Literal> = Vec::new();
    for (i, lit) in policy.antecedent.iter().enumerate() {
        match positions.iter().position(|&p| p == i) {
            None => antecedent.push(lit.clone()),
            Some(slot) => {
                let rule = &rules[combo[slot]];
                let Term::Var(head_var) = &rule.conclusion.args[0] else {
                    unreachable!("definition shape checked")
                };
                // Map the definition's head variable to the argument term
                // and freshen its remaining variables into the policy's
                // variable space.
                let mut map: BTreeMap<u32, Term> = BTreeMap::new();
                map.insert(head_var.id, lit.args[0].clone());
                for body_lit in &rule.antecedent {
                    body_lit.for_each_var(&mut |v| {
                        if v.id != head_var.id && !map.contains_key(&v.id) {
                            map.insert(
                                v.id,
                                Term::Var(crate::term::Variable::new(
                                    next_var,
                                    v.sort.clone(),
                                    &v.name,
                                )),
                            );
                            next_var += 1;
                        }
                    });
                }
                for body_lit in &rule.antecedent {
                    antecedent.push(substitute_mapped(body_lit, &map));
                }
            }
        }
    }
    Policy::new(
        label,
        policy.sign(),
        antecedent,
        policy.head().args.clone(),
        permitted,
    )
    .expect("expansion preserves sorts")
}

fn substitute_mapped(lit: &Literal, map: &BTreeMap<u32, Term>) -> Literal {
    fn go(t: &Term, map: &BTreeMap<u32, Term>) -> Term {
        match t {
            Term::Var(v) => map.get(&v.id).cloned().unwrap_or_else(|| t.clone()),
            Term::App(sym, args) => {
                Term::App(sym.clone(), args.iter().map(|a| go(a, map)).collect())
            }
        }
    }
    Literal {
        positive: lit.positive,
        pred: lit.pred.clone(),
        args: lit.args.iter().map(|a| go(a, map)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_base;

    fn query(src: &str, name: &str) -> Query {
        let (base, queries) = parse_base(src).unwrap();
        let goal = queries.into_iter().find(|q| q.name == name).unwrap().goal;
        Query::new(base, goal)
    }

    fn verdict(src: &str, name: &str) -> Verdict {
        answer(&query(src, name), &AnswerOptions::default())
    }

    fn assert_valid_and_replay(v: &Verdict) {
        match v {
            Verdict::Valid(d) => d.verify().unwrap(),
            other => panic!("expected Valid, got {}", other.word()),
        }
    }

    const BOSS_CHAIN: &str = "
        const Alice: Subjects; const play: Actions;
        pred BossOf(Subjects, Subjects);
        policy p1: permit(Alice, play);
        policy p2: forall x1: Subjects, x2: Subjects .
            Permitted(x1, play) & BossOf(x2, x1) => permit(x2, play);
        query alice: permit(Alice, play);
    ";

    #[test]
    fn boss_chain_is_not_in_the_fragment() {
        let q = query(BOSS_CHAIN, "alice");
        let report = membership(&q);
        assert!(!report.in_lithium);
        let offenders = report.offenders();
        assert_eq!(offenders.len(), 1);
        assert_eq!(offenders[0].0, "p2");
        assert_eq!(report.bipolar.per_clause_count[1], 2);
        assert_eq!(report.suggested_path, SuggestedPath::Fallback);
    }

    #[test]
    fn copy_base_is_full_path_with_k_two() {
        let q = query(
            "sort Files;
             const Alice: Subjects; const MsJones: Subjects; const fileA: Files;
             func copySrcDst(Files, Files): Actions;
             func Read(Files): Actions;
             env Alice = MsJones;
             policy p1: forall x1: Files, x2: Files . permit(Alice, copySrcDst(x1, x2));
             policy p2: forall x1: Files, x2: Files .
                 Permitted(MsJones, copySrcDst(x1, x2)) => permit(MsJones, Read(x1));
             query read: permit(Alice, Read(fileA));",
            "read",
        );
        let report = membership(&q);
        assert!(report.in_lithium);
        assert_eq!(report.suggested_path, SuggestedPath::FullPath);
        assert_eq!(report.per_clause_k, vec![2, 1]);
        // And the query itself holds.
        let v = answer(&q, &AnswerOptions::default());
        assert_valid_and_replay(&v);
    }

    #[test]
    fn negation_free_simple_base_is_fast_path() {
        let q = query(
            "const Alice: Subjects; const play: Actions;
             pred Student(Subjects); pred Good(Subjects);
             env Student(Alice); env Good(Alice);
             policy work: forall x: Subjects . Student(x) => permit(x, play);
             query g: permit(Alice, play);",
            "g",
        );
        let report = membership(&q);
        assert!(report.in_lithium);
        assert_eq!(report.suggested_path, SuggestedPath::FastPath);
    }

    #[test]
    fn student_play_query_is_valid() {
        let v = verdict(
            "const Alice: Subjects; const work: Actions; const play: Actions;
             pred Student(Subjects); pred Good(Subjects);
             env Student(Alice); env Good(Alice);
             policy p1: forall x: Subjects . Student(x) => permit(x, work);
             policy p2: forall x: Subjects . Student(x) & Good(x) => permit(x, play);
             query g: permit(Alice, play);",
            "g",
        );
        assert_valid_and_replay(&v);
    }

    #[test]
    fn crying_needs_both_policies() {
        let both = "
            const Alice: Subjects; const cry: Actions; pred Happy(Subjects);
            policy p1: Happy(Alice) => permit(Alice, cry);
            policy p2: !Happy(Alice) => permit(Alice, cry);
            query g: permit(Alice, cry);
        ";
        assert_valid_and_replay(&verdict(both, "g"));
        let one = "
            const Alice: Subjects; const cry: Actions; pred Happy(Subjects);
            policy p1: Happy(Alice) => permit(Alice, cry);
            query g: permit(Alice, cry);
        ";
        assert!(matches!(verdict(one, "g"), Verdict::Invalid));
    }

    #[test]
    fn empty_base_entails_nothing() {
        let v = verdict(
            "const Alice: Subjects; const play: Actions;
             query g: permit(Alice, play);",
            "g",
        );
        assert!(matches!(v, Verdict::Invalid));
    }

    #[test]
    fn repaired_faculty_base_lets_alice_nap() {
        let v = verdict(
            "const Alice: Subjects; const chair: Actions; const nap: Actions;
             pred Student(Subjects); pred Faculty(Subjects);
             env Student(Alice);
             env forall x: Subjects . Student(x) => !Faculty(x);
             policy p1: forall x: Subjects . Faculty(x) => permit(x, chair);
             policy p3: forall x: Subjects . !Faculty(x) => permit(x, nap);
             query nap: permit(Alice, nap);",
            "nap",
        );
        assert_valid_and_replay(&v);
    }

    #[test]
    fn fallback_is_opt_in() {
        let q = query(BOSS_CHAIN, "alice");
        assert!(matches!(
            answer(&q, &AnswerOptions::default()),
            Verdict::NotInLithium(_)
        ));
        // p1 makes the permit query valid; fallback saturation finds it.
        let v = answer(
            &q,
            &AnswerOptions {
                fallback: true,
                fuel: 1_000,
            },
        );
        assert_valid_and_replay(&v);
    }

    #[test]
    fn deny_goals_run_the_same_pipeline() {
        let v = verdict(
            "const Bob: Subjects; const editCat: Actions;
             pred Librarian(Subjects);
             env !Librarian(Bob);
             policy only: forall x: Subjects . !Librarian(x) => deny(x, editCat);
             query bob: deny(Bob, editCat);",
            "bob",
        );
        assert_valid_and_replay(&v);
    }

    #[test]
    fn inconsistent_e0_makes_everything_valid() {
        let v = verdict(
            "const Alice: Subjects; const play: Actions; pred Happy(Subjects);
             env Happy(Alice); env !Happy(Alice);
             query g: permit(Alice, play);",
            "g",
        );
        assert_valid_and_replay(&v);
    }

    #[test]
    fn unconditional_ground_policy_matches_with_empty_substitution() {
        let v = verdict(
            "const Alice: Subjects; const sing: Actions;
             policy p: permit(Alice, sing);
             query g: permit(Alice, sing);",
            "g",
        );
        assert_valid_and_replay(&v);
    }

    // --- separation ---

    const FACULTY_UNREPAIRED: &str = "
        const Alice: Subjects; const chair: Actions; const nap: Actions;
        pred Student(Subjects); pred Faculty(Subjects);
        env Student(Alice);
        policy p1: forall x: Subjects . Faculty(x) => permit(x, chair);
        policy p3: forall x: Subjects . !Faculty(x) => permit(x, nap);
        policy p2: forall x: Subjects . Student(x) => deny(x, chair);
    ";

    #[test]
    fn separation_flags_the_missing_resolvent() {
        let (base, _) = parse_base(FACULTY_UNREPAIRED).unwrap();
        let report = check_separation(&base);
        assert!(!report.satisfied);
        assert_eq!(report.resolvents.len(), 1);
        let r = &report.resolvents[0];
        assert_eq!((r.permit_label.as_str(), r.deny_label.as_str()), ("p1", "p2"));
        assert_eq!(r.status, ResolventStatus::Missing);
        assert_eq!(r.resolvent.to_string(), "!Faculty(x) | !Student(x)");

        // Adding the suggested fact repairs separation.
        let repaired = format!(
            "{}\n env forall x: Subjects . Student(x) => !Faculty(x);",
            FACULTY_UNREPAIRED
        );
        let (base, _) = parse_base(&repaired).unwrap();
        let report = check_separation(&base);
        assert!(report.satisfied);
        assert_eq!(report.resolvents[0].status, ResolventStatus::ImpliedByE);
    }

    #[test]
    fn no_denying_policies_is_trivially_separated() {
        let (base, _) = parse_base(
            "const a: Subjects; const act: Actions;
             policy p: permit(a, act);",
        )
        .unwrap();
        let report = check_separation(&base);
        assert!(report.satisfied);
        assert!(report.resolvents.is_empty());
    }

    #[test]
    fn simple_policies_give_permitted_free_resolvents() {
        let (base, _) = parse_base(
            "const act: Actions;
             pred A(Subjects); pred B(Subjects); pred C(Subjects);
             policy pa: forall x: Subjects . A(x) => permit(x, act);
             policy pb: forall x: Subjects . B(x) => permit(x, act);
             policy da: forall x: Subjects . C(x) => deny(x, act);",
        )
        .unwrap();
        let report = check_separation(&base);
        assert_eq!(report.resolvents.len(), 2);
        assert!(report
            .resolvents
            .iter()
            .all(|r| r.resolvent.literals().iter().all(|l| !l.mentions_permitted())));
    }

    #[test]
    fn impure_permitting_policy_blocks_separation() {
        let (base, _) = parse_base(
            "const a: Subjects; const b: Subjects; const act: Actions;
             policy chain: Permitted(a, act) => permit(b, act);
             policy d: deny(a, act);",
        )
        .unwrap();
        let report = check_separation(&base);
        assert_eq!(report.impure_policies, vec!["chain".to_string()]);
        assert!(!report.satisfied);
    }

    // --- consistency ---

    #[test]
    fn complementary_facts_are_inconsistent() {
        let (base, _) = parse_base(
            "const Alice: Subjects; pred Happy(Subjects);
             env Happy(Alice); env !Happy(Alice);",
        )
        .unwrap();
        let v = check_consistency(&base, &AnswerOptions::default());
        match v {
            ConsistencyVerdict::Inconsistent(ConsistencyWitness::Environment(d)) => {
                d.verify().unwrap()
            }
            other => panic!("expected environment inconsistency, got {}", other.word()),
        }
    }

    #[test]
    fn smoking_policies_are_consistent() {
        let (base, _) = parse_base(
            "sort Numbers;
             const Alice: Subjects; const smoke: Actions; const n18: Numbers;
             func age(Subjects): Numbers;
             pred GreaterThan(Numbers, Numbers);
             env GreaterThan(age(Alice), n18);
             policy p1: forall x: Subjects . GreaterThan(age(x), n18) => permit(x, smoke);
             policy p2: forall x: Subjects . !GreaterThan(age(x), n18) => deny(x, smoke);",
        )
        .unwrap();
        let v = check_consistency(&base, &AnswerOptions::default());
        assert!(matches!(v, ConsistencyVerdict::Consistent), "{}", v.word());
    }

    #[test]
    fn satisfied_separation_reduces_to_environment_satisfiability() {
        let (base, _) = parse_base(
            "const Alice: Subjects; const act: Actions; const other: Actions;
             pred A(Subjects); pred B(Subjects);
             env A(Alice);
             policy pa: forall x: Subjects . A(x) => permit(x, act);
             policy db: forall x: Subjects . B(x) => deny(x, other);",
        )
        .unwrap();
        let report = check_separation(&base);
        assert!(report.satisfied);
        let v = check_consistency(&base, &AnswerOptions::default());
        assert!(matches!(v, ConsistencyVerdict::Consistent));
    }

    #[test]
    fn conflicting_unconditional_policies_are_caught_by_fresh_constants() {
        // permit-everything and deny-everything: separation cannot hold
        // (the resolvent is the empty clause), and the fresh-constant
        // queries both come back valid.
        let (base, _) = parse_base(
            "policy yes: forall x: Subjects, a: Actions . permit(x, a);
             policy no: forall x: Subjects, a: Actions . deny(x, a);",
        )
        .unwrap();
        let v = check_consistency(&base, &AnswerOptions::default());
        match v {
            ConsistencyVerdict::Inconsistent(ConsistencyWitness::PermitAndDeny {
                permit,
                deny,
            }) => {
                permit.verify().unwrap();
                deny.verify().unwrap();
            }
            other => panic!("expected permit/deny inconsistency, got {}", other.word()),
        }
    }

    // --- unfolding ---

    const VIDEO_STORE: &str = "
        const helpdesk: Actions;
        pred Adult(Subjects); pred Member(Subjects);
        pred Over21(Subjects); pred Over18(Subjects);
        pred InNY(Subjects); pred InAK(Subjects);
        pred RegMember(Subjects); pred GoldMember(Subjects); pred PlatinumMember(Subjects);
        env forall x: Subjects . Over21(x) & InNY(x) => Adult(x);
        env forall x: Subjects . Over18(x) & InAK(x) => Adult(x);
        env forall x: Subjects . RegMember(x) => Member(x);
        env forall x: Subjects . GoldMember(x) => Member(x);
        env forall x: Subjects . PlatinumMember(x) => Member(x);
        policy p1: forall x: Subjects . Adult(x) & Member(x) => permit(x, helpdesk);
    ";

    #[test]
    fn video_store_unfolds_to_six_policies() {
        let (base, _) = parse_base(VIDEO_STORE).unwrap();
        let outcome = unfold_definitions(
            &base,
            &["Adult".to_string(), "Member".to_string()],
            false,
        )
        .unwrap();
        assert_eq!(outcome.base.policies.len(), 6);
        assert!(outcome.base.e1.is_empty(), "used definitions are removed");
        assert_eq!(outcome.used_definitions, vec![0, 1, 2, 3, 4]);
        // No bipolars remain.
        let clauses: Vec<Clause> = outcome
            .base
            .policies
            .iter()
            .map(|p| p.clause())
            .collect();
        assert!(bipolar_report(&clauses, None).pairs.is_empty());
        // Each expanded policy pairs one adulthood body with one membership
        // body.
        let texts: Vec<String> = outcome
            .base
            .policies
            .iter()
            .map(|p| p.clause().to_string())
            .collect();
        assert!(texts.iter().any(|t| t.contains("Over21") && t.contains("GoldMember")));
        assert!(texts.iter().any(|t| t.contains("Over18") && t.contains("RegMember")));
    }

    #[test]
    fn pruning_keeps_only_groundable_definitions() {
        let src = format!(
            "{}\n env RegMember(Alice); env Over18(Alice); env InAK(Alice);\n const Alice: Subjects;",
            VIDEO_STORE
        );
        // Constants must be declared before use; rebuild in proper order.
        let src = src.replace(
            "const helpdesk: Actions;",
            "const helpdesk: Actions; const Alice: Subjects;",
        );
        let src = src.replace("\n const Alice: Subjects;", "");
        let (base, _) = parse_base(&src).unwrap();
        let outcome = unfold_definitions(
            &base,
            &["Adult".to_string(), "Member".to_string()],
            true,
        )
        .unwrap();
        // Kept: the Alaska adulthood rule and the regular-member rule.
        assert_eq!(outcome.pruned_definitions, vec![0, 3, 4]);
        assert_eq!(outcome.base.policies.len(), 1);
        let text = outcome.base.policies[0].clause().to_string();
        assert!(text.contains("Over18") && text.contains("InAK") && text.contains("RegMember"));
        // The unfolded base still grants Alice the helpdesk permission.
        let permitted = outcome.base.permitted();
        let goal = Goal::new(
            PolicySign::Permit,
            vec![
                Term::constant(outcome.base.symbols.symbol("Alice").unwrap()).unwrap(),
                Term::constant(outcome.base.symbols.symbol("helpdesk").unwrap()).unwrap(),
            ],
            &permitted,
        )
        .unwrap();
        let v = answer(&Query::new(outcome.base, goal), &AnswerOptions::default());
        assert!(v.is_valid());
    }

    #[test]
    fn unused_definitions_leave_the_base_unchanged() {
        let (base, _) = parse_base(
            "const act: Actions;
             pred Adult(Subjects); pred Over18(Subjects); pred R(Subjects);
             env forall x: Subjects . Over18(x) => Adult(x);
             policy p: forall x: Subjects . R(x) => permit(x, act);",
        )
        .unwrap();
        let outcome = unfold_definitions(&base, &["Adult".to_string()], false).unwrap();
        assert_eq!(outcome.base.e1.len(), 1);
        assert_eq!(outcome.base.policies.len(), 1);
        assert!(outcome.used_definitions.is_empty());
    }

    #[test]
    fn non_definitions_are_rejected() {
        // Negative use in a policy antecedent.
        let (base, _) = parse_base(
            "const act: Actions;
             pred Adult(Subjects); pred Over18(Subjects);
             env forall x: Subjects . Over18(x) => Adult(x);
             policy p: forall x: Subjects . !Adult(x) => permit(x, act);",
        )
        .unwrap();
        assert!(matches!(
            unfold_definitions(&base, &["Adult".to_string()], false),
            Err(UnfoldError::NegativeUse { .. })
        ));

        // No defining rules at all.
        let (base, _) = parse_base(
            "const act: Actions; pred Adult(Subjects);
             policy p: forall x: Subjects . Adult(x) => permit(x, act);",
        )
        .unwrap();
        assert!(matches!(
            unfold_definitions(&base, &["Adult".to_string()], false),
            Err(UnfoldError::NoDefinitions { .. })
        ));

        // Ground conclusion is not a definition shape.
        let (base, _) = parse_base(
            "const a: Subjects; const act: Actions;
             pred Adult(Subjects); pred Over18(Subjects);
             env forall x: Subjects . Over18(x) => Adult(a);
             policy p: forall x: Subjects . Adult(x) => permit(x, act);",
        )
        .unwrap();
        assert!(matches!(
            unfold_definitions(&base, &["Adult".to_string()], false),
            Err(UnfoldError::BadDefinitionShape { .. })
        ));
    }

    #[test]
    fn verdicts_are_deterministic() {
        let src = "
            const Alice: Subjects; const cry: Actions; pred Happy(Subjects);
            policy p1: Happy(Alice) => permit(Alice, cry);
            policy p2: !Happy(Alice) => permit(Alice, cry);
            query g: permit(Alice, cry);
        ";
        let a = verdict(src, "g");
        let b = verdict(src, "g");
        match (a, b) {
            (Verdict::Valid(x), Verdict::Valid(y)) => {
                assert_eq!(x.render_text(), y.render_text());
            }
            _ => panic!("expected two valid verdicts"),
        }
    }
}
