//! Most-general-unifier computation, bipolar-literal analysis, and
//! constrained-variable classification.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::clause::{Clause, Literal};
use crate::equality::EqClasses;
use crate::subst::Substitution;
use crate::term::{Term, Variable};

/// Why two atoms do not unify.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NoUnifier {
    #[error("predicate clash: {0} vs {1}")]
    PredicateClash(String, String),
    #[error("symbol clash: {0} vs {1}")]
    SymbolClash(String, String),
    #[error("occurs check: {var} inside {term}")]
    OccursCheck { var: String, term: String },
    #[error("sort clash binding {var}: {var_sort} vs {term_sort}")]
    SortClash {
        var: String,
        var_sort: String,
        term_sort: String,
    },
}

/// Most general unifier of two atoms, ignoring sign. The literals must be
/// standardized apart by the caller. The result is idempotent and any other
/// unifier factors through it; the occurs check is always on.
pub fn mgu(l1: &Literal, l2: &Literal) -> Result<Substitution, NoUnifier> {
    if l1.pred != l2.pred {
        return Err(NoUnifier::PredicateClash(
            l1.pred.name().to_string(),
            l2.pred.name().to_string(),
        ));
    }
    let s = unify_pairs(l1.args.iter().zip(l2.args.iter()))?;
    debug_assert_eq!(
        l1.apply(&s).args,
        l2.apply(&s).args,
        "unifier must equalize the atoms"
    );
    Ok(s)
}

/// Most general unifier of two terms.
pub fn mgu_terms(a: &Term, b: &Term) -> Result<Substitution, NoUnifier> {
    unify_pairs(std::iter::once((a, b)))
}

fn unify_pairs<'a>(
    pairs: impl Iterator<Item = (&'a Term, &'a Term)>,
) -> Result<Substitution, NoUnifier> {
    let mut subst = Substitution::new();
    let mut work: VecDeque<(Term, Term)> =
        pairs.map(|(a, b)| (a.clone(), b.clone())).collect();
    while let Some((a, b)) = work.pop_front() {
        let a = subst.apply_term(&a);
        let b = subst.apply_term(&b);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x.id == y.id => {}
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if t.contains_var(x.id) {
                    return Err(NoUnifier::OccursCheck {
                        var: x.name.to_string(),
                        term: t.to_string(),
                    });
                }
                subst
                    .compose_binding(&x, t.clone())
                    .map_err(|_| NoUnifier::SortClash {
                        var: x.name.to_string(),
                        var_sort: x.sort.name().to_string(),
                        term_sort: t.sort().name().to_string(),
                    })?;
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g {
                    return Err(NoUnifier::SymbolClash(
                        f.name().to_string(),
                        g.name().to_string(),
                    ));
                }
                for pair in xs.into_iter().zip(ys) {
                    work.push_back(pair);
                }
            }
        }
    }
    Ok(subst)
}

/// One-sided matching: extends `subst` so that `pattern · subst = target`,
/// binding only the pattern's variables. Target variables are rigid, so the
/// caller must keep the two sides variable-disjoint.
pub fn match_term(pattern: &Term, target: &Term, subst: &mut Substitution) -> bool {
    match pattern {
        Term::Var(v) => match subst.get(v.id) {
            Some(bound) => bound == target,
            None => {
                if v.sort != target.sort() {
                    return false;
                }
                subst.bind(v, target.clone()).is_ok()
            }
        },
        Term::App(f, args) => match target {
            Term::App(g, targs) if f == g => args
                .iter()
                .zip(targs)
                .all(|(p, t)| match_term(p, t, subst)),
            _ => false,
        },
    }
}

/// One-sided matching of whole literals: same sign and predicate, arguments
/// matched pairwise.
pub fn match_literal(pattern: &Literal, target: &Literal, subst: &mut Substitution) -> bool {
    pattern.positive == target.positive
        && pattern.pred == target.pred
        && pattern
            .args
            .iter()
            .zip(&target.args)
            .all(|(p, t)| match_term(p, t, subst))
}

/// Renames the two literals apart (bijectively per literal) so they share
/// no variable identifiers.
pub fn standardize_literals(l1: &Literal, l2: &Literal) -> (Literal, Literal) {
    let (c1, c2) = Clause::standardize_apart(
        &Clause::new(vec![l1.clone()]),
        &Clause::new(vec![l2.clone()]),
    );
    (c1.literals()[0].clone(), c2.literals()[0].clone())
}

/// Do `a` and the negation of `b` unify after standardizing apart? This is
/// the two-substitution unifiability of the bipolar definition, so it also
/// applies to two occurrences inside one clause.
pub fn complementary_unifiable(a: &Literal, b: &Literal) -> bool {
    if a.positive == b.positive || a.pred != b.pred {
        return false;
    }
    let (a, b) = standardize_literals(a, b);
    mgu(&a, &b).is_ok()
}

/// One bipolar pair: two literal occurrences, identified by
/// `(clause index, literal index)` into the analyzed clause list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipolarPair {
    pub left: (usize, usize),
    pub right: (usize, usize),
}

/// Bipolar-literal analysis over a clause set.
///
/// A literal occurrence is bipolar iff some other occurrence (any clause,
/// the same clause included, but never itself) has the opposite sign and a
/// unifiable atom after renaming apart. When built relative to equality
/// classes, all terms are first rewritten to their representatives.
#[derive(Clone, Debug)]
pub struct BipolarReport {
    /// The clauses as analyzed (rewritten when equalities were supplied).
    pub clauses: Vec<Clause>,
    /// Each unordered pair once, lexicographically ordered.
    pub pairs: Vec<BipolarPair>,
    /// Number of bipolar literal occurrences per clause.
    pub per_clause_count: Vec<usize>,
    flags: Vec<Vec<bool>>,
}

impl BipolarReport {
    pub fn is_bipolar(&self, clause: usize, literal: usize) -> bool {
        self.flags[clause][literal]
    }

    pub fn literal(&self, at: (usize, usize)) -> &Literal {
        &self.clauses[at.0].literals()[at.1]
    }

    pub fn max_count(&self) -> usize {
        self.per_clause_count.iter().copied().max().unwrap_or(0)
    }

    /// Indices of clauses carrying two or more bipolar literals.
    pub fn offenders(&self) -> Vec<usize> {
        self.per_clause_count
            .iter()
            .enumerate()
            .filter(|(_, &n)| n >= 2)
            .map(|(i, _)| i)
            .collect()
    }

    /// Pairs touching the given clause.
    pub fn pairs_of(&self, clause: usize) -> Vec<&BipolarPair> {
        self.pairs
            .iter()
            .filter(|p| p.left.0 == clause || p.right.0 == clause)
            .collect()
    }
}

impl fmt::Display for BipolarReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} bipolar pair(s)", self.pairs.len())?;
        for p in &self.pairs {
            writeln!(
                f,
                "  clause {} `{}`  ~  clause {} `{}`",
                p.left.0,
                self.literal(p.left),
                p.right.0,
                self.literal(p.right)
            )?;
        }
        Ok(())
    }
}

/// Computes the bipolar report for a clause set, optionally relative to a
/// set of equality classes.
pub fn bipolar_report(clauses: &[Clause], eq: Option<&EqClasses>) -> BipolarReport {
    let clauses: Vec<Clause> = match eq {
        Some(classes) => clauses.iter().map(|c| classes.rewrite_clause(c)).collect(),
        None => clauses.to_vec(),
    };
    let mut flags: Vec<Vec<bool>> = clauses.iter().map(|c| vec![false; c.len()]).collect();
    let mut pairs = Vec::new();
    for a in 0..clauses.len() {
        for i in 0..clauses[a].len() {
            for b in a..clauses.len() {
                let start = if b == a { i + 1 } else { 0 };
                for j in start..clauses[b].len() {
                    let la = &clauses[a].literals()[i];
                    let lb = &clauses[b].literals()[j];
                    if complementary_unifiable(la, lb) {
                        flags[a][i] = true;
                        flags[b][j] = true;
                        pairs.push(BipolarPair {
                            left: (a, i),
                            right: (b, j),
                        });
                    }
                }
            }
        }
    }
    let per_clause_count = flags
        .iter()
        .map(|row| row.iter().filter(|&&b| b).count())
        .collect();
    BipolarReport {
        clauses,
        pairs,
        per_clause_count,
        flags,
    }
}

/// Which notion of constrained variable to use.
#[derive(Clone, Copy)]
pub enum ConstrainedMode<'a> {
    /// Variables occurring inside an argument of any `Permitted` literal.
    Plain,
    /// Same, but only `Permitted` literals that are not bipolar per the
    /// report count; `clause` indexes the report's clause list.
    Relative {
        report: &'a BipolarReport,
        clause: usize,
    },
}

/// The set of constrained variable ids of a clause. A variable anywhere
/// inside an argument term of a counted `Permitted` literal is constrained.
pub fn constrained_vars(c: &Clause, mode: ConstrainedMode<'_>) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    let collect = |lit: &Literal, out: &mut BTreeSet<u32>| {
        lit.for_each_var(&mut |v: &Variable| {
            out.insert(v.id);
        });
    };
    match mode {
        ConstrainedMode::Plain => {
            for lit in c.literals() {
                if lit.mentions_permitted() {
                    collect(lit, &mut out);
                }
            }
        }
        ConstrainedMode::Relative { report, clause } => {
            let c = &report.clauses[clause];
            for (i, lit) in c.literals().iter().enumerate() {
                if lit.mentions_permitted() && !report.is_bipolar(clause, i) {
                    collect(lit, &mut out);
                }
            }
        }
    }
    out
}

/// Number of variables of `c` not constrained in the given mode (the `k`
/// of the complexity bounds).
pub fn unconstrained_count(c: &Clause, mode: ConstrainedMode<'_>) -> usize {
    let constrained = constrained_vars(c, mode);
    c.variables()
        .iter()
        .filter(|v| !constrained.contains(&v.id))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_base;
    use crate::symbol::SymbolTable;
    use crate::term::Variable;

    fn table() -> SymbolTable {
        let mut t = SymbolTable::new();
        let subj = t.subjects();
        t.declare_constant("c1", subj.clone()).unwrap();
        t.declare_constant("c2", subj.clone()).unwrap();
        t.declare_constant("Alice", subj.clone()).unwrap();
        t.declare_function("f", vec![subj.clone()], subj.clone())
            .unwrap();
        t.declare_function("g", vec![subj.clone()], subj.clone())
            .unwrap();
        t.declare_predicate("R", vec![subj.clone(), subj.clone()])
            .unwrap();
        t.declare_predicate("S", vec![subj]).unwrap();
        t
    }

    fn con(t: &SymbolTable, name: &str) -> Term {
        Term::constant(t.symbol(name).unwrap()).unwrap()
    }

    fn v(t: &SymbolTable, id: u32, name: &str) -> Term {
        Term::Var(Variable::new(id, t.subjects(), name))
    }

    #[test]
    fn crossing_constants_unify() {
        // R(x, c1) vs R(c2, y) -> {x -> c2, y -> c1}
        let t = table();
        let l1 = Literal::new(
            true,
            t.symbol("R").unwrap(),
            vec![v(&t, 0, "x"), con(&t, "c1")],
        )
        .unwrap();
        let l2 = Literal::new(
            true,
            t.symbol("R").unwrap(),
            vec![con(&t, "c2"), v(&t, 1, "y")],
        )
        .unwrap();
        let s = mgu(&l1, &l2).unwrap();
        assert_eq!(s.get(0), Some(&con(&t, "c2")));
        assert_eq!(s.get(1), Some(&con(&t, "c1")));
    }

    #[test]
    fn distinct_constants_clash() {
        // R(x, c1) vs R(y, c2) has no unifier.
        let t = table();
        let l1 = Literal::new(
            true,
            t.symbol("R").unwrap(),
            vec![v(&t, 0, "x"), con(&t, "c1")],
        )
        .unwrap();
        let l2 = Literal::new(
            true,
            t.symbol("R").unwrap(),
            vec![v(&t, 1, "y"), con(&t, "c2")],
        )
        .unwrap();
        assert!(matches!(mgu(&l1, &l2), Err(NoUnifier::SymbolClash(..))));
    }

    #[test]
    fn most_general_binding_prefers_the_variable() {
        // S(y) vs S(f(x)) -> {y -> f(x)}, not a grounding substitution.
        let t = table();
        let l1 = Literal::new(true, t.symbol("S").unwrap(), vec![v(&t, 0, "y")]).unwrap();
        let fx = Term::app(t.symbol("f").unwrap(), vec![v(&t, 1, "x")]).unwrap();
        let l2 = Literal::new(true, t.symbol("S").unwrap(), vec![fx.clone()]).unwrap();
        let s = mgu(&l1, &l2).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(0), Some(&fx));
    }

    #[test]
    fn identical_ground_atoms_unify_empty() {
        let t = table();
        let l = Literal::new(true, t.symbol("S").unwrap(), vec![con(&t, "Alice")]).unwrap();
        let s = mgu(&l, &l.negated()).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn occurs_check_fires() {
        let t = table();
        let l1 = Literal::new(true, t.symbol("S").unwrap(), vec![v(&t, 0, "x")]).unwrap();
        let fx = Term::app(t.symbol("f").unwrap(), vec![v(&t, 0, "x")]).unwrap();
        let l2 = Literal::new(true, t.symbol("S").unwrap(), vec![fx]).unwrap();
        assert!(matches!(mgu(&l1, &l2), Err(NoUnifier::OccursCheck { .. })));
    }

    #[test]
    fn self_chaining_clause_is_doubly_bipolar() {
        // {!Permitted(x, nap), Permitted(Advisor(x), nap)}: both literals
        // bipolar, one pair, count 2.
        let (base, _) = parse_base(
            "const nap: Actions;
             func Advisor(Subjects): Subjects;
             policy p: forall x: Subjects . Permitted(x, nap) => permit(Advisor(x), nap);",
        )
        .unwrap();
        let clauses = vec![base.policies[0].clause()];
        let report = bipolar_report(&clauses, None);
        assert_eq!(report.pairs.len(), 1);
        assert_eq!(report.per_clause_count, vec![2]);
    }

    #[test]
    fn happy_pair_is_bipolar() {
        let (base, _) = parse_base(
            "const Alice: Subjects; const cry: Actions;
             pred Happy(Subjects);
             policy p1: Happy(Alice) => permit(Alice, cry);
             policy p2: !Happy(Alice) => permit(Alice, cry);",
        )
        .unwrap();
        let clauses: Vec<Clause> = base.policies.iter().map(|p| p.clause()).collect();
        let report = bipolar_report(&clauses, None);
        assert_eq!(report.pairs.len(), 1);
        let pair = &report.pairs[0];
        assert_eq!(report.literal(pair.left).pred.name(), "Happy");
        // Permitted(Alice, cry) occurs positively in both clauses: no pair.
        assert_eq!(report.per_clause_count, vec![1, 1]);
    }

    #[test]
    fn all_positive_distinct_predicates_no_pairs() {
        let (base, _) = parse_base(
            "const a: Subjects; pred R(Subjects); pred S(Subjects);
             env forall x: Subjects . R(x) => R(x);
             env S(a);",
        )
        .unwrap();
        // Use two unrelated positive unit clauses.
        let c1 = Clause::new(vec![base.e0[0].clone()]);
        let (b2, _) = parse_base("const b: Subjects; pred T(Subjects); env T(b);").unwrap();
        let c2 = Clause::new(vec![b2.e0[0].clone()]);
        let report = bipolar_report(&[c1, c2], None);
        assert!(report.pairs.is_empty());
        assert_eq!(report.max_count(), 0);
    }

    #[test]
    fn bipolar_relative_to_equalities() {
        // Permitted(Alice, nap) vs !Permitted(wifeOf(x), nap) only pair up
        // relative to Alice = wifeOf(Bob).
        let (base, _) = parse_base(
            "const Alice: Subjects; const Bob: Subjects; const nap: Actions;
             func wifeOf(Subjects): Subjects;
             env Alice = wifeOf(Bob);
             policy p1: permit(Alice, nap);
             policy p2: forall x: Subjects . Permitted(wifeOf(x), nap) => permit(x, nap);",
        )
        .unwrap();
        let clauses: Vec<Clause> = base.policies.iter().map(|p| p.clause()).collect();
        let plain = bipolar_report(&clauses, None);
        assert!(
            !plain.flags[0][0],
            "p1's literal is not bipolar without the equality"
        );
        let classes = EqClasses::build(base.e0.iter());
        let relative = bipolar_report(&clauses, Some(&classes));
        assert!(relative.per_clause_count[0] == 1);
        assert_eq!(relative.per_clause_count[1], 2, "p2 self-chains");
    }

    #[test]
    fn constrained_vars_plain() {
        // forall x y z {!R(x, z), Permitted(x, y)}: x and y constrained,
        // z is not.
        let (base, _) = parse_base(
            "sort Things;
             pred R(Subjects, Things);
             policy p: forall x: Subjects, y: Actions, z: Things . R(x, z) => permit(x, y);",
        )
        .unwrap();
        let c = base.policies[0].clause();
        let constrained = constrained_vars(&c, ConstrainedMode::Plain);
        assert_eq!(constrained.len(), 2);
        assert_eq!(unconstrained_count(&c, ConstrainedMode::Plain), 1);
    }

    #[test]
    fn no_permitted_literal_no_constraints() {
        let (base, _) = parse_base(
            "pred R(Subjects); pred S(Subjects);
             env forall x: Subjects . R(x) => S(x);",
        )
        .unwrap();
        let c = base.e1[0].clause();
        assert!(constrained_vars(&c, ConstrainedMode::Plain).is_empty());
    }

    #[test]
    fn copy_example_relative_constraints() {
        // Alice = MsJones; p1: Alice may copy anything anywhere;
        // p2: if MsJones may copy a file somewhere she may read it.
        let (base, _) = parse_base(
            "sort Files;
             const Alice: Subjects; const MsJones: Subjects;
             func copySrcDst(Files, Files): Actions;
             func Read(Files): Actions;
             env Alice = MsJones;
             policy p1: forall x1: Files, x2: Files . permit(Alice, copySrcDst(x1, x2));
             policy p2: forall x1: Files, x2: Files .
                 Permitted(MsJones, copySrcDst(x1, x2)) => permit(MsJones, Read(x1));",
        )
        .unwrap();
        let clauses: Vec<Clause> = base.policies.iter().map(|p| p.clause()).collect();
        let classes = EqClasses::build(base.e0.iter());
        let report = bipolar_report(&clauses, Some(&classes));
        assert_eq!(report.per_clause_count, vec![1, 1], "one bipolar each");

        // p1: its only literal is bipolar, so nothing is constrained
        // relative to the query.
        let k1 = unconstrained_count(
            &report.clauses[0],
            ConstrainedMode::Relative {
                report: &report,
                clause: 0,
            },
        );
        assert_eq!(k1, 2);

        // p2: x1 is constrained via the Read literal, x2 is not.
        let rel = constrained_vars(
            &report.clauses[1],
            ConstrainedMode::Relative {
                report: &report,
                clause: 1,
            },
        );
        assert_eq!(rel.len(), 1);
        let k2 = unconstrained_count(
            &report.clauses[1],
            ConstrainedMode::Relative {
                report: &report,
                clause: 1,
            },
        );
        assert_eq!(k2, 1);
    }
}
