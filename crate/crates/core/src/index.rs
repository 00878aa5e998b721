//! Ordered index over ground literals.
//!
//! Keys are the canonical textual forms of the literals, kept in a balanced
//! ordered map, which meets the logarithmic insert/search bound the
//! complexity results assume. Alongside the key set the index groups
//! literals by predicate-and-sign for matching, and collects the ground
//! terms of each sort as the candidate pool for variable assignment.

use std::collections::{BTreeMap, BTreeSet};

use crate::clause::Literal;
use crate::symbol::Sort;
use crate::term::Term;

#[derive(Clone, Debug, Default)]
pub struct LiteralIndex {
    keys: BTreeSet<String>,
    literals: Vec<Literal>,
    by_pred: BTreeMap<(String, bool), Vec<usize>>,
    terms_by_sort: BTreeMap<Sort, Vec<Term>>,
}

impl LiteralIndex {
    pub fn build<'a>(lits: impl IntoIterator<Item = &'a Literal>) -> LiteralIndex {
        let mut index = LiteralIndex::default();
        let mut term_sets: BTreeMap<Sort, BTreeSet<Term>> = BTreeMap::new();
        for lit in lits {
            debug_assert!(lit.is_ground());
            if !index.keys.insert(lit.canonical_key()) {
                continue;
            }
            let at = index.literals.len();
            index.literals.push(lit.clone());
            index
                .by_pred
                .entry((lit.pred.name().to_string(), lit.positive))
                .or_default()
                .push(at);
            for arg in &lit.args {
                arg.for_each_subterm(&mut |t| {
                    term_sets.entry(t.sort()).or_default().insert(t.clone());
                });
            }
        }
        index.terms_by_sort = term_sets
            .into_iter()
            .map(|(sort, set)| (sort, set.into_iter().collect()))
            .collect();
        index
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn contains(&self, lit: &Literal) -> bool {
        self.keys.contains(&lit.canonical_key())
    }

    /// Is the exact complement of `lit` indexed?
    pub fn contains_complement(&self, lit: &Literal) -> bool {
        self.contains(&lit.negated())
    }

    /// Indexed literals whose complement has the given predicate and sign,
    /// i.e. the match targets for a clause literal of that shape.
    pub fn complements_of(&self, pred_name: &str, positive: bool) -> impl Iterator<Item = &Literal> {
        self.with_pred(pred_name, !positive)
    }

    /// Indexed literals with the given predicate and sign.
    pub fn with_pred(&self, pred_name: &str, positive: bool) -> impl Iterator<Item = &Literal> {
        self.by_pred
            .get(&(pred_name.to_string(), positive))
            .into_iter()
            .flatten()
            .map(|&i| &self.literals[i])
    }

    /// First contradiction among the indexed literals: a `t != t` literal or
    /// a complementary pair, in insertion order.
    pub fn find_clash(&self) -> Option<(Literal, Option<Literal>)> {
        for lit in &self.literals {
            if lit.is_self_disequality() {
                return Some((lit.clone(), None));
            }
            if lit.positive && self.contains_complement(lit) {
                return Some((lit.clone(), Some(lit.negated())));
            }
        }
        None
    }

    /// Ground terms (subterms included) of the given sort, in term order.
    pub fn terms_of_sort(&self, sort: &Sort) -> &[Term] {
        self.terms_by_sort
            .get(sort)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// Total number of distinct terms mentioned (the `m` of the bounds).
    pub fn term_count(&self) -> usize {
        self.terms_by_sort.values().map(|v| v.len()).sum()
    }
}
