//! Variable substitutions.

use std::collections::BTreeMap;
use std::fmt;

use crate::term::{SortError, Term, Variable};

/// A finite, sort-preserving map from variables to terms.
///
/// Bindings produced by unification are idempotent: applying a substitution
/// twice gives the same result as applying it once.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Substitution {
    map: BTreeMap<u32, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, var: u32) -> Option<&Term> {
        self.map.get(&var)
    }

    /// Bindings in ascending variable-id order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &Term)> {
        self.map.iter().map(|(k, v)| (*k, v))
    }

    /// Inserts a binding after checking sorts. No idempotence maintenance;
    /// use [`Substitution::compose_binding`] during unification.
    pub fn bind(&mut self, var: &Variable, term: Term) -> Result<(), SortError> {
        check_binding(var, &term)?;
        self.map.insert(var.id, term);
        Ok(())
    }

    /// Adds `var -> term` and rewrites the existing range with it, keeping
    /// the substitution idempotent. `term` must not contain `var`.
    pub fn compose_binding(&mut self, var: &Variable, term: Term) -> Result<(), SortError> {
        check_binding(var, &term)?;
        debug_assert!(!term.contains_var(var.id), "occurs check bypassed");
        let mut single = Substitution::new();
        single.map.insert(var.id, term.clone());
        for existing in self.map.values_mut() {
            *existing = single.apply_term(existing);
        }
        self.map.insert(var.id, term);
        Ok(())
    }

    pub fn apply_term(&self, term: &Term) -> Term {
        if self.map.is_empty() {
            return term.clone();
        }
        match term {
            Term::Var(v) => self.map.get(&v.id).cloned().unwrap_or_else(|| term.clone()),
            Term::App(sym, args) => Term::App(
                sym.clone(),
                args.iter().map(|a| self.apply_term(a)).collect(),
            ),
        }
    }

    /// `self` then `other`: `(t · self) · other = t · self.then(&other)`.
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut map: BTreeMap<u32, Term> = self
            .map
            .iter()
            .map(|(k, v)| (*k, other.apply_term(v)))
            .collect();
        for (k, v) in &other.map {
            map.entry(*k).or_insert_with(|| v.clone());
        }
        Substitution { map }
    }
}

fn check_binding(var: &Variable, term: &Term) -> Result<(), SortError> {
    let term_sort = term.sort();
    if term_sort != var.sort {
        return Err(SortError::BindingSort {
            var: var.name.to_string(),
            var_sort: var.sort.name().to_string(),
            term_sort: term_sort.name().to_string(),
        });
    }
    Ok(())
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (var, term)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "v{var} -> {term}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::SymbolTable;

    #[test]
    fn binding_is_sort_checked() {
        let mut table = SymbolTable::new();
        let alice = table.declare_constant("Alice", table.subjects()).unwrap();
        let x_times = Variable::new(0, table.times(), "x");
        let mut s = Substitution::new();
        assert!(s.bind(&x_times, Term::constant(alice).unwrap()).is_err());
    }

    #[test]
    fn compose_binding_keeps_idempotence() {
        let mut table = SymbolTable::new();
        let subj = table.subjects();
        let alice = Term::constant(table.declare_constant("Alice", subj.clone()).unwrap()).unwrap();
        let x = Variable::new(0, subj.clone(), "x");
        let y = Variable::new(1, subj.clone(), "y");

        let mut s = Substitution::new();
        s.compose_binding(&x, Term::Var(y.clone())).unwrap();
        s.compose_binding(&y, alice.clone()).unwrap();

        // x went through y, so both now reach Alice in one application.
        assert_eq!(s.apply_term(&Term::Var(x.clone())), alice);
        let once = s.apply_term(&Term::Var(x.clone()));
        assert_eq!(s.apply_term(&once), once);
    }
}
