//! Sorted first-order terms: variables and applications.

use std::fmt;
use std::sync::Arc;

use crate::symbol::{Sort, Symbol, SymbolKind};

/// A sorted variable.
///
/// Identity is the `(id, sort, name)` triple; operations that need disjoint
/// variables renumber `id` (see [`crate::clause::Clause::standardize_apart`]).
/// `name` is only a display hint and is wiped by canonicalization.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    pub id: u32,
    pub sort: Sort,
    pub name: Arc<str>,
}

impl Variable {
    pub fn new(id: u32, sort: Sort, name: &str) -> Self {
        Variable {
            id,
            sort,
            name: Arc::from(name),
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}:{}", self.name, self.id, self.sort)
    }
}

/// A term: a variable or a symbol application. Constants are zero-argument
/// applications.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(Variable),
    App(Symbol, Vec<Term>),
}

impl Term {
    /// Builds an application, checking the symbol's signature.
    pub fn app(symbol: Symbol, args: Vec<Term>) -> Result<Term, SortError> {
        if symbol.kind() == SymbolKind::Predicate {
            return Err(SortError::PredicateAsTerm(symbol.name().to_string()));
        }
        check_args(&symbol, &args)?;
        Ok(Term::App(symbol, args))
    }

    pub fn constant(symbol: Symbol) -> Result<Term, SortError> {
        Term::app(symbol, Vec::new())
    }

    /// Sort of the term (variables carry theirs, applications their symbol's
    /// result sort).
    pub fn sort(&self) -> Sort {
        match self {
            Term::Var(v) => v.sort.clone(),
            Term::App(sym, _) => sym
                .result_sort()
                .expect("term symbols always have a result sort")
                .clone(),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn mentions_function(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(sym, args) => {
                sym.kind() == SymbolKind::Function || args.iter().any(Term::mentions_function)
            }
        }
    }

    /// Is `sub` a proper subterm of `self`?
    pub fn has_proper_subterm(&self, sub: &Term) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().any(|a| a == sub || a.has_proper_subterm(sub)),
        }
    }

    /// Visits the term and all its subterms, outermost first.
    pub fn for_each_subterm<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        if let Term::App(_, args) = self {
            for a in args {
                a.for_each_subterm(f);
            }
        }
    }

    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a Variable)) {
        match self {
            Term::Var(v) => f(v),
            Term::App(_, args) => {
                for a in args {
                    a.for_each_var(f);
                }
            }
        }
    }

    pub fn contains_var(&self, id: u32) -> bool {
        let mut found = false;
        self.for_each_var(&mut |v| found |= v.id == id);
        found
    }

    /// Symbol count, the unit of the length bounds (a variable or a symbol
    /// occurrence each count as one).
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }
}

/// Total order on terms: variables before applications, variables by
/// `(sort, id, name)`, applications by symbol name then arguments. This is
/// the structural order behind the canonical literal ordering.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            (Term::Var(_), Term::App(..)) => Ordering::Less,
            (Term::App(..), Term::Var(_)) => Ordering::Greater,
            (Term::App(f, xs), Term::App(g, ys)) => f.cmp(g).then_with(|| xs.cmp(ys)),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(sym, args) => {
                write!(f, "{sym}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Sort and arity violations detected while building terms and literals.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SortError {
    #[error("`{symbol}` expects {expected} arguments, got {got}")]
    Arity {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("argument {index} of `{symbol}` has sort {got}, expected {expected}")]
    ArgSort {
        symbol: String,
        index: usize,
        expected: String,
        got: String,
    },
    #[error("predicate `{0}` used as a term")]
    PredicateAsTerm(String),
    #[error("equality arguments have different sorts: {0} vs {1}")]
    EqualitySorts(String, String),
    #[error("variable {var} of sort {var_sort} bound to a term of sort {term_sort}")]
    BindingSort {
        var: String,
        var_sort: String,
        term_sort: String,
    },
}

pub(crate) fn check_args(symbol: &Symbol, args: &[Term]) -> Result<(), SortError> {
    if args.len() != symbol.arity() {
        return Err(SortError::Arity {
            symbol: symbol.name().to_string(),
            expected: symbol.arity(),
            got: args.len(),
        });
    }
    for (i, (arg, expected)) in args.iter().zip(symbol.arg_sorts()).enumerate() {
        let got = arg.sort();
        if &got != expected {
            return Err(SortError::ArgSort {
                symbol: symbol.name().to_string(),
                index: i,
                expected: expected.name().to_string(),
                got: got.name().to_string(),
            });
        }
    }
    Ok(())
}
