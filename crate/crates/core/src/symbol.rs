//! Sorts, symbols and the per-base symbol table.
//!
//! Every policy base owns one frozen [`SymbolTable`]. The table is built
//! single-writer (by the parser or a test builder) and then shared read-only,
//! so symbols can be compared by name without carrying the table around.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Name of the built-in permission predicate.
pub const PERMITTED: &str = "Permitted";
/// Name of the built-in current-time constant.
pub const NOW: &str = "now";

/// Built-in sort names. These always exist in a fresh table.
pub const SORT_SUBJECTS: &str = "Subjects";
pub const SORT_ACTIONS: &str = "Actions";
pub const SORT_TIMES: &str = "Times";

/// A sort (type) of the many-sorted logic. Compared by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sort(Arc<str>);

impl Sort {
    pub fn new(name: &str) -> Self {
        Sort(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sort({})", self.0)
    }
}

/// What kind of vocabulary entry a symbol is.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SymbolKind {
    /// Zero-argument function.
    Constant,
    /// Function with at least one argument.
    Function,
    /// Predicate (no result sort).
    Predicate,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKind::Constant => f.write_str("constant"),
            SymbolKind::Function => f.write_str("function"),
            SymbolKind::Predicate => f.write_str("predicate"),
        }
    }
}

#[derive(PartialEq, Eq, Hash, Debug)]
struct SymbolData {
    name: Arc<str>,
    kind: SymbolKind,
    arg_sorts: Vec<Sort>,
    result_sort: Option<Sort>,
}

/// A vocabulary symbol: constant, function or predicate.
///
/// Cheap to clone; equality and ordering go by name, which is unique within
/// a symbol table.
#[derive(Clone)]
pub struct Symbol(Arc<SymbolData>);

impl Symbol {
    pub fn constant(name: &str, sort: Sort) -> Self {
        Symbol(Arc::new(SymbolData {
            name: Arc::from(name),
            kind: SymbolKind::Constant,
            arg_sorts: Vec::new(),
            result_sort: Some(sort),
        }))
    }

    pub fn function(name: &str, arg_sorts: Vec<Sort>, result_sort: Sort) -> Self {
        debug_assert!(!arg_sorts.is_empty());
        Symbol(Arc::new(SymbolData {
            name: Arc::from(name),
            kind: SymbolKind::Function,
            arg_sorts,
            result_sort: Some(result_sort),
        }))
    }

    pub fn predicate(name: &str, arg_sorts: Vec<Sort>) -> Self {
        Symbol(Arc::new(SymbolData {
            name: Arc::from(name),
            kind: SymbolKind::Predicate,
            arg_sorts,
            result_sort: None,
        }))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn kind(&self) -> SymbolKind {
        self.0.kind
    }

    pub fn arity(&self) -> usize {
        self.0.arg_sorts.len()
    }

    pub fn arg_sorts(&self) -> &[Sort] {
        &self.0.arg_sorts
    }

    /// Result sort of a constant or function; `None` for predicates.
    pub fn result_sort(&self) -> Option<&Sort> {
        self.0.result_sort.as_ref()
    }

    pub fn is_permitted(&self) -> bool {
        self.0.kind == SymbolKind::Predicate && &*self.0.name == PERMITTED
    }
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.name == other.0.name
    }
}

impl Eq for Symbol {}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.name.cmp(&other.0.name)
    }
}

impl std::hash::Hash for Symbol {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.name.hash(state);
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.name)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.0.kind, self.0.name)
    }
}

/// Errors raised while building a symbol table.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolError {
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("`Permitted` must take at least two arguments (Subjects, Actions, ...)")]
    BadPermittedSignature,
    #[error("`Permitted` was redeclared after use")]
    PermittedRedeclaredAfterUse,
}

/// The vocabulary of one policy base.
///
/// Declaration order is preserved so that rendering reproduces the source
/// layout. The built-in sorts `Subjects`, `Actions`, `Times`, the constant
/// `now`, and the predicate `Permitted` (binary by default, redeclarable
/// once with extra arguments) are always present.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    sorts: Vec<Sort>,
    symbols: Vec<Symbol>,
    by_name: std::collections::HashMap<Arc<str>, usize>,
    permitted: Symbol,
    permitted_redeclared: bool,
    permitted_used: bool,
}

impl SymbolTable {
    pub fn new() -> Self {
        let subjects = Sort::new(SORT_SUBJECTS);
        let actions = Sort::new(SORT_ACTIONS);
        let times = Sort::new(SORT_TIMES);
        let permitted = Symbol::predicate(PERMITTED, vec![subjects.clone(), actions.clone()]);
        let now = Symbol::constant(NOW, times.clone());
        let mut by_name = std::collections::HashMap::new();
        by_name.insert(Arc::from(NOW), 0);
        SymbolTable {
            sorts: vec![subjects, actions, times],
            symbols: vec![now],
            by_name,
            permitted,
            permitted_redeclared: false,
            permitted_used: false,
        }
    }

    pub fn subjects(&self) -> Sort {
        self.sorts[0].clone()
    }

    pub fn actions(&self) -> Sort {
        self.sorts[1].clone()
    }

    pub fn times(&self) -> Sort {
        self.sorts[2].clone()
    }

    /// The (possibly redeclared) `Permitted` predicate.
    pub fn permitted(&self) -> Symbol {
        self.permitted.clone()
    }

    /// Marks `Permitted` as used, freezing its signature.
    pub fn touch_permitted(&mut self) -> Symbol {
        self.permitted_used = true;
        self.permitted.clone()
    }

    pub fn sort(&self, name: &str) -> Option<Sort> {
        self.sorts.iter().find(|s| s.name() == name).cloned()
    }

    pub fn symbol(&self, name: &str) -> Option<Symbol> {
        if name == PERMITTED {
            return Some(self.permitted.clone());
        }
        self.by_name.get(name).map(|&i| self.symbols[i].clone())
    }

    /// Sorts in declaration order, built-ins first.
    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    /// Symbols in declaration order (`now` first).
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn declare_sort(&mut self, name: &str) -> Result<Sort, SymbolError> {
        if self.sort(name).is_some() || self.lookup_any(name) {
            return Err(SymbolError::Duplicate(name.to_string()));
        }
        let sort = Sort::new(name);
        self.sorts.push(sort.clone());
        Ok(sort)
    }

    fn lookup_any(&self, name: &str) -> bool {
        name == PERMITTED || self.sort(name).is_some() || self.symbol(name).is_some()
    }

    fn declare(&mut self, sym: Symbol) -> Result<Symbol, SymbolError> {
        if self.lookup_any(sym.name()) {
            return Err(SymbolError::Duplicate(sym.name().to_string()));
        }
        self.by_name.insert(Arc::from(sym.name()), self.symbols.len());
        self.symbols.push(sym.clone());
        Ok(sym)
    }

    pub fn declare_constant(&mut self, name: &str, sort: Sort) -> Result<Symbol, SymbolError> {
        self.declare(Symbol::constant(name, sort))
    }

    pub fn declare_function(
        &mut self,
        name: &str,
        arg_sorts: Vec<Sort>,
        result_sort: Sort,
    ) -> Result<Symbol, SymbolError> {
        self.declare(Symbol::function(name, arg_sorts, result_sort))
    }

    pub fn declare_predicate(
        &mut self,
        name: &str,
        arg_sorts: Vec<Sort>,
    ) -> Result<Symbol, SymbolError> {
        if name == PERMITTED {
            return self.redeclare_permitted(arg_sorts);
        }
        self.declare(Symbol::predicate(name, arg_sorts))
    }

    /// Configures the arity of `Permitted` for this base. Allowed once,
    /// before any use; the first two argument sorts stay Subjects, Actions.
    fn redeclare_permitted(&mut self, arg_sorts: Vec<Sort>) -> Result<Symbol, SymbolError> {
        if self.permitted_used || self.permitted_redeclared {
            return Err(SymbolError::PermittedRedeclaredAfterUse);
        }
        if arg_sorts.len() < 2
            || arg_sorts[0] != self.subjects()
            || arg_sorts[1] != self.actions()
        {
            return Err(SymbolError::BadPermittedSignature);
        }
        self.permitted = Symbol::predicate(PERMITTED, arg_sorts);
        self.permitted_redeclared = true;
        Ok(self.permitted.clone())
    }

    pub fn permitted_redeclared(&self) -> bool {
        self.permitted_redeclared
    }

    /// A constant that cannot collide with user declarations (the `@`
    /// prefix is not a legal source identifier). Used for the fresh
    /// constants of the consistency check.
    pub fn fresh_constant(&mut self, stem: &str, sort: Sort) -> Symbol {
        let mut n = 0;
        loop {
            let name = format!("@{stem}{n}");
            if !self.lookup_any(&name) {
                let sym = Symbol::constant(&name, sort);
                self.by_name.insert(Arc::from(name.as_str()), self.symbols.len());
                self.symbols.push(sym.clone());
                return sym;
            }
            n += 1;
        }
    }
}

impl Default for SymbolTable {
    fn default() -> Self {
        Self::new()
    }
}
