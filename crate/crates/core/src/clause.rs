//! Literals and clauses with set semantics.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::subst::Substitution;
use crate::symbol::{Sort, Symbol};
use crate::term::{check_args, SortError, Term, Variable};

/// A literal's predicate position: the distinguished equality predicate or
/// an ordinary predicate symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Pred {
    /// Built-in equality; arguments must share a sort.
    Eq,
    Sym(Symbol),
}

impl Pred {
    pub fn name(&self) -> &str {
        match self {
            Pred::Eq => "=",
            Pred::Sym(s) => s.name(),
        }
    }

    pub fn is_permitted(&self) -> bool {
        matches!(self, Pred::Sym(s) if s.is_permitted())
    }
}

/// A signed atom.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Literal {
    pub positive: bool,
    pub pred: Pred,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(positive: bool, pred: Symbol, args: Vec<Term>) -> Result<Literal, SortError> {
        check_args(&pred, &args)?;
        Ok(Literal {
            positive,
            pred: Pred::Sym(pred),
            args,
        })
    }

    pub fn equality(positive: bool, left: Term, right: Term) -> Result<Literal, SortError> {
        let (ls, rs) = (left.sort(), right.sort());
        if ls != rs {
            return Err(SortError::EqualitySorts(
                ls.name().to_string(),
                rs.name().to_string(),
            ));
        }
        Ok(Literal {
            positive,
            pred: Pred::Eq,
            args: vec![left, right],
        })
    }

    pub fn negated(&self) -> Literal {
        Literal {
            positive: !self.positive,
            pred: self.pred.clone(),
            args: self.args.clone(),
        }
    }

    pub fn is_equality(&self) -> bool {
        matches!(self.pred, Pred::Eq)
    }

    pub fn mentions_permitted(&self) -> bool {
        self.pred.is_permitted()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    /// Same predicate and arguments, opposite sign.
    pub fn complements(&self, other: &Literal) -> bool {
        self.positive != other.positive && self.pred == other.pred && self.args == other.args
    }

    /// `t != t` for some term `t` (trivially false literal).
    pub fn is_self_disequality(&self) -> bool {
        self.is_equality() && !self.positive && self.args[0] == self.args[1]
    }

    /// `t = t` (trivially true literal).
    pub fn is_self_equality(&self) -> bool {
        self.is_equality() && self.positive && self.args[0] == self.args[1]
    }

    pub fn apply(&self, s: &Substitution) -> Literal {
        Literal {
            positive: self.positive,
            pred: self.pred.clone(),
            args: self.args.iter().map(|a| s.apply_term(a)).collect(),
        }
    }

    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a Variable)) {
        for a in &self.args {
            a.for_each_var(f);
        }
    }

    /// Symbol count of the literal (sign not counted).
    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Term::size).sum::<usize>()
    }

    /// Deterministic text form; used as the key of the ground-literal index.
    pub fn canonical_key(&self) -> String {
        let mut out = String::new();
        if !self.positive {
            out.push('!');
        }
        out.push_str(self.pred.name());
        out.push('(');
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            key_term(a, &mut out);
        }
        out.push(')');
        out
    }
}

fn key_term(t: &Term, out: &mut String) {
    match t {
        Term::Var(v) => {
            out.push('?');
            out.push_str(&v.id.to_string());
        }
        Term::App(sym, args) => {
            out.push_str(sym.name());
            if !args.is_empty() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    key_term(a, out);
                }
                out.push(')');
            }
        }
    }
}

/// Canonical literal order: predicate name, then sign (negative first),
/// then structural term order.
impl Ord for Literal {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.pred
            .name()
            .cmp(other.pred.name())
            .then_with(|| self.positive.cmp(&other.positive))
            .then_with(|| self.args.cmp(&other.args))
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.pred {
            Pred::Eq => {
                let op = if self.positive { "=" } else { "!=" };
                write!(f, "{} {} {}", self.args[0], op, self.args[1])
            }
            Pred::Sym(sym) => {
                if !self.positive {
                    write!(f, "!")?;
                }
                write!(f, "{sym}(")?;
                for (i, a) in self.args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A duplicate-free set of literals, universally closed; the empty clause
/// denotes false. Literals are kept in canonical order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    pub fn new(mut lits: Vec<Literal>) -> Clause {
        lits.sort();
        lits.dedup();
        Clause { lits }
    }

    pub fn empty() -> Clause {
        Clause { lits: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn contains(&self, lit: &Literal) -> bool {
        self.lits.binary_search(lit).is_ok()
    }

    /// Applies a substitution; literals that collapse together merge
    /// (set semantics).
    pub fn apply(&self, s: &Substitution) -> Clause {
        Clause::new(self.lits.iter().map(|l| l.apply(s)).collect())
    }

    /// The clause minus one literal occurrence.
    pub fn without(&self, lit: &Literal) -> Clause {
        Clause::new(
            self.lits
                .iter()
                .filter(|l| *l != lit)
                .cloned()
                .collect(),
        )
    }

    pub fn union(&self, other: &Clause) -> Clause {
        let mut lits = self.lits.clone();
        lits.extend(other.lits.iter().cloned());
        Clause::new(lits)
    }

    /// Variables in first-occurrence order (by canonical literal order).
    pub fn variables(&self) -> Vec<Variable> {
        let mut seen = Vec::new();
        self.for_each_var(&mut |v| {
            if !seen.iter().any(|s: &Variable| s.id == v.id) {
                seen.push(v.clone());
            }
        });
        seen
    }

    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a Variable)) {
        for l in &self.lits {
            l.for_each_var(f);
        }
    }

    pub fn is_ground(&self) -> bool {
        self.lits.iter().all(Literal::is_ground)
    }

    /// Total symbol count of the clause.
    pub fn size(&self) -> usize {
        self.lits.iter().map(Literal::size).sum()
    }

    /// Contains both `l` and its exact complement, or a trivially true
    /// equality.
    pub fn is_tautology(&self) -> bool {
        if self.lits.iter().any(Literal::is_self_equality) {
            return true;
        }
        self.lits
            .iter()
            .filter(|l| l.positive)
            .any(|l| self.contains(&l.negated()))
    }

    /// Renames the variables of `left` and `right` so the returned copies
    /// share no identifiers. The renaming is a bijection per clause and
    /// per-clause variable order is preserved.
    pub fn standardize_apart(left: &Clause, right: &Clause) -> (Clause, Clause) {
        let l = left.renumbered_from(0);
        let offset = left.variables().len() as u32;
        let r = right.renumbered_from(offset);
        (l, r)
    }

    /// Renumbers variables to `start, start+1, ...` in first-occurrence
    /// order, keeping display names.
    pub fn renumbered_from(&self, start: u32) -> Clause {
        let vars = self.variables();
        let map: BTreeMap<u32, Variable> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| {
                (
                    v.id,
                    Variable {
                        id: start + i as u32,
                        sort: v.sort.clone(),
                        name: v.name.clone(),
                    },
                )
            })
            .collect();
        self.rename(&map)
    }

    fn rename(&self, map: &BTreeMap<u32, Variable>) -> Clause {
        fn go(t: &Term, map: &BTreeMap<u32, Variable>) -> Term {
            match t {
                Term::Var(v) => Term::Var(map.get(&v.id).cloned().unwrap_or_else(|| v.clone())),
                Term::App(sym, args) => {
                    Term::App(sym.clone(), args.iter().map(|a| go(a, map)).collect())
                }
            }
        }
        Clause {
            lits: {
                let mut lits: Vec<Literal> = self
                    .lits
                    .iter()
                    .map(|l| Literal {
                        positive: l.positive,
                        pred: l.pred.clone(),
                        args: l.args.iter().map(|a| go(a, map)).collect(),
                    })
                    .collect();
                lits.sort();
                lits.dedup();
                lits
            },
        }
    }

    /// Canonical form for duplicate detection modulo variable renaming:
    /// literals are ordered with variables blinded, then variables are
    /// renumbered in first-occurrence order with wiped names.
    pub fn canonical(&self) -> CanonicalClause {
        // Order literals ignoring variable identity so alpha-equivalent
        // clauses sort their literals the same way.
        let mut lits: Vec<&Literal> = self.lits.iter().collect();
        lits.sort_by(|a, b| blind_cmp_lit(a, b));

        let mut map: BTreeMap<u32, Variable> = BTreeMap::new();
        let mut next = 0u32;
        let mut renamed = Vec::with_capacity(lits.len());
        for lit in lits {
            let args = lit
                .args
                .iter()
                .map(|t| canon_term(t, &mut map, &mut next))
                .collect();
            renamed.push(Literal {
                positive: lit.positive,
                pred: lit.pred.clone(),
                args,
            });
        }
        renamed.dedup();
        CanonicalClause(Arc::new(Clause { lits: renamed }))
    }
}

fn canon_term(t: &Term, map: &mut BTreeMap<u32, Variable>, next: &mut u32) -> Term {
    match t {
        Term::Var(v) => {
            let entry = map.entry(v.id).or_insert_with(|| {
                let fresh = Variable::new(*next, v.sort.clone(), &format!("_{next}"));
                *next += 1;
                fresh
            });
            Term::Var(entry.clone())
        }
        Term::App(sym, args) => Term::App(
            sym.clone(),
            args.iter().map(|a| canon_term(a, map, next)).collect(),
        ),
    }
}

fn blind_cmp_lit(a: &Literal, b: &Literal) -> std::cmp::Ordering {
    a.pred
        .name()
        .cmp(b.pred.name())
        .then_with(|| a.positive.cmp(&b.positive))
        .then_with(|| {
            for (x, y) in a.args.iter().zip(&b.args) {
                let c = blind_cmp_term(x, y);
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            a.args.len().cmp(&b.args.len())
        })
}

fn blind_cmp_term(a: &Term, b: &Term) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => x.sort.cmp(&y.sort),
        (Term::Var(_), Term::App(..)) => Ordering::Less,
        (Term::App(..), Term::Var(_)) => Ordering::Greater,
        (Term::App(f, xs), Term::App(g, ys)) => f.cmp(g).then_with(|| {
            for (x, y) in xs.iter().zip(ys) {
                let c = blind_cmp_term(x, y);
                if c != Ordering::Equal {
                    return c;
                }
            }
            xs.len().cmp(&ys.len())
        }),
    }
}

/// A clause in canonical variable numbering; equal iff the underlying
/// clauses are equal up to variable renaming (for the clause shapes this
/// engine produces).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CanonicalClause(Arc<Clause>);

impl CanonicalClause {
    pub fn clause(&self) -> &Clause {
        &self.0
    }
}

impl PartialOrd for CanonicalClause {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CanonicalClause {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.lits.cmp(&other.0.lits)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return f.write_str("false");
        }
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Convenience for sort lookups on clause variables.
pub fn var(id: u32, sort: Sort, name: &str) -> Term {
    Term::Var(Variable::new(id, sort, name))
}
