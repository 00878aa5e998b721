//! Independent ground-truth checkers: exhaustive finite-model validity for
//! function-free queries, and fuel-limited ground saturation for the
//! general case. These deliberately share nothing with the engine's
//! decision path beyond the clause data model (and, for the saturation
//! oracle, the `resolution` module it is specified against).

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::base::{PolicyBase, Query};
use crate::clause::{Clause, Literal, Pred};
use crate::derivation::{from_closure, Derivation};
use crate::equality::{equality_safe, to_equation_free};
use crate::resolution::saturate;
use crate::symbol::{Sort, Symbol, SymbolKind};
use crate::term::Term;

/// Enumeration caps; beyond them the oracle refuses rather than stalls.
#[derive(Clone, Copy, Debug)]
pub struct OracleCaps {
    pub max_constants_per_sort: usize,
    pub max_predicates: usize,
    pub max_arity: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_constants_per_sort: 4,
            max_predicates: 6,
            max_arity: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("function symbol `{0}` present; the finite-model oracle handles only constants")]
    FunctionSymbolsPresent(String),
    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),
}

/// An explicit interpretation over small per-sort domains.
#[derive(Clone, Debug)]
pub struct FiniteModel {
    /// Domain size per sort; elements are `0..size`.
    pub domains: BTreeMap<Sort, usize>,
    /// Interpretation of each constant as an element of its sort.
    pub constants: BTreeMap<String, usize>,
    /// Extension of each predicate as a set of element tuples.
    pub relations: BTreeMap<String, Vec<Vec<usize>>>,
}

impl fmt::Display for FiniteModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "domains:")?;
        for (sort, size) in &self.domains {
            writeln!(f, "  {sort}: {{0..{}}}", size.saturating_sub(1))?;
        }
        writeln!(f, "constants:")?;
        for (name, e) in &self.constants {
            writeln!(f, "  {name} = {e}")?;
        }
        writeln!(f, "relations:")?;
        for (name, tuples) in &self.relations {
            let rows: Vec<String> = tuples
                .iter()
                .map(|t| {
                    let cells: Vec<String> = t.iter().map(|e| e.to_string()).collect();
                    format!("({})", cells.join(","))
                })
                .collect();
            writeln!(f, "  {name} = {{{}}}", rows.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum FiniteVerdict {
    Valid,
    Invalid(Box<FiniteModel>),
}

impl FiniteVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, FiniteVerdict::Valid)
    }
}

struct Vocabulary {
    constants_by_sort: BTreeMap<Sort, Vec<Symbol>>,
    predicates: Vec<Symbol>,
}

fn collect_vocabulary(base: &PolicyBase, goal: Option<&Literal>) -> Result<Vocabulary, OracleError> {
    let mut constants: BTreeMap<Sort, Vec<Symbol>> = BTreeMap::new();
    let mut predicates: Vec<Symbol> = Vec::new();
    let mut add_term = |t: &Term| -> Result<(), OracleError> {
        let mut err = None;
        t.for_each_subterm(&mut |s| {
            if let Term::App(sym, _) = s {
                match sym.kind() {
                    SymbolKind::Function => {
                        err.get_or_insert_with(|| {
                            OracleError::FunctionSymbolsPresent(sym.name().to_string())
                        });
                    }
                    SymbolKind::Constant => {
                        let sort = sym.result_sort().expect("constants have sorts").clone();
                        let list = constants.entry(sort).or_default();
                        if !list.contains(sym) {
                            list.push(sym.clone());
                        }
                    }
                    SymbolKind::Predicate => {}
                }
            } else if let Term::Var(v) = s {
                constants.entry(v.sort.clone()).or_default();
            }
        });
        err.map_or(Ok(()), Err)
    };
    let mut add_literal = |lit: &Literal| -> Result<(), OracleError> {
        if let Pred::Sym(sym) = &lit.pred {
            if !predicates.contains(sym) {
                predicates.push(sym.clone());
            }
        }
        for a in &lit.args {
            add_term(a)?;
        }
        Ok(())
    };
    for lit in &base.e0 {
        add_literal(lit)?;
    }
    for (_, clause) in base.universal_clauses() {
        for lit in clause.literals() {
            add_literal(lit)?;
        }
    }
    if let Some(goal) = goal {
        add_literal(goal)?;
    }
    let mut vocab = Vocabulary {
        constants_by_sort: constants,
        predicates,
    };
    for list in vocab.constants_by_sort.values_mut() {
        list.sort_by(|a, b| a.name().cmp(b.name()));
    }
    vocab.predicates.sort_by(|a, b| a.name().cmp(b.name()));
    Ok(vocab)
}

fn check_caps(vocab: &Vocabulary, caps: &OracleCaps) -> Result<(), OracleError> {
    for (sort, list) in &vocab.constants_by_sort {
        if list.len() > caps.max_constants_per_sort {
            return Err(OracleError::CapExceeded(format!(
                "{} constants of sort {sort} (cap {})",
                list.len(),
                caps.max_constants_per_sort
            )));
        }
    }
    if vocab.predicates.len() > caps.max_predicates {
        return Err(OracleError::CapExceeded(format!(
            "{} predicates (cap {})",
            vocab.predicates.len(),
            caps.max_predicates
        )));
    }
    for p in &vocab.predicates {
        if p.arity() > caps.max_arity {
            return Err(OracleError::CapExceeded(format!(
                "predicate {} has arity {} (cap {})",
                p.name(),
                p.arity(),
                caps.max_arity
            )));
        }
    }
    Ok(())
}

/// All partitions of `n` items as restricted-growth strings, in
/// lexicographic order. The partition of the constants of a sort determines
/// both the domain size (number of blocks) and the constant interpretation;
/// by the submodel-restriction argument these cover every countermodel of a
/// function-free query up to isomorphism.
fn partitions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    fn go(current: &mut Vec<usize>, at: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if at == current.len() {
            out.push(current.clone());
            return;
        }
        for v in 0..=max + 1 {
            current[at] = v;
            go(current, at + 1, max.max(v), out);
        }
    }
    go(&mut current, 1, 0, &mut out);
    out
}

/// One concrete choice of domains and constant interpretation.
struct Assignment {
    domains: BTreeMap<Sort, usize>,
    constants: BTreeMap<String, usize>,
}

fn assignments(vocab: &Vocabulary) -> Vec<Assignment> {
    let sorts: Vec<(&Sort, &Vec<Symbol>)> = vocab.constants_by_sort.iter().collect();
    let per_sort: Vec<Vec<Vec<usize>>> = sorts
        .iter()
        .map(|(_, consts)| partitions(consts.len()))
        .collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; sorts.len()];
    loop {
        let mut domains = BTreeMap::new();
        let mut constants = BTreeMap::new();
        for (i, (sort, consts)) in sorts.iter().enumerate() {
            let rgs = &per_sort[i][pick[i]];
            let size = rgs.iter().copied().max().map_or(1, |m| m + 1);
            domains.insert((*sort).clone(), size);
            for (j, c) in consts.iter().enumerate() {
                constants.insert(c.name().to_string(), rgs[j]);
            }
        }
        out.push(Assignment { domains, constants });
        // Advance the odometer.
        let mut i = 0;
        loop {
            if i == sorts.len() {
                return out;
            }
            pick[i] += 1;
            if pick[i] < per_sort[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// Propositional search state: ground atoms are variables, clauses are
/// disjunctions over them. Branching is in atom order with false first, so
/// the first model found is the least in enumeration order.
fn sat(clauses: &[Vec<(usize, bool)>], atom_count: usize) -> Option<Vec<bool>> {
    fn propagate(
        clauses: &[Vec<(usize, bool)>],
        assign: &mut Vec<Option<bool>>,
    ) -> Option<bool> {
        loop {
            let mut changed = false;
            for clause in clauses {
                let mut unassigned = None;
                let mut n_unassigned = 0;
                let mut satisfied = false;
                for &(atom, positive) in clause {
                    match assign[atom] {
                        Some(v) if v == positive => {
                            satisfied = true;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            n_unassigned += 1;
                            unassigned = Some((atom, positive));
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match n_unassigned {
                    0 => return Some(false),
                    1 => {
                        let (atom, positive) = unassigned.expect("counted");
                        assign[atom] = Some(positive);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return None;
            }
        }
    }

    fn go(clauses: &[Vec<(usize, bool)>], assign: &mut Vec<Option<bool>>) -> bool {
        let snapshot = assign.clone();
        if let Some(false) = propagate(clauses, assign) {
            *assign = snapshot;
            return false;
        }
        let Some(atom) = assign.iter().position(Option::is_none) else {
            return true;
        };
        for value in [false, true] {
            let before = assign.clone();
            assign[atom] = Some(value);
            if go(clauses, assign) {
                return true;
            }
            *assign = before;
        }
        *assign = snapshot;
        false
    }

    let mut assign = vec![None; atom_count];
    if go(clauses, &mut assign) {
        Some(assign.into_iter().map(|v| v.unwrap_or(false)).collect())
    } else {
        None
    }
}

struct Grounder<'a> {
    assignment: &'a Assignment,
    atoms: BTreeMap<(String, Vec<usize>), usize>,
}

impl<'a> Grounder<'a> {
    fn element(&self, t: &Term, env: &BTreeMap<u32, usize>) -> usize {
        match t {
            Term::Var(v) => env[&v.id],
            Term::App(sym, _) => self.assignment.constants[sym.name()],
        }
    }

    fn atom(&mut self, name: &str, tuple: Vec<usize>) -> usize {
        let next = self.atoms.len();
        *self.atoms.entry((name.to_string(), tuple)).or_insert(next)
    }

    /// Grounds one literal; `Ok(Some)` is a propositional literal,
    /// `Ok(None)` means "true" (drop the clause), `Err(())` means "false"
    /// (drop the literal).
    fn literal(
        &mut self,
        lit: &Literal,
        env: &BTreeMap<u32, usize>,
    ) -> Result<Option<(usize, bool)>, ()> {
        match &lit.pred {
            Pred::Eq => {
                let l = self.element(&lit.args[0], env);
                let r = self.element(&lit.args[1], env);
                if (l == r) == lit.positive {
                    Ok(None)
                } else {
                    Err(())
                }
            }
            Pred::Sym(sym) => {
                let tuple: Vec<usize> = lit.args.iter().map(|a| self.element(a, env)).collect();
                Ok(Some((self.atom(sym.name(), tuple), lit.positive)))
            }
        }
    }

    /// Grounds a universal clause over every variable assignment; `None`
    /// when some ground instance is unsatisfiable outright.
    fn clause(&mut self, clause: &Clause, out: &mut Vec<Vec<(usize, bool)>>) -> bool {
        let vars = clause.variables();
        let sizes: Vec<usize> = vars
            .iter()
            .map(|v| *self.assignment.domains.get(&v.sort).unwrap_or(&1))
            .collect();
        let mut env: BTreeMap<u32, usize> = vars.iter().map(|v| (v.id, 0)).collect();
        let mut counters = vec![0usize; vars.len()];
        loop {
            for (i, v) in vars.iter().enumerate() {
                env.insert(v.id, counters[i]);
            }
            let mut ground: Vec<(usize, bool)> = Vec::new();
            let mut tautology = false;
            for lit in clause.literals() {
                match self.literal(lit, &env) {
                    Ok(Some(pl)) => {
                        if !ground.contains(&pl) {
                            ground.push(pl)
                        }
                    }
                    Ok(None) => {
                        tautology = true;
                        break;
                    }
                    Err(()) => {}
                }
            }
            if !tautology {
                if ground.is_empty() {
                    return false;
                }
                out.push(ground);
            }
            // Next assignment.
            let mut i = 0;
            loop {
                if i == vars.len() {
                    return true;
                }
                counters[i] += 1;
                if counters[i] < sizes[i] {
                    break;
                }
                counters[i] = 0;
                i += 1;
            }
        }
    }
}

fn search_countermodel(
    base: &PolicyBase,
    goal: Option<&Literal>,
    caps: &OracleCaps,
) -> Result<Option<FiniteModel>, OracleError> {
    let vocab = collect_vocabulary(base, goal)?;
    check_caps(&vocab, caps)?;
    for assignment in assignments(&vocab) {
        let mut grounder = Grounder {
            assignment: &assignment,
            atoms: BTreeMap::new(),
        };
        let mut clauses: Vec<Vec<(usize, bool)>> = Vec::new();
        let mut possible = true;
        let empty_env = BTreeMap::new();
        for lit in &base.e0 {
            match grounder.literal(lit, &empty_env) {
                Ok(Some(pl)) => clauses.push(vec![pl]),
                Ok(None) => {}
                Err(()) => {
                    possible = false;
                    break;
                }
            }
        }
        if possible {
            for (_, clause) in base.universal_clauses() {
                if !grounder.clause(&clause, &mut clauses) {
                    possible = false;
                    break;
                }
            }
        }
        if possible {
            if let Some(goal) = goal {
                match grounder.literal(&goal.negated(), &empty_env) {
                    Ok(Some(pl)) => clauses.push(vec![pl]),
                    Ok(None) => {}
                    Err(()) => possible = false,
                }
            }
        }
        if !possible {
            continue;
        }
        let atom_count = grounder.atoms.len();
        if let Some(values) = sat(&clauses, atom_count) {
            let mut relations: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::new();
            for p in &vocab.predicates {
                relations.insert(p.name().to_string(), Vec::new());
            }
            for ((name, tuple), atom) in &grounder.atoms {
                if values[*atom] {
                    relations.entry(name.clone()).or_default().push(tuple.clone());
                }
            }
            for tuples in relations.values_mut() {
                tuples.sort();
            }
            let model = FiniteModel {
                domains: assignment.domains.clone(),
                constants: assignment.constants.clone(),
                relations,
            };
            debug_assert!(
                evaluate_base(&model, base) && goal.map_or(true, |g| !evaluate_literal_closed(&model, g)),
                "countermodel failed the independent evaluation pass"
            );
            return Ok(Some(model));
        }
    }
    Ok(None)
}

/// Exhaustive finite-model validity for function-free queries: valid iff
/// the query holds in every restricted interpretation over per-sort domains
/// bounded by the constant counts. Returns the least countermodel found.
pub fn finite_model_valid(q: &Query) -> Result<FiniteVerdict, OracleError> {
    finite_model_valid_with(q, &OracleCaps::default())
}

pub fn finite_model_valid_with(q: &Query, caps: &OracleCaps) -> Result<FiniteVerdict, OracleError> {
    let goal = q.goal_literal();
    match search_countermodel(&q.base, Some(&goal), caps)? {
        Some(model) => Ok(FiniteVerdict::Invalid(Box::new(model))),
        None => Ok(FiniteVerdict::Valid),
    }
}

/// Satisfiability of a base (facts, rules and policies together) by the
/// same exhaustive search; `Some(model)` is a witness model.
pub fn finite_model_satisfiable(
    base: &PolicyBase,
    caps: &OracleCaps,
) -> Result<Option<FiniteModel>, OracleError> {
    search_countermodel(base, None, caps)
}

/// Independent evaluation of a base in a model (used to double-check
/// countermodels before they are reported).
pub fn evaluate_base(model: &FiniteModel, base: &PolicyBase) -> bool {
    base.e0.iter().all(|l| evaluate_literal_closed(model, l))
        && base
            .universal_clauses()
            .iter()
            .all(|(_, c)| evaluate_clause(model, c))
}

pub fn evaluate_literal_closed(model: &FiniteModel, lit: &Literal) -> bool {
    evaluate_literal(model, lit, &BTreeMap::new())
}

fn element_of(model: &FiniteModel, t: &Term, env: &BTreeMap<u32, usize>) -> usize {
    match t {
        Term::Var(v) => env[&v.id],
        Term::App(sym, _) => model.constants[sym.name()],
    }
}

fn evaluate_literal(model: &FiniteModel, lit: &Literal, env: &BTreeMap<u32, usize>) -> bool {
    let truth = match &lit.pred {
        Pred::Eq => {
            element_of(model, &lit.args[0], env) == element_of(model, &lit.args[1], env)
        }
        Pred::Sym(sym) => {
            let tuple: Vec<usize> = lit
                .args
                .iter()
                .map(|a| element_of(model, a, env))
                .collect();
            model
                .relations
                .get(sym.name())
                .map_or(false, |rel| rel.contains(&tuple))
        }
    };
    truth == lit.positive
}

fn evaluate_clause(model: &FiniteModel, clause: &Clause) -> bool {
    let vars = clause.variables();
    let sizes: Vec<usize> = vars
        .iter()
        .map(|v| *model.domains.get(&v.sort).unwrap_or(&1))
        .collect();
    let mut counters = vec![0usize; vars.len()];
    loop {
        let env: BTreeMap<u32, usize> = vars
            .iter()
            .zip(&counters)
            .map(|(v, &e)| (v.id, e))
            .collect();
        if !clause.literals().iter().any(|l| evaluate_literal(model, l, &env)) {
            return false;
        }
        let mut i = 0;
        loop {
            if i == vars.len() {
                return true;
            }
            counters[i] += 1;
            if counters[i] < sizes[i] {
                break;
            }
            counters[i] = 0;
            i += 1;
        }
    }
}

#[derive(Clone, Debug)]
pub enum SaturationVerdict {
    Valid(Box<Derivation>),
    Unknown { fuel_spent: u64 },
}

/// Labeled refutation inputs for a query: environment facts, rules and
/// policies in clause form plus the negated goal.
pub fn refutation_inputs(q: &Query) -> Vec<(String, Clause)> {
    let mut inputs: Vec<(String, Clause)> = Vec::new();
    for (i, lit) in q.base.e0.iter().enumerate() {
        inputs.push((format!("env fact {}", i + 1), Clause::new(vec![lit.clone()])));
    }
    for (origin, clause) in q.base.universal_clauses() {
        inputs.push((q.base.origin_label(origin), clause));
    }
    inputs.push((
        "negated goal".to_string(),
        Clause::new(vec![q.goal_literal().negated()]),
    ));
    inputs
}

/// Semi-decision by saturation: negates the goal and saturates. Valid iff
/// the empty clause appears within fuel; never answers Invalid. The query
/// is converted to equation-free form first when it is equality-safe.
pub fn ground_saturation_valid(q: &Query, fuel: u64) -> SaturationVerdict {
    let transformed;
    let q = if equality_safe(&q.base).safe {
        transformed = to_equation_free(q).expect("checked safe");
        &transformed
    } else {
        q
    };
    let inputs = refutation_inputs(q);
    let labels: Vec<String> = inputs.iter().map(|(l, _)| l.clone()).collect();
    let clauses: Vec<Clause> = inputs.into_iter().map(|(_, c)| c).collect();
    let result = saturate(&clauses, fuel);
    match result.empty_clause() {
        Some(at) => SaturationVerdict::Valid(Box::new(from_closure(&result, at, &labels))),
        None => SaturationVerdict::Unknown {
            fuel_spent: result.generated,
        },
    }
}
