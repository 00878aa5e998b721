//! Seeded generators and small builders shared by the integration tests.

#![allow(dead_code)]

use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use lithium_core::base::{EnvRule, Goal, Policy, PolicyBase, PolicySign, Query};
use lithium_core::clause::{Clause, Literal};
use lithium_core::symbol::{Sort, Symbol, SymbolTable};
use lithium_core::term::{Term, Variable};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of the random queries.
#[derive(Clone)]
pub struct GenConfig {
    pub max_subject_consts: usize,
    pub max_action_consts: usize,
    pub max_predicates: usize,
    pub max_policies: usize,
    pub max_env_literals: usize,
    pub max_rules: usize,
    pub allow_equality: bool,
    pub allow_permitted_antecedents: bool,
    pub permit_only: bool,
    pub positive_antecedents_only: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_subject_consts: 3,
            max_action_consts: 3,
            max_predicates: 4,
            max_policies: 4,
            max_env_literals: 6,
            max_rules: 2,
            allow_equality: false,
            allow_permitted_antecedents: true,
            permit_only: false,
            positive_antecedents_only: false,
        }
    }
}

pub struct Vocab {
    pub table: Arc<SymbolTable>,
    pub subjects: Vec<Term>,
    pub actions: Vec<Term>,
    pub preds: Vec<Symbol>,
    pub permitted: Symbol,
}

fn build_vocab(r: &mut ChaCha8Rng, cfg: &GenConfig) -> Vocab {
    let mut table = SymbolTable::new();
    let subj = table.subjects();
    let act = table.actions();
    let n_subj = r.gen_range(1..=cfg.max_subject_consts);
    let n_act = r.gen_range(1..=cfg.max_action_consts);
    let subjects: Vec<Term> = (0..n_subj)
        .map(|i| {
            Term::constant(table.declare_constant(&format!("s{i}"), subj.clone()).unwrap()).unwrap()
        })
        .collect();
    let actions: Vec<Term> = (0..n_act)
        .map(|i| {
            Term::constant(table.declare_constant(&format!("a{i}"), act.clone()).unwrap()).unwrap()
        })
        .collect();
    let n_preds = r.gen_range(1..=cfg.max_predicates);
    let preds: Vec<Symbol> = (0..n_preds)
        .map(|i| {
            let arity = r.gen_range(1..=2);
            let sorts: Vec<Sort> = (0..arity)
                .map(|_| if r.gen_bool(0.7) { subj.clone() } else { act.clone() })
                .collect();
            table.declare_predicate(&format!("R{i}"), sorts).unwrap()
        })
        .collect();
    let permitted = table.touch_permitted();
    Vocab {
        table: Arc::new(table),
        subjects,
        actions,
        preds,
        permitted,
    }
}

fn pick<'a>(r: &mut ChaCha8Rng, items: &'a [Term]) -> &'a Term {
    &items[r.gen_range(0..items.len())]
}

fn term_of_sort(
    r: &mut ChaCha8Rng,
    vocab: &Vocab,
    sort: &Sort,
    vars: &[Variable],
    p_var: f64,
) -> Term {
    let candidates: Vec<&Variable> = vars.iter().filter(|v| &v.sort == sort).collect();
    if !candidates.is_empty() && r.gen_bool(p_var) {
        return Term::Var(candidates[r.gen_range(0..candidates.len())].clone());
    }
    if *sort == vocab.table.subjects() {
        pick(r, &vocab.subjects).clone()
    } else {
        pick(r, &vocab.actions).clone()
    }
}

fn random_literal(
    r: &mut ChaCha8Rng,
    vocab: &Vocab,
    vars: &[Variable],
    p_var: f64,
    positive_only: bool,
) -> Literal {
    let pred = vocab.preds[r.gen_range(0..vocab.preds.len())].clone();
    let args: Vec<Term> = pred
        .arg_sorts()
        .iter()
        .map(|s| term_of_sort(r, vocab, s, vars, p_var))
        .collect();
    let positive = positive_only || r.gen_bool(0.7);
    Literal::new(positive, pred, args).unwrap()
}

/// A random standard query within the configured shape. No membership
/// filtering; callers reject what they do not want.
pub fn random_query(r: &mut ChaCha8Rng, cfg: &GenConfig) -> Query {
    let vocab = build_vocab(r, cfg);
    let subj_sort = vocab.table.subjects();
    let act_sort = vocab.table.actions();

    let mut e0: Vec<Literal> = Vec::new();
    for _ in 0..r.gen_range(0..=cfg.max_env_literals) {
        e0.push(random_literal(r, &vocab, &[], 0.0, false));
    }
    if cfg.allow_equality && vocab.subjects.len() >= 2 {
        if r.gen_bool(0.6) {
            let a = pick(r, &vocab.subjects).clone();
            let b = pick(r, &vocab.subjects).clone();
            e0.push(Literal::equality(true, a, b).unwrap());
        }
        if r.gen_bool(0.3) {
            let a = pick(r, &vocab.subjects).clone();
            let b = pick(r, &vocab.subjects).clone();
            e0.push(Literal::equality(false, a, b).unwrap());
        }
    }

    let mut e1: Vec<EnvRule> = Vec::new();
    for _ in 0..r.gen_range(0..=cfg.max_rules) {
        let x = Variable::new(0, if r.gen_bool(0.8) { subj_sort.clone() } else { act_sort.clone() }, "x");
        let vars = vec![x];
        let n_ante = r.gen_range(1..=2);
        let antecedent: Vec<Literal> = (0..n_ante)
            .map(|_| random_literal(r, &vocab, &vars, 0.7, cfg.positive_antecedents_only))
            .collect();
        let conclusion = random_literal(r, &vocab, &vars, 0.7, false);
        e1.push(EnvRule {
            antecedent,
            conclusion,
        });
    }

    let mut policies: Vec<Policy> = Vec::new();
    for i in 0..r.gen_range(0..=cfg.max_policies) {
        let x = Variable::new(0, subj_sort.clone(), "x");
        let y = Variable::new(1, act_sort.clone(), "y");
        let vars = match r.gen_range(0..3) {
            0 => vec![],
            1 => vec![x.clone()],
            _ => vec![x.clone(), y.clone()],
        };
        let subject = term_of_sort(r, &vocab, &subj_sort, &vars, 0.7);
        let action = term_of_sort(r, &vocab, &act_sort, &vars, 0.4);
        let mut antecedent: Vec<Literal> = (0..r.gen_range(0..=2))
            .map(|_| random_literal(r, &vocab, &vars, 0.7, cfg.positive_antecedents_only))
            .collect();
        if cfg.allow_permitted_antecedents && r.gen_bool(0.15) {
            let s = term_of_sort(r, &vocab, &subj_sort, &vars, 0.5);
            let a = term_of_sort(r, &vocab, &act_sort, &vars, 0.3);
            antecedent
                .push(Literal::new(true, vocab.permitted.clone(), vec![s, a]).unwrap());
        }
        let sign = if cfg.permit_only || r.gen_bool(0.75) {
            PolicySign::Permit
        } else {
            PolicySign::Deny
        };
        policies.push(
            Policy::new(
                &format!("p{i}"),
                sign,
                antecedent,
                vec![subject, action],
                &vocab.permitted,
            )
            .unwrap(),
        );
    }

    let base = PolicyBase::new(vocab.table.clone(), e0, e1, policies).unwrap();
    let goal_sign = if cfg.permit_only || r.gen_bool(0.8) {
        PolicySign::Permit
    } else {
        PolicySign::Deny
    };
    let goal = Goal::new(
        goal_sign,
        vec![pick(r, &vocab.subjects).clone(), pick(r, &vocab.actions).clone()],
        &vocab.permitted,
    )
    .unwrap();
    Query::new(base, goal)
}

/// A scaling base: `n_env` ground facts `R{i}(c{j})` spread over ten
/// predicates, ten policies `R{i}(x) => permit(x, act{i})`, and a goal on
/// the last constant.
pub fn scaling_base(n_env: usize) -> Query {
    let mut table = SymbolTable::new();
    let subj = table.subjects();
    let act = table.actions();
    let preds: Vec<Symbol> = (0..10)
        .map(|i| table.declare_predicate(&format!("R{i}"), vec![subj.clone()]).unwrap())
        .collect();
    let actions: Vec<Term> = (0..10)
        .map(|i| Term::constant(table.declare_constant(&format!("act{i}"), act.clone()).unwrap()).unwrap())
        .collect();
    let n_consts = (n_env / 10).max(1);
    let consts: Vec<Term> = (0..n_consts)
        .map(|j| Term::constant(table.declare_constant(&format!("c{j}"), subj.clone()).unwrap()).unwrap())
        .collect();
    let permitted = table.touch_permitted();

    let mut e0 = Vec::with_capacity(n_env);
    'fill: for j in 0..n_consts {
        for pred in &preds {
            if e0.len() == n_env {
                break 'fill;
            }
            e0.push(Literal::new(true, pred.clone(), vec![consts[j].clone()]).unwrap());
        }
    }
    let policies: Vec<Policy> = (0..10)
        .map(|i| {
            let x = Variable::new(0, subj.clone(), "x");
            Policy::new(
                &format!("p{i}"),
                PolicySign::Permit,
                vec![Literal::new(true, preds[i].clone(), vec![Term::Var(x.clone())]).unwrap()],
                vec![Term::Var(x), actions[i].clone()],
                &permitted,
            )
            .unwrap()
        })
        .collect();
    let goal = Goal::new(
        PolicySign::Permit,
        vec![consts[n_consts - 1].clone(), actions[5].clone()],
        &permitted,
    )
    .unwrap();
    let base = PolicyBase::new(Arc::new(table), e0, Vec::new(), policies).unwrap();
    Query::new(base, goal)
}

/// A base with `n` policies, half permitting and half denying on a shared
/// action, whose pairwise resolvents drive the quadratic closure.
pub fn policy_scaling_base(n_policies: usize, n_env: usize) -> Query {
    let mut table = SymbolTable::new();
    let subj = table.subjects();
    let act = table.actions();
    let action =
        Term::constant(table.declare_constant("act", act.clone()).unwrap()).unwrap();
    let seed = table.declare_predicate("Seed", vec![subj.clone()]).unwrap();
    let consts: Vec<Term> = (0..n_env.max(1))
        .map(|j| Term::constant(table.declare_constant(&format!("c{j}"), subj.clone()).unwrap()).unwrap())
        .collect();
    let permitted = table.touch_permitted();

    let e0: Vec<Literal> = consts
        .iter()
        .map(|c| Literal::new(true, seed.clone(), vec![c.clone()]).unwrap())
        .collect();
    // Predicates A{i} guard each policy; they never appear in E0, so the
    // quadratic closure is built but no resolvent grounds.
    let guard_preds: Vec<Symbol> = (0..n_policies)
        .map(|i| table.declare_predicate(&format!("A{i}"), vec![subj.clone()]).unwrap())
        .collect();
    let mut policies = Vec::with_capacity(n_policies);
    for (i, guard) in guard_preds.iter().enumerate() {
        let x = Variable::new(0, subj.clone(), "x");
        let sign = if i % 2 == 0 {
            PolicySign::Permit
        } else {
            PolicySign::Deny
        };
        policies.push(
            Policy::new(
                &format!("p{i}"),
                sign,
                vec![Literal::new(true, guard.clone(), vec![Term::Var(x.clone())]).unwrap()],
                vec![Term::Var(x), action.clone()],
                &permitted,
            )
            .unwrap(),
        );
    }
    let goal = Goal::new(
        PolicySign::Permit,
        vec![consts[0].clone(), action],
        &permitted,
    )
    .unwrap();
    let base = PolicyBase::new(Arc::new(table), e0, Vec::new(), policies).unwrap();
    Query::new(base, goal)
}

/// Single-policy sub-queries of a query (for the per-policy decomposition
/// property).
pub fn single_policy_queries(q: &Query) -> Vec<Query> {
    q.base
        .policies
        .iter()
        .map(|p| {
            let base = PolicyBase {
                symbols: q.base.symbols.clone(),
                e0: q.base.e0.clone(),
                e1: q.base.e1.clone(),
                policies: vec![p.clone()],
            };
            Query::new(base, q.goal.clone())
        })
        .collect()
}

/// All universal clauses of a base.
pub fn universal_clauses(q: &Query) -> Vec<Clause> {
    q.base
        .universal_clauses()
        .into_iter()
        .map(|(_, c)| c)
        .collect()
}
