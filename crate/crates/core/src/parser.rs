//! The `.lith` text format: parsing and rendering.
//!
//! ```text
//! document := (sort-decl | symbol-decl | env-item | policy | query)*
//! sort-decl   := "sort" NAME ";"
//! symbol-decl := "const" NAME ":" SORT ";"
//!              | "func" NAME "(" SORT ("," SORT)* ")" ":" SORT ";"
//!              | "pred" NAME "(" [SORT ("," SORT)*] ")" ";"
//! env-item := "env" literal ";"                              # ground => E0
//!           | "env" "forall" binders "." [conj "=>"] literal ";"   # => E1
//! policy   := "policy" NAME ":" ["forall" binders "."]
//!             [conj "=>"] ("permit"|"deny") "(" term ("," term)* ")" ";"
//! query    := "query" NAME ":" ("permit"|"deny") "(" term ("," term)* ")" ";"
//! binders  := NAME ":" SORT ("," NAME ":" SORT)*
//! conj     := "true" | literal ("&" literal)*
//! literal  := ["!"] PRED "(" [term ("," term)*] ")"
//!           | term ("=" | "!=") term
//! term     := NAME | NAME "(" term ("," term)* ")"
//! ```
//!
//! `#` starts a line comment. An empty policy antecedent may be written
//! `true =>` or omitted. Environments may not mention `Permitted`;
//! ungrounded facts must use the `forall` rule form.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::base::{EnvRule, Goal, NamedGoal, Policy, PolicyBase, PolicySign};
use crate::clause::Literal;
use crate::symbol::{Sort, SymbolKind, SymbolTable};
use crate::term::{Term, Variable};

/// A parse, sort or shape diagnostic with its source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ParseError {
    fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Pos {
    line: u32,
    col: u32,
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "sort", "const", "func", "pred", "env", "forall", "exists", "policy", "query", "permit",
    "deny", "true",
];

fn lex(input: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        word.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(word), pos));
            }
            '=' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    out.push((Tok::Punct("=>"), pos));
                } else {
                    out.push((Tok::Punct("="), pos));
                }
            }
            '!' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    out.push((Tok::Punct("!="), pos));
                } else {
                    out.push((Tok::Punct("!"), pos));
                }
            }
            '(' | ')' | ',' | ':' | ';' | '.' | '&' => {
                chars.next();
                col += 1;
                let p = match c {
                    '(' => "(",
                    ')' => ")",
                    ',' => ",",
                    ':' => ":",
                    ';' => ";",
                    '.' => ".",
                    _ => "&",
                };
                out.push((Tok::Punct(p), pos));
            }
            other => {
                return Err(ParseError::new(pos, format!("unexpected character `{other}`")));
            }
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    table: SymbolTable,
    e0: Vec<Literal>,
    e1: Vec<EnvRule>,
    policies: Vec<Policy>,
    queries: Vec<NamedGoal>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat_punct(&mut self, p: &'static str) -> PResult<()> {
        if self.peek() == &Tok::Punct(p) {
            self.bump();
            Ok(())
        } else {
            Err(self.expected(&format!("`{p}`")))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if let Tok::Ident(s) = self.peek() {
            if s == kw {
                self.bump();
                return true;
            }
        }
        false
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expected(&self, what: &str) -> ParseError {
        ParseError::new(
            self.pos(),
            format!("expected {what}, found {}", self.peek()),
        )
    }

    fn name(&mut self, what: &str) -> PResult<String> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) => {
                if KEYWORDS.contains(&s.as_str()) {
                    return Err(ParseError::new(
                        pos,
                        format!("`{s}` is a keyword and cannot be used as {what}"),
                    ));
                }
                self.bump();
                Ok(s)
            }
            _ => Err(self.expected(what)),
        }
    }

    fn sort(&mut self) -> PResult<Sort> {
        let pos = self.pos();
        let name = self.name("a sort name")?;
        self.table
            .sort(&name)
            .ok_or_else(|| ParseError::new(pos, format!("unknown sort `{name}`")))
    }

    fn document(&mut self) -> PResult<()> {
        loop {
            match self.peek().clone() {
                Tok::Eof => return Ok(()),
                Tok::Ident(s) => match s.as_str() {
                    "sort" => self.sort_decl()?,
                    "const" | "func" | "pred" => self.symbol_decl(&s)?,
                    "env" => self.env_item()?,
                    "policy" => self.policy()?,
                    "query" => self.query()?,
                    _ => {
                        return Err(self.expected(
                            "a declaration (`sort`, `const`, `func`, `pred`), `env`, `policy` or `query`",
                        ))
                    }
                },
                _ => {
                    return Err(self.expected(
                        "a declaration (`sort`, `const`, `func`, `pred`), `env`, `policy` or `query`",
                    ))
                }
            }
        }
    }

    fn sort_decl(&mut self) -> PResult<()> {
        let pos = self.pos();
        self.bump(); // sort
        let name = self.name("a sort name")?;
        self.table
            .declare_sort(&name)
            .map_err(|e| ParseError::new(pos, e.to_string()))?;
        self.eat_punct(";")
    }

    fn symbol_decl(&mut self, kw: &str) -> PResult<()> {
        let pos = self.pos();
        self.bump(); // const|func|pred
        let name = match self.peek().clone() {
            // `Permitted` may be redeclared once to configure its arity.
            Tok::Ident(s) if kw == "pred" && s == crate::symbol::PERMITTED => {
                self.bump();
                s
            }
            _ => self.name(&format!("a {kw} name"))?,
        };
        match kw {
            "const" => {
                self.eat_punct(":")?;
                let sort = self.sort()?;
                self.table
                    .declare_constant(&name, sort)
                    .map_err(|e| ParseError::new(pos, e.to_string()))?;
            }
            "func" => {
                self.eat_punct("(")?;
                let mut args = vec![self.sort()?];
                while self.peek() == &Tok::Punct(",") {
                    self.bump();
                    args.push(self.sort()?);
                }
                self.eat_punct(")")?;
                self.eat_punct(":")?;
                let result = self.sort()?;
                self.table
                    .declare_function(&name, args, result)
                    .map_err(|e| ParseError::new(pos, e.to_string()))?;
            }
            _ => {
                self.eat_punct("(")?;
                let mut args = Vec::new();
                if self.peek() != &Tok::Punct(")") {
                    args.push(self.sort()?);
                    while self.peek() == &Tok::Punct(",") {
                        self.bump();
                        args.push(self.sort()?);
                    }
                }
                self.eat_punct(")")?;
                self.table
                    .declare_predicate(&name, args)
                    .map_err(|e| ParseError::new(pos, e.to_string()))?;
            }
        }
        self.eat_punct(";")
    }

    fn binders(&mut self) -> PResult<Vec<Variable>> {
        let mut vars: Vec<Variable> = Vec::new();
        loop {
            let pos = self.pos();
            let name = self.name("a variable name")?;
            if vars.iter().any(|v| &*v.name == name) {
                return Err(ParseError::new(pos, format!("duplicate variable `{name}`")));
            }
            if self.table.symbol(&name).is_some() || self.table.sort(&name).is_some() {
                return Err(ParseError::new(
                    pos,
                    format!("variable `{name}` collides with a declared symbol"),
                ));
            }
            self.eat_punct(":")?;
            let sort = self.sort()?;
            vars.push(Variable::new(vars.len() as u32, sort, &name));
            if self.peek() == &Tok::Punct(",") {
                self.bump();
            } else {
                break;
            }
        }
        Ok(vars)
    }

    fn term(&mut self, scope: &[Variable]) -> PResult<Term> {
        let pos = self.pos();
        let name = self.name("a term")?;
        if let Some(v) = scope.iter().find(|v| &*v.name == name) {
            return Ok(Term::Var(v.clone()));
        }
        let sym = self
            .table
            .symbol(&name)
            .ok_or_else(|| ParseError::new(pos, format!("undeclared symbol `{name}`")))?;
        match sym.kind() {
            SymbolKind::Constant => Ok(Term::App(sym, Vec::new())),
            SymbolKind::Function => {
                self.eat_punct("(")?;
                let args = self.term_args(scope)?;
                Term::app(sym, args).map_err(|e| ParseError::new(pos, e.to_string()))
            }
            SymbolKind::Predicate => Err(ParseError::new(
                pos,
                format!("predicate `{name}` used as a term"),
            )),
        }
    }

    fn term_args(&mut self, scope: &[Variable]) -> PResult<Vec<Term>> {
        let mut args = vec![self.term(scope)?];
        while self.peek() == &Tok::Punct(",") {
            self.bump();
            args.push(self.term(scope)?);
        }
        self.eat_punct(")")?;
        Ok(args)
    }

    fn literal(&mut self, scope: &[Variable]) -> PResult<Literal> {
        let pos = self.pos();
        if self.peek() == &Tok::Punct("!") {
            self.bump();
            let lit = self.predicate_app(scope, false)?;
            return Ok(lit);
        }
        // Predicate application or an equality between terms.
        if let Tok::Ident(name) = self.peek().clone() {
            if let Some(sym) = self.table.symbol(&name) {
                if sym.kind() == SymbolKind::Predicate && !scope.iter().any(|v| &*v.name == name) {
                    return self.predicate_app(scope, true);
                }
            }
        }
        let left = self.term(scope)?;
        let positive = match self.peek() {
            Tok::Punct("=") => true,
            Tok::Punct("!=") => false,
            _ => return Err(self.expected("`=`, `!=` or a predicate application")),
        };
        self.bump();
        let right = self.term(scope)?;
        Literal::equality(positive, left, right).map_err(|e| ParseError::new(pos, e.to_string()))
    }

    fn predicate_app(&mut self, scope: &[Variable], positive: bool) -> PResult<Literal> {
        let pos = self.pos();
        let name = self.name("a predicate name")?;
        let sym = self
            .table
            .symbol(&name)
            .ok_or_else(|| ParseError::new(pos, format!("undeclared symbol `{name}`")))?;
        if sym.kind() != SymbolKind::Predicate {
            return Err(ParseError::new(pos, format!("`{name}` is not a predicate")));
        }
        let sym = if sym.is_permitted() {
            self.table.touch_permitted()
        } else {
            sym
        };
        self.eat_punct("(")?;
        let args = if self.peek() == &Tok::Punct(")") {
            self.bump();
            Vec::new()
        } else {
            self.term_args(scope)?
        };
        Literal::new(positive, sym, args).map_err(|e| ParseError::new(pos, e.to_string()))
    }

    /// `true` or `lit & lit & ...`.
    fn conj(&mut self, scope: &[Variable]) -> PResult<Vec<Literal>> {
        if self.eat_keyword("true") {
            return Ok(Vec::new());
        }
        let mut lits = vec![self.literal(scope)?];
        while self.peek() == &Tok::Punct("&") {
            self.bump();
            lits.push(self.literal(scope)?);
        }
        Ok(lits)
    }

    fn env_item(&mut self) -> PResult<()> {
        let pos = self.pos();
        self.bump(); // env
        if self.peek_keyword("exists") {
            return Err(ParseError::new(
                self.pos(),
                "existential quantifiers are not supported; restate the fact universally",
            ));
        }
        if self.eat_keyword("forall") {
            let vars = self.binders()?;
            self.eat_punct(".")?;
            let first = self.conj(&vars)?;
            let (antecedent, conclusion) = if self.peek() == &Tok::Punct("=>") {
                self.bump();
                let conclusion = self.literal(&vars)?;
                (first, conclusion)
            } else {
                // `env forall xs . lit;` is the empty-antecedent rule.
                let mut first = first;
                match first.len() {
                    1 => (Vec::new(), first.pop().expect("len checked")),
                    _ => return Err(self.expected("`=>`")),
                }
            };
            for lit in antecedent.iter().chain([&conclusion]) {
                if lit.mentions_permitted() {
                    return Err(ParseError::new(
                        pos,
                        "the environment must not mention Permitted",
                    ));
                }
            }
            self.eat_punct(";")?;
            self.e1.push(EnvRule {
                antecedent,
                conclusion,
            });
        } else {
            let lit = self.literal(&[])?;
            if lit.mentions_permitted() {
                return Err(ParseError::new(
                    pos,
                    "the environment must not mention Permitted",
                ));
            }
            if !lit.is_ground() {
                return Err(ParseError::new(
                    pos,
                    "environment facts must be ground; universal facts use `env forall`",
                ));
            }
            self.eat_punct(";")?;
            self.e0.push(lit);
        }
        Ok(())
    }

    fn conclusion(&mut self, scope: &[Variable]) -> PResult<(PolicySign, Vec<Term>)> {
        let sign = if self.eat_keyword("permit") {
            PolicySign::Permit
        } else if self.eat_keyword("deny") {
            PolicySign::Deny
        } else {
            return Err(self.expected("`permit` or `deny`"));
        };
        self.eat_punct("(")?;
        let args = self.term_args(scope)?;
        self.table.touch_permitted();
        Ok((sign, args))
    }

    fn policy(&mut self) -> PResult<()> {
        let pos = self.pos();
        self.bump(); // policy
        let label = self.name("a policy label")?;
        if self.policies.iter().any(|p| p.label == label)
            || self.queries.iter().any(|q| q.name == label)
        {
            return Err(ParseError::new(pos, format!("duplicate label `{label}`")));
        }
        self.eat_punct(":")?;
        if self.peek_keyword("exists") {
            return Err(ParseError::new(
                self.pos(),
                "existential quantifiers are not supported; restate the policy universally",
            ));
        }
        let vars = if self.eat_keyword("forall") {
            let vars = self.binders()?;
            self.eat_punct(".")?;
            vars
        } else {
            Vec::new()
        };
        let (antecedent, sign, args) =
            if self.peek_keyword("permit") || self.peek_keyword("deny") {
                let (sign, args) = self.conclusion(&vars)?;
                (Vec::new(), sign, args)
            } else {
                let ante = self.conj(&vars)?;
                self.eat_punct("=>")?;
                let (sign, args) = self.conclusion(&vars)?;
                (ante, sign, args)
            };
        self.eat_punct(";")?;
        let permitted = self.table.permitted();
        let policy = Policy::new(&label, sign, antecedent, args, &permitted)
            .map_err(|e| ParseError::new(pos, e.to_string()))?;
        self.policies.push(policy);
        Ok(())
    }

    fn query(&mut self) -> PResult<()> {
        let pos = self.pos();
        self.bump(); // query
        let name = self.name("a query name")?;
        if self.queries.iter().any(|q| q.name == name)
            || self.policies.iter().any(|p| p.label == name)
        {
            return Err(ParseError::new(pos, format!("duplicate label `{name}`")));
        }
        self.eat_punct(":")?;
        let (sign, args) = self.conclusion(&[])?;
        self.eat_punct(";")?;
        let permitted = self.table.permitted();
        let goal =
            Goal::new(sign, args, &permitted).map_err(|e| ParseError::new(pos, e.to_string()))?;
        self.queries.push(NamedGoal { name, goal });
        Ok(())
    }
}

/// Parses a `.lith` document into a policy base and its named queries.
pub fn parse_base(input: &str) -> Result<(PolicyBase, Vec<NamedGoal>), ParseError> {
    let toks = lex(input)?;
    let mut p = Parser {
        toks,
        at: 0,
        table: SymbolTable::new(),
        e0: Vec::new(),
        e1: Vec::new(),
        policies: Vec::new(),
        queries: Vec::new(),
    };
    p.document()?;
    let base = PolicyBase::new(Arc::new(p.table), p.e0, p.e1, p.policies).map_err(|e| {
        ParseError {
            line: 0,
            col: 0,
            message: e.to_string(),
        }
    })?;
    Ok((base, p.queries))
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Renders a base back to `.lith` text; `parse_base(render(b))` is
/// structurally equal to `b` up to variable renaming.
pub fn render(base: &PolicyBase) -> String {
    render_document(base, &[])
}

/// Renders a base together with named queries.
pub fn render_document(base: &PolicyBase, queries: &[NamedGoal]) -> String {
    let mut out = String::new();
    let table = &base.symbols;
    for sort in &table.sorts()[3..] {
        out.push_str(&format!("sort {sort};\n"));
    }
    if table.permitted_redeclared() {
        let permitted = table.permitted();
        let sig: Vec<&str> = permitted.arg_sorts().iter().map(|s| s.name()).collect();
        out.push_str(&format!("pred Permitted({});\n", sig.join(", ")));
    }
    for sym in &table.symbols()[1..] {
        if sym.name().starts_with('@') {
            continue;
        }
        match sym.kind() {
            SymbolKind::Constant => {
                out.push_str(&format!(
                    "const {}: {};\n",
                    sym.name(),
                    sym.result_sort().expect("constants have a sort")
                ));
            }
            SymbolKind::Function => {
                let args: Vec<&str> = sym.arg_sorts().iter().map(|s| s.name()).collect();
                out.push_str(&format!(
                    "func {}({}): {};\n",
                    sym.name(),
                    args.join(", "),
                    sym.result_sort().expect("functions have a result sort")
                ));
            }
            SymbolKind::Predicate => {
                let args: Vec<&str> = sym.arg_sorts().iter().map(|s| s.name()).collect();
                out.push_str(&format!("pred {}({});\n", sym.name(), args.join(", ")));
            }
        }
    }
    for lit in &base.e0 {
        out.push_str(&format!("env {};\n", render_literal(lit, &NameMap::empty())));
    }
    for rule in &base.e1 {
        let mut vars = Vec::new();
        collect_vars(rule.antecedent.iter().chain([&rule.conclusion]), &mut vars);
        let names = NameMap::new(&vars);
        out.push_str("env forall ");
        out.push_str(&names.binders(&vars));
        out.push_str(" . ");
        if !rule.antecedent.is_empty() {
            out.push_str(&render_conj(&rule.antecedent, &names));
            out.push_str(" => ");
        }
        out.push_str(&render_literal(&rule.conclusion, &names));
        out.push_str(";\n");
    }
    for policy in &base.policies {
        let mut vars = Vec::new();
        collect_vars(policy.antecedent.iter().chain([policy.head()]), &mut vars);
        let names = NameMap::new(&vars);
        out.push_str(&format!("policy {}: ", policy.label));
        if !vars.is_empty() {
            out.push_str("forall ");
            out.push_str(&names.binders(&vars));
            out.push_str(" . ");
        }
        if !policy.antecedent.is_empty() {
            out.push_str(&render_conj(&policy.antecedent, &names));
            out.push_str(" => ");
        }
        let args: Vec<String> = policy
            .head()
            .args
            .iter()
            .map(|t| render_term(t, &names))
            .collect();
        out.push_str(&format!("{}({});\n", policy.sign(), args.join(", ")));
    }
    for q in queries {
        let args: Vec<String> = q
            .goal
            .args
            .iter()
            .map(|t| render_term(t, &NameMap::empty()))
            .collect();
        out.push_str(&format!(
            "query {}: {}({});\n",
            q.name,
            q.goal.sign,
            args.join(", ")
        ));
    }
    out
}

fn collect_vars<'a>(lits: impl Iterator<Item = &'a Literal>, out: &mut Vec<Variable>) {
    for lit in lits {
        lit.for_each_var(&mut |v| {
            if !out.iter().any(|o| o.id == v.id) {
                out.push(v.clone());
            }
        });
    }
    out.sort_by_key(|v| v.id);
}

/// Display names for an item's variables; duplicate hints get a numeric
/// suffix so the rendered binder list stays unambiguous.
struct NameMap {
    names: Vec<(u32, String)>,
}

impl NameMap {
    fn empty() -> Self {
        NameMap { names: Vec::new() }
    }

    fn new(vars: &[Variable]) -> Self {
        let mut names: Vec<(u32, String)> = Vec::new();
        for v in vars {
            let mut candidate = v.name.to_string();
            let mut k = 1;
            while names.iter().any(|(_, n)| n == &candidate) {
                k += 1;
                candidate = format!("{}{}", v.name, k);
            }
            names.push((v.id, candidate));
        }
        NameMap { names }
    }

    fn get(&self, id: u32) -> &str {
        self.names
            .iter()
            .find(|(i, _)| *i == id)
            .map(|(_, n)| n.as_str())
            .unwrap_or("_")
    }

    fn binders(&self, vars: &[Variable]) -> String {
        vars.iter()
            .map(|v| format!("{}: {}", self.get(v.id), v.sort))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn render_conj(lits: &[Literal], names: &NameMap) -> String {
    lits.iter()
        .map(|l| render_literal(l, names))
        .collect::<Vec<_>>()
        .join(" & ")
}

fn render_term(t: &Term, names: &NameMap) -> String {
    match t {
        Term::Var(v) => names.get(v.id).to_string(),
        Term::App(sym, args) => {
            if args.is_empty() {
                sym.name().to_string()
            } else {
                let parts: Vec<String> = args.iter().map(|a| render_term(a, names)).collect();
                format!("{}({})", sym.name(), parts.join(", "))
            }
        }
    }
}

fn render_literal(lit: &Literal, names: &NameMap) -> String {
    match &lit.pred {
        crate::clause::Pred::Eq => {
            let op = if lit.positive { "=" } else { "!=" };
            format!(
                "{} {} {}",
                render_term(&lit.args[0], names),
                op,
                render_term(&lit.args[1], names)
            )
        }
        crate::clause::Pred::Sym(sym) => {
            let parts: Vec<String> = lit.args.iter().map(|a| render_term(a, names)).collect();
            format!(
                "{}{}({})",
                if lit.positive { "" } else { "!" },
                sym.name(),
                parts.join(", ")
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Example 2.1: "only librarians may edit the catalog".
    pub const LIBRARY: &str = "
        const Alice: Subjects;
        const Bob: Subjects;
        const editCat: Actions;
        pred Librarian(Subjects);
        env Librarian(Alice);
        env !Librarian(Bob);
        policy no_edit: forall x: Subjects . !Librarian(x) => deny(x, editCat);
        policy may_edit: forall x: Subjects . Librarian(x) => permit(x, editCat);
        query alice_edit: permit(Alice, editCat);
        query bob_denied: deny(Bob, editCat);
    ";

    #[test]
    fn parses_the_library_example() {
        let (base, queries) = parse_base(LIBRARY).unwrap();
        assert_eq!(base.e0.len(), 2);
        assert_eq!(base.policies.len(), 2);
        assert_eq!(
            base.policies[0].sign(),
            PolicySign::Deny,
            "first policy denies"
        );
        assert_eq!(base.policies[1].sign(), PolicySign::Permit);
        assert_eq!(queries.len(), 2);
        assert_eq!(queries[0].name, "alice_edit");
    }

    #[test]
    fn permitted_in_environment_is_a_shape_error() {
        let err = parse_base(
            "const Alice: Subjects; const sing: Actions;
             env Permitted(Alice, sing);",
        )
        .unwrap_err();
        assert!(err.message.contains("must not mention Permitted"), "{err}");
        assert_eq!(err.line, 2);
    }

    #[test]
    fn empty_document_is_an_empty_base() {
        let (base, queries) = parse_base("").unwrap();
        assert!(base.e0.is_empty() && base.e1.is_empty() && base.policies.is_empty());
        assert!(queries.is_empty());
    }

    #[test]
    fn non_ground_fact_needs_forall() {
        let err = parse_base(
            "pred Happy(Subjects);
             env Happy(x);",
        )
        .unwrap_err();
        assert!(err.message.contains("undeclared symbol `x`"), "{err}");
    }

    #[test]
    fn existentials_are_rejected_with_a_diagnosis() {
        let err = parse_base("policy p: exists x: Subjects . permit(x, x);").unwrap_err();
        assert!(err.message.contains("existential"), "{err}");
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_base("sort ;").unwrap_err();
        assert_eq!((err.line, err.col), (1, 6));
        let err = parse_base("const X: Nowhere;").unwrap_err();
        assert!(err.message.contains("unknown sort"));
    }

    #[test]
    fn equality_and_negation_syntax() {
        let (base, _) = parse_base(
            "const a: Subjects; const b: Subjects;
             func f(Subjects): Subjects;
             env a = f(b);
             env a != b;",
        )
        .unwrap();
        assert_eq!(base.e0.len(), 2);
        assert!(base.e0[0].is_equality() && base.e0[0].positive);
        assert!(base.e0[1].is_equality() && !base.e0[1].positive);
        assert_eq!(base.f0().count(), 1);
        assert_eq!(base.f1().count(), 1);
    }

    #[test]
    fn rules_classify_into_e1() {
        let (base, _) = parse_base(
            "pred Student(Subjects); pred Faculty(Subjects);
             env forall x: Subjects . Student(x) => !Faculty(x);",
        )
        .unwrap();
        assert_eq!(base.e1.len(), 1);
        assert_eq!(base.e1[0].clause().len(), 2);
    }

    #[test]
    fn permitted_arity_is_configurable() {
        let (base, queries) = parse_base(
            "pred Permitted(Subjects, Actions, Times);
             const Alice: Subjects; const sing: Actions;
             policy p: permit(Alice, sing, now);
             query q: permit(Alice, sing, now);",
        )
        .unwrap();
        assert_eq!(base.permitted().arity(), 3);
        assert_eq!(queries[0].goal.args.len(), 3);
        // Redeclaring after use fails.
        let err = parse_base(
            "const Alice: Subjects; const sing: Actions;
             policy p: permit(Alice, sing);
             pred Permitted(Subjects, Actions, Times);",
        )
        .unwrap_err();
        assert!(err.message.contains("redeclared"), "{err}");
    }

    #[test]
    fn duplicate_labels_rejected() {
        let err = parse_base(
            "const Alice: Subjects; const sing: Actions;
             policy p: permit(Alice, sing);
             policy p: permit(Alice, sing);",
        )
        .unwrap_err();
        assert!(err.message.contains("duplicate label"), "{err}");
    }

    #[test]
    fn round_trip_library() {
        let (base, queries) = parse_base(LIBRARY).unwrap();
        let text = render_document(&base, &queries);
        let (base2, queries2) = parse_base(&text).unwrap();
        assert_eq!(queries, queries2);
        assert_eq!(base.e0, base2.e0);
        assert_eq!(base.e1.len(), base2.e1.len());
        assert_eq!(base.policies.len(), base2.policies.len());
        for (a, b) in base.policies.iter().zip(&base2.policies) {
            assert_eq!(a.label, b.label);
            assert_eq!(a.sign(), b.sign());
            assert_eq!(a.clause().canonical(), b.clause().canonical());
        }
    }

    #[test]
    fn round_trip_with_function_terms() {
        let src = "
            sort Files;
            const Alice: Subjects;
            const catalog: Files;
            func edit(Files): Actions;
            pred Librarian(Subjects);
            env Librarian(Alice);
            policy p: forall x: Subjects . Librarian(x) => permit(x, edit(catalog));
        ";
        let (base, _) = parse_base(src).unwrap();
        let (base2, _) = parse_base(&render(&base)).unwrap();
        assert_eq!(base.e0, base2.e0);
        assert_eq!(
            base.policies[0].clause().canonical(),
            base2.policies[0].clause().canonical()
        );
    }

    #[test]
    fn round_trip_empty() {
        let (base, queries) = parse_base("").unwrap();
        assert_eq!(render_document(&base, &queries), "");
    }
}
