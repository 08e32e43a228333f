use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::number::Number;

/// Cheaply clonable interned-by-refcount identifier.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(s: &str) -> Self {
        Symbol(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(Arc::from(s))
    }
}

impl Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// Argument slot. Positional arguments sort before named ones, and named
/// ones sort by key, which gives every atom a canonical argument order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArgKey {
    Pos(u32),
    Named(Symbol),
}

impl ArgKey {
    pub fn named(s: &str) -> Self {
        ArgKey::Named(Symbol::new(s))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Symbol),
    Const(Symbol),
    Num(Number),
    Compound(Compound),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Symbol::new(name))
    }

    pub fn constant(name: &str) -> Self {
        Term::Const(Symbol::new(name))
    }

    pub fn num(v: i64) -> Self {
        Term::Num(Number::from_int(v))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) | Term::Num(_) => true,
            Term::Compound(c) => c.args.is_ground(),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) | Term::Num(_) => {}
            Term::Compound(c) => c.args.collect_vars(out),
        }
    }

    pub fn as_number(&self) -> Option<Number> {
        match self {
            Term::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_const(&self) -> Option<&str> {
        match self {
            Term::Const(s) => Some(s.as_str()),
            _ => None,
        }
    }
}

/// A functional term such as `request_rating(about->X, ttl->2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Compound {
    pub functor: Symbol,
    pub args: Args,
}

/// Canonically ordered argument map.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Args(pub BTreeMap<ArgKey, Term>);

impl Args {
    pub fn new() -> Self {
        Args(BTreeMap::new())
    }

    pub fn get(&self, key: &ArgKey) -> Option<&Term> {
        self.0.get(key)
    }

    pub fn named(&self, key: &str) -> Option<&Term> {
        self.0.get(&ArgKey::named(key))
    }

    pub fn insert(&mut self, key: ArgKey, term: Term) -> Option<Term> {
        self.0.insert(key, term)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ArgKey, &Term)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.0.values().all(Term::is_ground)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        for t in self.0.values() {
            t.collect_vars(out);
        }
    }
}

impl FromIterator<(ArgKey, Term)> for Args {
    fn from_iter<I: IntoIterator<Item = (ArgKey, Term)>>(iter: I) -> Self {
        Args(iter.into_iter().collect())
    }
}

/// An atom with optional strong negation (`~`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub negated: bool,
    pub predicate: Symbol,
    pub args: Args,
}

impl Literal {
    pub fn new(predicate: &str) -> Self {
        Literal {
            negated: false,
            predicate: Symbol::new(predicate),
            args: Args::new(),
        }
    }

    /// Builder: add a named argument.
    pub fn arg(mut self, key: &str, term: Term) -> Self {
        self.args.insert(ArgKey::named(key), term);
        self
    }

    /// Builder: add the next positional argument.
    pub fn pos(mut self, term: Term) -> Self {
        let next = self.args.iter().filter(|(k, _)| matches!(k, ArgKey::Pos(_))).count();
        self.args.insert(ArgKey::Pos(next as u32), term);
        self
    }

    pub fn negate(mut self) -> Self {
        self.negated = !self.negated;
        self
    }

    pub fn complement(&self) -> Literal {
        self.clone().negate()
    }

    pub fn is_ground(&self) -> bool {
        self.args.is_ground()
    }

    pub fn vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.args.collect_vars(&mut out);
        out
    }

    pub fn get(&self, key: &str) -> Option<&Term> {
        self.args.named(key)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Term(Term),
    /// The injected clock value.
    Now,
    Neg(Box<Expr>),
    Bin(Box<Expr>, ArithOp, Box<Expr>),
}

impl Expr {
    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Expr::Term(t) => t.collect_vars(out),
            Expr::Now => {}
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Bin(a, _, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

/// Builtin constraint appearing in a rule body, a NAF block, or a conflict
/// declaration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Guard {
    Compare(Expr, CmpOp, Expr),
    /// `?x is <expr>`: binds `?x` (or checks it when already bound).
    Is(Symbol, Expr),
}

impl Guard {
    pub fn vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        match self {
            Guard::Compare(a, _, b) => {
                a.collect_vars(&mut out);
                b.collect_vars(&mut out);
            }
            Guard::Is(v, e) => {
                out.insert(v.clone());
                e.collect_vars(&mut out);
            }
        }
        out
    }

    /// Variables that must be bound before the guard can be evaluated.
    pub fn input_vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        match self {
            Guard::Compare(a, _, b) => {
                a.collect_vars(&mut out);
                b.collect_vars(&mut out);
            }
            Guard::Is(_, e) => e.collect_vars(&mut out),
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BodyElement {
    Literal(Literal),
    /// `not(L, guards…)`: holds iff no instance of `L` satisfying the
    /// guards is defeasibly provable.
    Naf(Literal, Vec<Guard>),
    Guard(Guard),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Strict,
    Defeasible,
    Defeater,
}

impl RuleKind {
    pub fn arrow(self) -> &'static str {
        match self {
            RuleKind::Strict => ":-",
            RuleKind::Defeasible => ":=",
            RuleKind::Defeater => ":~",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub id: Symbol,
    pub kind: RuleKind,
    pub head: Literal,
    pub body: Vec<BodyElement>,
}

impl Rule {
    pub fn positive_literals(&self) -> impl Iterator<Item = &Literal> {
        self.body.iter().filter_map(|e| match e {
            BodyElement::Literal(l) => Some(l),
            _ => None,
        })
    }
}

/// `conflict <scope> with <patterns> [where <guards>].`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConflictSetDecl {
    pub scope: Literal,
    pub conflicts_with: Vec<Literal>,
    pub guards: Vec<Guard>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceProgram {
    pub rules: Vec<Rule>,
    pub facts: Vec<Literal>,
    pub superiorities: Vec<(Symbol, Symbol)>,
    pub conflict_decls: Vec<ConflictSetDecl>,
}

impl SourceProgram {
    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
            && self.facts.is_empty()
            && self.superiorities.is_empty()
            && self.conflict_decls.is_empty()
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id.as_str() == id)
    }

    /// Concatenates two programs, enforcing the same invariants the parser
    /// does (unique rule ids, superiority over known rules).
    pub fn merge(mut self, other: SourceProgram) -> Result<SourceProgram, super::ParseError> {
        self.rules.extend(other.rules);
        self.facts.extend(other.facts);
        self.superiorities.extend(other.superiorities);
        self.conflict_decls.extend(other.conflict_decls);
        super::validate_program(&self)?;
        Ok(self)
    }
}
