//! Rule-file syntax: AST, parser and canonical printer.

mod ast;
mod lexer;
mod parser;
mod printer;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

pub use ast::*;
pub use parser::{parse_fact, parse_literal, parse_program};
pub use printer::{serialize_program, write_expr, write_guard, write_literal, write_term};

pub const KEYWORDS: &[&str] = &["not", "is", "conflict", "with", "where", "now"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{pos}: unexpected {found}, expected {}", .expected.join(" or "))]
    Syntax { pos: Pos, found: String, expected: Vec<String> },
    #[error("{pos}: {what} is not supported")]
    Unsupported { pos: Pos, what: String },
    #[error("{pos}: invalid number `{text}`")]
    BadNumber { pos: Pos, text: String },
    #[error("{}duplicate rule id `{id}`", fmt_pos(.pos))]
    DuplicateRuleId { id: String, pos: Option<Pos> },
    #[error("{}superiority refers to unknown rule `{id}`", fmt_pos(.pos))]
    UnknownRule { id: String, pos: Option<Pos> },
    #[error("{}variable `?{var}` in fact", fmt_pos(.pos))]
    VariableInFact { var: String, pos: Option<Pos> },
}

fn fmt_pos(pos: &Option<Pos>) -> String {
    pos.map(|p| format!("{p}: ")).unwrap_or_default()
}

impl ParseError {
    pub(crate) fn syntax(pos: Pos, found: &str, expected: &[&str]) -> Self {
        ParseError::Syntax {
            pos,
            found: found.to_string(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn pos(&self) -> Option<Pos> {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::Unsupported { pos, .. }
            | ParseError::BadNumber { pos, .. } => Some(*pos),
            ParseError::DuplicateRuleId { pos, .. }
            | ParseError::UnknownRule { pos, .. }
            | ParseError::VariableInFact { pos, .. } => *pos,
        }
    }
}

/// Checks the structural invariants of a program built outside the parser.
pub fn validate_program(p: &SourceProgram) -> Result<(), ParseError> {
    let mut ids = HashSet::new();
    for r in &p.rules {
        if !ids.insert(r.id.as_str()) {
            return Err(ParseError::DuplicateRuleId { id: r.id.to_string(), pos: None });
        }
    }
    for (a, b) in &p.superiorities {
        for id in [a, b] {
            if !ids.contains(id.as_str()) {
                return Err(ParseError::UnknownRule { id: id.to_string(), pos: None });
            }
        }
    }
    for f in &p.facts {
        if let Some(v) = f.vars().into_iter().next() {
            return Err(ParseError::VariableInFact { var: v.to_string(), pos: None });
        }
    }
    Ok(())
}

/// Predicates used anywhere in a program (heads, bodies, facts, conflicts).
pub fn predicates(p: &SourceProgram) -> BTreeSet<Symbol> {
    let mut out = BTreeSet::new();
    for f in &p.facts {
        out.insert(f.predicate.clone());
    }
    for r in &p.rules {
        out.insert(r.head.predicate.clone());
        for e in &r.body {
            match e {
                BodyElement::Literal(l) | BodyElement::Naf(l, _) => {
                    out.insert(l.predicate.clone());
                }
                BodyElement::Guard(_) => {}
            }
        }
    }
    for c in &p.conflict_decls {
        out.insert(c.scope.predicate.clone());
        for l in &c.conflicts_with {
            out.insert(l.predicate.clone());
        }
    }
    out
}
