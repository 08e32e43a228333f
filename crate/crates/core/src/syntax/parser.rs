use std::collections::HashMap;

use super::ast::*;
use super::lexer::{tokenize, Spanned, Tok};
use super::{ParseError, Pos, KEYWORDS};
use crate::number::Number;

pub fn parse_program(text: &str) -> Result<SourceProgram, ParseError> {
    let mut p = Parser::new(text)?;
    let mut prog = SourceProgram::default();
    let mut rule_pos: HashMap<Symbol, Pos> = HashMap::new();
    let mut sup_pos = Vec::new();
    while !p.at(&Tok::Eof) {
        let start = p.pos();
        match p.statement()? {
            Statement::Fact(l) => {
                check_ground(&l, start)?;
                prog.facts.push(l);
            }
            Statement::Rule(r) => {
                if rule_pos.insert(r.id.clone(), start).is_some() {
                    return Err(ParseError::DuplicateRuleId { id: r.id.to_string(), pos: Some(start) });
                }
                prog.rules.push(r);
            }
            Statement::Superiority(a, b) => {
                sup_pos.push(start);
                prog.superiorities.push((a, b));
            }
            Statement::Conflict(c) => prog.conflict_decls.push(c),
        }
    }
    // Superiority may mention rules defined later in the file.
    for ((a, b), pos) in prog.superiorities.iter().zip(sup_pos) {
        for id in [a, b] {
            if !rule_pos.contains_key(id) {
                return Err(ParseError::UnknownRule { id: id.to_string(), pos: Some(pos) });
            }
        }
    }
    Ok(prog)
}

/// Parses a single ground atom terminated by `.`.
pub fn parse_fact(text: &str) -> Result<Literal, ParseError> {
    let mut p = Parser::new(text)?;
    let start = p.pos();
    let lit = p.literal()?;
    p.expect(&Tok::Dot, "`.`")?;
    p.expect(&Tok::Eof, "end of input")?;
    check_ground(&lit, start)?;
    Ok(lit)
}

/// Parses a literal pattern (variables allowed) with an optional trailing `.`.
pub fn parse_literal(text: &str) -> Result<Literal, ParseError> {
    let mut p = Parser::new(text)?;
    let lit = p.literal()?;
    if p.at(&Tok::Dot) {
        p.advance();
    }
    p.expect(&Tok::Eof, "end of input")?;
    Ok(lit)
}

fn check_ground(l: &Literal, pos: Pos) -> Result<(), ParseError> {
    match l.vars().into_iter().next() {
        Some(v) => Err(ParseError::VariableInFact { var: v.to_string(), pos: Some(pos) }),
        None => Ok(()),
    }
}

enum Statement {
    Fact(Literal),
    Rule(Rule),
    Superiority(Symbol, Symbol),
    Conflict(ConflictSetDecl),
}

struct Parser {
    toks: Vec<Spanned>,
    i: usize,
}

const CMP_EXPECTED: &[&str] = &["`<`", "`<=`", "`>`", "`>=`", "`=`", "`!=`"];

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(text)?, i: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError::syntax(self.pos(), &self.peek().to_string(), expected)
    }

    fn expect(&mut self, t: &Tok, label: &str) -> Result<(), ParseError> {
        if self.at(t) {
            self.advance();
            Ok(())
        } else {
            Err(self.error(&[label]))
        }
    }

    /// A name that is not a reserved word (predicates, rule ids, functors).
    fn name(&mut self) -> Result<Symbol, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = Symbol::from(s.as_str());
                self.advance();
                Ok(s)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        if self.at_keyword("conflict") {
            self.advance();
            let c = self.conflict()?;
            self.expect(&Tok::Dot, "`.`")?;
            return Ok(Statement::Conflict(c));
        }
        if let Tok::Ident(_) = self.peek() {
            match self.peek_at(1) {
                Tok::Colon => {
                    let id = self.name()?;
                    self.advance();
                    let r = self.rule(id)?;
                    self.expect(&Tok::Dot, "`.`")?;
                    return Ok(Statement::Rule(r));
                }
                Tok::Gt => {
                    let a = self.name()?;
                    self.advance();
                    let b = self.name()?;
                    self.expect(&Tok::Dot, "`.`")?;
                    return Ok(Statement::Superiority(a, b));
                }
                _ => {}
            }
        }
        let lit = self.literal()?;
        if !self.at(&Tok::Dot) {
            return Err(self.error(&["`.`", "`:`", "`>`"]));
        }
        self.advance();
        Ok(Statement::Fact(lit))
    }

    fn rule(&mut self, id: Symbol) -> Result<Rule, ParseError> {
        let head = self.literal()?;
        let kind = match self.peek() {
            Tok::Strict => RuleKind::Strict,
            Tok::Defeasible => RuleKind::Defeasible,
            Tok::Defeater => RuleKind::Defeater,
            _ => return Err(self.error(&["`:-`", "`:=`", "`:~`"])),
        };
        self.advance();
        let mut body = vec![self.body_element()?];
        while self.at(&Tok::Comma) {
            self.advance();
            body.push(self.body_element()?);
        }
        Ok(Rule { id, kind, head, body })
    }

    fn conflict(&mut self) -> Result<ConflictSetDecl, ParseError> {
        let scope = self.literal()?;
        if !self.at_keyword("with") {
            return Err(self.error(&["`with`"]));
        }
        self.advance();
        let mut conflicts_with = vec![self.literal()?];
        while self.at(&Tok::Comma) {
            self.advance();
            conflicts_with.push(self.literal()?);
        }
        let mut guards = Vec::new();
        if self.at_keyword("where") {
            self.advance();
            guards.push(self.guard()?);
            while self.at(&Tok::Comma) {
                self.advance();
                guards.push(self.guard()?);
            }
        }
        Ok(ConflictSetDecl { scope, conflicts_with, guards })
    }

    fn body_element(&mut self) -> Result<BodyElement, ParseError> {
        if self.at_keyword("not") && self.peek_at(1) == &Tok::LParen {
            self.advance();
            self.advance();
            let lit = self.literal()?;
            let mut guards = Vec::new();
            while self.at(&Tok::Comma) {
                self.advance();
                guards.push(self.guard()?);
            }
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(BodyElement::Naf(lit, guards));
        }
        if self.at(&Tok::Tilde) {
            return Ok(BodyElement::Literal(self.literal()?));
        }
        if let Tok::Ident(s) = self.peek() {
            if s != "now" {
                // Either a literal or the left operand of a comparison.
                let start = self.pos();
                let lit = self.literal()?;
                if is_operator(self.peek()) {
                    let lhs = Expr::Term(literal_to_term(lit, start)?);
                    let lhs = self.expr_tail(lhs)?;
                    return Ok(BodyElement::Guard(self.guard_rest(lhs)?));
                }
                return Ok(BodyElement::Literal(lit));
            }
        }
        Ok(BodyElement::Guard(self.guard()?))
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let negated = if self.at(&Tok::Tilde) {
            self.advance();
            true
        } else {
            false
        };
        let predicate = self.name()?;
        let args = if self.at(&Tok::LParen) { self.args()? } else { Args::new() };
        Ok(Literal { negated, predicate, args })
    }

    fn args(&mut self) -> Result<Args, ParseError> {
        self.expect(&Tok::LParen, "`(`")?;
        let mut args = Args::new();
        let mut next_pos = 0u32;
        let mut seen_named = false;
        loop {
            let pos = self.pos();
            let named_key = match (self.peek(), self.peek_at(1)) {
                (Tok::Ident(k), Tok::Arrow) => Some(Symbol::from(k.as_str())),
                _ => None,
            };
            if let Some(k) = named_key {
                self.advance();
                self.advance();
                let t = self.term()?;
                if args.insert(ArgKey::Named(k.clone()), t).is_some() {
                    return Err(ParseError::syntax(pos, &format!("repeated key `{k}`"), &["distinct key"]));
                }
                seen_named = true;
            } else {
                if seen_named {
                    return Err(self.error(&["named argument"]));
                }
                let t = self.term()?;
                args.insert(ArgKey::Pos(next_pos), t);
                next_pos += 1;
            }
            match self.peek() {
                Tok::Comma => {
                    self.advance();
                }
                Tok::RParen => {
                    self.advance();
                    return Ok(args);
                }
                _ => return Err(self.error(&["`,`", "`)`"])),
            }
        }
    }

    fn number(&mut self, negative: bool) -> Result<Number, ParseError> {
        let pos = self.pos();
        match self.advance() {
            Tok::Num(s) => {
                let text = if negative { format!("-{s}") } else { s };
                text.parse().map_err(|_| ParseError::BadNumber { pos, text })
            }
            _ => Err(ParseError::syntax(pos, "token", &["number"])),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.advance();
                Ok(Term::Var(Symbol::from(v)))
            }
            Tok::Num(_) => Ok(Term::Num(self.number(false)?)),
            Tok::Minus if matches!(self.peek_at(1), Tok::Num(_)) => {
                self.advance();
                Ok(Term::Num(self.number(true)?))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Term::Const(Symbol::from(s)))
            }
            Tok::Ident(_) => {
                let functor = self.name()?;
                if self.at(&Tok::LParen) {
                    let args = self.args()?;
                    Ok(Term::Compound(Compound { functor, args }))
                } else {
                    Ok(Term::Const(functor))
                }
            }
            _ => Err(self.error(&["term"])),
        }
    }

    fn guard(&mut self) -> Result<Guard, ParseError> {
        if let (Tok::Var(v), Tok::Ident(kw)) = (self.peek().clone(), self.peek_at(1).clone()) {
            if kw == "is" {
                self.advance();
                self.advance();
                let e = self.expr()?;
                return Ok(Guard::Is(Symbol::from(v), e));
            }
        }
        let lhs = self.expr()?;
        self.guard_rest(lhs)
    }

    fn guard_rest(&mut self, lhs: Expr) -> Result<Guard, ParseError> {
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            _ => return Err(self.error(CMP_EXPECTED)),
        };
        self.advance();
        let rhs = self.expr()?;
        if is_comparison(self.peek()) {
            return Err(ParseError::Unsupported {
                pos: self.pos(),
                what: "chained comparison".into(),
            });
        }
        Ok(Guard::Compare(lhs, op, rhs))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let first = self.product()?;
        self.expr_tail(first)
    }

    /// Continues an additive expression whose first factor is already parsed.
    fn expr_tail(&mut self, first: Expr) -> Result<Expr, ParseError> {
        let mut lhs = self.product_tail(first)?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.product()?;
            lhs = Expr::Bin(Box::new(lhs), op, Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let first = self.factor()?;
        self.product_tail(first)
    }

    fn product_tail(&mut self, first: Expr) -> Result<Expr, ParseError> {
        let mut lhs = first;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.factor()?;
            lhs = Expr::Bin(Box::new(lhs), op, Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Minus if matches!(self.peek_at(1), Tok::Num(_)) => {
                self.advance();
                Ok(Expr::Term(Term::Num(self.number(true)?)))
            }
            Tok::Minus => {
                self.advance();
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Tok::Ident(s) if s == "now" => {
                self.advance();
                self.expect(&Tok::LParen, "`(`")?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Expr::Now)
            }
            Tok::Var(_) | Tok::Num(_) | Tok::Str(_) | Tok::Ident(_) => Ok(Expr::Term(self.term()?)),
            _ => Err(self.error(&["expression"])),
        }
    }
}

fn is_comparison(t: &Tok) -> bool {
    matches!(t, Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge | Tok::Eq | Tok::Ne)
}

fn is_operator(t: &Tok) -> bool {
    is_comparison(t) || matches!(t, Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash)
}

fn literal_to_term(l: Literal, pos: Pos) -> Result<Term, ParseError> {
    if l.negated {
        return Err(ParseError::syntax(pos, "`~`", &["expression"]));
    }
    if l.args.is_empty() {
        Ok(Term::Const(l.predicate))
    } else {
        Ok(Term::Compound(Compound { functor: l.predicate, args: l.args }))
    }
}
