use std::fmt::Write;

use super::ast::*;
use super::lexer::{is_ident_char, is_ident_start};
use super::KEYWORDS;

/// Canonical text: facts, rules, superiority pairs, then conflict
/// declarations, one statement per line.
pub fn serialize_program(p: &SourceProgram) -> String {
    let mut out = String::new();
    for f in &p.facts {
        write_literal(&mut out, f);
        out.push_str(".\n");
    }
    for r in &p.rules {
        write_rule(&mut out, r);
        out.push_str(".\n");
    }
    for (a, b) in &p.superiorities {
        let _ = writeln!(out, "{a} > {b}.");
    }
    for c in &p.conflict_decls {
        out.push_str("conflict ");
        write_literal(&mut out, &c.scope);
        out.push_str(" with ");
        for (i, l) in c.conflicts_with.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write_literal(&mut out, l);
        }
        if !c.guards.is_empty() {
            out.push_str(" where ");
            write_guards(&mut out, &c.guards);
        }
        out.push_str(".\n");
    }
    out
}

fn write_rule(out: &mut String, r: &Rule) {
    let _ = write!(out, "{}: ", r.id);
    write_literal(out, &r.head);
    let _ = write!(out, " {} ", r.kind.arrow());
    for (i, e) in r.body.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match e {
            BodyElement::Literal(l) => write_literal(out, l),
            BodyElement::Naf(l, guards) => {
                out.push_str("not(");
                write_literal(out, l);
                if !guards.is_empty() {
                    out.push_str(", ");
                    write_guards(out, guards);
                }
                out.push(')');
            }
            BodyElement::Guard(g) => write_guard(out, g),
        }
    }
}

fn write_guards(out: &mut String, guards: &[Guard]) {
    for (i, g) in guards.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_guard(out, g);
    }
}

pub fn write_literal(out: &mut String, l: &Literal) {
    if l.negated {
        out.push('~');
    }
    out.push_str(l.predicate.as_str());
    if !l.args.is_empty() {
        write_args(out, &l.args);
    }
}

fn write_args(out: &mut String, args: &Args) {
    out.push('(');
    for (i, (k, t)) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        if let ArgKey::Named(k) = k {
            let _ = write!(out, "{k}->");
        }
        write_term(out, t);
    }
    out.push(')');
}

pub fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Var(v) => {
            let _ = write!(out, "?{v}");
        }
        Term::Const(c) => write_const(out, c.as_str()),
        Term::Num(n) => {
            let _ = write!(out, "{n}");
        }
        Term::Compound(c) => {
            out.push_str(c.functor.as_str());
            write_args(out, &c.args);
        }
    }
}

fn write_const(out: &mut String, c: &str) {
    let plain = c.chars().next().is_some_and(is_ident_start)
        && c.chars().all(is_ident_char)
        && !KEYWORDS.contains(&c);
    if plain {
        out.push_str(c);
    } else {
        out.push('"');
        for ch in c.chars() {
            if ch == '"' || ch == '\\' {
                out.push('\\');
            }
            out.push(ch);
        }
        out.push('"');
    }
}

pub fn write_guard(out: &mut String, g: &Guard) {
    match g {
        Guard::Compare(a, op, b) => {
            write_expr(out, a);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, b);
        }
        Guard::Is(v, e) => {
            let _ = write!(out, "?{v} is ");
            write_expr(out, e);
        }
    }
}

pub fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Term(t) => write_term(out, t),
        Expr::Now => out.push_str("now()"),
        Expr::Neg(inner) => {
            out.push_str("-(");
            write_expr(out, inner);
            out.push(')');
        }
        Expr::Bin(a, op, b) => {
            write_operand(out, a);
            let _ = write!(out, " {} ", op.symbol());
            write_operand(out, b);
        }
    }
}

fn write_operand(out: &mut String, e: &Expr) {
    if matches!(e, Expr::Bin(..)) {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}
