//! Substitutions, pattern matching and builtin guard evaluation.

use std::collections::BTreeMap;
use std::fmt;

use crate::number::{Number, NumberError};
use crate::syntax::{Args, ArithOp, CmpOp, Compound, Expr, Guard, Literal, Symbol, Term};

/// Variable bindings; always maps to ground terms.
pub type Subst = BTreeMap<Symbol, Term>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuiltinError {
    #[error("variable `?{0}` is unbound")]
    Unbound(Symbol),
    #[error("division by zero")]
    DivisionByZero,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("`{op}` needs numbers, got `{value}`")]
    TypeMismatch { op: &'static str, value: String },
    #[error("now() used but no clock was supplied")]
    ClockUnset,
}

impl From<NumberError> for BuiltinError {
    fn from(e: NumberError) -> Self {
        match e {
            NumberError::DivisionByZero => BuiltinError::DivisionByZero,
            _ => BuiltinError::Overflow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Fails,
}

impl Outcome {
    pub fn holds(self) -> bool {
        self == Outcome::Holds
    }
}

/// Evaluates a guard, binding the target of `is` when it is still free.
pub fn evaluate_builtin(g: &Guard, subst: &mut Subst, clock: Option<Number>) -> Result<Outcome, BuiltinError> {
    let ok = match g {
        Guard::Compare(a, op, b) => {
            let x = eval_expr(a, subst, clock)?;
            let y = eval_expr(b, subst, clock)?;
            compare(&x, *op, &y)?
        }
        Guard::Is(v, e) => {
            let value = eval_expr(e, subst, clock)?;
            match subst.get(v) {
                Some(bound) => *bound == value,
                None => {
                    subst.insert(v.clone(), value);
                    true
                }
            }
        }
    };
    Ok(if ok { Outcome::Holds } else { Outcome::Fails })
}

fn compare(x: &Term, op: CmpOp, y: &Term) -> Result<bool, BuiltinError> {
    if let (Term::Num(a), Term::Num(b)) = (x, y) {
        return Ok(match op {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        });
    }
    match op {
        CmpOp::Eq => Ok(x == y),
        CmpOp::Ne => Ok(x != y),
        _ => {
            let bad = if matches!(x, Term::Num(_)) { y } else { x };
            Err(BuiltinError::TypeMismatch { op: op.symbol(), value: term_text(bad) })
        }
    }
}

pub fn eval_expr(e: &Expr, subst: &Subst, clock: Option<Number>) -> Result<Term, BuiltinError> {
    match e {
        Expr::Now => clock.map(Term::Num).ok_or(BuiltinError::ClockUnset),
        Expr::Term(t) => {
            let g = apply_term(t, subst);
            let mut free = std::collections::BTreeSet::new();
            g.collect_vars(&mut free);
            match free.into_iter().next() {
                Some(v) => Err(BuiltinError::Unbound(v)),
                None => Ok(g),
            }
        }
        Expr::Neg(inner) => {
            let v = number(eval_expr(inner, subst, clock)?, "-")?;
            Ok(Term::Num(v.checked_neg()?))
        }
        Expr::Bin(a, op, b) => {
            let x = number(eval_expr(a, subst, clock)?, op.symbol())?;
            let y = number(eval_expr(b, subst, clock)?, op.symbol())?;
            let r = match op {
                ArithOp::Add => x.checked_add(y)?,
                ArithOp::Sub => x.checked_sub(y)?,
                ArithOp::Mul => x.checked_mul(y)?,
                ArithOp::Div => x.checked_div(y)?,
            };
            Ok(Term::Num(r))
        }
    }
}

fn number(t: Term, op: &'static str) -> Result<Number, BuiltinError> {
    match t {
        Term::Num(n) => Ok(n),
        other => Err(BuiltinError::TypeMismatch { op, value: term_text(&other) }),
    }
}

fn term_text(t: &Term) -> String {
    let mut s = String::new();
    crate::syntax::write_term(&mut s, t);
    s
}

pub fn apply_term(t: &Term, subst: &Subst) -> Term {
    match t {
        Term::Var(v) => subst.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Const(_) | Term::Num(_) => t.clone(),
        Term::Compound(c) => Term::Compound(Compound {
            functor: c.functor.clone(),
            args: apply_args(&c.args, subst),
        }),
    }
}

fn apply_args(args: &Args, subst: &Subst) -> Args {
    args.iter().map(|(k, t)| (k.clone(), apply_term(t, subst))).collect()
}

pub fn apply_literal(l: &Literal, subst: &Subst) -> Literal {
    Literal {
        negated: l.negated,
        predicate: l.predicate.clone(),
        args: apply_args(&l.args, subst),
    }
}

/// Matches `pattern` against a ground literal. Slots absent from the
/// pattern are ignored. New bindings are pushed on `trail` so the caller can
/// undo them with [`undo`].
pub fn match_literal(pattern: &Literal, ground: &Literal, subst: &mut Subst, trail: &mut Vec<Symbol>) -> bool {
    pattern.negated == ground.negated
        && pattern.predicate == ground.predicate
        && match_args(&pattern.args, &ground.args, subst, trail)
}

fn match_args(p: &Args, g: &Args, subst: &mut Subst, trail: &mut Vec<Symbol>) -> bool {
    p.iter().all(|(k, pt)| match g.get(k) {
        Some(gt) => match_term(pt, gt, subst, trail),
        None => false,
    })
}

fn match_term(p: &Term, g: &Term, subst: &mut Subst, trail: &mut Vec<Symbol>) -> bool {
    match p {
        Term::Var(v) => match subst.get(v) {
            Some(bound) => bound == g,
            None => {
                subst.insert(v.clone(), g.clone());
                trail.push(v.clone());
                true
            }
        },
        Term::Compound(pc) => match g {
            Term::Compound(gc) => pc.functor == gc.functor && match_args(&pc.args, &gc.args, subst, trail),
            _ => false,
        },
        _ => p == g,
    }
}

pub fn undo(subst: &mut Subst, trail: &mut Vec<Symbol>, mark: usize) {
    for v in trail.drain(mark..) {
        subst.remove(&v);
    }
}

pub struct SubstDisplay<'a>(pub &'a Subst);

impl fmt::Display for SubstDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "?{k}={}", term_text(v))?;
        }
        f.write_str("}")
    }
}
