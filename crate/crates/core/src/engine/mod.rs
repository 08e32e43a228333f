//! Defeasible logic engine.
//!
//! A theory is grounded bottom-up, one predicate stratum at a time, and every
//! ground literal in the resulting universe receives up to four tags:
//! definitely provable (+Δ), definitely refuted (-Δ), defeasibly provable (+∂)
//! and defeasibly refuted (-∂). Conflict resolution is ambiguity blocking
//! without team defeat. Literals that no chain of rule applications can
//! produce are refuted outright.

mod analysis;
mod builtin;
mod eval;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

pub use analysis::Stratum;
pub use builtin::{
    apply_literal, apply_term, evaluate_builtin, match_literal, undo, BuiltinError, Outcome, Subst, SubstDisplay,
};

use crate::number::Number;
use crate::syntax::{Guard, Literal, ParseError, SourceProgram, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("cyclic superiority: {}", .cycle.join(" > "))]
    CyclicSuperiority { cycle: Vec<String> },
    #[error("rule {rule}: head variable `?{var}` does not occur in a positive body literal")]
    NotRangeRestricted { rule: String, var: String },
    #[error("rule {rule}: variable `?{var}` is used in a guard before it is bound")]
    UnsafeVariable { rule: String, var: String },
    #[error("rule {rule}: `is` cannot appear inside not(...)")]
    IsInsideNaf { rule: String },
    #[error("conflict declaration for `{scope}`: guard variable `?{var}` is not bound by the patterns")]
    UnsafeConflictGuard { scope: String, var: String },
    #[error("negation as failure inside a recursive component: {}", .predicates.join(", "))]
    Unstratified { predicates: Vec<String> },
    #[error("fact `{0}` is not ground")]
    NonGroundFact(String),
    #[error("{context}: {source}")]
    Builtin { context: String, source: BuiltinError },
    #[error(transparent)]
    Program(#[from] ParseError),
}

/// The four conclusion classes over the evaluated universe.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConclusionSet {
    pub definite_pos: BTreeSet<Literal>,
    pub definite_neg: BTreeSet<Literal>,
    pub defeasible_pos: BTreeSet<Literal>,
    pub defeasible_neg: BTreeSet<Literal>,
    /// Every literal the evaluation considered, tagged or not. Literals
    /// outside it are unsupported and count as refuted.
    pub evaluated: BTreeSet<Literal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Definite,
    Defeasible,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Definite => "definite",
            Tag::Defeasible => "defeasible",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Answer {
    pub literal: Literal,
    pub subst: Subst,
    pub tag: Tag,
}

impl ConclusionSet {
    pub fn proves(&self, l: &Literal) -> bool {
        self.defeasible_pos.contains(l)
    }

    /// Every defeasibly provable instance of `pattern`, tagged `Definite`
    /// when it is also strictly provable. Sorted by literal.
    pub fn query(&self, pattern: &Literal) -> Vec<Answer> {
        let mut out = Vec::new();
        let mut trail = Vec::new();
        for l in &self.defeasible_pos {
            let mut subst = Subst::new();
            if match_literal(pattern, l, &mut subst, &mut trail) {
                let tag = if self.definite_pos.contains(l) { Tag::Definite } else { Tag::Defeasible };
                out.push(Answer { literal: l.clone(), subst, tag });
            }
            trail.clear();
        }
        out
    }

    /// Literals evaluated but left without a defeasible tag.
    pub fn undecided(&self) -> impl Iterator<Item = &Literal> {
        self.evaluated
            .iter()
            .filter(|l| !self.defeasible_pos.contains(*l) && !self.defeasible_neg.contains(*l))
    }

    /// Refuted, either explicitly or by lack of support.
    pub fn refutes(&self, l: &Literal) -> bool {
        self.defeasible_neg.contains(l) || !self.evaluated.contains(l)
    }
}

/// A validated theory ready for evaluation.
#[derive(Debug, Clone)]
pub struct Engine {
    program: SourceProgram,
    strata: Vec<Stratum>,
    stratum_of: HashMap<Symbol, usize>,
    superior: HashSet<(usize, usize)>,
    plans: Vec<eval::Plan>,
}

impl Engine {
    /// Runs the static checks: unique ids, superiority acyclicity, range
    /// restriction, guard safety and stratification.
    pub fn new(program: SourceProgram) -> Result<Self, EngineError> {
        crate::syntax::validate_program(&program)?;
        let ids: Vec<Symbol> = program.rules.iter().map(|r| r.id.clone()).collect();
        let index: HashMap<&Symbol, usize> = ids.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let pairs: Vec<(usize, usize)> = program
            .superiorities
            .iter()
            .map(|(a, b)| (index[a], index[b]))
            .collect();
        if let Some(cycle) = analysis::superiority_cycle(ids.len(), &pairs, &ids) {
            return Err(EngineError::CyclicSuperiority { cycle });
        }
        for r in &program.rules {
            analysis::check_rule_safety(r)?;
        }
        for c in &program.conflict_decls {
            for pat in &c.conflicts_with {
                let mut scope_vars = c.scope.vars();
                scope_vars.extend(pat.vars());
                for g in &c.guards {
                    if let Some(v) = g.vars().difference(&scope_vars).next() {
                        return Err(EngineError::UnsafeConflictGuard {
                            scope: c.scope.predicate.to_string(),
                            var: v.to_string(),
                        });
                    }
                    if let Guard::Is(..) = g {
                        return Err(EngineError::UnsafeConflictGuard {
                            scope: c.scope.predicate.to_string(),
                            var: "is".into(),
                        });
                    }
                }
            }
        }
        let strata = analysis::stratify(&program)?;
        let mut stratum_of = HashMap::new();
        for (i, s) in strata.iter().enumerate() {
            for p in &s.predicates {
                stratum_of.insert(p.clone(), i);
            }
        }
        let plans = program.rules.iter().map(eval::Plan::new).collect();
        Ok(Engine {
            superior: pairs.into_iter().collect(),
            program,
            strata,
            stratum_of,
            plans,
        })
    }

    pub fn program(&self) -> &SourceProgram {
        &self.program
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    /// Evaluates the theory over its own facts plus `facts`. `clock` is the
    /// value returned by `now()`.
    pub fn run(&self, facts: &[Literal], clock: Option<Number>) -> Result<ConclusionSet, EngineError> {
        eval::Evaluation::new(self, clock, false).run(facts).map(|(c, _)| c)
    }

    /// Like [`Engine::run`], also returning one trace line per ground rule
    /// instance: rule id, substitution, body status and head tags.
    pub fn run_traced(
        &self,
        facts: &[Literal],
        clock: Option<Number>,
    ) -> Result<(ConclusionSet, Vec<String>), EngineError> {
        eval::Evaluation::new(self, clock, true).run(facts)
    }

    pub fn query(&self, facts: &[Literal], clock: Option<Number>, pattern: &Literal) -> Result<Vec<Answer>, EngineError> {
        Ok(self.run(facts, clock)?.query(pattern))
    }
}

/// One-shot evaluation of a theory.
pub fn run(theory: &SourceProgram, facts: &[Literal], clock: Option<Number>) -> Result<ConclusionSet, EngineError> {
    Engine::new(theory.clone())?.run(facts, clock)
}
