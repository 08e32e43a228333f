use std::collections::{BTreeSet, HashMap, HashSet};

use super::analysis::Stratum;
use super::builtin::{
    apply_literal, apply_term, evaluate_builtin, match_literal, undo, Outcome, Subst, SubstDisplay,
};
use super::{ConclusionSet, Engine, EngineError};
use crate::number::Number;
use crate::syntax::{ArgKey, BodyElement, ConflictSetDecl, Guard, Literal, Rule, RuleKind, Symbol, Term};

type LitId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tri {
    Unknown,
    Pos,
    Neg,
}

/// Join order for one rule: positive literals in body order, each guard as
/// soon as its inputs are bound, NAF blocks last.
#[derive(Debug, Clone)]
pub struct Plan {
    steps: Vec<Step>,
    naf: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Match(usize),
    Guard(usize),
}

impl Plan {
    pub fn new(rule: &Rule) -> Plan {
        let mut steps = Vec::new();
        let mut naf = Vec::new();
        let mut bound: BTreeSet<Symbol> = BTreeSet::new();
        let mut pending: Vec<usize> = Vec::new();
        let flush = |bound: &mut BTreeSet<Symbol>, pending: &mut Vec<usize>, steps: &mut Vec<Step>| loop {
            let ready = pending.iter().position(|&i| match &rule.body[i] {
                BodyElement::Guard(g) => g.input_vars().is_subset(bound),
                _ => false,
            });
            match ready {
                Some(k) => {
                    let i = pending.remove(k);
                    if let BodyElement::Guard(Guard::Is(v, _)) = &rule.body[i] {
                        bound.insert(v.clone());
                    }
                    steps.push(Step::Guard(i));
                }
                None => break,
            }
        };
        for (i, e) in rule.body.iter().enumerate() {
            match e {
                BodyElement::Guard(_) => pending.push(i),
                BodyElement::Naf(..) => naf.push(i),
                BodyElement::Literal(_) => {}
            }
        }
        flush(&mut bound, &mut pending, &mut steps);
        for (i, e) in rule.body.iter().enumerate() {
            if let BodyElement::Literal(l) = e {
                steps.push(Step::Match(i));
                bound.extend(l.vars());
                flush(&mut bound, &mut pending, &mut steps);
            }
        }
        Plan { steps, naf }
    }
}

#[derive(Default)]
struct Store {
    lits: Vec<Literal>,
    ids: HashMap<Literal, LitId>,
    stratum: Vec<usize>,
    fact: Vec<bool>,
    candidate: Vec<bool>,
    delta: Vec<Tri>,
    partial: Vec<Tri>,
    /// Candidates by (polarity, predicate).
    by_pred: HashMap<(bool, Symbol), Vec<LitId>>,
    /// Candidates by (polarity, predicate, slot, value).
    by_arg: HashMap<(bool, Symbol, ArgKey, Term), Vec<LitId>>,
    /// Every interned literal by (polarity, predicate).
    universe_by_pred: HashMap<(bool, Symbol), Vec<LitId>>,
}

impl Store {
    fn intern(&mut self, l: Literal, stratum: usize) -> LitId {
        if let Some(&id) = self.ids.get(&l) {
            return id;
        }
        let id = self.lits.len() as LitId;
        self.universe_by_pred
            .entry((l.negated, l.predicate.clone()))
            .or_default()
            .push(id);
        self.ids.insert(l.clone(), id);
        self.lits.push(l);
        self.stratum.push(stratum);
        self.fact.push(false);
        self.candidate.push(false);
        self.delta.push(Tri::Unknown);
        self.partial.push(Tri::Unknown);
        id
    }

    /// Returns true when the literal was not a candidate before.
    fn make_candidate(&mut self, id: LitId) -> bool {
        let i = id as usize;
        if self.candidate[i] {
            return false;
        }
        self.candidate[i] = true;
        let l = &self.lits[i];
        self.by_pred.entry((l.negated, l.predicate.clone())).or_default().push(id);
        for (k, t) in l.args.iter() {
            self.by_arg
                .entry((l.negated, l.predicate.clone(), k.clone(), t.clone()))
                .or_default()
                .push(id);
        }
        true
    }

    /// Smallest candidate bucket that can contain matches for `pattern`.
    fn bucket(&self, pattern: &Literal, subst: &Subst) -> &[LitId] {
        let key = (pattern.negated, pattern.predicate.clone());
        let mut best: &[LitId] = self.by_pred.get(&key).map(Vec::as_slice).unwrap_or(&[]);
        for (k, t) in pattern.args.iter() {
            if best.is_empty() {
                break;
            }
            let g = apply_term(t, subst);
            if !g.is_ground() {
                continue;
            }
            let b = self
                .by_arg
                .get(&(pattern.negated, pattern.predicate.clone(), k.clone(), g))
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            if b.len() < best.len() {
                best = b;
            }
        }
        best
    }
}

struct Inst {
    rule: usize,
    head: LitId,
    body: Vec<LitId>,
    /// Some NAF block could not be decided (its literal is neither +∂ nor -∂).
    naf_undecided: bool,
    subst: Option<Subst>,
}

enum Naf {
    Holds,
    Fails,
    Undecided,
}

pub struct Evaluation<'e> {
    engine: &'e Engine,
    clock: Option<Number>,
    trace: Option<Vec<String>>,
    store: Store,
    /// Run-time predicate to stratum map; stratum 0 holds fact-only
    /// predicates unknown to the program.
    stratum_of: HashMap<Symbol, usize>,
}

impl<'e> Evaluation<'e> {
    pub fn new(engine: &'e Engine, clock: Option<Number>, trace: bool) -> Self {
        let stratum_of = engine.stratum_of.iter().map(|(k, &v)| (k.clone(), v + 1)).collect();
        Evaluation {
            engine,
            clock,
            trace: trace.then(Vec::new),
            store: Store::default(),
            stratum_of,
        }
    }

    pub fn run(mut self, facts: &[Literal]) -> Result<(ConclusionSet, Vec<String>), EngineError> {
        let mut extra = Stratum {
            predicates: BTreeSet::new(),
            rules: Vec::new(),
            recursive: false,
        };
        for f in self.engine.program.facts.iter().chain(facts) {
            if !f.is_ground() {
                let mut text = String::new();
                crate::syntax::write_literal(&mut text, f);
                return Err(EngineError::NonGroundFact(text));
            }
            let s = match self.stratum_of.get(&f.predicate) {
                Some(&s) => s,
                None => {
                    extra.predicates.insert(f.predicate.clone());
                    self.stratum_of.insert(f.predicate.clone(), 0);
                    0
                }
            };
            let id = self.store.intern(f.clone(), s);
            self.store.fact[id as usize] = true;
            self.store.make_candidate(id);
        }

        self.eval_stratum(0, &extra)?;
        for (i, s) in self.engine.strata.iter().enumerate() {
            self.eval_stratum(i + 1, s)?;
        }

        let mut out = ConclusionSet::default();
        let st = &self.store;
        for (i, l) in st.lits.iter().enumerate() {
            out.evaluated.insert(l.clone());
            match st.delta[i] {
                Tri::Pos => {
                    out.definite_pos.insert(l.clone());
                }
                Tri::Neg => {
                    out.definite_neg.insert(l.clone());
                }
                Tri::Unknown => {}
            }
            match st.partial[i] {
                Tri::Pos => {
                    out.defeasible_pos.insert(l.clone());
                }
                Tri::Neg => {
                    out.defeasible_neg.insert(l.clone());
                }
                Tri::Unknown => {}
            }
        }
        Ok((out, self.trace.unwrap_or_default()))
    }

    fn rule(&self, i: usize) -> &'e Rule {
        &self.engine.program.rules[i]
    }

    fn builtin_err(&self, context: String, source: super::BuiltinError) -> EngineError {
        EngineError::Builtin { context, source }
    }

    fn eval_stratum(&mut self, sidx: usize, stratum: &Stratum) -> Result<(), EngineError> {
        let insts = self.ground(sidx, stratum)?;

        // Universe of this stratum: facts and heads, their complements, and
        // the complements of those complements (which are the literals
        // themselves).
        let mut universe: Vec<LitId> = (0..self.store.lits.len() as LitId)
            .filter(|&id| self.store.stratum[id as usize] == sidx)
            .collect();
        for id in universe.clone() {
            let c = self.store.lits[id as usize].complement();
            let before = self.store.lits.len();
            let cid = self.store.intern(c, sidx);
            if cid as usize >= before {
                universe.push(cid);
            }
        }
        let local: HashMap<LitId, usize> = universe.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let n = universe.len();

        // Conflict sets: (literal, declared). Complements are never flagged
        // as declared.
        let mut conflicts: Vec<Vec<(LitId, bool)>> = vec![Vec::new(); n];
        for (qi, &q) in universe.iter().enumerate() {
            let ql = self.store.lits[q as usize].clone();
            let comp = self.store.ids[&ql.complement()];
            conflicts[qi].push((comp, false));
            let mut declared: BTreeSet<LitId> = BTreeSet::new();
            for decl in &self.engine.program.conflict_decls {
                self.declared_conflicts(decl, &ql, &mut declared)?;
            }
            declared.remove(&q);
            declared.remove(&comp);
            conflicts[qi].extend(declared.into_iter().map(|l| (l, true)));
        }

        let mut supporting: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut strict: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut all: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (ii, inst) in insts.iter().enumerate() {
            let h = local[&inst.head];
            all[h].push(ii);
            match self.rule(inst.rule).kind {
                RuleKind::Strict => {
                    strict[h].push(ii);
                    supporting[h].push(ii);
                }
                RuleKind::Defeasible => supporting[h].push(ii),
                RuleKind::Defeater => {}
            }
        }
        let related = |a: usize, b: usize| {
            self.engine.superior.contains(&(a, b)) || self.engine.superior.contains(&(b, a))
        };
        let mut attackers: Vec<Vec<usize>> = vec![Vec::new(); insts.len()];
        for (ii, inst) in insts.iter().enumerate() {
            if self.rule(inst.rule).kind == RuleKind::Defeater {
                continue;
            }
            for &(c, declared) in &conflicts[local[&inst.head]] {
                if let Some(&ci) = local.get(&c) {
                    for &si in &all[ci] {
                        if !declared || related(inst.rule, insts[si].rule) {
                            attackers[ii].push(si);
                        }
                    }
                }
            }
        }

        let st = &mut self.store;
        let body_all = |st: &Store, inst: &Inst, tags: fn(&Store) -> &Vec<Tri>, want: Tri| {
            inst.body.iter().all(|&b| tags(st)[b as usize] == want)
        };
        let body_any = |st: &Store, inst: &Inst, tags: fn(&Store) -> &Vec<Tri>, want: Tri| {
            inst.body.iter().any(|&b| tags(st)[b as usize] == want)
        };
        let delta_of: fn(&Store) -> &Vec<Tri> = |s| &s.delta;
        let partial_of: fn(&Store) -> &Vec<Tri> = |s| &s.partial;

        // Definite conclusions.
        loop {
            let mut changed = false;
            for (qi, &q) in universe.iter().enumerate() {
                let qu = q as usize;
                if st.delta[qu] != Tri::Unknown {
                    continue;
                }
                let pos = st.fact[qu]
                    || strict[qi]
                        .iter()
                        .any(|&i| !insts[i].naf_undecided && body_all(st, &insts[i], delta_of, Tri::Pos));
                let neg = !pos
                    && !st.fact[qu]
                    && strict[qi].iter().all(|&i| body_any(st, &insts[i], delta_of, Tri::Neg));
                if pos {
                    st.delta[qu] = Tri::Pos;
                    changed = true;
                } else if neg {
                    st.delta[qu] = Tri::Neg;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        // Defeasible conclusions.
        let superior = &self.engine.superior;
        let applicable = |st: &Store, i: usize| {
            !insts[i].naf_undecided && body_all(st, &insts[i], partial_of, Tri::Pos)
        };
        let discarded = |st: &Store, i: usize| body_any(st, &insts[i], partial_of, Tri::Neg);
        loop {
            let mut changed = false;
            for (qi, &q) in universe.iter().enumerate() {
                let qu = q as usize;
                if st.partial[qu] != Tri::Unknown {
                    continue;
                }
                let verdict = if st.delta[qu] == Tri::Pos {
                    Tri::Pos
                } else {
                    let conflicts_refuted = conflicts[qi].iter().all(|&(c, _)| st.delta[c as usize] == Tri::Neg);
                    let wins = |r: usize| {
                        attackers[r]
                            .iter()
                            .all(|&s| discarded(st, s) || superior.contains(&(insts[r].rule, insts[s].rule)))
                    };
                    if conflicts_refuted && supporting[qi].iter().any(|&r| applicable(st, r) && wins(r)) {
                        Tri::Pos
                    } else {
                        let some_conflict_definite =
                            conflicts[qi].iter().any(|&(c, _)| st.delta[c as usize] == Tri::Pos);
                        let defeated = |r: usize| {
                            discarded(st, r)
                                || some_conflict_definite
                                || attackers[r].iter().any(|&s| {
                                    applicable(st, s) && !superior.contains(&(insts[r].rule, insts[s].rule))
                                })
                        };
                        if st.delta[qu] == Tri::Neg && supporting[qi].iter().all(|&r| defeated(r)) {
                            Tri::Neg
                        } else {
                            Tri::Unknown
                        }
                    }
                };
                if verdict != Tri::Unknown {
                    st.partial[qu] = verdict;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        if let Some(trace) = self.trace.as_mut() {
            let st = &self.store;
            for (ii, inst) in insts.iter().enumerate() {
                let status = if applicable(st, ii) {
                    "applicable"
                } else if discarded(st, ii) {
                    "discarded"
                } else {
                    "undecided"
                };
                let tag = |t: Tri, p: &str, n: &str| match t {
                    Tri::Pos => format!("+{p}"),
                    Tri::Neg => format!("-{n}"),
                    Tri::Unknown => format!("?{p}"),
                };
                let mut head = String::new();
                crate::syntax::write_literal(&mut head, &st.lits[inst.head as usize]);
                let subst = inst.subst.clone().unwrap_or_default();
                trace.push(format!(
                    "{} {} -> {} [{}; {} {}]",
                    self.engine.program.rules[inst.rule].id,
                    SubstDisplay(&subst),
                    head,
                    status,
                    tag(st.delta[inst.head as usize], "D", "D"),
                    tag(st.partial[inst.head as usize], "d", "d"),
                ));
            }
        }
        Ok(())
    }

    /// Adds to `out` every universe literal that conflicts with `q` through
    /// `decl`, in either direction.
    fn declared_conflicts(
        &self,
        decl: &ConflictSetDecl,
        q: &Literal,
        out: &mut BTreeSet<LitId>,
    ) -> Result<(), EngineError> {
        let mut trail = Vec::new();
        for pat in &decl.conflicts_with {
            // q in scope, other literal matches the pattern; then the reverse.
            for (first, second) in [(&decl.scope, pat), (pat, &decl.scope)] {
                let mut subst = Subst::new();
                if !match_literal(first, q, &mut subst, &mut trail) {
                    trail.clear();
                    continue;
                }
                trail.clear();
                let key = (second.negated, second.predicate.clone());
                let Some(ids) = self.store.universe_by_pred.get(&key) else { continue };
                for &id in ids {
                    let mut s = subst.clone();
                    if !match_literal(second, &self.store.lits[id as usize], &mut s, &mut trail) {
                        trail.clear();
                        continue;
                    }
                    trail.clear();
                    let mut ok = true;
                    for g in &decl.guards {
                        let r = evaluate_builtin(g, &mut s, self.clock).map_err(|e| {
                            self.builtin_err(format!("conflict declaration for `{}`", decl.scope.predicate), e)
                        })?;
                        if r == Outcome::Fails {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        out.insert(id);
                    }
                }
            }
        }
        Ok(())
    }

    /// Grounds every rule of the stratum, iterating while new candidate
    /// heads appear if the stratum is recursive.
    fn ground(&mut self, sidx: usize, stratum: &Stratum) -> Result<Vec<Inst>, EngineError> {
        let mut insts = Vec::new();
        let mut seen: HashSet<(usize, LitId, Vec<LitId>)> = HashSet::new();
        loop {
            let mut found: Vec<(usize, Subst, Vec<LitId>)> = Vec::new();
            for &ri in &stratum.rules {
                let mut subst = Subst::new();
                let mut trail = Vec::new();
                let mut body = Vec::new();
                self.join(ri, sidx, 0, &mut subst, &mut trail, &mut body, &mut found)?;
            }
            let mut grew = false;
            for (ri, subst, body) in found {
                let rule = self.rule(ri);
                let head = apply_literal(&rule.head, &subst);
                let mut naf_undecided = false;
                let mut fails = false;
                for &ni in &self.engine.plans[ri].naf {
                    if let BodyElement::Naf(l, guards) = &rule.body[ni] {
                        match self.naf(ri, l, guards, &subst)? {
                            Naf::Holds => {}
                            Naf::Fails => fails = true,
                            Naf::Undecided => naf_undecided = true,
                        }
                    }
                }
                if fails {
                    continue;
                }
                let hid = self.store.intern(head, sidx);
                if !seen.insert((ri, hid, body.clone())) {
                    continue;
                }
                if rule.kind != RuleKind::Defeater && self.store.make_candidate(hid) {
                    grew = true;
                }
                insts.push(Inst {
                    rule: ri,
                    head: hid,
                    body,
                    naf_undecided,
                    subst: self.trace.is_some().then_some(subst),
                });
            }
            if !stratum.recursive || !grew {
                return Ok(insts);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn join(
        &self,
        ri: usize,
        sidx: usize,
        step: usize,
        subst: &mut Subst,
        trail: &mut Vec<Symbol>,
        body: &mut Vec<LitId>,
        out: &mut Vec<(usize, Subst, Vec<LitId>)>,
    ) -> Result<(), EngineError> {
        let plan = &self.engine.plans[ri];
        let rule = self.rule(ri);
        let Some(&s) = plan.steps.get(step) else {
            out.push((ri, subst.clone(), body.clone()));
            return Ok(());
        };
        match s {
            Step::Match(bi) => {
                let BodyElement::Literal(pat) = &rule.body[bi] else { unreachable!() };
                for &id in self.store.bucket(pat, subst) {
                    let i = id as usize;
                    // Lower strata are final; skip refuted literals.
                    if self.store.stratum[i] < sidx && self.store.partial[i] == Tri::Neg {
                        continue;
                    }
                    let mark = trail.len();
                    if match_literal(pat, &self.store.lits[i], subst, trail) {
                        body.push(id);
                        self.join(ri, sidx, step + 1, subst, trail, body, out)?;
                        body.pop();
                    }
                    undo(subst, trail, mark);
                }
            }
            Step::Guard(bi) => {
                let BodyElement::Guard(g) = &rule.body[bi] else { unreachable!() };
                let mark = trail.len();
                let target_free = matches!(g, Guard::Is(v, _) if !subst.contains_key(v));
                let r = evaluate_builtin(g, subst, self.clock)
                    .map_err(|e| self.builtin_err(format!("rule {}", rule.id), e))?;
                if let (true, Guard::Is(v, _)) = (target_free, g) {
                    trail.push(v.clone());
                }
                if r == Outcome::Holds {
                    self.join(ri, sidx, step + 1, subst, trail, body, out)?;
                }
                undo(subst, trail, mark);
            }
        }
        Ok(())
    }

    fn naf(&self, ri: usize, pat: &Literal, guards: &[Guard], outer: &Subst) -> Result<Naf, EngineError> {
        let mut undecided = false;
        let mut subst = outer.clone();
        let mut trail = Vec::new();
        for &id in self.store.bucket(pat, &subst) {
            let i = id as usize;
            let mark = trail.len();
            if match_literal(pat, &self.store.lits[i], &mut subst, &mut trail) {
                let mut ok = true;
                for g in guards {
                    let r = evaluate_builtin(g, &mut subst, self.clock)
                        .map_err(|e| self.builtin_err(format!("rule {}", self.rule(ri).id), e))?;
                    if r == Outcome::Fails {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    match self.store.partial[i] {
                        Tri::Pos => return Ok(Naf::Fails),
                        Tri::Unknown => undecided = true,
                        Tri::Neg => {}
                    }
                }
            }
            undo(&mut subst, &mut trail, mark);
        }
        Ok(if undecided { Naf::Undecided } else { Naf::Holds })
    }
}
