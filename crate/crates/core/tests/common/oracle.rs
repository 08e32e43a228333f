//! Brute-force reference for the engine: small theories over predicates of
//! arity 0..=2, two constants and two variables, grounded over the whole
//! Herbrand base and evaluated by naive simultaneous iteration.

use std::collections::{BTreeMap, BTreeSet};

use disarm::engine::{ConclusionSet, EngineError};
use disarm::syntax::{BodyElement, CmpOp, ConflictSetDecl, Expr, Guard, Literal, Rule, RuleKind, SourceProgram, Term};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CONSTS: [&str; 2] = ["a", "b"];
pub const VARS: [&str; 2] = ["x", "y"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum A {
    C(usize),
    V(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GLit {
    pub neg: bool,
    pub pred: usize,
    pub args: Vec<A>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GElem {
    Pos(GLit),
    Naf(GLit),
    /// `?v0 != ?v1`
    Neq(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Strict,
    Defeasible,
    Defeater,
}

#[derive(Debug, Clone)]
pub struct GRule {
    pub kind: Kind,
    pub head: GLit,
    pub body: Vec<GElem>,
}

#[derive(Debug, Clone)]
pub struct GTheory {
    pub arity: Vec<usize>,
    pub rules: Vec<GRule>,
    /// (negated, predicate, constants)
    pub facts: Vec<(bool, usize, Vec<usize>)>,
    /// (stronger, weaker)
    pub sup: Vec<(usize, usize)>,
    pub conflicts: Vec<(GLit, GLit)>,
}

fn gen_args(rng: &mut impl Rng, n: usize, var_p: f64) -> Vec<A> {
    (0..n)
        .map(|_| {
            if rng.gen_bool(var_p) {
                A::V(rng.gen_range(0..VARS.len()))
            } else {
                A::C(rng.gen_range(0..CONSTS.len()))
            }
        })
        .collect()
}

fn vars_of(args: &[A]) -> BTreeSet<usize> {
    args.iter().filter_map(|a| if let A::V(v) = a { Some(*v) } else { None }).collect()
}

/// A random theory: at most 6 predicates, 10 rules and 8 facts.
pub fn generate(rng: &mut impl Rng) -> GTheory {
    let npred = rng.gen_range(2..=5);
    let arity: Vec<usize> = (0..npred).map(|_| [0, 0, 1, 1, 1, 2][rng.gen_range(0..6)]).collect();
    let lit = |rng: &mut _, pred: usize, var_p, neg_p| GLit {
        neg: Rng::gen_bool(rng, neg_p),
        pred,
        args: gen_args(rng, arity[pred], var_p),
    };
    // Mostly layered: bodies use predicates up to the head's, NAF strictly
    // below it. The rest may be unstratified.
    let layered = rng.gen_bool(0.8);
    let nrules = rng.gen_range(0..=10);
    let mut rules = Vec::new();
    for _ in 0..nrules {
        let kind = match rng.gen_range(0..10) {
            0..=2 => Kind::Strict,
            3..=7 => Kind::Defeasible,
            _ => Kind::Defeater,
        };
        // Heads cluster on the top predicates so rules compete.
        let hp = if rng.gen_bool(0.5) { npred - 1 - rng.gen_range(0..2) } else { rng.gen_range(0..npred) };
        let below = |rng: &mut _, strict: bool| {
            let top = if strict { hp } else { hp + 1 };
            if !layered || top == 0 {
                Rng::gen_range(rng, if strict && layered { 1 } else { 0 }..npred)
            } else {
                Rng::gen_range(rng, 0..top)
            }
        };
        let mut body = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            let p = below(rng, false);
            body.push(GElem::Pos(lit(rng, p, 0.6, 0.15)));
        }
        let bound: BTreeSet<usize> = body
            .iter()
            .flat_map(|e| if let GElem::Pos(l) = e { vars_of(&l.args) } else { BTreeSet::new() })
            .collect();
        if rng.gen_bool(0.2) && !(layered && hp == 0) {
            let p = below(rng, true);
            body.push(GElem::Naf(lit(rng, p, 0.5, 0.3)));
        }
        if bound.len() == 2 && rng.gen_bool(0.3) {
            body.push(GElem::Neq(0, 1));
        }
        let mut head = lit(rng, hp, 0.7, 0.45);
        for a in head.args.iter_mut() {
            if let A::V(v) = *a {
                if !bound.contains(&v) {
                    *a = A::C(rng.gen_range(0..CONSTS.len()));
                }
            }
        }
        rules.push(GRule { kind, head, body });
    }
    let facts = (0..rng.gen_range(1..=8))
        .map(|_| {
            let pred = rng.gen_range(0..npred);
            (rng.gen_bool(0.2), pred, (0..arity[pred]).map(|_| rng.gen_range(0..CONSTS.len())).collect())
        })
        .collect();
    let mut sup = Vec::new();
    if nrules >= 2 {
        let mut rank: Vec<usize> = (0..nrules).collect();
        rank.sort_by_key(|_| rng.gen::<u32>());
        for _ in 0..rng.gen_range(0..=4) {
            let (i, j) = (rng.gen_range(0..nrules), rng.gen_range(0..nrules));
            if i != j {
                let pair = if rank[i] > rank[j] { (i, j) } else { (j, i) };
                if !sup.contains(&pair) {
                    sup.push(pair);
                }
            }
        }
    }
    let mut conflicts = Vec::new();
    if rng.gen_bool(0.3) {
        let p = rng.gen_range(0..npred);
        let q = rng.gen_range(0..npred);
        let shared: Vec<A> = (0..arity[p]).map(|i| A::V(i % VARS.len())).collect();
        let other: Vec<A> = (0..arity[q])
            .map(|i| if i < shared.len() { shared[i] } else { A::C(0) })
            .collect();
        conflicts.push((GLit { neg: false, pred: p, args: shared }, GLit { neg: rng.gen_bool(0.3), pred: q, args: other }));
    }
    GTheory { arity, rules, facts, sup, conflicts }
}

fn pname(p: usize) -> String {
    format!("p{p}")
}

fn term(a: A) -> Term {
    match a {
        A::C(c) => Term::constant(CONSTS[c]),
        A::V(v) => Term::var(VARS[v]),
    }
}

pub fn to_literal(l: &GLit) -> Literal {
    let mut out = Literal::new(&pname(l.pred));
    for a in &l.args {
        out = out.pos(term(*a));
    }
    if l.neg {
        out = out.negate();
    }
    out
}

pub fn ground_literal(neg: bool, pred: usize, consts: &[usize]) -> Literal {
    to_literal(&GLit { neg, pred, args: consts.iter().map(|&c| A::C(c)).collect() })
}

impl GTheory {
    pub fn program(&self) -> SourceProgram {
        let mut p = SourceProgram::default();
        for (i, r) in self.rules.iter().enumerate() {
            p.rules.push(Rule {
                id: format!("r{i}").into(),
                kind: match r.kind {
                    Kind::Strict => RuleKind::Strict,
                    Kind::Defeasible => RuleKind::Defeasible,
                    Kind::Defeater => RuleKind::Defeater,
                },
                head: to_literal(&r.head),
                body: r
                    .body
                    .iter()
                    .map(|e| match e {
                        GElem::Pos(l) => BodyElement::Literal(to_literal(l)),
                        GElem::Naf(l) => BodyElement::Naf(to_literal(l), Vec::new()),
                        GElem::Neq(a, b) => BodyElement::Guard(Guard::Compare(
                            Expr::Term(Term::var(VARS[*a])),
                            CmpOp::Ne,
                            Expr::Term(Term::var(VARS[*b])),
                        )),
                    })
                    .collect(),
            });
        }
        for &(a, b) in &self.sup {
            p.superiorities.push((format!("r{a}").into(), format!("r{b}").into()));
        }
        for (s, o) in &self.conflicts {
            p.conflict_decls.push(ConflictSetDecl {
                scope: to_literal(s),
                conflicts_with: vec![to_literal(o)],
                guards: Vec::new(),
            });
        }
        p
    }

    pub fn fact_literals(&self) -> Vec<Literal> {
        self.facts.iter().map(|(n, p, c)| ground_literal(*n, *p, c)).collect()
    }

    /// Every ground literal of every predicate, both polarities.
    pub fn herbrand(&self) -> Vec<(bool, usize, Vec<usize>)> {
        let mut out = Vec::new();
        for (p, &n) in self.arity.iter().enumerate() {
            for combo in tuples(n) {
                for neg in [false, true] {
                    out.push((neg, p, combo.clone()));
                }
            }
        }
        out
    }
}

fn tuples(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| (0..CONSTS.len()).map(move |c| {
                let mut t = t.clone();
                t.push(c);
                t
            }))
            .collect();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    Unstratified,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum T {
    U,
    P,
    N,
}

struct Inst {
    rule: usize,
    head: usize,
    body: Vec<usize>,
    /// (literal pattern ids, one per matching ground instance) of NAF blocks
    naf: Vec<Vec<usize>>,
}

/// Four conclusion sets over the Herbrand base.
pub fn evaluate(th: &GTheory) -> Result<ConclusionSet, OracleError> {
    let npred = th.arity.len();
    // Dependency closure for strata.
    let mut reach = vec![vec![false; npred]; npred];
    let mut naf_edges = Vec::new();
    for r in &th.rules {
        for e in &r.body {
            match e {
                GElem::Pos(l) => reach[r.head.pred][l.pred] = true,
                GElem::Naf(l) => {
                    reach[r.head.pred][l.pred] = true;
                    naf_edges.push((r.head.pred, l.pred));
                }
                GElem::Neq(..) => {}
            }
        }
    }
    for (s, o) in &th.conflicts {
        reach[s.pred][o.pred] = true;
        reach[o.pred][s.pred] = true;
    }
    for k in 0..npred {
        for i in 0..npred {
            for j in 0..npred {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let same = |a: usize, b: usize| a == b || (reach[a][b] && reach[b][a]);
    if naf_edges.iter().any(|&(h, b)| same(h, b)) {
        return Err(OracleError::Unstratified);
    }
    // Strata as groups of mutually reachable predicates, dependencies first.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for p in 0..npred {
        match groups.iter_mut().find(|g| same(g[0], p)) {
            Some(g) => g.push(p),
            None => groups.push(vec![p]),
        }
    }
    let mut order = Vec::new();
    let mut done = vec![false; groups.len()];
    while order.len() < groups.len() {
        for gi in 0..groups.len() {
            if done[gi] {
                continue;
            }
            let ready = groups[gi].iter().all(|&p| {
                (0..npred).all(|q| !reach[p][q] || same(p, q) || groups.iter().enumerate().any(|(gj, g)| done[gj] && g.contains(&q)))
            });
            if ready {
                done[gi] = true;
                order.push(gi);
            }
        }
    }

    let base = th.herbrand();
    let id: BTreeMap<(bool, usize, Vec<usize>), usize> = base.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    let n = base.len();
    let facts: BTreeSet<usize> = th.facts.iter().map(|f| id[f]).collect();
    let mut delta = vec![T::U; n];
    let mut part = vec![T::U; n];
    let mut final_ = vec![false; n];

    let inst_lit = |l: &GLit, s: &[usize]| -> usize {
        let args = l.args.iter().map(|a| match a {
            A::C(c) => *c,
            A::V(v) => s[*v],
        });
        id[&(l.neg, l.pred, args.collect())]
    };

    for gi in order {
        let preds = &groups[gi];
        let local: Vec<usize> = (0..n).filter(|&i| preds.contains(&base[i].1)).collect();
        // Ground every rule of the stratum over all variable assignments.
        let mut insts = Vec::new();
        for (ri, r) in th.rules.iter().enumerate() {
            if !preds.contains(&r.head.pred) {
                continue;
            }
            'assign: for s in tuples(VARS.len()) {
                let mut body = Vec::new();
                let mut naf = Vec::new();
                for e in &r.body {
                    match e {
                        GElem::Pos(l) => body.push(inst_lit(l, &s)),
                        GElem::Neq(a, b) => {
                            if s[*a] == s[*b] {
                                continue 'assign;
                            }
                        }
                        GElem::Naf(_) => {}
                    }
                }
                let bound: BTreeSet<usize> = r
                    .body
                    .iter()
                    .flat_map(|e| if let GElem::Pos(l) = e { vars_of(&l.args) } else { BTreeSet::new() })
                    .collect();
                // Skip duplicate assignments differing only in unbound variables.
                if (0..VARS.len()).any(|v| !bound.contains(&v) && s[v] != 0) {
                    continue;
                }
                for e in &r.body {
                    if let GElem::Naf(l) = e {
                        let free: Vec<usize> = vars_of(&l.args).into_iter().filter(|v| !bound.contains(v)).collect();
                        let mut matches = BTreeSet::new();
                        for t in tuples(free.len()) {
                            let mut s2 = s.clone();
                            for (k, v) in free.iter().enumerate() {
                                s2[*v] = t[k];
                            }
                            matches.insert(inst_lit(l, &s2));
                        }
                        naf.push(matches.into_iter().collect());
                    }
                }
                insts.push(Inst { rule: ri, head: inst_lit(&r.head, &s), body, naf });
            }
        }
        // NAF blocks refer to final strata only.
        let naf_state = |inst: &Inst, part: &[T]| -> T {
            let mut undecided = false;
            for block in &inst.naf {
                for &l in block {
                    match part[l] {
                        T::P => return T::N,
                        T::U => undecided = true,
                        T::N => {}
                    }
                }
            }
            if undecided { T::U } else { T::P }
        };
        let insts: Vec<(Inst, bool)> = insts
            .into_iter()
            .filter_map(|i| match naf_state(&i, &part) {
                T::N => None,
                T::U => Some((i, true)),
                T::P => Some((i, false)),
            })
            .collect();

        // Support: literals some chain of rules could produce.
        let mut cand: BTreeSet<usize> = local.iter().copied().filter(|i| facts.contains(i)).collect();
        loop {
            let before = cand.len();
            for (inst, _) in &insts {
                if th.rules[inst.rule].kind == Kind::Defeater {
                    continue;
                }
                let ok = inst
                    .body
                    .iter()
                    .all(|&b| if final_[b] { part[b] != T::N } else { cand.contains(&b) });
                if ok {
                    cand.insert(inst.head);
                }
            }
            if cand.len() == before {
                break;
            }
        }
        for &q in &local {
            if !cand.contains(&q) {
                delta[q] = T::N;
                part[q] = T::N;
            }
        }

        let kind = |i: &Inst| th.rules[i.rule].kind;
        let sup = |a: usize, b: usize| th.sup.contains(&(a, b));
        let related = |a: usize, b: usize| sup(a, b) || sup(b, a);
        // Conflicts of each local literal: (literal, declared).
        let conflicts = |q: usize| -> Vec<(usize, bool)> {
            let (neg, p, ref c) = base[q];
            let comp = id[&(!neg, p, c.clone())];
            let mut out = vec![(comp, false)];
            for (s, o) in &th.conflicts {
                for (x, y) in [(s, o), (o, s)] {
                    for other in 0..n {
                        if other == q || other == comp {
                            continue;
                        }
                        if unify_pair(x, &base[q], y, &base[other]) && !out.contains(&(other, true)) {
                            out.push((other, true));
                        }
                    }
                }
            }
            out
        };
        let conf: BTreeMap<usize, Vec<(usize, bool)>> = local.iter().map(|&q| (q, conflicts(q))).collect();

        // Definite tags.
        loop {
            let mut next = delta.clone();
            for &q in &local {
                if delta[q] != T::U {
                    continue;
                }
                let strict: Vec<&(Inst, bool)> = insts.iter().filter(|(i, _)| i.head == q && kind(i) == Kind::Strict).collect();
                if facts.contains(&q) || strict.iter().any(|(i, und)| !und && i.body.iter().all(|&b| delta[b] == T::P)) {
                    next[q] = T::P;
                } else if strict.iter().all(|(i, _)| i.body.iter().any(|&b| delta[b] == T::N)) {
                    next[q] = T::N;
                }
            }
            if next == delta {
                break;
            }
            delta = next;
        }

        // Defeasible tags.
        loop {
            let applicable = |i: &(Inst, bool), part: &[T]| !i.1 && i.0.body.iter().all(|&b| part[b] == T::P);
            let discarded = |i: &(Inst, bool), part: &[T]| i.0.body.iter().any(|&b| part[b] == T::N);
            let mut next = part.clone();
            for &q in &local {
                if part[q] != T::U {
                    continue;
                }
                if delta[q] == T::P {
                    next[q] = T::P;
                    continue;
                }
                let cs = &conf[&q];
                let attackers = |r: &(Inst, bool)| -> Vec<&(Inst, bool)> {
                    insts
                        .iter()
                        .filter(|s| cs.iter().any(|&(c, declared)| s.0.head == c && (!declared || related(r.0.rule, s.0.rule))))
                        .collect()
                };
                let supporting: Vec<&(Inst, bool)> =
                    insts.iter().filter(|(i, _)| i.head == q && kind(i) != Kind::Defeater).collect();
                let pos = cs.iter().all(|&(c, _)| delta[c] == T::N)
                    && supporting.iter().any(|r| {
                        applicable(r, &part)
                            && attackers(r).iter().all(|s| discarded(s, &part) || sup(r.0.rule, s.0.rule))
                    });
                if pos {
                    next[q] = T::P;
                    continue;
                }
                let definite_conflict = cs.iter().any(|&(c, _)| delta[c] == T::P);
                let neg = delta[q] == T::N
                    && supporting.iter().all(|r| {
                        discarded(r, &part)
                            || definite_conflict
                            || attackers(r).iter().any(|s| applicable(s, &part) && !sup(r.0.rule, s.0.rule))
                    });
                if neg {
                    next[q] = T::N;
                }
            }
            if next == part {
                break;
            }
            part = next;
        }
        for &q in &local {
            final_[q] = true;
        }
    }

    let mut out = ConclusionSet::default();
    for (i, (neg, p, c)) in base.iter().enumerate() {
        let l = ground_literal(*neg, *p, c);
        match delta[i] {
            T::P => {
                out.definite_pos.insert(l.clone());
            }
            T::N => {
                out.definite_neg.insert(l.clone());
            }
            T::U => {}
        }
        match part[i] {
            T::P => {
                out.defeasible_pos.insert(l);
            }
            T::N => {
                out.defeasible_neg.insert(l);
            }
            T::U => {}
        }
    }
    Ok(out)
}

/// Both ground literals match the two patterns under one assignment.
fn unify_pair(x: &GLit, qx: &(bool, usize, Vec<usize>), y: &GLit, qy: &(bool, usize, Vec<usize>)) -> bool {
    let mut s: [Option<usize>; 2] = [None, None];
    for (pat, g) in [(x, qx), (y, qy)] {
        if pat.neg != g.0 || pat.pred != g.1 || pat.args.len() != g.2.len() {
            return false;
        }
        for (a, &c) in pat.args.iter().zip(&g.2) {
            match a {
                A::C(k) if *k != c => return false,
                A::C(_) => {}
                A::V(v) => match s[*v] {
                    Some(b) if b != c => return false,
                    Some(_) => {}
                    None => s[*v] = Some(c),
                },
            }
        }
    }
    true
}

/// The engine's sets with every literal outside its universe counted as
/// refuted, over the theory's Herbrand base.
pub fn complete(th: &GTheory, got: &ConclusionSet) -> ConclusionSet {
    let mut out = got.clone();
    out.evaluated.clear();
    for (neg, p, c) in th.herbrand() {
        let l = ground_literal(neg, p, &c);
        if !got.evaluated.contains(&l) {
            out.definite_neg.insert(l.clone());
            out.defeasible_neg.insert(l);
        }
    }
    out
}

pub fn theory(seed: u64) -> GTheory {
    generate(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// Compares engine and oracle on one generated theory.
pub fn agrees(seed: u64) -> Result<(), String> {
    let th = theory(seed);
    let expected = evaluate(&th);
    let got = disarm::engine::run(&th.program(), &th.fact_literals(), None);
    match (expected, got) {
        (Err(OracleError::Unstratified), Err(EngineError::Unstratified { .. })) => Ok(()),
        (Ok(want), Ok(got)) => {
            let got = complete(&th, &got);
            if want == got {
                Ok(())
            } else {
                Err(format!("seed {seed}: {}\n{th:?}", diff(&want, &got)))
            }
        }
        (want, got) => Err(format!("seed {seed}: oracle {:?}, engine {:?}", want.err(), got.err())),
    }
}

fn diff(want: &ConclusionSet, got: &ConclusionSet) -> String {
    let show = |name: &str, w: &std::collections::BTreeSet<disarm::syntax::Literal>, g: &std::collections::BTreeSet<disarm::syntax::Literal>| {
        let text = |s: Vec<&disarm::syntax::Literal>| {
            s.into_iter()
                .map(|l| {
                    let mut t = String::new();
                    disarm::syntax::write_literal(&mut t, l);
                    t
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            "{name}: oracle only [{}] engine only [{}]",
            text(w.difference(g).collect()),
            text(g.difference(w).collect())
        )
    };
    [
        show("+D", &want.definite_pos, &got.definite_pos),
        show("-D", &want.definite_neg, &got.definite_neg),
        show("+d", &want.defeasible_pos, &got.defeasible_pos),
        show("-d", &want.defeasible_neg, &got.defeasible_neg),
    ]
    .join("; ")
}
