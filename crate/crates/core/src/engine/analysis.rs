//! Static checks: superiority acyclicity, range restriction, stratification.

use std::collections::{BTreeSet, HashMap};

use super::EngineError;
use crate::syntax::{BodyElement, Guard, Rule, SourceProgram, Symbol};

/// Returns one superiority cycle, if any, as a list of rule ids with the
/// first id repeated at the end.
pub fn superiority_cycle(rule_count: usize, pairs: &[(usize, usize)], ids: &[Symbol]) -> Option<Vec<String>> {
    let mut adj = vec![Vec::new(); rule_count];
    for &(a, b) in pairs {
        adj[a].push(b);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; rule_count];
    let mut stack = Vec::new();

    fn dfs(
        v: usize,
        adj: &[Vec<usize>],
        state: &mut [u8],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        state[v] = 1;
        stack.push(v);
        for &w in &adj[v] {
            if state[w] == 1 {
                let start = stack.iter().position(|&x| x == w).unwrap();
                let mut cycle = stack[start..].to_vec();
                cycle.push(w);
                return Some(cycle);
            }
            if state[w] == 0 {
                if let Some(c) = dfs(w, adj, state, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        state[v] = 2;
        None
    }

    (0..rule_count).find_map(|v| {
        if state[v] != 0 {
            return None;
        }
        dfs(v, &adj, &mut state, &mut stack).map(|c| c.into_iter().map(|i| ids[i].to_string()).collect())
    })
}

/// Variables bound by positive literals and by `is` chains.
pub fn bound_vars(rule: &Rule) -> BTreeSet<Symbol> {
    let mut bound = BTreeSet::new();
    for l in rule.positive_literals() {
        bound.extend(l.vars());
    }
    loop {
        let mut grew = false;
        for e in &rule.body {
            if let BodyElement::Guard(g @ Guard::Is(v, _)) = e {
                if !bound.contains(v) && g.input_vars().is_subset(&bound) {
                    bound.insert(v.clone());
                    grew = true;
                }
            }
        }
        if !grew {
            return bound;
        }
    }
}

pub fn check_rule_safety(rule: &Rule) -> Result<(), EngineError> {
    let bound = bound_vars(rule);
    let unsafe_var = |var: &Symbol| EngineError::UnsafeVariable {
        rule: rule.id.to_string(),
        var: var.to_string(),
    };
    if let Some(v) = rule.head.vars().difference(&bound).next() {
        return Err(EngineError::NotRangeRestricted {
            rule: rule.id.to_string(),
            var: v.to_string(),
        });
    }
    for e in &rule.body {
        match e {
            BodyElement::Literal(_) => {}
            BodyElement::Guard(g) => {
                if let Some(v) = g.input_vars().difference(&bound).next() {
                    return Err(unsafe_var(v));
                }
            }
            BodyElement::Naf(l, guards) => {
                let mut scope = bound.clone();
                scope.extend(l.vars());
                for g in guards {
                    if let Guard::Is(..) = g {
                        return Err(EngineError::IsInsideNaf { rule: rule.id.to_string() });
                    }
                    if let Some(v) = g.vars().difference(&scope).next() {
                        return Err(unsafe_var(v));
                    }
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Stratum {
    pub predicates: BTreeSet<Symbol>,
    /// Rules (by index) whose head predicate lies in this stratum.
    pub rules: Vec<usize>,
    /// Some rule body depends positively on a predicate of the same stratum.
    pub recursive: bool,
}

/// Groups predicates into strongly connected components of the dependency
/// graph and orders them so that every component comes after the ones it
/// depends on. Conflict declarations tie their predicates into one component.
/// A negation-as-failure edge inside a component is rejected.
pub fn stratify(p: &SourceProgram) -> Result<Vec<Stratum>, EngineError> {
    let preds: Vec<Symbol> = crate::syntax::predicates(p).into_iter().collect();
    let index: HashMap<&Symbol, usize> = preds.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let n = preds.len();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut negative: Vec<(usize, usize)> = Vec::new();

    for r in &p.rules {
        let h = index[&r.head.predicate];
        for e in &r.body {
            match e {
                BodyElement::Literal(l) => {
                    adj[h].insert(index[&l.predicate]);
                }
                BodyElement::Naf(l, _) => {
                    let b = index[&l.predicate];
                    adj[h].insert(b);
                    negative.push((h, b));
                }
                BodyElement::Guard(_) => {}
            }
        }
    }
    for c in &p.conflict_decls {
        let s = index[&c.scope.predicate];
        for l in &c.conflicts_with {
            let o = index[&l.predicate];
            adj[s].insert(o);
            adj[o].insert(s);
        }
    }

    let comps = tarjan(&adj);
    let mut comp_of = vec![0usize; n];
    for (ci, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = ci;
        }
    }
    for &(h, b) in &negative {
        if comp_of[h] == comp_of[b] {
            let mut names: Vec<String> = comps[comp_of[h]].iter().map(|&v| preds[v].to_string()).collect();
            names.sort();
            return Err(EngineError::Unstratified { predicates: names });
        }
    }

    let mut strata: Vec<Stratum> = comps
        .iter()
        .map(|comp| Stratum {
            predicates: comp.iter().map(|&v| preds[v].clone()).collect(),
            rules: Vec::new(),
            recursive: false,
        })
        .collect();
    for (ri, r) in p.rules.iter().enumerate() {
        let ci = comp_of[index[&r.head.predicate]];
        strata[ci].rules.push(ri);
        if r.positive_literals().any(|l| comp_of[index[&l.predicate]] == ci) {
            strata[ci].recursive = true;
        }
    }
    Ok(strata)
}

/// Tarjan's algorithm. Components come out in reverse topological order of
/// the edge direction, i.e. dependencies first.
fn tarjan(adj: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    struct St<'a> {
        adj: &'a [BTreeSet<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }

    fn visit(s: &mut St, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        let succ: Vec<usize> = s.adj[v].iter().copied().collect();
        for w in succ {
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().unwrap();
                s.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            s.out.push(comp);
        }
    }

    let n = adj.len();
    let mut s = St {
        adj,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}
