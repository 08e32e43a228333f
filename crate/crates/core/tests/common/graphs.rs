//! Agents on random trust graphs and a breadth-first oracle for request
//! propagation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use disarm::exchange::SimNetwork;
use disarm::reputation::{AgentTrustState, Provenance, Rating, Strategy, Thresholds};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rating(id: &str, truster: &str, about: &str) -> Rating {
    Rating {
        id: id.into(),
        truster: truster.into(),
        trustee: about.into(),
        t: 3,
        scores: [7.0; 6],
        confidence: 0.9,
        transaction_value: 0.8,
    }
}

/// An agent with the given lists and `holds` own ratings about P.
pub fn agent(id: &str, wl: &[&str], bl: &[&str], holds: usize) -> AgentTrustState {
    let mut s = AgentTrustState::new(id, Thresholds::default(), Strategy::default());
    for w in wl {
        s.seed_whitelist(*w, 1);
    }
    for b in bl {
        for t in 1..=2 {
            let mut r = rating(&format!("{id}_{b}_{t}"), id, b);
            r.t = t;
            r.scores = [1.0; 6];
            s.record_rating(r, Provenance::Own).unwrap();
        }
    }
    for k in 0..holds {
        s.record_rating(rating(&format!("{id}_p{k}"), id, "P"), Provenance::Own).unwrap();
    }
    s.update_lists(2).unwrap();
    assert_eq!(s.wl().len(), wl.len(), "{id} WL");
    assert_eq!(s.bl().len(), bl.len(), "{id} BL");
    s
}

pub struct Graph {
    pub n: usize,
    pub wl: Vec<BTreeSet<usize>>,
    pub bl: Vec<BTreeSet<usize>>,
    pub holds: Vec<usize>,
}

pub fn name(i: usize) -> String {
    format!("n{i:02}")
}

pub fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.gen_range(2..=30);
    let degree = rng.gen_range(1..=4.min(n - 1));
    let mut wl = vec![BTreeSet::new(); n];
    let mut bl = vec![BTreeSet::new(); n];
    for i in 0..n {
        for _ in 0..rng.gen_range(0..=degree) {
            let j = rng.gen_range(0..n);
            if j != i {
                wl[i].insert(j);
            }
        }
        if rng.gen_bool(0.3) {
            let j = rng.gen_range(0..n);
            if j != i && !wl[i].contains(&j) {
                bl[i].insert(j);
            }
        }
    }
    let holds = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { 0 }).collect();
    Graph { n, wl, bl, holds }
}

pub fn network(g: &Graph) -> SimNetwork {
    let mut net = SimNetwork::new().with_trace();
    for i in 0..g.n {
        let wl: Vec<String> = g.wl[i].iter().map(|&j| name(j)).collect();
        let bl: Vec<String> = g.bl[i].iter().map(|&j| name(j)).collect();
        let wl: Vec<&str> = wl.iter().map(String::as_str).collect();
        let bl: Vec<&str> = bl.iter().map(String::as_str).collect();
        net.add_peer(agent(&name(i), &wl, &bl, g.holds[i]));
    }
    net
}

/// Breadth-first search over accepting edges: `j` takes a request from `i`
/// when `j` is on `i`'s white-list and `i` is not on `j`'s black-list. Only
/// agents within `ttl` hops pass the request on.
pub fn reachable(g: &Graph, origin: usize, ttl: u32) -> BTreeMap<usize, u32> {
    let mut depth = BTreeMap::new();
    let mut queue = VecDeque::from([(origin, 0u32)]);
    let mut seen = BTreeSet::from([origin]);
    while let Some((i, d)) = queue.pop_front() {
        if d > ttl {
            continue;
        }
        for &j in &g.wl[i] {
            if !seen.contains(&j) && !g.bl[j].contains(&i) {
                seen.insert(j);
                depth.insert(j, d + 1);
                queue.push_back((j, d + 1));
            }
        }
    }
    depth
}
