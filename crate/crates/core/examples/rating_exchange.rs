//! A request for ratings travels along white-list edges of a small network
//! and the answers come back along the reverse path.

use disarm::exchange::SimNetwork;
use disarm::reputation::{AgentTrustState, Provenance, Rating, Strategy, Thresholds};

fn agent(id: &str, wl: &[&str], opinion: Option<f64>) -> anyhow::Result<AgentTrustState> {
    let mut s = AgentTrustState::new(id, Thresholds::default(), Strategy::default());
    for w in wl {
        s.seed_whitelist(*w, 1);
    }
    if let Some(score) = opinion {
        let r = Rating {
            id: format!("{id}_on_P").as_str().into(),
            truster: id.into(),
            trustee: "P".into(),
            t: 1,
            scores: [score; 6],
            confidence: 0.9,
            transaction_value: 0.8,
        };
        s.record_rating(r, Provenance::Own)?;
    }
    s.update_lists(1)?;
    Ok(s)
}

fn main() -> anyhow::Result<()> {
    let ttl: u32 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let mut net = SimNetwork::new().with_trace();
    net.add_peer(agent("A", &["B", "C"], None)?);
    net.add_peer(agent("B", &["D"], Some(7.5))?);
    net.add_peer(agent("C", &["D", "E"], None)?);
    net.add_peer(agent("D", &["E"], Some(3.0))?);
    net.add_peer(agent("E", &[], Some(9.0))?);

    let id = net.initiate(&"A".into(), &"P".into(), ttl).expect("A is in the network");
    let ratings = net.collect(&"A".into(), &id, 20)?;
    println!("tick kind sender receiver about ttl");
    for e in net.trace() {
        println!("{e}");
    }
    println!("\nttl={ttl}: {} ratings reached A, {} messages", ratings.len(), net.delivered());
    let a = net.peer(&"A".into()).unwrap();
    for s in a.state.ratings() {
        if let Provenance::Received { chain } = &s.provenance {
            let via: Vec<&str> = chain.iter().map(|x| x.as_str()).collect();
            println!("  {} by {} via {}", s.rating.id, s.rating.truster, via.join(" <- "));
        }
    }
    Ok(())
}
