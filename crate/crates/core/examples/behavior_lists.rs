//! One agent rates two providers over a few rounds and its white-list and
//! black-list follow the ratings, including a retraction.

use disarm::reputation::{AgentTrustState, Provenance, Rating, Strategy, Thresholds};

fn rating(n: u64, trustee: &str, score: f64) -> Rating {
    Rating {
        id: format!("a{n}").as_str().into(),
        truster: "A".into(),
        trustee: trustee.into(),
        t: n,
        scores: [score; 6],
        confidence: 0.9,
        transaction_value: 0.8,
    }
}

fn main() -> anyhow::Result<()> {
    let mut agent = AgentTrustState::new("A", Thresholds::uniform(5.0), Strategy::default());
    let history = [("X", 8.0), ("Y", 7.0), ("X", 9.0), ("Y", 2.0), ("X", 8.5), ("Y", 1.5), ("Y", 8.0), ("Y", 8.0), ("Y", 9.0)];
    for (n, (trustee, score)) in history.into_iter().enumerate() {
        let n = n as u64 + 1;
        let r = rating(n, trustee, score);
        let events = agent.classify_behavior(&r)?;
        agent.record_rating(r, Provenance::Own)?;
        let lists = agent.update_lists(n)?;
        let verdicts: Vec<String> = events
            .iter()
            .map(|e| format!("{}:{}", if e.good { "good" } else { "bad" }, e.reason))
            .collect();
        println!(
            "t={n} {trustee} {score:>4} [{}] WL={:?} BL={:?}",
            verdicts.join(" "),
            lists.wl.iter().map(|a| a.as_str()).collect::<Vec<_>>(),
            lists.bl.iter().map(|a| a.as_str()).collect::<Vec<_>>()
        );
    }
    println!("\nstate as facts:\n{}", agent.snapshot());
    Ok(())
}
