//! Estimates one provider's reputation from a mixed pool of ratings under
//! each participation theory.

use std::collections::BTreeSet;

use disarm::estimator::{estimate, participants, EstimationConfig, SourceView, Theory, TimeFilter};
use disarm::reputation::{Rating, Thresholds};

fn rating(id: &str, truster: &str, t: u64, score: f64) -> Rating {
    Rating {
        id: id.into(),
        truster: truster.into(),
        trustee: "P".into(),
        t,
        scores: [score; 6],
        confidence: 0.9,
        transaction_value: 0.8,
    }
}

fn main() -> anyhow::Result<()> {
    // Self is A. B is known and white-listed, C is known, D is a stranger,
    // E is black-listed.
    let view = SourceView {
        self_id: "A".into(),
        known: BTreeSet::from(["B".into(), "C".into()]),
        wl: BTreeSet::from(["B".into()]),
        bl: BTreeSet::from(["E".into()]),
    };
    let pool = vec![
        rating("a1", "A", 3, 8.0),
        rating("b1", "B", 5, 7.0),
        rating("c1", "C", 6, 4.0),
        rating("d1", "D", 7, 9.5),
        rating("e1", "E", 8, 0.5),
    ];
    let thresholds = Thresholds::default();
    for theory in [Theory::T1, Theory::T2, Theory::T3] {
        for filter in [TimeFilter::Since { from: 1 }, TimeFilter::Window { width: 3 }] {
            let config = EstimationConfig { theory: theory.clone(), time_filter: filter, ..Default::default() };
            let part = participants(&view, &pool, &thresholds, &config, 8);
            match estimate(&"P".into(), &part, &config) {
                Ok(report) => println!("{}", report.line(&theory, &filter)),
                Err(e) => println!("P {e} theory={} filter={}", theory.id(), filter.id()),
            }
        }
    }
    Ok(())
}
