//! Desk-scale marketplace run: prints mean utility gain per policy and
//! writes the CSVs to a directory given as the first argument.

use std::path::PathBuf;

use disarm::testbed::{run_simulation, SimConfig};

fn main() -> anyhow::Result<()> {
    let seed = std::env::args().nth(2).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let config = SimConfig { seed, ..SimConfig::default() };
    let started = std::time::Instant::now();
    let outcome = run_simulation(&config)?;
    print!("{}", outcome.summary());
    let last = outcome.rounds.last().expect("at least one round");
    println!("final stored max={} centralized={}", last.stored.values().max().unwrap_or(&0), last.centralized);
    println!("elapsed {:.2?}", started.elapsed());
    if let Some(dir) = std::env::args().nth(1) {
        outcome.write_csvs(&PathBuf::from(dir))?;
    }
    Ok(())
}
