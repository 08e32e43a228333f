//! Parses a rule file (or the shipped corpus), prints it back in canonical
//! form and checks that the printed text parses to the same program.

use disarm::corpus;
use disarm::syntax::{parse_program, serialize_program};

fn main() -> anyhow::Result<()> {
    let program = match std::env::args().nth(1) {
        Some(path) => parse_program(&std::fs::read_to_string(&path)?)?,
        None => corpus::load(&[corpus::BEHAVIOR, corpus::R8, corpus::R10, corpus::LISTS])?,
    };
    let text = serialize_program(&program);
    print!("{text}");
    let again = parse_program(&text)?;
    anyhow::ensure!(again == program, "round trip changed the program");
    eprintln!(
        "{} rules, {} facts, {} superiority pairs, round trip ok",
        program.rules.len(),
        program.facts.len(),
        program.superiorities.len()
    );
    Ok(())
}
