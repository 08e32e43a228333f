//! Small theories showing superiority, defeaters and negation as failure.

use disarm::engine::Engine;
use disarm::syntax::{parse_literal, parse_program};

fn show(title: &str, theory: &str, goals: &[&str]) -> anyhow::Result<()> {
    let engine = Engine::new(parse_program(theory)?)?;
    let out = engine.run(&[], None)?;
    println!("{title}");
    for g in goals {
        let l = parse_literal(g)?;
        let verdict = if out.definite_pos.contains(&l) {
            "+D"
        } else if out.proves(&l) {
            "+d"
        } else if out.refutes(&l) {
            "-d"
        } else {
            "undecided"
        };
        println!("  {g:<12} {verdict}");
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    show(
        "birds fly, penguins do not, and the penguin rule is stronger:",
        "bird(tweety). penguin(tweety). bird(polly).
         r1: fly(?x) := bird(?x).
         r2: ~fly(?x) := penguin(?x).
         r2 > r1.",
        &["fly(polly)", "fly(tweety)", "~fly(tweety)"],
    )?;
    show(
        "no priority between the two rules, so neither side wins:",
        "q. r. r1: p := q. r2: ~p := r.",
        &["p", "~p"],
    )?;
    show(
        "a defeater blocks without concluding anything:",
        "q. r. r1: p := q. r2: ~p :~ r.",
        &["p", "~p"],
    )?;
    show(
        "negation as failure over an unprovable literal:",
        "q. r1: p := q, not(s). r2: t := not(p).",
        &["p", "s", "t"],
    )?;
    Ok(())
}
