//! The shipped rule files. Each layer is evaluated on its own and feeds the
//! next one through facts: behavior and strategy rules produce list events,
//! list rules produce `WL`/`BL`, and the estimation layer consumes both.

use crate::syntax::{parse_program, ParseError, SourceProgram};

pub const BEHAVIOR: &str = include_str!("../corpus/behavior.dpl");
pub const GOOD_ALL_REASONS: &str = include_str!("../corpus/good_all_reasons.dpl");
pub const R8: &str = include_str!("../corpus/r8.dpl");
pub const R9: &str = include_str!("../corpus/r9.dpl");
pub const R10: &str = include_str!("../corpus/r10.dpl");
pub const R11: &str = include_str!("../corpus/r11.dpl");
pub const LISTS: &str = include_str!("../corpus/lists.dpl");
pub const EXCHANGE: &str = include_str!("../corpus/exchange.dpl");
pub const ESTIMATION: &str = include_str!("../corpus/estimation.dpl");
pub const COUNT_INTERVAL: &str = include_str!("../corpus/count_interval.dpl");
pub const COUNT_SINCE: &str = include_str!("../corpus/count_since.dpl");
pub const COUNT_WINDOW: &str = include_str!("../corpus/count_window.dpl");
pub const THEORY1: &str = include_str!("../corpus/theory1.dpl");
pub const THEORY2: &str = include_str!("../corpus/theory2.dpl");
pub const THEORY3: &str = include_str!("../corpus/theory3.dpl");
pub const ELIGIBILITY_PRINTED: &str = include_str!("../corpus/eligibility_printed.dpl");
pub const ELIGIBILITY_PAIR: &str = include_str!("../corpus/eligibility_pair.dpl");

/// Every shipped file by name.
pub const FILES: &[(&str, &str)] = &[
    ("behavior.dpl", BEHAVIOR),
    ("good_all_reasons.dpl", GOOD_ALL_REASONS),
    ("r8.dpl", R8),
    ("r9.dpl", R9),
    ("r10.dpl", R10),
    ("r11.dpl", R11),
    ("lists.dpl", LISTS),
    ("exchange.dpl", EXCHANGE),
    ("estimation.dpl", ESTIMATION),
    ("count_interval.dpl", COUNT_INTERVAL),
    ("count_since.dpl", COUNT_SINCE),
    ("count_window.dpl", COUNT_WINDOW),
    ("theory1.dpl", THEORY1),
    ("theory2.dpl", THEORY2),
    ("theory3.dpl", THEORY3),
    ("eligibility_printed.dpl", ELIGIBILITY_PRINTED),
    ("eligibility_pair.dpl", ELIGIBILITY_PAIR),
];

/// Parses and merges several rule texts into one program.
pub fn load(texts: &[&str]) -> Result<SourceProgram, ParseError> {
    texts
        .iter()
        .try_fold(SourceProgram::default(), |acc, t| acc.merge(parse_program(t)?))
}
