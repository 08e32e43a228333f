//! Hand-built scenarios over the shipped rule files, one layer at a time.
//! Each scenario panics on failure.

use std::collections::BTreeSet;

use disarm::corpus;
use disarm::engine::{ConclusionSet, Engine};
use disarm::number::Number;
use disarm::syntax::{parse_literal, Literal, Term};

fn eval(layers: &[&str], facts: &str, now: Option<i64>) -> ConclusionSet {
    let mut texts = layers.to_vec();
    texts.push(facts);
    let engine = Engine::new(corpus::load(&texts).expect("fixture parses")).expect("fixture checks");
    engine.run(&[], now.map(Number::from_int)).expect("fixture evaluates")
}

fn lit(s: &str) -> Literal {
    parse_literal(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn proves(c: &ConclusionSet, s: &str) -> bool {
    c.proves(&lit(s))
}

/// Values bound to `key` over all proven instances of `pattern`.
fn column(c: &ConclusionSet, pattern: &str, key: &str) -> BTreeSet<String> {
    c.query(&lit(pattern))
        .into_iter()
        .map(|a| match a.literal.get(key) {
            Some(Term::Const(s)) => s.to_string(),
            Some(Term::Num(n)) => n.to_string(),
            other => panic!("unexpected {key}: {other:?}"),
        })
        .collect()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

const THRESHOLDS_5: &str = "response_time_threshold(5). validity_threshold(5). completeness_threshold(5).
    correctness_threshold(5). cooperation_threshold(5). outcome_feeling_threshold(5).";

fn rating(id: &str, truster: &str, trustee: &str, t: u64, s: [f64; 6], conf: f64, tran: f64) -> String {
    format!(
        "rating(id->{id}, truster->{truster}, trustee->{trustee}, t->{t}, response_time->{}, validity->{}, \
         completeness->{}, correctness->{}, cooperation->{}, outcome_feeling->{}, confidence->{conf}, \
         transaction_value->{tran}).",
        s[0], s[1], s[2], s[3], s[4], s[5]
    )
}

fn behavior(scores: [f64; 6], layer: &str) -> ConclusionSet {
    let facts = format!("{THRESHOLDS_5}\n{}", rating("r", "A", "X", 3, scores, 0.9, 0.8));
    eval(&[layer], &facts, None)
}

fn reasons(c: &ConclusionSet, pred: &str) -> BTreeSet<String> {
    column(c, &format!("{pred}(time->3, truster->A, trustee->X, reason->?r)"), "reason")
}

const ALL_REASONS: [&str; 6] = [
    "response_time",
    "validity",
    "completeness",
    "correctness",
    "cooperation",
    "outcome_feeling",
];

pub fn good_rating_yields_one_good_event() {
    let c = behavior([6.0; 6], corpus::BEHAVIOR);
    assert_eq!(reasons(&c, "good_behavior"), set(&["response_time"]));
    assert!(reasons(&c, "bad_behavior").is_empty());
}

pub fn one_coefficient_at_threshold_is_bad_and_blocks_good() {
    let c = behavior([6.0, 6.0, 6.0, 6.0, 5.0, 6.0], corpus::BEHAVIOR);
    assert!(reasons(&c, "good_behavior").is_empty());
    assert_eq!(reasons(&c, "bad_behavior"), set(&["cooperation"]));
}

pub fn all_minimum_scores_give_six_bad_events() {
    let c = behavior([0.1; 6], corpus::BEHAVIOR);
    assert_eq!(reasons(&c, "bad_behavior"), set(&ALL_REASONS));
    assert!(reasons(&c, "good_behavior").is_empty());
}

pub fn scores_exactly_at_thresholds_are_all_bad() {
    let c = behavior([5.0; 6], corpus::BEHAVIOR);
    assert_eq!(reasons(&c, "bad_behavior"), set(&ALL_REASONS));
    assert!(reasons(&c, "good_behavior").is_empty());
}

pub fn all_reasons_variant_records_six_good_events() {
    let c = behavior([6.0; 6], corpus::GOOD_ALL_REASONS);
    assert_eq!(reasons(&c, "good_behavior"), set(&ALL_REASONS));
}

pub fn worked_example_rating_is_good() {
    let facts = format!(
        "{THRESHOLDS_5}\nrating(id->1, truster->A, trustee->X, t->140630105632, response_time->9, validity->7, \
         completeness->6, correctness->6, cooperation->8, outcome_feeling->7, confidence->0.9, transaction_value->0.8)."
    );
    let c = eval(&[corpus::BEHAVIOR], &facts, None);
    assert!(proves(
        &c,
        "good_behavior(time->140630105632, truster->A, trustee->X, reason->response_time)"
    ));
}

const BASE: &str = "~whitelist(trustee->X, time->0). ~blacklist(trustee->X, time->0).";

fn events(kind: &str, items: &[(u64, &str)]) -> String {
    items
        .iter()
        .map(|(t, r)| format!("{kind}(time->{t}, truster->A, trustee->X, reason->{r})."))
        .collect::<Vec<_>>()
        .join("\n")
}

fn strategy(wl: &str, bl: &str, evs: &str) -> ConclusionSet {
    eval(&[wl, bl, corpus::LISTS], &format!("{BASE}\n{evs}"), Some(10))
}

pub fn three_good_events_same_reason_whitelist() {
    let c = strategy(
        corpus::R8,
        corpus::R10,
        &events("good_behavior", &[(1, "validity"), (2, "validity"), (3, "validity")]),
    );
    assert!(proves(&c, "add_whitelist(trustee->X, time->3)"));
    assert!(proves(&c, "WL(trustee->X)"));
    assert!(!proves(&c, "BL(trustee->X)"));
}

pub fn two_good_events_are_not_enough() {
    let c = strategy(
        corpus::R8,
        corpus::R10,
        &events("good_behavior", &[(1, "validity"), (2, "validity")]),
    );
    assert!(column(&c, "add_whitelist(trustee->X, time->?t)", "time").is_empty());
    assert!(!proves(&c, "WL(trustee->X)"));
}

pub fn same_reason_rule_ignores_mixed_reasons_but_lenient_rule_accepts() {
    let evs = events(
        "good_behavior",
        &[(1, "validity"), (2, "cooperation"), (3, "response_time")],
    );
    let strict = strategy(corpus::R8, corpus::R10, &evs);
    assert!(!proves(&strict, "WL(trustee->X)"));
    let lenient = strategy(corpus::R9, corpus::R10, &evs);
    assert!(proves(&lenient, "add_whitelist(trustee->X, time->3)"));
    assert!(proves(&lenient, "WL(trustee->X)"));
}

pub fn good_events_at_equal_times_do_not_whitelist() {
    let c = strategy(
        corpus::R8,
        corpus::R10,
        &events("good_behavior", &[(1, "validity"), (1, "validity"), (2, "validity")]),
    );
    assert!(!proves(&c, "WL(trustee->X)"));
}

pub fn two_bad_events_same_reason_blacklist() {
    let c = strategy(
        corpus::R8,
        corpus::R10,
        &events("bad_behavior", &[(2, "correctness"), (4, "correctness")]),
    );
    assert!(proves(&c, "add_blacklist(trustee->X, time->4)"));
    assert!(proves(&c, "BL(trustee->X)"));
    assert!(!proves(&c, "WL(trustee->X)"));
}

pub fn bad_events_for_different_reasons_need_the_distinct_reason_rule() {
    let evs = events(
        "bad_behavior",
        &[(1, "correctness"), (2, "validity"), (3, "cooperation")],
    );
    let same_reason = strategy(corpus::R8, corpus::R10, &evs);
    assert!(!proves(&same_reason, "BL(trustee->X)"));
    let distinct = strategy(corpus::R8, corpus::R11, &evs);
    assert!(proves(&distinct, "add_blacklist(trustee->X, time->3)"));
    assert!(proves(&distinct, "BL(trustee->X)"));
}

pub fn distinct_reason_rule_rejects_a_repeated_reason() {
    let evs = events(
        "bad_behavior",
        &[(1, "correctness"), (2, "validity"), (3, "correctness")],
    );
    let c = strategy(corpus::R8, corpus::R11, &evs);
    assert!(!proves(&c, "BL(trustee->X)"));
}

fn lists(adds: &str) -> ConclusionSet {
    eval(&[corpus::LISTS], &format!("{BASE}\n{adds}"), None)
}

pub fn whitelist_addition_sets_current_lists() {
    let c = lists("add_whitelist(trustee->X, time->3).");
    assert!(proves(&c, "whitelist(trustee->X, time->3)"));
    assert!(proves(&c, "WL(trustee->X)"));
    assert!(proves(&c, "~BL(trustee->X)"));
    assert!(!proves(&c, "BL(trustee->X)"));
}

pub fn later_blacklist_addition_retracts_whitelist() {
    let before = lists("add_whitelist(trustee->X, time->3).");
    assert!(proves(&before, "WL(trustee->X)"));
    let after = lists("add_whitelist(trustee->X, time->3). add_blacklist(trustee->X, time->5).");
    assert!(proves(&after, "~whitelist(trustee->X, time->5)"));
    assert!(!proves(&after, "WL(trustee->X)"));
    assert!(proves(&after, "BL(trustee->X)"));
}

pub fn later_whitelist_addition_retracts_blacklist() {
    let before = lists("add_blacklist(trustee->X, time->2).");
    assert!(proves(&before, "BL(trustee->X)"));
    let after = lists("add_blacklist(trustee->X, time->2). add_whitelist(trustee->X, time->6).");
    assert!(proves(&after, "~blacklist(trustee->X, time->6)"));
    assert!(!proves(&after, "BL(trustee->X)"));
    assert!(proves(&after, "~BL(trustee->X)"));
    assert!(proves(&after, "WL(trustee->X)"));
}

pub fn same_time_additions_resolve_to_blacklist() {
    let c = lists("add_whitelist(trustee->X, time->4). add_blacklist(trustee->X, time->4).");
    assert!(proves(&c, "BL(trustee->X)"));
    assert!(!proves(&c, "WL(trustee->X)"));
}

pub fn latest_addition_wins_over_a_history() {
    let c = lists(
        "add_whitelist(trustee->X, time->3). add_blacklist(trustee->X, time->5). add_whitelist(trustee->X, time->8).",
    );
    assert!(proves(&c, "WL(trustee->X)"));
    assert!(!proves(&c, "BL(trustee->X)"));
}

pub fn no_additions_means_on_neither_list() {
    let c = lists("");
    assert!(!proves(&c, "WL(trustee->X)"));
    assert!(!proves(&c, "BL(trustee->X)"));
    assert!(proves(&c, "~WL(trustee->X)"));
    assert!(proves(&c, "~BL(trustee->X)"));
}

const RATING_B_X: &str = "rating(id->b1, truster->B, trustee->X, t->3, response_time->8, validity->8, \
     completeness->8, correctness->8, cooperation->8, outcome_feeling->8, confidence->0.9, transaction_value->0.8).";

pub fn lookup_sends_one_request_per_whitelisted_agent() {
    let c = eval(
        &[corpus::EXCHANGE],
        "self(agent->A). ttl_limit(2). WL(trustee->B). WL(trustee->C). locate_ratings(about->X).",
        None,
    );
    let to = column(&c, "send_message(sender->A, receiver->?r, msg->request_rating(about->X, ttl->2))", "receiver");
    assert_eq!(to, set(&["B", "C"]));
    assert_eq!(c.query(&lit("send_message(sender->A, receiver->?r, msg->?m)")).len(), 2);
}

pub fn lookup_with_empty_whitelist_sends_nothing() {
    let c = eval(&[corpus::EXCHANGE], "self(agent->A). ttl_limit(2). locate_ratings(about->X).", None);
    assert!(c.query(&lit("send_message(sender->A, receiver->?r, msg->?m)")).is_empty());
}

fn responder(ttl: u32, extra: &str) -> ConclusionSet {
    let facts = format!(
        "self(agent->B). WL(trustee->D). {RATING_B_X}
         receive_message(sender->A, receiver->B, msg->request_rating(about->X, ttl->{ttl})). {extra}"
    );
    eval(&[corpus::EXCHANGE], &facts, None)
}

const ANSWER: &str = "send_message(sender->B, receiver->A, msg->rating(id->b1, truster->B, trustee->X, t->3, \
     response_time->8, validity->8, completeness->8, correctness->8, cooperation->8, outcome_feeling->8, \
     confidence->0.9, transaction_value->0.8))";

pub fn request_is_answered_and_forwarded_with_lower_ttl() {
    let c = responder(2, "");
    assert!(proves(&c, ANSWER));
    assert!(proves(&c, "send_message(sender->B, receiver->D, msg->request_rating(about->X, ttl->1))"));
}

pub fn zero_ttl_request_is_answered_but_not_forwarded() {
    let c = responder(0, "");
    assert!(proves(&c, ANSWER));
    assert!(c
        .query(&lit("send_message(sender->B, receiver->D, msg->?m)"))
        .is_empty());
}

pub fn defeater_blocks_answers_to_blacklisted_requesters() {
    let c = responder(2, "BL(trustee->A).");
    assert!(!proves(&c, ANSWER));
    // A defeater only blocks; it never establishes the negation.
    assert!(!proves(&c, &format!("~{ANSWER}")));
    assert!(proves(&c, "send_message(sender->B, receiver->D, msg->request_rating(about->X, ttl->1))"));
}

const RECEIVED: &str = "receive_message(sender->B, receiver->A, msg->rating(id->c1, truster->C, trustee->X, t->4, \
     response_time->2, validity->2, completeness->2, correctness->2, cooperation->2, outcome_feeling->2, \
     confidence->0.9, transaction_value->0.8)).";

const STORED: &str = "rating(id->c1, truster->C, trustee->X, t->4, response_time->2, validity->2, completeness->2, \
     correctness->2, cooperation->2, outcome_feeling->2, confidence->0.9, transaction_value->0.8)";

pub fn received_rating_is_stored_with_its_original_truster() {
    let c = eval(&[corpus::EXCHANGE], &format!("self(agent->A). {RECEIVED}"), None);
    assert!(proves(&c, STORED));
}

pub fn rating_from_blacklisted_sender_is_not_stored() {
    let c = eval(&[corpus::EXCHANGE], &format!("self(agent->A). BL(trustee->B). {RECEIVED}"), None);
    assert!(!proves(&c, STORED));
}

const SCORES: [f64; 6] = [7.0; 6];

fn estimation(theory: &str, extra_layers: &[&str], facts: &str) -> ConclusionSet {
    let mut layers = vec![corpus::ESTIMATION, corpus::COUNT_SINCE, theory];
    layers.extend_from_slice(extra_layers);
    let base = "self(agent->A). confidence_threshold(0.7). transaction_value_threshold(0.5). time_from_threshold(1).";
    eval(&layers, &format!("{base}\n{facts}"), Some(100))
}

pub fn known_agents_are_trustees_of_own_ratings() {
    let facts = [
        rating("a1", "A", "B", 1, SCORES, 0.9, 0.8),
        rating("a2", "A", "Y", 2, SCORES, 0.9, 0.8),
        rating("a3", "A", "Y", 3, SCORES, 0.9, 0.8),
        rating("c1", "C", "Z", 1, SCORES, 0.9, 0.8),
    ]
    .join("\n");
    let c = estimation(corpus::THEORY1, &[], &facts);
    assert_eq!(column(&c, "known(agent->?x)", "agent"), set(&["B", "Y"]));
}

pub fn eligibility_by_confidence_or_transaction_value() {
    let facts = [
        rating("both", "A", "X", 1, SCORES, 0.9, 0.8),
        rating("conf", "A", "X", 2, SCORES, 0.9, 0.1),
        rating("tran", "A", "X", 3, SCORES, 0.2, 0.6),
        rating("none", "A", "X", 4, SCORES, 0.2, 0.3),
    ]
    .join("\n");
    let c = estimation(corpus::THEORY1, &[], &facts);
    assert_eq!(
        column(&c, "eligible_rating(rating->?r, truster->A, trustee->X)", "rating"),
        set(&["both", "conf", "tran"])
    );
}

pub fn printed_eligibility_conflict_lets_the_stronger_rule_exclude_other_pairs() {
    let facts = [
        rating("ax", "A", "X", 1, SCORES, 0.9, 0.8),
        rating("by", "B", "Y", 2, SCORES, 0.9, 0.1),
    ]
    .join("\n");
    let union = estimation(corpus::THEORY1, &[], &facts);
    assert_eq!(column(&union, "eligible_rating(rating->?r)", "rating"), set(&["ax", "by"]));
    let printed = estimation(corpus::THEORY1, &[corpus::ELIGIBILITY_PRINTED], &facts);
    assert_eq!(column(&printed, "eligible_rating(rating->?r)", "rating"), set(&["ax"]));
}

pub fn pair_eligibility_conflict_only_touches_the_same_pair() {
    let facts = [
        rating("x1", "A", "X", 1, SCORES, 0.9, 0.8),
        rating("x2", "A", "X", 2, SCORES, 0.9, 0.1),
        rating("y1", "A", "Y", 3, SCORES, 0.9, 0.1),
    ]
    .join("\n");
    let c = estimation(corpus::THEORY1, &[corpus::ELIGIBILITY_PAIR], &facts);
    assert_eq!(column(&c, "eligible_rating(rating->?r)", "rating"), set(&["x1", "y1"]));
}

pub fn interval_filter_keeps_inclusive_bounds() {
    let facts = [5, 10, 20, 25]
        .iter()
        .map(|t| rating(&format!("t{t}"), "A", "X", *t, SCORES, 0.9, 0.8))
        .collect::<Vec<_>>()
        .join("\n");
    let c = eval(
        &[corpus::COUNT_INTERVAL],
        &format!("time_from_threshold(10). time_to_threshold(20).\n{facts}"),
        None,
    );
    assert_eq!(column(&c, "count_rating(rating->?r)", "rating"), set(&["t10", "t20"]));
}

pub fn window_filter_counts_back_from_now() {
    let facts = [139, 140, 150]
        .iter()
        .map(|t| rating(&format!("t{t}"), "A", "X", *t, SCORES, 0.9, 0.8))
        .collect::<Vec<_>>()
        .join("\n");
    let c = eval(&[corpus::COUNT_WINDOW], &format!("time_window(10).\n{facts}"), Some(150));
    assert_eq!(column(&c, "count_rating(rating->?r)", "rating"), set(&["t140", "t150"]));
}

pub fn since_filter_from_one_keeps_everything() {
    let facts = [1, 2, 300]
        .iter()
        .map(|t| rating(&format!("t{t}"), "A", "X", *t, SCORES, 0.9, 0.8))
        .collect::<Vec<_>>()
        .join("\n");
    let c = eval(&[corpus::COUNT_SINCE], &format!("time_from_threshold(1).\n{facts}"), None);
    assert_eq!(column(&c, "count_rating(rating->?r)", "rating"), set(&["t1", "t2", "t300"]));
}

/// A is the estimating agent. B is known and whitelisted, C known and
/// unlisted, E known and blacklisted, D a stranger.
fn market(include: &[&str]) -> String {
    let mut facts = vec![
        "WL(trustee->B). BL(trustee->E).".to_string(),
        rating("ab", "A", "B", 1, SCORES, 0.9, 0.8),
        rating("ac", "A", "C", 1, SCORES, 0.9, 0.8),
        rating("ae", "A", "E", 1, SCORES, 0.9, 0.8),
    ];
    for who in include {
        facts.push(rating(&format!("{}x", who.to_lowercase()), who, "X", 5, SCORES, 0.9, 0.8));
    }
    facts.join("\n")
}

fn participants(c: &ConclusionSet) -> BTreeSet<String> {
    column(c, "participate(trustee->X, rating->?r)", "rating")
}

pub fn ratings_fall_into_the_four_source_categories() {
    let c = estimation(corpus::THEORY1, &[], &market(&["A", "B", "C", "D", "E"]));
    assert_eq!(column(&c, "count_pr(trustee->X, rating->?r)", "rating"), set(&["ax"]));
    assert_eq!(column(&c, "count_wr(trustee->X, rating->?r)", "rating"), set(&["bx"]));
    assert_eq!(column(&c, "count_kr(trustee->X, rating->?r)", "rating"), set(&["cx"]));
    assert_eq!(column(&c, "count_sr(trustee->X, rating->?r)", "rating"), set(&["dx"]));
}

pub fn first_theory_counts_every_category_but_ignores_blacklisted() {
    let c = estimation(corpus::THEORY1, &[], &market(&["A", "B", "C", "D", "E"]));
    assert_eq!(participants(&c), set(&["ax", "bx", "cx", "dx"]));
}

pub fn second_theory_returns_exactly_the_personal_ratings() {
    let mut facts = market(&["A", "B", "C", "D"]);
    facts.push_str(&rating("ax2", "A", "X", 7, SCORES, 0.9, 0.8));
    let c = estimation(corpus::THEORY2, &[], &facts);
    assert_eq!(participants(&c), set(&["ax", "ax2"]));
}

pub fn second_theory_falls_through_to_known_sources() {
    let c = estimation(corpus::THEORY2, &[], &market(&["C", "D"]));
    assert_eq!(participants(&c), set(&["cx"]));
}

pub fn third_theory_groups_personal_and_whitelisted_sources() {
    let c = estimation(corpus::THEORY3, &[], &market(&["A", "B", "C", "D"]));
    assert_eq!(participants(&c), set(&["ax", "bx"]));
    let c = estimation(corpus::THEORY3, &[], &market(&["B", "C", "D"]));
    assert_eq!(participants(&c), set(&["bx"]));
}

pub fn third_theory_uses_strangers_only_as_last_resort() {
    let c = estimation(corpus::THEORY3, &[], &market(&["D", "E"]));
    assert_eq!(participants(&c), set(&["dx"]));
}

pub fn no_ratings_about_the_trustee_means_no_participants() {
    for theory in [corpus::THEORY1, corpus::THEORY2, corpus::THEORY3] {
        let c = estimation(theory, &[], &market(&[]));
        assert!(participants(&c).is_empty());
    }
}

/// Lists the scenarios as `ALL` and, under the test harness, wraps each in a
/// `#[test]`.
macro_rules! scenarios {
    ($($name:ident),* $(,)?) => {
        #[allow(dead_code)]
        pub const ALL: &[(&str, fn())] = &[$((stringify!($name), $name)),*];

        #[cfg(test)]
        mod harness {
            $(#[test]
            fn $name() {
                super::$name()
            })*
        }
    };
}

scenarios!(
    good_rating_yields_one_good_event,
    one_coefficient_at_threshold_is_bad_and_blocks_good,
    all_minimum_scores_give_six_bad_events,
    scores_exactly_at_thresholds_are_all_bad,
    all_reasons_variant_records_six_good_events,
    worked_example_rating_is_good,
    three_good_events_same_reason_whitelist,
    two_good_events_are_not_enough,
    same_reason_rule_ignores_mixed_reasons_but_lenient_rule_accepts,
    good_events_at_equal_times_do_not_whitelist,
    two_bad_events_same_reason_blacklist,
    bad_events_for_different_reasons_need_the_distinct_reason_rule,
    distinct_reason_rule_rejects_a_repeated_reason,
    whitelist_addition_sets_current_lists,
    later_blacklist_addition_retracts_whitelist,
    later_whitelist_addition_retracts_blacklist,
    same_time_additions_resolve_to_blacklist,
    latest_addition_wins_over_a_history,
    no_additions_means_on_neither_list,
    lookup_sends_one_request_per_whitelisted_agent,
    lookup_with_empty_whitelist_sends_nothing,
    request_is_answered_and_forwarded_with_lower_ttl,
    zero_ttl_request_is_answered_but_not_forwarded,
    defeater_blocks_answers_to_blacklisted_requesters,
    received_rating_is_stored_with_its_original_truster,
    rating_from_blacklisted_sender_is_not_stored,
    known_agents_are_trustees_of_own_ratings,
    eligibility_by_confidence_or_transaction_value,
    printed_eligibility_conflict_lets_the_stronger_rule_exclude_other_pairs,
    pair_eligibility_conflict_only_touches_the_same_pair,
    interval_filter_keeps_inclusive_bounds,
    window_filter_counts_back_from_now,
    since_filter_from_one_keeps_everything,
    ratings_fall_into_the_four_source_categories,
    first_theory_counts_every_category_but_ignores_blacklisted,
    second_theory_returns_exactly_the_personal_ratings,
    second_theory_falls_through_to_known_sources,
    third_theory_groups_personal_and_whitelisted_sources,
    third_theory_uses_strangers_only_as_last_resort,
    no_ratings_about_the_trustee_means_no_participants,
);
