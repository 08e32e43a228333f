//! One agent's trust state: its rating repository, behavior classification
//! and white/black list maintenance through the rule corpus.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::corpus;
use crate::engine::{Engine, EngineError};
use crate::estimator::{EstimationConfig, SourceView};
use crate::number::Number;
use crate::syntax::{write_literal, Literal, ParseError, Symbol, Term};

pub type AgentId = Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coefficient {
    ResponseTime,
    Validity,
    Completeness,
    Correctness,
    Cooperation,
    OutcomeFeeling,
}

impl Coefficient {
    pub const ALL: [Coefficient; 6] = [
        Coefficient::ResponseTime,
        Coefficient::Validity,
        Coefficient::Completeness,
        Coefficient::Correctness,
        Coefficient::Cooperation,
        Coefficient::OutcomeFeeling,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Coefficient::ResponseTime => "response_time",
            Coefficient::Validity => "validity",
            Coefficient::Completeness => "completeness",
            Coefficient::Correctness => "correctness",
            Coefficient::Cooperation => "cooperation",
            Coefficient::OutcomeFeeling => "outcome_feeling",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RatingError {
    #[error("rating {id}: {field} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        id: Symbol,
        field: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("rating {0}: timestamp must be at least 1")]
    ZeroTime(Symbol),
    #[error("rating {0}: truster and trustee are the same agent")]
    SelfRating(Symbol),
    #[error("rating id {0} is already stored with a different payload")]
    IdCollision(Symbol),
    #[error("not a rating literal: {0}")]
    BadLiteral(String),
}

/// An evaluation of one interaction, from the truster's point of view.
#[derive(Debug, Clone, PartialEq)]
pub struct Rating {
    pub id: Symbol,
    pub truster: AgentId,
    pub trustee: AgentId,
    pub t: u64,
    /// Indexed by [`Coefficient::index`].
    pub scores: [f64; 6],
    pub confidence: f64,
    pub transaction_value: f64,
}

impl Rating {
    pub fn score(&self, c: Coefficient) -> f64 {
        self.scores[c.index()]
    }

    pub fn validate(&self) -> Result<(), RatingError> {
        let range = |field, value: f64, lo, hi| {
            if (lo..=hi).contains(&value) {
                Ok(())
            } else {
                Err(RatingError::OutOfRange { id: self.id.clone(), field, value, lo, hi })
            }
        };
        for c in Coefficient::ALL {
            range(c.name(), self.score(c), 0.1, 10.0)?;
        }
        range("confidence", self.confidence, 0.0, 1.0)?;
        range("transaction_value", self.transaction_value, 0.0, 1.0)?;
        if self.t < 1 {
            return Err(RatingError::ZeroTime(self.id.clone()));
        }
        if self.truster == self.trustee {
            return Err(RatingError::SelfRating(self.id.clone()));
        }
        Ok(())
    }

    pub fn to_literal(&self) -> Literal {
        let num = |v: f64| Term::Num(Number::from_f64(v).expect("validated scores are finite"));
        let mut l = Literal::new("rating")
            .arg("id", id_term(&self.id))
            .arg("truster", Term::Const(self.truster.clone()))
            .arg("trustee", Term::Const(self.trustee.clone()))
            .arg("t", Term::Num(Number::from_int(self.t as i64)));
        for c in Coefficient::ALL {
            l = l.arg(c.name(), num(self.score(c)));
        }
        l.arg("confidence", num(self.confidence))
            .arg("transaction_value", num(self.transaction_value))
    }

    pub fn from_literal(l: &Literal) -> Result<Rating, RatingError> {
        let bad = || {
            let mut s = String::new();
            write_literal(&mut s, l);
            RatingError::BadLiteral(s)
        };
        if l.negated || l.predicate.as_str() != "rating" || l.args.len() != 12 {
            return Err(bad());
        }
        let sym = |k: &str| match l.get(k) {
            Some(Term::Const(s)) => Ok(s.clone()),
            Some(Term::Num(n)) => Ok(Symbol::new(&n.to_string())),
            _ => Err(bad()),
        };
        let num = |k: &str| l.get(k).and_then(Term::as_number).map(Number::to_f64).ok_or_else(bad);
        let mut scores = [0.0; 6];
        for c in Coefficient::ALL {
            scores[c.index()] = num(c.name())?;
        }
        let t = l
            .get("t")
            .and_then(Term::as_number)
            .and_then(Number::as_integer)
            .and_then(|v| u64::try_from(v).ok())
            .ok_or_else(bad)?;
        Ok(Rating {
            id: sym("id")?,
            truster: sym("truster")?,
            trustee: sym("trustee")?,
            t,
            scores,
            confidence: num("confidence")?,
            transaction_value: num("transaction_value")?,
        })
    }
}

/// Integer-looking ids print as numbers so that `id->1` round-trips.
fn id_term(id: &Symbol) -> Term {
    match id.as_str().parse::<i64>() {
        Ok(n) if n.to_string() == id.as_str() => Term::num(n),
        _ => Term::Const(id.clone()),
    }
}

/// Lowest accepted value per coefficient, plus the eligibility thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    pub scores: [f64; 6],
    pub confidence: f64,
    pub transaction_value: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            scores: [5.0; 6],
            confidence: 0.7,
            transaction_value: 0.5,
        }
    }
}

impl Thresholds {
    pub fn uniform(score: f64) -> Self {
        Thresholds { scores: [score; 6], ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), RatingError> {
        Rating {
            id: "thresholds".into(),
            truster: "a".into(),
            trustee: "b".into(),
            t: 1,
            scores: self.scores,
            confidence: self.confidence,
            transaction_value: self.transaction_value,
        }
        .validate()
    }

    fn fact(pred: &str, v: f64) -> Literal {
        Literal::new(pred).pos(Term::Num(Number::from_f64(v).expect("finite threshold")))
    }

    /// `response_time_threshold(5)` and the other five.
    pub fn behavior_facts(&self) -> Vec<Literal> {
        Coefficient::ALL
            .iter()
            .map(|c| Self::fact(&format!("{}_threshold", c.name()), self.scores[c.index()]))
            .collect()
    }

    /// `confidence_threshold(..)` and `transaction_value_threshold(..)`.
    pub fn eligibility_facts(&self) -> Vec<Literal> {
        vec![
            Self::fact("confidence_threshold", self.confidence),
            Self::fact("transaction_value_threshold", self.transaction_value),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BehaviorEvent {
    pub good: bool,
    pub time: u64,
    pub truster: AgentId,
    pub trustee: AgentId,
    pub reason: Coefficient,
}

impl BehaviorEvent {
    pub fn to_literal(&self) -> Literal {
        Literal::new(if self.good { "good_behavior" } else { "bad_behavior" })
            .arg("time", Term::Num(Number::from_int(self.time as i64)))
            .arg("truster", Term::Const(self.truster.clone()))
            .arg("trustee", Term::Const(self.trustee.clone()))
            .arg("reason", Term::constant(self.reason.name()))
    }

    fn from_literal(l: &Literal) -> Option<Self> {
        let good = match l.predicate.as_str() {
            "good_behavior" => true,
            "bad_behavior" => false,
            _ => return None,
        };
        let agent = |k| l.get(k).and_then(Term::as_const).map(Symbol::new);
        Some(BehaviorEvent {
            good,
            time: u64::try_from(l.get("time")?.as_number()?.as_integer()?).ok()?,
            truster: agent("truster")?,
            trustee: agent("trustee")?,
            reason: Coefficient::from_name(l.get("reason")?.as_const()?)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ListKind {
    AddWhitelist,
    AddBlacklist,
}

impl ListKind {
    pub fn predicate(self) -> &'static str {
        match self {
            ListKind::AddWhitelist => "add_whitelist",
            ListKind::AddBlacklist => "add_blacklist",
        }
    }
}

/// A derived list addition. `time` is the event's own time, `recorded_at`
/// the evaluation that first derived it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ListEvent {
    pub kind: ListKind,
    pub trustee: AgentId,
    pub time: u64,
    pub recorded_at: u64,
}

impl ListEvent {
    pub fn to_literal(&self) -> Literal {
        Literal::new(self.kind.predicate())
            .arg("trustee", Term::Const(self.trustee.clone()))
            .arg("time", Term::Num(Number::from_int(self.time as i64)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhitelistRule {
    /// Three good events for the same reason.
    R8,
    /// Three good events, any reasons.
    R9,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlacklistRule {
    /// Two bad events for the same reason.
    R10,
    /// Three bad events for three distinct reasons.
    R11,
}

/// Compiled behavior and list rules. Cheap to clone and share.
#[derive(Debug, Clone)]
pub struct Strategy {
    name: String,
    behavior: Arc<Engine>,
    lists: Arc<Engine>,
}

impl Strategy {
    pub fn new(wl: WhitelistRule, bl: BlacklistRule, good_all_reasons: bool) -> Result<Self, EngineError> {
        let (wl_text, wl_name) = match wl {
            WhitelistRule::R8 => (corpus::R8, "r8"),
            WhitelistRule::R9 => (corpus::R9, "r9"),
        };
        let (bl_text, bl_name) = match bl {
            BlacklistRule::R10 => (corpus::R10, "r10"),
            BlacklistRule::R11 => (corpus::R11, "r11"),
        };
        let behavior = if good_all_reasons { corpus::GOOD_ALL_REASONS } else { corpus::BEHAVIOR };
        Self::custom(
            format!("{wl_name}+{bl_name}{}", if good_all_reasons { "+all_reasons" } else { "" }),
            &[behavior],
            &[wl_text, bl_text, corpus::LISTS],
        )
    }

    /// Builds a strategy from rule texts: the behavior layer maps ratings to
    /// good/bad events, the list layer maps events to `WL`/`BL`.
    pub fn custom(name: String, behavior: &[&str], lists: &[&str]) -> Result<Self, EngineError> {
        let load = |t: &[&str]| -> Result<Engine, EngineError> {
            Engine::new(corpus::load(t).map_err(|e: ParseError| EngineError::from(e))?)
        };
        Ok(Strategy {
            name,
            behavior: Arc::new(load(behavior)?),
            lists: Arc::new(load(lists)?),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lists_engine(&self) -> &Engine {
        &self.lists
    }
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::new(WhitelistRule::R8, BlacklistRule::R10, false).expect("shipped corpus is valid")
    }
}

/// Where a stored rating came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Own,
    /// Agents the rating passed through, nearest first.
    Received { chain: Vec<AgentId> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredRating {
    pub rating: Rating,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ListDecision {
    pub wl: BTreeSet<AgentId>,
    pub bl: BTreeSet<AgentId>,
}

#[derive(Debug, Clone)]
pub struct AgentTrustState {
    self_id: AgentId,
    ratings: BTreeMap<Symbol, StoredRating>,
    by_trustee: BTreeMap<AgentId, BTreeSet<Symbol>>,
    /// Own ratings per trustee as (t, id).
    own: BTreeMap<AgentId, BTreeSet<(u64, Symbol)>>,
    thresholds: Thresholds,
    strategy: Strategy,
    /// How many recent own ratings per trustee feed behavior classification.
    memory: usize,
    list_events: Vec<ListEvent>,
    /// Latest event time per (kind, trustee).
    latest: BTreeMap<(ListKind, AgentId), u64>,
    recorded: BTreeSet<(ListKind, AgentId, u64)>,
    behavior_cache: BTreeMap<Symbol, Vec<BehaviorEvent>>,
    dirty: BTreeSet<AgentId>,
    wl: BTreeSet<AgentId>,
    bl: BTreeSet<AgentId>,
    pub estimation: EstimationConfig,
}

pub const DEFAULT_MEMORY: usize = 5;

impl AgentTrustState {
    pub fn new(self_id: impl Into<AgentId>, thresholds: Thresholds, strategy: Strategy) -> Self {
        AgentTrustState {
            self_id: self_id.into(),
            ratings: BTreeMap::new(),
            by_trustee: BTreeMap::new(),
            own: BTreeMap::new(),
            thresholds,
            strategy,
            memory: DEFAULT_MEMORY,
            list_events: Vec::new(),
            latest: BTreeMap::new(),
            recorded: BTreeSet::new(),
            behavior_cache: BTreeMap::new(),
            dirty: BTreeSet::new(),
            wl: BTreeSet::new(),
            bl: BTreeSet::new(),
            estimation: EstimationConfig::default(),
        }
    }

    pub fn with_memory(mut self, memory: usize) -> Self {
        self.memory = memory.max(1);
        self
    }

    pub fn self_id(&self) -> &AgentId {
        &self.self_id
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    /// Stores a rating. Returns false if an equal rating was already stored.
    pub fn record_rating(&mut self, rating: Rating, provenance: Provenance) -> Result<bool, RatingError> {
        rating.validate()?;
        if let Some(old) = self.ratings.get(&rating.id) {
            return if old.rating == rating { Ok(false) } else { Err(RatingError::IdCollision(rating.id)) };
        }
        self.by_trustee
            .entry(rating.trustee.clone())
            .or_default()
            .insert(rating.id.clone());
        if rating.truster == self.self_id {
            self.own
                .entry(rating.trustee.clone())
                .or_default()
                .insert((rating.t, rating.id.clone()));
            self.dirty.insert(rating.trustee.clone());
        }
        self.ratings.insert(rating.id.clone(), StoredRating { rating, provenance });
        Ok(true)
    }

    pub fn rating(&self, id: &Symbol) -> Option<&StoredRating> {
        self.ratings.get(id)
    }

    pub fn ratings(&self) -> impl Iterator<Item = &StoredRating> {
        self.ratings.values()
    }

    pub fn stored_count(&self) -> usize {
        self.ratings.len()
    }

    /// Every stored rating about `trustee`, own and received.
    pub fn ratings_about<'a>(&'a self, trustee: &AgentId) -> impl Iterator<Item = &'a Rating> + 'a {
        self.by_trustee
            .get(trustee)
            .into_iter()
            .flatten()
            .map(move |id| &self.ratings[id].rating)
    }

    /// This agent's own ratings about `trustee`.
    pub fn own_ratings_about<'a>(&'a self, trustee: &AgentId) -> impl Iterator<Item = &'a Rating> + 'a {
        self.own
            .get(trustee)
            .into_iter()
            .flatten()
            .map(move |(_, id)| &self.ratings[id].rating)
    }

    /// Trustees of the agent's own ratings.
    pub fn known_agents(&self) -> BTreeSet<AgentId> {
        self.own.keys().cloned().collect()
    }

    pub fn wl(&self) -> &BTreeSet<AgentId> {
        &self.wl
    }

    pub fn bl(&self) -> &BTreeSet<AgentId> {
        &self.bl
    }

    pub fn list_events(&self) -> &[ListEvent] {
        &self.list_events
    }

    pub fn source_view(&self) -> SourceView {
        SourceView {
            self_id: self.self_id.clone(),
            known: self.known_agents(),
            wl: self.wl.clone(),
            bl: self.bl.clone(),
        }
    }

    /// Good and bad behavior events for one rating under this agent's
    /// thresholds and behavior rules.
    pub fn classify_behavior(&self, rating: &Rating) -> Result<Vec<BehaviorEvent>, EngineError> {
        let mut facts = self.thresholds.behavior_facts();
        facts.push(rating.to_literal());
        let out = self.strategy.behavior.run(&facts, None)?;
        Ok(out
            .defeasible_pos
            .iter()
            .filter_map(BehaviorEvent::from_literal)
            .collect())
    }

    /// Records an `add_whitelist` event directly, e.g. for initial
    /// acquaintances.
    pub fn seed_whitelist(&mut self, agent: impl Into<AgentId>, time: u64) {
        let agent = agent.into();
        self.push_event(ListKind::AddWhitelist, agent.clone(), time, time);
        self.dirty.insert(agent);
    }

    fn push_event(&mut self, kind: ListKind, trustee: AgentId, time: u64, at: u64) -> bool {
        if !self.recorded.insert((kind, trustee.clone(), time)) {
            return false;
        }
        let latest = self.latest.entry((kind, trustee.clone())).or_insert(time);
        *latest = (*latest).max(time);
        self.list_events.push(ListEvent { kind, trustee, time, recorded_at: at });
        true
    }

    /// Re-evaluates the list rules for every trustee with new own ratings or
    /// seeded events since the last call, records newly derived list events
    /// at `at`, and returns the current lists.
    pub fn update_lists(&mut self, at: u64) -> Result<ListDecision, EngineError> {
        if self.dirty.is_empty() {
            return Ok(self.decision());
        }
        let dirty = std::mem::take(&mut self.dirty);
        let mut facts = Vec::new();
        for x in &dirty {
            let base = |pred: &str| {
                Literal::new(pred)
                    .negate()
                    .arg("trustee", Term::Const(x.clone()))
                    .arg("time", Term::num(0))
            };
            facts.push(base("whitelist"));
            facts.push(base("blacklist"));
            for kind in [ListKind::AddWhitelist, ListKind::AddBlacklist] {
                if let Some(&time) = self.latest.get(&(kind, x.clone())) {
                    facts.push(
                        ListEvent { kind, trustee: x.clone(), time, recorded_at: 0 }.to_literal(),
                    );
                }
            }
            let recent: Vec<Symbol> = self
                .own
                .get(x)
                .into_iter()
                .flat_map(|s| s.iter().rev().take(self.memory))
                .map(|(_, id)| id.clone())
                .collect();
            for id in recent {
                if !self.behavior_cache.contains_key(&id) {
                    let events = self.classify_behavior(&self.ratings[&id].rating)?;
                    self.behavior_cache.insert(id.clone(), events);
                }
                facts.extend(self.behavior_cache[&id].iter().map(BehaviorEvent::to_literal));
            }
        }
        let out = self.strategy.lists.run(&facts, Some(Number::from_int(at as i64)))?;
        let mut derived = Vec::new();
        for l in &out.defeasible_pos {
            let kind = match l.predicate.as_str() {
                "add_whitelist" => ListKind::AddWhitelist,
                "add_blacklist" => ListKind::AddBlacklist,
                _ => continue,
            };
            let trustee = l.get("trustee").and_then(Term::as_const).map(Symbol::new);
            let time = l
                .get("time")
                .and_then(Term::as_number)
                .and_then(Number::as_integer)
                .and_then(|v| u64::try_from(v).ok());
            if let (Some(trustee), Some(time)) = (trustee, time) {
                derived.push((kind, trustee, time));
            }
        }
        derived.sort();
        for (kind, trustee, time) in derived {
            self.push_event(kind, trustee, time, at);
        }
        for x in &dirty {
            let member = |pred: &str| out.proves(&Literal::new(pred).arg("trustee", Term::Const(x.clone())));
            if member("WL") {
                self.wl.insert(x.clone());
            } else {
                self.wl.remove(x);
            }
            if member("BL") {
                self.bl.insert(x.clone());
            } else {
                self.bl.remove(x);
            }
        }
        Ok(self.decision())
    }

    fn decision(&self) -> ListDecision {
        ListDecision { wl: self.wl.clone(), bl: self.bl.clone() }
    }

    /// Line-oriented dump in rule-file fact syntax.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        let mut line = |l: &Literal| {
            write_literal(&mut out, l);
            out.push_str(".\n");
        };
        line(&Literal::new("self").arg("agent", Term::Const(self.self_id.clone())));
        for l in self.thresholds.behavior_facts().iter().chain(&self.thresholds.eligibility_facts()) {
            line(l);
        }
        for s in self.ratings.values() {
            line(&s.rating.to_literal());
        }
        for e in &self.list_events {
            line(&e.to_literal());
        }
        for x in &self.wl {
            line(&Literal::new("WL").arg("trustee", Term::Const(x.clone())));
        }
        for x in &self.bl {
            line(&Literal::new("BL").arg("trustee", Term::Const(x.clone())));
        }
        out
    }
}
