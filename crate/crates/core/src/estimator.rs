//! Reputation estimation: eligibility, time filters, source categories,
//! participation theories, the time-weighted log metric and its spread.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::corpus;
use crate::engine::{Engine, EngineError};
use crate::number::Number;
use crate::reputation::{AgentId, Coefficient, Rating, Thresholds};
use crate::syntax::{Literal, Symbol, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    PR,
    WR,
    KR,
    SR,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::PR, Category::WR, Category::KR, Category::SR];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Which rule justifies eligibility. Ordered from strongest to weakest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Eligibility {
    /// Confidence and transaction value both meet their thresholds.
    Both,
    /// Confidence alone meets its threshold.
    Confidence,
    /// Transaction value alone meets its threshold.
    TransactionValue,
}

impl Eligibility {
    pub fn rule_id(self) -> &'static str {
        match self {
            Eligibility::Both => "r26",
            Eligibility::Confidence => "r27",
            Eligibility::TransactionValue => "r28",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeFilter {
    /// `from <= t <= to`
    Interval { from: u64, to: u64 },
    /// `from <= t`
    Since { from: u64 },
    /// `now - width <= t`
    Window { width: u64 },
}

impl TimeFilter {
    pub fn validate(&self) -> Result<(), EstimateError> {
        match *self {
            TimeFilter::Interval { from, to } if from > to => Err(EstimateError::BadFilter(*self)),
            _ => Ok(()),
        }
    }

    pub fn keeps(&self, t: u64, now: u64) -> bool {
        match *self {
            TimeFilter::Interval { from, to } => from <= t && t <= to,
            TimeFilter::Since { from } => from <= t,
            TimeFilter::Window { width } => now as i128 - width as i128 <= t as i128,
        }
    }

    /// Short identifier used in report lines.
    pub fn id(&self) -> String {
        match *self {
            TimeFilter::Interval { from, to } => format!("interval({from},{to})"),
            TimeFilter::Since { from } => format!("since({from})"),
            TimeFilter::Window { width } => format!("window({width})"),
        }
    }

    /// The rule file and threshold facts implementing this filter.
    pub fn corpus(&self) -> (&'static str, Vec<Literal>) {
        let num = |v: u64| Term::Num(Number::from_int(v as i64));
        match *self {
            TimeFilter::Interval { from, to } => (
                corpus::COUNT_INTERVAL,
                vec![
                    Literal::new("time_from_threshold").pos(num(from)),
                    Literal::new("time_to_threshold").pos(num(to)),
                ],
            ),
            TimeFilter::Since { from } => {
                (corpus::COUNT_SINCE, vec![Literal::new("time_from_threshold").pos(num(from))])
            }
            TimeFilter::Window { width } => (corpus::COUNT_WINDOW, vec![Literal::new("time_window").pos(num(width))]),
        }
    }
}

/// Participation theory: an ordered partition of the four categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Theory {
    /// All categories count.
    T1,
    /// PR, then WR, then KR, then SR.
    T2,
    /// PR and WR together, then KR, then SR.
    T3,
    Custom(Vec<Vec<Category>>),
}

impl Theory {
    pub fn partition(&self) -> Vec<Vec<Category>> {
        use Category::*;
        match self {
            Theory::T1 => vec![vec![PR, WR, KR, SR]],
            Theory::T2 => vec![vec![PR], vec![WR], vec![KR], vec![SR]],
            Theory::T3 => vec![vec![PR, WR], vec![KR], vec![SR]],
            Theory::Custom(p) => p.clone(),
        }
    }

    pub fn id(&self) -> String {
        match self {
            Theory::T1 => "t1".into(),
            Theory::T2 => "t2".into(),
            Theory::T3 => "t3".into(),
            Theory::Custom(p) => p
                .iter()
                .map(|g| g.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("+"))
                .collect::<Vec<_>>()
                .join(">"),
        }
    }

    pub fn corpus(&self) -> Option<&'static str> {
        match self {
            Theory::T1 => Some(corpus::THEORY1),
            Theory::T2 => Some(corpus::THEORY2),
            Theory::T3 => Some(corpus::THEORY3),
            Theory::Custom(_) => None,
        }
    }

    pub fn validate(&self) -> Result<(), EstimateError> {
        let mut seen = BTreeSet::new();
        let mut count = 0;
        for g in self.partition() {
            if g.is_empty() {
                return Err(EstimateError::BadTheory(self.id()));
            }
            for c in g {
                seen.insert(c);
                count += 1;
            }
        }
        if seen.len() != 4 || count != 4 {
            return Err(EstimateError::BadTheory(self.id()));
        }
        Ok(())
    }
}

impl std::str::FromStr for Theory {
    type Err = EstimateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "t1" => Ok(Theory::T1),
            "t2" => Ok(Theory::T2),
            "t3" => Ok(Theory::T3),
            _ => Err(EstimateError::BadTheory(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaMode {
    /// One population deviation over the log scores of every participating
    /// rating and coefficient.
    #[default]
    PooledNormalized,
    /// Same pooling over the raw scores.
    PooledRaw,
    /// Mean of the six per-coefficient deviations of the log scores.
    PerCoefficient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationConfig {
    pub weights: [f64; 6],
    /// π for PR, WR, KR, SR.
    pub social_weights: [f64; 4],
    pub theory: Theory,
    pub time_filter: TimeFilter,
    pub sigma_mode: SigmaMode,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            weights: [1.0; 6],
            social_weights: [0.4, 0.3, 0.2, 0.1],
            theory: Theory::T3,
            time_filter: TimeFilter::Since { from: 1 },
            sigma_mode: SigmaMode::default(),
        }
    }
}

impl EstimationConfig {
    pub fn validate(&self) -> Result<(), EstimateError> {
        let ok = |w: &[f64]| w.iter().all(|x| x.is_finite() && *x >= 0.0) && w.iter().sum::<f64>() > 0.0;
        if !ok(&self.weights) {
            return Err(EstimateError::BadWeights("coefficient"));
        }
        if !ok(&self.social_weights) {
            return Err(EstimateError::BadWeights("social"));
        }
        self.theory.validate()?;
        self.time_filter.validate()
    }
}

/// Response time 20%, validity 50%, completeness, correctness and
/// cooperation 10% each, outcome feeling 0%.
pub fn example_weight_profile() -> [f64; 6] {
    [0.2, 0.5, 0.1, 0.1, 0.1, 0.0]
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimateError {
    #[error("no participating ratings")]
    NoData,
    #[error("score {0} outside [0.1, 10]")]
    OutOfRange(f64),
    #[error("{0} weights must be non-negative and not all zero")]
    BadWeights(&'static str),
    #[error("social weights of the present categories sum to zero")]
    ZeroSocialWeight,
    #[error("theory `{0}` is not a partition of PR, WR, KR, SR")]
    BadTheory(String),
    #[error("invalid time filter {0:?}")]
    BadFilter(TimeFilter),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

pub fn normalize(score: f64) -> Result<f64, EstimateError> {
    if !(0.1..=10.0).contains(&score) {
        return Err(EstimateError::OutOfRange(score));
    }
    Ok(score.log10())
}

/// Eligible ratings with the strongest rule that admits each one.
pub fn eligible<'a>(pool: impl IntoIterator<Item = &'a Rating>, th: &Thresholds) -> Vec<(&'a Rating, Eligibility)> {
    pool.into_iter()
        .filter_map(|r| {
            let conf = r.confidence >= th.confidence;
            let tran = r.transaction_value >= th.transaction_value;
            let why = match (conf, tran) {
                (true, true) => Eligibility::Both,
                (true, false) => Eligibility::Confidence,
                (false, true) => Eligibility::TransactionValue,
                (false, false) => return None,
            };
            Some((r, why))
        })
        .collect()
}

pub fn count_filter<'a>(
    pool: impl IntoIterator<Item = &'a Rating>,
    filter: &TimeFilter,
    now: u64,
) -> Vec<&'a Rating> {
    pool.into_iter().filter(|r| filter.keeps(r.t, now)).collect()
}

/// Ratings split by source. Each list is sorted by rating id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CategorizedPool {
    pub pr: Vec<Rating>,
    pub wr: Vec<Rating>,
    pub kr: Vec<Rating>,
    pub sr: Vec<Rating>,
}

impl CategorizedPool {
    pub fn get(&self, c: Category) -> &[Rating] {
        match c {
            Category::PR => &self.pr,
            Category::WR => &self.wr,
            Category::KR => &self.kr,
            Category::SR => &self.sr,
        }
    }

    fn get_mut(&mut self, c: Category) -> &mut Vec<Rating> {
        match c {
            Category::PR => &mut self.pr,
            Category::WR => &mut self.wr,
            Category::KR => &mut self.kr,
            Category::SR => &mut self.sr,
        }
    }

    pub fn len(&self) -> usize {
        Category::ALL.iter().map(|&c| self.get(c).len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> BTreeSet<Symbol> {
        self.iter().map(|(_, r)| r.id.clone()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Category, &Rating)> {
        Category::ALL
            .into_iter()
            .flat_map(move |c| self.get(c).iter().map(move |r| (c, r)))
    }
}

/// What the estimating agent knows about the rating sources.
#[derive(Debug, Clone)]
pub struct SourceView {
    pub self_id: AgentId,
    /// Trustees of the agent's own ratings.
    pub known: BTreeSet<AgentId>,
    pub wl: BTreeSet<AgentId>,
    pub bl: BTreeSet<AgentId>,
}

impl SourceView {
    pub fn category(&self, truster: &AgentId) -> Option<Category> {
        if *truster == self.self_id {
            return Some(Category::PR);
        }
        let known = self.known.contains(truster);
        if known && self.wl.contains(truster) {
            Some(Category::WR)
        } else if known && !self.bl.contains(truster) {
            Some(Category::KR)
        } else if !known && !self.bl.contains(truster) {
            Some(Category::SR)
        } else {
            None
        }
    }
}

pub fn categorize<'a>(view: &SourceView, pool: impl IntoIterator<Item = &'a Rating>) -> CategorizedPool {
    let mut out = CategorizedPool::default();
    for r in pool {
        if let Some(c) = view.category(&r.truster) {
            out.get_mut(c).push(r.clone());
        }
    }
    for c in Category::ALL {
        out.get_mut(c).sort_by(|a, b| a.id.cmp(&b.id));
    }
    out
}

/// The first group of the partition with any ratings participates in full.
pub fn select_participants(cat: &CategorizedPool, theory: &Theory) -> CategorizedPool {
    let mut out = CategorizedPool::default();
    for group in theory.partition() {
        if group.iter().any(|&c| !cat.get(c).is_empty()) {
            for c in group {
                *out.get_mut(c) = cat.get(c).to_vec();
            }
            break;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReputationReport {
    pub trustee: AgentId,
    pub value: f64,
    pub sigma: f64,
    pub participating: CategorizedPool,
    pub per_category: BTreeMap<Category, f64>,
}

impl ReputationReport {
    /// `trustee value sigma pr wr kr sr theory filter`
    pub fn line(&self, theory: &Theory, filter: &TimeFilter) -> String {
        format!(
            "{} value={:.6} sigma={:.6} pr={} wr={} kr={} sr={} theory={} filter={}",
            self.trustee,
            self.value,
            self.sigma,
            self.participating.pr.len(),
            self.participating.wr.len(),
            self.participating.kr.len(),
            self.participating.sr.len(),
            theory.id(),
            filter.id()
        )
    }
}

fn logs(r: &Rating) -> Result<[f64; 6], EstimateError> {
    let mut out = [0.0; 6];
    for c in Coefficient::ALL {
        out[c.index()] = normalize(r.score(c))?;
    }
    Ok(out)
}

/// Time-weighted score of one category: the w-weighted mean over
/// coefficients of the t-weighted mean of the log scores.
fn category_score(ratings: &[Rating], weights: &[f64; 6]) -> Result<f64, EstimateError> {
    let mut tw = [0.0; 6];
    let mut tsum = 0.0;
    for r in ratings {
        let l = logs(r)?;
        let t = r.t as f64;
        tsum += t;
        for k in 0..6 {
            tw[k] += l[k] * t;
        }
    }
    let wsum: f64 = weights.iter().sum();
    Ok((0..6).map(|k| weights[k] * tw[k] / tsum).sum::<f64>() / wsum)
}

/// The reputation value over already selected participants, with σ.
pub fn estimate(
    trustee: &AgentId,
    participants: &CategorizedPool,
    config: &EstimationConfig,
) -> Result<ReputationReport, EstimateError> {
    let value_parts = estimate_value(participants, config)?;
    let sigma = confidence_sigma(participants, config.sigma_mode)?;
    Ok(ReputationReport {
        trustee: trustee.clone(),
        value: value_parts.0,
        sigma,
        participating: participants.clone(),
        per_category: value_parts.1,
    })
}

/// The value alone, without touching σ.
pub fn estimate_value(
    participants: &CategorizedPool,
    config: &EstimationConfig,
) -> Result<(f64, BTreeMap<Category, f64>), EstimateError> {
    config.validate()?;
    if participants.is_empty() {
        return Err(EstimateError::NoData);
    }
    let mut per_category = BTreeMap::new();
    let mut pi_sum = 0.0;
    for c in Category::ALL {
        let rs = participants.get(c);
        if !rs.is_empty() {
            per_category.insert(c, category_score(rs, &config.weights)?);
            pi_sum += config.social_weights[c.index()];
        }
    }
    if pi_sum <= 0.0 {
        return Err(EstimateError::ZeroSocialWeight);
    }
    let value: f64 = per_category
        .iter()
        .map(|(c, s)| config.social_weights[c.index()] / pi_sum * s)
        .sum();
    Ok((value.clamp(-1.0, 1.0), per_category))
}

/// Deviations are taken from the first sample, so equal samples give
/// exactly zero.
fn population_sd(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let Some(x0) = xs.clone().next() else { return 0.0 };
    let (n, sum) = xs.clone().fold((0usize, 0.0), |(n, s), x| (n + 1, s + (x - x0)));
    let mean = sum / n as f64;
    let var = xs.map(|x| (x - x0 - mean) * (x - x0 - mean)).sum::<f64>() / n as f64;
    var.sqrt()
}

pub fn confidence_sigma(participants: &CategorizedPool, mode: SigmaMode) -> Result<f64, EstimateError> {
    if participants.is_empty() {
        return Err(EstimateError::NoData);
    }
    let rows: Vec<[f64; 6]> = participants
        .iter()
        .map(|(_, r)| match mode {
            SigmaMode::PooledRaw => Ok(r.scores),
            _ => logs(r),
        })
        .collect::<Result<_, _>>()?;
    Ok(match mode {
        SigmaMode::PooledNormalized | SigmaMode::PooledRaw => population_sd(rows.iter().flat_map(|r| r.iter().copied())),
        SigmaMode::PerCoefficient => (0..6).map(|k| population_sd(rows.iter().map(move |r| r[k]))).sum::<f64>() / 6.0,
    })
}

/// Eligibility, time filter, categorization and participation in one step.
pub fn participants(
    view: &SourceView,
    pool: &[Rating],
    thresholds: &Thresholds,
    config: &EstimationConfig,
    now: u64,
) -> CategorizedPool {
    let eligible: Vec<&Rating> = eligible(pool, thresholds).into_iter().map(|(r, _)| r).collect();
    let counted = count_filter(eligible, &config.time_filter, now);
    select_participants(&categorize(view, counted), &config.theory)
}

/// Runs the eligibility, categorization and participation rules through the
/// engine and returns the ids of the participating ratings about `trustee`.
/// Custom theories have no rule file and are rejected.
pub fn participants_via_engine(
    view: &SourceView,
    pool: &[Rating],
    thresholds: &Thresholds,
    config: &EstimationConfig,
    trustee: &AgentId,
    now: u64,
) -> Result<BTreeSet<Symbol>, EstimateError> {
    let theory = config
        .theory
        .corpus()
        .ok_or_else(|| EstimateError::BadTheory(config.theory.id()))?;
    let (filter_rules, mut facts) = config.time_filter.corpus();
    let program = corpus::load(&[corpus::ESTIMATION, filter_rules, theory]).map_err(EngineError::from)?;
    let engine = Engine::new(program)?;
    facts.push(Literal::new("self").arg("agent", Term::Const(view.self_id.clone())));
    facts.extend(thresholds.eligibility_facts());
    for r in pool {
        facts.push(r.to_literal());
    }
    let agent = |pred: &str, x: &AgentId| Literal::new(pred).arg("trustee", Term::Const(x.clone()));
    facts.extend(view.wl.iter().map(|x| agent("WL", x)));
    facts.extend(view.bl.iter().map(|x| agent("BL", x)));
    let now = Number::from_int(now as i64);
    let pattern = Literal::new("participate")
        .arg("trustee", Term::Const(trustee.clone()))
        .arg("rating", Term::var("id"));
    let answers = engine.query(&facts, Some(now), &pattern)?;
    Ok(answers
        .into_iter()
        .filter_map(|a| match a.literal.get("rating") {
            Some(Term::Const(s)) => Some(s.clone()),
            Some(Term::Num(n)) => Some(Symbol::new(&n.to_string())),
            _ => None,
        })
        .collect())
}
