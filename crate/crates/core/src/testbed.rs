//! Seeded marketplace simulation: providers of four quality classes,
//! consumers choosing by policy, utility gain and storage per round.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::EngineError;
use crate::estimator::{self, EstimateError, EstimationConfig, Theory};
use crate::exchange::SimNetwork;
use crate::reputation::{AgentId, AgentTrustState, Provenance, Rating, RatingError, Strategy, Thresholds};
use crate::syntax::Symbol;

pub const MIN_SCORE: f64 = 0.1;
pub const MAX_SCORE: f64 = 10.0;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Rating(#[from] RatingError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProviderClass {
    Good,
    Ordinary,
    Intermittent,
    Bad,
}

impl ProviderClass {
    pub const ALL: [ProviderClass; 4] =
        [ProviderClass::Good, ProviderClass::Ordinary, ProviderClass::Intermittent, ProviderClass::Bad];

    pub fn name(self) -> &'static str {
        match self {
            ProviderClass::Good => "good",
            ProviderClass::Ordinary => "ordinary",
            ProviderClass::Intermittent => "intermittent",
            ProviderClass::Bad => "bad",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderProfile {
    pub class: ProviderClass,
    pub mean: [f64; 6],
    pub spread: [f64; 6],
}

impl ProviderProfile {
    pub fn uniform(class: ProviderClass, mean: f64, spread: f64) -> Self {
        ProviderProfile { class, mean: [mean; 6], spread: [spread; 6] }
    }

    /// Good 8.5±1.0, ordinary 5.5±1.5, bad 2.0±1.5, intermittent uniform.
    pub fn default_for(class: ProviderClass) -> Self {
        match class {
            ProviderClass::Good => Self::uniform(class, 8.5, 1.0),
            ProviderClass::Ordinary => Self::uniform(class, 5.5, 1.5),
            ProviderClass::Intermittent => Self::uniform(class, 5.05, 4.95),
            ProviderClass::Bad => Self::uniform(class, 2.0, 1.5),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let ok = self.mean.iter().all(|m| (MIN_SCORE..=MAX_SCORE).contains(m))
            && self.spread.iter().all(|s| s.is_finite() && *s >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(SimError::Config(format!("bad {} profile", self.class.name())))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Performance {
    pub scores: [f64; 6],
    pub ug: f64,
}

/// Utility gain of a score vector: mean normalized score times 10.
pub fn utility_gain(scores: &[f64; 6]) -> f64 {
    let mean = scores.iter().map(|s| (s - MIN_SCORE) / (MAX_SCORE - MIN_SCORE)).sum::<f64>() / 6.0;
    (mean * 10.0).clamp(0.0, 10.0)
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

pub fn provider_perform(profile: &ProviderProfile, rng: &mut impl Rng) -> Performance {
    let mut scores = [0.0; 6];
    for (k, s) in scores.iter_mut().enumerate() {
        let raw = match profile.class {
            ProviderClass::Intermittent => rng.gen_range(MIN_SCORE..=MAX_SCORE),
            _ => {
                let d = profile.spread[k];
                let offset = if d > 0.0 { rng.gen_range(-d..=d) } else { 0.0 };
                profile.mean[k] + offset
            }
        };
        *s = round2(raw).clamp(MIN_SCORE, MAX_SCORE);
    }
    Performance { ug: utility_gain(&scores), scores }
}

/// Honest rating of one interaction.
pub fn rate_interaction(
    consumer: &AgentId,
    provider: &AgentId,
    performance: &Performance,
    round: u64,
    confidence: f64,
    transaction_value: f64,
) -> Rating {
    Rating {
        id: Symbol::new(&format!("{consumer}_r{round}")),
        truster: consumer.clone(),
        trustee: provider.clone(),
        t: round,
        scores: performance.scores,
        confidence,
        transaction_value,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Disarm(Theory),
    DirectOnly,
    None,
}

impl Policy {
    pub fn name(&self) -> String {
        match self {
            Policy::Disarm(t) => format!("DISARM-{}", t.id().to_uppercase()),
            Policy::DirectOnly => "DIRECT_ONLY".into(),
            Policy::None => "NONE".into(),
        }
    }

    pub fn standard() -> Vec<Policy> {
        vec![
            Policy::Disarm(Theory::T1),
            Policy::Disarm(Theory::T2),
            Policy::Disarm(Theory::T3),
            Policy::DirectOnly,
            Policy::None,
        ]
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub providers: usize,
    /// Good, ordinary, intermittent, bad.
    pub densities: [f64; 4],
    pub profiles: [ProviderProfile; 4],
    pub policies: Vec<Policy>,
    pub consumers_per_policy: usize,
    pub rounds: u64,
    pub seed: u64,
    pub ttl_limit: u32,
    /// Providers each DISARM consumer looks up per round.
    pub lookups_per_round: usize,
    /// Initial white-list size of every consumer.
    pub acquaintances: usize,
    pub estimation: EstimationConfig,
    pub thresholds: Thresholds,
    /// Range of the confidence and transaction value a consumer attaches.
    pub rating_weight_range: (f64, f64),
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            providers: 40,
            densities: [0.15, 0.30, 0.15, 0.40],
            profiles: ProviderClass::ALL.map(ProviderProfile::default_for),
            policies: Policy::standard(),
            consumers_per_policy: 7,
            rounds: 200,
            seed: 1,
            ttl_limit: 2,
            lookups_per_round: 3,
            acquaintances: 2,
            estimation: EstimationConfig::default(),
            thresholds: Thresholds::default(),
            rating_weight_range: (0.4, 1.0),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.into()));
        if self.rounds == 0 {
            return bad("rounds must be at least 1");
        }
        if self.providers == 0 {
            return bad("at least one provider is required");
        }
        if self.densities.iter().any(|d| !d.is_finite() || *d < 0.0)
            || (self.densities.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return bad("densities must be non-negative and sum to 1");
        }
        if self.policies.is_empty() || self.consumers_per_policy == 0 {
            return bad("at least one consumer is required");
        }
        let (lo, hi) = self.rating_weight_range;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return bad("rating weight range must lie in [0,1]");
        }
        for (p, class) in self.profiles.iter().zip(ProviderClass::ALL) {
            if p.class != class {
                return bad("profiles must be listed good, ordinary, intermittent, bad");
            }
            p.validate()?;
        }
        self.thresholds.validate()?;
        self.estimation.validate()?;
        Ok(())
    }

    /// Providers per class, largest remainder first.
    pub fn class_counts(&self) -> [usize; 4] {
        let exact = self.densities.map(|d| d * self.providers as f64);
        let mut counts = exact.map(|x| x.floor() as usize);
        let mut left = self.providers - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for i in order {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        counts
    }
}

/// FNV-1a over the seed and labels, used to derive independent streams.
fn stream_seed(seed: u64, labels: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for b in bytes {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    eat(&seed.to_le_bytes());
    for l in labels {
        eat(l.as_bytes());
        eat(&[0xff]);
    }
    h
}

pub fn stream(seed: u64, labels: &[&str]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, labels))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Choice {
    pub consumer: AgentId,
    pub policy: String,
    pub provider: AgentId,
    pub ug: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    pub round: u64,
    pub choices: Vec<Choice>,
    /// Stored ratings per consumer after the round.
    pub stored: BTreeMap<AgentId, usize>,
    /// Ratings created system-wide so far.
    pub centralized: usize,
    pub messages: u64,
}

impl RoundLog {
    /// Mean and population standard deviation of UG per policy.
    pub fn ug_by_policy(&self) -> BTreeMap<String, (f64, f64)> {
        let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for c in &self.choices {
            groups.entry(c.policy.clone()).or_default().push(c.ug);
        }
        groups.into_iter().map(|(p, xs)| (p, mean_sd(&xs))).collect()
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageRow {
    pub round: u64,
    pub policy: String,
    pub mean_stored: f64,
    pub max_stored: usize,
    pub centralized_count: usize,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub policies: Vec<String>,
    /// Consumer to policy name.
    pub consumers: BTreeMap<AgentId, String>,
    pub providers: BTreeMap<AgentId, ProviderClass>,
    pub rounds: Vec<RoundLog>,
}

impl SimOutcome {
    /// Mean UG per policy over every interaction of the run.
    pub fn mean_ug(&self) -> BTreeMap<String, f64> {
        let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for c in self.rounds.iter().flat_map(|r| &r.choices) {
            let e = sums.entry(c.policy.clone()).or_default();
            e.0 += c.ug;
            e.1 += 1;
        }
        sums.into_iter().map(|(p, (s, n))| (p, s / n as f64)).collect()
    }

    /// Policy names by mean UG, best first.
    pub fn ranking(&self) -> Vec<(String, f64)> {
        let mut v: Vec<_> = self.mean_ug().into_iter().collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }

    pub fn summary(&self) -> String {
        let mut out = String::from("policy mean_ug\n");
        for (p, ug) in self.ranking() {
            let _ = writeln!(out, "{p} {ug:.4}");
        }
        out
    }

    pub fn ug_csv(&self) -> String {
        let mut out = String::from("round,policy,mean_ug,stddev_ug\n");
        for r in &self.rounds {
            for (p, (m, sd)) in r.ug_by_policy() {
                let _ = writeln!(out, "{},{p},{m:.6},{sd:.6}", r.round);
            }
        }
        out
    }

    pub fn storage_csv(&self) -> String {
        let mut out = String::from("round,policy,mean_stored,max_stored,centralized_count\n");
        for s in storage_metrics(self) {
            let _ = writeln!(
                out,
                "{},{},{:.6},{},{}",
                s.round, s.policy, s.mean_stored, s.max_stored, s.centralized_count
            );
        }
        out
    }

    pub fn messages_csv(&self) -> String {
        let mut out = String::from("round,count\n");
        for r in &self.rounds {
            let _ = writeln!(out, "{},{}", r.round, r.messages);
        }
        out
    }

    /// Writes `ug.csv`, `storage.csv` and `messages.csv` into `dir`.
    pub fn write_csvs(&self, dir: &Path) -> Result<(), SimError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("ug.csv"), self.ug_csv())?;
        std::fs::write(dir.join("storage.csv"), self.storage_csv())?;
        std::fs::write(dir.join("messages.csv"), self.messages_csv())?;
        Ok(())
    }
}

/// Stored-rating counts per policy and round next to the count a single
/// store of every rating would hold.
pub fn storage_metrics(outcome: &SimOutcome) -> Vec<StorageRow> {
    let mut rows = Vec::new();
    for r in &outcome.rounds {
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (agent, n) in &r.stored {
            groups.entry(outcome.consumers[agent].as_str()).or_default().push(*n);
        }
        for (p, ns) in groups {
            rows.push(StorageRow {
                round: r.round,
                policy: p.to_string(),
                mean_stored: ns.iter().sum::<usize>() as f64 / ns.len() as f64,
                max_stored: ns.iter().copied().max().unwrap_or(0),
                centralized_count: r.centralized,
            });
        }
    }
    rows
}

struct Consumer {
    id: AgentId,
    policy: Policy,
    name: String,
    rng: ChaCha8Rng,
}

struct Provider {
    id: AgentId,
    profile: ProviderProfile,
}

/// Estimated value of every candidate with data, or `None` if none has any.
fn best_candidates(
    state: &AgentTrustState,
    candidates: &[&Provider],
    config: &EstimationConfig,
    thresholds: &Thresholds,
    direct_only: bool,
    now: u64,
) -> Result<Vec<(usize, f64, estimator::CategorizedPool)>, SimError> {
    let view = state.source_view();
    let mut scored = Vec::new();
    for (i, p) in candidates.iter().enumerate() {
        let pool: Vec<Rating> = if direct_only {
            state.own_ratings_about(&p.id).cloned().collect()
        } else {
            state.ratings_about(&p.id).cloned().collect()
        };
        if pool.is_empty() {
            continue;
        }
        let part = estimator::participants(&view, &pool, thresholds, config, now);
        if part.is_empty() {
            continue;
        }
        let (value, _) = estimator::estimate_value(&part, config)?;
        scored.push((i, value, part));
    }
    Ok(scored)
}

/// Picks argmax R, breaking ties toward lower σ and then at random.
fn pick(
    scored: Vec<(usize, f64, estimator::CategorizedPool)>,
    config: &EstimationConfig,
    rng: &mut impl Rng,
) -> Result<Option<usize>, SimError> {
    let Some(best) = scored.iter().map(|s| s.1).max_by(f64::total_cmp) else {
        return Ok(None);
    };
    let top: Vec<_> = scored.into_iter().filter(|s| s.1 == best).collect();
    if top.len() == 1 {
        return Ok(Some(top[0].0));
    }
    let sigmas = top
        .iter()
        .map(|s| estimator::confidence_sigma(&s.2, config.sigma_mode))
        .collect::<Result<Vec<_>, _>>()?;
    let low = sigmas.iter().copied().fold(f64::INFINITY, f64::min);
    let ties: Vec<usize> = top.iter().zip(&sigmas).filter(|(_, s)| **s == low).map(|(t, _)| t.0).collect();
    Ok(ties.choose(rng).copied())
}

pub fn run_simulation(config: &SimConfig) -> Result<SimOutcome, SimError> {
    config.validate()?;
    let strategy = Strategy::default();

    let mut providers = Vec::new();
    for (class_idx, n) in config.class_counts().into_iter().enumerate() {
        for _ in 0..n {
            providers.push(Provider {
                id: Symbol::new(&format!("p{}", providers.len() + 1)),
                profile: config.profiles[class_idx].clone(),
            });
        }
    }

    let mut consumers = Vec::new();
    for policy in &config.policies {
        for _ in 0..config.consumers_per_policy {
            let id = Symbol::new(&format!("c{}", consumers.len() + 1));
            consumers.push(Consumer {
                rng: stream(config.seed, &["consumer", id.as_str()]),
                id,
                policy: policy.clone(),
                name: policy.name(),
            });
        }
    }

    let mut net = SimNetwork::new();
    let mut social = stream(config.seed, &["acquaintances"]);
    let ids: Vec<AgentId> = consumers.iter().map(|c| c.id.clone()).collect();
    for c in &consumers {
        let mut state = AgentTrustState::new(c.id.clone(), config.thresholds.clone(), strategy.clone());
        let mut estimation = config.estimation.clone();
        if let Policy::Disarm(t) = &c.policy {
            estimation.theory = t.clone();
        }
        state.estimation = estimation;
        let others: Vec<&AgentId> = ids.iter().filter(|x| **x != c.id).collect();
        for a in others.choose_multiple(&mut social, config.acquaintances) {
            state.seed_whitelist((*a).clone(), 1);
        }
        if c.policy != Policy::None {
            state.update_lists(1)?;
        }
        net.add_peer(state);
    }

    let mut perf_rngs: BTreeMap<(usize, usize), ChaCha8Rng> = BTreeMap::new();
    let mut rounds = Vec::with_capacity(config.rounds as usize);
    let mut created = 0usize;
    for round in 1..=config.rounds {
        let before = net.delivered();
        for c in consumers.iter_mut() {
            if !matches!(c.policy, Policy::Disarm(_)) {
                continue;
            }
            let state = &net.peer(&c.id).expect("consumer on network").state;
            let open: Vec<&AgentId> = providers.iter().map(|p| &p.id).filter(|p| !state.bl().contains(*p)).collect();
            let targets: Vec<AgentId> =
                open.choose_multiple(&mut c.rng, config.lookups_per_round).map(|p| (*p).clone()).collect();
            for t in targets {
                net.initiate(&c.id, &t, config.ttl_limit);
            }
        }
        net.run(u64::from(config.ttl_limit) * 2 + 4)?;
        let messages = net.delivered() - before;

        let mut choices = Vec::with_capacity(consumers.len());
        for (ci, c) in consumers.iter_mut().enumerate() {
            let state = &net.peer(&c.id).expect("consumer on network").state;
            let pi = match &c.policy {
                Policy::None => c.rng.gen_range(0..providers.len()),
                policy => {
                    let candidates: Vec<&Provider> =
                        providers.iter().filter(|p| !state.bl().contains(&p.id)).collect();
                    let candidates = if candidates.is_empty() { providers.iter().collect() } else { candidates };
                    let scored = best_candidates(
                        state,
                        &candidates,
                        &state.estimation,
                        &config.thresholds,
                        *policy == Policy::DirectOnly,
                        round,
                    )?;
                    let local = match pick(scored, &state.estimation, &mut c.rng)? {
                        Some(i) => i,
                        None => c.rng.gen_range(0..candidates.len()),
                    };
                    let id = &candidates[local].id;
                    providers.iter().position(|p| p.id == *id).expect("candidate is a provider")
                }
            };
            let provider = &providers[pi];
            let rng = perf_rngs
                .entry((pi, ci))
                .or_insert_with(|| stream(config.seed, &["perform", provider.id.as_str(), c.id.as_str()]));
            let performance = provider_perform(&provider.profile, rng);
            let (lo, hi) = config.rating_weight_range;
            let confidence = c.rng.gen_range(lo..=hi);
            let transaction_value = c.rng.gen_range(lo..=hi);
            let rating = rate_interaction(&c.id, &provider.id, &performance, round, confidence, transaction_value);
            choices.push((ci, rating, performance.ug));
        }

        let mut logged = Vec::with_capacity(choices.len());
        for (ci, rating, ug) in choices {
            let c = &consumers[ci];
            let peer = net.peer_mut(&c.id).expect("consumer on network");
            logged.push(Choice { consumer: c.id.clone(), policy: c.name.clone(), provider: rating.trustee.clone(), ug });
            peer.state.record_rating(rating, Provenance::Own)?;
            created += 1;
            if c.policy != Policy::None {
                peer.state.update_lists(round)?;
            }
        }

        rounds.push(RoundLog {
            round,
            choices: logged,
            stored: net.peers().map(|p| (p.state.self_id().clone(), p.state.stored_count())).collect(),
            centralized: created,
            messages,
        });
    }

    Ok(SimOutcome {
        policies: config.policies.iter().map(Policy::name).collect(),
        consumers: consumers.iter().map(|c| (c.id.clone(), c.name.clone())).collect(),
        providers: providers.iter().map(|p| (p.id.clone(), p.profile.class)).collect(),
        rounds,
    })
}
