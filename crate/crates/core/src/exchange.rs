//! Rating location over the white-list graph: TTL-bounded requests, answers
//! from local experience, responses relayed back along the request path.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::reputation::{AgentId, AgentTrustState, Provenance, Rating, RatingError};
use crate::syntax::Symbol;

#[derive(Debug, Clone, PartialEq)]
pub struct RatingRequest {
    pub request_id: Symbol,
    pub origin: AgentId,
    pub sender: AgentId,
    pub receiver: AgentId,
    pub about: AgentId,
    pub ttl: u32,
    /// Agents the request has visited, origin first.
    pub hop_path: Vec<AgentId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatingResponse {
    pub request_id: Symbol,
    pub sender: AgentId,
    pub receiver: AgentId,
    pub ratings: Vec<Rating>,
    /// Responder first, then every relay so far.
    pub chain: Vec<AgentId>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Request(RatingRequest),
    Response(RatingResponse),
}

impl Message {
    pub fn receiver(&self) -> &AgentId {
        match self {
            Message::Request(r) => &r.receiver,
            Message::Response(r) => &r.receiver,
        }
    }

    pub fn request_id(&self) -> &Symbol {
        match self {
            Message::Request(r) => &r.request_id,
            Message::Response(r) => &r.request_id,
        }
    }
}

/// One request per white-list member, each carrying `ttl_limit`.
pub fn initiate_request(state: &AgentTrustState, request_id: Symbol, about: &AgentId, ttl_limit: u32) -> Vec<RatingRequest> {
    let me = state.self_id();
    state
        .wl()
        .iter()
        .filter(|r| *r != me)
        .map(|r| RatingRequest {
            request_id: request_id.clone(),
            origin: me.clone(),
            sender: me.clone(),
            receiver: r.clone(),
            about: about.clone(),
            ttl: ttl_limit,
            hop_path: vec![me.clone()],
        })
        .collect()
}

/// Answers with every own rating about the requested agent and forwards to
/// white-list members not yet on the path while the TTL is positive.
/// Requests from black-listed senders get nothing.
pub fn handle_request(state: &AgentTrustState, req: &RatingRequest) -> (Vec<RatingResponse>, Vec<RatingRequest>) {
    if state.bl().contains(&req.sender) {
        return (Vec::new(), Vec::new());
    }
    let me = state.self_id();
    let ratings: Vec<Rating> = state.own_ratings_about(&req.about).cloned().collect();
    let responses = if ratings.is_empty() {
        Vec::new()
    } else {
        vec![RatingResponse {
            request_id: req.request_id.clone(),
            sender: me.clone(),
            receiver: req.sender.clone(),
            ratings,
            chain: vec![me.clone()],
        }]
    };
    let mut forwards = Vec::new();
    if req.ttl > 0 {
        let mut path = req.hop_path.clone();
        path.push(me.clone());
        for r in state.wl() {
            if r != me && !path.contains(r) {
                forwards.push(RatingRequest {
                    request_id: req.request_id.clone(),
                    origin: req.origin.clone(),
                    sender: me.clone(),
                    receiver: r.clone(),
                    about: req.about.clone(),
                    ttl: req.ttl - 1,
                    hop_path: path.clone(),
                });
            }
        }
    }
    (responses, forwards)
}

/// Per-agent routing memory for requests in flight.
#[derive(Debug, Clone, Default)]
pub struct RelayState {
    /// Request id to the agent it came from.
    upstream: BTreeMap<Symbol, AgentId>,
    originated: BTreeSet<Symbol>,
    /// Ratings received per originated request.
    received: BTreeMap<Symbol, BTreeMap<Symbol, Rating>>,
    pub unknown_responses: u64,
    pub dropped_blacklisted: u64,
}

impl RelayState {
    pub fn accepted(&self, request_id: &Symbol) -> bool {
        self.upstream.contains_key(request_id)
    }
}

/// An agent on the network: trust state plus routing memory.
#[derive(Debug, Clone)]
pub struct Peer {
    pub state: AgentTrustState,
    pub relay: RelayState,
}

impl Peer {
    pub fn new(state: AgentTrustState) -> Self {
        Peer { state, relay: RelayState::default() }
    }

    /// Handles a delivered request. A request id is processed at most once;
    /// later copies are ignored.
    pub fn on_request(&mut self, req: &RatingRequest) -> Vec<Message> {
        let id = &req.request_id;
        if self.relay.originated.contains(id) || self.relay.upstream.contains_key(id) {
            return Vec::new();
        }
        if self.state.bl().contains(&req.sender) {
            return Vec::new();
        }
        self.relay.upstream.insert(id.clone(), req.sender.clone());
        let (responses, forwards) = handle_request(&self.state, req);
        responses
            .into_iter()
            .map(Message::Response)
            .chain(forwards.into_iter().map(Message::Request))
            .collect()
    }

    /// Stores or relays a response. Returns the relayed copy, if any.
    pub fn on_response(&mut self, resp: &RatingResponse) -> Result<Option<RatingResponse>, RatingError> {
        let bl = self.state.bl().clone();
        if bl.contains(&resp.sender) {
            self.relay.dropped_blacklisted += 1;
            return Ok(None);
        }
        let id = &resp.request_id;
        if self.relay.originated.contains(id) {
            if resp.chain.iter().any(|a| bl.contains(a)) {
                self.relay.dropped_blacklisted += 1;
                return Ok(None);
            }
            for r in &resp.ratings {
                let chain = resp.chain.iter().rev().cloned().collect();
                self.state.record_rating(r.clone(), Provenance::Received { chain })?;
                self.relay
                    .received
                    .entry(id.clone())
                    .or_default()
                    .insert(r.id.clone(), r.clone());
            }
            return Ok(None);
        }
        let Some(up) = self.relay.upstream.get(id) else {
            self.relay.unknown_responses += 1;
            return Ok(None);
        };
        let me = self.state.self_id().clone();
        let mut chain = resp.chain.clone();
        chain.push(me.clone());
        Ok(Some(RatingResponse {
            request_id: id.clone(),
            sender: me,
            receiver: up.clone(),
            ratings: resp.ratings.clone(),
            chain,
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub tick: u64,
    pub kind: &'static str,
    pub request_id: Symbol,
    pub sender: AgentId,
    pub receiver: AgentId,
    pub about: Option<AgentId>,
    pub ttl: Option<u32>,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.tick, self.kind, self.sender, self.receiver)?;
        match &self.about {
            Some(a) => write!(f, " {a}")?,
            None => f.write_str(" -")?,
        }
        match self.ttl {
            Some(t) => write!(f, " {t}"),
            None => f.write_str(" -"),
        }
    }
}

/// Synchronous in-memory network: everything sent during tick k is
/// delivered at tick k+1, in send order.
#[derive(Debug, Clone, Default)]
pub struct SimNetwork {
    peers: BTreeMap<AgentId, Peer>,
    pending: Vec<Message>,
    tick: u64,
    next_request: u64,
    delivered: u64,
    undeliverable: u64,
    trace: Option<Vec<TraceEntry>>,
}

impl SimNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn add_peer(&mut self, state: AgentTrustState) {
        self.peers.insert(state.self_id().clone(), Peer::new(state));
    }

    pub fn peer(&self, id: &AgentId) -> Option<&Peer> {
        self.peers.get(id)
    }

    pub fn peer_mut(&mut self, id: &AgentId) -> Option<&mut Peer> {
        self.peers.get_mut(id)
    }

    pub fn peers(&self) -> impl Iterator<Item = &Peer> {
        self.peers.values()
    }

    pub fn peers_mut(&mut self) -> impl Iterator<Item = &mut Peer> {
        self.peers.values_mut()
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    /// Messages delivered so far.
    pub fn delivered(&self) -> u64 {
        self.delivered
    }

    /// Messages addressed to agents outside the network.
    pub fn undeliverable(&self) -> u64 {
        self.undeliverable
    }

    pub fn trace(&self) -> &[TraceEntry] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn is_quiet(&self) -> bool {
        self.pending.is_empty()
    }

    /// Starts a lookup from `origin`. Returns the request id, or `None` if
    /// `origin` is not on the network.
    pub fn initiate(&mut self, origin: &AgentId, about: &AgentId, ttl_limit: u32) -> Option<Symbol> {
        let peer = self.peers.get_mut(origin)?;
        self.next_request += 1;
        let id = Symbol::new(&format!("{origin}_q{}", self.next_request));
        peer.relay.originated.insert(id.clone());
        let reqs = initiate_request(&peer.state, id.clone(), about, ttl_limit);
        self.pending.extend(reqs.into_iter().map(Message::Request));
        Some(id)
    }

    /// Delivers every pending message. Returns how many were delivered.
    pub fn step(&mut self) -> Result<u64, RatingError> {
        self.tick += 1;
        let batch = std::mem::take(&mut self.pending);
        let mut count = 0;
        for msg in batch {
            let Some(peer) = self.peers.get_mut(msg.receiver()) else {
                self.undeliverable += 1;
                continue;
            };
            count += 1;
            if let Some(trace) = self.trace.as_mut() {
                trace.push(match &msg {
                    Message::Request(r) => TraceEntry {
                        tick: self.tick,
                        kind: "request",
                        request_id: r.request_id.clone(),
                        sender: r.sender.clone(),
                        receiver: r.receiver.clone(),
                        about: Some(r.about.clone()),
                        ttl: Some(r.ttl),
                    },
                    Message::Response(r) => TraceEntry {
                        tick: self.tick,
                        kind: "response",
                        request_id: r.request_id.clone(),
                        sender: r.sender.clone(),
                        receiver: r.receiver.clone(),
                        about: None,
                        ttl: None,
                    },
                });
            }
            match &msg {
                Message::Request(r) => self.pending.extend(peer.on_request(r)),
                Message::Response(r) => {
                    if let Some(relayed) = peer.on_response(r)? {
                        self.pending.push(Message::Response(relayed));
                    }
                }
            }
        }
        self.delivered += count;
        Ok(count)
    }

    /// Steps until no message is pending or `max_ticks` ticks have run.
    pub fn run(&mut self, max_ticks: u64) -> Result<u64, RatingError> {
        let mut total = 0;
        for _ in 0..max_ticks {
            if self.is_quiet() {
                break;
            }
            total += self.step()?;
        }
        Ok(total)
    }

    /// Runs for at most `rounds_budget` ticks and returns every rating the
    /// origin received for `request_id`, by id.
    pub fn collect(&mut self, origin: &AgentId, request_id: &Symbol, rounds_budget: u64) -> Result<Vec<Rating>, RatingError> {
        self.run(rounds_budget)?;
        Ok(self
            .peers
            .get(origin)
            .and_then(|p| p.relay.received.get(request_id))
            .map(|m| m.values().cloned().collect())
            .unwrap_or_default())
    }

    /// Agents that accepted the request.
    pub fn recipients(&self, request_id: &Symbol) -> BTreeSet<AgentId> {
        self.peers
            .iter()
            .filter(|(_, p)| p.relay.accepted(request_id))
            .map(|(id, _)| id.clone())
            .collect()
    }
}
