//! Discrete-time scheduler: per-round recommender refresh, stimulus delivery,
//! sequential agent activation, tie decay and metric probes.

mod build;
mod consistency;
mod snapshot;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::behavior::{self, Stimulus};
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::io::{self, MetricRow, METRICS_HEADER};
use crate::metrics;
use crate::model::{AgentId, AgentProfile, BigFive, DecisionRecord, ItemCatalog, ItemId, Source};
use crate::recommenders::{self, InteractionMatrix, RecModel};
use crate::rng::{seeded_rng, Purpose};
use crate::textgen::{Circle, Endpoint, ReviewContext, ReviewWriter};
use crate::{Graph, Real};

pub use build::{build_graph, build_state, infer_profiles, load_inputs, Inputs, PersonalityReport};
pub use consistency::{consistency_experiment, ConsistencyOutcome};
pub use snapshot::{read_snapshot, restore, snapshot, write_snapshot, SNAPSHOT_MAGIC};

/// A peer recommendation waiting for the recipient's next activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingShare {
    pub from: AgentId,
    pub to: AgentId,
    pub item: ItemId,
    pub created: u32,
}

/// Lifetime share counters. `enqueued = delivered + duplicate + expired + pending`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareStats {
    pub enqueued: u64,
    pub delivered: u64,
    /// Dropped at delivery because the recipient had already consumed the item.
    pub duplicate: u64,
    pub expired: u64,
}

/// All mutable simulation state, owned by the round loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    /// Completed rounds; 0 right after initialization.
    pub round: u32,
    pub seed: u64,
    pub profiles: Vec<AgentProfile>,
    pub initial_traits: Vec<BigFive>,
    pub items: ItemCatalog,
    pub graph: Graph,
    /// Directed reciprocity history, `r_hist[from][to]`.
    r_hist: Vec<BTreeMap<u32, Real>>,
    pub consumed: Vec<BTreeSet<ItemId>>,
    pub interactions: InteractionMatrix,
    pub queue: Vec<PendingShare>,
    pub shares: ShareStats,
    /// Model trained at the end of round `.0`; serves round `.0 + 1`.
    model: Option<(u32, RecModel)>,
}

impl SimState {
    pub fn new(
        seed: u64,
        profiles: Vec<AgentProfile>,
        items: ItemCatalog,
        graph: Graph,
        interactions: InteractionMatrix,
    ) -> Result<Self> {
        let n = profiles.len();
        if graph.n() != n || interactions.n_agents() != n || interactions.n_items() != items.len() {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: graph.n().min(interactions.n_agents()),
            });
        }
        let consumed = interactions.rated_by_agent();
        Ok(SimState {
            round: 0,
            seed,
            initial_traits: profiles.iter().map(|p| p.b).collect(),
            profiles,
            items,
            graph,
            r_hist: vec![BTreeMap::new(); n],
            consumed,
            interactions,
            queue: Vec::new(),
            shares: ShareStats::default(),
            model: None,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.profiles.len()
    }

    pub fn r_hist(&self, from: AgentId, to: AgentId) -> Real {
        self.r_hist[from.index()].get(&to.0).copied().unwrap_or(0.0)
    }

    pub fn set_r_hist(&mut self, from: AgentId, to: AgentId, v: Real) {
        if v == 0.0 {
            self.r_hist[from.index()].remove(&to.0);
        } else {
            self.r_hist[from.index()].insert(to.0, v);
        }
    }

    pub fn enqueue_share(&mut self, share: PendingShare) {
        self.shares.enqueued += 1;
        self.queue.push(share);
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Model cached by the last probe, if any.
    pub fn model(&self) -> Option<&RecModel> {
        self.model.as_ref().map(|(_, m)| m)
    }

    /// Current Big-Five vectors keyed by agent.
    pub fn traits(&self) -> BTreeMap<AgentId, BigFive> {
        self.profiles.iter().map(|p| (p.id, p.b)).collect()
    }

    pub fn initial_traits(&self) -> BTreeMap<AgentId, BigFive> {
        self.profiles.iter().zip(&self.initial_traits).map(|(p, &b)| (p.id, b)).collect()
    }

    /// Marks every queued share expired. Called once a run stops for good.
    pub fn expire_all(&mut self) {
        self.shares.expired += self.queue.len() as u64;
        self.queue.clear();
    }

    fn take_shares_for(&mut self, agent: AgentId) -> Vec<PendingShare> {
        let (mine, rest): (Vec<_>, Vec<_>) = self.queue.drain(..).partition(|s| s.to == agent);
        self.queue = rest;
        mine
    }

    fn expire(&mut self, now: u32, after: u32) {
        let before = self.queue.len();
        self.queue.retain(|s| now < s.created + after);
        self.shares.expired += (before - self.queue.len()) as u64;
    }

    /// Trust records fade at the memory forgetting rate.
    fn decay_trust(&mut self, factor: Real) {
        for p in &mut self.profiles {
            p.trust.decay(factor);
        }
    }
}

/// Everything that happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub round: u32,
    pub records: Vec<DecisionRecord>,
    pub metrics: Vec<MetricRow>,
}

impl RoundReport {
    pub fn metric(&self, name: &str) -> Option<Real> {
        self.metrics.iter().find(|m| m.metric == name).map(|m| m.value)
    }
}

fn train_seed(seed: u64, round: u32) -> u64 {
    seeded_rng(seed).substream(Purpose::Recommender, 0, u64::from(round)).next_u64()
}

/// Trains the configured recommender on the current interactions.
pub fn train_model(state: &SimState, cfg: &SimConfig) -> Result<RecModel> {
    recommenders::train(cfg.recommender.kind, &state.interactions, &cfg.recommender, train_seed(state.seed, state.round))
}

fn current_model(state: &mut SimState, cfg: &SimConfig) -> Result<RecModel> {
    match state.model.take() {
        Some((r, m)) if r == state.round => Ok(m),
        _ => train_model(state, cfg),
    }
}

/// Top-`k` unconsumed items per agent.
pub fn ranked_lists(state: &SimState, model: &RecModel, k: usize) -> Vec<Vec<ItemId>> {
    (0..state.n_agents())
        .map(|u| recommenders::top_k(model, AgentId(u as u32), k, &state.consumed[u]))
        .collect()
}

/// Unconsumed items each agent would rate at or above `threshold`.
pub fn relevant_sets(state: &SimState, threshold: Real) -> Vec<BTreeSet<ItemId>> {
    state
        .profiles
        .iter()
        .enumerate()
        .map(|(u, p)| {
            state
                .items
                .iter()
                .filter(|it| !state.consumed[u].contains(&it.id))
                .filter(|it| behavior::expected_rating(&p.pref, &it.embedding) >= threshold)
                .map(|it| it.id)
                .collect()
        })
        .collect()
}

/// Retrains the recommender on the state as it stands and measures the round.
///
/// The trained model is cached and serves the following round.
pub fn probe(state: &mut SimState, cfg: &SimConfig) -> Result<Vec<MetricRow>> {
    let model = train_model(state, cfg)?;
    let t = state.round;
    let k = cfg.recommender.top_k;
    let ranked = ranked_lists(state, &model, k);
    let relevant = relevant_sets(state, cfg.recommender.relevance_threshold);
    let root = seeded_rng(state.seed);
    let mut scores: metrics::ScoreTable = vec![BTreeMap::new(); state.n_agents()];
    for (u, recs) in ranked.iter().enumerate() {
        let agent = AgentId(u as u32);
        let mut rng = root.substream(Purpose::Probe, u as u64, u64::from(t));
        for &item in recs {
            let stim = Stimulus { source: Source::System, item };
            let score = behavior::probe_decision(state, cfg, agent, stim, t, &mut rng)?.unwrap_or(0);
            scores[u].insert(item, score);
        }
    }

    let name = cfg.recommender.kind.name();
    let mut rows = Vec::new();
    let mut push = |metric: &str, value: Result<Real>| match value {
        Ok(v) => rows.push(MetricRow {
            round: t,
            metric: metric.to_string(),
            model: name.to_string(),
            value: v,
        }),
        Err(e) => info!("round {t}: {metric} undefined ({e})"),
    };
    push(&format!("recall@{k}"), metrics::recall_at_k(&ranked, &relevant, k));
    push(&format!("ndcg@{k}"), metrics::ndcg_at_k(&ranked, &relevant, k));
    push("acceptance_rate", Ok(metrics::acceptance_rate(&scores, &ranked)));
    push("satisfaction_ratio", metrics::satisfaction_ratio(&scores));
    push("negative_review_rate", Ok(metrics::negative_review_rate(&scores, &ranked)));
    push("personality_change", metrics::personality_change(&state.initial_traits(), &state.traits()));
    state.model = Some((t, model));
    Ok(rows)
}

/// Runs the next round and collects its decisions and metrics.
pub fn run_round(state: &mut SimState, cfg: &SimConfig) -> Result<RoundReport> {
    let model = current_model(state, cfg)?;
    let t = state.round + 1;
    let root = seeded_rng(state.seed);
    let mut order: Vec<u32> = (0..state.n_agents() as u32).collect();
    order.shuffle(&mut root.substream(Purpose::ActivationOrder, 0, u64::from(t)));

    let mut records = Vec::new();
    for u in order {
        let agent = AgentId(u);
        let mut rng = root.substream(Purpose::Decision, u64::from(u), u64::from(t));
        for share in state.take_shares_for(agent) {
            if state.consumed[agent.index()].contains(&share.item) {
                state.shares.duplicate += 1;
                continue;
            }
            state.shares.delivered += 1;
            let stim = Stimulus {
                source: Source::Agent(share.from),
                item: share.item,
            };
            records.push(behavior::execute_step(state, cfg, agent, stim, t, &mut rng)?);
        }
        let recs = recommenders::top_k(&model, agent, cfg.recommender.stimuli_per_round, &state.consumed[agent.index()]);
        for item in recs {
            if state.consumed[agent.index()].contains(&item) {
                continue;
            }
            let stim = Stimulus { source: Source::System, item };
            records.push(behavior::execute_step(state, cfg, agent, stim, t, &mut rng)?);
        }
    }

    state.expire(t, cfg.share_expiry_rounds);
    let fade = (-cfg.affect.lambda_mem).exp();
    state.graph.decay_ties(fade);
    state.decay_trust(fade);
    state.round = t;
    let metrics = probe(state, cfg)?;
    Ok(RoundReport { round: t, records, metrics })
}

/// Where and how a run persists its artifacts.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Output directory; `None` keeps everything in memory.
    pub out_dir: Option<PathBuf>,
    /// Rounds after which a snapshot file is written.
    pub snapshot_at: Vec<u32>,
    pub reviews: bool,
    pub endpoint: Option<Endpoint>,
}

impl RunOptions {
    pub fn in_dir(dir: impl Into<PathBuf>) -> Self {
        RunOptions {
            out_dir: Some(dir.into()),
            reviews: true,
            endpoint: Endpoint::from_env(),
            ..RunOptions::default()
        }
    }
}

pub struct SimOutcome {
    pub state: SimState,
    /// Round-0 baseline metrics.
    pub baseline: Vec<MetricRow>,
    pub reports: Vec<RoundReport>,
}

impl SimOutcome {
    /// Metric series over rounds 0..=T.
    pub fn series(&self, metric: &str) -> Vec<(u32, Real)> {
        self.baseline
            .iter()
            .chain(self.reports.iter().flat_map(|r| r.metrics.iter()))
            .filter(|m| m.metric == metric)
            .map(|m| (m.round, m.value))
            .collect()
    }
}

struct Sink {
    dir: PathBuf,
    events: BufWriter<File>,
    metrics: csv::Writer<File>,
    reviews: Option<ReviewWriter>,
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

impl Sink {
    fn open(dir: &Path, opts: &RunOptions) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let events = BufWriter::new(create(&dir.join("events.jsonl"))?);
        let mpath = dir.join("metrics_round.csv");
        let mut metrics = csv::Writer::from_writer(create(&mpath)?);
        metrics.write_record(METRICS_HEADER).map_err(|e| Error::InvalidInput(format!("{}: {e}", mpath.display())))?;
        let reviews = if opts.reviews {
            Some(ReviewWriter::spawn(&dir.join("reviews.jsonl"), opts.endpoint.clone())?)
        } else {
            None
        };
        Ok(Sink {
            dir: dir.to_path_buf(),
            events,
            metrics,
            reviews,
        })
    }

    fn metrics(&mut self, rows: &[MetricRow]) -> Result<()> {
        let path = self.dir.join("metrics_round.csv");
        for r in rows {
            self.metrics
                .write_record([r.round.to_string(), r.metric.clone(), r.model.clone(), r.value.to_string()])
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        }
        self.metrics.flush().map_err(|e| Error::io(&path, e))
    }

    fn round(&mut self, state: &SimState, report: &RoundReport) -> Result<()> {
        let path = self.dir.join("events.jsonl");
        for rec in &report.records {
            writeln!(self.events, "{}", rec.to_json_line()).map_err(|e| Error::io(&path, e))?;
            if let (Some(w), true) = (&self.reviews, rec.watched()) {
                w.submit(review_context(state, rec));
            }
        }
        self.events.flush().map_err(|e| Error::io(&path, e))?;
        self.metrics(&report.metrics)
    }

    fn close(self) -> Result<()> {
        if let Some(w) = self.reviews {
            let n = w.finish()?;
            info!("wrote {n} reviews");
        }
        Ok(())
    }
}

fn review_context(state: &SimState, rec: &DecisionRecord) -> ReviewContext {
    let p = &state.profiles[rec.agent.index()];
    let circle = match rec.source {
        Source::System => Circle::Public,
        Source::Agent(v) => Circle::from_layer_weights(Some(state.graph.pair_weights(rec.agent.index(), v.index()))),
    };
    let item = state.items.get(rec.item).expect("recorded item exists");
    ReviewContext::new(rec.clone(), item, p.valence, circle, p.demographics.language.as_deref())
}

/// Builds the initial state from `cfg` and runs `cfg.rounds` rounds.
pub fn run_simulation(cfg: &SimConfig, opts: &RunOptions) -> Result<SimOutcome> {
    let inputs = load_inputs(cfg)?;
    let (state, _) = build_state(cfg, &inputs)?;
    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let p = dir.join("effective_config.toml");
        std::fs::write(&p, cfg.to_toml()).map_err(|e| Error::io(&p, e))?;
        io::write_profiles_csv(&dir.join("profiles_initial.csv"), &state.profiles)?;
    }
    continue_run(state, cfg, opts, true)
}

/// Continues a snapshotted run until `rounds` total rounds are complete.
///
/// The snapshot's own config is used with `rounds` replaced. Artifacts in
/// `opts.out_dir` cover only the continued rounds.
pub fn resume(snapshot_path: &Path, rounds: u32, opts: &RunOptions) -> Result<SimOutcome> {
    let (state, mut cfg) = read_snapshot(snapshot_path)?;
    cfg.rounds = rounds;
    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let p = dir.join("effective_config.toml");
        std::fs::write(&p, cfg.to_toml()).map_err(|e| Error::io(&p, e))?;
    }
    continue_run(state, &cfg, opts, false)
}

fn continue_run(mut state: SimState, cfg: &SimConfig, opts: &RunOptions, fresh: bool) -> Result<SimOutcome> {
    let mut sink = opts.out_dir.as_deref().map(|d| Sink::open(d, opts)).transpose()?;
    let baseline = if fresh { probe(&mut state, cfg)? } else { Vec::new() };
    if let Some(s) = &mut sink {
        s.metrics(&baseline)?;
    }
    let mut reports = Vec::new();
    while state.round < cfg.rounds {
        let report = run_round(&mut state, cfg)?;
        info!(
            "round {}: {} decisions, {} pending shares",
            report.round,
            report.records.len(),
            state.pending()
        );
        if let Some(s) = &mut sink {
            s.round(&state, &report)?;
            if opts.snapshot_at.contains(&report.round) {
                write_snapshot(&s.dir.join(format!("snapshot_round_{:04}.bin", report.round)), &state, cfg)?;
            }
        }
        reports.push(report);
    }
    if let Some(s) = sink {
        let dir = s.dir.clone();
        s.close()?;
        write_snapshot(&dir.join("snapshot_final.bin"), &state, cfg)?;
        state.expire_all();
        io::write_profiles_csv(&dir.join("profiles_final.csv"), &state.profiles)?;
        io::write_graph_csv(&dir.join("graph_final.csv"), &state.graph)?;
    } else {
        state.expire_all();
    }
    if state.shares.enqueued != state.shares.delivered + state.shares.duplicate + state.shares.expired {
        warn!("share accounting mismatch: {:?}", state.shares);
    }
    Ok(SimOutcome { state, baseline, reports })
}

/// Per-round behaviour metrics recomputed from an event log.
///
/// System recommendations of each round form `R_u`; a watched item scores its
/// rating, a skipped one 0. Personality change is reported at the last round.
pub fn evaluate_events(
    events: &[DecisionRecord],
    n_agents: usize,
    initial: &BTreeMap<AgentId, BigFive>,
    final_: &BTreeMap<AgentId, BigFive>,
) -> Result<Vec<MetricRow>> {
    let mut by_round: BTreeMap<u32, Vec<&DecisionRecord>> = BTreeMap::new();
    for e in events {
        if e.agent.index() >= n_agents {
            return Err(Error::InvalidInput(format!("event for agent {} outside population of {n_agents}", e.agent)));
        }
        by_round.entry(e.t).or_default().push(e);
    }
    let row = |round, metric: &str, value| MetricRow {
        round,
        metric: metric.to_string(),
        model: "events".to_string(),
        value,
    };
    let mut rows = Vec::new();
    for (&t, recs) in &by_round {
        let mut scores: metrics::ScoreTable = vec![BTreeMap::new(); n_agents];
        let mut recommended = vec![Vec::new(); n_agents];
        for r in recs.iter().filter(|r| r.source == Source::System) {
            recommended[r.agent.index()].push(r.item);
            scores[r.agent.index()].insert(r.item, r.rating.unwrap_or(0));
        }
        rows.push(row(t, "acceptance_rate", metrics::acceptance_rate(&scores, &recommended)));
        if let Ok(v) = metrics::satisfaction_ratio(&scores) {
            rows.push(row(t, "satisfaction_ratio", v));
        }
        rows.push(row(t, "negative_review_rate", metrics::negative_review_rate(&scores, &recommended)));
        let shares: usize = recs.iter().map(|r| r.shares.len()).sum();
        rows.push(row(t, "shares", shares as Real));
    }
    if let Some(&last) = by_round.keys().last() {
        rows.push(row(last, "personality_change", metrics::personality_change(initial, final_)?));
    }
    Ok(rows)
}

pub fn read_events(path: &Path) -> Result<Vec<DecisionRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            serde_json::from_str(l).map_err(|e| Error::Schema {
                path: path.to_path_buf(),
                line: k + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
