//! Behaviour execution: watch decisions, ratings, satisfaction, sharing,
//! personality drift, and the full per-stimulus decision cycle.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::cognition;
use crate::config::SimConfig;
use crate::engine::{PendingShare, SimState};
use crate::error::{Error, Result};
use crate::graph::Layer;
use crate::model::{Action, AgentId, DecisionRecord, Item, ItemId, Source};
use crate::motivation::{self, Coefficients};
use crate::scalar::{clamp, cosine, sigmoid, Scalar};
use crate::social::{self, RiskInputs};
use crate::Real;

pub fn watch_probability<T: Scalar>(c: T, theta: T, tau: T) -> T {
    sigmoid((c - theta) / tau)
}

/// Affine map of preference alignment onto the 1..5 rating scale.
pub fn expected_rating<T: Scalar>(pref: &[T], item: &[T]) -> T {
    clamp(T::lit(3.0) + T::lit(2.0) * cosine(pref, item), T::one(), T::lit(5.0))
}

/// Noisy integer rating around `expected`.
pub fn sample_rating<R: Rng + ?Sized>(expected: Real, sigma: Real, rng: &mut R) -> u8 {
    draw_rating(expected, sigma, rng).0
}

/// The reported integer rating together with the latent draw `expected + noise`.
pub fn draw_rating<R: Rng + ?Sized>(expected: Real, sigma: Real, rng: &mut R) -> (u8, Real) {
    let noise = if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("sigma is finite and positive").sample(rng)
    } else {
        0.0
    };
    let latent = expected + noise;
    (latent.round().clamp(1.0, 5.0) as u8, latent)
}

pub fn satisfaction<T: Scalar>(rating: T, expected: T) -> T {
    (rating - expected) / T::lit(4.0)
}

pub fn share_priority<T: Scalar>(intimacy: T, reciprocity: T, c: T) -> T {
    intimacy * reciprocity * clamp(c, T::zero(), T::one())
}

/// Top `k` candidates by priority, ties to the lower id, zero priorities dropped.
pub fn select_share_targets<T: Scalar>(candidates: &[(AgentId, T)], k: usize) -> Vec<AgentId> {
    let mut c: Vec<(AgentId, T)> = candidates.iter().copied().filter(|&(_, q)| q > T::zero()).collect();
    c.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite priority").then(a.0.cmp(&b.0)));
    c.into_iter().take(k).map(|(id, _)| id).collect()
}

/// Convex step of `b` toward the source's traits, gated on positive satisfaction.
pub fn personality_drift<T: Scalar>(b: &[T], b_source: &[T], satisfaction: T, eta_b: T) -> Vec<T> {
    let step = eta_b * satisfaction.max(T::zero());
    b.iter()
        .zip(b_source)
        .map(|(&x, &s)| clamp(x + step * (s - x), T::zero(), T::one()))
        .collect()
}

/// A candidate item delivered to an agent by the system or a peer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stimulus {
    pub source: Source,
    pub item: ItemId,
}

/// Factor values behind one decision, before any randomness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Appraisal {
    pub intimacy: Real,
    pub novelty: Real,
    pub reciprocity: Real,
    pub risk: Real,
    pub motivation: Real,
    pub theta: Real,
    pub p_watch: Real,
    pub expected_rating: Real,
}

pub(crate) fn coefficients(cfg: &SimConfig) -> Coefficients<Real> {
    Coefficients {
        alpha: cfg.motivation.alpha,
        beta: cfg.motivation.beta,
        gamma: cfg.motivation.gamma,
        delta: cfg.motivation.delta,
    }
}

/// Homophily-boosted intimacy between two agents.
pub fn pair_intimacy(state: &SimState, cfg: &SimConfig, u: AgentId, v: AgentId) -> Real {
    let w = state.graph.pair_weights(u.index(), v.index());
    let i_struct = social::structural_intimacy(&w, &cfg.graph.layer_decay);
    if i_struct == 0.0 {
        return 0.0;
    }
    let (pu, pv) = (&state.profiles[u.index()], &state.profiles[v.index()]);
    // Incomplete demographics contribute no homophily boost rather than aborting the run.
    let s_demo = social::demographic_similarity(&pu.demographics, &pv.demographics).unwrap_or(0.0);
    let s_pref = social::preference_similarity(pu.b.as_slice(), pv.b.as_slice(), &pu.interest_tags, &pv.interest_tags);
    social::intimacy(i_struct, s_demo, s_pref, cfg.motivation.lambda_demo, cfg.motivation.lambda_pref)
}

/// Reciprocity of the directed pair `from -> to`, as seen by `viewer`.
fn pair_reciprocity(state: &SimState, viewer: AgentId, other: AgentId, from: AgentId, to: AgentId, now: u32) -> Real {
    let (pv, po) = (&state.profiles[viewer.index()], &state.profiles[other.index()]);
    let recency = pv.memory.recency_weight(Source::Agent(other), now);
    social::reciprocity(
        recency,
        state.r_hist(from, to),
        social::reciprocity_potential(&pv.pref, &po.pref),
        social::personality_fit(pv.b.extraversion(), po.b.extraversion()),
    )
}

fn check_stimulus<'a>(state: &'a SimState, agent: AgentId, stimulus: Stimulus) -> Result<&'a Item> {
    if let Source::Agent(v) = stimulus.source {
        if v.index() >= state.profiles.len() || v == agent {
            return Err(Error::UnknownSource(stimulus.source));
        }
    }
    state.items.get(stimulus.item).ok_or(Error::UnknownItem(stimulus.item))
}

/// Evaluates every factor for `agent` facing `stimulus` without touching state.
pub fn appraise(state: &SimState, cfg: &SimConfig, agent: AgentId, stimulus: Stimulus, now: u32) -> Result<Appraisal> {
    let item = check_stimulus(state, agent, stimulus)?;
    let p = &state.profiles[agent.index()];
    let recency = p.memory.recency_weight(stimulus.source, now);
    let lang_mismatch = p.demographics.language.as_deref().is_some_and(|l| l != item.language);
    let novelty = cognition::novelty(&p.pref, &item.embedding, lang_mismatch, cfg.affect.lambda_lang);

    let (intimacy, reciprocity) = match stimulus.source {
        Source::System => (0.0, 0.0),
        Source::Agent(v) => (
            pair_intimacy(state, cfg, agent, v),
            pair_reciprocity(state, agent, v, v, agent, now),
        ),
    };
    let inputs = RiskInputs {
        length: social::normalized_length(item.length_minutes),
        genre_arousal: social::genre_arousal(&item.genres, &cfg.graph.genre_arousal, cfg.graph.default_genre_arousal),
        rating_variance: social::normalized_variance(item.rating_var),
        age_mismatch: social::age_mismatch(p.demographics.age_group, item.age_rating),
        language_gap: if lang_mismatch { 1.0 } else { 0.0 },
        trust: social::trust(&p.trust.get(stimulus.source)),
        intimacy,
        neuroticism: p.b.neuroticism(),
        recency,
    };
    let risk = social::risk(&inputs, p.risk_base);
    let c = motivation::motivation_score(intimacy, novelty, reciprocity, risk, &coefficients(cfg));
    let theta = motivation::decision_threshold(p.theta0, cfg.motivation.kappa, p.valence);
    Ok(Appraisal {
        intimacy,
        novelty,
        reciprocity,
        risk,
        motivation: c,
        theta,
        p_watch: watch_probability(c, theta, p.tau),
        expected_rating: expected_rating(&p.pref, &item.embedding),
    })
}

/// Watch decision and rating with no write-back. Used for metric probes.
pub fn probe_decision<R: Rng + ?Sized>(
    state: &SimState,
    cfg: &SimConfig,
    agent: AgentId,
    stimulus: Stimulus,
    now: u32,
    rng: &mut R,
) -> Result<Option<u8>> {
    let a = appraise(state, cfg, agent, stimulus, now)?;
    let u: Real = rng.random();
    if u < a.p_watch {
        Ok(Some(sample_rating(a.expected_rating, state.profiles[agent.index()].sigma_rating, rng)))
    } else {
        Ok(None)
    }
}

/// One full decision cycle for `agent` facing `stimulus` at time `now`.
///
/// Every write-back (memory, affect, preference, trust, ties, drift, share
/// edges and queued shares) is applied to `state` before returning.
pub fn execute_step<R: Rng + ?Sized>(
    state: &mut SimState,
    cfg: &SimConfig,
    agent: AgentId,
    stimulus: Stimulus,
    now: u32,
    rng: &mut R,
) -> Result<DecisionRecord> {
    let a = appraise(state, cfg, agent, stimulus, now)?;
    let draw: Real = rng.random();
    let mut record = DecisionRecord {
        t: now,
        agent,
        source: stimulus.source,
        item: stimulus.item,
        action: Action::Skip,
        motivation: a.motivation,
        intimacy: a.intimacy,
        novelty: a.novelty,
        reciprocity: a.reciprocity,
        risk: a.risk,
        theta: a.theta,
        rating: None,
        satisfaction: None,
        shares: Vec::new(),
    };
    if draw >= a.p_watch {
        state.profiles[agent.index()].trust.entry(stimulus.source).offer(false);
        return Ok(record);
    }

    let ui = agent.index();
    let (rating, latent) = draw_rating(a.expected_rating, state.profiles[ui].sigma_rating, rng);
    // Surprise is taken on the latent draw; the rounded, clamped rating would
    // bias it negative for items expected near the top of the scale.
    let m = clamp(satisfaction(latent, a.expected_rating), -1.0, 1.0);
    record.action = Action::Watch;
    record.rating = Some(rating);
    record.satisfaction = Some(m);

    let embedding = state.items.get(stimulus.item).expect("checked").embedding.clone();
    {
        let p = &mut state.profiles[ui];
        cognition::record_event(&mut p.memory, now, stimulus.source, stimulus.item, rating, m)?;
        let (v, ar) = cognition::update_affect(p.valence, p.arousal, m, cfg.affect.sigma_v, cfg.affect.sigma_a);
        p.valence = v;
        p.arousal = ar;
        p.pref = cognition::update_preference(&p.pref, &embedding, cfg.affect.eta)?;
        p.trust.entry(stimulus.source).offer(rating >= 3);
    }
    state.consumed[ui].insert(stimulus.item);
    state.interactions.record(agent, stimulus.item, rating, now);

    if let Source::Agent(v) = stimulus.source {
        let vi = v.index();
        let tie = state.graph.layer(Layer::Interest).get(ui, vi);
        let (tie2, hist2) = motivation::update_ties(
            tie,
            state.r_hist(v, agent),
            m,
            cfg.motivation.rho_i,
            cfg.motivation.rho_r,
            cfg.motivation.i_max,
        );
        state.graph.set_weight(Layer::Interest, ui, vi, tie2);
        state.set_r_hist(v, agent, hist2);
        if m > 0.0 {
            let drifted = personality_drift(state.profiles[ui].b.as_slice(), state.profiles[vi].b.as_slice(), m, cfg.affect.eta_b);
            state.profiles[ui].b.0.copy_from_slice(&drifted);
        }
    }

    let candidates: Vec<(AgentId, Real)> = state
        .graph
        .unified()
        .neighbors(ui)
        .map(|(v, _)| AgentId(v))
        .filter(|&v| Source::Agent(v) != stimulus.source)
        .map(|v| {
            let i = pair_intimacy(state, cfg, agent, v);
            let r = pair_reciprocity(state, agent, v, agent, v, now);
            (v, share_priority(i, r, a.motivation))
        })
        .collect();
    let targets = select_share_targets(&candidates, cfg.motivation.k_share);
    for &v in &targets {
        state.graph.record_share_edge(agent, v, now, cfg.graph.share_step)?;
        state.enqueue_share(PendingShare {
            from: agent,
            to: v,
            item: stimulus.item,
            created: now,
        });
    }
    record.shares = targets;
    Ok(record)
}
