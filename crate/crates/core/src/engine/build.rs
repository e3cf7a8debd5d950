//! Initial state: inputs, inferred personalities, profiles and the layered graph.

use std::collections::BTreeMap;

use log::{info, warn};
use rand::RngCore;

use super::SimState;
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::graph::{self, LayerWeights, LayeredGraph, Topology};
use crate::io::{self, synth_population, NodeRecord, RatingRow};
use crate::model::{AgentId, AgentProfile, ItemCatalog, ItemId};
use crate::personality::{self, FitReport, Regressor, RegressorParams};
use crate::recommenders::InteractionMatrix;
use crate::rng::{seeded_rng, Purpose};
use crate::Real;

/// Raw inputs of a run, either loaded from disk or synthesized.
#[derive(Debug, Clone, PartialEq)]
pub struct Inputs {
    pub items: ItemCatalog,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<(u32, u32)>,
    pub ratings: Vec<RatingRow>,
    pub labels: BTreeMap<u32, [Real; 5]>,
}

impl Inputs {
    /// A catalog of `m_items` synthetic items and nobody to watch them.
    pub fn empty(m_items: usize, cfg: &SimConfig) -> Result<Self> {
        let mut p = cfg.population.clone();
        p.n_agents = 1;
        p.m_items = m_items;
        let f = synth_population(&p, cfg.rng_seed)?;
        Ok(Inputs {
            items: f.items,
            nodes: Vec::new(),
            edges: Vec::new(),
            ratings: Vec::new(),
            labels: BTreeMap::new(),
        })
    }
}

fn required<'a>(field: &str, p: &'a Option<std::path::PathBuf>) -> Result<&'a std::path::Path> {
    p.as_deref()
        .ok_or_else(|| Error::constraint(field, "required when population.synthetic = false"))
}

/// Synthesizes the fixture or reads `[io]` paths, per `population.synthetic`.
pub fn load_inputs(cfg: &SimConfig) -> Result<Inputs> {
    if cfg.population.synthetic {
        let f = synth_population(&cfg.population, cfg.rng_seed)?;
        return Ok(Inputs {
            items: f.items,
            nodes: f.nodes,
            edges: f.edges,
            ratings: f.ratings,
            labels: f.labels,
        });
    }
    let items = io::load_items(required("io.items", &cfg.io.items)?)?;
    let ratings = io::load_ratings(required("io.ratings", &cfg.io.ratings)?, &items)?;
    if ratings.duplicates > 0 {
        warn!("{} duplicate ratings superseded", ratings.duplicates);
    }
    let items = io::with_rating_stats(items, &ratings.rows)?;
    let nodes = io::load_nodes(required("io.nodes", &cfg.io.nodes)?)?;
    let edges = io::load_edges(required("io.edges", &cfg.io.edges)?, nodes.len())?;
    let labels = match &cfg.io.labels {
        Some(p) => io::load_labels(p)?,
        None => BTreeMap::new(),
    };
    Ok(Inputs {
        items,
        nodes,
        edges,
        ratings: ratings.rows,
        labels,
    })
}

/// How each agent's traits were obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonalityReport {
    pub fit: Option<FitReport>,
    pub labeled: usize,
    pub from_behavior: usize,
    pub from_structure: usize,
    pub neutral: usize,
}

fn ratings_by_user(ratings: &[RatingRow]) -> BTreeMap<u32, Vec<(ItemId, u8)>> {
    let mut out: BTreeMap<u32, Vec<(ItemId, u8)>> = BTreeMap::new();
    for r in ratings {
        out.entry(r.user_id).or_default().push((r.item_id, r.rating));
    }
    out
}

/// Builds one profile per node.
///
/// Labeled agents keep their labels. Otherwise traits are predicted by a
/// regressor trained on labeled raters: from the agent's own behavioural
/// features when it has ratings, else from structural features mapped into
/// the behavioural space. Without enough labels traits stay at 0.5.
pub fn infer_profiles(cfg: &SimConfig, inputs: &Inputs) -> Result<(Vec<AgentProfile>, PersonalityReport)> {
    let n = inputs.nodes.len();
    let topology = Topology::from_edges(n, &inputs.edges)?;
    let by_user = ratings_by_user(&inputs.ratings);
    let means: Vec<Real> = inputs.items.iter().map(|i| i.rating_mean).collect();
    let pops: Vec<u32> = inputs.items.iter().map(|i| i.popularity).collect();
    let features = |rs: &[(ItemId, u8)]| personality::behavioral_features(rs, &inputs.items, &means, &pops).map(|f| f.to_array().to_vec());

    let mut x = Vec::new();
    let mut y = Vec::new();
    for (uid, label) in &inputs.labels {
        if let Some(rs) = by_user.get(uid) {
            x.push(features(rs)?);
            y.push(*label);
        }
    }
    let mut model = Regressor::new(RegressorParams::from(&cfg.personality));
    let seed = seeded_rng(cfg.rng_seed).substream(Purpose::Regressor, 0, 0).next_u64();
    let fit = if x.len() >= personality::MIN_TRAINING_ROWS {
        let report = model.fit(&x, &y, seed)?;
        info!("regressor: {} train rows, holdout rmse {:?}", report.train_rows, report.rmse);
        Some(report)
    } else {
        if !x.is_empty() {
            warn!("{} labeled raters; too few to fit the trait regressor", x.len());
        }
        None
    };

    let social: Vec<Option<u32>> = inputs.nodes.iter().map(|nd| personality::social_label(&nd.attributes)).collect();
    let bridged = if fit.is_some() && n > 0 {
        personality::bridge_structural(&personality::structural_features(&topology, &social, cfg.graph.pagerank_damping)?)
    } else {
        Vec::new()
    };

    let mut report = PersonalityReport {
        fit,
        labeled: 0,
        from_behavior: 0,
        from_structure: 0,
        neutral: 0,
    };
    let mut profiles = Vec::with_capacity(n);
    for (u, node) in inputs.nodes.iter().enumerate() {
        let uid = u as u32;
        let rs = by_user.get(&uid).map(Vec::as_slice).unwrap_or(&[]);
        let b = if let Some(l) = inputs.labels.get(&uid) {
            report.labeled += 1;
            *l
        } else if model.is_fitted() && !rs.is_empty() {
            report.from_behavior += 1;
            model.predict(&features(rs)?)?
        } else if model.is_fitted() {
            report.from_structure += 1;
            model.predict_standardized(&bridged[u])?
        } else {
            report.neutral += 1;
            [0.5; 5]
        };
        let mut t = node.attributes.clone();
        t.degree = topology.degree(u) as u32;
        let tags = personality::interest_tags(rs, &inputs.items, cfg.graph.tag_min_count);
        profiles.push(personality::assemble_profile(
            AgentId(uid),
            t,
            b.map(|v| v.clamp(0.0, 1.0)),
            node.demographics.clone(),
            tags,
            &inputs.items,
            cfg,
        )?);
    }

    if let Some(path) = &cfg.io.profiles {
        for (id, t, b) in io::load_profiles_csv(path)? {
            let p = profiles.get_mut(id.index()).ok_or_else(|| Error::DanglingReference {
                path: path.clone(),
                id: format!("node {id}"),
            })?;
            p.t = t;
            p.b = b;
        }
    }
    Ok((profiles, report))
}

/// Builds the three layers over the friendship topology and fuses them.
pub fn build_graph(cfg: &SimConfig, profiles: &[AgentProfile], edges: &[(u32, u32)]) -> Result<LayeredGraph<Real>> {
    let n = profiles.len();
    let topology = Topology::from_edges(n, edges)?;
    let tags: Vec<_> = profiles.iter().map(|p| p.interest_tags.clone()).collect();
    let traits: Vec<[Real; 5]> = profiles.iter().map(|p| p.b.0).collect();
    let attrs: Vec<_> = profiles.iter().map(|p| p.t.clone()).collect();
    let g = &cfg.graph;
    LayeredGraph::new(
        graph::build_interest_layer(&tags, g.interest_top_k),
        graph::build_personality_layer(&traits, &topology),
        graph::build_structural_layer(&attrs, &topology),
        LayerWeights::new(g.alpha_g, g.beta_g, g.gamma_g)?,
    )
}

/// Profiles, graph and seed interactions at round 0.
///
/// Ratings by users who are also agents become round-0 interactions; every
/// rating already feeds the item statistics.
pub fn build_state(cfg: &SimConfig, inputs: &Inputs) -> Result<(SimState, PersonalityReport)> {
    let (profiles, report) = infer_profiles(cfg, inputs)?;
    let graph = build_graph(cfg, &profiles, &inputs.edges)?;
    let n = profiles.len();
    let mut interactions = InteractionMatrix::new(n, inputs.items.len());
    for r in inputs.ratings.iter().filter(|r| (r.user_id as usize) < n) {
        interactions.try_record(AgentId(r.user_id), r.item_id, r.rating, 0)?;
    }
    let state = SimState::new(cfg.rng_seed, profiles, inputs.items.clone(), graph, interactions)?;
    Ok((state, report))
}
