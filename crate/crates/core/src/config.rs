//! Simulation configuration: TOML schema, defaults and validation.
//!
//! Every numeric field has a default, so an empty file is a valid config.
//! [`SimConfig::to_toml`] writes every field explicitly, which is what the
//! `effective_config.toml` dump contains.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

/// Environment variable overriding `rng_seed`.
pub const SEED_ENV: &str = "GGBOND_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub rounds: u32,
    #[serde(with = "seed_repr")]
    pub rng_seed: u64,
    /// Rounds a peer share may wait in a queue before it expires.
    pub share_expiry_rounds: u32,
    pub motivation: MotivationConfig,
    pub affect: AffectConfig,
    pub graph: GraphConfig,
    pub personality: PersonalityConfig,
    pub recommender: RecommenderConfig,
    pub population: PopulationConfig,
    pub io: IoConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            rounds: 30,
            rng_seed: 42,
            share_expiry_rounds: 2,
            motivation: MotivationConfig::default(),
            affect: AffectConfig::default(),
            graph: GraphConfig::default(),
            personality: PersonalityConfig::default(),
            recommender: RecommenderConfig::default(),
            population: PopulationConfig::default(),
            io: IoConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotivationConfig {
    pub alpha: Real,
    pub beta: Real,
    pub gamma: Real,
    pub delta: Real,
    pub kappa: Real,
    pub theta0: Real,
    pub tau: Real,
    pub risk_base: Real,
    pub lambda_demo: Real,
    pub lambda_pref: Real,
    pub rho_i: Real,
    pub rho_r: Real,
    /// Upper bound of a stored tie after reinforcement.
    pub i_max: Real,
    pub k_share: usize,
}

impl Default for MotivationConfig {
    fn default() -> Self {
        MotivationConfig {
            alpha: 0.40,
            beta: 0.35,
            gamma: 0.20,
            delta: 0.25,
            kappa: 0.2,
            theta0: 0.5,
            tau: 0.1,
            risk_base: 0.1,
            lambda_demo: 0.5,
            lambda_pref: 0.5,
            rho_i: 0.05,
            rho_r: 0.05,
            i_max: 1.0,
            k_share: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AffectConfig {
    pub sigma_v: Real,
    pub sigma_a: Real,
    /// Preference smoothing rate.
    pub eta: Real,
    /// Memory forgetting rate per timestep.
    pub lambda_mem: Real,
    pub lambda_lang: Real,
    pub sigma_rating: Real,
    /// Personality drift rate on satisfying peer shares.
    pub eta_b: Real,
}

impl Default for AffectConfig {
    fn default() -> Self {
        AffectConfig {
            sigma_v: 0.3,
            sigma_a: 0.2,
            eta: 0.1,
            lambda_mem: 0.05,
            lambda_lang: 0.3,
            sigma_rating: 0.5,
            eta_b: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub alpha_g: Real,
    pub beta_g: Real,
    pub gamma_g: Real,
    /// Inter-layer factors for structural intimacy, ordered interest, personality, structural.
    pub layer_decay: [Real; 3],
    pub share_step: Real,
    pub interest_top_k: usize,
    pub pagerank_damping: Real,
    /// Minimum number of positively rated items of a genre for it to become an interest tag.
    pub tag_min_count: usize,
    pub default_genre_arousal: Real,
    pub genre_arousal: BTreeMap<String, Real>,
}

impl Default for GraphConfig {
    fn default() -> Self {
        let genre_arousal = [("horror", 0.9), ("war", 0.8), ("thriller", 0.7), ("action", 0.5)]
            .into_iter()
            .map(|(g, v)| (g.to_string(), v))
            .collect();
        GraphConfig {
            alpha_g: 0.4,
            beta_g: 0.3,
            gamma_g: 0.3,
            layer_decay: [1.0; 3],
            share_step: 0.05,
            interest_top_k: 5,
            pagerank_damping: 0.85,
            tag_min_count: 2,
            default_genre_arousal: 0.2,
            genre_arousal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PersonalityConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: Real,
    pub holdout_fraction: Real,
}

impl Default for PersonalityConfig {
    fn default() -> Self {
        PersonalityConfig {
            hidden: 16,
            epochs: 2000,
            learning_rate: 0.01,
            holdout_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecommenderKind {
    Mf,
    Lightgcn,
    Popularity,
}

impl RecommenderKind {
    pub fn name(self) -> &'static str {
        match self {
            RecommenderKind::Mf => "mf",
            RecommenderKind::Lightgcn => "lightgcn",
            RecommenderKind::Popularity => "popularity",
        }
    }
}

impl std::str::FromStr for RecommenderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mf" => Ok(RecommenderKind::Mf),
            "lightgcn" => Ok(RecommenderKind::Lightgcn),
            "popularity" => Ok(RecommenderKind::Popularity),
            other => Err(Error::constraint("recommender.kind", format!("unknown kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecommenderConfig {
    pub kind: RecommenderKind,
    /// Length of ranked lists used for evaluation.
    pub top_k: usize,
    /// System recommendations delivered to each agent per round.
    pub stimuli_per_round: usize,
    /// Expected rating at or above which an unconsumed item counts as relevant.
    pub relevance_threshold: Real,
    pub mf_factors: usize,
    pub mf_epochs: usize,
    pub mf_lr: Real,
    pub mf_reg: Real,
    pub gcn_factors: usize,
    pub gcn_layers: usize,
    pub gcn_epochs: usize,
    pub gcn_lr: Real,
    pub gcn_reg: Real,
}

impl Default for RecommenderConfig {
    fn default() -> Self {
        RecommenderConfig {
            kind: RecommenderKind::Lightgcn,
            top_k: 20,
            stimuli_per_round: 20,
            relevance_threshold: 4.0,
            mf_factors: 8,
            mf_epochs: 40,
            mf_lr: 0.02,
            mf_reg: 0.02,
            gcn_factors: 16,
            gcn_layers: 2,
            gcn_epochs: 60,
            gcn_lr: 0.05,
            gcn_reg: 1e-4,
        }
    }
}

/// Parameters of the synthetic planted-community population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationConfig {
    pub synthetic: bool,
    pub n_agents: usize,
    pub m_items: usize,
    pub communities: usize,
    pub intra_edge_prob: Real,
    pub inter_edge_prob: Real,
    pub seed_ratings_per_agent: usize,
    /// Probability that a seed rating targets one of the agent's favoured genres.
    pub favoured_share: Real,
    pub embedding_noise: Real,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        PopulationConfig {
            synthetic: true,
            n_agents: 200,
            m_items: 500,
            communities: 4,
            intra_edge_prob: 0.2,
            inter_edge_prob: 0.01,
            seed_ratings_per_agent: 15,
            favoured_share: 0.7,
            embedding_noise: 0.3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    pub ratings: Option<PathBuf>,
    pub items: Option<PathBuf>,
    pub nodes: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub profiles: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl SimConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Reads, applies the seed override from the environment and validates.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_toml_str(&text)?;
        cfg.with_env_overrides()?.validate()
    }

    pub fn with_env_overrides(mut self) -> Result<Self> {
        if let Ok(seed) = std::env::var(SEED_ENV) {
            self.rng_seed = seed
                .trim()
                .parse()
                .map_err(|_| Error::constraint("rng_seed", format!("{SEED_ENV}=`{seed}` is not a u64")))?;
        }
        Ok(self)
    }

    pub fn validate(self) -> Result<Self> {
        validate_config(self)
    }
}

/// TOML integers are signed 64-bit; seeds above `i64::MAX` are written as strings.
mod seed_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => u64::try_from(v).map_err(serde::de::Error::custom),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn finite(field: &str, v: Real) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::constraint(field, "must be finite"))
    }
}

fn non_negative(field: &str, v: Real) -> Result<()> {
    finite(field, v)?;
    if v < 0.0 {
        return Err(Error::constraint(field, format!("must be >= 0, got {v}")));
    }
    Ok(())
}

fn positive(field: &str, v: Real) -> Result<()> {
    finite(field, v)?;
    if v <= 0.0 {
        return Err(Error::constraint(field, format!("must be > 0, got {v}")));
    }
    Ok(())
}

fn in_range(field: &str, v: Real, lo: Real, hi: Real) -> Result<()> {
    finite(field, v)?;
    if v < lo || v > hi {
        return Err(Error::constraint(field, format!("must lie in [{lo}, {hi}], got {v}")));
    }
    Ok(())
}

/// Checks every config invariant, returning the config unchanged on success.
pub fn validate_config(cfg: SimConfig) -> Result<SimConfig> {
    let m = &cfg.motivation;
    positive("motivation.alpha", m.alpha)?;
    positive("motivation.beta", m.beta)?;
    positive("motivation.gamma", m.gamma)?;
    positive("motivation.delta", m.delta)?;
    non_negative("motivation.kappa", m.kappa)?;
    finite("motivation.theta0", m.theta0)?;
    positive("motivation.tau", m.tau)?;
    in_range("motivation.risk_base", m.risk_base, 0.0, 0.5)?;
    non_negative("motivation.lambda_demo", m.lambda_demo)?;
    non_negative("motivation.lambda_pref", m.lambda_pref)?;
    non_negative("motivation.rho_i", m.rho_i)?;
    non_negative("motivation.rho_r", m.rho_r)?;
    positive("motivation.i_max", m.i_max)?;

    let a = &cfg.affect;
    non_negative("affect.sigma_v", a.sigma_v)?;
    non_negative("affect.sigma_a", a.sigma_a)?;
    in_range("affect.eta", a.eta, 0.0, 1.0)?;
    non_negative("affect.lambda_mem", a.lambda_mem)?;
    non_negative("affect.lambda_lang", a.lambda_lang)?;
    non_negative("affect.sigma_rating", a.sigma_rating)?;
    in_range("affect.eta_b", a.eta_b, 0.0, 1.0)?;

    let g = &cfg.graph;
    non_negative("graph.alpha_g", g.alpha_g)?;
    non_negative("graph.beta_g", g.beta_g)?;
    non_negative("graph.gamma_g", g.gamma_g)?;
    let sum = g.alpha_g + g.beta_g + g.gamma_g;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::constraint(
            "graph.alpha_g+beta_g+gamma_g",
            format!("layer weights must sum to 1, got {sum}"),
        ));
    }
    for (i, f) in g.layer_decay.iter().enumerate() {
        non_negative(&format!("graph.layer_decay[{i}]"), *f)?;
    }
    in_range("graph.share_step", g.share_step, 0.0, 1.0)?;
    if g.interest_top_k == 0 {
        return Err(Error::constraint("graph.interest_top_k", "must be >= 1"));
    }
    if !(g.pagerank_damping > 0.0 && g.pagerank_damping < 1.0) {
        return Err(Error::constraint("graph.pagerank_damping", "must lie in (0, 1)"));
    }
    in_range("graph.default_genre_arousal", g.default_genre_arousal, 0.0, 1.0)?;
    for (genre, v) in &g.genre_arousal {
        in_range(&format!("graph.genre_arousal.{genre}"), *v, 0.0, 1.0)?;
    }

    let p = &cfg.personality;
    if p.hidden == 0 {
        return Err(Error::constraint("personality.hidden", "must be >= 1"));
    }
    positive("personality.learning_rate", p.learning_rate)?;
    if !(p.holdout_fraction > 0.0 && p.holdout_fraction < 1.0) {
        return Err(Error::constraint("personality.holdout_fraction", "must lie in (0, 1)"));
    }

    let r = &cfg.recommender;
    if r.top_k == 0 {
        return Err(Error::constraint("recommender.top_k", "must be >= 1"));
    }
    if r.mf_factors == 0 || r.gcn_factors == 0 {
        return Err(Error::constraint("recommender.factors", "must be >= 1"));
    }
    in_range("recommender.relevance_threshold", r.relevance_threshold, 1.0, 5.0)?;
    non_negative("recommender.mf_lr", r.mf_lr)?;
    non_negative("recommender.mf_reg", r.mf_reg)?;
    non_negative("recommender.gcn_lr", r.gcn_lr)?;
    non_negative("recommender.gcn_reg", r.gcn_reg)?;

    let pop = &cfg.population;
    if pop.communities == 0 {
        return Err(Error::constraint("population.communities", "must be >= 1"));
    }
    in_range("population.intra_edge_prob", pop.intra_edge_prob, 0.0, 1.0)?;
    in_range("population.inter_edge_prob", pop.inter_edge_prob, 0.0, 1.0)?;
    in_range("population.favoured_share", pop.favoured_share, 0.0, 1.0)?;
    non_negative("population.embedding_noise", pop.embedding_noise)?;
    Ok(cfg)
}
