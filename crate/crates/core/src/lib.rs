//! A deterministic social agent simulator for closed-loop
//! recommender evaluation.

pub mod behavior;
pub mod cognition;
pub mod config;
pub mod engine;
pub mod error;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod model;
pub mod motivation;
pub mod personality;
pub mod recommenders;
pub mod rng;
pub mod scalar;
pub mod social;
pub mod textgen;

/// Scalar used by the stateful simulation types.
pub type Real = f64;

pub use config::SimConfig;
pub use engine::{run_round, run_simulation, RoundReport, RunOptions, SimOutcome, SimState};
pub use error::{Error, Result};
pub use model::{AgentId, AgentProfile, BigFive, DecisionRecord, Item, ItemCatalog, ItemId, Source};
pub use rng::{seeded_rng, Purpose, RngStream};
pub use scalar::Scalar;

pub type Graph = graph::LayeredGraph<Real>;
