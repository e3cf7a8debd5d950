//! Rating-consistency experiment on the synthetic population.
//!
//! The fixture's generator stands in for human raters: each agent's planted
//! preference and the rating noise produce the reference distribution over a
//! set of target items. An interacting society runs a few rounds and then
//! rates the targets; a static control built from the same initial state rates
//! them without any interaction. Both are compared with the reference.

use super::{build_state, probe, run_round, Inputs, SimState};
use crate::behavior::{expected_rating, sample_rating};
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::io::synth_population;
use crate::metrics::{emd_ratings, kl_divergence, rating_histogram};
use crate::model::ItemId;
use crate::rng::{seeded_rng, Purpose};
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyOutcome {
    pub seed: u64,
    pub human: [Real; 5],
    pub interacting: [Real; 5],
    pub control: [Real; 5],
    pub emd_interacting: Real,
    pub emd_control: Real,
    pub kl_interacting: Real,
    pub kl_control: Real,
}

fn target_items(m: usize, count: usize) -> Vec<ItemId> {
    let stride = (m / count.max(1)).max(1);
    (0..m).step_by(stride).take(count).map(|i| ItemId(i as u32)).collect()
}

/// Pooled ratings of `targets` by every agent, drawn from `(Consistency, u, 1)`.
fn society_ratings(state: &SimState, targets: &[ItemId]) -> Vec<u8> {
    let root = seeded_rng(state.seed);
    let mut out = Vec::new();
    for (u, p) in state.profiles.iter().enumerate() {
        let mut rng = root.substream(Purpose::Consistency, u as u64, 1);
        for &i in targets {
            let e = &state.items.get(i).expect("target exists").embedding;
            out.push(sample_rating(expected_rating(&p.pref, e), p.sigma_rating, &mut rng));
        }
    }
    out
}

/// Runs the experiment for `cfg.rng_seed` with `rounds` interaction rounds.
pub fn consistency_experiment(cfg: &SimConfig, rounds: u32, n_targets: usize) -> Result<ConsistencyOutcome> {
    if !cfg.population.synthetic {
        return Err(Error::constraint("population.synthetic", "the consistency experiment needs the synthetic population"));
    }
    let f = synth_population(&cfg.population, cfg.rng_seed)?;
    let targets = target_items(f.items.len(), n_targets);
    let root = seeded_rng(cfg.rng_seed);
    let mut human = Vec::new();
    for (u, planted) in f.planted_pref.iter().enumerate() {
        let mut rng = root.substream(Purpose::Consistency, u as u64, 0);
        for &i in &targets {
            let e = &f.items.get(i).expect("target exists").embedding;
            human.push(sample_rating(expected_rating(planted, e), cfg.affect.sigma_rating, &mut rng));
        }
    }
    let inputs = Inputs {
        items: f.items,
        nodes: f.nodes,
        edges: f.edges,
        ratings: f.ratings,
        labels: f.labels,
    };
    let (control, _) = build_state(cfg, &inputs)?;
    let mut society = control.clone();
    probe(&mut society, cfg)?;
    for _ in 0..rounds {
        run_round(&mut society, cfg)?;
    }

    let h = rating_histogram(human);
    let gi = rating_histogram(society_ratings(&society, &targets));
    let gc = rating_histogram(society_ratings(&control, &targets));
    Ok(ConsistencyOutcome {
        seed: cfg.rng_seed,
        human: h,
        interacting: gi,
        control: gc,
        emd_interacting: emd_ratings(&h, &gi)?,
        emd_control: emd_ratings(&h, &gc)?,
        kl_interacting: kl_divergence(&h, &gi)?,
        kl_control: kl_divergence(&h, &gc)?,
    })
}
