#![allow(dead_code)]

use std::path::Path;

use ggbond::config::RecommenderKind;
use ggbond::engine::RunOptions;
use ggbond::SimConfig;

pub fn small_cfg(n: usize, m: usize, rounds: u32) -> SimConfig {
    let mut cfg = SimConfig::default();
    cfg.rounds = rounds;
    cfg.population.n_agents = n;
    cfg.population.m_items = m;
    cfg.population.seed_ratings_per_agent = 6;
    cfg.recommender.kind = RecommenderKind::Mf;
    cfg.recommender.mf_epochs = 10;
    cfg.personality.epochs = 50;
    cfg
}

pub fn opts(dir: &Path, snapshot_at: Vec<u32>) -> RunOptions {
    RunOptions {
        out_dir: Some(dir.to_path_buf()),
        snapshot_at,
        reviews: false,
        endpoint: None,
    }
}
