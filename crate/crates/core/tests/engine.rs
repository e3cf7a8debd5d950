mod common;

use std::fs;

use common::{opts, small_cfg};
use ggbond::engine::{self, read_events, read_snapshot, SNAPSHOT_MAGIC};
use ggbond::{io, Error, SimConfig};

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_cfg(10, 24, 3);
    let out = engine::run_simulation(&cfg, &opts(dir.path(), vec![2])).unwrap();
    for f in [
        "events.jsonl",
        "metrics_round.csv",
        "profiles_initial.csv",
        "profiles_final.csv",
        "graph_final.csv",
        "effective_config.toml",
        "snapshot_round_0002.bin",
        "snapshot_final.bin",
    ] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let events = read_events(&dir.path().join("events.jsonl")).unwrap();
    let in_memory: usize = out.reports.iter().map(|r| r.records.len()).sum();
    assert_eq!(events.len(), in_memory);
    let back = SimConfig::load(&dir.path().join("effective_config.toml")).unwrap();
    assert_eq!(back, cfg);
    let snap = fs::read(dir.path().join("snapshot_final.bin")).unwrap();
    assert_eq!(&snap[..8], SNAPSHOT_MAGIC);
}

#[test]
fn metrics_table_has_baseline_and_every_round() {
    let dir = tempfile::tempdir().unwrap();
    engine::run_simulation(&small_cfg(10, 24, 4), &opts(dir.path(), vec![])).unwrap();
    let text = fs::read_to_string(dir.path().join("metrics_round.csv")).unwrap();
    let rounds: std::collections::BTreeSet<&str> = text
        .lines()
        .skip(1)
        .filter(|l| l.contains("recall@20"))
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(rounds.len(), 5);
}

#[test]
fn identical_seeds_give_identical_logs_and_different_seeds_do_not() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_cfg(12, 30, 3);
    let mut other = cfg.clone();
    other.rng_seed += 1;
    for (name, c) in [("a", &cfg), ("b", &cfg), ("c", &other)] {
        engine::run_simulation(c, &opts(&tmp.path().join(name), vec![])).unwrap();
    }
    let read = |n: &str| fs::read(tmp.path().join(n).join("events.jsonl")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn resume_continues_the_uninterrupted_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_cfg(12, 30, 4);
    let full = engine::run_simulation(&cfg, &opts(&tmp.path().join("full"), vec![2])).unwrap();
    let snap = tmp.path().join("full").join("snapshot_round_0002.bin");
    let resumed = engine::resume(&snap, 4, &opts(&tmp.path().join("rest"), vec![])).unwrap();
    assert_eq!(resumed.state, full.state);
    assert_eq!(resumed.reports, full.reports[2..]);
    assert!(resumed.baseline.is_empty());
    let (state, restored_cfg) = read_snapshot(&snap).unwrap();
    assert_eq!(state.round, 2);
    assert_eq!(restored_cfg, cfg);
}

#[test]
fn corrupt_snapshot_file_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    engine::run_simulation(&small_cfg(6, 12, 1), &opts(tmp.path(), vec![])).unwrap();
    let path = tmp.path().join("snapshot_final.bin");
    let mut bytes = fs::read(&path).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x40;
    fs::write(&path, &bytes).unwrap();
    assert!(matches!(read_snapshot(&path), Err(Error::CorruptSnapshot(_))));
    assert!(matches!(engine::resume(&path, 3, &Default::default()), Err(Error::CorruptSnapshot(_))));
}

#[test]
fn shares_are_conserved_over_a_run() {
    let out = engine::run_simulation(&small_cfg(16, 40, 5), &Default::default()).unwrap();
    let s = out.state.shares;
    assert_eq!(s.enqueued, s.delivered + s.duplicate + s.expired);
    assert_eq!(out.state.pending(), 0);
}

#[test]
fn evaluation_from_disk_matches_the_event_log() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_cfg(10, 24, 3);
    let out = engine::run_simulation(&cfg, &opts(dir.path(), vec![])).unwrap();
    let events = read_events(&dir.path().join("events.jsonl")).unwrap();
    let to_map = |v: Vec<(ggbond::AgentId, _, ggbond::BigFive)>| v.into_iter().map(|(id, _, b)| (id, b)).collect();
    let initial = to_map(io::load_profiles_csv(&dir.path().join("profiles_initial.csv")).unwrap());
    let final_ = to_map(io::load_profiles_csv(&dir.path().join("profiles_final.csv")).unwrap());
    let rows = engine::evaluate_events(&events, 10, &initial, &final_).unwrap();
    let change = rows.iter().find(|r| r.metric == "personality_change").unwrap();
    assert_eq!(change.round, 3);
    let want = ggbond::metrics::personality_change(&out.state.initial_traits(), &out.state.traits()).unwrap();
    assert!((change.value - want).abs() < 1e-9);
    assert!(rows.iter().all(|r| r.value.is_finite()));
}

#[test]
fn report_reads_a_finished_run() {
    let dir = tempfile::tempdir().unwrap();
    engine::run_simulation(&small_cfg(8, 20, 2), &opts(dir.path(), vec![])).unwrap();
    let text = io::report(dir.path()).unwrap().to_text();
    assert!(text.contains("recall@20"));
}
