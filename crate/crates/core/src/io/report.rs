//! Summary tables over a completed run directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{csv_err, csv_writer, records};
use crate::error::{Error, Result};
use crate::Real;

pub const METRICS_HEADER: [&str; 4] = ["round", "metric", "model", "value"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub round: u32,
    pub metric: String,
    pub model: String,
    pub value: Real,
}

/// Writes rows under [`METRICS_HEADER`].
pub fn write_metrics_csv(path: &Path, rows: &[MetricRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(METRICS_HEADER).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record([r.round.to_string(), r.metric.clone(), r.model.clone(), r.value.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per-(metric, model) series plus round-0 vs final deltas.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub series: BTreeMap<(String, String), Vec<(u32, Real)>>,
}

impl Report {
    pub fn load(run_dir: &Path) -> Result<Self> {
        for name in ["events.jsonl", "metrics_round.csv"] {
            let p = run_dir.join(name);
            if !p.is_file() {
                return Err(Error::MissingArtifact(p));
            }
        }
        let path = run_dir.join("metrics_round.csv");
        let mut series: BTreeMap<(String, String), Vec<(u32, Real)>> = BTreeMap::new();
        for (line, rec) in records(&path, &METRICS_HEADER)? {
            let round = super::parse(&path, line, "round", &rec[0])?;
            let value = super::parse(&path, line, "value", &rec[3])?;
            series.entry((rec[1].to_string(), rec[2].to_string())).or_default().push((round, value));
        }
        for s in series.values_mut() {
            s.sort_by_key(|&(r, _)| r);
        }
        Ok(Report { series })
    }

    /// `(first, last, last - first)` for each series.
    pub fn deltas(&self) -> BTreeMap<(String, String), (Real, Real, Real)> {
        self.series
            .iter()
            .filter_map(|(k, s)| {
                let (first, last) = (s.first()?.1, s.last()?.1);
                Some((k.clone(), (first, last, last - first)))
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ((metric, model), s) in &self.series {
            let _ = writeln!(out, "{metric} [{model}]");
            for (r, v) in s {
                let _ = writeln!(out, "  round {r:>3}  {v:.6}");
            }
        }
        let _ = writeln!(out, "\ntrend (first -> last)");
        for ((metric, model), (a, b, d)) in self.deltas() {
            let _ = writeln!(out, "  {metric:<24} {model:<12} {a:.6} -> {b:.6}  ({d:+.6})");
        }
        out
    }
}

/// Loads `run_dir`, writing `report.csv` and `report.txt` next to the inputs.
pub fn report(run_dir: &Path) -> Result<Report> {
    let r = Report::load(run_dir)?;
    let csv_path = run_dir.join("report.csv");
    let mut w = csv_writer(&csv_path)?;
    w.write_record(["metric", "model", "first", "last", "delta"]).map_err(|e| csv_err(&csv_path, e))?;
    for ((metric, model), (a, b, d)) in r.deltas() {
        w.write_record([metric, model, a.to_string(), b.to_string(), d.to_string()])
            .map_err(|e| csv_err(&csv_path, e))?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    let txt = run_dir.join("report.txt");
    std::fs::write(&txt, r.to_text()).map_err(|e| Error::io(&txt, e))?;
    Ok(r)
}

/// Side-by-side final values and deltas of two runs, keyed by metric.
pub fn compare_runs(a: &Path, b: &Path) -> Result<String> {
    let (ra, rb) = (Report::load(a)?, Report::load(b)?);
    let (da, db) = (ra.deltas(), rb.deltas());
    let mut out = String::new();
    let _ = writeln!(out, "metric,model_a,last_a,delta_a,model_b,last_b,delta_b");
    let metrics: std::collections::BTreeSet<&String> = da.keys().chain(db.keys()).map(|(m, _)| m).collect();
    for metric in metrics {
        let pick = |d: &BTreeMap<(String, String), (Real, Real, Real)>| {
            d.iter().find(|((m, _), _)| m == metric).map(|((_, model), &(_, last, delta))| (model.clone(), last, delta))
        };
        let cell = |x: Option<(String, Real, Real)>| match x {
            Some((model, last, delta)) => format!("{model},{last},{delta}"),
            None => ",,".to_string(),
        };
        let _ = writeln!(out, "{metric},{},{}", cell(pick(&da)), cell(pick(&db)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_dir(rounds: u32, model: &str) -> tempfile::TempDir {
        let d = tempfile::tempdir().unwrap();
        std::fs::write(d.path().join("events.jsonl"), "").unwrap();
        let mut s = String::from("round,metric,model,value\n");
        for r in 0..=rounds {
            s.push_str(&format!("{r},recall@20,{model},{}\n", 0.1 + 0.01 * r as f64));
            s.push_str(&format!("{r},acceptance_rate,{model},{}\n", 0.2 + 0.02 * r as f64));
        }
        std::fs::write(d.path().join("metrics_round.csv"), s).unwrap();
        d
    }

    #[test]
    fn table_has_t_plus_one_rows() {
        let d = run_dir(4, "mf");
        let r = report(d.path()).unwrap();
        for s in r.series.values() {
            assert_eq!(s.len(), 5);
        }
        let (a, b, delta) = r.deltas()[&("recall@20".to_string(), "mf".to_string())];
        assert!((a - 0.1).abs() < 1e-12 && (b - 0.14).abs() < 1e-12 && (delta - 0.04).abs() < 1e-12);
        assert!(d.path().join("report.csv").is_file());
    }

    #[test]
    fn missing_events_is_missing_artifact() {
        let d = run_dir(1, "mf");
        std::fs::remove_file(d.path().join("events.jsonl")).unwrap();
        assert!(matches!(report(d.path()), Err(Error::MissingArtifact(_))));
    }

    #[test]
    fn comparison_table() {
        let (a, b) = (run_dir(2, "mf"), run_dir(2, "lightgcn"));
        let t = compare_runs(a.path(), b.path()).unwrap();
        assert_eq!(t.lines().count(), 3);
        assert!(t.lines().any(|l| l.starts_with("recall@20,mf,") && l.contains(",lightgcn,")));
    }
}
