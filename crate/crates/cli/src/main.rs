use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use ggbond::config::RecommenderKind;
use ggbond::engine::{self, RunOptions};
use ggbond::{io, SimConfig};

#[derive(Parser)]
#[command(name = "ggbond", version, about = "Social agent simulator for closed-loop recommender evaluation")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides rng_seed (and GGBOND_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    rounds: Option<u32>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Log more; repeat for debug output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Infer Big-Five traits and write profiles.csv.
    InferPersonality,
    /// Build the layered social graph and write graph.csv.
    BuildGraph,
    /// Run the simulation and write the event log, metrics and final state.
    Simulate {
        /// Recommender kind, overriding the config.
        #[arg(long)]
        model: Option<RecommenderKind>,
        /// Write a snapshot after these rounds.
        #[arg(long = "snapshot-at", value_delimiter = ',')]
        snapshot_at: Vec<u32>,
        /// Continue from a snapshot instead of starting fresh.
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long)]
        no_reviews: bool,
    },
    /// Recompute behaviour metrics from a run's event log and profiles.
    Evaluate {
        #[arg(long)]
        run_dir: PathBuf,
    },
    /// Summarize a run, or compare two.
    Report {
        #[arg(long)]
        run_dir: PathBuf,
        #[arg(long)]
        compare: Option<PathBuf>,
    },
}

fn load_config(c: &Common) -> Result<SimConfig> {
    let mut cfg = match &c.config {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default().with_env_overrides()?,
    };
    if let Some(s) = c.seed {
        cfg.rng_seed = s;
    }
    if let Some(r) = c.rounds {
        cfg.rounds = r;
    }
    if let Some(d) = &c.out_dir {
        cfg.io.out_dir = Some(d.clone());
    }
    Ok(cfg.validate()?)
}

fn out_dir(cfg: &SimConfig) -> PathBuf {
    cfg.io.out_dir.clone().unwrap_or_else(|| PathBuf::from("runs/latest"))
}

fn ensure_dir(d: &Path) -> Result<()> {
    std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match cli.command {
        Command::InferPersonality => {
            let cfg = load_config(&cli.common)?;
            let inputs = engine::load_inputs(&cfg)?;
            let (profiles, report) = engine::infer_profiles(&cfg, &inputs)?;
            let dir = out_dir(&cfg);
            ensure_dir(&dir)?;
            io::write_profiles_csv(&dir.join("profiles.csv"), &profiles)?;
            println!(
                "{} profiles: {} labeled, {} from ratings, {} from structure, {} neutral",
                profiles.len(),
                report.labeled,
                report.from_behavior,
                report.from_structure,
                report.neutral
            );
            if let Some(fit) = report.fit {
                println!("holdout rmse {:?}", fit.rmse);
                println!("holdout pearson {:?}", fit.pearson);
            }
        }
        Command::BuildGraph => {
            let cfg = load_config(&cli.common)?;
            let inputs = engine::load_inputs(&cfg)?;
            let (profiles, _) = engine::infer_profiles(&cfg, &inputs)?;
            let graph = engine::build_graph(&cfg, &profiles, &inputs.edges)?;
            let dir = out_dir(&cfg);
            ensure_dir(&dir)?;
            io::write_graph_csv(&dir.join("graph.csv"), &graph)?;
            io::write_profiles_csv(&dir.join("profiles.csv"), &profiles)?;
            println!("{} agents, {} unified edges", graph.n(), graph.unified().edge_count());
        }
        Command::Simulate {
            model,
            snapshot_at,
            resume,
            no_reviews,
        } => {
            let mut cfg = load_config(&cli.common)?;
            if let Some(k) = model {
                cfg.recommender.kind = k;
            }
            let dir = out_dir(&cfg);
            let mut opts = RunOptions::in_dir(&dir);
            opts.snapshot_at = snapshot_at;
            opts.reviews = !no_reviews;
            let out = match resume {
                Some(snap) => {
                    let rounds = match cli.common.rounds {
                        Some(r) => r,
                        None => bail!("--resume needs --rounds for the total round count"),
                    };
                    engine::resume(&snap, rounds, &opts)?
                }
                None => engine::run_simulation(&cfg, &opts)?,
            };
            let decisions: usize = out.reports.iter().map(|r| r.records.len()).sum();
            println!("{} rounds, {} decisions, written to {}", out.reports.len(), decisions, dir.display());
        }
        Command::Evaluate { run_dir } => {
            let events = engine::read_events(&run_dir.join("events.jsonl"))?;
            let initial = io::load_profiles_csv(&run_dir.join("profiles_initial.csv"))?;
            let final_ = io::load_profiles_csv(&run_dir.join("profiles_final.csv"))?;
            let to_map = |v: Vec<(ggbond::AgentId, _, ggbond::BigFive)>| v.into_iter().map(|(id, _, b)| (id, b)).collect();
            let rows = engine::evaluate_events(&events, final_.len(), &to_map(initial), &to_map(final_))?;
            let path = run_dir.join("metrics_eval.csv");
            io::write_metrics_csv(&path, &rows)?;
            info!("{} events evaluated", events.len());
            println!("{} rows written to {}", rows.len(), path.display());
        }
        Command::Report { run_dir, compare } => match compare {
            Some(other) => print!("{}", io::compare_runs(&run_dir, &other)?),
            None => print!("{}", io::report(&run_dir)?.to_text()),
        },
    }
    Ok(())
}
