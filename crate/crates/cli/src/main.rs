//! `sdnlte` command-line front end.

mod output;

use clap::{Args, Parser, Subcommand};
use sdnlte::config::{parse_config_str, ExperimentConfig, SweepPoint};
use sdnlte::engine::{compare_local_global, run};
use sdnlte::handover::{Policy, DEFAULT_ORACLE_BUDGET};
use sdnlte::metrics::MetricsRecord;
use sdnlte::report::{self, RunStatus, SweepManifest, SweepRunEntry};
use sdnlte::Error;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "sdnlte", version, about = "SDN-controlled LTE load-balancing simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One simulation with the configured (or overridden) policy and seed.
    Run(Common),
    /// Every point of the sweep grid, for every policy and seed.
    Sweep(Common),
    /// Distributed policy against the per-period exhaustive-search association.
    OracleCompare(Common),
    /// Parse and check a config file without running anything.
    ValidateConfig(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<u8>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::UnknownScenario(_) | Error::DoaOutOfRange { .. } | Error::Topology(_) => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

/// Loads the config and applies command-line overrides.
fn load(c: &Common) -> Result<(ExperimentConfig, PathBuf), Failure> {
    let mut cfg = match &c.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            parse_config_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.scenario {
        cfg.scenario.scenario = s;
    }
    if let Some(seed) = c.seed {
        cfg.scenario.seed = seed;
        cfg.sweep.seeds = vec![seed];
    }
    if let Some(p) = &c.policy {
        let p: Policy = p.parse()?;
        cfg.handover.policy = p;
        cfg.sweep.policies = vec![p];
    }
    cfg.validate()?;
    let out = c.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    Ok((cfg, out))
}

fn print_metrics(id: &str, m: &MetricsRecord) {
    println!(
        "{id}: gbr {:.0} bps, edge {:.0} bps, outage {:.3}, system {:.0} bps, handovers {}",
        m.avg_gbr_rate_bps, m.edge_aggregate_bps, m.outage_fraction, m.system_throughput_bps, m.handovers
    );
}

fn cmd_run(c: &Common) -> Result<(), Failure> {
    let (cfg, out) = load(c)?;
    let rc = cfg.run_config();
    let point =
        SweepPoint { num_users: rc.scenario.num_users, doa: rc.scenario.doa, gbr_fraction: rc.scenario.gbr_fraction };
    let id = report::run_id(&point, rc.handover.policy, rc.scenario.seed);
    let result = run(&rc)?;
    let dir = output::write_run(&out, &id, &rc, &result)?;
    print_metrics(&id, &result.metrics);
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_sweep(c: &Common) -> Result<(), Failure> {
    let (cfg, out) = load(c)?;
    let points = cfg.sweep_points();
    let mut manifest = SweepManifest {
        planned_runs: points.len() * cfg.sweep.policies.len() * cfg.sweep.seeds.len(),
        ..Default::default()
    };
    let mut groups: Vec<(SweepPoint, Policy, Vec<MetricsRecord>)> = Vec::new();
    let mut failed = None;
    'grid: for p in &points {
        for &policy in &cfg.sweep.policies {
            let mut ms = Vec::new();
            for &seed in &cfg.sweep.seeds {
                let rc = cfg.point_config(p, policy, seed);
                let id = report::run_id(p, policy, seed);
                match run(&rc).and_then(|r| output::write_run(&out, &id, &rc, &r).map(|_| r)) {
                    Ok(r) => {
                        print_metrics(&id, &r.metrics);
                        ms.push(r.metrics);
                        manifest.runs.push(SweepRunEntry { run_id: id, status: RunStatus::Completed, error: None });
                    }
                    Err(e) => {
                        // Best effort: the sweep manifest below still records the failure.
                        let _ = output::write_failed_run(&out, &id, &rc, &e);
                        manifest.runs.push(SweepRunEntry {
                            run_id: id,
                            status: RunStatus::Failed,
                            error: Some(e.to_string()),
                        });
                        groups.push((*p, policy, ms));
                        failed = Some(e);
                        break 'grid;
                    }
                }
                output::write_bytes(&out, report::MANIFEST_FILE, &manifest.to_json()?)?;
            }
            groups.push((*p, policy, ms));
        }
    }
    let rows = report::summarize(&groups);
    output::write_bytes(&out, "summary.csv", &report::summary_table_csv(&rows)?)?;
    output::write_bytes(&out, "summary.json", &report::summary_table_json(&rows)?)?;
    manifest.summary_files = vec!["summary.csv".into(), "summary.json".into()];
    output::write_bytes(&out, report::MANIFEST_FILE, &manifest.to_json()?)?;
    if let Some(e) = failed {
        return Err(Failure::Runtime(format!("sweep stopped after {} runs: {e}", manifest.runs.len())));
    }
    println!("{} runs, {} summary rows in {}", manifest.runs.len(), rows.len(), out.display());
    Ok(())
}

fn cmd_oracle(c: &Common) -> Result<(), Failure> {
    let (cfg, out) = load(c)?;
    let cmp = compare_local_global(&cfg.run_config(), &cfg.sweep.seeds, DEFAULT_ORACLE_BUDGET)?;
    for s in &cmp.per_seed {
        println!(
            "seed {}: local {:.0} bps, global {:.0} bps, ratio {:.4}",
            s.seed, s.local_gbr_rate_bps, s.global_gbr_rate_bps, s.ratio
        );
    }
    println!(
        "mean ratio {:.4}, oracle dominates: {}, infeasible local snapshots: {}",
        cmp.mean_ratio, cmp.oracle_dominates, cmp.infeasible_local_snapshots
    );
    output::write_bytes(&out, "oracle_compare.json", &report::comparison_json(&cmp)?)?;
    Ok(())
}

fn cmd_validate(c: &Common) -> Result<(), Failure> {
    let (cfg, _) = load(c)?;
    let runs = cfg.sweep_points().len() * cfg.sweep.policies.len() * cfg.sweep.seeds.len();
    println!("config ok: {} sweep points, {runs} runs", cfg.sweep_points().len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Command::Run(c) => cmd_run(c),
        Command::Sweep(c) => cmd_sweep(c),
        Command::OracleCompare(c) => cmd_oracle(c),
        Command::ValidateConfig(c) => cmd_validate(c),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
