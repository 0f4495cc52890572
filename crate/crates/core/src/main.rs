use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tdmomentum::runner::{expand_grid, merge, run_all, EvalCache, ExperimentConfig, RunStatus};
use tdmomentum::Result;

#[derive(Parser)]
#[command(name = "tdmomentum", about = "Run corrected-momentum TD experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Number of runs executed concurrently.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Added to every seed of the config.
    #[arg(long, default_value_t = 0)]
    seed_offset: u64,
    /// Report diverged runs without failing.
    #[arg(long)]
    allow_divergence: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every run of a config, writing one CSV per run.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Precompute the Monte-Carlo reference values a config needs.
    OracleCache {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Merge every metrics CSV under a directory into `<dir>/combined.csv`.
    Merge { dir: PathBuf },
}

fn oracle_dir(out: &Path) -> PathBuf {
    out.join("oracle")
}

fn run(config: &Path, c: &Common) -> Result<bool> {
    let runs = expand_grid(&ExperimentConfig::load(config)?, c.seed_offset)?;
    let evals = EvalCache::new(Some(oracle_dir(&c.out)));
    let mut ok = true;
    for (cfg, result) in runs.iter().zip(run_all(&runs, c.workers, &evals, &c.out)) {
        match result {
            Ok(rec) => {
                let path = rec
                    .csv_path
                    .as_deref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default();
                let wall = rec.wall_time.as_secs_f64();
                match rec.status {
                    RunStatus::Completed => {
                        println!("{} completed in {wall:.1}s -> {path}", rec.run_id)
                    }
                    RunStatus::Diverged { step } => {
                        println!(
                            "{} diverged at step {step} after {wall:.1}s -> {path}",
                            rec.run_id
                        );
                        ok &= c.allow_divergence;
                    }
                }
            }
            Err(e) => {
                eprintln!("{} failed: {e}", cfg.run_id());
                ok = false;
            }
        }
    }
    Ok(ok)
}

fn oracle_cache(config: &Path, c: &Common) -> Result<bool> {
    let runs = expand_grid(&ExperimentConfig::load(config)?, c.seed_offset)?;
    let evals = EvalCache::new(Some(oracle_dir(&c.out)));
    let mut written = std::collections::BTreeSet::new();
    for cfg in &runs {
        if let Some(p) = evals.persist(cfg)? {
            if written.insert(p.clone()) {
                println!("{}", p.display());
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, common } => run(config, common),
        Command::OracleCache { config, common } => oracle_cache(config, common),
        Command::Merge { dir } => merge(dir, &dir.join("combined.csv")).map(|n| {
            println!("{n} rows -> {}", dir.join("combined.csv").display());
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
