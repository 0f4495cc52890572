//! A small grid through the runner: parse, expand, run on worker threads,
//! merge into one CSV and summarise the final evaluation MSE.
use std::path::Path;

use tdmomentum::metrics::{median, MetricsRow};
use tdmomentum::runner::{expand_grid, merge, run_all, EvalCache, ExperimentConfig};

const CONFIG: &str = "\
task = mountain_car_replay
n_h = 8
gamma = 0.9
total_steps = 500
log_every = 100
replay_episodes = 10
eval_grid = 20
eval_episodes = 20
optimizer = momentum
optimizer = corrected
optimizer = oracle
seeds = 0..3
";

fn main() -> tdmomentum::Result<()> {
    let config = ExperimentConfig::parse(CONFIG, Path::new("example.cfg"))?;
    let runs = expand_grid(&config, 0)?;
    let out = std::env::temp_dir().join("tdmomentum-grid");
    let evals = EvalCache::new(Some(out.join("oracle")));
    for record in run_all(&runs, 2, &evals, &out) {
        let record = record?;
        println!(
            "{} {:?} in {:.1}s",
            record.run_id,
            record.status,
            record.wall_time.as_secs_f64()
        );
    }
    let combined = out.join("combined.csv");
    let rows = merge(&out.join("runs"), &combined)?;
    println!("merged {rows} rows into {}", combined.display());

    let text = std::fs::read_to_string(&combined)?;
    let rows = MetricsRow::read_csv(text.as_bytes(), &combined)?;
    for optimizer in ["momentum", "corrected", "oracle"] {
        let mut finals: Vec<f64> = rows
            .iter()
            .filter(|r| r.tags.optimizer == optimizer && r.step == 500)
            .filter_map(|r| r.eval_mse)
            .collect();
        finals.sort_by(f64::total_cmp);
        println!(
            "{optimizer:10} median eval_mse at 500 steps: {:.4}",
            median(&finals)
        );
    }
    Ok(())
}
