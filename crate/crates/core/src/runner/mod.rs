//! Experiment driver: configuration files, grid expansion, deterministic
//! runs, per-run CSV output and merging.

mod config;
mod eval;
mod run;

pub use config::{expand_grid, ExperimentConfig, ModelKind, OptimizerKind, RunConfig, Task};
pub use eval::{EvalCache, EvalSet};
pub use run::{
    build_model, derive_seed, execute_run, run_tags, RunOutput, RunRecord, RunStatus,
    DIVERGENCE_LOSS, STREAM_DATA, STREAM_INIT, STREAM_SAMPLING,
};

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::Result;
use crate::metrics::{MetricsRow, CSV_HEADER};

/// Path of a run's CSV inside an output directory.
pub fn run_csv_path(out: &Path, run_id: &str) -> PathBuf {
    out.join("runs").join(format!("{run_id}.csv"))
}

/// Executes a run and writes its rows to `<out>/runs/<run_id>.csv`.
pub fn execute_and_write(cfg: &RunConfig, evals: &EvalCache, out: &Path) -> Result<RunRecord> {
    let output = execute_run(cfg, evals)?;
    let path = run_csv_path(out, &output.record.run_id);
    std::fs::create_dir_all(path.parent().expect("run path has a parent"))?;
    let mut w = BufWriter::new(File::create(&path)?);
    MetricsRow::write_csv(&mut w, &output.rows)?;
    w.flush()?;
    Ok(RunRecord {
        csv_path: Some(path),
        ..output.record
    })
}

/// Runs every config on a pool of `workers` threads. Results come back in
/// input order; runs share nothing but the read-only evaluation sets.
pub fn run_all(
    configs: &[RunConfig],
    workers: usize,
    evals: &EvalCache,
    out: &Path,
) -> Vec<Result<RunRecord>> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunRecord>>>> =
        Mutex::new((0..configs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, configs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cfg) = configs.get(i) else { break };
                let r = execute_and_write(cfg, evals, out);
                results.lock().expect("result slots poisoned")[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .expect("result slots poisoned")
        .into_iter()
        .map(|r| r.expect("every run produces a result"))
        .collect()
}

/// Concatenates every `*.csv` under `dir` (recursively, sorted by path,
/// other than `dest`) into `dest` with a single header.
pub fn merge(dir: &Path, dest: &Path) -> Result<usize> {
    fn collect(dir: &Path, acc: &mut Vec<PathBuf>) -> Result<()> {
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                collect(&path, acc)?;
            } else if path.extension().is_some_and(|e| e == "csv") {
                acc.push(path);
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    collect(dir, &mut files)?;
    files.sort();
    let dest_canon = dest.canonicalize().ok();
    let mut rows = Vec::new();
    for f in files {
        if dest_canon.is_some() && f.canonicalize().ok() == dest_canon {
            continue;
        }
        // Only metrics files take part; cached reference tables are skipped.
        let mut first = String::new();
        std::io::BufRead::read_line(&mut BufReader::new(File::open(&f)?), &mut first)?;
        if first.trim_end() != CSV_HEADER {
            continue;
        }
        rows.extend(MetricsRow::read_csv(BufReader::new(File::open(&f)?), &f)?);
    }
    let mut w = BufWriter::new(File::create(dest)?);
    MetricsRow::write_csv(&mut w, &rows)?;
    w.flush()?;
    Ok(rows.len())
}
