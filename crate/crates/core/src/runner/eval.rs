use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use super::config::{RunConfig, Task};
use crate::error::Result;
use crate::tasks::io::{read_reference, write_reference};
use crate::tasks::{normalize_state, reachable_grid_states, reference_values, EnergyPolicy, State};

/// Evaluation states (raw and as model inputs) with Monte-Carlo reference
/// values.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalSet {
    pub states: Vec<State>,
    pub inputs: Vec<Vec<f64>>,
    pub reference: Vec<f64>,
}

impl EvalSet {
    pub fn from_reference(states: Vec<State>, reference: Vec<f64>) -> Self {
        let inputs = states.iter().map(|s| normalize_state(s).to_vec()).collect();
        EvalSet {
            states,
            inputs,
            reference,
        }
    }

    /// Reachable cells of an `grid x grid` grid (visited by `episodes`
    /// on-policy episodes) with one rollout each, since policy and dynamics
    /// are deterministic.
    pub fn build(grid: usize, episodes: usize, seed: u64, gamma: f64) -> Self {
        let states = reachable_grid_states(grid, &EnergyPolicy, episodes, seed);
        let reference = reference_values(&states, &EnergyPolicy, gamma, 1, seed);
        Self::from_reference(states, reference)
    }
}

fn cache_key(cfg: &RunConfig) -> String {
    format!(
        "reference_g{}_grid{}_ep{}_seed{}",
        cfg.gamma, cfg.eval_grid, cfg.eval_episodes, cfg.eval_seed
    )
}

/// Shares evaluation sets between runs and optionally persists them as CSV
/// files in a cache directory.
#[derive(Debug, Default)]
pub struct EvalCache {
    dir: Option<PathBuf>,
    sets: Mutex<HashMap<String, Arc<EvalSet>>>,
}

impl EvalCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        EvalCache {
            dir,
            sets: Mutex::default(),
        }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.csv")))
    }

    /// The evaluation set of a Mountain Car run; `None` for regression.
    pub fn get(&self, cfg: &RunConfig) -> Result<Option<Arc<EvalSet>>> {
        if cfg.task == Task::Regression {
            return Ok(None);
        }
        let key = cache_key(cfg);
        if let Some(set) = self.sets.lock().expect("eval cache poisoned").get(&key) {
            return Ok(Some(set.clone()));
        }
        let set = match self.path(&key).filter(|p| p.exists()) {
            Some(p) => {
                let (states, values) = read_reference(BufReader::new(File::open(&p)?), &p)?;
                EvalSet::from_reference(states, values)
            }
            None => EvalSet::build(cfg.eval_grid, cfg.eval_episodes, cfg.eval_seed, cfg.gamma),
        };
        let set = Arc::new(set);
        self.sets
            .lock()
            .expect("eval cache poisoned")
            .insert(key, set.clone());
        Ok(Some(set))
    }

    /// Computes (if needed) and writes the reference file for `cfg`.
    /// Returns the path written, or `None` for tasks without a reference.
    pub fn persist(&self, cfg: &RunConfig) -> Result<Option<PathBuf>> {
        let Some(set) = self.get(cfg)? else {
            return Ok(None);
        };
        let Some(path) = self.path(&cache_key(cfg)) else {
            return Ok(None);
        };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        write_reference(
            BufWriter::new(File::create(&path)?),
            &set.states,
            &set.reference,
        )?;
        Ok(Some(path))
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }
}
