use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::DEFAULT_LEAKY_SLOPE;
use crate::optim::LayerSelector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Regression,
    MountainCarReplay,
    MountainCarOnline,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Mlp,
    Rbf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerKind {
    Momentum,
    Corrected,
    CorrectedDiag,
    Oracle,
    CorrectedDiagScaled,
}

macro_rules! named_enum {
    ($ty:ty, $what:literal, $($variant:path => $name:literal),+ $(,)?) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($variant),)+
                    _ => Err(Error::config(format!(concat!("unknown ", $what, " '{}'"), s))),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $name,)+ })
            }
        }
    };
}

named_enum!(Task, "task",
    Task::Regression => "regression",
    Task::MountainCarReplay => "mountain_car_replay",
    Task::MountainCarOnline => "mountain_car_online",
);
named_enum!(ModelKind, "model", ModelKind::Mlp => "mlp", ModelKind::Rbf => "rbf");
named_enum!(OptimizerKind, "optimizer",
    OptimizerKind::Momentum => "momentum",
    OptimizerKind::Corrected => "corrected",
    OptimizerKind::CorrectedDiag => "corrected_diag",
    OptimizerKind::Oracle => "oracle",
    OptimizerKind::CorrectedDiagScaled => "corrected_diag_scaled",
);

/// Every recognised key with its default (`None` = required).
const KEYS: &[(&str, Option<&str>)] = &[
    ("task", None),
    ("model", Some("mlp")),
    ("optimizer", None),
    ("alpha", Some("0.1")),
    ("beta", Some("0.9")),
    ("n_mb", Some("16")),
    ("n_h", Some("16")),
    ("n_layers", Some("4")),
    ("leaky_slope", None),
    ("sigma_sq", Some("1")),
    ("n_grid", Some("20")),
    ("rbf_grid_normalized", Some("true")),
    ("n_step", Some("1")),
    ("mask", Some("all")),
    ("total_steps", Some("5000")),
    ("log_every", Some("50")),
    ("gamma", Some("0.99")),
    ("frozen_refresh", Some("none")),
    ("beta2", Some("0.999")),
    ("epsilon", Some("1e-8")),
    ("replay_episodes", Some("50")),
    ("dataset_size", Some("10000")),
    ("oracle_budget", Some("10000")),
    ("oracle_horizon", Some("auto")),
    ("eval_grid", Some("40")),
    ("eval_episodes", Some("100")),
    ("eval_seed", Some("0")),
    ("diagnostics", Some("true")),
];

/// A parsed experiment file: each key maps to one or more values (repeated
/// keys form a grid), plus the list of seeds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentConfig {
    entries: Vec<(String, Vec<String>)>,
    seeds: Vec<u64>,
}

impl ExperimentConfig {
    /// Line-based `key = value`; `#` starts a comment. Seeds are given by
    /// repeated `seed = K` lines and/or `seeds = A..B` (half-open).
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(i + 1, format!("expected 'key = value', got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "seed" => cfg.seeds.push(
                    value
                        .parse()
                        .map_err(|_| err(i + 1, format!("bad seed '{value}'")))?,
                ),
                "seeds" => {
                    let (a, b) = value
                        .split_once("..")
                        .and_then(|(a, b)| {
                            Some((a.trim().parse::<u64>().ok()?, b.trim().parse::<u64>().ok()?))
                        })
                        .ok_or_else(|| {
                            err(i + 1, format!("bad seed range '{value}' (expected A..B)"))
                        })?;
                    cfg.seeds.extend(a..b);
                }
                _ if KEYS.iter().any(|(k, _)| *k == key) => cfg.push(key, value),
                _ => return Err(err(i + 1, format!("unknown key '{key}'"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, path)
    }

    /// Adds one grid value for `key` (programmatic construction).
    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some((_, vs)) => vs.push(value),
            None => self.entries.push((key.to_string(), vec![value])),
        }
    }

    /// Replaces all values of `key`.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.retain(|(k, _)| k != key);
        self.push(key, value);
    }

    /// Keys present in `other` replace their values here; its seeds, if
    /// any, replace the seed list.
    pub fn override_with(&mut self, other: &ExperimentConfig) {
        for (k, vs) in &other.entries {
            self.entries.retain(|(key, _)| key != k);
            self.entries.push((k.clone(), vs.clone()));
        }
        if !other.seeds.is_empty() {
            self.seeds = other.seeds.clone();
        }
    }

    pub fn add_seeds(&mut self, seeds: impl IntoIterator<Item = u64>) {
        self.seeds.extend(seeds);
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn values(&self, key: &str) -> Option<&[String]> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_slice())
    }
}

/// One fully-resolved run: a single point of the grid and one seed.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub model: ModelKind,
    pub optimizer: OptimizerKind,
    pub alpha: f64,
    pub beta: f64,
    pub n_mb: usize,
    pub n_h: usize,
    pub n_layers: usize,
    pub leaky_slope: f64,
    pub sigma_sq: f64,
    pub n_grid: usize,
    pub rbf_grid_normalized: bool,
    pub n_step: usize,
    pub mask: LayerSelector,
    pub seed: u64,
    pub total_steps: usize,
    pub log_every: usize,
    pub gamma: f64,
    pub frozen_refresh: Option<usize>,
    pub beta2: f64,
    pub epsilon: f64,
    pub replay_episodes: usize,
    pub dataset_size: usize,
    pub oracle_budget: usize,
    /// Window length of the oracle; `None` means `ceil(2/(1-β))`.
    pub oracle_horizon: Option<usize>,
    pub eval_grid: usize,
    pub eval_episodes: usize,
    pub eval_seed: u64,
    pub diagnostics: bool,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::config(format!("bad value '{v}' for {key}")))
}

impl RunConfig {
    /// Builds a run from one value per key (defaults fill the rest).
    pub fn from_point(point: &[(&str, &str)], seed: u64) -> Result<Self> {
        let get = |key: &str| -> Option<&str> {
            point
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .or_else(|| KEYS.iter().find(|(k, _)| *k == key).and_then(|(_, d)| *d))
        };
        let req = |key: &str| {
            get(key).ok_or_else(|| Error::config(format!("missing required key '{key}'")))
        };
        let task: Task = req("task")?.parse()?;
        let model: ModelKind = req("model")?.parse()?;
        let optimizer: OptimizerKind = req("optimizer")?.parse()?;
        let num = |key: &str| -> Result<f64> { parse_value(key, req(key)?) };
        let count = |key: &str| -> Result<usize> { parse_value(key, req(key)?) };
        let flag = |key: &str| -> Result<bool> { parse_value(key, req(key)?) };
        let frozen_refresh = match req("frozen_refresh")? {
            "none" => None,
            v => Some(parse_value::<usize>("frozen_refresh", v)?),
        };
        let mut n_mb = count("n_mb")?;
        if task == Task::MountainCarOnline {
            n_mb = 1;
        }
        let cfg = RunConfig {
            task,
            model,
            optimizer,
            alpha: num("alpha")?,
            beta: num("beta")?,
            n_mb,
            n_h: count("n_h")?,
            n_layers: count("n_layers")?,
            leaky_slope: match get("leaky_slope") {
                Some(v) => parse_value("leaky_slope", v)?,
                None => DEFAULT_LEAKY_SLOPE,
            },
            sigma_sq: num("sigma_sq")?,
            n_grid: count("n_grid")?,
            rbf_grid_normalized: flag("rbf_grid_normalized")?,
            n_step: count("n_step")?,
            mask: req("mask")?.parse()?,
            seed,
            total_steps: count("total_steps")?,
            log_every: count("log_every")?,
            gamma: num("gamma")?,
            frozen_refresh,
            beta2: num("beta2")?,
            epsilon: num("epsilon")?,
            replay_episodes: count("replay_episodes")?,
            dataset_size: count("dataset_size")?,
            oracle_budget: count("oracle_budget")?,
            oracle_horizon: match req("oracle_horizon")? {
                "auto" => None,
                v => Some(parse_value::<usize>("oracle_horizon", v)?),
            },
            eval_grid: count("eval_grid")?,
            eval_episodes: count("eval_episodes")?,
            eval_seed: parse_value("eval_seed", req("eval_seed")?)?,
            diagnostics: flag("diagnostics")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_mb", self.n_mb),
            ("n_h", self.n_h),
            ("n_step", self.n_step),
            ("log_every", self.log_every),
            ("replay_episodes", self.replay_episodes),
            ("dataset_size", self.dataset_size),
            ("eval_grid", self.eval_grid),
            ("n_grid", self.n_grid),
        ];
        if let Some((k, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::config(format!("{k} must be positive")));
        }
        if self.n_layers < 1 {
            return Err(Error::config("n_layers must be at least 1"));
        }
        self.hyper_params().validate()?;
        if self.model == ModelKind::Rbf && self.task == Task::Regression {
            return Err(Error::config(
                "RBF features are defined over the Mountain Car state box only",
            ));
        }
        if self.oracle_horizon == Some(0) {
            return Err(Error::config("oracle_horizon must be positive"));
        }
        if self.frozen_refresh == Some(0) {
            return Err(Error::config("frozen_refresh must be positive"));
        }
        if self.optimizer == OptimizerKind::Oracle {
            let h = self.oracle_window();
            if h * self.n_mb > self.oracle_budget {
                return Err(Error::config(format!(
                    "oracle needs {} gradient evaluations per step (h = {h}, n_mb = {}), over the budget of {}",
                    h * self.n_mb,
                    self.n_mb,
                    self.oracle_budget
                )));
            }
        }
        Ok(())
    }

    pub fn oracle_window(&self) -> usize {
        self.oracle_horizon
            .unwrap_or_else(|| crate::optim::effective_horizon(self.beta, 1))
    }

    pub fn hyper_params(&self) -> crate::optim::HyperParams {
        crate::optim::HyperParams {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }

    /// Every field as `key=value`, one per line, in a fixed order.
    pub fn canonical(&self) -> String {
        let frozen = self
            .frozen_refresh
            .map(|v| v.to_string())
            .unwrap_or_else(|| "none".into());
        let fields: Vec<(&str, String)> = vec![
            ("task", self.task.to_string()),
            ("model", self.model.to_string()),
            ("optimizer", self.optimizer.to_string()),
            ("alpha", self.alpha.to_string()),
            ("beta", self.beta.to_string()),
            ("n_mb", self.n_mb.to_string()),
            ("n_h", self.n_h.to_string()),
            ("n_layers", self.n_layers.to_string()),
            ("leaky_slope", self.leaky_slope.to_string()),
            ("sigma_sq", self.sigma_sq.to_string()),
            ("n_grid", self.n_grid.to_string()),
            ("rbf_grid_normalized", self.rbf_grid_normalized.to_string()),
            ("n_step", self.n_step.to_string()),
            ("mask", self.mask.to_string()),
            ("seed", self.seed.to_string()),
            ("total_steps", self.total_steps.to_string()),
            ("log_every", self.log_every.to_string()),
            ("gamma", self.gamma.to_string()),
            ("frozen_refresh", frozen),
            ("beta2", self.beta2.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("replay_episodes", self.replay_episodes.to_string()),
            ("dataset_size", self.dataset_size.to_string()),
            ("oracle_budget", self.oracle_budget.to_string()),
            (
                "oracle_horizon",
                self.oracle_horizon
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "auto".into()),
            ),
            ("eval_grid", self.eval_grid.to_string()),
            ("eval_episodes", self.eval_episodes.to_string()),
            ("eval_seed", self.eval_seed.to_string()),
            ("diagnostics", self.diagnostics.to_string()),
        ];
        fields.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// First 16 hex digits of the SHA-256 of [`canonical`](Self::canonical).
    pub fn run_id(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Cartesian product of all grids (keys in order of first appearance, the
/// last key varying fastest) with the seeds innermost; each seed is shifted
/// by `seed_offset`.
pub fn expand_grid(config: &ExperimentConfig, seed_offset: u64) -> Result<Vec<RunConfig>> {
    if config.seeds.is_empty() {
        return Err(Error::config("no seeds given"));
    }
    if let Some((k, _)) = config.entries.iter().find(|(_, v)| v.is_empty()) {
        return Err(Error::config(format!("empty grid for '{k}'")));
    }
    let mut points: Vec<Vec<(&str, &str)>> = vec![Vec::new()];
    for (key, values) in &config.entries {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((key.as_str(), v.as_str()));
                    q
                })
            })
            .collect();
    }
    let mut runs = Vec::with_capacity(points.len() * config.seeds.len());
    for p in &points {
        for &s in &config.seeds {
            runs.push(RunConfig::from_point(p, s.wrapping_add(seed_offset))?);
        }
    }
    if runs.is_empty() {
        return Err(Error::config("the grid expands to no runs"));
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(text, Path::new("test.cfg"))
    }

    #[test]
    fn product_count() {
        let cfg = parse("task = regression\noptimizer = momentum\nalpha = 0.1\nalpha = 0.2\nbeta = 0.9\nseed = 0\nseed = 1\n").unwrap();
        assert_eq!(expand_grid(&cfg, 0).unwrap().len(), 4);
    }

    #[test]
    fn single_point() {
        let cfg = parse("task = regression\noptimizer = oracle\nseed = 3").unwrap();
        let runs = expand_grid(&cfg, 0).unwrap();
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[0].seed, 3);
        assert_eq!(runs[0].leaky_slope, DEFAULT_LEAKY_SLOPE);
    }

    #[test]
    fn regression_sweep_has_540_runs() {
        let cfg = parse(
            "task = regression\noptimizer = momentum\n\
             n_h = 8\nn_h = 16\nn_h = 32\n\
             beta = 0.9\nbeta = 0.99\n\
             alpha = 0.1\nalpha = 0.01\nalpha = 0.001\n\
             n_mb = 4\nn_mb = 16\nn_mb = 64\n\
             seeds = 0..10\n",
        )
        .unwrap();
        assert_eq!(expand_grid(&cfg, 0).unwrap().len(), 540);
    }

    #[test]
    fn ordering_is_deterministic_and_seeds_innermost() {
        let cfg = parse(
            "task = regression\noptimizer = momentum\nalpha = 0.1\nalpha = 0.2\nseeds = 5..7\n",
        )
        .unwrap();
        let runs = expand_grid(&cfg, 100).unwrap();
        let got: Vec<(f64, u64)> = runs.iter().map(|r| (r.alpha, r.seed)).collect();
        assert_eq!(got, vec![(0.1, 105), (0.1, 106), (0.2, 105), (0.2, 106)]);
        assert_eq!(runs, expand_grid(&cfg, 100).unwrap());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse("bogus = 1"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(parse("task regression"), Err(Error::Parse { .. })));
        let no_seed = parse("task = regression\noptimizer = momentum").unwrap();
        assert!(matches!(expand_grid(&no_seed, 0), Err(Error::Config(_))));
        let empty_range = parse("task = regression\noptimizer = momentum\nseeds = 3..3").unwrap();
        assert!(matches!(
            expand_grid(&empty_range, 0),
            Err(Error::Config(_))
        ));
        let bad = parse("task = regression\noptimizer = sgd\nseed = 0").unwrap();
        assert!(matches!(expand_grid(&bad, 0), Err(Error::Config(_))));
        let missing = parse("optimizer = momentum\nseed = 0").unwrap();
        assert!(matches!(expand_grid(&missing, 0), Err(Error::Config(_))));
    }

    #[test]
    fn oracle_budget_guard() {
        let cfg = parse("task = mountain_car_replay\noptimizer = oracle\nn_mb = 64\noracle_budget = 1000\nseed = 0").unwrap();
        assert!(matches!(expand_grid(&cfg, 0), Err(Error::Config(_))));
        let ok =
            parse("task = mountain_car_replay\noptimizer = oracle\nn_mb = 16\nseed = 0").unwrap();
        assert!(expand_grid(&ok, 0).is_ok());
    }

    #[test]
    fn online_forces_single_sample_minibatches() {
        let cfg = parse("task = mountain_car_online\noptimizer = corrected\nn_mb = 32\nseed = 0")
            .unwrap();
        assert_eq!(expand_grid(&cfg, 0).unwrap()[0].n_mb, 1);
    }

    #[test]
    fn run_id_tracks_every_field() {
        let cfg = parse("task = regression\noptimizer = momentum\nseed = 0\nseed = 1").unwrap();
        let runs = expand_grid(&cfg, 0).unwrap();
        assert_eq!(runs[0].run_id().len(), 16);
        assert_ne!(runs[0].run_id(), runs[1].run_id());
        assert_eq!(runs[0].run_id(), expand_grid(&cfg, 0).unwrap()[0].run_id());
        let mut other = runs[0].clone();
        other.log_every = 10;
        assert_ne!(other.run_id(), runs[0].run_id());
    }

    #[test]
    fn overrides_replace_whole_grids() {
        let mut base =
            parse("task = regression\noptimizer = momentum\nalpha = 0.1\nalpha = 0.2\nseed = 0")
                .unwrap();
        base.override_with(
            &parse("alpha = 0.5\noptimizer = oracle\noptimizer = corrected\nseeds = 3..5").unwrap(),
        );
        let runs = expand_grid(&base, 0).unwrap();
        assert_eq!(runs.len(), 4);
        assert!(runs.iter().all(|r| r.alpha == 0.5 && r.seed >= 3));
    }

    #[test]
    fn comments_and_frozen_refresh() {
        let cfg = parse("# header\ntask = mountain_car_replay # inline\noptimizer = momentum\nfrozen_refresh = 100\nseed = 0").unwrap();
        assert_eq!(expand_grid(&cfg, 0).unwrap()[0].frozen_refresh, Some(100));
    }
}
