use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ModelKind, OptimizerKind, RunConfig, Task};
use super::eval::{EvalCache, EvalSet};
use crate::error::{Error, Result};
use crate::metrics::{
    taylor_cosine, value_drift, value_mse, History, HistoryEntry, MetricsRow, RunTags,
};
use crate::model::{MlpSpec, ModelSpec, RbfSpec};
use crate::optim::{
    effective_horizon, make_mask, CorrectedState, HyperParams, LayerSelector, MomentumState,
    OracleState,
};
use crate::tasks::{
    collect_episodes, grad_bundle, n_step_examples, normalize_state, online_stream, sine_dataset,
    EnergyPolicy, Example, FrozenTargetSchedule, ReplayBuffer, Transition,
};
use crate::taylor::{Scaling, TermKind};

/// Sub-stream used for parameter initialisation.
pub const STREAM_INIT: u64 = 1;
/// Sub-stream used to generate the run's data (dataset, buffer or stream).
pub const STREAM_DATA: u64 = 2;
/// Sub-stream used to draw minibatches.
pub const STREAM_SAMPLING: u64 = 3;

/// Seed of an independent sub-stream: the first output of ChaCha8 seeded
/// with `seed` (via `seed_from_u64`) on stream number `stream`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

/// Loss above which a run is considered to have diverged.
pub const DIVERGENCE_LOSS: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    /// Aborted after `step` updates.
    Diverged {
        step: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub run_id: String,
    pub status: RunStatus,
    pub wall_time: Duration,
    pub csv_path: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub record: RunRecord,
    pub rows: Vec<MetricsRow>,
    pub final_params: Vec<f64>,
}

/// The function approximator a run trains. Mountain Car models see states
/// rescaled to `[-1, 1]²`, and RBF centres cover that box.
pub fn build_model(cfg: &RunConfig) -> Result<ModelSpec> {
    let input = if cfg.task == Task::Regression { 1 } else { 2 };
    Ok(match cfg.model {
        ModelKind::Mlp => ModelSpec::Mlp(MlpSpec::uniform(
            input,
            cfg.n_h,
            cfg.n_layers,
            cfg.leaky_slope,
        )?),
        ModelKind::Rbf => ModelSpec::Rbf(RbfSpec::new(
            cfg.n_grid,
            cfg.sigma_sq,
            [[-1.0, 1.0], [-1.0, 1.0]],
            cfg.rbf_grid_normalized,
        )?),
    })
}

pub fn run_tags(cfg: &RunConfig) -> RunTags {
    RunTags {
        task: cfg.task.to_string(),
        model: cfg.model.to_string(),
        optimizer: cfg.optimizer.to_string(),
        alpha: cfg.alpha,
        beta: cfg.beta,
        n_mb: cfg.n_mb,
        n_h: (cfg.model == ModelKind::Mlp).then_some(cfg.n_h),
        sigma_sq: (cfg.model == ModelKind::Rbf).then_some(cfg.sigma_sq),
        n_step: cfg.n_step,
        mask: cfg.mask.to_string(),
        gamma: cfg.gamma,
        frozen_refresh: cfg.frozen_refresh,
    }
}

fn td_examples(episodes: &[Vec<Transition>], cfg: &RunConfig) -> Vec<Example> {
    episodes
        .iter()
        .flat_map(|ep| n_step_examples(ep, cfg.n_step, cfg.gamma, normalize_state))
        .map(Example::Td)
        .collect()
}

#[allow(clippy::large_enum_variant)]
enum Data {
    Pool(ReplayBuffer<Example>, ChaCha8Rng),
    Stream(Vec<Example>),
}

impl Data {
    fn build(cfg: &RunConfig) -> Self {
        let seed = derive_seed(cfg.seed, STREAM_DATA);
        let sampler = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, STREAM_SAMPLING));
        match cfg.task {
            Task::Regression => {
                let examples = sine_dataset(cfg.dataset_size, seed)
                    .into_iter()
                    .map(|(x, y)| Example::Regression { x: vec![x], y })
                    .collect();
                Data::Pool(ReplayBuffer::from_items(examples), sampler)
            }
            Task::MountainCarReplay => {
                let episodes = collect_episodes(&EnergyPolicy, cfg.replay_episodes, seed);
                Data::Pool(
                    ReplayBuffer::from_items(td_examples(&episodes, cfg)),
                    sampler,
                )
            }
            Task::MountainCarOnline => Data::Stream(td_examples(
                &online_stream(&EnergyPolicy, cfg.total_steps, seed),
                cfg,
            )),
        }
    }

    fn batch(&mut self, step: usize, n_mb: usize) -> Vec<Example> {
        match self {
            Data::Pool(buf, rng) => buf.sample(n_mb, rng),
            Data::Stream(xs) => vec![xs[step].clone()],
        }
    }
}

enum Optimizer {
    Momentum(MomentumState),
    Corrected { state: CorrectedState, scaled: bool },
    Oracle(OracleState<Vec<Example>>),
}

impl Optimizer {
    fn new(cfg: &RunConfig, model: &ModelSpec) -> Result<Self> {
        let n = model.num_params();
        let corrected = |kind: TermKind| -> Result<CorrectedState> {
            let state = CorrectedState::new(n, kind);
            match (model, &cfg.mask) {
                (_, LayerSelector::All) => Ok(state),
                (ModelSpec::Mlp(spec), sel) => state.with_mask(make_mask(spec, sel)?),
                (_, sel) => Err(Error::config(format!("mask '{sel}' needs an MLP model"))),
            }
        };
        Ok(match cfg.optimizer {
            OptimizerKind::Momentum => Optimizer::Momentum(MomentumState::new(n)),
            OptimizerKind::Corrected => Optimizer::Corrected {
                state: corrected(TermKind::Full)?,
                scaled: false,
            },
            OptimizerKind::CorrectedDiag => Optimizer::Corrected {
                state: corrected(TermKind::Diagonal)?,
                scaled: false,
            },
            OptimizerKind::CorrectedDiagScaled => Optimizer::Corrected {
                state: corrected(TermKind::Diagonal)?.with_second_moment(),
                scaled: true,
            },
            OptimizerKind::Oracle => {
                Optimizer::Oracle(OracleState::with_horizon(cfg.oracle_window()))
            }
        })
    }

    /// One update on `batch`; returns the minibatch loss at the pre-update
    /// parameters.
    fn step(
        &mut self,
        model: &ModelSpec,
        hp: &HyperParams,
        batch: Vec<Example>,
        frozen: Option<&[f64]>,
        params: &mut [f64],
    ) -> Result<f64> {
        match self {
            Optimizer::Momentum(state) => {
                let b = grad_bundle(model, params, &batch, frozen, false);
                state.step(hp, &b.grad, params)?;
                Ok(b.mean_loss)
            }
            Optimizer::Corrected { state, scaled } => {
                let b = grad_bundle(model, params, &batch, frozen, true);
                let factors = b.taylor_factors();
                if *scaled {
                    state.step_scaled_factored(hp, &b.grad, &factors, Scaling::Mean, params)?;
                } else {
                    state.step_factored(hp, &b.grad, &factors, Scaling::Mean, params)?;
                }
                Ok(b.mean_loss)
            }
            Optimizer::Oracle(state) => {
                // The window is recomputed oldest to newest, so the last
                // evaluation is the new batch.
                let mut newest_loss = f64::NAN;
                state.step(
                    hp,
                    batch,
                    |bb, p| {
                        let b = grad_bundle(model, p, bb, frozen, false);
                        newest_loss = b.mean_loss;
                        b.grad
                    },
                    params,
                )?;
                Ok(newest_loss)
            }
        }
    }
}

fn full_loss(model: &ModelSpec, params: &[f64], data: &Data) -> Option<f64> {
    match data {
        Data::Pool(buf, _) => {
            let mut sum = 0.0;
            for e in buf.iter() {
                match e {
                    Example::Regression { x, y } => {
                        sum += 0.5 * (model.forward(params, x) - y).powi(2)
                    }
                    Example::Td(_) => return None,
                }
            }
            Some(sum / buf.len() as f64)
        }
        Data::Stream(_) => None,
    }
}

/// Trains one run and returns its metrics rows. Deterministic given `cfg`.
pub fn execute_run(cfg: &RunConfig, evals: &EvalCache) -> Result<RunOutput> {
    let started = Instant::now();
    cfg.validate()?;
    let model = build_model(cfg)?;
    let hp = cfg.hyper_params();
    let eval: Option<Arc<EvalSet>> = evals.get(cfg)?;
    let mut params = model
        .init_params(derive_seed(cfg.seed, STREAM_INIT))
        .into_vec();
    let mut data = Data::build(cfg);
    let mut opt = Optimizer::new(cfg, &model)?;
    let mut frozen = cfg
        .frozen_refresh
        .map(|k| FrozenTargetSchedule::new(&params, k));

    let run_id = cfg.run_id();
    let tags = run_tags(cfg);
    let window = effective_horizon(cfg.beta, cfg.n_mb);
    let window_steps = window.div_ceil(cfg.n_mb);
    let mut history = History::new(window);

    let regression = cfg.task == Task::Regression;
    let row =
        |step: usize, train_loss: Option<f64>, params: &[f64], history: &History, status: &str| {
            MetricsRow {
                run_id: run_id.clone(),
                seed: cfg.seed,
                tags: tags.clone(),
                step,
                train_loss,
                eval_mse: eval
                    .as_ref()
                    .map(|e| value_mse(&model, params, &e.inputs, &e.reference)),
                value_drift: value_drift(history.entries(), &model, params),
                taylor_cosine: taylor_cosine(history.entries(), &model, params),
                status: status.to_string(),
            }
        };

    let mut rows = vec![row(
        0,
        full_loss(&model, &params, &data),
        &params,
        &history,
        "ok",
    )];
    let mut status = RunStatus::Completed;
    let (mut loss_sum, mut loss_count) = (0.0, 0usize);

    for step in 0..cfg.total_steps {
        let done = step + 1;
        let next_log = (step / cfg.log_every + 1) * cfg.log_every;
        let next_log = next_log.min(cfg.total_steps);
        let batch = data.batch(step, cfg.n_mb);
        if cfg.diagnostics && next_log - step <= window_steps {
            let snapshot = Arc::new(params.clone());
            for e in &batch {
                history.push(HistoryEntry::record(
                    &model,
                    step,
                    snapshot.clone(),
                    e.clone(),
                ));
            }
        }
        let targets = frozen.as_mut().map(|f| f.targets(&params).to_vec());
        let outcome = opt.step(&model, &hp, batch, targets.as_deref(), &mut params);
        let loss = match outcome {
            Ok(l)
                if l.is_finite()
                    && l.abs() <= DIVERGENCE_LOSS
                    && params.iter().all(|p| p.is_finite()) =>
            {
                l
            }
            Ok(l) => {
                let shown = l.is_finite().then_some(l);
                rows.push(row(done, shown, &params, &History::new(1), "diverged"));
                status = RunStatus::Diverged { step: done };
                break;
            }
            Err(Error::Diverged { .. }) => {
                rows.push(row(done, None, &params, &History::new(1), "diverged"));
                status = RunStatus::Diverged { step: done };
                break;
            }
            Err(e) => return Err(e),
        };
        loss_sum += loss;
        loss_count += 1;
        if done == next_log {
            let train_loss = if regression {
                full_loss(&model, &params, &data)
            } else {
                Some(loss_sum / loss_count as f64)
            };
            rows.push(row(done, train_loss, &params, &history, "ok"));
            loss_sum = 0.0;
            loss_count = 0;
        }
    }

    Ok(RunOutput {
        record: RunRecord {
            run_id,
            status,
            wall_time: started.elapsed(),
            csv_path: None,
        },
        rows,
        final_params: params,
    })
}
