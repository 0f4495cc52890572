use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mountain_car::{
    collect_episodes, rollout, Policy, State, EPISODE_CAP, MAX_POSITION, MAX_SPEED, MIN_POSITION,
};

/// Monte-Carlo value of each state: the mean discounted return over
/// `n_rollouts` rollouts of at most [`EPISODE_CAP`] steps. Rollout `k` of
/// state `i` draws from a generator seeded with `seed ^ (i * n_rollouts + k)`.
pub fn reference_values<P: Policy>(
    states: &[State],
    policy: &P,
    gamma: f64,
    n_rollouts: usize,
    seed: u64,
) -> Vec<f64> {
    let n_rollouts = n_rollouts.max(1);
    states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let total: f64 = (0..n_rollouts)
                .map(|k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i * n_rollouts + k) as u64);
                    discounted_return(&rollout(policy, *s, EPISODE_CAP, &mut rng), gamma)
                })
                .sum();
            total / n_rollouts as f64
        })
        .collect()
}

fn discounted_return(traj: &[super::mountain_car::Transition], gamma: f64) -> f64 {
    let mut g = 0.0;
    for t in traj.iter().rev() {
        g = t.r + gamma * g;
    }
    g
}

/// Centers of the cells of a `grid_n x grid_n` grid over the state box that
/// are visited by `n_episodes` on-policy episodes, row-major in position.
pub fn reachable_grid_states<P: Policy>(
    grid_n: usize,
    policy: &P,
    n_episodes: usize,
    seed: u64,
) -> Vec<State> {
    let cell = |v: f64, lo: f64, hi: f64| -> usize {
        (((v - lo) / (hi - lo) * grid_n as f64).floor() as usize).min(grid_n - 1)
    };
    let mut visited = vec![false; grid_n * grid_n];
    for ep in collect_episodes(policy, n_episodes, seed) {
        for t in ep {
            let i = cell(t.s[0], MIN_POSITION, MAX_POSITION);
            let j = cell(t.s[1], -MAX_SPEED, MAX_SPEED);
            visited[i * grid_n + j] = true;
        }
    }
    let center = |k: usize, lo: f64, hi: f64| lo + (hi - lo) * (k as f64 + 0.5) / grid_n as f64;
    (0..grid_n * grid_n)
        .filter(|&c| visited[c])
        .map(|c| {
            [
                center(c / grid_n, MIN_POSITION, MAX_POSITION),
                center(c % grid_n, -MAX_SPEED, MAX_SPEED),
            ]
        })
        .collect()
}
