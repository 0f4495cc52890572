//! Classic Mountain Car dynamics and a fixed energy-pumping policy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MIN_POSITION: f64 = -1.2;
pub const MAX_POSITION: f64 = 0.6;
pub const MAX_SPEED: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.5;
pub const FORCE: f64 = 0.001;
pub const GRAVITY: f64 = 0.0025;
pub const STEP_REWARD: f64 = -1.0;
pub const EPISODE_CAP: usize = 1_000;

/// State as `[position, velocity]`.
pub type State = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub s: State,
    /// Force direction in `{-1, 0, +1}`.
    pub a: i8,
    pub r: f64,
    pub s_next: State,
    pub terminal: bool,
}

pub fn in_bounds(s: &State) -> bool {
    (MIN_POSITION..=MAX_POSITION).contains(&s[0]) && (-MAX_SPEED..=MAX_SPEED).contains(&s[1])
}

/// One deterministic environment step: `(s', r, terminal)`.
pub fn mountain_car_step(s: State, a: i8) -> (State, f64, bool) {
    debug_assert!((-1..=1).contains(&a));
    let [x, v] = s;
    let mut v2 =
        (v + FORCE * f64::from(a) - GRAVITY * (3.0 * x).cos()).clamp(-MAX_SPEED, MAX_SPEED);
    let x2 = (x + v2).clamp(MIN_POSITION, MAX_POSITION);
    if x2 <= MIN_POSITION && v2 < 0.0 {
        v2 = 0.0;
    }
    ([x2, v2], STEP_REWARD, x2 >= GOAL_POSITION)
}

/// Maps the state box affinely onto `[-1, 1]²`.
pub fn normalize_state(s: &State) -> State {
    [
        2.0 * (s[0] - MIN_POSITION) / (MAX_POSITION - MIN_POSITION) - 1.0,
        s[1] / MAX_SPEED,
    ]
}

pub trait Policy {
    fn act(&self, s: &State, rng: &mut ChaCha8Rng) -> i8;
}

/// Push in the direction of motion (`+1` when at rest), pumping energy into
/// the car until it escapes the valley.
#[derive(Clone, Copy, Debug, Default)]
pub struct EnergyPolicy;

pub fn energy_policy(s: &State) -> i8 {
    if s[1] >= 0.0 {
        1
    } else {
        -1
    }
}

impl Policy for EnergyPolicy {
    fn act(&self, s: &State, _rng: &mut ChaCha8Rng) -> i8 {
        energy_policy(s)
    }
}

/// Episodes from `x ~ U[-0.6, -0.4], v = 0`, each capped at
/// [`EPISODE_CAP`] steps.
pub fn collect_episodes<P: Policy>(
    policy: &P,
    n_episodes: usize,
    seed: u64,
) -> Vec<Vec<Transition>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_episodes)
        .map(|_| {
            let s0 = [rng.gen_range(-0.6..=-0.4), 0.0];
            rollout(policy, s0, EPISODE_CAP, &mut rng)
        })
        .collect()
}

pub fn rollout<P: Policy>(
    policy: &P,
    s0: State,
    cap: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Transition> {
    let mut s = s0;
    let mut out = Vec::new();
    for _ in 0..cap {
        let a = policy.act(&s, rng);
        let (s_next, r, terminal) = mountain_car_step(s, a);
        out.push(Transition {
            s,
            a,
            r,
            s_next,
            terminal,
        });
        if terminal {
            break;
        }
        s = s_next;
    }
    out
}

pub fn collect_transitions<P: Policy>(policy: &P, n_episodes: usize, seed: u64) -> Vec<Transition> {
    collect_episodes(policy, n_episodes, seed)
        .into_iter()
        .flatten()
        .collect()
}

/// Whole episodes, in order, until at least `n` transitions exist; the
/// stream is cut at exactly `n`.
pub fn online_stream<P: Policy>(policy: &P, n: usize, seed: u64) -> Vec<Vec<Transition>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut episodes = Vec::new();
    let mut total = 0;
    while total < n {
        let s0 = [rng.gen_range(-0.6..=-0.4), 0.0];
        let mut ep = rollout(policy, s0, EPISODE_CAP, &mut rng);
        ep.truncate(n - total);
        total += ep.len();
        episodes.push(ep);
    }
    episodes
}
