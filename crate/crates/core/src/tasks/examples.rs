use super::mountain_car::{State, Transition};

/// One bootstrapped TD example in model input coordinates: the target is
/// `ret + discount * V(s_next)`, with `discount = 0` when the episode ended.
#[derive(Clone, Debug, PartialEq)]
pub struct TdExample {
    pub s: Vec<f64>,
    pub ret: f64,
    pub s_next: Vec<f64>,
    pub discount: f64,
}

impl TdExample {
    pub fn from_transition(t: &Transition, gamma: f64, encode: impl Fn(&State) -> State) -> Self {
        TdExample {
            s: encode(&t.s).to_vec(),
            ret: t.r,
            s_next: encode(&t.s_next).to_vec(),
            discount: if t.terminal { 0.0 } else { gamma },
        }
    }
}

/// A single training example for either loss.
#[derive(Clone, Debug, PartialEq)]
pub enum Example {
    Regression { x: Vec<f64>, y: f64 },
    Td(TdExample),
}

impl Example {
    /// The input whose value a bootstrap target depends on, if any.
    pub fn bootstrap_input(&self) -> Option<&[f64]> {
        match self {
            Example::Td(td) => Some(&td.s_next),
            Example::Regression { .. } => None,
        }
    }
}

/// n-step examples along one episode (transitions in order). Returns are
/// truncated at a terminal transition (no bootstrap) or at the end of a
/// truncated episode (bootstrap from the last successor with `γ^k`).
pub fn n_step_examples(
    episode: &[Transition],
    n: usize,
    gamma: f64,
    encode: impl Fn(&State) -> State,
) -> Vec<TdExample> {
    assert!(n >= 1, "n-step returns need n >= 1");
    (0..episode.len())
        .map(|t| {
            let mut ret = 0.0;
            let mut disc = 1.0;
            let mut last = &episode[t];
            for tr in episode[t..].iter().take(n) {
                ret += disc * tr.r;
                disc *= gamma;
                last = tr;
                if tr.terminal {
                    break;
                }
            }
            TdExample {
                s: encode(&episode[t].s).to_vec(),
                ret,
                s_next: encode(&last.s_next).to_vec(),
                discount: if last.terminal { 0.0 } else { disc },
            }
        })
        .collect()
}
