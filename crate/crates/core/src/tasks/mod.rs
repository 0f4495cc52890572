//! Experimental substrates: sine regression, Mountain Car policy evaluation,
//! data regimes and loss/gradient assembly.

mod examples;
mod grad;
pub mod io;
pub mod mountain_car;
mod reference;
mod replay;
mod sine;

pub use examples::{n_step_examples, Example, TdExample};
pub use grad::{
    grad_bundle, regression_grad_bundle, sample_grad, td0_grad_bundle, GradBundle, SampleGrad,
};
pub use mountain_car::{
    collect_episodes, collect_transitions, energy_policy, mountain_car_step, normalize_state,
    online_stream, EnergyPolicy, Policy, State, Transition,
};
pub use reference::{reachable_grid_states, reference_values};
pub use replay::{FrozenTargetSchedule, ReplayBuffer};
pub use sine::{sine_dataset, sine_target, SINE_DATASET_SIZE};
