//! Mountain Car under the energy-pumping policy: episodes, the reachable
//! evaluation grid, Monte-Carlo reference values and the transition CSV.
use tdmomentum::tasks::io::{write_reference, write_transitions};
use tdmomentum::tasks::{collect_episodes, reachable_grid_states, reference_values, EnergyPolicy};

fn main() -> tdmomentum::Result<()> {
    let episodes = collect_episodes(&EnergyPolicy, 20, 0);
    let lengths: Vec<usize> = episodes.iter().map(Vec::len).collect();
    println!(
        "20 episodes, lengths {}..{}",
        lengths.iter().min().unwrap(),
        lengths.iter().max().unwrap()
    );

    let states = reachable_grid_states(40, &EnergyPolicy, 100, 0);
    println!(
        "{} of 1600 grid cells are visited by the policy",
        states.len()
    );
    for gamma in [0.9, 0.99] {
        let values = reference_values(&states, &EnergyPolicy, gamma, 1, 0);
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("gamma {gamma}: reference values in [{lo:.3}, {hi:.3}]");
    }

    let dir = std::env::temp_dir().join("tdmomentum-mountain-car");
    std::fs::create_dir_all(&dir)?;
    let transitions: Vec<_> = episodes.into_iter().flatten().collect();
    write_transitions(
        std::fs::File::create(dir.join("transitions.csv"))?,
        &transitions,
    )?;
    let values = reference_values(&states, &EnergyPolicy, 0.99, 1, 0);
    write_reference(
        std::fs::File::create(dir.join("reference.csv"))?,
        &states,
        &values,
    )?;
    println!(
        "wrote {} transitions and {} reference values to {}",
        transitions.len(),
        values.len(),
        dir.display()
    );
    Ok(())
}
