//! Incomplete model defined by a level-set sampler.
//!
//! Replaces the analytic entry-game masses with empirical frequencies of
//! simulated predicted sets and compares the two.

use std::sync::Arc;

use robust_lr::capacity::OutcomeSpace;
use robust_lr::model::{entry_game_model, entry_game_sampler, simulated_model, ENTRY_LABELS};

/// Run the simulated-model walkthrough.
pub fn run_example() -> robust_lr::Result<()> {
    let space = OutcomeSpace::new(ENTRY_LABELS)?;
    let domain = Arc::new(|t: &[f64]| t.iter().all(|v| *v <= 0.0));
    let sim = simulated_model(space, 2, domain, entry_game_sampler(), 200_000, 3);
    let exact = entry_game_model();
    let theta = [-1.0, -0.5];
    let (a, b) = (exact.mass_at(&theta)?, sim.mass_at(&theta)?);
    println!("{:>12} {:>10} {:>10}", "focal set", "analytic", "simulated");
    for &(k, m) in a.focal() {
        let names: Vec<&str> = k.members().map(|s| ENTRY_LABELS[s]).collect();
        println!("{:>12} {:>10.5} {:>10.5}", names.join(""), m, b.mass(k));
        assert!((m - b.mass(k)).abs() < 0.01);
    }
    Ok(())
}

fn main() -> robust_lr::Result<()> {
    run_example()
}
