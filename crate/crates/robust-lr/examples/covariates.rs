//! Conditional least-favorable pairs with a discrete covariate.
//!
//! Each covariate value shifts the entry-game payoffs; one pair is solved per
//! slice and the statistic adds the per-observation log ratios.

use robust_lr::model::entry_game_model;
use robust_lr::testing::covariate_lfp;

/// Run the covariate walkthrough.
pub fn run_example() -> robust_lr::Result<()> {
    let base = entry_game_model();
    let slices = vec![
        ("small market".to_string(), base.shifted(vec![-0.5, -0.5])?),
        ("large market".to_string(), base.clone()),
    ];
    let pairs = covariate_lfp(&slices, &[0.0, 0.0], &[-1.0, -1.0])?;
    for slice in &pairs.slices {
        match &slice.solution {
            Some(sol) => println!("{}: ratios {:?}", slice.key, sol.lambda),
            None => println!("{}: not robustly testable", slice.key),
        }
    }
    let sample = [(0, 1), (0, 2), (1, 3), (1, 1), (1, 0)];
    println!("log statistic on {} observations: {:.6}", sample.len(), pairs.log_statistic(&sample)?);
    Ok(())
}

fn main() -> robust_lr::Result<()> {
    run_example()
}
