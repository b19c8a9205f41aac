//! Bayes tests against mixtures of belief functions.
//!
//! Builds the Bayes test for point priors, calibrates the loss ratio to a
//! target upper size, and searches a lattice of null priors for the one with
//! the largest minimal risk.

use robust_lr::bds::{bds_risk, bds_test, calibrate_zeta, least_favorable_prior_search, BdsConfig, DiscretePrior};
use robust_lr::model::entry_game_model;

/// Run the Bayes-test walkthrough.
pub fn run_example() -> robust_lr::Result<()> {
    let model = entry_game_model();
    let mu0 = DiscretePrior::point(vec![0.0, 0.0]);
    let mu1 = DiscretePrior::new(vec![(vec![-1.0, -1.0], 0.5), (vec![-2.0, -0.5], 0.5)])?;
    let config = BdsConfig::new(0.5, 1.0)?;

    let test = bds_test(&model, &mu0, &mu1, &config)?;
    println!("threshold C = {:.4}, test table {:?}, risk {:.6}", config.threshold(), test.phi, test.risk);
    let check = bds_risk(&model, &test.phi, &mu0, &mu1, &config)?;
    assert!((check - test.risk).abs() < 1e-12);

    let (zeta, size) = calibrate_zeta(&model, &mu0, &mu1, 0.5, 0.05, 1e-3, 1e3)?;
    println!("largest loss ratio with upper size at most 0.05: {zeta:.4} (upper size {size:.4})");

    let grid = vec![vec![0.0, 0.0], vec![-0.1, 0.0], vec![0.0, -0.1]];
    let search = least_favorable_prior_search(&model, &grid, &mu1, 1.0, &[0.3, 0.5, 0.7], 0.25)?;
    println!(
        "prior search over {} candidates: tau {}, risk {:.6}, null weights {:?}",
        search.candidates,
        search.tau,
        search.risk,
        search.mu0.atoms().iter().map(|a| a.weight).collect::<Vec<_>>()
    );
    Ok(())
}

fn main() -> robust_lr::Result<()> {
    run_example()
}
