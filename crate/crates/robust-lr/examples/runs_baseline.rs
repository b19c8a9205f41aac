//! Runs test on the mixed outcomes of the entry game.
//!
//! With clustered equilibrium selection the order of the `(1,0)` and `(0,1)`
//! outcomes is not exchangeable, so a runs test detects interaction effects
//! once they are large enough to leave many multiple-equilibrium draws.

use robust_lr::simlab::{estimate_power, AltPath, DesignModel, PowerCurveSpec, SelectionSpec, StatisticSpec};

/// Runs-test rejection rates at `θ = w·(−1, −1)` under clustered selection.
pub fn runs_rates(reps: usize) -> robust_lr::Result<Vec<(f64, f64)>> {
    let spec = PowerCurveSpec {
        model: DesignModel::EntryGame,
        theta0: vec![0.0, 0.0],
        path: AltPath::Shift { xi: vec![-1.0, -1.0], grid: vec![0.0, 1.0, 2.0, 3.0] },
        n: 1000,
        reps,
        alpha: 0.05,
        seed: 11,
        statistic: StatisticSpec::Runs,
        selections: vec![SelectionSpec::InidCluster { tail: Default::default() }],
    };
    Ok(estimate_power(&spec)?.iter().map(|r| (r.grid_value, r.reject_rate)).collect())
}

/// Run the runs-test walkthrough.
pub fn run_example() -> robust_lr::Result<()> {
    let rates = runs_rates(400)?;
    println!("{:>4} {:>12}", "w", "runs rate");
    for (w, rate) in &rates {
        println!("{w:>4.1} {rate:>12.4}");
    }
    assert!(rates[3].1 > 0.05, "far from the null the runs test rejects more often than alpha");
    Ok(())
}

fn main() -> robust_lr::Result<()> {
    run_example()
}
