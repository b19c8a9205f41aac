//! Least-favorable pair of the entry game.
//!
//! Solves the pair for a null of no strategic interaction against
//! `θ1 = (−1, −1)`, compares it with the closed form, and checks the
//! level-set equalities that make it least favorable.

use robust_lr::lfp::{solve_lfp, verify_lfp, LfpProblem};
use robust_lr::model::{entry_game_model, ENTRY_LABELS};
use robust_lr::normal;

/// Run the pair walkthrough.
pub fn run_example() -> robust_lr::Result<()> {
    let model = entry_game_model();
    let (m0, m1) = (model.mass_at(&[0.0, 0.0])?, model.mass_at(&[-1.0, -1.0])?);
    let sol = solve_lfp(&LfpProblem::new(m0.clone(), m1.clone())?)?;

    let phi = normal::cdf(-1.0);
    let closed = [0.25, phi * phi, (3.0 - 4.0 * phi * phi) / 8.0, (3.0 - 4.0 * phi * phi) / 8.0];
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "s", "q0", "q1", "closed q1", "ratio");
    for s in 0..4 {
        let ratio = sol.lambda[s].map_or("undef".to_string(), |v| format!("{v:.6}"));
        println!("{:>6} {:>10.6} {:>10.6} {:>10.6} {:>10}", ENTRY_LABELS[s], sol.q0[s], sol.q1[s], closed[s], ratio);
        assert!((sol.q1[s] - closed[s]).abs() < 1e-6);
    }

    let report = verify_lfp(&sol, &m0, &m1);
    println!("level-set check: pass = {}, worst violation {:.2e}", report.pass, report.worst_violation);
    assert!(report.pass);
    Ok(())
}

fn main() -> robust_lr::Result<()> {
    run_example()
}
