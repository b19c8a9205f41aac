//! Minimax likelihood-ratio tests from a least-favorable pair.
//!
//! Exact critical values come from enumerating the log-ratio distribution
//! for small samples; larger samples use the normal approximation.

use robust_lr::lfp::{solve_lfp, LfpProblem};
use robust_lr::model::entry_game_model;
use robust_lr::testing::{exact_critical_value, gaussian_critical_value, size_and_lower_power};

/// Run the test walkthrough.
pub fn run_example() -> robust_lr::Result<()> {
    let model = entry_game_model();
    let sol = solve_lfp(&LfpProblem::new(model.mass_at(&[0.0, 0.0])?, model.mass_at(&[-1.0, -1.0])?)?)?;
    let alpha = 0.05;

    println!("{:>6} {:>10} {:>12} {:>8} {:>12} {:>12}", "n", "method", "log C", "gamma", "upper size", "lower power");
    for n in [1, 10, 50, 100] {
        let test = exact_critical_value(&sol, n, alpha)?;
        let sp = size_and_lower_power(&sol, &test)?;
        println!(
            "{:>6} {:>10} {:>12.6} {:>8.4} {:>12.8} {:>12.6}",
            n,
            sp.method.as_str(),
            test.log_c,
            test.gamma,
            sp.upper_size,
            sp.lower_power
        );
        assert!((sp.upper_size - alpha).abs() < 1e-10);
    }
    let test = gaussian_critical_value(&sol, 1000, alpha)?;
    let sp = size_and_lower_power(&sol, &test)?;
    println!(
        "{:>6} {:>10} {:>12.6} {:>8.4} {:>12.8} {:>12.6}",
        1000,
        sp.method.as_str(),
        test.log_c,
        test.gamma,
        sp.upper_size,
        sp.lower_power
    );
    Ok(())
}

fn main() -> robust_lr::Result<()> {
    run_example()
}
