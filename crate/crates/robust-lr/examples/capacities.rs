//! Belief functions on a three-point outcome space.
//!
//! Builds a mass function, prints its lower and upper probabilities on every
//! event, inverts the lower table back to masses, and checks Choquet
//! integrals against linear programs over the core.

use robust_lr::capacity::{core_lp, mobius_inverse, BeliefMass, Direction, OutcomeSpace};

/// Run the capacity walkthrough.
pub fn run_example() -> robust_lr::Result<()> {
    let space = OutcomeSpace::new(["a", "b", "c"])?;
    let mass = BeliefMass::new(
        space.clone(),
        [
            (space.mask_of(&["a"])?, 0.2),
            (space.mask_of(&["b"])?, 0.3),
            (space.mask_of(&["a", "b"])?, 0.4),
            (space.mask_of(&["a", "b", "c"])?, 0.1),
        ],
    )?;

    println!("{:>8} {:>8} {:>8}", "event", "lower", "upper");
    for a in space.proper_subsets() {
        let names: Vec<&str> = a.members().map(|s| space.labels()[s].as_str()).collect();
        println!("{:>8} {:>8.3} {:>8.3}", names.join(""), mass.lower(a), mass.upper(a));
    }

    let recovered = mobius_inverse(&mass.lower_table())?;
    for &(k, m) in mass.focal() {
        assert!((recovered.mass(k) - m).abs() < 1e-12);
    }
    println!("Möbius inverse recovers all {} focal masses", mass.focal().len());

    let f = [1.0, -2.0, 0.5];
    let (lp_lo, _) = core_lp(&mass, &f, Direction::Min)?;
    let (lp_hi, _) = core_lp(&mass, &f, Direction::Max)?;
    println!("Choquet lower {:.6} vs core LP {:.6}", mass.choquet_lower(&f), lp_lo);
    println!("Choquet upper {:.6} vs core LP {:.6}", mass.choquet_upper(&f), lp_hi);
    assert!((mass.choquet_lower(&f) - lp_lo).abs() < 1e-9);
    assert!((mass.choquet_upper(&f) - lp_hi).abs() < 1e-9);
    Ok(())
}

fn main() -> robust_lr::Result<()> {
    run_example()
}
