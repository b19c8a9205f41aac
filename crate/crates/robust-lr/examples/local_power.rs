//! Local expansion and power envelope of the entry game near no interaction.
//!
//! Differentiates the least-favorable pair along directions of the cone of
//! negative interaction effects, projects onto the cone's scores, and prints
//! the envelope for the hypothesis `p'h = 0` with `p = (−1, −1)`.

use robust_lr::localpower::{
    build_expansion, efficient_influence, l2_score_from_derivative, lfp_directional_derivative, Cone,
};
use robust_lr::model::{entry_game_model, ENTRY_LABELS};

/// Run the local-power walkthrough.
pub fn run_example() -> robust_lr::Result<()> {
    let model = entry_game_model();
    let (theta0, xi) = ([0.0, 0.0], [0.0, 0.0]);

    for h in [[-1.0, -1.0], [0.0, -1.0], [-1.0, -3.0]] {
        let der = lfp_directional_derivative(&model, &theta0, &xi, &h)?;
        let score = l2_score_from_derivative(&der.u1, &[0.25; 4])?;
        let shown: Vec<String> = ENTRY_LABELS.iter().zip(&score).map(|(l, v)| format!("{l}: {v:+.4}")).collect();
        println!("h = {h:?}: score {}", shown.join(", "));
    }

    let cone = Cone::new(vec![vec![-1.0, -1.0]])?;
    let expansion = build_expansion(&model, &theta0, &xi, &cone)?;
    let eif = efficient_influence(&expansion, &[-1.0, -1.0])?;
    println!("efficient influence {:?}, norm {:.6}", eif.rho_eff, eif.norm_eff);
    println!("{:>6} {:>10}", "h", "envelope");
    for hbar in [0.0, 0.5, 1.0, 1.5, 2.0] {
        println!("{:>6.1} {:>10.6}", hbar, eif.envelope(&expansion, &[-hbar, -hbar], 0.05));
    }
    Ok(())
}

fn main() -> robust_lr::Result<()> {
    run_example()
}
