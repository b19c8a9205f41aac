//! Running a JSON configuration in process.
//!
//! The command-line binary reads the same configuration from a file; this
//! example builds it from a string, runs it, and runs the self-check.

use robust_lr::cli::{check, run, RunConfig};

/// Configuration solving the entry-game pair and its minimax test at `n = 20`.
pub const CONFIG: &str = r#"{
  "command": "test",
  "model": "entry_game",
  "theta0": [0.0, 0.0],
  "theta1": [-1.0, -1.0],
  "alpha": 0.05,
  "n": 20
}"#;

/// Run the configuration walkthrough.
pub fn run_example() -> robust_lr::Result<()> {
    let config = RunConfig::from_json_str(CONFIG)?;
    let artifacts = run(&config)?;
    println!("{}", artifacts.main);
    let report = check(&config)?;
    for line in &report.lines {
        println!("{line}");
    }
    assert!(report.pass);
    Ok(())
}

fn main() -> robust_lr::Result<()> {
    run_example()
}
