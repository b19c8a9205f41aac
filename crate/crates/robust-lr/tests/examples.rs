//! Every example under `examples/` runs to completion.

#[allow(dead_code)]
#[path = "../examples/capacities.rs"]
mod capacities;

#[test]
fn capacities_example_runs() {
    capacities::run_example().expect("capacities example should run");
}

#[allow(dead_code)]
#[path = "../examples/least_favorable_pair.rs"]
mod least_favorable_pair;

#[test]
fn least_favorable_pair_example_runs() {
    least_favorable_pair::run_example().expect("least favorable pair example should run");
}

#[allow(dead_code)]
#[path = "../examples/minimax_tests.rs"]
mod minimax_tests;

#[test]
fn minimax_tests_example_runs() {
    minimax_tests::run_example().expect("minimax tests example should run");
}

#[allow(dead_code)]
#[path = "../examples/local_power.rs"]
mod local_power;

#[test]
fn local_power_example_runs() {
    local_power::run_example().expect("local power example should run");
}

#[allow(dead_code)]
#[path = "../examples/bds_tests.rs"]
mod bds_tests;

#[test]
fn bds_tests_example_runs() {
    bds_tests::run_example().expect("bds tests example should run");
}

#[allow(dead_code)]
#[path = "../examples/power_curves.rs"]
mod power_curves;

#[test]
fn power_curves_example_runs() {
    power_curves::run_example().expect("power curves example should run");
}

#[allow(dead_code)]
#[path = "../examples/runs_baseline.rs"]
mod runs_baseline;

#[test]
fn runs_baseline_example_runs() {
    runs_baseline::run_example().expect("runs baseline example should run");
}

#[allow(dead_code)]
#[path = "../examples/covariates.rs"]
mod covariates;

#[test]
fn covariates_example_runs() {
    covariates::run_example().expect("covariates example should run");
}

#[allow(dead_code)]
#[path = "../examples/simulated_model.rs"]
mod simulated_model;

#[test]
fn simulated_model_example_runs() {
    simulated_model::run_example().expect("simulated model example should run");
}

#[allow(dead_code)]
#[path = "../examples/cli_config.rs"]
mod cli_config;

#[test]
fn cli_config_example_runs() {
    cli_config::run_example().expect("cli config example should run");
}
