//! Configuration-driven workflows behind the `robust-lr` binary.
//!
//! A run reads one JSON [`RunConfig`], validates every field the chosen
//! command needs, computes the result in memory and only then writes it.
//! JSON numbers are printed with 17 significant digits and infinities as the
//! strings `"inf"` and `"-inf"`, so identical configurations give identical
//! bytes.
//!
//! Exit statuses: [`EXIT_OK`] on success, [`EXIT_VALIDATION`] when the
//! configuration or the instance is invalid, [`EXIT_SOLVER`] when a solver or
//! a `--check` cross-check fails.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::bds::{bds_risk, bds_test, BdsConfig, DiscretePrior};
use crate::capacity::{core_lp, Direction, SubsetMask};
use crate::error::{Error, Result};
use crate::lfp::{solve_lfp, verify_lfp, LfpProblem};
use crate::localpower::{build_expansion, efficient_influence, power_envelope, Cone};
use crate::model::{IncompleteModel, ModelSpec};
use crate::simlab::{estimate_power, write_power_csv, PowerCurveSpec};
use crate::testing::{exact_critical_value, fmt_f64, gaussian_critical_value, number, size_and_lower_power, EXACT_CAP};

/// Successful run.
pub const EXIT_OK: i32 = 0;
/// Malformed configuration or invalid instance.
pub const EXIT_VALIDATION: i32 = 2;
/// Solver failure or failed cross-check.
pub const EXIT_SOLVER: i32 = 3;

/// Absolute tolerance of the capacity versus LP cross-check.
pub const CHECK_TOL: f64 = 1e-9;

/// Command-line flags.
#[derive(Debug, Clone, Parser)]
#[command(name = "robust-lr", version, about = "Robust minimax likelihood-ratio inference for incomplete models")]
pub struct Args {
    /// Path of the JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Seed overriding the one in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Verify the least-favorable pair and the capacity tables of the instance without writing artifacts.
    #[arg(long)]
    pub check: bool,
}

/// Workflow selected by a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Lower and upper capacity tables at `theta0`.
    Belief,
    /// Least-favorable pair for `theta0` against `theta1`.
    Lfp,
    /// Minimax test with upper size and lower power.
    Test,
    /// Efficient influence function and power envelope on a cone.
    Envelope,
    /// Monte Carlo power curves.
    Simulate,
    /// Bayes-Dempster-Shafer test and its robust risk.
    Bds,
}

/// Critical-value method requested by the `test` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalValue {
    /// Exact when `n` is at most [`EXACT_CAP`], Gaussian otherwise.
    #[default]
    Auto,
    /// Exact enumeration.
    Exact,
    /// Normal approximation.
    Gaussian,
}

/// One run of the binary.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Workflow.
    pub command: Command,
    /// Builder name or inline model table; not used by `simulate`.
    #[serde(default)]
    pub model: Option<ModelSpec>,
    /// Null parameter.
    #[serde(default)]
    pub theta0: Option<Vec<f64>>,
    /// Alternative parameter.
    #[serde(default)]
    pub theta1: Option<Vec<f64>>,
    /// Level.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Sample size.
    #[serde(default)]
    pub n: Option<usize>,
    /// Critical-value method for `test`.
    #[serde(default)]
    pub critical_value: CriticalValue,
    /// Offset of the alternative base point for `envelope`.
    #[serde(default)]
    pub xi: Option<Vec<f64>>,
    /// Cone generators for `envelope`.
    #[serde(default)]
    pub cone: Option<Vec<Vec<f64>>>,
    /// Linear functional `p'h` for `envelope`.
    #[serde(default)]
    pub p: Option<Vec<f64>>,
    /// Local directions at which `envelope` evaluates the power envelope.
    #[serde(default)]
    pub h_grid: Option<Vec<Vec<f64>>>,
    /// Power-curve design for `simulate`.
    #[serde(default)]
    pub simulation: Option<PowerCurveSpec>,
    /// Null prior for `bds`.
    #[serde(default)]
    pub mu0: Option<DiscretePrior>,
    /// Alternative prior for `bds`.
    #[serde(default)]
    pub mu1: Option<DiscretePrior>,
    /// Prior weight on the null for `bds`.
    #[serde(default)]
    pub tau: Option<f64>,
    /// Loss ratio for `bds`.
    #[serde(default)]
    pub zeta: Option<f64>,
    /// Optional test table whose robust risk `bds` also reports.
    #[serde(default)]
    pub phi: Option<Vec<f64>>,
    /// Seed for `simulate`; overridden by `--seed`.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Output path; overridden by `--out`.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Artifacts of a run, held in memory until the run has succeeded.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    /// Main artifact: JSON text or power-curve CSV.
    pub main: String,
    /// Envelope grid CSV, written next to the main artifact.
    pub grid_csv: Option<String>,
}

/// Exit status for an error: validation problems map to 2, solver problems to 3.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidInput(_)
        | Error::DomainError(_)
        | Error::NotBeliefFunction { .. }
        | Error::NotRobustlyTestable
        | Error::CoresIntersect
        | Error::ExactModeTooLarge { .. } => EXIT_VALIDATION,
        _ => EXIT_SOLVER,
    }
}

fn need<'a, T>(field: &'a Option<T>, name: &str, command: Command) -> Result<&'a T> {
    field.as_ref().ok_or_else(|| Error::Config(format!("command {command:?} requires field `{name}`")))
}

fn check_dim(v: &[f64], d: usize, name: &str) -> Result<()> {
    if v.len() != d || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config(format!("`{name}` must have {d} finite entries")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha = {alpha} is outside (0, 1)")));
    }
    Ok(())
}

impl RunConfig {
    /// Parse JSON text; any syntax or schema problem is a configuration error.
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read and parse a configuration file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    fn model(&self) -> Result<IncompleteModel> {
        need(&self.model, "model", self.command)?.build()
    }

    /// Check that every field the command needs is present and well formed.
    pub fn validate(&self) -> Result<()> {
        let cmd = self.command;
        if cmd == Command::Simulate {
            let spec = need(&self.simulation, "simulation", cmd)?;
            check_alpha(spec.alpha)?;
            return Ok(());
        }
        let model = self.model()?;
        let d = model.dim();
        let theta0 = need(&self.theta0, "theta0", cmd)?;
        check_dim(theta0, d, "theta0")?;
        model.check(theta0)?;
        match cmd {
            Command::Belief | Command::Simulate => {}
            Command::Lfp | Command::Test => {
                let theta1 = need(&self.theta1, "theta1", cmd)?;
                check_dim(theta1, d, "theta1")?;
                model.check(theta1)?;
                if cmd == Command::Test {
                    check_alpha(*need(&self.alpha, "alpha", cmd)?)?;
                    if *need(&self.n, "n", cmd)? == 0 {
                        return Err(Error::Config("`n` must be positive".into()));
                    }
                }
            }
            Command::Envelope => {
                check_dim(need(&self.xi, "xi", cmd)?, d, "xi")?;
                check_dim(need(&self.p, "p", cmd)?, d, "p")?;
                check_alpha(*need(&self.alpha, "alpha", cmd)?)?;
                let cone = need(&self.cone, "cone", cmd)?;
                if cone.is_empty() {
                    return Err(Error::Config("`cone` needs at least one generator".into()));
                }
                for g in cone {
                    check_dim(g, d, "cone generator")?;
                }
                for h in self.h_grid.iter().flatten() {
                    check_dim(h, d, "h_grid entry")?;
                }
            }
            Command::Bds => {
                let mu0 = need(&self.mu0, "mu0", cmd)?;
                let mu1 = need(&self.mu1, "mu1", cmd)?;
                for atom in mu0.atoms().iter().chain(mu1.atoms()) {
                    check_dim(&atom.theta, d, "prior atom")?;
                    model.check(&atom.theta)?;
                }
                BdsConfig::new(*need(&self.tau, "tau", cmd)?, *need(&self.zeta, "zeta", cmd)?)?;
                if let Some(phi) = &self.phi {
                    if phi.len() != model.space().len() || phi.iter().any(|v| !(0.0..=1.0).contains(v)) {
                        return Err(Error::Config("`phi` needs one value in [0, 1] per outcome".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Compute the artifacts of a validated configuration.
pub fn run(config: &RunConfig) -> Result<Artifacts> {
    config.validate()?;
    let cmd = config.command;
    let main = match cmd {
        Command::Simulate => {
            let mut spec = need(&config.simulation, "simulation", cmd)?.clone();
            if let Some(seed) = config.seed {
                spec.seed = seed;
            }
            let rows = estimate_power(&spec)?;
            let mut buf = Vec::new();
            write_power_csv(&rows, &mut buf)?;
            return Ok(Artifacts {
                main: String::from_utf8(buf).map_err(|e| Error::InvalidInput(e.to_string()))?,
                grid_csv: None,
            });
        }
        Command::Belief => belief_json(config)?,
        Command::Lfp => lfp_json(config)?,
        Command::Test => test_json(config)?,
        Command::Envelope => return envelope_artifacts(config),
        Command::Bds => bds_json(config)?,
    };
    Ok(Artifacts { main: to_json_string(&main), grid_csv: None })
}

fn belief_json(config: &RunConfig) -> Result<Value> {
    let model = config.model()?;
    let theta = need(&config.theta0, "theta0", config.command)?;
    let mass = model.mass_at(theta)?;
    let lower = mass.lower_table();
    let upper = mass.upper_table();
    let space = model.space();
    let events: Vec<Value> = (0..space.subset_count() as u32)
        .map(|a| {
            let m = SubsetMask(a);
            let members: Vec<&str> = m.members().map(|s| space.labels()[s].as_str()).collect();
            json!({"mask": a, "outcomes": members, "lower": lower.get(m), "upper": upper.get(m), "mobius": mass.mass(m)})
        })
        .collect();
    Ok(json!({"command": "belief", "model": model.name(), "theta": theta, "labels": space.labels(), "events": events}))
}

fn lfp_json(config: &RunConfig) -> Result<Value> {
    let model = config.model()?;
    let m0 = model.mass_at(need(&config.theta0, "theta0", config.command)?)?;
    let m1 = model.mass_at(need(&config.theta1, "theta1", config.command)?)?;
    let sol = solve_lfp(&LfpProblem::new(m0.clone(), m1.clone())?)?;
    let report = verify_lfp(&sol, &m0, &m1);
    Ok(json!({"command": "lfp", "model": model.name(), "lfp": sol.to_json(model.space()), "verify": report.to_json()}))
}

fn test_json(config: &RunConfig) -> Result<Value> {
    let model = config.model()?;
    let m0 = model.mass_at(need(&config.theta0, "theta0", config.command)?)?;
    let m1 = model.mass_at(need(&config.theta1, "theta1", config.command)?)?;
    let alpha = *need(&config.alpha, "alpha", config.command)?;
    let n = *need(&config.n, "n", config.command)?;
    let sol = solve_lfp(&LfpProblem::new(m0, m1)?)?;
    let test = match config.critical_value {
        CriticalValue::Exact => exact_critical_value(&sol, n, alpha)?,
        CriticalValue::Gaussian => gaussian_critical_value(&sol, n, alpha)?,
        CriticalValue::Auto if n <= EXACT_CAP => exact_critical_value(&sol, n, alpha)?,
        CriticalValue::Auto => gaussian_critical_value(&sol, n, alpha)?,
    };
    let sp = size_and_lower_power(&sol, &test)?;
    let labels = model.space().labels();
    let region: Vec<&str> = test.region().into_iter().map(|s| labels[s].as_str()).collect();
    let phi: Vec<f64> = (0..labels.len()).map(|s| test.phi(&[s])).collect();
    let randomized: Vec<&str> =
        (0..labels.len()).filter(|&s| phi[s] > 0.0 && phi[s] < 1.0).map(|s| labels[s].as_str()).collect();
    Ok(json!({
        "command": "test",
        "model": model.name(),
        "test": test.to_json(),
        "region": region,
        "randomized_region": randomized,
        "phi_single": phi,
        "upper_size": sp.upper_size,
        "lower_power": sp.lower_power,
        "size_method": sp.method.as_str(),
        "lfp": sol.to_json(model.space()),
    }))
}

fn envelope_artifacts(config: &RunConfig) -> Result<Artifacts> {
    let cmd = config.command;
    let model = config.model()?;
    let theta0 = need(&config.theta0, "theta0", cmd)?;
    let xi = need(&config.xi, "xi", cmd)?;
    let p = need(&config.p, "p", cmd)?;
    let alpha = *need(&config.alpha, "alpha", cmd)?;
    let cone = Cone::new(need(&config.cone, "cone", cmd)?.clone())?;
    let exp = build_expansion(&model, theta0, xi, &cone)?;
    let env = efficient_influence(&exp, p)?;
    let grid: Vec<(Vec<f64>, f64)> =
        config.h_grid.iter().flatten().map(|h| (h.clone(), power_envelope(&env, &exp, h, alpha))).collect();
    let mut csv = String::from("h,p_h,envelope_value\n");
    for (h, v) in &grid {
        let coords: Vec<String> = h.iter().map(|x| fmt_f64(*x)).collect();
        let ph: f64 = p.iter().zip(h).map(|(a, b)| a * b).sum();
        let _ = writeln!(csv, "\"{}\",{},{}", coords.join(" "), fmt_f64(ph), fmt_f64(*v));
    }
    let rows: Vec<Value> = grid.iter().map(|(h, v)| json!({"h": h, "envelope_value": v})).collect();
    let value = json!({
        "command": "envelope",
        "model": model.name(),
        "alpha": alpha,
        "expansion": exp.to_json(),
        "envelope": env.to_json(),
        "grid": rows,
    });
    Ok(Artifacts { main: to_json_string(&value), grid_csv: Some(csv) })
}

fn bds_json(config: &RunConfig) -> Result<Value> {
    let cmd = config.command;
    let model = config.model()?;
    let mu0 = need(&config.mu0, "mu0", cmd)?;
    let mu1 = need(&config.mu1, "mu1", cmd)?;
    let cfg = BdsConfig::new(*need(&config.tau, "tau", cmd)?, *need(&config.zeta, "zeta", cmd)?)?;
    let result = bds_test(&model, mu0, mu1, &cfg)?;
    let supplied = match &config.phi {
        Some(phi) => json!({"phi": phi, "risk": bds_risk(&model, phi, mu0, mu1, &cfg)?}),
        None => Value::Null,
    };
    Ok(json!({
        "command": "bds",
        "model": model.name(),
        "threshold": number(cfg.threshold()),
        "bds": result.to_json(),
        "supplied_test": supplied,
    }))
}

/// Outcome of `--check`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    /// Lines of the human-readable report.
    pub lines: Vec<String>,
    /// True when every check passed.
    pub pass: bool,
}

/// Cross-check the instance: Choquet integrals of every event indicator
/// against the simplex oracle on each core, and `verify_lfp` when both
/// parameters are present.
pub fn check(config: &RunConfig) -> Result<CheckReport> {
    config.validate()?;
    let mut thetas = Vec::new();
    if config.command == Command::Simulate {
        let spec = need(&config.simulation, "simulation", config.command)?;
        let model = spec.model.model();
        return check_thetas(&model, std::slice::from_ref(&spec.theta0), None);
    }
    let model = config.model()?;
    thetas.extend(config.theta0.clone());
    thetas.extend(config.theta1.clone());
    for prior in [&config.mu0, &config.mu1].into_iter().flatten() {
        thetas.extend(prior.atoms().iter().map(|a| a.theta.clone()));
    }
    let pair = match (&config.theta0, &config.theta1) {
        (Some(a), Some(b)) => Some((a.clone(), b.clone())),
        _ => None,
    };
    check_thetas(&model, &thetas, pair)
}

fn check_thetas(model: &IncompleteModel, thetas: &[Vec<f64>], pair: Option<(Vec<f64>, Vec<f64>)>) -> Result<CheckReport> {
    let mut lines = Vec::new();
    let mut pass = true;
    let l = model.space().len();
    for theta in thetas {
        let mass = model.mass_at(theta)?;
        let mut worst = 0.0f64;
        for a in 0..model.space().subset_count() as u32 {
            let f: Vec<f64> = (0..l).map(|s| if SubsetMask(a).contains(s) { 1.0 } else { 0.0 }).collect();
            let (lo, _) = core_lp(&mass, &f, Direction::Min)?;
            let (hi, _) = core_lp(&mass, &f, Direction::Max)?;
            worst = worst.max((lo - mass.choquet_lower(&f)).abs()).max((hi - mass.choquet_upper(&f)).abs());
        }
        let ok = worst <= CHECK_TOL;
        pass &= ok;
        lines.push(format!("capacity vs LP at {theta:?}: worst gap {worst:.3e} [{}]", verdict(ok)));
    }
    if let Some((t0, t1)) = pair {
        let m0 = model.mass_at(&t0)?;
        let m1 = model.mass_at(&t1)?;
        let sol = solve_lfp(&LfpProblem::new(m0.clone(), m1.clone())?)?;
        let report = verify_lfp(&sol, &m0, &m1);
        pass &= report.pass;
        lines.push(format!(
            "verify_lfp: worst violation {:.3e} over {} thresholds [{}]",
            report.worst_violation,
            report.thresholds,
            verdict(report.pass)
        ));
    }
    Ok(CheckReport { lines, pass })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Pretty JSON text with floats printed to 17 significant digits.
pub fn to_json_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(value: &Value, indent: usize, out: &mut String) {
    let pad = |k: usize| "  ".repeat(k);
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let v = n.as_f64().unwrap_or(f64::NAN);
                if v.is_finite() {
                    out.push_str(&fmt_f64(v));
                } else {
                    out.push_str("null");
                }
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(v, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Path of the envelope grid CSV written next to a main artifact.
pub fn grid_path(main: &Path) -> PathBuf {
    let mut s = main.as_os_str().to_owned();
    s.push(".grid.csv");
    PathBuf::from(s)
}

fn write_artifacts(artifacts: &Artifacts, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, &artifacts.main)?;
            if let Some(csv) = &artifacts.grid_csv {
                std::fs::write(grid_path(path), csv)?;
            }
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(artifacts.main.as_bytes())?;
            if let Some(csv) = &artifacts.grid_csv {
                stdout.write_all(csv.as_bytes())?;
            }
        }
    }
    Ok(())
}

/// Run the binary with parsed flags and return the exit status.
pub fn main_with(args: &Args) -> i32 {
    let mut config = match RunConfig::from_path(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if args.check {
        return match check(&config) {
            Ok(report) => {
                for line in &report.lines {
                    eprintln!("{line}");
                }
                eprintln!("check: {}", verdict(report.pass));
                if report.pass {
                    EXIT_OK
                } else {
                    EXIT_SOLVER
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        };
    }
    let artifacts = match run(&config) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let out = args.out.clone().or(config.output.clone());
    match write_artifacts(&artifacts, out.as_deref()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            EXIT_VALIDATION
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_json_str(text).unwrap()
    }

    #[test]
    fn seventeen_digit_numbers() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(0.0), "0");
        let text = to_json_string(&json!({"a": [1, 0.5, "inf"], "b": {}}));
        assert_eq!(text, "{\n  \"a\": [\n    1,\n    5.0000000000000000e-1,\n    \"inf\"\n  ],\n  \"b\": {}\n}\n");
    }

    #[test]
    fn lfp_command_matches_closed_form() {
        let c = cfg(r#"{"command":"lfp","model":"entry_game","theta0":[0,0],"theta1":[-1,-1]}"#);
        let a = run(&c).unwrap();
        let v: Value = serde_json::from_str(&a.main).unwrap();
        let q11 = v["lfp"]["q1"][1].as_f64().unwrap();
        assert!((q11 - 0.0251712).abs() < 5e-7, "{q11}");
        assert_eq!(v["verify"]["pass"], json!(true));
    }

    #[test]
    fn single_test_rejects_asymmetric_outcomes() {
        let c = cfg(r#"{"command":"test","model":"entry_game","theta0":[0,0],"theta1":[-1,-1],"alpha":0.05,"n":1}"#);
        let v: Value = serde_json::from_str(&run(&c).unwrap().main).unwrap();
        assert_eq!(v["region"], json!([]));
        assert_eq!(v["randomized_region"], json!(["(1,0)", "(0,1)"]));
        let gamma = v["test"]["gamma"].as_f64().unwrap();
        assert!((gamma - 0.10).abs() < 1e-9, "{gamma}");
    }

    #[test]
    fn malformed_configs_are_validation_errors() {
        for text in [
            "{",
            r#"{"command":"lfp","model":"entry_game","theta0":[0,0]}"#,
            r#"{"command":"lfp","model":"entry_game","theta0":[0,0],"theta1":[1,0]}"#,
            r#"{"command":"teleport"}"#,
            r#"{"command":"belief","model":"entry_game","theta0":[0,0],"extra":1}"#,
        ] {
            let err = RunConfig::from_json_str(text).and_then(|c| run(&c).map(|_| ()));
            assert_eq!(exit_code(&err.unwrap_err()), EXIT_VALIDATION, "{text}");
        }
    }

    #[test]
    fn outputs_are_byte_identical() {
        let c = cfg(r#"{"command":"belief","model":"roy","theta0":[0.2,0.3,0.3]}"#);
        assert_eq!(run(&c).unwrap(), run(&c).unwrap());
    }

    #[test]
    fn check_mode_passes_on_entry_pair() {
        let c = cfg(r#"{"command":"lfp","model":"entry_game","theta0":[0,0],"theta1":[-1,-1]}"#);
        let report = check(&c).unwrap();
        assert!(report.pass, "{:?}", report.lines);
        assert_eq!(report.lines.len(), 3);
    }
}
