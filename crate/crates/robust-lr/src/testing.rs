//! Minimax likelihood-ratio tests built from a least favorable pair.
//!
//! For `n` i.i.d. experiments the statistic is `ln Λ_n = Σ_i ln Λ(s_i)`. Its
//! exact law under `Q0` or `Q1` is computed by convolution with ties merged,
//! which gives exact critical values, sizes and lower powers up to a sample
//! size cap. Beyond the cap a normal approximation is used and flagged.

use serde_json::{json, Value};

use crate::capacity::BeliefMass;
use crate::error::{Error, Result};
use crate::lfp::{solve_lfp, LfpProblem, LfpSolution};
use crate::model::{robustly_testable, IncompleteModel};
use crate::normal;

/// Largest sample size handled by exact enumeration.
pub const EXACT_CAP: usize = 150;
/// Largest number of atoms kept during a convolution.
pub const ATOM_CAP: usize = 4_000_000;
/// Relative tolerance under which two atom values are merged.
pub const TIE_TOL: f64 = 1e-12;

/// Method used to obtain a critical value or an error probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Exact enumeration of the log-ratio distribution.
    Exact,
    /// Normal approximation.
    Gaussian,
    /// Bayes threshold from prior weight and loss ratio.
    RiskRatio,
}

impl Method {
    /// Lowercase name.
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Gaussian => "gaussian",
            Method::RiskRatio => "risk_ratio",
        }
    }
}

/// Which member of the pair a distribution is computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Under `Q0`.
    Null,
    /// Under `Q1`.
    Alt,
}

/// True when two log-ratio values count as equal.
pub fn tied(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_TOL * (1.0 + a.abs().max(b.abs()))
}

/// Randomized likelihood-ratio test `reject iff Λ_n > C`, with probability `γ` at `Λ_n = C`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxTest {
    /// Per-outcome ratio table of the pair.
    pub lambda: Vec<Option<f64>>,
    /// Sample size.
    pub n: usize,
    /// Threshold `C` on `Λ_n`.
    pub c: f64,
    /// `ln C`, the threshold on the log statistic.
    pub log_c: f64,
    /// Randomization probability at the threshold.
    pub gamma: f64,
    /// Nominal level.
    pub alpha: f64,
    /// How `C` was obtained.
    pub method: Method,
}

impl MinimaxTest {
    /// `ln Λ_n` for an outcome sequence; outcomes with undefined ratio contribute 0.
    pub fn log_statistic(&self, sample: &[usize]) -> f64 {
        sample.iter().map(|&s| self.lambda[s].map_or(0.0, f64::ln)).sum()
    }

    /// Rejection probability `φ_n` at a sample.
    pub fn phi(&self, sample: &[usize]) -> f64 {
        self.phi_log(self.log_statistic(sample))
    }

    /// Rejection probability at a given value of `ln Λ_n`.
    pub fn phi_log(&self, v: f64) -> f64 {
        if tied(v, self.log_c) {
            self.gamma
        } else if v > self.log_c {
            1.0
        } else {
            0.0
        }
    }

    /// Decision using a caller-supplied uniform variate for the randomization.
    pub fn reject(&self, sample: &[usize], uniform: f64) -> bool {
        uniform < self.phi(sample)
    }

    /// Outcomes rejected with probability one at `n = 1`.
    pub fn region(&self) -> Vec<usize> {
        (0..self.lambda.len()).filter(|&s| self.lambda[s].is_some_and(|v| self.phi_log(v.ln()) == 1.0)).collect()
    }

    /// JSON form.
    pub fn to_json(&self) -> Value {
        json!({
            "alpha": self.alpha,
            "n": self.n,
            "method": self.method.as_str(),
            "C": number(self.c),
            "log_C": number(self.log_c),
            "gamma": self.gamma,
        })
    }
}

/// JSON number, with infinities as the strings `"inf"` and `"-inf"`.
pub fn number(v: f64) -> Value {
    if v == f64::INFINITY {
        json!("inf")
    } else if v == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!(v)
    }
}

/// Format a float with 17 significant digits; infinities become `inf` and `-inf`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.16e}")
    }
}

/// Exact law of `Σ_{i≤n} ln Λ(s_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLrDistribution {
    /// `(value, probability)` pairs with strictly increasing values.
    pub atoms: Vec<(f64, f64)>,
}

impl LogLrDistribution {
    /// `P(V > v)`, ties with `v` excluded.
    pub fn tail_above(&self, v: f64) -> f64 {
        self.atoms.iter().filter(|(a, _)| !tied(*a, v) && *a > v).map(|(_, p)| p).sum()
    }

    /// `P(V = v)` up to the tie tolerance.
    pub fn mass_at(&self, v: f64) -> f64 {
        self.atoms.iter().filter(|(a, _)| tied(*a, v)).map(|(_, p)| p).sum()
    }

    /// Mean of the finite atoms (`-∞` if a negative infinite atom has mass).
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(v, p)| v * p).sum()
    }

    /// Total probability.
    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|(_, p)| p).sum()
    }
}

/// Sort by value and merge tied atoms.
fn merge_atoms(mut atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    atoms.retain(|(_, p)| *p > 0.0);
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        match out.last_mut() {
            Some(last) if tied(last.0, v) => {
                let w = last.1 + p;
                if last.0.is_finite() && v.is_finite() {
                    last.0 = (last.0 * last.1 + v * p) / w;
                }
                last.1 = w;
            }
            _ => out.push((v, p)),
        }
    }
    out
}

/// Law of a sum of `n` i.i.d. copies of a finite distribution.
pub fn convolve_power(one: &[(f64, f64)], n: usize) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Ok(vec![(0.0, 1.0)]);
    }
    let one = merge_atoms(one.to_vec());
    let mut acc = one.clone();
    for _ in 1..n {
        if acc.len() * one.len() > ATOM_CAP {
            return Err(Error::ExactModeTooLarge { n, cap: EXACT_CAP });
        }
        let mut next = Vec::with_capacity(acc.len() * one.len());
        for &(v, p) in &acc {
            for &(w, q) in &one {
                next.push((v + w, p * q));
            }
        }
        acc = merge_atoms(next);
    }
    Ok(acc)
}

fn one_step(lfp: &LfpSolution, role: Role) -> Vec<(f64, f64)> {
    let q = match role {
        Role::Null => &lfp.q0,
        Role::Alt => &lfp.q1,
    };
    lfp.lambda
        .iter()
        .zip(q)
        .filter_map(|(l, &p)| l.filter(|_| p > 0.0).map(|v| (v.ln(), p)))
        .collect()
}

/// Exact law of `ln Λ_n` under `Q0` or `Q1`.
pub fn log_lr_distribution(lfp: &LfpSolution, n: usize, role: Role) -> Result<LogLrDistribution> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    if n > EXACT_CAP {
        return Err(Error::ExactModeTooLarge { n, cap: EXACT_CAP });
    }
    Ok(LogLrDistribution { atoms: convolve_power(&one_step(lfp, role), n)? })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidInput(format!("level {alpha} outside (0, 1]")));
    }
    Ok(())
}

/// Critical value with exact size `α` at sample size `n`.
///
/// `C` is the smallest atom `v` with `Q0(ln Λ_n > v) <= α` and
/// `γ = (α - Q0(> C)) / Q0(= C)`.
pub fn exact_critical_value(lfp: &LfpSolution, n: usize, alpha: f64) -> Result<MinimaxTest> {
    check_alpha(alpha)?;
    let dist = log_lr_distribution(lfp, n, Role::Null)?;
    let mut tail = 0.0;
    let mut pick = None;
    // Walk from the largest atom down; tail is Q0(> current).
    for &(v, p) in dist.atoms.iter().rev() {
        if tail <= alpha + 1e-15 {
            pick = Some((v, p, tail));
        } else {
            break;
        }
        tail += p;
    }
    let (log_c, at, above) = pick.ok_or_else(|| Error::InvalidInput("empty null distribution".into()))?;
    let gamma = if at > 0.0 { ((alpha - above) / at).clamp(0.0, 1.0) } else { 0.0 };
    Ok(MinimaxTest { lambda: lfp.lambda.clone(), n, c: log_c.exp(), log_c, gamma, alpha, method: Method::Exact })
}

/// Minimax test for a single experiment.
pub fn single_minimax_test(lfp: &LfpSolution, alpha: f64) -> Result<MinimaxTest> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("level {alpha} outside (0, 1)")));
    }
    let values = lfp.lambda_values();
    if values.len() < 2 {
        return Err(Error::DegenerateRatio);
    }
    exact_critical_value(lfp, 1, alpha)
}

/// Mean and standard deviation of `ln Λ` under one member of the pair.
pub fn log_ratio_moments(lfp: &LfpSolution, role: Role) -> (f64, f64) {
    let one = one_step(lfp, role);
    let mu: f64 = one.iter().map(|(v, p)| v * p).sum();
    let var: f64 = one.iter().map(|(v, p)| p * (v - mu) * (v - mu)).sum();
    (mu, var.max(0.0).sqrt())
}

/// Critical value `C = exp(n μ + √n z_α σ)` with `γ = 0`.
pub fn gaussian_critical_value(lfp: &LfpSolution, n: usize, alpha: f64) -> Result<MinimaxTest> {
    if !(alpha > 0.0 && alpha < 1.0) || n == 0 {
        return Err(Error::InvalidInput("need 0 < α < 1 and n >= 1".into()));
    }
    let (mu, sigma) = log_ratio_moments(lfp, Role::Null);
    if !mu.is_finite() {
        return Err(Error::DegenerateRatio);
    }
    let nf = n as f64;
    let log_c = nf * mu + nf.sqrt() * normal::upper_critical(alpha) * sigma;
    Ok(MinimaxTest { lambda: lfp.lambda.clone(), n, c: log_c.exp(), log_c, gamma: 0.0, alpha, method: Method::Gaussian })
}

/// Upper size and lower power of a test built from a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizePower {
    /// Largest rejection probability over the null core.
    pub upper_size: f64,
    /// Smallest rejection probability over the alternative core.
    pub lower_power: f64,
    /// Exact enumeration or normal approximation.
    pub method: Method,
}

/// Upper size `Q0^n(reject)` and lower power `Q1^n(reject)`.
pub fn size_and_lower_power(lfp: &LfpSolution, test: &MinimaxTest) -> Result<SizePower> {
    if test.lambda != lfp.lambda {
        return Err(Error::InvalidInput("test was built from a different pair".into()));
    }
    if test.n <= EXACT_CAP {
        let eval = |role| -> Result<f64> {
            let d = log_lr_distribution(lfp, test.n, role)?;
            Ok(d.atoms.iter().map(|&(v, p)| p * test.phi_log(v)).sum())
        };
        match (eval(Role::Null), eval(Role::Alt)) {
            (Ok(s), Ok(p)) => return Ok(SizePower { upper_size: s, lower_power: p, method: Method::Exact }),
            (Err(Error::ExactModeTooLarge { .. }), _) | (_, Err(Error::ExactModeTooLarge { .. })) => {}
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    let nf = test.n as f64;
    let approx = |role| -> f64 {
        let (mu, sigma) = log_ratio_moments(lfp, role);
        if sigma == 0.0 {
            return test.phi_log(nf * mu);
        }
        normal::sf((test.log_c - nf * mu) / (nf.sqrt() * sigma))
    };
    Ok(SizePower { upper_size: approx(Role::Null), lower_power: approx(Role::Alt), method: Method::Gaussian })
}

/// Exact `inf P(Σ_{i≤n} f(s_i) > c)` over all laws compatible with a belief function.
///
/// The infimum is attained by selecting `argmin_{s∈K} f(s)` inside every
/// predicted set `K`, so the sum is that of i.i.d. copies of `min_{s∈K} f`.
pub fn lower_power_additive(mass: &BeliefMass, f: &[f64], c: f64, n: usize) -> Result<f64> {
    if f.len() != mass.space().len() {
        return Err(Error::InvalidInput("statistic table has the wrong length".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    if n > EXACT_CAP {
        return Err(Error::ExactModeTooLarge { n, cap: EXACT_CAP });
    }
    let one: Vec<(f64, f64)> = mass
        .focal()
        .iter()
        .map(|(k, m)| (k.members().map(|s| f[s]).fold(f64::INFINITY, f64::min), *m))
        .collect();
    let dist = LogLrDistribution { atoms: convolve_power(&one, n)? };
    Ok(dist.tail_above(c))
}

/// One covariate slice of a conditional least-favorable-pair problem.
#[derive(Debug, Clone)]
pub struct CovariateSlice {
    /// Covariate value.
    pub key: String,
    /// Pair for this slice; `None` when the slice is not robustly testable.
    pub solution: Option<LfpSolution>,
}

impl CovariateSlice {
    /// True when the slice carries a nontrivial pair.
    pub fn testable(&self) -> bool {
        self.solution.is_some()
    }
}

/// Per-covariate pairs; the statistic is `Σ_i ln Λ(s_i | x_i)`.
#[derive(Debug, Clone)]
pub struct CovariateLfp {
    /// Slices in input order.
    pub slices: Vec<CovariateSlice>,
}

impl CovariateLfp {
    /// `Σ_i ln Λ(s_i | x_i)` for `(slice index, outcome)` observations.
    ///
    /// Slices that are not robustly testable contribute `ln 1 = 0`.
    pub fn log_statistic(&self, sample: &[(usize, usize)]) -> Result<f64> {
        let mut total = 0.0;
        for &(x, s) in sample {
            let slice = self.slices.get(x).ok_or_else(|| Error::InvalidInput(format!("no covariate slice {x}")))?;
            if let Some(sol) = &slice.solution {
                let l = sol.lambda.get(s).ok_or_else(|| Error::InvalidInput(format!("no outcome {s}")))?;
                total += l.map_or(0.0, f64::ln);
            }
        }
        Ok(total)
    }
}

/// Solve one pair per covariate value; the pair is testable if one slice is.
pub fn covariate_lfp(models: &[(String, IncompleteModel)], theta0: &[f64], theta1: &[f64]) -> Result<CovariateLfp> {
    if models.is_empty() {
        return Err(Error::InvalidInput("no covariate slices".into()));
    }
    let mut slices = Vec::with_capacity(models.len());
    for (key, model) in models {
        let solution = if robustly_testable(model, theta0, theta1)? {
            let problem = LfpProblem::new(model.mass_at(theta0)?, model.mass_at(theta1)?)?;
            Some(solve_lfp(&problem)?)
        } else {
            None
        };
        slices.push(CovariateSlice { key: key.clone(), solution });
    }
    if slices.iter().all(|s| !s.testable()) {
        return Err(Error::NotRobustlyTestable);
    }
    Ok(CovariateLfp { slices })
}
