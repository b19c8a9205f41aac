//! Bayes-Dempster-Shafer tests of composite hypotheses.
//!
//! Priors `μ0` on the null and `μ1` on the alternative mix the per-parameter
//! Möbius masses into two belief functions `κ0` and `κ1`. With prior weight
//! `τ` on the null and loss ratio `ζ`, the least-favorable pair of the
//! mixtures gives the Bayes test `reject iff Λ >= τ/(ζ(1−τ))`, whose
//! robust risk is `τ ∫φ dκ0* + (1−τ)ζ(1 − ∫φ dκ1)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::capacity::BeliefMass;
use crate::error::{Error, Result};
use crate::lfp::{solve_lfp, LfpProblem, LfpSolution};
use crate::model::{cores_disjoint, IncompleteModel};
use crate::testing::{number, Method, MinimaxTest};

/// Tolerance on the prior weights summing to one before renormalization.
pub const WEIGHT_TOL: f64 = 1e-6;

/// One atom of a discrete prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorAtom {
    /// Parameter value.
    pub theta: Vec<f64>,
    /// Prior probability.
    pub weight: f64,
}

/// Finitely supported prior over parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<PriorAtom>", into = "Vec<PriorAtom>")]
pub struct DiscretePrior {
    atoms: Vec<PriorAtom>,
}

impl TryFrom<Vec<PriorAtom>> for DiscretePrior {
    type Error = Error;
    fn try_from(atoms: Vec<PriorAtom>) -> Result<Self> {
        Self::new(atoms.into_iter().map(|a| (a.theta, a.weight)).collect())
    }
}

impl From<DiscretePrior> for Vec<PriorAtom> {
    fn from(p: DiscretePrior) -> Self {
        p.atoms
    }
}

impl DiscretePrior {
    /// Prior from `(θ, weight)` pairs; weights are nonnegative and sum to one.
    ///
    /// Sums within [`WEIGHT_TOL`] of one are renormalized exactly.
    pub fn new(atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("prior has no atoms".into()));
        }
        let d = atoms[0].0.len();
        if atoms.iter().any(|(t, w)| t.len() != d || !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidInput("prior atoms need a common dimension and nonnegative weights".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidInput(format!("prior weights sum to {total}, not 1")));
        }
        Ok(Self { atoms: atoms.into_iter().map(|(theta, w)| PriorAtom { theta, weight: w / total }).collect() })
    }

    /// Unit mass at one parameter value.
    pub fn point(theta: Vec<f64>) -> Self {
        Self { atoms: vec![PriorAtom { theta, weight: 1.0 }] }
    }

    /// Atoms.
    pub fn atoms(&self) -> &[PriorAtom] {
        &self.atoms
    }
}

/// Prior weight on the null and loss ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BdsConfig {
    /// `τ ∈ (0, 1)`.
    pub prior_weight: f64,
    /// `ζ > 0`.
    pub loss_ratio: f64,
}

impl BdsConfig {
    /// Validated configuration.
    pub fn new(prior_weight: f64, loss_ratio: f64) -> Result<Self> {
        let c = Self { prior_weight, loss_ratio };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if !(self.prior_weight > 0.0 && self.prior_weight < 1.0) {
            return Err(Error::InvalidInput("prior weight must lie in (0, 1)".into()));
        }
        if !(self.loss_ratio > 0.0 && self.loss_ratio.is_finite()) {
            return Err(Error::InvalidInput("loss ratio must be positive and finite".into()));
        }
        Ok(())
    }

    /// Threshold `C = τ / (ζ (1 − τ))`.
    pub fn threshold(&self) -> f64 {
        self.prior_weight / (self.loss_ratio * (1.0 - self.prior_weight))
    }
}

/// Prior mixture of the model's Möbius masses.
pub fn mixture_mass(model: &IncompleteModel, prior: &DiscretePrior) -> Result<BeliefMass> {
    let masses = prior
        .atoms()
        .iter()
        .map(|a| Ok((a.weight, model.mass_at(&a.theta)?)))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<(f64, &BeliefMass)> = masses.iter().map(|(w, m)| (*w, m)).collect();
    BeliefMass::mixture(&refs)
}

/// Bayes test for the two mixtures together with their least-favorable pair.
#[derive(Debug, Clone)]
pub struct BdsTest {
    /// Single-observation test `reject iff Λ >= C`.
    pub test: MinimaxTest,
    /// Least-favorable pair of the mixtures.
    pub lfp: LfpSolution,
    /// Rejection probability per outcome.
    pub phi: Vec<f64>,
    /// Robust risk of `phi`.
    pub risk: f64,
}

impl BdsTest {
    /// JSON form.
    pub fn to_json(&self) -> Value {
        json!({
            "C": number(self.test.c),
            "gamma": self.test.gamma,
            "lambda": self.test.lambda.iter().map(|v| v.map_or(Value::Null, number)).collect::<Vec<_>>(),
            "phi": self.phi,
            "risk": self.risk,
            "upper_size": self.test.alpha,
            "q0": self.lfp.q0,
            "q1": self.lfp.q1,
        })
    }
}

/// Bayes test `reject iff Λ >= τ/(ζ(1−τ))` between the prior mixtures.
///
/// Ties are rejected with probability one; on a tie both decisions carry the
/// same risk.
pub fn bds_test(model: &IncompleteModel, mu0: &DiscretePrior, mu1: &DiscretePrior, config: &BdsConfig) -> Result<BdsTest> {
    config.validate()?;
    let k0 = mixture_mass(model, mu0)?;
    let k1 = mixture_mass(model, mu1)?;
    bds_test_masses(&k0, &k1, config)
}

/// [`bds_test`] on precomputed mixture masses.
pub fn bds_test_masses(k0: &BeliefMass, k1: &BeliefMass, config: &BdsConfig) -> Result<BdsTest> {
    config.validate()?;
    if !cores_disjoint(k0, k1)? {
        return Err(Error::CoresIntersect);
    }
    let lfp = solve_lfp(&LfpProblem::new(k0.clone(), k1.clone())?)?;
    let c = config.threshold();
    let mut test =
        MinimaxTest { lambda: lfp.lambda.clone(), n: 1, c, log_c: c.ln(), gamma: 1.0, alpha: 0.0, method: Method::RiskRatio };
    let phi: Vec<f64> = (0..lfp.q0.len()).map(|s| test.phi(&[s])).collect();
    test.alpha = k0.choquet_upper(&phi);
    let risk = risk_of(k0, k1, &phi, config);
    Ok(BdsTest { test, lfp, phi, risk })
}

fn risk_of(k0: &BeliefMass, k1: &BeliefMass, phi: &[f64], config: &BdsConfig) -> f64 {
    let tau = config.prior_weight;
    tau * k0.choquet_upper(phi) + (1.0 - tau) * config.loss_ratio * (1.0 - k1.choquet_lower(phi))
}

/// Robust risk `τ ∫φ dκ0* + (1−τ)ζ(1 − ∫φ dκ1)` of a randomized test table.
pub fn bds_risk(
    model: &IncompleteModel,
    phi: &[f64],
    mu0: &DiscretePrior,
    mu1: &DiscretePrior,
    config: &BdsConfig,
) -> Result<f64> {
    config.validate()?;
    if phi.len() != model.space().len() || phi.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidInput("test table must have one value in [0, 1] per outcome".into()));
    }
    let k0 = mixture_mass(model, mu0)?;
    let k1 = mixture_mass(model, mu1)?;
    Ok(risk_of(&k0, &k1, phi, config))
}

/// Smallest robust risk over every test with values on the grid `{0, step, …, 1}`.
///
/// Exhaustive enumeration of `(1/step + 1)^L` tables; meant as an oracle for small `L`.
pub fn grid_minimal_risk(k0: &BeliefMass, k1: &BeliefMass, config: &BdsConfig, step: f64) -> Result<(f64, Vec<f64>)> {
    let l = k0.space().len();
    let levels = (1.0 / step).round() as usize + 1;
    let total = levels.checked_pow(l as u32).filter(|t| *t <= 50_000_000).ok_or_else(|| {
        Error::InvalidInput("grid enumeration too large".into())
    })?;
    let (risk, idx) = (0..total)
        .into_par_iter()
        .map(|code| {
            let phi = decode(code, levels, l);
            (risk_of(k0, k1, &phi, config), code)
        })
        .reduce(|| (f64::INFINITY, 0), |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    Ok((risk, decode(idx, levels, l)))
}

fn decode(mut code: usize, levels: usize, l: usize) -> Vec<f64> {
    let step = 1.0 / (levels - 1) as f64;
    (0..l)
        .map(|_| {
            let v = (code % levels) as f64 * step;
            code /= levels;
            v
        })
        .collect()
}

/// Outcome of the grid search for a least favorable null prior.
#[derive(Debug, Clone)]
pub struct PriorSearchResult {
    /// Maximizing null prior on the lattice.
    pub mu0: DiscretePrior,
    /// Maximizing prior weight.
    pub tau: f64,
    /// Bayes test at the maximizer, or `None` when the cores intersect and a constant test is optimal.
    pub test: Option<BdsTest>,
    /// Optimal test table at the maximizer.
    pub phi: Vec<f64>,
    /// Max-min risk over the lattice.
    pub risk: f64,
    /// Number of `(μ0, τ)` candidates evaluated.
    pub candidates: usize,
}

impl PriorSearchResult {
    /// JSON form; labeled as a grid approximation.
    pub fn to_json(&self) -> Value {
        json!({
            "approximation": "finite lattice of null priors and prior weights",
            "mu0": self.mu0,
            "tau": self.tau,
            "phi": self.phi,
            "risk": self.risk,
            "candidates": self.candidates,
            "test": self.test.as_ref().map(BdsTest::to_json),
        })
    }
}

/// Weight vectors on a simplex lattice with spacing `step` and at most `max_support` nonzero entries.
pub fn simplex_lattice(atoms: usize, step: f64, max_support: usize) -> Vec<Vec<f64>> {
    let m = (1.0 / step).round() as usize;
    let mut out = Vec::new();
    let mut cur = vec![0usize; atoms];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, m: usize, max_support: usize, out: &mut Vec<Vec<f64>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            if cur.iter().filter(|v| **v > 0).count() <= max_support {
                out.push(cur.iter().map(|v| *v as f64 / m as f64).collect());
            }
            return;
        }
        for k in 0..=left {
            cur[i] = k;
            rec(i + 1, left - k, cur, m, max_support, out);
        }
    }
    if atoms > 0 && m > 0 {
        rec(0, m, &mut cur, m, max_support, &mut out);
    }
    out
}

/// Largest Bayes risk over null priors on a simplex lattice of `theta0_grid` and over `tau_grid`.
///
/// For each candidate the inner infimum over tests is the Bayes test of
/// [`bds_test`]; when the mixture cores intersect it is the better constant
/// test with risk `min(τ, (1−τ)ζ)`. This is a finite-grid approximation of
/// the max-min risk, not an exact least favorable prior.
pub fn least_favorable_prior_search(
    model: &IncompleteModel,
    theta0_grid: &[Vec<f64>],
    mu1: &DiscretePrior,
    zeta: f64,
    tau_grid: &[f64],
    step: f64,
) -> Result<PriorSearchResult> {
    if theta0_grid.is_empty() || tau_grid.is_empty() {
        return Err(Error::InvalidInput("empty search grid".into()));
    }
    let k1 = mixture_mass(model, mu1)?;
    let k0s = theta0_grid.iter().map(|t| model.mass_at(t)).collect::<Result<Vec<_>>>()?;
    let weights = simplex_lattice(theta0_grid.len(), step, 3);
    let cands: Vec<(usize, f64)> = (0..weights.len()).flat_map(|w| tau_grid.iter().map(move |t| (w, *t))).collect();
    let evals = cands
        .par_iter()
        .map(|&(wi, tau)| -> Result<(f64, Option<BdsTest>, Vec<f64>)> {
            let config = BdsConfig::new(tau, zeta)?;
            let parts: Vec<(f64, &BeliefMass)> =
                weights[wi].iter().zip(&k0s).filter(|(w, _)| **w > 0.0).map(|(w, m)| (*w, m)).collect();
            let k0 = BeliefMass::mixture(&parts)?;
            match bds_test_masses(&k0, &k1, &config) {
                Ok(t) => Ok((t.risk, Some(t.clone()), t.phi)),
                Err(Error::CoresIntersect) => {
                    let reject = tau < (1.0 - tau) * zeta;
                    let phi = vec![if reject { 1.0 } else { 0.0 }; k1.space().len()];
                    Ok((tau.min((1.0 - tau) * zeta), None, phi))
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for i in 1..evals.len() {
        if evals[i].0 > evals[best].0 + 1e-15 {
            best = i;
        }
    }
    let (wi, tau) = cands[best];
    let mu0 = DiscretePrior::new(
        theta0_grid.iter().cloned().zip(weights[wi].iter().copied()).filter(|(_, w)| *w > 0.0).collect(),
    )?;
    let (risk, test, phi) = evals[best].clone();
    Ok(PriorSearchResult { mu0, tau, test, phi, risk, candidates: cands.len() })
}

/// Largest loss ratio `ζ` in `[lo, hi]` whose Bayes test has upper size at most `alpha`, by bisection on `ln ζ`.
///
/// Returns `(ζ, upper size)`. The upper size is a nondecreasing step
/// function of `ζ`, so the answer is accurate to the bisection width.
pub fn calibrate_zeta(
    model: &IncompleteModel,
    mu0: &DiscretePrior,
    mu1: &DiscretePrior,
    tau: f64,
    alpha: f64,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64)> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidInput("need 0 < lo < hi".into()));
    }
    let k0 = mixture_mass(model, mu0)?;
    let k1 = mixture_mass(model, mu1)?;
    let size = |z: f64| -> Result<f64> { Ok(bds_test_masses(&k0, &k1, &BdsConfig::new(tau, z)?)?.test.alpha) };
    if size(lo)? > alpha {
        return Err(Error::InvalidInput("upper size exceeds alpha already at the lower end".into()));
    }
    if size(hi)? <= alpha {
        return Ok((hi, size(hi)?));
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        if size(mid.exp())? <= alpha {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    Ok((a.exp(), size(a.exp())?))
}
