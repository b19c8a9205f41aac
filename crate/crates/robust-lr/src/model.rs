//! Parameterized incomplete models `θ ↦ BeliefMass`.
//!
//! A model carries only the law of the predicted random set at each
//! parameter value; the latent space never materializes. Builders cover the
//! two-player entry game and a Roy-type selection model. Generic models can be
//! built from a level-set sampler or loaded from JSON.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::capacity::{domination_mass, BeliefMass, BeliefMassJson, OutcomeSpace, SubsetMask};
use crate::error::{Error, Result};
use crate::normal;

/// Parameter-to-mass map.
pub type MassFn = Arc<dyn Fn(&[f64]) -> Result<BeliefMass> + Send + Sync>;
/// Parameter-to-mass-gradient map: focal sets with `∇_θ m_θ(K)`.
pub type MassGradFn = Arc<dyn Fn(&[f64]) -> Result<Vec<(SubsetMask, Vec<f64>)>> + Send + Sync>;
/// Domain indicator.
pub type DomainFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
/// Level-set sampler: draws one predicted set given `θ` and a random stream.
pub type LevelSetSampler = Arc<dyn Fn(&[f64], &mut dyn RngCore) -> SubsetMask + Send + Sync>;

/// Finite-difference step for gradients of the lower capacity.
pub const FD_STEP: f64 = 1e-6;

/// Slack above one in the domination LP that certifies disjoint cores.
pub const DISJOINT_TOL: f64 = 1e-10;

/// A parameterized family of belief functions on one outcome space.
#[derive(Clone)]
pub struct IncompleteModel {
    space: OutcomeSpace,
    dim: usize,
    name: String,
    mass_fn: MassFn,
    grad_fn: Option<MassGradFn>,
    domain_fn: DomainFn,
}

impl std::fmt::Debug for IncompleteModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IncompleteModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("labels", &self.space.labels())
            .field("analytic_gradient", &self.grad_fn.is_some())
            .finish()
    }
}

impl IncompleteModel {
    /// Model from a domain indicator and a mass map.
    pub fn new(space: OutcomeSpace, dim: usize, name: impl Into<String>, domain: DomainFn, mass: MassFn) -> Self {
        Self { space, dim, name: name.into(), mass_fn: mass, grad_fn: None, domain_fn: domain }
    }

    /// Attach analytic gradients of the Möbius masses.
    pub fn with_mass_gradient(mut self, grad: MassGradFn) -> Self {
        self.grad_fn = Some(grad);
        self
    }

    /// Outcome space.
    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    /// Parameter dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Identifier.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// True when `θ` has the right length and lies in the domain.
    pub fn in_domain(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim && theta.iter().all(|t| t.is_finite()) && (self.domain_fn)(theta)
    }

    /// `DomainError` unless `θ` lies in the domain.
    pub fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim {
            return Err(Error::DomainError(format!(
                "{}: expected {} parameters, got {}",
                self.name,
                self.dim,
                theta.len()
            )));
        }
        if !self.in_domain(theta) {
            return Err(Error::DomainError(format!("{}: θ = {theta:?}", self.name)));
        }
        Ok(())
    }

    /// Möbius masses at `θ`.
    pub fn mass_at(&self, theta: &[f64]) -> Result<BeliefMass> {
        self.check(theta)?;
        (self.mass_fn)(theta)
    }

    /// Analytic `∇_θ ν_θ(A)` when the model carries mass gradients.
    pub fn grad_nu(&self, theta: &[f64], a: SubsetMask) -> Option<Result<Vec<f64>>> {
        let grad = self.grad_fn.as_ref()?;
        Some(self.check(theta).and_then(|_| {
            let mut g = vec![0.0; self.dim];
            for (k, dk) in grad(theta)? {
                if k.is_subset_of(a) {
                    for (gi, di) in g.iter_mut().zip(&dk) {
                        *gi += di;
                    }
                }
            }
            Ok(g)
        }))
    }

    /// True when analytic gradients are available.
    pub fn has_gradient(&self) -> bool {
        self.grad_fn.is_some()
    }

    /// The model `θ ↦ mass_at(θ + offset)`.
    pub fn shifted(&self, offset: Vec<f64>) -> Result<Self> {
        if offset.len() != self.dim {
            return Err(Error::InvalidInput("offset dimension differs from model".into()));
        }
        let add = move |t: &[f64]| -> Vec<f64> { t.iter().zip(&offset).map(|(a, b)| a + b).collect() };
        let add = Arc::new(add);
        let (m, d) = (self.mass_fn.clone(), self.domain_fn.clone());
        let (a1, a2, a3) = (add.clone(), add.clone(), add.clone());
        let mut out = Self::new(
            self.space.clone(),
            self.dim,
            format!("{}+offset", self.name),
            Arc::new(move |t| d(&a1(t))),
            Arc::new(move |t| m(&a2(t))),
        );
        if let Some(g) = self.grad_fn.clone() {
            out.grad_fn = Some(Arc::new(move |t| g(&a3(t))));
        }
        Ok(out)
    }
}

/// Labels of the entry game: `[(0,0), (1,1), (1,0), (0,1)]`.
pub const ENTRY_LABELS: [&str; 4] = ["(0,0)", "(1,1)", "(1,0)", "(0,1)"];
/// Labels of the Roy model: `[(0,0), (0,1), (1,0), (1,1)]`.
pub const ROY_LABELS: [&str; 4] = ["(0,0)", "(0,1)", "(1,0)", "(1,1)"];

/// Two-player entry game with strategic substitutes.
///
/// Parameters `θ = (θ1, θ2)` with `θ1, θ2 <= 0`, latent `u ~ N(0, I2)`.
/// Masses: `{(0,0)}: 1/4`, `{(1,1)}: Φ1Φ2`, `{(1,0)}: 1/4 - Φ1Φ2 + Φ1/2`,
/// `{(0,1)}: 1/4 - Φ1Φ2 + Φ2/2`, `{(1,0),(0,1)}: (1/2 - Φ1)(1/2 - Φ2)`.
pub fn entry_game_model() -> IncompleteModel {
    let space = OutcomeSpace::new(ENTRY_LABELS).expect("static labels");
    let sp = space.clone();
    let mass = move |t: &[f64]| -> Result<BeliefMass> {
        let (a, b) = (normal::cdf(t[0]), normal::cdf(t[1]));
        BeliefMass::new(
            sp.clone(),
            [
                (SubsetMask(0b0001), 0.25),
                (SubsetMask(0b0010), a * b),
                (SubsetMask(0b0100), 0.25 - a * b + a / 2.0),
                (SubsetMask(0b1000), 0.25 - a * b + b / 2.0),
                (SubsetMask(0b1100), (0.5 - a) * (0.5 - b)),
            ],
        )
    };
    let grad = |t: &[f64]| -> Result<Vec<(SubsetMask, Vec<f64>)>> {
        let (a, b) = (normal::cdf(t[0]), normal::cdf(t[1]));
        let (da, db) = (normal::pdf(t[0]), normal::pdf(t[1]));
        Ok(vec![
            (SubsetMask(0b0001), vec![0.0, 0.0]),
            (SubsetMask(0b0010), vec![da * b, a * db]),
            (SubsetMask(0b0100), vec![-da * b + da / 2.0, -a * db]),
            (SubsetMask(0b1000), vec![-da * b, -a * db + db / 2.0]),
            (SubsetMask(0b1100), vec![-da * (0.5 - b), -(0.5 - a) * db]),
        ])
    };
    IncompleteModel::new(
        space,
        2,
        "entry_game",
        Arc::new(|t| t.iter().all(|&x| x <= 0.0)),
        Arc::new(mass),
    )
    .with_mass_gradient(Arc::new(grad))
}

/// Roy-type model with parameters `θ = (θ00, θ01, θ10)` in the simplex.
///
/// Masses: `{(0,0),(0,1)}: θ00`, `{(1,1)}: θ01`, `{(1,0)}: θ10`,
/// `{(1,0),(1,1)}: 1 - θ00 - θ01 - θ10`.
pub fn roy_model() -> IncompleteModel {
    let space = OutcomeSpace::new(ROY_LABELS).expect("static labels");
    let sp = space.clone();
    let mass = move |t: &[f64]| -> Result<BeliefMass> {
        BeliefMass::new(
            sp.clone(),
            [
                (SubsetMask(0b0011), t[0]),
                (SubsetMask(0b1000), t[1]),
                (SubsetMask(0b0100), t[2]),
                (SubsetMask(0b1100), 1.0 - t[0] - t[1] - t[2]),
            ],
        )
    };
    let grad = |_: &[f64]| -> Result<Vec<(SubsetMask, Vec<f64>)>> {
        Ok(vec![
            (SubsetMask(0b0011), vec![1.0, 0.0, 0.0]),
            (SubsetMask(0b1000), vec![0.0, 1.0, 0.0]),
            (SubsetMask(0b0100), vec![0.0, 0.0, 1.0]),
            (SubsetMask(0b1100), vec![-1.0, -1.0, -1.0]),
        ])
    };
    IncompleteModel::new(
        space,
        3,
        "roy",
        Arc::new(|t| t.iter().all(|&x| x >= -1e-12) && t.iter().sum::<f64>() <= 1.0 + 1e-12),
        Arc::new(mass),
    )
    .with_mass_gradient(Arc::new(grad))
}

/// Model whose masses are empirical level-set frequencies over `draws` draws.
///
/// The same seed is used at every `θ` (common random numbers), so the map is
/// deterministic and pure.
pub fn simulated_model(
    space: OutcomeSpace,
    dim: usize,
    domain: DomainFn,
    sampler: LevelSetSampler,
    draws: usize,
    seed: u64,
) -> IncompleteModel {
    let sp = space.clone();
    let mass = move |t: &[f64]| -> Result<BeliefMass> {
        if draws == 0 {
            return Err(Error::InvalidInput("simulated model needs at least one draw".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts: BTreeMap<SubsetMask, usize> = BTreeMap::new();
        for _ in 0..draws {
            let k = sampler(t, &mut rng);
            if k.is_empty() {
                return Err(Error::SamplerError);
            }
            *counts.entry(k).or_insert(0) += 1;
        }
        let n = draws as f64;
        BeliefMass::new(sp.clone(), counts.into_iter().map(|(k, c)| (k, c as f64 / n)))
    };
    IncompleteModel::new(space, dim, "simulated", domain, Arc::new(mass))
}

/// Uniform variate on the open interval `(0, 1)` with 53 random bits.
pub fn open_uniform(rng: &mut dyn RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Standard normal variate by the inverse distribution function.
pub fn std_normal(rng: &mut dyn RngCore) -> f64 {
    normal::quantile(open_uniform(rng))
}

/// Entry-game level set `G(u | θ)` for a latent draw `u`.
pub fn entry_level_set(theta: &[f64], u: [f64; 2]) -> SubsetMask {
    let (t1, t2) = (theta[0], theta[1]);
    let (u1, u2) = (u[0], u[1]);
    if u1 < 0.0 {
        if u2 < 0.0 {
            SubsetMask(0b0001)
        } else {
            SubsetMask(0b1000)
        }
    } else if u1 < -t1 {
        if u2 < 0.0 {
            SubsetMask(0b0100)
        } else if u2 < -t2 {
            SubsetMask(0b1100)
        } else {
            SubsetMask(0b1000)
        }
    } else if u2 < -t2 {
        SubsetMask(0b0100)
    } else {
        SubsetMask(0b0010)
    }
}

/// Level-set sampler of the entry game with bivariate standard normal latents.
pub fn entry_game_sampler() -> LevelSetSampler {
    Arc::new(|t, rng| {
        let u = [std_normal(rng), std_normal(rng)];
        entry_level_set(t, u)
    })
}

/// Roy level set for a latent index `0..4` ordered `(0,0), (0,1), (1,0), (1,1)`.
pub fn roy_level_set(latent: usize) -> SubsetMask {
    match latent {
        0 => SubsetMask(0b0011),
        1 => SubsetMask(0b1000),
        2 => SubsetMask(0b0100),
        _ => SubsetMask(0b1100),
    }
}

/// Draw the Roy latent index from the four-point law defined by `θ`.
pub fn roy_latent(theta: &[f64], rng: &mut dyn RngCore) -> usize {
    let u = open_uniform(rng);
    let mut acc = 0.0;
    for (i, t) in theta.iter().enumerate() {
        acc += t;
        if u < acc {
            return i;
        }
    }
    3
}

/// True iff the cores of two masses are disjoint, decided by the domination LP.
pub fn cores_disjoint(mass0: &BeliefMass, mass1: &BeliefMass) -> Result<bool> {
    if mass0.space() != mass1.space() {
        return Err(Error::InvalidInput("masses live on different outcome spaces".into()));
    }
    let (a, b) = (mass0.lower_table(), mass1.lower_table());
    let w: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x.max(*y)).collect();
    Ok(domination_mass(mass0.space(), &w)? > 1.0 + DISJOINT_TOL)
}

/// True iff no distribution is compatible with both `θ0` and `θ1`.
pub fn robustly_testable(model: &IncompleteModel, theta0: &[f64], theta1: &[f64]) -> Result<bool> {
    cores_disjoint(&model.mass_at(theta0)?, &model.mass_at(theta1)?)
}

/// Directional derivative `h'∇_θ ν_θ(A)`.
///
/// Uses analytic mass gradients when the model has them, otherwise a central
/// difference with step [`FD_STEP`], falling back to a one-sided difference
/// when one of the two evaluation points leaves the domain.
pub fn belief_gradient(model: &IncompleteModel, theta: &[f64], a: SubsetMask, h: &[f64]) -> Result<f64> {
    if h.len() != model.dim() {
        return Err(Error::InvalidInput("direction dimension differs from model".into()));
    }
    model.space().check(a)?;
    if let Some(g) = model.grad_nu(theta, a) {
        return Ok(g?.iter().zip(h).map(|(x, y)| x * y).sum());
    }
    model.check(theta)?;
    let mut total = 0.0;
    for (i, hi) in h.iter().enumerate() {
        if *hi == 0.0 {
            continue;
        }
        let at = |d: f64| -> Option<Vec<f64>> {
            let mut t = theta.to_vec();
            t[i] += d;
            model.in_domain(&t).then_some(t)
        };
        let eval = |t: Vec<f64>| -> Result<f64> { Ok(model.mass_at(&t)?.lower(a)) };
        let d = match (at(FD_STEP), at(-FD_STEP)) {
            (Some(p), Some(m)) => (eval(p)? - eval(m)?) / (2.0 * FD_STEP),
            (Some(p), None) => (eval(p)? - eval(theta.to_vec())?) / FD_STEP,
            (None, Some(m)) => (eval(theta.to_vec())? - eval(m)?) / FD_STEP,
            (None, None) => {
                return Err(Error::DomainError(format!("no finite-difference step fits at θ = {theta:?}")))
            }
        };
        total += hi * d;
    }
    Ok(total)
}

/// JSON description of a model: a named builder or an explicit mass table.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ModelSpec {
    /// `"entry_game"` or `"roy"`.
    Named(String),
    /// `{"builder": "entry_game"}`.
    Builder {
        /// Builder name.
        builder: String,
    },
    /// Box-constrained parameters with an explicit mass per listed `θ`.
    Table {
        /// Outcome labels.
        labels: Vec<String>,
        /// Lower bounds of the parameter box.
        lower: Vec<f64>,
        /// Upper bounds of the parameter box.
        upper: Vec<f64>,
        /// Parameter points and their masses.
        points: Vec<TablePoint>,
    },
}

/// One row of an explicit mass table.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TablePoint {
    /// Parameter value.
    pub theta: Vec<f64>,
    /// Masses keyed by decimal bitmask.
    pub masses: BTreeMap<String, f64>,
}

impl ModelSpec {
    /// Construct the model.
    pub fn build(&self) -> Result<IncompleteModel> {
        match self {
            ModelSpec::Named(name) | ModelSpec::Builder { builder: name } => match name.as_str() {
                "entry_game" | "entry" => Ok(entry_game_model()),
                "roy" => Ok(roy_model()),
                other => Err(Error::Config(format!("unknown model builder {other}"))),
            },
            ModelSpec::Table { labels, lower, upper, points } => {
                let space = OutcomeSpace::new(labels.iter().cloned())?;
                let dim = lower.len();
                if upper.len() != dim || lower.iter().zip(upper).any(|(l, u)| l > u) {
                    return Err(Error::Config("parameter box is malformed".into()));
                }
                let mut table = Vec::new();
                for p in points {
                    if p.theta.len() != dim {
                        return Err(Error::Config("table point has wrong dimension".into()));
                    }
                    let json = BeliefMassJson { labels: labels.clone(), masses: p.masses.clone() };
                    table.push((p.theta.clone(), BeliefMass::from_json(&json)?));
                }
                let (lo, hi) = (lower.clone(), upper.clone());
                let domain = move |t: &[f64]| t.iter().zip(lo.iter().zip(&hi)).all(|(x, (l, u))| x >= l && x <= u);
                let mass = move |t: &[f64]| -> Result<BeliefMass> {
                    table
                        .iter()
                        .find(|(th, _)| th.iter().zip(t).all(|(a, b)| (a - b).abs() <= 1e-12))
                        .map(|(_, m)| m.clone())
                        .ok_or_else(|| Error::DomainError(format!("θ = {t:?} is not a tabulated point")))
                };
                Ok(IncompleteModel::new(space, dim, "table", Arc::new(domain), Arc::new(mass)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::cdf;

    /// Lower and upper probability bounds of the entry game for every event,
    /// written out event by event.
    fn entry_bounds(t1: f64, t2: f64) -> Vec<(u32, f64, f64)> {
        let (a, b) = (cdf(t1), cdf(t2));
        let p = a * b;
        // Bit order: (0,0)=1, (1,1)=2, (1,0)=4, (0,1)=8.
        vec![
            (0b0001, 0.25, 0.25),
            (0b0010, p, p),
            (0b0100, 0.25 - p + a / 2.0, 0.5 * (1.0 - b)),
            (0b1000, 0.25 - p + b / 2.0, 0.5 * (1.0 - a)),
            (0b0011, 0.25 + p, 0.25 + p),
            (0b0101, 0.5 - p + a / 2.0, 0.75 - b / 2.0),
            (0b1001, 0.5 - p + b / 2.0, 0.75 - a / 2.0),
            (0b0110, 0.25 + a / 2.0, 0.5 - b / 2.0 + p),
            (0b1010, 0.25 + b / 2.0, 0.5 - a / 2.0 + p),
            (0b1100, 0.75 - p, 0.75 - p),
            (0b0111, 0.5 + a / 2.0, 0.75 - b / 2.0 + p),
            (0b1011, 0.5 + b / 2.0, 0.75 - a / 2.0 + p),
            (0b1101, 1.0 - p, 1.0 - p),
            (0b1110, 0.75, 0.75),
        ]
    }

    #[test]
    fn entry_game_matches_bounds_table_on_grid() {
        let m = entry_game_model();
        for i in 0..5 {
            for j in 0..5 {
                let t = [-2.0 + 0.5 * i as f64, -2.0 + 0.5 * j as f64];
                let mass = m.mass_at(&t).unwrap();
                for (a, lo, up) in entry_bounds(t[0], t[1]) {
                    assert!((mass.lower(SubsetMask(a)) - lo).abs() < 1e-10, "lower {a} at {t:?}");
                    assert!((mass.upper(SubsetMask(a)) - up).abs() < 1e-10, "upper {a} at {t:?}");
                }
            }
        }
    }

    #[test]
    fn entry_game_values() {
        let m = entry_game_model();
        let mass = m.mass_at(&[0.0, 0.0]).unwrap();
        assert!(mass.is_additive());
        assert!((mass.mass(SubsetMask(0b0010)) - 0.25).abs() < 1e-15);
        let mass = m.mass_at(&[-1.0, -1.0]).unwrap();
        assert!((mass.mass(SubsetMask(0b0010)) - 0.025_171_2).abs() < 5e-7);
        assert!(matches!(m.mass_at(&[0.1, -1.0]), Err(Error::DomainError(_))));
    }

    #[test]
    fn roy_restrictions() {
        let m = roy_model();
        let t = [1.0 / 6.0, 0.5, 1.0 / 6.0];
        let mass = m.mass_at(&t).unwrap();
        let a10 = SubsetMask(0b0100);
        assert!((mass.lower(a10) - 1.0 / 6.0).abs() < 1e-15);
        assert!((mass.upper(a10) - 1.0 / 3.0).abs() < 1e-15);
        for t in [[0.2, 0.3, 0.1], [0.0, 0.5, 0.5], [0.6, 0.1, 0.1]] {
            let mass = m.mass_at(&t).unwrap();
            assert!((mass.lower(SubsetMask(0b0100)) - t[2]).abs() < 1e-15);
            assert!((mass.lower(SubsetMask(0b1000)) - t[1]).abs() < 1e-15);
            assert!((mass.lower(SubsetMask(0b0011)) - t[0]).abs() < 1e-15);
            assert!((mass.upper(SubsetMask(0b0011)) - t[0]).abs() < 1e-15);
        }
        let no_outside = m.mass_at(&[0.2, 0.3, 0.5]).unwrap();
        assert_eq!(no_outside.focal().len(), 3);
        assert!(matches!(m.mass_at(&[0.5, 0.5, 0.5]), Err(Error::DomainError(_))));
    }

    #[test]
    fn testability_examples() {
        let e = entry_game_model();
        assert!(!robustly_testable(&e, &[-1.0, -1.0], &[-1.0, -1.0]).unwrap());
        assert!(robustly_testable(&e, &[0.0, 0.0], &[-1.0, -1.0]).unwrap());
        assert!(robustly_testable(&e, &[-1.0, -1.0], &[0.0, 0.0]).unwrap());
        let r = roy_model();
        let t0 = [1.0 / 6.0, 0.5, 1.0 / 6.0];
        let t1 = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0];
        assert!(!robustly_testable(&r, &t0, &t1).unwrap());
        let eps = 1e-6;
        let t1 = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0 + eps];
        assert!(robustly_testable(&r, &t0, &t1).unwrap());
        assert!(robustly_testable(&r, &t1, &t0).unwrap());
    }

    #[test]
    fn entry_gradient_of_both_entry_event() {
        let e = entry_game_model();
        let g = belief_gradient(&e, &[0.0, 0.0], SubsetMask(0b0010), &[1.0, 1.0]).unwrap();
        assert!((g - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn analytic_and_finite_difference_gradients_agree() {
        let e = entry_game_model();
        let fd = IncompleteModel::new(
            e.space().clone(),
            2,
            "entry_fd",
            Arc::new(|t: &[f64]| t.iter().all(|&x| x <= 0.0)),
            Arc::new(|t: &[f64]| entry_game_model().mass_at(t)),
        );
        for t in [[-0.3, -1.2], [-1.0, -0.5], [-2.0, -1.5]] {
            for a in 1..15u32 {
                for h in [[1.0, 0.0], [0.0, 1.0], [-0.7, 0.4]] {
                    let x = belief_gradient(&e, &t, SubsetMask(a), &h).unwrap();
                    let y = belief_gradient(&fd, &t, SubsetMask(a), &h).unwrap();
                    assert!((x - y).abs() < 1e-5);
                }
            }
        }
        // One-sided differences at the boundary point.
        let y = belief_gradient(&fd, &[0.0, 0.0], SubsetMask(0b0010), &[1.0, 1.0]).unwrap();
        assert!((y - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-5);
    }

    #[test]
    fn roy_gradient_is_constant() {
        let r = roy_model();
        for a in 1..15u32 {
            let g1 = belief_gradient(&r, &[0.1, 0.2, 0.3], SubsetMask(a), &[0.3, -1.0, 2.0]).unwrap();
            let g2 = belief_gradient(&r, &[0.3, 0.1, 0.05], SubsetMask(a), &[0.3, -1.0, 2.0]).unwrap();
            assert_eq!(g1, g2);
        }
    }

    #[test]
    fn simulated_entry_model_matches_analytic() {
        let e = entry_game_model();
        let n = 200_000;
        let sim = simulated_model(
            e.space().clone(),
            2,
            Arc::new(|t: &[f64]| t.iter().all(|&x| x <= 0.0)),
            entry_game_sampler(),
            n,
            11,
        );
        let t = [-1.0, -1.0];
        let (a, b) = (e.mass_at(&t).unwrap(), sim.mass_at(&t).unwrap());
        for (k, m) in a.focal() {
            let se = (m * (1.0 - m) / n as f64).sqrt();
            assert!((b.mass(*k) - m).abs() < 3.0 * se + 1e-12, "subset {k}");
        }
        let other = simulated_model(
            e.space().clone(),
            2,
            Arc::new(|_: &[f64]| true),
            entry_game_sampler(),
            1000,
            12,
        );
        assert_ne!(other.mass_at(&t).unwrap(), sim.mass_at(&t).unwrap());
    }

    #[test]
    fn sampler_emitting_empty_set_is_an_error() {
        let space = OutcomeSpace::new(["a", "b"]).unwrap();
        let m = simulated_model(space.clone(), 1, Arc::new(|_: &[f64]| true), Arc::new(|_, _| SubsetMask(0)), 5, 1);
        assert_eq!(m.mass_at(&[0.0]).unwrap_err(), Error::SamplerError);
        let m = simulated_model(space, 1, Arc::new(|_: &[f64]| true), Arc::new(|_, _| SubsetMask(1)), 5, 1);
        assert_eq!(m.mass_at(&[0.0]).unwrap().mass(SubsetMask(1)), 1.0);
    }

    #[test]
    fn model_spec_json() {
        let spec: ModelSpec = serde_json::from_str("\"roy\"").unwrap();
        assert_eq!(spec.build().unwrap().name(), "roy");
        let spec: ModelSpec = serde_json::from_str(r#"{"builder": "entry_game"}"#).unwrap();
        assert_eq!(spec.build().unwrap().dim(), 2);
        let text = r#"{"labels": ["a", "b"], "lower": [0.0], "upper": [1.0],
            "points": [{"theta": [0.5], "masses": {"1": 0.5, "3": 0.5}}]}"#;
        let m = serde_json::from_str::<ModelSpec>(text).unwrap().build().unwrap();
        assert!((m.mass_at(&[0.5]).unwrap().upper(SubsetMask(1)) - 1.0).abs() < 1e-15);
        assert!(m.mass_at(&[0.25]).is_err());
    }
}
