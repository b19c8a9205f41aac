//! Local asymptotic power along cones of local alternatives.
//!
//! The directional derivative of the least-favorable pair solves a quadratic
//! program over the critical cone of the active constraints. Its alternative
//! part divided by the null density gives the L² score along a direction.
//! Scores on the generators of a cone give the information matrix, the
//! efficient influence function of a linear functional `p'h`, the one-sided
//! power envelope and the statistic that attains it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde_json::{json, Value};

use crate::capacity::SubsetMask;
use crate::error::{Error, Result};
use crate::lfp::{solve_program, LfpProblem, Program, Row, ACTIVE_TOL};
use crate::lp::{LinearProgram, Sense};
use crate::model::{belief_gradient, IncompleteModel};
use crate::nnls::nnls;
use crate::normal;
use crate::qp::QuadraticProgram;

/// Multipliers above this level (relative to the gradient scale) count as positive.
pub const MULTIPLIER_TOL: f64 = 1e-6;
/// Gap between the largest and smallest value derivative that flags non-unique multipliers.
pub const UNIQUENESS_TOL: f64 = 1e-8;
/// A null density below this level is treated as zero when forming scores.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Largest movement of the null least-favorable density tolerated along a generator.
pub const NULL_CONSTANT_TOL: f64 = 1e-6;
/// Relative ridge on the quadratic objective; selects the minimum-norm minimizer.
pub const QP_RIDGE: f64 = 1e-8;

/// A finitely generated convex cone in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone {
    generators: Vec<Vec<f64>>,
}

impl Cone {
    /// Cone spanned by nonzero generators of a common dimension.
    pub fn new(generators: Vec<Vec<f64>>) -> Result<Self> {
        let d = generators.first().map(Vec::len).ok_or_else(|| Error::InvalidInput("cone has no generators".into()))?;
        for g in &generators {
            if g.len() != d || d == 0 {
                return Err(Error::InvalidInput("cone generators differ in dimension".into()));
            }
            if g.iter().all(|v| *v == 0.0) || g.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("cone generator must be finite and nonzero".into()));
            }
        }
        Ok(Self { generators })
    }

    /// Generators.
    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.generators[0].len()
    }

    /// True iff `h` is a nonnegative combination of the generators up to `tol`.
    pub fn contains(&self, h: &[f64], tol: f64) -> bool {
        if h.len() != self.dim() {
            return false;
        }
        let a = DMatrix::from_fn(self.dim(), self.generators.len(), |i, k| self.generators[k][i]);
        let b = DVector::from_column_slice(h);
        match nnls(&a, &b) {
            Ok(c) => (&a * c - b).amax() <= tol,
            Err(_) => false,
        }
    }
}

/// Directional derivative of the least-favorable pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalDerivative {
    /// Derivative of the null density.
    pub u0: Vec<f64>,
    /// Derivative of the alternative density.
    pub u1: Vec<f64>,
    /// Active constraints imposed with equality, as `(side, set)`.
    pub equality_set: Vec<(usize, SubsetMask)>,
    /// Active constraints imposed as inequalities, as `(side, set)`.
    pub inequality_set: Vec<(usize, SubsetMask)>,
    /// Difference between the largest and smallest first-order value change over all multipliers.
    pub multiplier_spread: f64,
}

impl DirectionalDerivative {
    /// False when the multiplier set gives more than one first-order value change.
    pub fn multiplier_unique(&self) -> bool {
        self.multiplier_spread <= UNIQUENESS_TOL
    }

    /// Error with `MultiplierNotUnique` unless the multiplier check passed.
    pub fn require_unique_multiplier(&self) -> Result<()> {
        if self.multiplier_unique() {
            Ok(())
        } else {
            Err(Error::MultiplierNotUnique)
        }
    }

    /// Concatenation `(u0, u1)`.
    pub fn stacked(&self) -> Vec<f64> {
        self.u0.iter().chain(&self.u1).copied().collect()
    }
}

/// `h'∇ν(A)` for the alternative mass after its focal sets are moved off `zero`.
///
/// Moving focal sets off `Z` turns `ν(A)` into `ν(A ∪ Z) − ν(Z) + ν(A ∩ Z)`.
fn pushed_gradient(model: &IncompleteModel, theta: &[f64], a: SubsetMask, zero: SubsetMask, h: &[f64]) -> Result<f64> {
    let grad = |set: SubsetMask| -> Result<f64> {
        if set.is_empty() {
            Ok(0.0)
        } else {
            belief_gradient(model, theta, set, h)
        }
    };
    if zero.is_empty() {
        return grad(a);
    }
    Ok(grad(SubsetMask(a.0 | zero.0))? - grad(zero)? + grad(SubsetMask(a.0 & zero.0))?)
}

/// Multiplier polytope `{χ >= 0, η free : ∇f = Σ χ_ℓ a_ℓ + η0 e0 + η1 e1}` as an LP.
struct MultiplierLp {
    base: LinearProgram,
    m: usize,
}

impl MultiplierLp {
    fn new(a: &[DVector<f64>], grad: &DVector<f64>, l: usize, band: f64) -> Self {
        let m = a.len();
        let nvar = m + 4;
        let scale = 1.0 + grad.amax();
        let cap = 1e4 * scale;
        let mut base = LinearProgram::new(vec![0.0; nvar]);
        for i in 0..2 * l {
            let mut row: Vec<f64> = a.iter().map(|v| v[i]).collect();
            let side = i / l;
            let mut eta = [0.0; 4];
            eta[2 * side] = 1.0;
            eta[2 * side + 1] = -1.0;
            row.extend(eta);
            base.push(row.clone(), Sense::Le, grad[i] + band);
            base.push(row, Sense::Ge, grad[i] - band);
        }
        for j in 0..nvar {
            let mut row = vec![0.0; nvar];
            row[j] = 1.0;
            base.push(row, Sense::Le, if j < m { cap } else { 10.0 * (m as f64 + 1.0) * cap });
        }
        Self { base, m }
    }

    fn optimize(&self, objective: Vec<f64>, extra: Option<(Vec<f64>, f64)>) -> Result<Vec<f64>> {
        let mut lp = self.base.clone();
        lp.objective = objective;
        if let Some((row, rhs)) = extra {
            lp.push(row, Sense::Ge, rhs);
        }
        Ok(lp.solve()?.x)
    }

    fn pad(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        out.resize(self.m + 4, 0.0);
        out
    }
}

/// Derivative of the least-favorable pair at `(θ0, θ0 + ξ)` as the
/// alternative moves along `θ0 + ξ + τh`.
///
/// Active constraints whose multiplier is positive somewhere on the face of
/// multipliers maximizing `Σ χ_ℓ h'∇ν(A_ℓ)` are imposed with equality, the
/// other active constraints as inequalities. The quadratic form
/// `ζ̄(u) = Σ_s H''(q0/(q0+q1)) (u0 q1 − u1 q0)² / (q0+q1)³` is minimized over
/// that set with a tiny ridge picking the minimum-norm minimizer.
pub fn lfp_directional_derivative(
    model: &IncompleteModel,
    theta0: &[f64],
    xi: &[f64],
    h: &[f64],
) -> Result<DirectionalDerivative> {
    let d = model.dim();
    if theta0.len() != d || xi.len() != d || h.len() != d {
        return Err(Error::InvalidInput("parameter, shift and direction must match the model dimension".into()));
    }
    let l = model.space().len();
    if h.iter().all(|v| *v == 0.0) {
        return Ok(DirectionalDerivative {
            u0: vec![0.0; l],
            u1: vec![0.0; l],
            equality_set: vec![],
            inequality_set: vec![],
            multiplier_spread: 0.0,
        });
    }
    let theta1: Vec<f64> = theta0.iter().zip(xi).map(|(a, b)| a + b).collect();
    let problem = LfpProblem::new(model.mass_at(theta0)?, model.mass_at(&theta1)?)?;
    let prog = Program::build(&problem)?;
    let sol = solve_program(&problem)?;
    let x: Vec<f64> = sol.q0.iter().chain(&sol.q1).copied().collect();
    let (grad, hess) = prog.derivatives(&x);

    let full = model.space().full();
    let mut rows: Vec<Row> = prog.eq.iter().filter(|r| r.set != full).copied().collect();
    rows.extend(prog.ineq.iter().filter(|r| prog.row_value(r, &x) - r.rhs <= ACTIVE_TOL).copied());
    let a: Vec<DVector<f64>> = rows.iter().map(|r| prog.row_vector(r)).collect();
    let c: Vec<f64> = rows
        .iter()
        .map(|r| if r.side == 0 { Ok(0.0) } else { pushed_gradient(model, &theta1, r.set, prog.null_zero, h) })
        .collect::<Result<_>>()?;

    // Face of multipliers maximizing the first-order change of the optimal value.
    let band = 1e-10_f64.max(10.0 * sol.kkt_residual) * (1.0 + grad.amax());
    let mlp = MultiplierLp::new(&a, &grad, l, band);
    let m = rows.len();
    let neg_c: Vec<f64> = c.iter().map(|v| -v).collect();
    let x_max = mlp.optimize(mlp.pad(&neg_c), None)?;
    let x_min = mlp.optimize(mlp.pad(&c), None)?;
    let val = |x: &[f64]| -> f64 { c.iter().zip(x).map(|(a, b)| a * b).sum() };
    let best = val(&x_max);
    let spread = best - val(&x_min);
    let thresh = MULTIPLIER_TOL * (1.0 + grad.amax());
    let mut positive: Vec<bool> = (0..m).map(|k| x_max[k] > thresh).collect();
    let face_row = (mlp.pad(&c), best - 1e-9 * (1.0 + best.abs()));
    for k in 0..m {
        if positive[k] {
            continue;
        }
        let mut obj = vec![0.0; m + 4];
        obj[k] = -1.0;
        let xk = mlp.optimize(obj, Some(face_row.clone()))?;
        for j in 0..m {
            if xk[j] > thresh {
                positive[j] = true;
            }
        }
    }

    let mut equality_set = Vec::new();
    let mut inequality_set = Vec::new();
    let mut qp = QuadraticProgram {
        q: hess.clone(),
        c: DVector::zeros(2 * l),
        eq: Vec::new(),
        ineq: Vec::new(),
    };
    let ridge = QP_RIDGE * (1.0 + hess.amax());
    for i in 0..2 * l {
        qp.q[(i, i)] += ridge;
    }
    for side in 0..2 {
        let mut e = DVector::zeros(2 * l);
        for s in 0..l {
            e[side * l + s] = 1.0;
        }
        qp.eq.push((e, 0.0));
    }
    for k in 0..m {
        if positive[k] {
            qp.eq.push((a[k].clone(), c[k]));
            equality_set.push((rows[k].side, rows[k].set));
        } else {
            qp.ineq.push((a[k].clone(), c[k]));
            inequality_set.push((rows[k].side, rows[k].set));
        }
    }
    check_mfcq(&qp)?;
    let u = qp.solve().map_err(|e| match e {
        Error::LpInfeasible => Error::MfcqViolation,
        other => other,
    })?;
    Ok(DirectionalDerivative {
        u0: u.rows(0, l).iter().copied().collect(),
        u1: u.rows(l, l).iter().copied().collect(),
        equality_set,
        inequality_set,
        multiplier_spread: spread.max(0.0),
    })
}

/// Strict feasibility of the linearized constraints: some `u` satisfies the
/// equality rows and every inequality row with positive slack.
fn check_mfcq(qp: &QuadraticProgram) -> Result<()> {
    if qp.ineq.is_empty() {
        return Ok(());
    }
    let n = qp.c.len();
    // Variables: u = u⁺ − u⁻ and t in [0, 1]; maximize t.
    let mut obj = vec![0.0; 2 * n + 1];
    obj[2 * n] = -1.0;
    let mut lp = LinearProgram::new(obj);
    let split = |a: &DVector<f64>, t: f64| -> Vec<f64> {
        let mut row: Vec<f64> = a.iter().copied().collect();
        row.extend(a.iter().map(|v| -v));
        row.push(t);
        row
    };
    for (a, r) in &qp.eq {
        lp.push(split(a, 0.0), Sense::Eq, *r);
    }
    for (a, r) in &qp.ineq {
        lp.push(split(a, -1.0), Sense::Ge, *r);
    }
    let mut cap = vec![0.0; 2 * n + 1];
    cap[2 * n] = 1.0;
    lp.push(cap, Sense::Le, 1.0);
    match lp.solve() {
        Ok(sol) if sol.x[2 * n] > 1e-9 => Ok(()),
        Ok(_) | Err(Error::LpInfeasible) => Err(Error::MfcqViolation),
        Err(e) => Err(e),
    }
}

/// Scalar score `s ↦ u1(s)/q0(s)` along one direction.
pub fn l2_score_from_derivative(u1: &[f64], q0: &[f64]) -> Result<Vec<f64>> {
    if u1.len() != q0.len() {
        return Err(Error::InvalidInput("derivative and density lengths differ".into()));
    }
    u1.iter()
        .zip(q0)
        .enumerate()
        .map(|(s, (u, q))| {
            if *q > SUPPORT_TOL {
                Ok(u / q)
            } else if u.abs() <= 1e-9 {
                Ok(0.0)
            } else {
                Err(Error::DivisionBySupportGap(s))
            }
        })
        .collect()
}

/// Local expansion of the least-favorable experiment on a cone.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Expansion {
    /// Null least-favorable density.
    pub q0: Vec<f64>,
    /// Score vector `ℓ̇(s)` in `R^d` for each outcome.
    pub scores: Vec<Vec<f64>>,
    /// Scalar score `gᵏ'ℓ̇` of each generator, per outcome.
    pub generator_scores: Vec<Vec<f64>>,
    /// Information matrix `Σ_s q0(s) ℓ̇(s) ℓ̇(s)'`.
    pub info: DMatrix<f64>,
    /// Cone of local directions.
    pub cone: Cone,
    /// Shift `ξ` of the alternative.
    pub shift: Vec<f64>,
    /// Largest residual of `gᵏ'ℓ̇(s) = score_k(s)` after the least-squares fit.
    pub fit_residual: f64,
}

impl L2Expansion {
    /// Expansion from per-generator scalar scores.
    ///
    /// `ℓ̇(s)` is the minimum-norm least-squares solution of `gᵏ'ℓ̇(s) = score_k(s)`.
    pub fn from_generator_scores(q0: Vec<f64>, generator_scores: Vec<Vec<f64>>, cone: Cone, shift: Vec<f64>) -> Result<Self> {
        let k = cone.generators().len();
        let d = cone.dim();
        let l = q0.len();
        if generator_scores.len() != k || generator_scores.iter().any(|s| s.len() != l) || shift.len() != d {
            return Err(Error::InvalidInput("score table does not match cone and outcome space".into()));
        }
        let g = DMatrix::from_fn(k, d, |i, j| cone.generators()[i][j]);
        let svd = g.clone().svd(true, true);
        let pinv = svd.pseudo_inverse(1e-12).map_err(|e| Error::InvalidInput(e.into()))?;
        let mut scores = Vec::with_capacity(l);
        let mut fit_residual = 0.0f64;
        for s in 0..l {
            let b = DVector::from_fn(k, |i, _| generator_scores[i][s]);
            let v = &pinv * &b;
            fit_residual = fit_residual.max((&g * &v - b).amax());
            scores.push(v.iter().copied().collect::<Vec<f64>>());
        }
        let info = information(&q0, &scores, d);
        Ok(Self { q0, scores, generator_scores, info, cone, shift, fit_residual })
    }

    /// Expansion from a full score table `ℓ̇(s)`.
    pub fn from_scores(q0: Vec<f64>, scores: Vec<Vec<f64>>, cone: Cone, shift: Vec<f64>) -> Result<Self> {
        let d = cone.dim();
        if scores.len() != q0.len() || scores.iter().any(|v| v.len() != d) {
            return Err(Error::InvalidInput("score table does not match cone and outcome space".into()));
        }
        let generator_scores = cone
            .generators()
            .iter()
            .map(|g| scores.iter().map(|v| dot(g, v)).collect())
            .collect();
        let info = information(&q0, &scores, d);
        Ok(Self { q0, scores, generator_scores, info, cone, shift, fit_residual: 0.0 })
    }

    /// Scalar score `h'ℓ̇(s)` per outcome.
    pub fn score_along(&self, h: &[f64]) -> Vec<f64> {
        self.scores.iter().map(|v| dot(h, v)).collect()
    }

    /// `E_{q0}[ℓ̇]`.
    pub fn score_mean(&self) -> Vec<f64> {
        let d = self.cone.dim();
        (0..d).map(|j| self.q0.iter().zip(&self.scores).map(|(q, v)| q * v[j]).sum()).collect()
    }

    /// JSON form: null density, score table, information matrix.
    pub fn to_json(&self) -> Value {
        let d = self.cone.dim();
        json!({
            "q0": self.q0,
            "scores": self.scores,
            "info": (0..d).map(|i| (0..d).map(|j| self.info[(i, j)]).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "cone": self.cone.generators(),
            "shift": self.shift,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn information(q0: &[f64], scores: &[Vec<f64>], d: usize) -> DMatrix<f64> {
    let mut info = DMatrix::zeros(d, d);
    for (q, v) in q0.iter().zip(scores) {
        for i in 0..d {
            for j in 0..d {
                info[(i, j)] += q * v[i] * v[j];
            }
        }
    }
    info
}

/// Scores along every generator of `cone` at `(θ0, ξ)`.
///
/// Fails with `NullLfpNotConstant(k)` when the null density moves along generator `k`.
pub fn build_expansion(model: &IncompleteModel, theta0: &[f64], xi: &[f64], cone: &Cone) -> Result<L2Expansion> {
    if cone.dim() != model.dim() {
        return Err(Error::InvalidInput("cone dimension differs from model".into()));
    }
    let theta1: Vec<f64> = theta0.iter().zip(xi).map(|(a, b)| a + b).collect();
    let base = solve_program(&LfpProblem::new(model.mass_at(theta0)?, model.mass_at(&theta1)?)?)?;
    let mut generator_scores = Vec::new();
    for (k, g) in cone.generators().iter().enumerate() {
        let der = lfp_directional_derivative(model, theta0, xi, g)?;
        if der.u0.iter().any(|v| v.abs() > NULL_CONSTANT_TOL) {
            return Err(Error::NullLfpNotConstant(k));
        }
        generator_scores.push(l2_score_from_derivative(&der.u1, &base.q0)?);
    }
    L2Expansion::from_generator_scores(base.q0, generator_scores, cone.clone(), xi.to_vec())
}

/// Influence curve, its projection on the tangent cone and the projection norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeResult {
    /// Target direction `p` of the functional `p'h`.
    pub p: Vec<f64>,
    /// Minimum-norm influence curve `ϱ`.
    pub rho: Vec<f64>,
    /// Efficient influence function `ϱ̃`.
    pub rho_eff: Vec<f64>,
    /// `‖ϱ̃‖` in `L²(q0)`.
    pub norm_eff: f64,
    /// Cone coefficients `c_k >= 0` with `ϱ̃ = Σ c_k gᵏ'ℓ̇`.
    pub coefficients: Vec<f64>,
    /// Null density used for inner products.
    pub q0: Vec<f64>,
}

impl EnvelopeResult {
    /// Inner product in `L²(q0)`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.q0.iter().zip(a.iter().zip(b)).map(|(q, (x, y))| q * x * y).sum()
    }

    /// Power bound `1 − Φ(z_α − ⟨ϱ, h'ℓ̇⟩ / ‖ϱ̃‖)`.
    pub fn envelope(&self, expansion: &L2Expansion, h: &[f64], alpha: f64) -> f64 {
        let drift = self.inner(&self.rho, &expansion.score_along(h)) / self.norm_eff;
        normal::sf(normal::upper_critical(alpha) - drift)
    }

    /// Statistic summand `ϱ̃(s)/‖ϱ̃‖` per outcome.
    pub fn summands(&self) -> Vec<f64> {
        self.rho_eff.iter().map(|v| v / self.norm_eff).collect()
    }

    /// JSON form.
    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "rho": self.rho,
            "rho_eff": self.rho_eff,
            "norm_eff": self.norm_eff,
            "coefficients": self.coefficients,
        })
    }
}

/// Efficient influence function of `p'h` on the expansion's cone.
///
/// `ϱ` is the minimum-norm element of the span of generator scores with
/// `⟨ϱ, gᵏ'ℓ̇⟩ = p'gᵏ`; `ϱ̃` is its projection on the cone of nonnegative
/// combinations of generator scores, computed by nonnegative least squares
/// in the `q0`-weighted inner product.
pub fn efficient_influence(expansion: &L2Expansion, p: &[f64]) -> Result<EnvelopeResult> {
    let d = expansion.cone.dim();
    if p.len() != d {
        return Err(Error::InvalidInput("functional direction has the wrong dimension".into()));
    }
    let q0 = &expansion.q0;
    let sig = &expansion.generator_scores;
    let k = sig.len();
    let l = q0.len();
    let inner = |a: &[f64], b: &[f64]| -> f64 { q0.iter().zip(a.iter().zip(b)).map(|(q, (x, y))| q * x * y).sum() };
    let gram = DMatrix::from_fn(k, k, |i, j| inner(&sig[i], &sig[j]));
    let r = DVector::from_fn(k, |i, _| dot(p, &expansion.cone.generators()[i]));
    let eig = SymmetricEigen::new(gram.clone());
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut beta = DVector::zeros(k);
    for i in 0..k {
        let lam = eig.eigenvalues[i];
        if lam > 1e-12 * scale.max(1e-300) {
            let v = eig.eigenvectors.column(i);
            beta += v * (v.dot(&r) / lam);
        }
    }
    let mismatch = (&gram * &beta - &r).amax();
    if scale == 0.0 || mismatch > 1e-8 * (1.0 + r.amax()) {
        return Err(Error::FunctionalNotDifferentiable(format!(
            "no influence curve in the score span reproduces p'g on every generator (mismatch {mismatch:e})"
        )));
    }
    let combine = |w: &DVector<f64>| -> Vec<f64> { (0..l).map(|s| (0..k).map(|i| w[i] * sig[i][s]).sum()).collect() };
    let rho = combine(&beta);
    let sq: Vec<f64> = q0.iter().map(|q| q.max(0.0).sqrt()).collect();
    let a = DMatrix::from_fn(l, k, |s, i| sq[s] * sig[i][s]);
    let b = DVector::from_fn(l, |s, _| sq[s] * rho[s]);
    let coef = nnls(&a, &b)?;
    let rho_eff = combine(&coef);
    let norm_eff = inner(&rho_eff, &rho_eff).sqrt();
    if norm_eff <= 0.0 {
        return Err(Error::FunctionalNotDifferentiable("projection of the influence curve on the cone is zero".into()));
    }
    Ok(EnvelopeResult {
        p: p.to_vec(),
        rho,
        rho_eff,
        norm_eff,
        coefficients: coef.iter().copied().collect(),
        q0: q0.clone(),
    })
}

/// `1 − Φ(z_α − ⟨ϱ, h'ℓ̇⟩ / ‖ϱ̃‖)`.
pub fn power_envelope(result: &EnvelopeResult, expansion: &L2Expansion, h: &[f64], alpha: f64) -> f64 {
    result.envelope(expansion, h, alpha)
}

/// `T_n = n^{-1/2} Σ ϱ̃(s_i)/‖ϱ̃‖` and whether `T_n >= z_α`.
pub fn optimal_statistic(result: &EnvelopeResult, sample: &[usize], alpha: f64) -> Result<(f64, bool)> {
    let l = result.rho_eff.len();
    if sample.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    let mut total = 0.0;
    for &s in sample {
        if s >= l {
            return Err(Error::InvalidInput(format!("outcome index {s} outside the outcome space")));
        }
        total += result.rho_eff[s];
    }
    let t = total / (result.norm_eff * (sample.len() as f64).sqrt());
    Ok((t, t >= normal::upper_critical(alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfp::solve_lfp;
    use crate::model::{entry_game_model, roy_model};
    use std::f64::consts::PI;

    const ROY_THETA0: [f64; 3] = [1.0 / 6.0, 0.5, 1.0 / 6.0];
    const ROY_XI_A: [f64; 3] = [0.0, -1.0 / 6.0, 1.0 / 6.0];

    fn phi0() -> f64 {
        1.0 / (2.0 * PI).sqrt()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn entry_cone_ii() -> Cone {
        Cone::new(vec![vec![0.0, -1.0], vec![-1.0, -1.0]]).unwrap()
    }

    fn roy_cone_a() -> Cone {
        Cone::new(vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![0.0, -1.0, 0.0]]).unwrap()
    }

    #[test]
    fn zero_direction_gives_zero() {
        let der = lfp_directional_derivative(&entry_game_model(), &[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!(der.stacked().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn roy_case_a_derivative_and_score() {
        let der = lfp_directional_derivative(&roy_model(), &ROY_THETA0, &ROY_XI_A, &[0.0, 0.0, 1.0]).unwrap();
        assert!(close(&der.u1, &[0.0, 0.0, 1.0, -1.0], 1e-8), "{:?}", der.u1);
        assert!(close(&der.u0, &[0.0; 4], 1e-8), "{:?}", der.u0);
        assert!(der.multiplier_unique(), "{der:?}");
        let q0 = [1.0 / 12.0, 1.0 / 12.0, 1.0 / 3.0, 0.5];
        let score = l2_score_from_derivative(&der.u1, &q0).unwrap();
        assert!(close(&score, &[0.0, 0.0, 3.0, -2.0], 1e-7));
    }

    #[test]
    fn score_rules() {
        assert_eq!(l2_score_from_derivative(&[0.0; 3], &[0.2, 0.3, 0.5]).unwrap(), vec![0.0; 3]);
        assert_eq!(l2_score_from_derivative(&[0.1, -0.1], &[0.0, 1.0]).unwrap_err(), Error::DivisionBySupportGap(0));
    }

    #[test]
    fn entry_scores_along_e1() {
        let der = lfp_directional_derivative(&entry_game_model(), &[0.0, 0.0], &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let score = l2_score_from_derivative(&der.u1, &[0.25; 4]).unwrap();
        let f = 2.0 * phi0();
        assert!(close(&score, &[0.0, f, 0.0, -f], 1e-8), "{score:?}");
    }

    #[test]
    fn entry_cone_ii_information() {
        let exp = build_expansion(&entry_game_model(), &[0.0, 0.0], &[0.0, 0.0], &entry_cone_ii()).unwrap();
        let want = [[1.0 / PI, 0.5 / PI], [0.5 / PI, 1.0 / PI]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((exp.info[(i, j)] - want[i][j]).abs() < 1e-8, "{}", exp.info);
            }
        }
        assert!(exp.score_mean().iter().all(|m| m.abs() < 1e-8));
    }

    #[test]
    fn roy_cone_information_is_singular() {
        let exp = build_expansion(&roy_model(), &ROY_THETA0, &ROY_XI_A, &roy_cone_a()).unwrap();
        let want = DMatrix::from_diagonal(&DVector::from_column_slice(&[0.0, 0.0, 5.0]));
        assert!((&exp.info - want).amax() < 1e-7, "{}", exp.info);
        assert!(exp.score_mean().iter().all(|m| m.abs() < 1e-8));
        let env = efficient_influence(&exp, &[0.0, 0.0, 1.0]).unwrap();
        assert!(close(&env.rho_eff, &[0.0, 0.0, 0.6, -0.4], 1e-7), "{:?}", env.rho_eff);
        assert!((env.norm_eff - 1.0 / 5f64.sqrt()).abs() < 1e-7);
        let summ = env.summands();
        assert!((summ[2] - 3.0 / 5f64.sqrt()).abs() < 1e-6 && (summ[3] + 2.0 / 5f64.sqrt()).abs() < 1e-6);
        let e = env.envelope(&exp, &[0.0, 0.0, 1.0], 0.05);
        assert!((e - normal::sf(normal::upper_critical(0.05) - 5f64.sqrt())).abs() < 1e-6);
    }

    #[test]
    fn entry_cone_i_efficient_influence() {
        let cone = Cone::new(vec![vec![-1.0, -1.0]]).unwrap();
        let exp = build_expansion(&entry_game_model(), &[0.0, 0.0], &[0.0, 0.0], &cone).unwrap();
        let p = [-1.0, -1.0];
        let env = efficient_influence(&exp, &p).unwrap();
        let k = (2.0 * PI).sqrt() / 3.0 * (p[0] + p[1]);
        assert!(close(&env.rho_eff, &[0.0, 2.0 * k, -k, -k], 1e-7), "{:?}", env.rho_eff);
        assert!((env.norm_eff - (4.0 * PI / 3.0).sqrt()).abs() < 1e-7);
    }

    #[test]
    fn entry_cone_ii_statistic_and_envelope() {
        let exp = build_expansion(&entry_game_model(), &[0.0, 0.0], &[0.0, 0.0], &entry_cone_ii()).unwrap();
        let env = efficient_influence(&exp, &[-1.0, -1.0]).unwrap();
        let r = 1.5f64.sqrt();
        assert!(close(&env.summands(), &[0.0, -4.0 / 3.0 * r, 2.0 / 3.0 * r, 2.0 / 3.0 * r], 1e-7), "{:?}", env.summands());
        for h in [[-0.5, -1.0], [0.0, -2.0], [-1.0, -1.0]] {
            let want = normal::sf(normal::upper_critical(0.05) - (-h[0] - h[1]) / (4.0 * PI / 3.0).sqrt());
            assert!((power_envelope(&env, &exp, &h, 0.05) - want).abs() < 1e-7);
        }
        assert!((power_envelope(&env, &exp, &[0.0, 0.0], 0.05) - 0.05).abs() < 1e-12);
        // Projection inequality and identity.
        for g in &exp.generator_scores {
            assert!(env.inner(&env.rho_eff, g) >= env.inner(&env.rho, g) - 1e-8);
        }
        let resid: Vec<f64> = env.rho.iter().zip(&env.rho_eff).map(|(a, b)| a - b).collect();
        assert!(env.inner(&env.rho_eff, &resid).abs() < 1e-8);
        assert!((env.norm_eff.powi(2) - env.inner(&env.rho, &env.rho_eff)).abs() < 1e-8);
    }

    #[test]
    fn entry_cones_match_analytic_scores() {
        let f = 2.0 * phi0();
        // ℓ̇ at θ0 = 0: (0,0) ↦ 0, (1,1) ↦ f(1,1), (1,0) ↦ (0,−f), (0,1) ↦ (−f,0).
        let analytic = [[0.0, 0.0], [f, f], [0.0, -f], [-f, 0.0]];
        let cones = [
            vec![vec![-1.0, -1.0]],
            vec![vec![0.0, -1.0], vec![-1.0, -1.0]],
            vec![vec![-1.0, 0.0], vec![-1.0, -1.0]],
        ];
        for gens in cones {
            let cone = Cone::new(gens.clone()).unwrap();
            let exp = build_expansion(&entry_game_model(), &[0.0, 0.0], &[0.0, 0.0], &cone).unwrap();
            for (g, sc) in gens.iter().zip(&exp.generator_scores) {
                for s in 0..4 {
                    assert!((sc[s] - dot(g, &analytic[s])).abs() < 1e-8, "{gens:?} {s}");
                }
            }
        }
    }

    #[test]
    fn full_space_cone_gives_inverse_information_form() {
        let q0 = vec![0.2, 0.3, 0.5];
        // Mean-zero scores with nonsingular information.
        let scores = vec![vec![1.0, -0.5], vec![0.6, 1.2], vec![-0.76, -0.52]];
        let cone = Cone::new(vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap();
        let exp = L2Expansion::from_scores(q0.clone(), scores.clone(), cone, vec![0.0, 0.0]).unwrap();
        let p = [0.7, -0.3];
        let env = efficient_influence(&exp, &p).unwrap();
        let cinv = exp.info.clone().try_inverse().unwrap();
        let w = cinv * DVector::from_column_slice(&p);
        for s in 0..3 {
            let want = w[0] * scores[s][0] + w[1] * scores[s][1];
            assert!((env.rho_eff[s] - want).abs() < 1e-9);
            assert!((env.rho[s] - want).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_ignores_components_orthogonal_to_scores() {
        let exp = build_expansion(&entry_game_model(), &[0.0, 0.0], &[0.0, 0.0], &entry_cone_ii()).unwrap();
        let env = efficient_influence(&exp, &[-1.0, -1.0]).unwrap();
        // A second influence curve: add a direction orthogonal to both generator scores.
        let sig = &exp.generator_scores;
        let mut v = vec![1.0, -1.0, 0.5, 0.25];
        for _ in 0..2 {
            for g in sig {
                let coef = env.inner(&v, g) / env.inner(g, g);
                for s in 0..4 {
                    v[s] -= coef * g[s];
                }
            }
        }
        let shifted: Vec<f64> = env.rho.iter().zip(&v).map(|(a, b)| a + b).collect();
        let sq: Vec<f64> = exp.q0.iter().map(|q| q.sqrt()).collect();
        let a = DMatrix::from_fn(4, 2, |s, i| sq[s] * sig[i][s]);
        let b = DVector::from_fn(4, |s, _| sq[s] * shifted[s]);
        let c = nnls(&a, &b).unwrap();
        for (x, y) in c.iter().zip(&env.coefficients) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn finite_differences_agree_with_qp_derivative() {
        let model = roy_model();
        let h = [0.0, 0.0, 1.0];
        let der = lfp_directional_derivative(&model, &ROY_THETA0, &ROY_XI_A, &h).unwrap();
        let q_at = |t: f64| {
            let th1: Vec<f64> = (0..3).map(|i| ROY_THETA0[i] + ROY_XI_A[i] + t * h[i]).collect();
            solve_lfp(&LfpProblem::new(model.mass_at(&ROY_THETA0).unwrap(), model.mass_at(&th1).unwrap()).unwrap())
                .unwrap()
                .q1
        };
        let tau = 1e-3;
        let (a, b) = (q_at(tau), q_at(2.0 * tau));
        for s in 0..4 {
            let base = [1.0 / 12.0, 1.0 / 12.0, 1.0 / 3.0, 0.5][s];
            let fd = (4.0 * (a[s] - base) - (b[s] - base)) / (2.0 * tau);
            assert!((fd - der.u1[s]).abs() < 1e-4, "{s}: {fd} vs {}", der.u1[s]);
        }
    }

    #[test]
    fn null_moving_cone_is_rejected() {
        // Entry game with a shifted, testable alternative: the null pair moves with θ1.
        let model = entry_game_model();
        let cone = Cone::new(vec![vec![-1.0, 0.0]]).unwrap();
        match build_expansion(&model, &[0.0, 0.0], &[-1.0, -0.2], &cone) {
            Err(Error::NullLfpNotConstant(0)) | Ok(_) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn cone_membership() {
        let c = entry_cone_ii();
        assert!(c.contains(&[-0.5, -1.0], 1e-10));
        assert!(!c.contains(&[-1.0, 0.0], 1e-6));
        assert!(Cone::new(vec![vec![0.0, 0.0]]).is_err());
    }
}
