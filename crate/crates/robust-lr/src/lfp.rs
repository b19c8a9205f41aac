//! Least favorable pairs under sharp identifying restrictions.
//!
//! The pair minimizes `Σ_s (p0+p1) H(p0/(p0+p1))` over the two cores. The
//! solver is a primal log-barrier method. Events whose lower and upper
//! probabilities coincide are imposed as equalities and eliminated through a
//! null-space basis; the remaining events enter the barrier.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde_json::{json, Value};

use crate::capacity::{BeliefMass, CapacityTable, OutcomeSpace, SubsetMask};
use crate::error::{Error, Result};
use crate::model::cores_disjoint;
use crate::nnls::nnls;

/// Tolerance used to detect events with `ν(A) + ν(A^c) = 1`.
pub const COMPLETE_TOL: f64 = 1e-12;
/// Relative width of the clusters merged when canonicalizing `Λ`.
pub const LAMBDA_MERGE_TOL: f64 = 1e-8;
/// Tolerance of the level-set equalities checked by [`verify_lfp`].
pub const VERIFY_TOL: f64 = 1e-8;
/// Slack below which a constraint is reported as active.
pub const ACTIVE_TOL: f64 = 1e-7;
/// Barrier stops when `2 · (constraint count) · μ` falls below this.
pub const GAP_TOL: f64 = 1e-10;
/// Barrier reduction factor per stage.
pub const MU_FACTOR: f64 = 0.2;
/// Armijo sufficient-decrease constant.
pub const ARMIJO_C: f64 = 1e-4;
/// Cap on the total number of Newton iterations.
pub const MAX_NEWTON: usize = 2000;

/// Member of the divergence family `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    /// `H(x) = -ln x`, giving `D_KL(p0+p1 ‖ p0)`.
    #[default]
    NegLog,
    /// `H(x) = x ln x`.
    XLogX,
}

impl Divergence {
    /// `t H(a/t)` with `t = a + b`.
    pub fn term(self, a: f64, b: f64) -> f64 {
        let t = a + b;
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Divergence::NegLog => t * (t / a).ln(),
            Divergence::XLogX => a * (a / t).ln(),
        }
    }

    /// Gradient and Hessian of [`Divergence::term`] in `(a, b)`.
    pub fn derivatives(self, a: f64, b: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let t = a + b;
        match self {
            Divergence::NegLog => {
                let r = t / a;
                let l = r.ln();
                let hab = 1.0 / t - 1.0 / a;
                ([l + 1.0 - r, l + 1.0], [[1.0 / t - 2.0 / a + t / (a * a), hab], [hab, 1.0 / t]])
            }
            Divergence::XLogX => {
                let hab = -b / (t * t);
                (
                    [a.ln() + 1.0 - t.ln() - a / t, -a / t],
                    [[1.0 / a - 1.0 / t - b / (t * t), hab], [hab, a / (t * t)]],
                )
            }
        }
    }

    /// Second derivative `H''(x)`.
    pub fn h2(self, x: f64) -> f64 {
        match self {
            Divergence::NegLog => 1.0 / (x * x),
            Divergence::XLogX => 1.0 / x,
        }
    }
}

/// A least-favorable-pair problem between a null and an alternative mass.
#[derive(Debug, Clone)]
pub struct LfpProblem {
    /// Null belief function.
    pub mass0: BeliefMass,
    /// Alternative belief function.
    pub mass1: BeliefMass,
    /// Divergence family member.
    pub divergence: Divergence,
}

impl LfpProblem {
    /// Problem with the default divergence `H(x) = -ln x`.
    pub fn new(mass0: BeliefMass, mass1: BeliefMass) -> Result<Self> {
        if mass0.space() != mass1.space() {
            return Err(Error::InvalidInput("masses live on different outcome spaces".into()));
        }
        Ok(Self { mass0, mass1, divergence: Divergence::NegLog })
    }

    /// Same problem with another divergence.
    pub fn with_divergence(mut self, divergence: Divergence) -> Self {
        self.divergence = divergence;
        self
    }
}

/// Multiplier of one event constraint `Σ_{s∈A} p_j(s) ≥ ν_j(A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventMultiplier {
    /// Event.
    pub set: SubsetMask,
    /// Multiplier; nonnegative for inequalities, signed for equalities.
    pub value: f64,
    /// Slack `p(A) - ν(A)` at the solution.
    pub slack: f64,
    /// True when the event was imposed as an equality.
    pub equality: bool,
}

/// Solution of the least-favorable-pair program.
#[derive(Debug, Clone)]
pub struct LfpSolution {
    /// Null pmf `Q0`.
    pub q0: Vec<f64>,
    /// Alternative pmf `Q1`.
    pub q1: Vec<f64>,
    /// Canonical ratio `Λ = q1/q0`: `None` where both vanish, `+∞` where only `q0` does.
    pub lambda: Vec<Option<f64>>,
    /// Null-side event multipliers.
    pub multipliers0: Vec<EventMultiplier>,
    /// Alternative-side event multipliers.
    pub multipliers1: Vec<EventMultiplier>,
    /// Null-side active events.
    pub active0: Vec<SubsetMask>,
    /// Alternative-side active events.
    pub active1: Vec<SubsetMask>,
    /// Max norm of the stationarity residual.
    pub kkt_residual: f64,
    /// Objective value at the solution.
    pub objective: f64,
    /// Final barrier parameter.
    pub barrier: f64,
    /// Newton iterations used.
    pub iterations: usize,
    /// Outcomes where the null side is forced to zero.
    pub null_zero: SubsetMask,
    /// Divergence used.
    pub divergence: Divergence,
}

impl LfpSolution {
    /// Number of outcomes.
    pub fn len(&self) -> usize {
        self.q0.len()
    }

    /// Always false.
    pub fn is_empty(&self) -> bool {
        self.q0.is_empty()
    }

    /// Distinct finite and infinite `Λ` values in increasing order.
    pub fn lambda_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.lambda.iter().flatten().copied().collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// The level set `{Λ > t}`; outcomes with undefined `Λ` are left out.
    pub fn level_set(&self, t: f64) -> SubsetMask {
        SubsetMask::from_members(
            self.lambda.iter().enumerate().filter(|(_, l)| l.is_some_and(|v| v > t)).map(|(s, _)| s),
        )
    }

    /// JSON object with `q0`, `q1`, `lambda` (`"inf"` for `+∞`), active sets and residual.
    pub fn to_json(&self, space: &OutcomeSpace) -> Value {
        let lambda: Vec<Value> = self
            .lambda
            .iter()
            .map(|l| match l {
                None => Value::Null,
                Some(v) if v.is_infinite() => json!("inf"),
                Some(v) => json!(v),
            })
            .collect();
        let sets = |a: &[SubsetMask]| -> Vec<Value> { a.iter().map(|m| json!(m.0)).collect() };
        json!({
            "labels": space.labels(),
            "q0": self.q0,
            "q1": self.q1,
            "lambda": lambda,
            "active0": sets(&self.active0),
            "active1": sets(&self.active1),
            "kkt_residual": self.kkt_residual,
            "objective": self.objective,
        })
    }
}

/// Outcome of [`verify_lfp`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// True when every level-set equality holds within the tolerance.
    pub pass: bool,
    /// Largest absolute violation.
    pub worst_violation: f64,
    /// Threshold `t` witnessing the worst violation.
    pub witness_t: f64,
    /// Side (0 or 1) witnessing the worst violation.
    pub witness_side: usize,
    /// Number of thresholds checked.
    pub thresholds: usize,
}

impl VerifyReport {
    /// JSON form.
    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass,
            "worst_violation": self.worst_violation,
            "witness_t": if self.witness_t.is_infinite() { json!("inf") } else { json!(self.witness_t) },
            "witness_side": self.witness_side,
            "thresholds": self.thresholds,
        })
    }
}

/// Check `Q0(Λ>t) = ν0*(Λ>t)` and `Q1(Λ>t) = ν1(Λ>t)` at every distinct `Λ` value and at `t = 0`.
pub fn verify_lfp(solution: &LfpSolution, mass0: &BeliefMass, mass1: &BeliefMass) -> VerifyReport {
    let upper0 = mass0.upper_table();
    let lower1 = mass1.lower_table();
    let mut ts = solution.lambda_values();
    ts.retain(|t| t.is_finite());
    ts.push(0.0);
    let sum = |q: &[f64], a: SubsetMask| -> f64 { a.members().map(|s| q[s]).sum() };
    let mut report =
        VerifyReport { pass: true, worst_violation: 0.0, witness_t: 0.0, witness_side: 0, thresholds: ts.len() };
    for &t in &ts {
        let a = solution.level_set(t);
        let v0 = (sum(&solution.q0, a) - upper0.get(a)).abs();
        let v1 = (sum(&solution.q1, a) - lower1.get(a)).abs();
        for (side, v) in [(0, v0), (1, v1)] {
            if v > report.worst_violation || v.is_nan() {
                report.worst_violation = v;
                report.witness_t = t;
                report.witness_side = side;
            }
        }
    }
    report.pass = report.worst_violation <= VERIFY_TOL;
    report
}

/// Solve the program after checking that the cores are disjoint.
pub fn solve_lfp(problem: &LfpProblem) -> Result<LfpSolution> {
    if !cores_disjoint(&problem.mass0, &problem.mass1)? {
        return Err(Error::NotRobustlyTestable);
    }
    solve_program(problem)
}

/// Inequality or equality row `Σ_{s∈set} x[side·L + s] ≥ rhs`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Row {
    pub side: usize,
    pub set: SubsetMask,
    pub rhs: f64,
}

/// The program in the form handed to the barrier method.
#[derive(Debug, Clone)]
pub(crate) struct Program {
    pub l: usize,
    pub divergence: Divergence,
    /// Null outcomes forced to zero; their objective terms are dropped.
    pub null_zero: SubsetMask,
    pub masses: [BeliefMass; 2],
    pub ineq: Vec<Row>,
    pub eq: Vec<Row>,
    /// Coordinates forced to zero, as `side·L + s`.
    pub fixed_zero: Vec<usize>,
}

/// Move every alternative focal set off the outcomes where the null pmf is forced to zero.
///
/// Those outcomes carry `Λ = +∞`, so the alternative law puts the least mass
/// the belief function allows there.
fn push_off(mass1: &BeliefMass, zero: SubsetMask) -> Result<BeliefMass> {
    if zero.is_empty() {
        return Ok(mass1.clone());
    }
    let entries = mass1.focal().iter().map(|&(k, m)| {
        let rest = SubsetMask(k.0 & !zero.0);
        (if rest.is_empty() { k } else { rest }, m)
    });
    BeliefMass::new(mass1.space().clone(), entries.collect::<Vec<_>>())
}

impl Program {
    pub(crate) fn build(problem: &LfpProblem) -> Result<Self> {
        let space = problem.mass0.space();
        if space != problem.mass1.space() {
            return Err(Error::InvalidInput("masses live on different outcome spaces".into()));
        }
        let l = space.len();
        let upper0 = problem.mass0.upper_table();
        let null_zero = SubsetMask::from_members((0..l).filter(|&s| upper0.get(SubsetMask::singleton(s)) <= COMPLETE_TOL));
        let mass1 = push_off(&problem.mass1, null_zero)?;
        let masses = [problem.mass0.clone(), mass1];
        let mut ineq = Vec::new();
        let mut eq = Vec::new();
        let mut fixed_zero = Vec::new();
        for (side, mass) in masses.iter().enumerate() {
            let lower = mass.lower_table();
            let full = space.full();
            for a in space.proper_subsets() {
                let comp = SubsetMask(full.0 & !a.0);
                let row = Row { side, set: a, rhs: lower.get(a) };
                if lower.get(a) + lower.get(comp) >= 1.0 - COMPLETE_TOL {
                    eq.push(row);
                } else {
                    ineq.push(row);
                }
            }
            eq.push(Row { side, set: full, rhs: 1.0 });
            let upper = mass.upper_table();
            for s in 0..l {
                if upper.get(SubsetMask::singleton(s)) <= COMPLETE_TOL {
                    fixed_zero.push(side * l + s);
                }
            }
        }
        Ok(Self { l, divergence: problem.divergence, null_zero, masses, ineq, eq, fixed_zero })
    }

    pub(crate) fn row_value(&self, row: &Row, x: &[f64]) -> f64 {
        row.set.members().map(|s| x[row.side * self.l + s]).sum()
    }

    pub(crate) fn row_vector(&self, row: &Row) -> DVector<f64> {
        let mut v = DVector::zeros(2 * self.l);
        for s in row.set.members() {
            v[row.side * self.l + s] = 1.0;
        }
        v
    }

    /// Objective value.
    pub(crate) fn objective(&self, x: &[f64]) -> f64 {
        (0..self.l)
            .filter(|&s| !self.null_zero.contains(s))
            .map(|s| self.divergence.term(x[s], x[self.l + s]))
            .sum()
    }

    /// Objective gradient and Hessian in the full `2L` coordinates.
    pub(crate) fn derivatives(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let l = self.l;
        let mut g = DVector::zeros(2 * l);
        let mut h = DMatrix::zeros(2 * l, 2 * l);
        for s in (0..l).filter(|&s| !self.null_zero.contains(s)) {
            let (gs, hs) = self.divergence.derivatives(x[s], x[l + s]);
            let idx = [s, l + s];
            for i in 0..2 {
                g[idx[i]] = gs[i];
                for j in 0..2 {
                    h[(idx[i], idx[j])] = hs[i][j];
                }
            }
        }
        (g, h)
    }

    /// Orthonormal basis of the null space of the equality rows, with forced
    /// coordinates zeroed.
    pub(crate) fn null_space(&self) -> DMatrix<f64> {
        let n = 2 * self.l;
        let mut gram = DMatrix::zeros(n, n);
        for row in &self.eq {
            let v = self.row_vector(row);
            gram += &v * v.transpose();
        }
        for &c in &self.fixed_zero {
            gram[(c, c)] += 1.0;
        }
        null_basis(&gram)
    }

    /// Starting point: each mass spread evenly over its focal set.
    pub(crate) fn start(&self) -> Vec<f64> {
        let mut x = self.masses[0].barycenter();
        x.extend(self.masses[1].barycenter());
        x
    }
}

/// Orthonormal basis of the kernel of a positive semidefinite Gram matrix.
pub(crate) fn null_basis(gram: &DMatrix<f64>) -> DMatrix<f64> {
    let n = gram.nrows();
    let eig = SymmetricEigen::new(gram.clone());
    let scale = eig.eigenvalues.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| eig.eigenvalues[i].abs() <= 1e-9 * scale)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        let mut z = DMatrix::from_columns(&cols);
        z.iter_mut().for_each(|v| {
            if v.abs() < 1e-14 {
                *v = 0.0
            }
        });
        z
    }
}

/// Solve `H d = -g` by Cholesky, adding a growing ridge when `H` is not numerically positive definite.
pub(crate) fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> Result<DVector<f64>> {
    let scale = (0..h.nrows()).fold(0.0f64, |a, i| a.max(h[(i, i)].abs())).max(1e-300);
    let mut ridge = 0.0;
    for _ in 0..40 {
        let mut m = h.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += ridge;
        }
        if let Some(ch) = m.cholesky() {
            let d = ch.solve(&(-g));
            if d.iter().all(|v| v.is_finite()) {
                return Ok(d);
            }
        }
        ridge = if ridge == 0.0 { 1e-14 * scale } else { ridge * 10.0 };
    }
    Err(Error::NonConvergence("Newton system could not be factorized".into()))
}

/// Solve the program without the testability preflight.
///
/// When the cores intersect the minimizer has `Λ ≡ 1` on a common core point,
/// which is still a valid (if vacuous) answer for downstream power curves.
pub fn solve_program(problem: &LfpProblem) -> Result<LfpSolution> {
    let prog = Program::build(problem)?;
    let l = prog.l;
    let z = prog.null_space();
    let x0 = prog.start();
    let r = z.ncols();

    // Reduced rows: slack_i(y) = g0_i + c_i'y.
    let mut keep = Vec::new();
    let mut g0 = Vec::new();
    let mut crows: Vec<f64> = Vec::new();
    for (i, row) in prog.ineq.iter().enumerate() {
        let mut c = vec![0.0; r];
        for s in row.set.members() {
            let zi = row.side * l + s;
            for (j, cj) in c.iter_mut().enumerate() {
                *cj += z[(zi, j)];
            }
        }
        let slack = prog.row_value(row, &x0) - row.rhs;
        if c.iter().all(|v| v.abs() < 1e-12) {
            if slack < -1e-9 {
                return Err(Error::NonConvergence("starting point violates a fixed constraint".into()));
            }
            continue;
        }
        if slack <= 0.0 {
            return Err(Error::NonConvergence(format!("starting point is not interior on event {}", row.set)));
        }
        keep.push(i);
        g0.push(slack);
        crows.extend(c);
    }
    let m = keep.len();
    let cmat = DMatrix::from_row_slice(m, r, &crows);
    let g0 = DVector::from_vec(g0);

    let point = |y: &DVector<f64>| -> Vec<f64> {
        let mut x = x0.clone();
        if r > 0 {
            let dx = &z * y;
            for (xi, d) in x.iter_mut().zip(dx.iter()) {
                *xi += d;
            }
        }
        for &c in &prog.fixed_zero {
            x[c] = 0.0;
        }
        x
    };
    let merit = |y: &DVector<f64>, slack: &DVector<f64>, mu: f64| -> f64 {
        prog.objective(&point(y)) - mu * slack.iter().map(|v| v.ln()).sum::<f64>()
    };

    let mut y = DVector::zeros(r);
    let mut slack = g0.clone();
    let total_rows = (prog.ineq.len() + prog.eq.len()).max(1) as f64;
    let mut mu = 1.0;
    let mut iterations = 0;
    if r > 0 {
        loop {
            // Newton iterations at fixed μ.
            let mut inner = 0;
            let mut tail = 0;
            loop {
                let x = point(&y);
                let (gf, hf) = prog.derivatives(&x);
                let inv: DVector<f64> = slack.map(|v| 1.0 / v);
                let mut grad = z.transpose() * gf;
                let mut hess = z.transpose() * hf * &z;
                if m > 0 {
                    grad -= mu * cmat.transpose() * &inv;
                    let w = inv.map(|v| v * v * mu);
                    let mut cw = cmat.clone();
                    for (i, mut row) in cw.row_iter_mut().enumerate() {
                        row *= w[i];
                    }
                    hess += cmat.transpose() * cw;
                }
                let d = newton_direction(&hess, &grad)?;
                let dec = -grad.dot(&d);
                iterations += 1;
                inner += 1;
                if iterations > MAX_NEWTON {
                    return Err(Error::NonConvergence(format!("Newton cap reached at μ = {mu:e}")));
                }
                if dec <= 1e-24 || (dec <= 1e-14 && tail >= 4) {
                    break;
                }
                // Inside the quadratic region the merit change is below rounding,
                // so Newton steps are taken without the Armijo test.
                let pure = dec <= 1e-12;
                if pure {
                    tail += 1;
                }
                let cd = &cmat * &d;
                let mut step = 1.0f64;
                for i in 0..m {
                    if cd[i] < 0.0 {
                        step = step.min(-0.99 * slack[i] / cd[i]);
                    }
                }
                let f0 = merit(&y, &slack, mu);
                let mut accepted = false;
                for _ in 0..60 {
                    let yn = &y + step * &d;
                    let sn = &g0 + &cmat * &yn;
                    let xn = point(&yn);
                    let ok_dom = sn.iter().all(|&v| v > 0.0)
                        && (0..l).all(|s| prog.null_zero.contains(s) || xn[s] > 0.0);
                    if ok_dom && (pure || merit(&yn, &sn, mu) <= f0 - ARMIJO_C * step * dec) {
                        y = yn;
                        slack = sn;
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
                if !accepted {
                    // Rounding prevents further decrease; the point is centered to working precision.
                    if dec <= 1e-12 {
                        break;
                    }
                    return Err(Error::NonConvergence(format!("line search failed at μ = {mu:e}")));
                }
                if inner > 200 {
                    return Err(Error::NonConvergence(format!("centering failed at μ = {mu:e}")));
                }
            }
            if 2.0 * total_rows * mu <= GAP_TOL {
                break;
            }
            mu *= MU_FACTOR;
        }
    }

    let mut x = point(&y);
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let (barrier_kkt, _) = kkt_fit(&prog, &z, &x)?;
    if let Some(xp) = POLISH_BANDS.iter().find_map(|&band| polish(&prog, &x, band)) {
        let (kp, _) = kkt_fit(&prog, &z, &xp)?;
        if kp <= barrier_kkt.max(1e-9) && prog.objective(&xp) <= prog.objective(&x) + 1e-12 {
            x = xp;
        }
    }
    let q0 = x[..l].to_vec();
    let q1 = x[l..].to_vec();

    let (kkt_residual, chi) = kkt_fit(&prog, &z, &x)?;
    let (gf, _) = prog.derivatives(&x);
    let mut resid = gf;
    for (i, row) in prog.ineq.iter().enumerate() {
        if chi[i] != 0.0 {
            resid -= chi[i] * prog.row_vector(row);
        }
    }
    let eta = equality_multipliers(&prog, &resid);

    let mut multipliers = [Vec::new(), Vec::new()];
    let mut active = [Vec::new(), Vec::new()];
    for (i, row) in prog.ineq.iter().enumerate() {
        let s = prog.row_value(row, &x) - row.rhs;
        multipliers[row.side].push(EventMultiplier { set: row.set, value: chi[i], slack: s, equality: false });
        if s <= ACTIVE_TOL {
            active[row.side].push(row.set);
        }
    }
    for (i, row) in prog.eq.iter().enumerate() {
        if row.set == SubsetMask(((1u64 << l) - 1) as u32) {
            continue;
        }
        let s = prog.row_value(row, &x) - row.rhs;
        multipliers[row.side].push(EventMultiplier { set: row.set, value: eta[i], slack: s, equality: true });
        active[row.side].push(row.set);
    }
    for side in 0..2 {
        multipliers[side].sort_by_key(|m| m.set);
        active[side].sort();
    }
    let [m0, m1] = multipliers;
    let [a0, a1] = active;
    Ok(LfpSolution {
        lambda: canonical_lambda(&q0, &q1, prog.null_zero),
        objective: prog.objective(&x),
        q0,
        q1,
        multipliers0: m0,
        multipliers1: m1,
        active0: a0,
        active1: a1,
        kkt_residual,
        barrier: mu,
        iterations,
        null_zero: prog.null_zero,
        divergence: prog.divergence,
    })
}

/// Stationarity residual and multipliers of the active inequalities.
///
/// Multipliers are fit by nonnegative least squares on the null space of the
/// equality rows, which stays accurate where `μ/slack` is ill-conditioned.
pub(crate) fn kkt_fit(prog: &Program, z: &DMatrix<f64>, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut chi = vec![0.0; prog.ineq.len()];
    if z.ncols() == 0 {
        return Ok((0.0, chi));
    }
    let (gf, _) = prog.derivatives(x);
    let act: Vec<usize> =
        (0..prog.ineq.len()).filter(|&i| prog.row_value(&prog.ineq[i], x) - prog.ineq[i].rhs <= ACTIVE_TOL).collect();
    if !act.is_empty() {
        let zg = z.transpose() * &gf;
        let cols: Vec<DVector<f64>> = act.iter().map(|&i| z.transpose() * prog.row_vector(&prog.ineq[i])).collect();
        let fit = nnls(&DMatrix::from_columns(&cols), &zg)?;
        for (k, &i) in act.iter().enumerate() {
            chi[i] = fit[k];
        }
    }
    let mut resid = gf;
    for (i, row) in prog.ineq.iter().enumerate() {
        if chi[i] != 0.0 {
            resid -= chi[i] * prog.row_vector(row);
        }
    }
    Ok(((z * (z.transpose() * &resid)).amax(), chi))
}

/// Slack bands tried in turn when deciding which inequalities are nearly active.
const POLISH_BANDS: [f64; 4] = [1e-6, 1e-7, 1e-8, 1e-9];

/// Re-solve with the inequalities of slack at most `band` imposed as equalities.
///
/// Returns `None` when those rows cannot hold together or the projected
/// point leaves the feasible set or the objective domain.
fn polish(prog: &Program, x: &[f64], band: f64) -> Option<Vec<f64>> {
    let n = 2 * prog.l;
    let mut rows: Vec<(DVector<f64>, f64)> = prog.eq.iter().map(|r| (prog.row_vector(r), r.rhs)).collect();
    for r in &prog.ineq {
        if prog.row_value(r, x) - r.rhs <= band {
            rows.push((prog.row_vector(r), r.rhs));
        }
    }
    for &c in &prog.fixed_zero {
        let mut v = DVector::zeros(n);
        v[c] = 1.0;
        rows.push((v, 0.0));
    }
    let mut gram = DMatrix::zeros(n, n);
    let mut mtr = DVector::zeros(n);
    let xv = DVector::from_column_slice(x);
    for (v, rhs) in &rows {
        gram += v * v.transpose();
        mtr += v * (v.dot(&xv) - rhs);
    }
    let eig = SymmetricEigen::new(gram.clone());
    let scale = eig.eigenvalues.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    let mut delta = DVector::zeros(n);
    for i in 0..n {
        let lam = eig.eigenvalues[i];
        if lam.abs() > 1e-9 * scale {
            let v = eig.eigenvectors.column(i);
            delta += v * (v.dot(&mtr) / lam);
        }
    }
    let mut xp: Vec<f64> = (&xv - delta).iter().copied().collect();
    for &c in &prog.fixed_zero {
        xp[c] = 0.0;
    }
    // Rows that cannot hold together give a least-squares compromise that breaks the equalities.
    let xpv = DVector::from_column_slice(&xp);
    if rows.iter().any(|(v, rhs)| (v.dot(&xpv) - rhs).abs() > 1e-12) {
        return None;
    }
    let zp = null_basis(&gram);
    let in_domain = |x: &[f64]| -> bool {
        x.iter().all(|&v| v >= -1e-13)
            && (0..prog.l).all(|s| prog.null_zero.contains(s) || x[s] > 0.0)
            && prog.ineq.iter().all(|r| prog.row_value(r, x) - r.rhs >= -1e-12)
    };
    if !in_domain(&xp) {
        return None;
    }
    let at = |base: &[f64], d: &DVector<f64>, t: f64| -> Vec<f64> {
        let dx = &zp * d;
        base.iter().zip(dx.iter()).map(|(b, v)| b + t * v).collect()
    };
    if zp.ncols() > 0 {
        for _ in 0..60 {
            let (g, h) = prog.derivatives(&xp);
            let gr = zp.transpose() * g;
            let hr = zp.transpose() * h * &zp;
            let d = min_norm_newton(&hr, &gr);
            let dec = -gr.dot(&d);
            if dec <= 1e-26 {
                break;
            }
            let f0 = prog.objective(&xp);
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let cand = at(&xp, &d, t);
                if in_domain(&cand) && (dec <= 1e-12 || prog.objective(&cand) <= f0 - ARMIJO_C * t * dec) {
                    xp = cand;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
    }
    for v in xp.iter_mut() {
        *v = v.max(0.0);
    }
    Some(xp)
}

/// Newton step restricted to the directions of nonnegligible curvature.
///
/// Flat directions of the objective are left untouched, so the step never
/// drifts along a face of minimizers.
fn min_norm_newton(h: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let eig = SymmetricEigen::new(h.clone());
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, b| a.max(*b));
    let mut d = DVector::zeros(g.len());
    for i in 0..g.len() {
        let lam = eig.eigenvalues[i];
        if lam > 1e-10 * top {
            let v = eig.eigenvectors.column(i);
            d -= v * (v.dot(g) / lam);
        }
    }
    d
}

/// Least-squares multipliers of the equality rows for a given stationarity remainder.
fn equality_multipliers(prog: &Program, resid: &DVector<f64>) -> Vec<f64> {
    let k = prog.eq.len();
    let n = 2 * prog.l;
    let mut et = DMatrix::zeros(n, k);
    for (i, row) in prog.eq.iter().enumerate() {
        et.set_column(i, &prog.row_vector(row));
    }
    let svd = et.svd(true, true);
    match svd.solve(resid, 1e-10) {
        Ok(eta) => eta.iter().copied().collect(),
        Err(_) => vec![0.0; k],
    }
}

/// Ratio `q1/q0` with nearby values merged to their cluster mean.
///
/// Outcomes outside the support of every null core distribution get `+∞`,
/// which places them in every rejection region.
pub fn canonical_lambda(q0: &[f64], q1: &[f64], null_zero: SubsetMask) -> Vec<Option<f64>> {
    let mut lambda: Vec<Option<f64>> = q0
        .iter()
        .zip(q1)
        .enumerate()
        .map(|(s, (&a, &b))| {
            if null_zero.contains(s) {
                Some(f64::INFINITY)
            } else if a <= 0.0 {
                if b > 0.0 {
                    Some(f64::INFINITY)
                } else {
                    None
                }
            } else {
                Some(b / a)
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..lambda.len()).filter(|&s| lambda[s].is_some_and(f64::is_finite)).collect();
    order.sort_by(|&i, &j| lambda[i].unwrap().total_cmp(&lambda[j].unwrap()));
    let mut start = 0;
    while start < order.len() {
        let first = lambda[order[start]].unwrap();
        let mut end = start + 1;
        while end < order.len() && lambda[order[end]].unwrap() - first <= LAMBDA_MERGE_TOL * first.abs().max(1e-300) {
            end += 1;
        }
        let mean = order[start..end].iter().map(|&s| lambda[s].unwrap()).sum::<f64>() / (end - start) as f64;
        for &s in &order[start..end] {
            lambda[s] = Some(mean);
        }
        start = end;
    }
    lambda
}

/// Lower and upper capacity tables, exposed for cross-checks.
pub fn capacity_tables(mass: &BeliefMass) -> (CapacityTable, CapacityTable) {
    (mass.lower_table(), mass.upper_table())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{entry_game_model, roy_model};
    use crate::normal::cdf;

    fn entry_problem(t0: [f64; 2], t1: [f64; 2]) -> (LfpProblem, BeliefMass, BeliefMass) {
        let m = entry_game_model();
        let (a, b) = (m.mass_at(&t0).unwrap(), m.mass_at(&t1).unwrap());
        (LfpProblem::new(a.clone(), b.clone()).unwrap(), a, b)
    }

    #[test]
    fn divergence_derivatives_match_finite_differences() {
        for div in [Divergence::NegLog, Divergence::XLogX] {
            for (a, b) in [(0.3, 0.1), (0.05, 0.4), (0.25, 0.25)] {
                let (g, h) = div.derivatives(a, b);
                let e = 1e-6;
                let ga = (div.term(a + e, b) - div.term(a - e, b)) / (2.0 * e);
                let gb = (div.term(a, b + e) - div.term(a, b - e)) / (2.0 * e);
                assert!((g[0] - ga).abs() < 1e-8 && (g[1] - gb).abs() < 1e-8);
                let (gp, _) = div.derivatives(a + e, b);
                let (gm, _) = div.derivatives(a - e, b);
                assert!((h[0][0] - (gp[0] - gm[0]) / (2.0 * e)).abs() < 1e-6);
                assert!((h[1][0] - (gp[1] - gm[1]) / (2.0 * e)).abs() < 1e-6);
                let (gp, _) = div.derivatives(a, b + e);
                let (gm, _) = div.derivatives(a, b - e);
                assert!((h[1][1] - (gp[1] - gm[1]) / (2.0 * e)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn entry_case_one_closed_form() {
        let (p, a, b) = entry_problem([0.0, 0.0], [-1.0, -1.0]);
        let sol = solve_lfp(&p).unwrap();
        let phi = cdf(-1.0);
        let q1 = [0.25, phi * phi, (3.0 - 4.0 * phi * phi) / 8.0, (3.0 - 4.0 * phi * phi) / 8.0];
        for s in 0..4 {
            assert!((sol.q0[s] - 0.25).abs() < 1e-9, "{:?}", sol.q0);
            assert!((sol.q1[s] - q1[s]).abs() < 1e-7, "{:?} vs {:?}", sol.q1, q1);
        }
        assert!((sol.q1[2] - 0.362_414_4).abs() < 5e-7);
        assert!(sol.kkt_residual <= 1e-8, "kkt {}", sol.kkt_residual);
        let rep = verify_lfp(&sol, &a, &b);
        assert!(rep.pass, "{rep:?}");
        assert!(rep.worst_violation <= 1e-10, "{rep:?}");
        assert_eq!(sol.lambda_values().len(), 3);
    }

    #[test]
    fn perturbed_solution_fails_verification() {
        let (p, a, b) = entry_problem([0.0, 0.0], [-1.0, -1.0]);
        let mut sol = solve_lfp(&p).unwrap();
        sol.q1[1] += 0.01;
        let total: f64 = sol.q1.iter().sum();
        sol.q1.iter_mut().for_each(|v| *v /= total);
        assert!(!verify_lfp(&sol, &a, &b).pass);
    }

    #[test]
    fn entry_case_two_closed_form() {
        let t1 = [-0.1, -2.5];
        let (p, a, b) = entry_problem([0.0, 0.0], t1);
        let sol = solve_lfp(&p).unwrap();
        let (f1, f2) = (cdf(t1[0]), cdf(t1[1]));
        assert!(f1 * (1.0 - f2) > 0.25);
        let q10 = 0.25 - f1 * (f2 - 0.5);
        let q01 = 0.5 * (1.0 - f1);
        assert!((sol.q1[2] - q10).abs() < 1e-7, "{:?}", sol.q1);
        assert!((sol.q1[3] - q01).abs() < 1e-7, "{:?}", sol.q1);
        assert!(verify_lfp(&sol, &a, &b).pass);
    }

    #[test]
    fn tiny_multiplicity_keeps_equalities() {
        // Multiplicity mass ~5e-7 leaves both singleton mixed rows nearly active.
        let t1 = [-1e-3, -3e-3];
        let (p, _, b) = entry_problem([0.0, 0.0], t1);
        let sol = solve_lfp(&p).unwrap();
        let (f1, f2) = (cdf(t1[0]), cdf(t1[1]));
        assert!((sol.q1[0] - 0.25).abs() < 1e-12, "{:?}", sol.q1);
        assert!((sol.q1[1] - f1 * f2).abs() < 1e-12, "{:?}", sol.q1);
        assert!((sol.q1[2] - (0.25 - f1 * (f2 - 0.5))).abs() < 1e-12, "{:?}", sol.q1);
        assert!((sol.q1[3] - 0.5 * (1.0 - f1)).abs() < 1e-12, "{:?}", sol.q1);
        assert!(sol.multipliers1.iter().filter(|m| m.equality).all(|m| m.slack.abs() < 1e-12));
        assert!(b.focal().iter().any(|&(k, m)| k.len() == 2 && m < 1e-6));
    }

    #[test]
    fn roy_case_one() {
        let r = roy_model();
        let t0 = [1.0 / 6.0, 0.5, 1.0 / 6.0];
        let d = 0.01;
        let t1 = [1.0 / 6.0, 1.0 / 3.0 - d, 1.0 / 3.0 + d];
        let (a, b) = (r.mass_at(&t0).unwrap(), r.mass_at(&t1).unwrap());
        let sol = solve_lfp(&LfpProblem::new(a.clone(), b.clone()).unwrap()).unwrap();
        let e0 = [1.0 / 12.0, 1.0 / 12.0, 1.0 / 3.0, 0.5];
        let e1 = [1.0 / 12.0, 1.0 / 12.0, 1.0 / 3.0 + d, 0.5 - d];
        for s in 0..4 {
            assert!((sol.q0[s] - e0[s]).abs() < 1e-7, "{:?}", sol.q0);
            assert!((sol.q1[s] - e1[s]).abs() < 1e-7, "{:?}", sol.q1);
        }
        assert!(verify_lfp(&sol, &a, &b).pass);
    }

    #[test]
    fn complete_models_give_classical_ratio() {
        let space = OutcomeSpace::new(["a", "b", "c"]).unwrap();
        let a = BeliefMass::from_pmf(space.clone(), &[0.2, 0.3, 0.5]).unwrap();
        let b = BeliefMass::from_pmf(space, &[0.5, 0.3, 0.2]).unwrap();
        let sol = solve_lfp(&LfpProblem::new(a.clone(), b.clone()).unwrap()).unwrap();
        assert_eq!(sol.q0, vec![0.2, 0.3, 0.5]);
        assert!((sol.lambda[0].unwrap() - 2.5).abs() < 1e-12);
        assert!((sol.lambda[1].unwrap() - 1.0).abs() < 1e-12);
        assert!(verify_lfp(&sol, &a, &b).pass);
    }

    #[test]
    fn intersecting_cores_are_rejected() {
        let (p, _, _) = entry_problem([-1.0, -1.0], [-1.0, -1.0]);
        assert_eq!(solve_lfp(&p).unwrap_err(), Error::NotRobustlyTestable);
    }

    #[test]
    fn zero_null_support_gives_infinite_ratio() {
        let space = OutcomeSpace::new(["a", "b", "c"]).unwrap();
        let a = BeliefMass::new(space.clone(), [(SubsetMask(0b011), 1.0)]).unwrap();
        let b = BeliefMass::new(space, [(SubsetMask(0b110), 0.5), (SubsetMask(0b100), 0.3), (SubsetMask(0b001), 0.2)])
            .unwrap();
        let sol = solve_lfp(&LfpProblem::new(a.clone(), b.clone()).unwrap()).unwrap();
        assert_eq!(sol.lambda[2], Some(f64::INFINITY));
        assert!((sol.q1[2] - 0.3).abs() < 1e-9);
        assert!(verify_lfp(&sol, &a, &b).pass, "{:?}", verify_lfp(&sol, &a, &b));
    }

    #[test]
    fn objective_choice_keeps_level_sets() {
        let (p, a, b) = entry_problem([0.0, 0.0], [-1.0, -0.4]);
        let s1 = solve_lfp(&p).unwrap();
        let s2 = solve_lfp(&p.clone().with_divergence(Divergence::XLogX)).unwrap();
        assert!(verify_lfp(&s2, &a, &b).pass);
        let order = |s: &LfpSolution| -> Vec<SubsetMask> { s.lambda_values().iter().map(|&t| s.level_set(t)).collect() };
        assert_eq!(order(&s1), order(&s2));
    }
}
