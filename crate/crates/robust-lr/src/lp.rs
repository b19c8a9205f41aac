//! Dense tableau simplex method with Bland's anti-cycling rule.
//!
//! Solves `minimize c'x subject to rows (<=, >=, =) b, x >= 0` by the
//! two-phase method. Dual values are recovered from the columns that formed
//! the initial identity basis.

use crate::error::{Error, Result};

/// Sense of a linear constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `a'x <= b`
    Le,
    /// `a'x >= b`
    Ge,
    /// `a'x = b`
    Eq,
}

/// A linear program in inequality form over nonnegative variables.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    /// Objective coefficients, minimized.
    pub objective: Vec<f64>,
    /// Constraint rows as (coefficients, sense, right-hand side).
    pub rows: Vec<(Vec<f64>, Sense, f64)>,
}

/// Optimal primal point, value and row duals of a linear program.
#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Optimal primal point.
    pub x: Vec<f64>,
    /// Optimal objective value.
    pub value: f64,
    /// Dual value of each row: the derivative of the optimal value with
    /// respect to that row's right-hand side.
    pub duals: Vec<f64>,
}

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;

impl LinearProgram {
    /// Empty program over `n` variables.
    pub fn new(objective: Vec<f64>) -> Self {
        Self { objective, rows: Vec::new() }
    }

    /// Append a constraint row.
    pub fn push(&mut self, coefs: Vec<f64>, sense: Sense, rhs: f64) {
        self.rows.push((coefs, sense, rhs));
    }

    /// Solve by two-phase simplex with Bland's rule.
    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self)?.run(self)
    }
}

struct Tableau {
    m: usize,
    n: usize,
    width: usize,
    // Row-major (m + 1) x (width + 1); last column is the right-hand side,
    // last row is the objective (reduced costs).
    t: Vec<f64>,
    basis: Vec<usize>,
    // Column holding the initial identity entry for each row, and the sign
    // applied to the row during normalization.
    unit_col: Vec<usize>,
    flip: Vec<f64>,
    art_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Result<Self> {
        let n = lp.objective.len();
        let m = lp.rows.len();
        for (coefs, _, rhs) in &lp.rows {
            if coefs.len() != n || !rhs.is_finite() || coefs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput("malformed LP row".into()));
            }
        }
        let mut senses = Vec::with_capacity(m);
        let mut flip = Vec::with_capacity(m);
        for (_, sense, rhs) in &lp.rows {
            if *rhs < 0.0 {
                flip.push(-1.0);
                senses.push(match sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                });
            } else {
                flip.push(1.0);
                senses.push(*sense);
            }
        }
        let n_slack = senses.iter().filter(|s| **s != Sense::Eq).count();
        let n_art = senses.iter().filter(|s| **s != Sense::Le).count();
        let art_start = n + n_slack;
        let width = n + n_slack + n_art;
        let stride = width + 1;
        let mut t = vec![0.0; (m + 1) * stride];
        let mut basis = vec![0; m];
        let mut unit_col = vec![0; m];
        let mut slack = n;
        let mut art = art_start;
        for (i, (coefs, _, rhs)) in lp.rows.iter().enumerate() {
            let row = &mut t[i * stride..(i + 1) * stride];
            for (j, c) in coefs.iter().enumerate() {
                row[j] = flip[i] * c;
            }
            row[width] = flip[i] * rhs;
            match senses[i] {
                Sense::Le => {
                    row[slack] = 1.0;
                    basis[i] = slack;
                    unit_col[i] = slack;
                    slack += 1;
                }
                Sense::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis[i] = art;
                    unit_col[i] = art;
                    art += 1;
                }
                Sense::Eq => {
                    row[art] = 1.0;
                    basis[i] = art;
                    unit_col[i] = art;
                    art += 1;
                }
            }
        }
        Ok(Self { m, n, width, t, basis, unit_col, flip, art_start })
    }

    fn stride(&self) -> usize {
        self.width + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.stride() + j]
    }

    fn set_objective(&mut self, cost: &[f64]) {
        // Reduced costs c_j - c_B' B^{-1} A_j for the current basis.
        let s = self.stride();
        let obj = self.m * s;
        for j in 0..=self.width {
            self.t[obj + j] = if j < self.width { cost[j] } else { 0.0 };
        }
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..=self.width {
                    self.t[obj + j] -= cb * self.t[i * s + j];
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let s = self.stride();
        let p = self.t[r * s + c];
        for j in 0..s {
            self.t[r * s + j] /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * s);
        let (prow, after) = rest.split_at_mut(s);
        let elim = |row: &mut [f64]| {
            let f = row[c];
            if f != 0.0 {
                for j in 0..s {
                    row[j] -= f * prow[j];
                }
                row[c] = 0.0;
            }
        };
        for row in before.chunks_mut(s) {
            elim(row);
        }
        for row in after.chunks_mut(s) {
            elim(row);
        }
        self.basis[r] = c;
    }

    /// Iterate Bland's rule over columns `0..allowed`. Returns false on unboundedness.
    fn iterate(&mut self, allowed: usize) -> Result<bool> {
        let cap = 50_000 + 50 * (self.m + self.width);
        let s = self.stride();
        for _ in 0..cap {
            let obj = self.m * s;
            let entering = (0..allowed).find(|&j| self.t[obj + j] < -COST_TOL);
            let Some(c) = entering else { return Ok(true) };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a > PIVOT_TOL {
                    let ratio = self.at(i, self.width) / a;
                    match best {
                        None => best = Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                            if ratio < br - 1e-12 * (1.0 + br.abs())
                                || (tie && self.basis[i] < self.basis[bi])
                            {
                                best = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((r, _)) = best else { return Ok(false) };
            self.pivot(r, c);
        }
        Err(Error::LpNumericalFailure("simplex iteration cap reached".into()))
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution> {
        let n_art = self.width - self.art_start;
        if n_art > 0 {
            let mut cost = vec![0.0; self.width];
            for c in cost.iter_mut().skip(self.art_start) {
                *c = 1.0;
            }
            self.set_objective(&cost);
            self.iterate(self.width)?;
            let infeas = -self.at(self.m, self.width);
            let scale = 1.0 + lp.rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
            if infeas > 1e-9 * scale {
                return Err(Error::LpInfeasible);
            }
            // Drive artificial variables out of the basis where possible.
            for i in 0..self.m {
                if self.basis[i] >= self.art_start {
                    if let Some(c) = (0..self.art_start).find(|&j| self.at(i, j).abs() > 1e-9) {
                        self.pivot(i, c);
                    }
                }
            }
        }
        let mut cost = vec![0.0; self.width];
        cost[..self.n].copy_from_slice(&lp.objective);
        self.set_objective(&cost);
        // Artificial columns may not re-enter; rows whose artificial stays
        // basic are redundant and keep it at zero.
        if !self.iterate(self.art_start)? {
            return Err(Error::LpUnbounded);
        }
        let mut x = vec![0.0; self.n];
        for i in 0..self.m {
            if self.basis[i] < self.n {
                x[self.basis[i]] = self.at(i, self.width);
            }
        }
        let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        // y' = c_B' B^{-1}; column i of B^{-1} sits in the initial unit column.
        let mut duals = vec![0.0; self.m];
        for (k, d) in duals.iter_mut().enumerate() {
            let col = self.unit_col[k];
            let mut y = 0.0;
            for i in 0..self.m {
                y += cost[self.basis[i]] * self.at(i, col);
            }
            *d = y * self.flip[k];
        }
        Ok(LpSolution { x, value, duals })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
        let mut lp = LinearProgram::new(vec![-3.0, -5.0]);
        lp.push(vec![1.0, 0.0], Sense::Le, 4.0);
        lp.push(vec![0.0, 2.0], Sense::Le, 12.0);
        lp.push(vec![3.0, 2.0], Sense::Le, 18.0);
        let s = lp.solve().unwrap();
        assert!((s.value + 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        // Shadow prices of the max problem are (0, 3/2, 1); duals here refer to the min form.
        assert!((s.duals[0]).abs() < 1e-12);
        assert!((s.duals[1] + 1.5).abs() < 1e-12);
        assert!((s.duals[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y s.t. x + y = 1, y >= 0.25 -> (0.75, 0.25), 1.25.
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.push(vec![1.0, 1.0], Sense::Eq, 1.0);
        lp.push(vec![0.0, 1.0], Sense::Ge, 0.25);
        let s = lp.solve().unwrap();
        assert!((s.value - 1.25).abs() < 1e-12);
        assert!((s.duals[0] - 1.0).abs() < 1e-12);
        assert!((s.duals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.push(vec![1.0], Sense::Le, 1.0);
        lp.push(vec![1.0], Sense::Ge, 2.0);
        assert_eq!(lp.solve().unwrap_err(), Error::LpInfeasible);
        let mut lp = LinearProgram::new(vec![-1.0]);
        lp.push(vec![1.0], Sense::Ge, 0.0);
        assert_eq!(lp.solve().unwrap_err(), Error::LpUnbounded);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // min x s.t. -x <= -3 -> x = 3, dual 1.
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.push(vec![-1.0], Sense::Le, -3.0);
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 3.0).abs() < 1e-12);
        assert!((s.duals[0] + 1.0).abs() < 1e-12);
    }
}
