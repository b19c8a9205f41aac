//! Dense convex quadratic programs by a primal active-set method.
//!
//! Solves `minimize ½ x'Qx + q'x subject to E x = e, A x >= b` for positive
//! definite `Q`. Equalities are eliminated through a null-space basis and the
//! start is a feasible point from the simplex oracle.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Sense};

/// Feasibility and step tolerance.
pub const QP_TOL: f64 = 1e-11;

/// A dense quadratic program.
#[derive(Debug, Clone)]
pub struct QuadraticProgram {
    /// Positive definite Hessian.
    pub q: DMatrix<f64>,
    /// Linear term.
    pub c: DVector<f64>,
    /// Equality rows `(a, rhs)` meaning `a'x = rhs`.
    pub eq: Vec<(DVector<f64>, f64)>,
    /// Inequality rows `(a, rhs)` meaning `a'x >= rhs`.
    pub ineq: Vec<(DVector<f64>, f64)>,
}

/// Orthonormal kernel basis and a particular solution of `E x = e`.
fn eliminate(n: usize, eq: &[(DVector<f64>, f64)]) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let mut gram = DMatrix::zeros(n, n);
    let mut etr = DVector::zeros(n);
    for (a, r) in eq {
        gram += a * a.transpose();
        etr += a * *r;
    }
    let eig = SymmetricEigen::new(gram);
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut x = DVector::zeros(n);
    let mut null = Vec::new();
    for i in 0..n {
        let v = eig.eigenvectors.column(i);
        let lam = eig.eigenvalues[i];
        if lam.abs() > 1e-10 * scale {
            x += v * (v.dot(&etr) / lam);
        } else {
            null.push(v.into_owned());
        }
    }
    for (a, r) in eq {
        if (a.dot(&x) - r).abs() > 1e-8 * (1.0 + r.abs()) {
            return Err(Error::LpInfeasible);
        }
    }
    let z = if null.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&null) };
    Ok((x, z))
}

impl QuadraticProgram {
    /// Solve; errors with `LpInfeasible` when no feasible point exists.
    pub fn solve(&self) -> Result<DVector<f64>> {
        let n = self.c.len();
        let (x0, z) = eliminate(n, &self.eq)?;
        let r = z.ncols();
        // Reduced inequalities: g_i' v >= h_i.
        let g: Vec<DVector<f64>> = self.ineq.iter().map(|(a, _)| z.transpose() * a).collect();
        let h: Vec<f64> = self.ineq.iter().map(|(a, b)| b - a.dot(&x0)).collect();
        for (gi, hi) in g.iter().zip(&h) {
            if gi.amax() < 1e-12 && *hi > 1e-9 {
                return Err(Error::LpInfeasible);
            }
        }
        if r == 0 {
            return Ok(x0);
        }
        let qr = z.transpose() * &self.q * &z;
        let cr = z.transpose() * (&self.c + &self.q * &x0);

        // Feasible start from the simplex oracle with free variables split in two.
        let mut v = DVector::zeros(r);
        if !g.is_empty() {
            let mut lp = LinearProgram::new(vec![0.0; 2 * r]);
            for (gi, hi) in g.iter().zip(&h) {
                let mut row: Vec<f64> = gi.iter().copied().collect();
                row.extend(gi.iter().map(|x| -x));
                lp.push(row, Sense::Ge, *hi);
            }
            let sol = lp.solve()?;
            for j in 0..r {
                v[j] = sol.x[j] - sol.x[r + j];
            }
        }

        let mut working: Vec<usize> = Vec::new();
        for _ in 0..(50 * (g.len() + r + 1)) {
            // Equality-constrained step on the working set.
            let k = working.len();
            let dim = r + k;
            let mut kkt = DMatrix::zeros(dim, dim);
            kkt.view_mut((0, 0), (r, r)).copy_from(&qr);
            for (j, &i) in working.iter().enumerate() {
                for t in 0..r {
                    kkt[(r + j, t)] = g[i][t];
                    kkt[(t, r + j)] = g[i][t];
                }
            }
            let grad = &qr * &v + &cr;
            let mut rhs = DVector::zeros(dim);
            for t in 0..r {
                rhs[t] = -grad[t];
            }
            let sol = kkt
                .clone()
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::LpNumericalFailure("singular working-set system".into()))?;
            let p = sol.rows(0, r).into_owned();
            if p.amax() <= QP_TOL * (1.0 + v.amax()) {
                // Multipliers of the working rows: Q v + c = Σ λ g.
                let lambda: Vec<f64> = (0..k).map(|j| -sol[r + j]).collect();
                match lambda.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) {
                    Some((j, &l)) if l < -1e-12 => {
                        working.remove(j);
                    }
                    _ => return Ok(&x0 + &z * v),
                }
                continue;
            }
            let mut step = 1.0;
            let mut block = None;
            for (i, (gi, hi)) in g.iter().zip(&h).enumerate() {
                if working.contains(&i) {
                    continue;
                }
                let gp = gi.dot(&p);
                if gp < -1e-14 {
                    let t = (hi - gi.dot(&v)) / gp;
                    if t < step {
                        step = t.max(0.0);
                        block = Some(i);
                    }
                }
            }
            v += step * &p;
            if let Some(i) = block {
                working.push(i);
            }
        }
        Err(Error::NonConvergence("quadratic program iteration cap".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn unconstrained_minimum() {
        let qp = QuadraticProgram {
            q: DMatrix::identity(2, 2) * 2.0,
            c: dv(&[-2.0, -4.0]),
            eq: vec![],
            ineq: vec![],
        };
        let x = qp.solve().unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn textbook_active_set_example() {
        // min (x1-1)² + (x2-2.5)² s.t. x1 - 2x2 + 2 >= 0, -x1 - 2x2 + 6 >= 0, -x1 + 2x2 + 2 >= 0, x >= 0.
        let qp = QuadraticProgram {
            q: DMatrix::identity(2, 2) * 2.0,
            c: dv(&[-2.0, -5.0]),
            eq: vec![],
            ineq: vec![
                (dv(&[1.0, -2.0]), -2.0),
                (dv(&[-1.0, -2.0]), -6.0),
                (dv(&[-1.0, 2.0]), -2.0),
                (dv(&[1.0, 0.0]), 0.0),
                (dv(&[0.0, 1.0]), 0.0),
            ],
        };
        let x = qp.solve().unwrap();
        assert!((x[0] - 1.4).abs() < 1e-10 && (x[1] - 1.7).abs() < 1e-10, "{x}");
    }

    #[test]
    fn equality_and_infeasibility() {
        let qp = QuadraticProgram {
            q: DMatrix::identity(3, 3),
            c: dv(&[0.0, 0.0, 0.0]),
            eq: vec![(dv(&[1.0, 1.0, 1.0]), 3.0)],
            ineq: vec![(dv(&[1.0, 0.0, 0.0]), 2.0)],
        };
        let x = qp.solve().unwrap();
        assert!((x[0] - 2.0).abs() < 1e-10 && (x[1] - 0.5).abs() < 1e-10 && (x[2] - 0.5).abs() < 1e-10);
        let bad = QuadraticProgram {
            q: DMatrix::identity(1, 1),
            c: dv(&[0.0]),
            eq: vec![],
            ineq: vec![(dv(&[1.0]), 1.0), (dv(&[-1.0]), 0.0)],
        };
        assert!(bad.solve().is_err());
    }
}
