//! Dense convex quadratic programming by a dual active-set method.
//!
//! Solves `min 1/2 x' Q x + c' x` subject to `E x = d` and `A x <= b`
//! for symmetric positive definite `Q`, in the style of Goldfarb and
//! Idnani: start from the unconstrained minimizer and add violated
//! constraints one at a time, dropping blocking active inequalities
//! whose multipliers would turn negative. No feasible starting point
//! is required and primal infeasibility is detected.
//!
//! Each step solves the KKT system from scratch with a dense LU
//! factorization; problem sizes here are a few dozen variables.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::LinearSystem;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct QpProblem {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub eq: LinearSystem,
    pub ineq: LinearSystem,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
}

struct ActiveConstraint {
    normal: DVector<f64>,
    multiplier: f64,
    is_eq: bool,
    /// Index into the inequality system, for deactivation bookkeeping.
    ineq_idx: Option<usize>,
}

pub fn solve(prob: &QpProblem, tol: f64) -> Result<QpSolution> {
    let n = prob.q.nrows();
    debug_assert_eq!(prob.q.ncols(), n);
    debug_assert_eq!(prob.c.len(), n);

    let chol = prob
        .q
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Structure("QP matrix is not positive definite".into()))?;
    let mut x = chol.solve(&(-&prob.c));

    let mut active: Vec<ActiveConstraint> = Vec::new();
    let mut iterations = 0usize;
    let max_iterations = 50 * (n + prob.eq.a.nrows() + prob.ineq.a.nrows() + 1);

    // Equalities first, then the most violated inequality until feasible.
    let mut eq_cursor = 0usize;
    loop {
        iterations += 1;
        if iterations > max_iterations {
            return Err(Error::Structure(
                "active-set QP did not terminate (cycling or ill-conditioning)".into(),
            ));
        }

        let (mut normal, rhs, is_eq, ineq_idx) = if eq_cursor < prob.eq.a.nrows() {
            let i = eq_cursor;
            eq_cursor += 1;
            (prob.eq.a.row(i).transpose(), prob.eq.b[i], true, None)
        } else {
            match most_violated(&prob.ineq, &x, &active, tol) {
                Some((i, _)) => (
                    prob.ineq.a.row(i).transpose(),
                    prob.ineq.b[i],
                    false,
                    Some(i),
                ),
                None => break,
            }
        };

        let mut violation = normal.dot(&x) - rhs;
        if is_eq && violation < 0.0 {
            normal = -normal;
            violation = -violation;
        }
        let scale = 1.0 + normal.norm();

        // Drive the violation of this constraint to zero, dropping
        // blocking active inequalities along the way.
        loop {
            let (z, r) = step_directions(&prob.q, &active, &normal);
            let z_zero = z.norm() <= 1e-12 * scale;

            let t_full = if z_zero {
                f64::INFINITY
            } else {
                violation / normal.dot(&z)
            };

            let mut t_block = f64::INFINITY;
            let mut blocker = None;
            for (i, con) in active.iter().enumerate() {
                if con.is_eq {
                    continue;
                }
                if r[i] > 1e-12 {
                    let t = con.multiplier / r[i];
                    if t < t_block {
                        t_block = t;
                        blocker = Some(i);
                    }
                }
            }

            let t = t_full.min(t_block);
            if !t.is_finite() {
                if violation <= tol * scale {
                    // Dependent but already satisfied: redundant, skip.
                    break;
                }
                return Err(Error::Structure("QP is infeasible".into()));
            }

            if !z_zero {
                x -= &z * t;
                violation -= t * normal.dot(&z);
            }
            for (i, con) in active.iter_mut().enumerate() {
                con.multiplier -= t * r[i];
            }

            if t_full <= t_block {
                active.push(ActiveConstraint {
                    normal: normal.clone(),
                    multiplier: t,
                    is_eq,
                    ineq_idx,
                });
                break;
            }
            active.remove(blocker.expect("blocking step without a blocker"));
        }
    }

    let objective = 0.5 * x.dot(&(&prob.q * &x)) + prob.c.dot(&x);
    Ok(QpSolution {
        x,
        objective,
        iterations,
    })
}

fn most_violated(
    ineq: &LinearSystem,
    x: &DVector<f64>,
    active: &[ActiveConstraint],
    tol: f64,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..ineq.a.nrows() {
        if active.iter().any(|c| c.ineq_idx == Some(i)) {
            continue;
        }
        let row = ineq.a.row(i).transpose();
        let v = row.dot(x) - ineq.b[i];
        let threshold = tol * (1.0 + ineq.b[i].abs() + row.norm());
        if v > threshold && best.is_none_or(|(_, bv)| v > bv) {
            best = Some((i, v));
        }
    }
    best
}

/// Solves `[Q N'; N 0] [z; r] = [a; 0]` for the primal direction `z`
/// and the dual direction `r` on the active constraints.
fn step_directions(
    q: &DMatrix<f64>,
    active: &[ActiveConstraint],
    a: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let n = q.nrows();
    let k = active.len();
    if k == 0 {
        let z = q.clone().cholesky().expect("Q positive definite").solve(a);
        return (z, DVector::zeros(0));
    }
    let mut kkt = DMatrix::zeros(n + k, n + k);
    kkt.view_mut((0, 0), (n, n)).copy_from(q);
    for (i, con) in active.iter().enumerate() {
        kkt.view_mut((0, n + i), (n, 1)).copy_from(&con.normal);
        kkt.view_mut((n + i, 0), (1, n))
            .copy_from(&con.normal.transpose());
    }
    let mut rhs = DVector::zeros(n + k);
    rhs.rows_mut(0, n).copy_from(a);
    let sol = kkt
        .lu()
        .solve(&rhs)
        .expect("KKT system singular despite full-rank active set");
    (sol.rows(0, n).into_owned(), sol.rows(n, k).into_owned())
}
