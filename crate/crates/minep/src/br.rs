//! Per-player best responses: continuous (convex QP), mixed-integer
//! (branch and bound on the integer coordinates), inexact mixed-integer
//! with a rigorous distance certificate, and the rounded relaxation.

use std::collections::BinaryHeap;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::game::{JointPoint, QuadGame};
use crate::linalg;
use crate::qp;

pub const DEFAULT_NODE_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum BrStatus {
    Optimal,
    /// Returned point is within Euclidean distance `delta <= epsilon`
    /// of an exact best response.
    Inexact {
        delta: f64,
    },
}

#[derive(Debug, Clone)]
pub struct BrResult {
    pub point: DVector<f64>,
    pub value: f64,
    pub status: BrStatus,
    /// Branch-and-bound relaxations solved (1 for a continuous solve).
    pub nodes: usize,
}

/// Best response of player `nu` over the continuous relaxation `X_nu`.
pub fn continuous_br(game: &QuadGame, nu: usize, x: &JointPoint) -> Result<BrResult> {
    let lin = game.own_linear_term(nu, x)?;
    let prob = qp::QpProblem {
        q: game.q_blocks[nu][nu].clone(),
        c: lin,
        eq: game.lin_eq[nu].clone(),
        ineq: game.player_inequalities(nu),
    };
    let sol = qp::solve(&prob, qp::DEFAULT_TOL).map_err(|_| Error::Infeasible(nu))?;
    Ok(BrResult {
        point: sol.x,
        value: sol.objective + game.offsets[nu],
        status: BrStatus::Optimal,
        nodes: 1,
    })
}

/// Continuous best response with integer coordinates rounded to the
/// nearest lattice point, ties towards the ceiling.
pub fn rounded_br(game: &QuadGame, nu: usize, x: &JointPoint) -> Result<BrResult> {
    let mut res = continuous_br(game, nu, x)?;
    for j in 0..game.int_counts[nu] {
        res.point[j] = round_half_up(res.point[j]);
    }
    res.value = player_value(game, nu, x, &res.point)?;
    res.status = BrStatus::Inexact {
        delta: f64::INFINITY,
    };
    Ok(res)
}

fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

/// Exact mixed-integer best response over `Omega_nu`.
pub fn mixed_br(game: &QuadGame, nu: usize, x: &JointPoint, budget: usize) -> Result<BrResult> {
    inexact_br(game, nu, x, 0.0, budget)
}

/// Cost of player `nu` playing `v` against the opponents in `x`.
fn player_value(game: &QuadGame, nu: usize, x: &JointPoint, v: &DVector<f64>) -> Result<f64> {
    let mut y = x.clone();
    y.blocks[nu] = v.clone();
    game.cost(nu, &y)
}

const INT_TOL: f64 = 1e-7;

struct Node {
    lower: Vec<f64>,
    upper: Vec<f64>,
    relax: DVector<f64>,
    bound: f64,
    seq: usize,
}

// Best-first: smallest bound first, oldest node on ties (keeps the
// floor-child-first, lowest-index branching order deterministic).
impl Ord for Node {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.seq.cmp(&self.seq))
    }
}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl Eq for Node {}

/// Inexact mixed-integer best response by best-first branch and bound.
///
/// Terminates early once the incumbent is provably within Euclidean
/// distance `epsilon` of every exact best response: for each open node
/// with lower bound `L` below the incumbent value `f`, strong convexity
/// of the own block (constant `sigma`) gives the distance bound
/// `||x_hat - r|| + sqrt(2 max(0, f - L) / sigma)` with `r` the node
/// relaxation point. With `epsilon = 0` this is the exact solver.
pub fn inexact_br(
    game: &QuadGame,
    nu: usize,
    x: &JointPoint,
    epsilon: f64,
    budget: usize,
) -> Result<BrResult> {
    if epsilon < 0.0 {
        return Err(Error::Parameter("epsilon must be nonnegative".into()));
    }
    let i_nu = game.int_counts[nu];
    if i_nu == 0 {
        return continuous_br(game, nu, x);
    }
    let sigma = linalg::lambda_min_sym(&game.q_blocks[nu][nu]);
    if sigma <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            player: nu,
            lambda_min: sigma,
        });
    }
    let lin = game.own_linear_term(nu, x)?;

    let root_lower: Vec<f64> = (0..i_nu).map(|j| game.boxes[nu].lower[j].ceil()).collect();
    let root_upper: Vec<f64> = (0..i_nu).map(|j| game.boxes[nu].upper[j].floor()).collect();

    let mut nodes_solved = 0usize;
    let mut seq = 0usize;
    let mut open: BinaryHeap<Node> = BinaryHeap::new();
    let mut incumbent: Option<(DVector<f64>, f64)> = None;

    let push = |open: &mut BinaryHeap<Node>,
                lower: Vec<f64>,
                upper: Vec<f64>,
                nodes_solved: &mut usize,
                seq: &mut usize|
     -> Result<()> {
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Ok(());
        }
        if *nodes_solved >= budget {
            return Err(Error::NodeBudget(budget));
        }
        *nodes_solved += 1;
        // An infeasible sub-box is simply fathomed.
        if let Ok(sol) = solve_restricted(game, nu, &lin, &lower, &upper) {
            open.push(Node {
                lower,
                upper,
                relax: sol.x,
                bound: sol.objective,
                seq: *seq,
            });
            *seq += 1;
        }
        Ok(())
    };

    push(
        &mut open,
        root_lower,
        root_upper,
        &mut nodes_solved,
        &mut seq,
    )?;
    if open.is_empty() {
        return Err(Error::Infeasible(nu));
    }

    loop {
        // Early-stop check against the whole frontier.
        if let Some((x_hat, f_hat)) = &incumbent {
            let mut all_covered = true;
            let mut delta: f64 = 0.0;
            for node in open.iter() {
                if node.bound >= *f_hat - 1e-12 {
                    continue; // prunable
                }
                let d = (x_hat - &node.relax).norm()
                    + (2.0 * (f_hat - node.bound).max(0.0) / sigma).sqrt();
                if d <= epsilon {
                    delta = delta.max(d);
                } else {
                    all_covered = false;
                    break;
                }
            }
            if all_covered {
                let status = if delta > 0.0 {
                    BrStatus::Inexact { delta }
                } else {
                    BrStatus::Optimal
                };
                return Ok(BrResult {
                    point: x_hat.clone(),
                    value: *f_hat + game.offsets[nu],
                    status,
                    nodes: nodes_solved,
                });
            }
        }

        let node = match open.pop() {
            Some(n) => n,
            None => break,
        };
        if let Some((_, f_hat)) = &incumbent {
            if node.bound >= *f_hat - 1e-12 {
                continue;
            }
        }

        // Branching coordinate: largest fractional part, lowest index on ties.
        let mut branch: Option<(usize, f64)> = None;
        for j in 0..i_nu {
            let frac = (node.relax[j] - node.relax[j].round()).abs();
            if frac > INT_TOL && branch.is_none_or(|(_, bf)| frac > bf) {
                branch = Some((j, frac));
            }
        }

        match branch {
            None => {
                // Integral relaxation: fix the integers exactly and
                // resolve the continuous part for an exact incumbent.
                let z: Vec<f64> = (0..i_nu).map(|j| node.relax[j].round()).collect();
                if nodes_solved >= budget {
                    return Err(Error::NodeBudget(budget));
                }
                nodes_solved += 1;
                if let Ok(sol) = solve_restricted(game, nu, &lin, &z, &z) {
                    let better = incumbent.as_ref().is_none_or(|(_, f)| sol.objective < *f);
                    if better {
                        incumbent = Some((sol.x, sol.objective));
                    }
                }
            }
            Some((j, _)) => {
                let split = node.relax[j];
                let mut up = node.upper.clone();
                up[j] = split.floor();
                push(
                    &mut open,
                    node.lower.clone(),
                    up,
                    &mut nodes_solved,
                    &mut seq,
                )?;
                let mut lo = node.lower.clone();
                lo[j] = split.floor() + 1.0;
                push(
                    &mut open,
                    lo,
                    node.upper.clone(),
                    &mut nodes_solved,
                    &mut seq,
                )?;
            }
        }
    }

    match incumbent {
        Some((point, value)) => Ok(BrResult {
            point,
            value: value + game.offsets[nu],
            status: BrStatus::Optimal,
            nodes: nodes_solved,
        }),
        None => Err(Error::Infeasible(nu)),
    }
}

/// Node relaxation: player `nu`'s QP with integer coordinates confined
/// to `[lower, upper]`.
fn solve_restricted(
    game: &QuadGame,
    nu: usize,
    lin: &DVector<f64>,
    lower: &[f64],
    upper: &[f64],
) -> Result<qp::QpSolution> {
    let mut boxes = game.boxes[nu].clone();
    for j in 0..lower.len() {
        boxes.lower[j] = boxes.lower[j].max(lower[j]);
        boxes.upper[j] = boxes.upper[j].min(upper[j]);
    }
    let mut restricted = game.clone();
    restricted.boxes[nu] = boxes;
    let prob = qp::QpProblem {
        q: game.q_blocks[nu][nu].clone(),
        c: lin.clone(),
        eq: game.lin_eq[nu].clone(),
        ineq: restricted.player_inequalities(nu),
    };
    qp::solve(&prob, qp::DEFAULT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;

    #[test]
    fn continuous_br_on_example_1() {
        let g = fixtures::example_1(0.1);
        let x = JointPoint::from_scalars(&[1.0, 1.0]);
        let r0 = continuous_br(&g, 0, &x).unwrap();
        assert_relative_eq!(r0.point[0], -0.55, epsilon = 1e-10);
        let r1 = continuous_br(&g, 1, &x).unwrap();
        assert_relative_eq!(r1.point[0], 0.55, epsilon = 1e-10);
    }

    #[test]
    fn continuous_br_clips_to_box() {
        // Example 2 with a large target: unconstrained argmin eta = 8 > 5.
        let g = fixtures::example_2(8.0, 0.0, 0.0, 0.0);
        let x = JointPoint::from_scalars(&[0.0, 0.0]);
        let r = continuous_br(&g, 0, &x).unwrap();
        assert_relative_eq!(r.point[0], 5.0, epsilon = 1e-10);
    }

    #[test]
    fn mixed_br_on_example_1() {
        let g = fixtures::example_1(0.1);
        let x = JointPoint::from_scalars(&[1.0, 1.0]);
        // Vertex at -0.55; f(-1) = -0.1 beats f(0) = 0 and f(-2) = 1.8.
        let r = mixed_br(&g, 0, &x, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.point[0], -1.0);
        assert_eq!(r.status, BrStatus::Optimal);
        assert_relative_eq!(r.value, -0.1, epsilon = 1e-10);
    }

    #[test]
    fn mixed_br_on_example_6_corner() {
        // Continuous solution (1/2, 1/2); nearest feasible lattice point
        // under x2 >= 3 x1 - 1 is (1, 2) with value 5.
        let g = fixtures::example_6(3.0);
        let x = JointPoint::new(vec![DVector::zeros(2)]);
        let c = continuous_br(&g, 0, &x).unwrap();
        assert_relative_eq!(c.point[0], 0.5, epsilon = 1e-9);
        assert_relative_eq!(c.point[1], 0.5, epsilon = 1e-9);
        let m = mixed_br(&g, 0, &x, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!((m.point[0], m.point[1]), (1.0, 2.0));
        assert_relative_eq!(m.value, 5.0, epsilon = 1e-9);
    }

    #[test]
    fn mixed_br_gap_grows_with_upsilon() {
        let x = JointPoint::new(vec![DVector::zeros(2)]);
        let mut last_gap = 0.0;
        for upsilon in [2.0, 4.0, 8.0] {
            let g = fixtures::example_6(upsilon);
            let c = continuous_br(&g, 0, &x).unwrap();
            let m = mixed_br(&g, 0, &x, DEFAULT_NODE_BUDGET).unwrap();
            let gap = (m.point - c.point).norm();
            assert!(gap > last_gap);
            last_gap = gap;
        }
    }

    #[test]
    fn inexact_br_certifies_distance() {
        let g = fixtures::example_6(3.0);
        let x = JointPoint::new(vec![DVector::zeros(2)]);
        let exact = mixed_br(&g, 0, &x, DEFAULT_NODE_BUDGET).unwrap();
        for eps in [0.5, 2.0, 10.0] {
            let r = inexact_br(&g, 0, &x, eps, DEFAULT_NODE_BUDGET).unwrap();
            let dist = (&r.point - &exact.point).norm();
            match r.status {
                BrStatus::Optimal => assert_eq!(dist, 0.0),
                BrStatus::Inexact { delta } => {
                    assert!(delta <= eps);
                    assert!(dist <= delta + 1e-9);
                }
            }
            // Never spends more work than the exact solve.
            assert!(r.nodes <= exact.nodes);
        }
    }

    #[test]
    fn inexact_br_with_zero_epsilon_is_exact() {
        let g = fixtures::example_1(0.1);
        for s in [-2.0, -0.3, 0.4, 1.7] {
            let x = JointPoint::from_scalars(&[0.0, s]);
            let e = mixed_br(&g, 0, &x, DEFAULT_NODE_BUDGET).unwrap();
            let r = inexact_br(&g, 0, &x, 0.0, DEFAULT_NODE_BUDGET).unwrap();
            assert_eq!(e.point, r.point);
            assert_eq!(r.status, BrStatus::Optimal);
        }
    }

    #[test]
    fn node_budget_is_enforced() {
        let g = fixtures::example_6(3.0);
        let x = JointPoint::new(vec![DVector::zeros(2)]);
        assert!(matches!(mixed_br(&g, 0, &x, 1), Err(Error::NodeBudget(1))));
    }

    #[test]
    fn infeasible_player_is_reported() {
        let mut g = fixtures::example_1(0.1);
        g.boxes[0].lower[0] = 3.0;
        g.boxes[0].upper[0] = 2.0;
        let x = JointPoint::from_scalars(&[0.0, 0.0]);
        assert!(matches!(
            continuous_br(&g, 0, &x),
            Err(Error::Infeasible(0))
        ));
        assert!(matches!(
            mixed_br(&g, 0, &x, DEFAULT_NODE_BUDGET),
            Err(Error::Infeasible(0))
        ));
    }

    #[test]
    fn rounding_breaks_ties_towards_ceiling() {
        assert_eq!(round_half_up(0.5), 1.0);
        assert_eq!(round_half_up(-0.5), 0.0);
        assert_eq!(round_half_up(1.2), 1.0);
        assert_eq!(round_half_up(-1.5), -1.0);
    }

    #[test]
    fn rounded_br_on_example_2() {
        let g = fixtures::example_2(0.3, 0.3, 0.1, 0.1);
        let x = JointPoint::from_scalars(&[0.0, 0.0]);
        let r = rounded_br(&g, 0, &x).unwrap();
        // Continuous argmin 0.3 rounds to 0.
        assert_eq!(r.point[0], 0.0);
    }

    #[test]
    fn deterministic_across_runs() {
        let g = fixtures::example_6(7.0);
        let x = JointPoint::new(vec![DVector::zeros(2)]);
        let a = mixed_br(&g, 0, &x, DEFAULT_NODE_BUDGET).unwrap();
        let b = mixed_br(&g, 0, &x, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(a.point, b.point);
        assert_eq!(a.nodes, b.nodes);
    }
}
