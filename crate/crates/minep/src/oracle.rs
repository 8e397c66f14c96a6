//! Independent equilibrium checks: a per-player improvement test and an
//! exhaustive enumeration over joint integer assignments. Deliberately
//! avoids the iteration machinery so results can cross-check it.

use crate::br;
use crate::error::{Error, Result};
use crate::game::{JointPoint, QuadGame};
use crate::iterate::{self, IterateOptions, Schedule, StopReason};

pub const DEFAULT_ORACLE_BUDGET: usize = 1_000_000;

/// Per-player outcome of the equilibrium check.
#[derive(Debug, Clone)]
pub struct EquilibriumCheck {
    pub is_equilibrium: bool,
    /// `theta_nu(x) - min_v theta_nu(v, x^{-nu})` per player; at an
    /// equilibrium every entry is zero up to tolerance.
    pub improvement_gaps: Vec<f64>,
    pub feasible: bool,
}

/// Verifies `x` by solving every player's exact mixed best response and
/// comparing cost values.
pub fn verify_equilibrium(game: &QuadGame, x: &JointPoint, tol: f64) -> Result<EquilibriumCheck> {
    let n = game.n_players();
    let mut gaps = Vec::with_capacity(n);
    let mut feasible = true;
    for nu in 0..n {
        if !game.point_in_mixed_set(nu, &x.blocks[nu], tol) {
            feasible = false;
        }
        let best = br::mixed_br(game, nu, x, br::DEFAULT_NODE_BUDGET)?;
        gaps.push(game.cost(nu, x)? - best.value);
    }
    let is_equilibrium = feasible && gaps.iter().all(|&g| g <= tol);
    Ok(EquilibriumCheck {
        is_equilibrium,
        improvement_gaps: gaps,
        feasible,
    })
}

/// All equilibria found by exhausting joint integer assignments.
#[derive(Debug, Clone)]
pub struct EquilibriumSet {
    pub points: Vec<JointPoint>,
    pub assignments_checked: usize,
}

impl EquilibriumSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Enumerates every joint integer assignment within the boxes; for each,
/// fixes the integers, solves the induced continuous game by
/// best-response iteration and keeps the points that pass
/// [`verify_equilibrium`] on the original game. For all-integer games no
/// iteration is involved and the enumeration is exhaustive and exact.
///
/// `budget` caps the number of joint assignments.
pub fn enumerate_equilibria(game: &QuadGame, tol: f64, budget: usize) -> Result<EquilibriumSet> {
    let n = game.n_players();
    // Integer ranges per player, flattened into one odometer.
    let mut ranges: Vec<(usize, usize, i64, i64)> = Vec::new(); // (player, coord, lo, hi)
    let mut total = 1usize;
    for nu in 0..n {
        for j in 0..game.int_counts[nu] {
            let lo = game.boxes[nu].lower[j];
            let hi = game.boxes[nu].upper[j];
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Structure(format!(
                    "player {nu}: integer coordinate {j} unbounded, cannot enumerate"
                )));
            }
            let (lo, hi) = (lo.ceil() as i64, hi.floor() as i64);
            if lo > hi {
                return Ok(EquilibriumSet {
                    points: Vec::new(),
                    assignments_checked: 0,
                });
            }
            total = total.saturating_mul((hi - lo + 1) as usize);
            if total > budget {
                return Err(Error::BudgetExceeded(format!(
                    "more than {budget} joint integer assignments"
                )));
            }
            ranges.push((nu, j, lo, hi));
        }
    }
    if ranges.is_empty() {
        return Err(Error::Structure(
            "game has no integer variables to enumerate".into(),
        ));
    }
    let all_integer = (0..n).all(|nu| game.int_counts[nu] == game.dims[nu]);

    let mut points = Vec::new();
    let mut checked = 0usize;
    let mut z: Vec<i64> = ranges.iter().map(|&(_, _, lo, _)| lo).collect();
    loop {
        checked += 1;
        if let Some(candidate) = candidate_for_assignment(game, &ranges, &z, all_integer)? {
            if verify_equilibrium(game, &candidate, tol)?.is_equilibrium {
                points.push(candidate);
            }
        }
        let mut k = 0;
        loop {
            if k == z.len() {
                return Ok(EquilibriumSet {
                    points,
                    assignments_checked: checked,
                });
            }
            if z[k] < ranges[k].3 {
                z[k] += 1;
                break;
            }
            z[k] = ranges[k].2;
            k += 1;
        }
    }
}

/// Point induced by fixing the integer coordinates to `z`: either the
/// assignment itself (all-integer games, if feasible) or the limit of
/// the continuous iteration on the restricted game.
fn candidate_for_assignment(
    game: &QuadGame,
    ranges: &[(usize, usize, i64, i64)],
    z: &[i64],
    all_integer: bool,
) -> Result<Option<JointPoint>> {
    let mut restricted = game.clone();
    for (&(nu, j, _, _), &zj) in ranges.iter().zip(z) {
        restricted.boxes[nu].lower[j] = zj as f64;
        restricted.boxes[nu].upper[j] = zj as f64;
    }
    if all_integer {
        let mut pt = JointPoint::zeros(game);
        for (&(nu, j, _, _), &zj) in ranges.iter().zip(z) {
            pt.blocks[nu][j] = zj as f64;
        }
        let feasible = (0..game.n_players()).all(|nu| game.point_in_set(nu, &pt.blocks[nu], 1e-9));
        return Ok(if feasible { Some(pt) } else { None });
    }
    // Feasible start on the restriction, if any.
    let mut blocks = Vec::with_capacity(game.n_players());
    for nu in 0..game.n_players() {
        match restricted.feasible_point(nu) {
            Some(p) => blocks.push(p),
            None => return Ok(None),
        }
    }
    let start = JointPoint::new(blocks);
    let opts = IterateOptions {
        max_rounds: 200,
        ..Default::default()
    };
    let trace = iterate::run_continuous(&restricted, &Schedule::GaussSeidelCyclic, &start, &opts)?;
    if trace.stop != StopReason::Converged {
        return Ok(None);
    }
    Ok(Some(trace.last().clone()))
}
