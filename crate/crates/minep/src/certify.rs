//! Structural certificates for the block-contraction and discrete-gap
//! assumptions, strong monotonicity, the diagonal-dominance perturbations
//! and the existence/uniqueness condition.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{JointPoint, QuadGame, WeightVector};
use crate::linalg;

/// Condensed N x N matrix: own-block curvature lower bounds on the
/// diagonal, cross-block spectral norms off it. For quadratic games the
/// sup/inf over the strategy set collapse to constants of the blocks.
#[derive(Debug, Clone, Serialize)]
pub struct CondensedMatrix {
    pub entries: Vec<Vec<f64>>,
}

impl CondensedMatrix {
    pub fn n(&self) -> usize {
        self.entries.len()
    }

    /// Own-block curvature lower bound `sigma_nu`.
    pub fn sigma(&self, nu: usize) -> f64 {
        self.entries[nu][nu]
    }

    /// Cross-block coupling norm `sigma_bar_{nu nu'}`.
    pub fn sigma_bar(&self, nu: usize, nv: usize) -> f64 {
        self.entries[nu][nv]
    }

    pub fn offdiag_row_sum(&self, nu: usize) -> f64 {
        self.entries[nu]
            .iter()
            .enumerate()
            .filter(|&(nv, _)| nv != nu)
            .map(|(_, v)| v)
            .sum()
    }
}

/// Outcome of checking strict row diagonal dominance with weights `w`.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionCertificate {
    pub w: WeightVector,
    pub alpha: f64,
    pub dominant: bool,
}

/// Constant bounding the distance between mixed-integer and continuous
/// best responses by `beta * sqrt(i_nu)`.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteGapCertificate {
    pub beta: f64,
    pub basis: BetaBasis,
    /// Uniform Lipschitz constant, recorded for the general basis.
    pub lipschitz: Option<f64>,
    /// Uniform strong-convexity constant, recorded for the general basis.
    pub strong_convexity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaBasis {
    General,
    Separable,
    QuadraticSeparable,
    UserSupplied,
}

/// Result of the existence/uniqueness test around the relaxed solution.
#[derive(Debug, Clone, Serialize)]
pub struct ExistenceCertificate {
    pub certified: bool,
    /// Integer sub-vector per player, present when certified.
    pub fixed_integers: Option<Vec<Vec<i64>>>,
    pub radius_used: f64,
    pub candidates_found: Vec<usize>,
}

/// Computes the condensed matrix of a quadratic game:
/// diagonal `lambda_min(Q[nu][nu])`, off-diagonal `||Q[nu][nu']||_2`.
pub fn condensed_matrix(game: &QuadGame) -> Result<CondensedMatrix> {
    let n = game.n_players();
    let mut entries = vec![vec![0.0; n]; n];
    for (nu, row) in entries.iter_mut().enumerate() {
        for (nv, entry) in row.iter_mut().enumerate() {
            if nu == nv {
                let lambda_min = linalg::lambda_min_sym(&game.q_blocks[nu][nu]);
                if lambda_min <= 0.0 {
                    return Err(Error::NotPositiveDefinite {
                        player: nu,
                        lambda_min,
                    });
                }
                *entry = lambda_min;
            } else {
                *entry = linalg::spectral_norm(&game.q_blocks[nu][nv]);
            }
        }
    }
    Ok(CondensedMatrix { entries })
}

/// Checks strict row diagonal dominance with weights `w^{-1}` and, when
/// it holds, returns the contraction modulus
/// `alpha = max_nu (sum_{nu'!=nu} w_{nu'}^{-1} sigma_bar) / (w_nu^{-1} sigma_nu)`.
pub fn contraction_certificate(
    upsilon: &CondensedMatrix,
    w: &WeightVector,
) -> Result<ContractionCertificate> {
    if w.len() != upsilon.n() || !w.is_strictly_positive() {
        return Err(Error::Parameter(
            "weights must be strictly positive, one per player".into(),
        ));
    }
    let n = upsilon.n();
    let mut alpha: f64 = 0.0;
    for nu in 0..n {
        let off: f64 = (0..n)
            .filter(|&nv| nv != nu)
            .map(|nv| upsilon.sigma_bar(nu, nv) / w.0[nv])
            .sum();
        let own = upsilon.sigma(nu) / w.0[nu];
        alpha = alpha.max(off / own);
    }
    Ok(ContractionCertificate {
        w: w.clone(),
        alpha,
        dominant: alpha < 1.0,
    })
}

/// Outcome of searching for dominating weights.
#[derive(Debug, Clone, Serialize)]
pub enum WeightSearch {
    Found(ContractionCertificate),
    /// No weights exist: the comparison matrix `D^{-1}(Upsilon - D)` has
    /// spectral radius at least one.
    NoWeights {
        spectral_radius: f64,
    },
}

/// Searches for weights making the condensed matrix strictly row
/// diagonally dominant. Weighted dominance with `v = w^{-1} > 0` means
/// `(D - B) v > 0`, which has a positive solution exactly when the
/// spectral radius of `M = D^{-1} B` is below one; `v = (I - M)^{-1} 1`
/// is then strictly positive and dominating.
pub fn find_dominating_weights(upsilon: &CondensedMatrix) -> WeightSearch {
    let n = upsilon.n();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            upsilon.sigma_bar(i, j) / upsilon.sigma(i)
        }
    });
    let rho = linalg::spectral_radius(&m);
    if rho >= 1.0 {
        return WeightSearch::NoWeights {
            spectral_radius: rho,
        };
    }
    let lhs = DMatrix::identity(n, n) - &m;
    let v = lhs
        .lu()
        .solve(&DVector::from_element(n, 1.0))
        .expect("I - M nonsingular when rho < 1");
    let w = WeightVector(v.iter().map(|&vi| 1.0 / vi).collect());
    let cert = contraction_certificate(upsilon, &w).expect("positive weights");
    debug_assert!(cert.dominant);
    WeightSearch::Found(cert)
}

/// Strong-monotonicity constant of the game mapping: the smallest
/// eigenvalue of the symmetrized stacked Jacobian. May be nonpositive.
pub fn strong_monotonicity(game: &QuadGame) -> f64 {
    linalg::lambda_min_sym(&game.stacked_jacobian())
}

fn perturbation_inputs(game: &QuadGame, alpha_bar: f64) -> Result<(CondensedMatrix, f64)> {
    if !(0.0 < alpha_bar && alpha_bar < 1.0) {
        return Err(Error::Parameter("alpha_bar must lie in (0, 1)".into()));
    }
    let mu = strong_monotonicity(game);
    if mu <= 0.0 {
        return Err(Error::NotStronglyMonotone(mu));
    }
    Ok((condensed_matrix(game)?, mu))
}

/// Adds a proximal term `(eta_nu/2) ||x^nu - x_bar^nu||^2` per player,
/// with `eta_nu = max{sum_{nu'!=nu} sigma_bar / alpha_bar - mu, 0}`.
/// The result is diagonally dominant with modulus at most `alpha_bar`.
pub fn perturb_proximal(game: &QuadGame, alpha_bar: f64, x_bar: &JointPoint) -> Result<QuadGame> {
    let (upsilon, mu) = perturbation_inputs(game, alpha_bar)?;
    let mut out = game.clone();
    for nu in 0..game.n_players() {
        let eta = (upsilon.offdiag_row_sum(nu) / alpha_bar - mu).max(0.0);
        if eta > 0.0 {
            let n = game.dims[nu];
            out.q_blocks[nu][nu] += DMatrix::<f64>::identity(n, n) * eta;
            out.c[nu] -= &x_bar.blocks[nu] * eta;
        }
    }
    Ok(out)
}

/// Scales each own block by `1 + rho_nu` with
/// `rho_nu = max{sum_{nu'!=nu} sigma_bar / (alpha_bar mu) - 1, 0}`.
/// For quadratic games the Hessian is constant, so `x_bar` is unused.
pub fn perturb_curvature(game: &QuadGame, alpha_bar: f64, _x_bar: &JointPoint) -> Result<QuadGame> {
    let (upsilon, mu) = perturbation_inputs(game, alpha_bar)?;
    let mut out = game.clone();
    for nu in 0..game.n_players() {
        let rho = (upsilon.offdiag_row_sum(nu) / (alpha_bar * mu) - 1.0).max(0.0);
        if rho > 0.0 {
            out.q_blocks[nu][nu] *= 1.0 + rho;
        }
    }
    Ok(out)
}

fn has_integer_variables(game: &QuadGame) -> bool {
    game.int_counts.iter().any(|&i| i > 0)
}

/// Integer coordinates of player `nu` must appear in box constraints only.
fn check_box_only_integers(game: &QuadGame, nu: usize) -> Result<()> {
    let i_nu = game.int_counts[nu];
    for sys in [&game.lin_ineq[nu], &game.lin_eq[nu]] {
        for r in 0..sys.a.nrows() {
            for j in 0..i_nu {
                if sys.a[(r, j)] != 0.0 {
                    return Err(Error::Structure(format!(
                        "player {nu}: linear constraint row {r} touches integer coordinate {j}"
                    )));
                }
            }
        }
    }
    Ok(())
}

fn check_integer_bounds(game: &QuadGame, nu: usize) -> Result<()> {
    let bx = &game.boxes[nu];
    for j in 0..game.int_counts[nu] {
        let (l, u) = (bx.lower[j], bx.upper[j]);
        if !l.is_finite() || !u.is_finite() || l.fract() != 0.0 || u.fract() != 0.0 {
            return Err(Error::Structure(format!(
                "player {nu}: integer coordinate {j} needs finite integer bounds (got [{l}, {u}])"
            )));
        }
    }
    Ok(())
}

/// Cost must be separable in every integer coordinate: no own-block
/// coupling between an integer coordinate and any other coordinate.
fn check_separable_cost(game: &QuadGame, nu: usize) -> Result<()> {
    let own = &game.q_blocks[nu][nu];
    for j in 0..game.int_counts[nu] {
        for k in 0..game.dims[nu] {
            if k != j && (own[(j, k)] != 0.0 || own[(k, j)] != 0.0) {
                return Err(Error::Structure(format!(
                    "player {nu}: own block couples integer coordinate {j} with coordinate {k}"
                )));
            }
        }
    }
    Ok(())
}

/// Requested basis for the discrete-gap constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaRequest {
    General,
    Separable,
    QuadraticSeparable,
    UserSupplied(f64),
}

/// Verifies the structural preconditions of the requested basis and
/// returns the discrete-gap constant.
pub fn beta_certificate(game: &QuadGame, basis: BetaRequest) -> Result<DiscreteGapCertificate> {
    if !has_integer_variables(game) {
        return Err(Error::Structure(
            "game has no integer variables; the discrete-gap bound is vacuous".into(),
        ));
    }
    match basis {
        BetaRequest::UserSupplied(beta) => {
            if beta <= 0.0 {
                return Err(Error::Parameter("beta must be positive".into()));
            }
            Ok(DiscreteGapCertificate {
                beta,
                basis: BetaBasis::UserSupplied,
                lipschitz: None,
                strong_convexity: None,
            })
        }
        BetaRequest::General => {
            let mut lipschitz = f64::NEG_INFINITY;
            let mut strong = f64::INFINITY;
            for nu in 0..game.n_players() {
                check_box_only_integers(game, nu)?;
                check_integer_bounds(game, nu)?;
                lipschitz = lipschitz.max(linalg::lambda_max_sym(&game.q_blocks[nu][nu]));
                strong = strong.min(linalg::lambda_min_sym(&game.q_blocks[nu][nu]));
            }
            if strong <= 0.0 {
                return Err(Error::Structure(
                    "own blocks are not uniformly strongly convex".into(),
                ));
            }
            Ok(DiscreteGapCertificate {
                beta: 0.5 * (lipschitz / strong).sqrt(),
                basis: BetaBasis::General,
                lipschitz: Some(lipschitz),
                strong_convexity: Some(strong),
            })
        }
        BetaRequest::Separable => {
            for nu in 0..game.n_players() {
                check_box_only_integers(game, nu)?;
                check_separable_cost(game, nu)?;
            }
            Ok(DiscreteGapCertificate {
                beta: 1.0,
                basis: BetaBasis::Separable,
                lipschitz: None,
                strong_convexity: None,
            })
        }
        BetaRequest::QuadraticSeparable => {
            for nu in 0..game.n_players() {
                check_box_only_integers(game, nu)?;
                check_separable_cost(game, nu)?;
                check_integer_bounds(game, nu)?;
                for j in 0..game.int_counts[nu] {
                    if game.q_blocks[nu][nu][(j, j)] <= 0.0 {
                        return Err(Error::Structure(format!(
                            "player {nu}: integer coordinate {j} has nonpositive curvature"
                        )));
                    }
                }
            }
            Ok(DiscreteGapCertificate {
                beta: 0.5,
                basis: BetaBasis::QuadraticSeparable,
                lipschitz: None,
                strong_convexity: None,
            })
        }
    }
}

/// Tries the tightest basis first: quadratic-separable, then separable,
/// then general.
pub fn beta_auto(game: &QuadGame) -> Result<DiscreteGapCertificate> {
    beta_certificate(game, BetaRequest::QuadraticSeparable)
        .or_else(|_| beta_certificate(game, BetaRequest::Separable))
        .or_else(|_| beta_certificate(game, BetaRequest::General))
}

/// Maximum distance, in the weighted block norm, between the relaxed
/// solution and any equilibrium: `beta/(1-alpha) * max_nu w_nu sqrt(i_nu)`.
pub fn existence_radius(game: &QuadGame, alpha: f64, beta: f64, w: &WeightVector) -> f64 {
    let max_wi = game
        .int_counts
        .iter()
        .zip(&w.0)
        .map(|(&i, &wv)| wv * (i as f64).sqrt())
        .fold(0.0, f64::max);
    beta / (1.0 - alpha) * max_wi
}

/// Checks the existence condition: inside the ball of the limit radius
/// around the relaxed solution, each player's integer sub-vector must be
/// unique among feasible lattice points. `budget` caps the per-player
/// candidate count.
pub fn existence_certificate(
    game: &QuadGame,
    x_bar: &JointPoint,
    alpha: f64,
    beta: f64,
    w: &WeightVector,
    budget: usize,
) -> Result<ExistenceCertificate> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Parameter("alpha must lie in [0, 1)".into()));
    }
    if !has_integer_variables(game) {
        return Err(Error::Structure("no integer variables to certify".into()));
    }
    let radius = existence_radius(game, alpha, beta, w);
    let mut candidates_found = Vec::with_capacity(game.n_players());
    let mut fixed = Vec::with_capacity(game.n_players());
    let mut certified = true;
    for nu in 0..game.n_players() {
        let i_nu = game.int_counts[nu];
        if i_nu == 0 {
            candidates_found.push(0);
            fixed.push(Vec::new());
            continue;
        }
        let r_nu = radius / w.0[nu];
        let cands = integer_candidates(game, nu, x_bar, r_nu, budget)?;
        if cands.len() != 1 {
            certified = false;
        }
        candidates_found.push(cands.len());
        fixed.push(cands.into_iter().next().unwrap_or_default());
    }
    Ok(ExistenceCertificate {
        certified,
        fixed_integers: if certified { Some(fixed) } else { None },
        radius_used: radius,
        candidates_found,
    })
}

/// Lattice points of player `nu`'s integer box within Euclidean distance
/// `radius` of the relaxed solution's integer sub-vector that admit a
/// feasible continuous completion.
fn integer_candidates(
    game: &QuadGame,
    nu: usize,
    x_bar: &JointPoint,
    radius: f64,
    budget: usize,
) -> Result<Vec<Vec<i64>>> {
    let i_nu = game.int_counts[nu];
    let bx = &game.boxes[nu];
    let centre = &x_bar.blocks[nu];
    // Per-coordinate interval intersection first.
    let mut ranges = Vec::with_capacity(i_nu);
    let mut product = 1usize;
    for j in 0..i_nu {
        let lo = bx.lower[j].max((centre[j] - radius).ceil()) as i64;
        let hi = bx.upper[j].min((centre[j] + radius).floor()) as i64;
        if lo > hi {
            return Ok(Vec::new());
        }
        product = product.saturating_mul((hi - lo + 1) as usize);
        if product > budget {
            return Err(Error::BudgetExceeded(format!(
                "player {nu}: more than {budget} integer candidates in the existence ball"
            )));
        }
        ranges.push((lo, hi));
    }
    let mut out = Vec::new();
    let mut z = ranges.iter().map(|&(lo, _)| lo).collect::<Vec<i64>>();
    loop {
        let dist2: f64 = z
            .iter()
            .enumerate()
            .map(|(j, &zj)| {
                let d = zj as f64 - centre[j];
                d * d
            })
            .sum();
        if dist2 <= radius * radius && completion_feasible(game, nu, &z) {
            out.push(z.clone());
        }
        // Odometer increment over the per-coordinate ranges.
        let mut j = 0;
        loop {
            if j == z.len() {
                return Ok(out);
            }
            if z[j] < ranges[j].1 {
                z[j] += 1;
                break;
            }
            z[j] = ranges[j].0;
            j += 1;
        }
    }
}

/// Whether fixing player `nu`'s integer coordinates to `z` leaves `X_nu`
/// nonempty.
fn completion_feasible(game: &QuadGame, nu: usize, z: &[i64]) -> bool {
    let mut restricted = game.clone();
    for (j, &zj) in z.iter().enumerate() {
        restricted.boxes[nu].lower[j] = zj as f64;
        restricted.boxes[nu].upper[j] = zj as f64;
    }
    restricted.feasible_point(nu).is_some()
}
