//! Quadratic mixed-integer Nash game data model.
//!
//! A game couples `N` players. Player `nu` controls `x^nu` in `R^{n_nu}`,
//! whose first `i_nu` coordinates are integer-constrained, and pays
//!
//! ```text
//! theta_nu(x) = 1/2 (x^nu)' Q[nu][nu] x^nu
//!             + sum_{nu' != nu} (x^nu)' Q[nu][nu'] x^{nu'}
//!             + c[nu]' x^nu
//! ```
//!
//! over the polyhedron `X_nu = {l <= x <= u, A x <= b, E x = d}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::qp;

/// Per-player box bounds; entries may be `f64::INFINITY` / `NEG_INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl BoxBounds {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Self {
        Self { lower, upper }
    }

    /// Unbounded box of dimension `n`.
    pub fn free(n: usize) -> Self {
        Self {
            lower: DVector::from_element(n, f64::NEG_INFINITY),
            upper: DVector::from_element(n, f64::INFINITY),
        }
    }

    pub fn interval(n: usize, lo: f64, hi: f64) -> Self {
        Self {
            lower: DVector::from_element(n, lo),
            upper: DVector::from_element(n, hi),
        }
    }
}

/// Dense linear system rows, interpreted as `A x <= b` or `E x = d`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl LinearSystem {
    pub fn empty(n: usize) -> Self {
        Self {
            a: DMatrix::zeros(0, n),
            b: DVector::zeros(0),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.a.nrows() == 0
    }
}

/// An N-player quadratic mixed-integer Nash equilibrium problem.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadGame {
    pub dims: Vec<usize>,
    pub int_counts: Vec<usize>,
    /// `q_blocks[nu][nu']` is the `n_nu x n_nu'` coupling block.
    pub q_blocks: Vec<Vec<DMatrix<f64>>>,
    pub c: Vec<DVector<f64>>,
    pub boxes: Vec<BoxBounds>,
    pub lin_ineq: Vec<LinearSystem>,
    pub lin_eq: Vec<LinearSystem>,
    /// Constant cost offsets; irrelevant to gradients and equilibria but
    /// kept so fixture costs match their closed forms.
    pub offsets: Vec<f64>,
}

/// Joint strategy profile, one block per player.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPoint {
    pub blocks: Vec<DVector<f64>>,
}

impl JointPoint {
    pub fn new(blocks: Vec<DVector<f64>>) -> Self {
        Self { blocks }
    }

    pub fn zeros(game: &QuadGame) -> Self {
        Self {
            blocks: game.dims.iter().map(|&n| DVector::zeros(n)).collect(),
        }
    }

    /// Convenience for games with scalar blocks.
    pub fn from_scalars(vals: &[f64]) -> Self {
        Self {
            blocks: vals.iter().map(|&v| DVector::from_element(1, v)).collect(),
        }
    }

    pub fn n_players(&self) -> usize {
        self.blocks.len()
    }

    pub fn matches(&self, game: &QuadGame) -> bool {
        self.blocks.len() == game.n_players()
            && self
                .blocks
                .iter()
                .zip(&game.dims)
                .all(|(b, &n)| b.len() == n)
    }

    /// Euclidean norm of the stacked vector.
    pub fn flat_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, other: &JointPoint) -> JointPoint {
        JointPoint {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Positive per-player weights for the block norm.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn unit(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&w| w > 0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Weighted block norm `max_nu w_nu ||x^nu||_2`.
pub fn block_norm(w: &WeightVector, x: &JointPoint) -> f64 {
    w.0.iter()
        .zip(&x.blocks)
        .map(|(wv, b)| wv * b.norm())
        .fold(0.0, f64::max)
}

/// One violated invariant reported by [`QuadGame::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// `|Q[nu][nu] - Q[nu][nu]'|` exceeds tolerance.
    Asymmetric { player: usize, residual: f64 },
    /// Own block is not positive definite.
    NotPositiveDefinite { player: usize, lambda_min: f64 },
    /// Player strategy set is empty.
    InfeasiblePlayerSet { player: usize },
    /// Integer coordinate has a non-finite box bound.
    UnboundedIntegerCoordinate { player: usize, coord: usize },
    /// Lower bound exceeds upper bound on some coordinate.
    EmptyBox { player: usize, coord: usize },
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagnostic::Asymmetric { player, residual } => {
                write!(
                    f,
                    "player {player}: Q block asymmetric (residual {residual:.3e})"
                )
            }
            Diagnostic::NotPositiveDefinite { player, lambda_min } => {
                write!(
                    f,
                    "player {player}: not positive definite (lambda_min {lambda_min:.3e})"
                )
            }
            Diagnostic::InfeasiblePlayerSet { player } => {
                write!(f, "player {player}: infeasible player set")
            }
            Diagnostic::UnboundedIntegerCoordinate { player, coord } => {
                write!(
                    f,
                    "player {player}: integer coordinate {coord} has non-finite bounds"
                )
            }
            Diagnostic::EmptyBox { player, coord } => {
                write!(
                    f,
                    "player {player}: empty box at coordinate {coord} (l > u)"
                )
            }
        }
    }
}

const SYMMETRY_TOL: f64 = 1e-9;

impl QuadGame {
    /// Builds a game, rejecting structurally inconsistent data.
    ///
    /// Numeric invariants (symmetry, positive definiteness, feasibility)
    /// are checked by [`QuadGame::validate`], not here.
    pub fn new(
        dims: Vec<usize>,
        int_counts: Vec<usize>,
        q_blocks: Vec<Vec<DMatrix<f64>>>,
        c: Vec<DVector<f64>>,
        boxes: Vec<BoxBounds>,
        lin_ineq: Vec<LinearSystem>,
        lin_eq: Vec<LinearSystem>,
    ) -> Result<Self> {
        let n = dims.len();
        if n == 0 {
            return Err(Error::Dimension(
                "game must have at least one player".into(),
            ));
        }
        let same_len = int_counts.len() == n
            && q_blocks.len() == n
            && c.len() == n
            && boxes.len() == n
            && lin_ineq.len() == n
            && lin_eq.len() == n;
        if !same_len {
            return Err(Error::Dimension(
                "per-player field lengths do not match the number of players".into(),
            ));
        }
        for (nu, &d) in dims.iter().enumerate() {
            if d == 0 {
                return Err(Error::Dimension(format!("player {nu} has dimension 0")));
            }
            if int_counts[nu] > d {
                return Err(Error::Dimension(format!(
                    "player {nu}: int_count {} exceeds dimension {d}",
                    int_counts[nu]
                )));
            }
            if q_blocks[nu].len() != n {
                return Err(Error::Dimension(format!(
                    "q_blocks[{nu}] has {} blocks, expected {n}",
                    q_blocks[nu].len()
                )));
            }
            for (nv, blk) in q_blocks[nu].iter().enumerate() {
                if blk.nrows() != d || blk.ncols() != dims[nv] {
                    return Err(Error::Dimension(format!(
                        "q_blocks[{nu}][{nv}] is {}x{}, expected {d}x{}",
                        blk.nrows(),
                        blk.ncols(),
                        dims[nv]
                    )));
                }
            }
            if c[nu].len() != d
                || boxes[nu].lower.len() != d
                || boxes[nu].upper.len() != d
                || lin_ineq[nu].a.ncols() != d
                || lin_eq[nu].a.ncols() != d
                || lin_ineq[nu].a.nrows() != lin_ineq[nu].b.len()
                || lin_eq[nu].a.nrows() != lin_eq[nu].b.len()
            {
                return Err(Error::Dimension(format!(
                    "player {nu}: vector or constraint shape inconsistent with dimension {d}"
                )));
            }
        }
        let offsets = vec![0.0; n];
        Ok(Self {
            dims,
            int_counts,
            q_blocks,
            c,
            boxes,
            lin_ineq,
            lin_eq,
            offsets,
        })
    }

    /// Sets per-player constant cost offsets.
    pub fn with_offsets(mut self, offsets: Vec<f64>) -> Self {
        assert_eq!(offsets.len(), self.n_players());
        self.offsets = offsets;
        self
    }

    /// A game with box constraints only.
    pub fn boxed(
        dims: Vec<usize>,
        int_counts: Vec<usize>,
        q_blocks: Vec<Vec<DMatrix<f64>>>,
        c: Vec<DVector<f64>>,
        boxes: Vec<BoxBounds>,
    ) -> Result<Self> {
        let ineq = dims.iter().map(|&n| LinearSystem::empty(n)).collect();
        let eq = dims.iter().map(|&n| LinearSystem::empty(n)).collect();
        Self::new(dims, int_counts, q_blocks, c, boxes, ineq, eq)
    }

    pub fn n_players(&self) -> usize {
        self.dims.len()
    }

    fn check_player(&self, nu: usize) -> Result<()> {
        if nu < self.n_players() {
            Ok(())
        } else {
            Err(Error::PlayerIndex(nu, self.n_players()))
        }
    }

    fn check_point(&self, x: &JointPoint) -> Result<()> {
        if x.matches(self) {
            Ok(())
        } else {
            Err(Error::Dimension(
                "joint point does not match game dimensions".into(),
            ))
        }
    }

    /// Reports every violated invariant; empty iff the game is well-formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for nu in 0..self.n_players() {
            let own = &self.q_blocks[nu][nu];
            let residual = linalg::symmetry_residual(own);
            if residual > SYMMETRY_TOL {
                out.push(Diagnostic::Asymmetric {
                    player: nu,
                    residual,
                });
            }
            let lambda_min = linalg::lambda_min_sym(own);
            if lambda_min <= 0.0 {
                out.push(Diagnostic::NotPositiveDefinite {
                    player: nu,
                    lambda_min,
                });
            }
            let bx = &self.boxes[nu];
            let mut box_empty = false;
            for j in 0..self.dims[nu] {
                if bx.lower[j] > bx.upper[j] {
                    out.push(Diagnostic::EmptyBox {
                        player: nu,
                        coord: j,
                    });
                    box_empty = true;
                }
            }
            for j in 0..self.int_counts[nu] {
                if !bx.lower[j].is_finite() || !bx.upper[j].is_finite() {
                    out.push(Diagnostic::UnboundedIntegerCoordinate {
                        player: nu,
                        coord: j,
                    });
                }
            }
            if box_empty || (lambda_min > 0.0 && self.feasible_point(nu).is_none()) {
                out.push(Diagnostic::InfeasiblePlayerSet { player: nu });
            }
        }
        out
    }

    /// A feasible point of `X_nu`, if one exists (minimum-norm solve).
    pub fn feasible_point(&self, nu: usize) -> Option<DVector<f64>> {
        let n = self.dims[nu];
        let prob = qp::QpProblem {
            q: DMatrix::identity(n, n),
            c: DVector::zeros(n),
            eq: self.lin_eq[nu].clone(),
            ineq: self.player_inequalities(nu),
        };
        qp::solve(&prob, qp::DEFAULT_TOL).ok().map(|s| s.x)
    }

    /// Inequality rows `a' x <= b` for player `nu`, with finite box faces folded in.
    pub fn player_inequalities(&self, nu: usize) -> LinearSystem {
        let n = self.dims[nu];
        let mut rows: Vec<DVector<f64>> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        let bx = &self.boxes[nu];
        for j in 0..n {
            if bx.upper[j].is_finite() {
                let mut r = DVector::zeros(n);
                r[j] = 1.0;
                rows.push(r);
                rhs.push(bx.upper[j]);
            }
            if bx.lower[j].is_finite() {
                let mut r = DVector::zeros(n);
                r[j] = -1.0;
                rows.push(r);
                rhs.push(-bx.lower[j]);
            }
        }
        let sys = &self.lin_ineq[nu];
        for i in 0..sys.a.nrows() {
            rows.push(sys.a.row(i).transpose());
            rhs.push(sys.b[i]);
        }
        let m = rows.len();
        let mut a = DMatrix::zeros(m, n);
        for (i, r) in rows.iter().enumerate() {
            a.set_row(i, &r.transpose());
        }
        LinearSystem {
            a,
            b: DVector::from_vec(rhs),
        }
    }

    /// Whether `v` lies in `X_nu` within tolerance `tol`.
    pub fn point_in_set(&self, nu: usize, v: &DVector<f64>, tol: f64) -> bool {
        let bx = &self.boxes[nu];
        for j in 0..self.dims[nu] {
            if v[j] < bx.lower[j] - tol || v[j] > bx.upper[j] + tol {
                return false;
            }
        }
        let sys = &self.lin_ineq[nu];
        for i in 0..sys.a.nrows() {
            if sys.a.row(i).transpose().dot(v) > sys.b[i] + tol {
                return false;
            }
        }
        let sys = &self.lin_eq[nu];
        for i in 0..sys.a.nrows() {
            if (sys.a.row(i).transpose().dot(v) - sys.b[i]).abs() > tol {
                return false;
            }
        }
        true
    }

    /// Whether `v` lies in `Omega_nu` (integer coordinates integral) within `tol`.
    pub fn point_in_mixed_set(&self, nu: usize, v: &DVector<f64>, tol: f64) -> bool {
        if !self.point_in_set(nu, v, tol) {
            return false;
        }
        (0..self.int_counts[nu]).all(|j| (v[j] - v[j].round()).abs() <= tol)
    }

    /// Cost `theta_nu(x)`.
    pub fn cost(&self, nu: usize, x: &JointPoint) -> Result<f64> {
        self.check_player(nu)?;
        self.check_point(x)?;
        let own = &x.blocks[nu];
        let mut val =
            0.5 * own.dot(&(&self.q_blocks[nu][nu] * own)) + self.c[nu].dot(own) + self.offsets[nu];
        for nv in 0..self.n_players() {
            if nv != nu {
                val += own.dot(&(&self.q_blocks[nu][nv] * &x.blocks[nv]));
            }
        }
        Ok(val)
    }

    /// Partial gradient `grad_{x^nu} theta_nu(x)`.
    pub fn partial_grad(&self, nu: usize, x: &JointPoint) -> Result<DVector<f64>> {
        self.check_player(nu)?;
        self.check_point(x)?;
        let mut g = &self.q_blocks[nu][nu] * &x.blocks[nu] + &self.c[nu];
        for nv in 0..self.n_players() {
            if nv != nu {
                g += &self.q_blocks[nu][nv] * &x.blocks[nv];
            }
        }
        Ok(g)
    }

    /// Stacked game mapping `F(x) = (grad_{x^nu} theta_nu(x))_nu`.
    pub fn game_mapping(&self, x: &JointPoint) -> Result<JointPoint> {
        self.check_point(x)?;
        let blocks = (0..self.n_players())
            .map(|nu| self.partial_grad(nu, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(JointPoint::new(blocks))
    }

    /// Linear part of player `nu`'s own problem at fixed opponents:
    /// minimize `1/2 v' Q[nu][nu] v + q' v` with
    /// `q = c_nu + sum_{nu' != nu} Q[nu][nu'] x^{nu'}`.
    pub fn own_linear_term(&self, nu: usize, x: &JointPoint) -> Result<DVector<f64>> {
        self.check_player(nu)?;
        self.check_point(x)?;
        let mut q = self.c[nu].clone();
        for nv in 0..self.n_players() {
            if nv != nu {
                q += &self.q_blocks[nu][nv] * &x.blocks[nv];
            }
        }
        Ok(q)
    }

    /// Full stacked Jacobian of the game mapping (row blocks `[Q_nu,1 .. Q_nu,N]`).
    pub fn stacked_jacobian(&self) -> DMatrix<f64> {
        let n: usize = self.dims.iter().sum();
        let mut a = DMatrix::zeros(n, n);
        let mut r0 = 0;
        for nu in 0..self.n_players() {
            let mut c0 = 0;
            for nv in 0..self.n_players() {
                a.view_mut((r0, c0), (self.dims[nu], self.dims[nv]))
                    .copy_from(&self.q_blocks[nu][nv]);
                c0 += self.dims[nv];
            }
            r0 += self.dims[nu];
        }
        a
    }

    /// Euclidean diameter of `X_nu` computed from the box (None when unbounded).
    pub fn box_diameter(&self, nu: usize) -> Option<f64> {
        let bx = &self.boxes[nu];
        let mut s = 0.0;
        for j in 0..self.dims[nu] {
            let d = bx.upper[j] - bx.lower[j];
            if !d.is_finite() {
                return None;
            }
            s += d * d;
        }
        Some(s.sqrt())
    }
}
