//! Best-response iterations over update schedules, convergence bounds,
//! and the two-phase solve (relax, certify, fix or fall back).

use std::collections::HashMap;

use serde::Serialize;

use crate::br::{self, BrStatus};
use crate::certify::{
    self, BetaBasis, ContractionCertificate, DiscreteGapCertificate, ExistenceCertificate,
    WeightSearch,
};
use crate::error::{Error, Result};
use crate::game::{JointPoint, QuadGame, WeightVector};

/// Player update order within a round.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// All players update simultaneously: one inner step per round.
    JacobiFull,
    /// Players update one at a time in index order: N inner steps per round.
    GaussSeidelCyclic,
    /// Explicit stages; players within a stage update simultaneously.
    /// Every player must appear in at least one stage.
    Custom(Vec<Vec<usize>>),
}

impl Schedule {
    /// Stages of one round.
    fn stages(&self, n: usize) -> Vec<Vec<usize>> {
        match self {
            Schedule::JacobiFull => vec![(0..n).collect()],
            Schedule::GaussSeidelCyclic => (0..n).map(|nu| vec![nu]).collect(),
            Schedule::Custom(stages) => stages.clone(),
        }
    }

    /// Inner steps per round, the `h` entering the iteration caps.
    pub fn steps_per_round(&self, n: usize) -> usize {
        match self {
            Schedule::JacobiFull => 1,
            Schedule::GaussSeidelCyclic => n,
            Schedule::Custom(stages) => stages.len(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let Schedule::Custom(stages) = self {
            if stages.is_empty() {
                return Err(Error::Parameter("custom schedule has no stages".into()));
            }
            let mut seen = vec![false; n];
            for stage in stages {
                for &nu in stage {
                    if nu >= n {
                        return Err(Error::PlayerIndex(nu, n));
                    }
                    seen[nu] = true;
                }
            }
            if !seen.iter().all(|&s| s) {
                return Err(Error::Parameter(
                    "custom schedule must update every player at least once per round".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StopReason {
    Converged,
    MaxIter,
    CycleDetected { start: usize, period: usize },
}

/// Full record of one best-response run. `points[k]` is the iterate after
/// inner step `k` (one schedule stage), with `points[0]` the starting
/// point; a round is `h` consecutive inner steps.
#[derive(Debug, Clone)]
pub struct IterateTrace {
    pub points: Vec<JointPoint>,
    /// Euclidean norm of each inner step.
    pub step_norms: Vec<f64>,
    /// Worst best-response inexactness per inner step (zero when exact).
    pub deltas: Vec<f64>,
    /// Inner steps per round.
    pub h: usize,
    pub nodes: usize,
    pub stop: StopReason,
}

impl IterateTrace {
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn rounds(&self) -> usize {
        self.steps() / self.h
    }

    pub fn last(&self) -> &JointPoint {
        self.points.last().expect("trace holds the starting point")
    }

    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }
}

#[derive(Debug, Clone)]
pub struct IterateOptions {
    /// Best-response inexactness; zero means exact.
    pub epsilon: f64,
    pub max_rounds: usize,
    /// Converged once two consecutive rounds move less than this.
    pub step_tol: f64,
    pub node_budget: usize,
}

impl Default for IterateOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            max_rounds: 60,
            step_tol: 1e-6,
            node_budget: br::DEFAULT_NODE_BUDGET,
        }
    }
}

const START_TOL: f64 = 1e-8;
/// Quantum for the cycle-detection state hash.
const CYCLE_QUANTUM: f64 = 1e-9;

enum BrKind {
    Continuous,
    Mixed,
}

/// Best-response iteration over the mixed-integer sets.
pub fn run_mixed(
    game: &QuadGame,
    schedule: &Schedule,
    x0: &JointPoint,
    opts: &IterateOptions,
) -> Result<IterateTrace> {
    run(game, schedule, x0, opts, BrKind::Mixed)
}

/// Best-response iteration over the continuous relaxations.
pub fn run_continuous(
    game: &QuadGame,
    schedule: &Schedule,
    x0: &JointPoint,
    opts: &IterateOptions,
) -> Result<IterateTrace> {
    run(game, schedule, x0, opts, BrKind::Continuous)
}

fn run(
    game: &QuadGame,
    schedule: &Schedule,
    x0: &JointPoint,
    opts: &IterateOptions,
    kind: BrKind,
) -> Result<IterateTrace> {
    let n = game.n_players();
    schedule.validate(n)?;
    if !x0.matches(game) {
        return Err(Error::StartingPoint(
            "dimensions do not match the game".into(),
        ));
    }
    for nu in 0..n {
        let ok = match kind {
            BrKind::Continuous => game.point_in_set(nu, &x0.blocks[nu], START_TOL),
            BrKind::Mixed => game.point_in_mixed_set(nu, &x0.blocks[nu], START_TOL),
        };
        if !ok {
            return Err(Error::StartingPoint(format!(
                "player {nu} block outside its set"
            )));
        }
    }

    let stages = schedule.stages(n);
    let h = stages.len();
    let mut points = vec![x0.clone()];
    let mut step_norms: Vec<f64> = Vec::new();
    let mut deltas = Vec::new();
    let mut nodes = 0usize;
    // Latest occurrence (inner-step index) of each quantized state, and
    // the last inner step that moved by more than the quantum.
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    seen.insert(quantize(x0), 0);
    let mut last_move = 0usize;
    // Euclidean norm of each round's total movement.
    let mut round_norms: Vec<f64> = Vec::new();

    let done = |points: Vec<JointPoint>, step_norms: Vec<f64>, deltas: Vec<f64>, nodes, stop| {
        Ok(IterateTrace {
            points,
            step_norms,
            deltas,
            h,
            nodes,
            stop,
        })
    };

    for round in 1..=opts.max_rounds {
        let round_start = points.last().unwrap().clone();
        for stage in &stages {
            let basis = points.last().unwrap().clone();
            let mut current = basis.clone();
            let mut stage_delta: f64 = 0.0;
            for &nu in stage {
                let res = match kind {
                    BrKind::Continuous => br::continuous_br(game, nu, &basis)?,
                    BrKind::Mixed => {
                        br::inexact_br(game, nu, &basis, opts.epsilon, opts.node_budget)?
                    }
                };
                nodes += res.nodes;
                if let BrStatus::Inexact { delta } = res.status {
                    stage_delta = stage_delta.max(delta);
                }
                current.blocks[nu] = res.point;
            }
            let step = current.sub(&basis).flat_norm();
            points.push(current.clone());
            step_norms.push(step);
            deltas.push(stage_delta);
            let t = points.len() - 1;
            if step > CYCLE_QUANTUM {
                last_move = t;
            }
            // Revisited state after genuine movement: a cycle.
            let key = quantize(&current);
            match seen.get(&key) {
                Some(&start) if last_move > start => {
                    return done(
                        points,
                        step_norms,
                        deltas,
                        nodes,
                        StopReason::CycleDetected {
                            start,
                            period: t - start,
                        },
                    );
                }
                _ => {
                    seen.insert(key, t);
                }
            }
        }
        let round_step = points.last().unwrap().sub(&round_start).flat_norm();
        round_norms.push(round_step);
        // Exact fixed point after a full round.
        if round_step == 0.0 {
            return done(points, step_norms, deltas, nodes, StopReason::Converged);
        }
        // Two consecutive small rounds.
        if round >= 2
            && round_norms[round - 1] <= opts.step_tol
            && round_norms[round - 2] <= opts.step_tol
        {
            return done(points, step_norms, deltas, nodes, StopReason::Converged);
        }
    }

    done(points, step_norms, deltas, nodes, StopReason::MaxIter)
}

fn quantize(x: &JointPoint) -> Vec<i64> {
    x.blocks
        .iter()
        .flat_map(|b| b.iter().map(|&v| (v / CYCLE_QUANTUM).round() as i64))
        .collect()
}

/// `max_nu w_nu sqrt(i_nu)`, the block-norm price of rounding.
pub fn max_w_sqrt_i(w: &WeightVector, int_counts: &[usize]) -> f64 {
    w.0.iter()
        .zip(int_counts)
        .map(|(&wv, &i)| wv * (i as f64).sqrt())
        .fold(0.0, f64::max)
}

fn check_gamma(gamma: f64, alpha: f64) -> Result<()> {
    let hi = if alpha > 0.0 {
        1.0 / alpha
    } else {
        f64::INFINITY
    };
    if gamma <= 1.0 || gamma >= hi {
        return Err(Error::GammaRange(gamma, hi));
    }
    Ok(())
}

/// Eventual-containment radius for the exact mixed iteration:
/// `2 beta gamma / (1 - gamma alpha) * max_nu w_nu sqrt(i_nu)`.
pub fn radius_thm1(gamma: f64, alpha: f64, beta: f64, mwsi: f64) -> Result<f64> {
    check_gamma(gamma, alpha)?;
    Ok(2.0 * beta * gamma / (1.0 - gamma * alpha) * mwsi)
}

/// Limit cluster radius of the exact mixed iteration (`gamma -> 1`).
pub fn cluster_thm1(alpha: f64, beta: f64, mwsi: f64) -> f64 {
    2.0 * beta / (1.0 - alpha) * mwsi
}

/// Rounds until the exact mixed iteration enters the `radius_thm1` ball,
/// starting at block-norm distance `dist0` from the relaxed solution;
/// `h` is the schedule's inner steps per round.
pub fn cap_thm1(
    gamma: f64,
    alpha: f64,
    beta: f64,
    mwsi: f64,
    dist0: f64,
    h: usize,
) -> Result<usize> {
    check_gamma(gamma, alpha)?;
    let arg = ((1.0 - gamma * alpha) * dist0 / (2.0 * beta * mwsi)).max(gamma);
    Ok(h * (arg.ln() / gamma.ln()).ceil() as usize)
}

/// Rounds until the continuous iteration is within block-norm distance
/// `epsilon` of the relaxed solution.
pub fn cap_thm2(alpha: f64, epsilon: f64, dist0: f64, h: usize) -> Result<usize> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::Parameter("alpha must lie in (0, 1)".into()));
    }
    if epsilon <= 0.0 {
        return Err(Error::Parameter("epsilon must be positive".into()));
    }
    let z = if dist0 > 0.0 {
        (epsilon / dist0).min(1.0)
    } else {
        1.0
    };
    Ok(h * (z.ln() / alpha.ln()).ceil() as usize)
}

/// Eventual-containment radius around an equilibrium (when one exists):
/// `beta gamma / (1 - gamma alpha) * max_nu w_nu sqrt(i_nu)`.
pub fn radius_thm3(gamma: f64, alpha: f64, beta: f64, mwsi: f64) -> Result<f64> {
    check_gamma(gamma, alpha)?;
    Ok(beta * gamma / (1.0 - gamma * alpha) * mwsi)
}

/// Limit radius around an equilibrium (`gamma -> 1`).
pub fn radius_thm4(alpha: f64, beta: f64, mwsi: f64) -> f64 {
    beta / (1.0 - alpha) * mwsi
}

/// Rounds until the iteration enters the `radius_thm3` ball.
pub fn cap_thm4(
    gamma: f64,
    alpha: f64,
    beta: f64,
    mwsi: f64,
    dist0: f64,
    h: usize,
) -> Result<usize> {
    check_gamma(gamma, alpha)?;
    let arg = ((1.0 - gamma * alpha) * dist0 / (beta * mwsi)).max(gamma);
    Ok(h * (arg.ln() / gamma.ln()).ceil() as usize)
}

/// Eventual-containment radius for the inexact mixed iteration:
/// `gamma / (1 - gamma alpha) * max_nu w_nu (2 beta sqrt(i_nu) + epsilon)`.
pub fn radius_inexact(
    gamma: f64,
    alpha: f64,
    beta: f64,
    epsilon: f64,
    w: &WeightVector,
    int_counts: &[usize],
) -> Result<f64> {
    check_gamma(gamma, alpha)?;
    let m =
        w.0.iter()
            .zip(int_counts)
            .map(|(&wv, &i)| wv * (2.0 * beta * (i as f64).sqrt() + epsilon))
            .fold(0.0, f64::max);
    Ok(gamma / (1.0 - gamma * alpha) * m)
}

/// Limit cluster radius of the inexact mixed iteration (`gamma -> 1`).
pub fn cluster_inexact(
    alpha: f64,
    beta: f64,
    epsilon: f64,
    w: &WeightVector,
    int_counts: &[usize],
) -> f64 {
    let m =
        w.0.iter()
            .zip(int_counts)
            .map(|(&wv, &i)| wv * (2.0 * beta * (i as f64).sqrt() + epsilon))
            .fold(0.0, f64::max);
    m / (1.0 - alpha)
}

/// Every a-priori bound for one game, schedule and starting point.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub beta_basis: BetaBasis,
    pub epsilon: f64,
    pub h: usize,
    /// Block-norm distance from the start to the relaxed solution.
    pub dist0: f64,
    pub radius_thm1: f64,
    pub cluster_thm1: f64,
    pub cap_thm1: usize,
    pub cap_thm2: Option<usize>,
    pub radius_thm3: f64,
    pub radius_thm4: f64,
    pub cap_thm4: usize,
    pub radius_inexact: f64,
    pub cluster_inexact: f64,
}

/// Assembles the bound report from the game's own certificates.
pub fn bound_report(
    game: &QuadGame,
    schedule: &Schedule,
    x0: &JointPoint,
    x_bar: &JointPoint,
    gamma: f64,
    epsilon: f64,
) -> Result<BoundReport> {
    let upsilon = certify::condensed_matrix(game)?;
    let contraction = match certify::find_dominating_weights(&upsilon) {
        WeightSearch::Found(c) => c,
        WeightSearch::NoWeights { spectral_radius } => {
            return Err(Error::Structure(format!(
                "no dominating weights exist (spectral radius {spectral_radius:.6})"
            )))
        }
    };
    let beta_cert = certify::beta_auto(game)?;
    let (alpha, w, beta) = (contraction.alpha, &contraction.w, beta_cert.beta);
    let h = schedule.steps_per_round(game.n_players());
    let mwsi = max_w_sqrt_i(w, &game.int_counts);
    let dist0 = crate::game::block_norm(w, &x0.sub(x_bar));
    Ok(BoundReport {
        gamma,
        alpha,
        beta,
        beta_basis: beta_cert.basis,
        epsilon,
        h,
        dist0,
        radius_thm1: radius_thm1(gamma, alpha, beta, mwsi)?,
        cluster_thm1: cluster_thm1(alpha, beta, mwsi),
        cap_thm1: cap_thm1(gamma, alpha, beta, mwsi, dist0, h)?,
        cap_thm2: if epsilon > 0.0 {
            Some(cap_thm2(alpha, epsilon, dist0, h)?)
        } else {
            None
        },
        radius_thm3: radius_thm3(gamma, alpha, beta, mwsi)?,
        radius_thm4: radius_thm4(alpha, beta, mwsi),
        cap_thm4: cap_thm4(gamma, alpha, beta, mwsi, dist0, h)?,
        radius_inexact: radius_inexact(gamma, alpha, beta, epsilon, w, &game.int_counts)?,
        cluster_inexact: cluster_inexact(alpha, beta, epsilon, w, &game.int_counts),
    })
}

/// Outcome of the two-phase solve.
#[derive(Debug, Clone)]
pub struct TwoPhaseReport {
    pub relaxed: IterateTrace,
    pub contraction: Option<ContractionCertificate>,
    pub beta: Option<DiscreteGapCertificate>,
    pub existence: Option<ExistenceCertificate>,
    /// True when the final point is a certified exact equilibrium.
    pub certified: bool,
    pub final_trace: IterateTrace,
}

impl TwoPhaseReport {
    pub fn solution(&self) -> &JointPoint {
        self.final_trace.last()
    }
}

const EXISTENCE_BUDGET: usize = 1_000_000;

/// Solves the relaxation, certifies existence around the relaxed
/// solution and, when certified, fixes the integers and resolves the
/// continuous remainder exactly. Otherwise falls back to the mixed
/// best-response iteration started from the rounded relaxed solution.
pub fn solve_two_phase(
    game: &QuadGame,
    schedule: &Schedule,
    x0: Option<&JointPoint>,
    opts: &IterateOptions,
) -> Result<TwoPhaseReport> {
    let start = match x0 {
        Some(p) => p.clone(),
        None => default_start(game)?,
    };
    let relaxed = run_continuous(game, schedule, &start, opts)?;
    let x_bar = relaxed.last().clone();

    let certificates = (|| -> Result<_> {
        let upsilon = certify::condensed_matrix(game)?;
        let contraction = match certify::find_dominating_weights(&upsilon) {
            WeightSearch::Found(c) => c,
            WeightSearch::NoWeights { spectral_radius } => {
                return Err(Error::Structure(format!(
                    "no dominating weights (spectral radius {spectral_radius:.6})"
                )))
            }
        };
        let beta = certify::beta_auto(game)?;
        let existence = certify::existence_certificate(
            game,
            &x_bar,
            contraction.alpha,
            beta.beta,
            &contraction.w,
            EXISTENCE_BUDGET,
        )?;
        Ok((contraction, beta, existence))
    })();

    match certificates {
        Ok((contraction, beta, existence)) if existence.certified => {
            let fixed = existence.fixed_integers.clone().expect("certified");
            let mut restricted = game.clone();
            for (nu, z) in fixed.iter().enumerate() {
                for (j, &zj) in z.iter().enumerate() {
                    restricted.boxes[nu].lower[j] = zj as f64;
                    restricted.boxes[nu].upper[j] = zj as f64;
                }
            }
            let restart = default_start(&restricted)?;
            let final_trace = run_continuous(&restricted, schedule, &restart, opts)?;
            Ok(TwoPhaseReport {
                relaxed,
                contraction: Some(contraction),
                beta: Some(beta),
                existence: Some(existence),
                certified: true,
                final_trace,
            })
        }
        other => {
            let (contraction, beta, existence) = match other {
                Ok((c, b, e)) => (Some(c), Some(b), Some(e)),
                Err(_) => (None, None, None),
            };
            let rounded = mixed_start_near(game, &x_bar)?;
            let final_trace = run_mixed(game, schedule, &rounded, opts)?;
            Ok(TwoPhaseReport {
                relaxed,
                contraction,
                beta,
                existence,
                certified: false,
                final_trace,
            })
        }
    }
}

fn default_start(game: &QuadGame) -> Result<JointPoint> {
    let blocks = (0..game.n_players())
        .map(|nu| game.feasible_point(nu).ok_or(Error::Infeasible(nu)))
        .collect::<Result<Vec<_>>>()?;
    Ok(JointPoint::new(blocks))
}

/// Rounds the integer coordinates of `x_bar` (ties towards the ceiling);
/// blocks left infeasible by rounding are replaced with a mixed best
/// response against the rounded profile.
fn mixed_start_near(game: &QuadGame, x_bar: &JointPoint) -> Result<JointPoint> {
    let mut start = x_bar.clone();
    for nu in 0..game.n_players() {
        for j in 0..game.int_counts[nu] {
            start.blocks[nu][j] = (start.blocks[nu][j] + 0.5).floor();
        }
    }
    for nu in 0..game.n_players() {
        if !game.point_in_mixed_set(nu, &start.blocks[nu], START_TOL) {
            let res = br::mixed_br(game, nu, &start, br::DEFAULT_NODE_BUDGET)?;
            start.blocks[nu] = res.point;
        }
    }
    Ok(start)
}
