//! Seeded generator for the smart-building demand-response game, plus
//! certification and schedule-comparison experiments on its instances.
//!
//! Building `nu` controls, over `T` time slots:
//!   * on/off (or multi-level) appliance states `delta_h(k)`, integer;
//!   * a storage charging rate `u(k)`, continuous;
//!   * appliance energy draws `y_h(k)`, continuous.
//!
//! It pays local storage cost, a shared energy price on `u` coupling it
//! to the other buildings, a tracking penalty `c (y_h(k) - ubar_h
//! delta_h(k))^2` tying draws to appliance states, and a switching
//! penalty on `delta`. Each appliance must receive its total demand
//! (equality), the storage state of charge stays nonnegative
//! (accumulated inequality), and aggregate draw per slot is capped.
//!
//! Coordinates per player: `[delta (m*T) | u (T) | y (m*T)]`, integers
//! first.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certify::{self, DiscreteGapCertificate, WeightSearch};
use crate::error::Result;
use crate::game::{BoxBounds, JointPoint, LinearSystem, QuadGame};
use crate::iterate::{self, IterateOptions, Schedule, StopReason};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildingParams {
    pub n_players: usize,
    /// Time slots `T`; the first `ceil(T/2)` run on the day tariff.
    pub horizon: usize,
    /// Appliances `m` per building.
    pub appliances: usize,
    /// Levels of each appliance state: 1 for on/off, 10 for tens steps.
    pub granularity: u32,
    /// Switching penalty weight on `delta` (chi).
    pub switching_cost: f64,
    /// Tracking penalty weight between `y` and `delta` (c).
    pub tracking_weight: f64,
    /// Local storage cost (kappa), jittered per building.
    pub local_cost: f64,
    pub day_price: f64,
    pub night_price: f64,
    /// Charging efficiency in the state-of-charge constraint.
    pub eta: f64,
    /// Discharge factor in the state-of-charge constraint.
    pub xi: f64,
    /// Slot length (delta-bar).
    pub slot_length: f64,
}

impl BuildingParams {
    /// Small always-feasible configuration with ten appliance levels;
    /// stays certifiable without perturbation.
    pub fn desk() -> Self {
        Self {
            n_players: 4,
            horizon: 4,
            appliances: 1,
            granularity: 10,
            switching_cost: 5.0,
            tracking_weight: 0.5,
            local_cost: 1.0,
            day_price: 0.02,
            night_price: 0.01,
            eta: 1.0,
            xi: 0.5,
            slot_length: 1.0,
        }
    }

    /// Larger configuration with multi-level appliances; typically needs
    /// the diagonal-dominance perturbations.
    pub fn full_scale() -> Self {
        Self {
            n_players: 8,
            horizon: 6,
            appliances: 2,
            granularity: 10,
            switching_cost: 0.5,
            tracking_weight: 0.5,
            local_cost: 1.0,
            day_price: 0.12,
            night_price: 0.06,
            eta: 1.0,
            xi: 0.5,
            slot_length: 1.0,
        }
    }

    pub fn dim_per_player(&self) -> usize {
        self.horizon + 2 * self.horizon * self.appliances
    }

    pub fn ints_per_player(&self) -> usize {
        self.horizon * self.appliances
    }

    fn price(&self, k: usize) -> f64 {
        if k < self.horizon.div_ceil(2) {
            self.day_price
        } else {
            self.night_price
        }
    }
}

/// Builds a randomized instance; identical seeds give identical games.
pub fn generate_instance(params: &BuildingParams, seed: u64) -> Result<QuadGame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, t, m) = (params.n_players, params.horizon, params.appliances);
    let levels = params.granularity.max(1) as f64;
    let n_i = params.dim_per_player();
    let ints = params.ints_per_player();

    // Index layout inside a player's block.
    let d_idx = |h: usize, k: usize| h * t + k;
    let u_idx = |k: usize| m * t + k;
    let y_idx = |h: usize, k: usize| m * t + t + h * t + k;

    let mut q_blocks = Vec::with_capacity(n);
    let mut c_vecs = Vec::with_capacity(n);
    let mut boxes = Vec::with_capacity(n);
    let mut lin_ineq = Vec::with_capacity(n);
    let mut lin_eq = Vec::with_capacity(n);

    for _nu in 0..n {
        // Per-building randomization.
        let ubar: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..1.5)).collect();
        let kappa = params.local_cost * rng.gen_range(0.8..1.2);
        let sum_ubar: f64 = ubar.iter().sum();
        let soc0 = params.xi * params.slot_length * t as f64 * sum_ubar * rng.gen_range(0.5..1.0);

        // Appliance states are scaled to levels: effective rate per level.
        let ubar_eff: Vec<f64> = ubar.iter().map(|&u| u / levels).collect();
        let chi_eff = params.switching_cost / (levels * levels);
        let cc = params.tracking_weight;

        let mut own = DMatrix::zeros(n_i, n_i);
        for h in 0..m {
            for k in 0..t {
                own[(d_idx(h, k), d_idx(h, k))] =
                    2.0 * chi_eff + 2.0 * cc * ubar_eff[h] * ubar_eff[h];
                own[(y_idx(h, k), y_idx(h, k))] = 2.0 * cc;
                own[(d_idx(h, k), y_idx(h, k))] = -2.0 * cc * ubar_eff[h];
                own[(y_idx(h, k), d_idx(h, k))] = -2.0 * cc * ubar_eff[h];
            }
        }
        for k in 0..t {
            own[(u_idx(k), u_idx(k))] = 2.0 * (kappa + params.price(k));
        }

        let mut row_blocks = Vec::with_capacity(n);
        for nv in 0..n {
            if nv == _nu {
                row_blocks.push(own.clone());
            } else {
                let mut cross = DMatrix::zeros(n_i, n_i);
                for k in 0..t {
                    cross[(u_idx(k), u_idx(k))] = params.price(k);
                }
                row_blocks.push(cross);
            }
        }
        q_blocks.push(row_blocks);
        c_vecs.push(DVector::zeros(n_i));

        // Bounds: delta in [0, levels] integer, u in [0, u_max],
        // y_h(k) in [0, slot_length * ubar_h].
        let u_max = (params.xi * sum_ubar / params.eta).max(2.0);
        let lower = DVector::zeros(n_i);
        let mut upper = DVector::zeros(n_i);
        for h in 0..m {
            for k in 0..t {
                upper[d_idx(h, k)] = levels;
                upper[y_idx(h, k)] = params.slot_length * ubar[h];
            }
        }
        for k in 0..t {
            upper[u_idx(k)] = u_max;
        }
        boxes.push(BoxBounds::new(lower, upper));

        // Equalities: each appliance receives its demand.
        let mut e = DMatrix::zeros(m, n_i);
        let mut d = DVector::zeros(m);
        for h in 0..m {
            for k in 0..t {
                e[(h, y_idx(h, k))] = 1.0;
            }
            d[h] = params.slot_length * ubar[h];
        }
        lin_eq.push(LinearSystem { a: e, b: d });

        // Inequalities: state of charge stays nonnegative (one row per
        // slot, accumulated), plus the per-slot aggregate draw cap.
        let mut a = DMatrix::zeros(2 * t, n_i);
        let mut b = DVector::zeros(2 * t);
        for k in 0..t {
            for s in 0..=k {
                a[(k, u_idx(s))] = -params.eta;
                for h in 0..m {
                    a[(k, y_idx(h, s))] = params.xi / params.slot_length;
                }
            }
            b[k] = soc0;
            for h in 0..m {
                a[(t + k, y_idx(h, k))] = 1.0;
            }
            b[t + k] = params.slot_length * sum_ubar;
        }
        lin_ineq.push(LinearSystem { a, b });
    }

    QuadGame::new(
        vec![n_i; n],
        vec![ints; n],
        q_blocks,
        c_vecs,
        boxes,
        lin_ineq,
        lin_eq,
    )
}

/// Certification summary of one instance.
#[derive(Debug, Clone)]
pub struct InstanceCertificate {
    pub diagnostics: Vec<crate::game::Diagnostic>,
    pub monotonicity: f64,
    pub weight_search: WeightSearch,
    pub beta: Option<DiscreteGapCertificate>,
    /// Contraction modulus after the curvature perturbation, when the
    /// plain weight search fails but the game is strongly monotone.
    pub perturbed_alpha: Option<f64>,
}

pub fn certify_instance(game: &QuadGame) -> Result<InstanceCertificate> {
    let diagnostics = game.validate();
    let monotonicity = certify::strong_monotonicity(game);
    let upsilon = certify::condensed_matrix(game)?;
    let weight_search = certify::find_dominating_weights(&upsilon);
    let beta = certify::beta_certificate(game, certify::BetaRequest::General).ok();
    let perturbed_alpha = match &weight_search {
        WeightSearch::Found(_) => None,
        WeightSearch::NoWeights { .. } if monotonicity > 0.0 => {
            let x_bar = JointPoint::zeros(game);
            let perturbed = certify::perturb_curvature(game, 0.5, &x_bar)?;
            let u2 = certify::condensed_matrix(&perturbed)?;
            match certify::find_dominating_weights(&u2) {
                WeightSearch::Found(c) => Some(c.alpha),
                WeightSearch::NoWeights { .. } => None,
            }
        }
        WeightSearch::NoWeights { .. } => None,
    };
    Ok(InstanceCertificate {
        diagnostics,
        monotonicity,
        weight_search,
        beta,
        perturbed_alpha,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRow {
    pub instance: String,
    pub procedure: String,
    pub schedule: String,
    pub iterations: usize,
    pub time_ms: f64,
    pub converged: bool,
    pub radius: Option<f64>,
    pub contained: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
}

/// Runs the continuous and mixed best-response iterations under both
/// schedules and reports iteration counts, wall time and whether the
/// final mixed iterate lies in the certified cluster ball around the
/// relaxed solution.
pub fn run_comparison(
    game: &QuadGame,
    instance: &str,
    opts: &IterateOptions,
) -> Result<ExperimentReport> {
    let cert = certify_instance(game)?;
    let (alpha_w, beta) = match (&cert.weight_search, &cert.beta) {
        (WeightSearch::Found(c), Some(b)) => (Some((c.alpha, c.w.clone())), Some(b.beta)),
        _ => (None, None),
    };

    let start = JointPoint::new(
        (0..game.n_players())
            .map(|nu| {
                game.feasible_point(nu)
                    .ok_or(crate::error::Error::Infeasible(nu))
            })
            .collect::<Result<Vec<_>>>()?,
    );

    let mut rows = Vec::new();
    let mut x_bar: Option<JointPoint> = None;
    for (label, schedule) in [
        ("jacobi", Schedule::JacobiFull),
        ("gauss-seidel", Schedule::GaussSeidelCyclic),
    ] {
        let t0 = std::time::Instant::now();
        let trace = iterate::run_continuous(game, &schedule, &start, opts)?;
        let elapsed = t0.elapsed().as_secs_f64() * 1e3;
        if x_bar.is_none() && trace.stop == StopReason::Converged {
            x_bar = Some(trace.last().clone());
        }
        rows.push(ExperimentRow {
            instance: instance.to_string(),
            procedure: "continuous".into(),
            schedule: label.into(),
            iterations: trace.rounds(),
            time_ms: elapsed,
            converged: trace.stop == StopReason::Converged,
            radius: None,
            contained: None,
        });
    }

    for (label, schedule) in [
        ("jacobi", Schedule::JacobiFull),
        ("gauss-seidel", Schedule::GaussSeidelCyclic),
    ] {
        let t0 = std::time::Instant::now();
        let mixed_start = round_start(game, x_bar.as_ref().unwrap_or(&start))?;
        let trace = iterate::run_mixed(game, &schedule, &mixed_start, opts)?;
        let elapsed = t0.elapsed().as_secs_f64() * 1e3;
        let (radius, contained) = match (&alpha_w, &x_bar) {
            (Some((alpha, w)), Some(xb)) => {
                let mwsi = iterate::max_w_sqrt_i(w, &game.int_counts);
                let r = iterate::cluster_thm1(*alpha, beta.unwrap(), mwsi);
                let d = crate::game::block_norm(w, &trace.last().sub(xb));
                (Some(r), Some(d <= r))
            }
            _ => (None, None),
        };
        rows.push(ExperimentRow {
            instance: instance.to_string(),
            procedure: "mixed".into(),
            schedule: label.into(),
            iterations: trace.rounds(),
            time_ms: elapsed,
            converged: trace.stop == StopReason::Converged,
            radius,
            contained,
        });
    }
    Ok(ExperimentReport { rows })
}

/// Integer coordinates rounded (ties towards the ceiling); any block
/// made infeasible is replaced by a mixed best response.
fn round_start(game: &QuadGame, x: &JointPoint) -> Result<JointPoint> {
    let mut start = x.clone();
    for nu in 0..game.n_players() {
        for j in 0..game.int_counts[nu] {
            start.blocks[nu][j] = (start.blocks[nu][j] + 0.5).floor();
        }
    }
    for nu in 0..game.n_players() {
        if !game.point_in_mixed_set(nu, &start.blocks[nu], 1e-8) {
            start.blocks[nu] =
                crate::br::mixed_br(game, nu, &start, crate::br::DEFAULT_NODE_BUDGET)?.point;
        }
    }
    Ok(start)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_instance_is_well_formed() {
        let p = BuildingParams::desk();
        let g = generate_instance(&p, 7).unwrap();
        assert_eq!(g.n_players(), 4);
        assert_eq!(g.dims, vec![p.dim_per_player(); 4]);
        assert_eq!(g.int_counts, vec![4; 4]);
        assert!(g.validate().is_empty(), "{:?}", g.validate());
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let p = BuildingParams::desk();
        let a = generate_instance(&p, 42).unwrap();
        let b = generate_instance(&p, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(&p, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn desk_instance_certifies_without_perturbation() {
        let p = BuildingParams::desk();
        let g = generate_instance(&p, 7).unwrap();
        let cert = certify_instance(&g).unwrap();
        assert!(cert.diagnostics.is_empty());
        match cert.weight_search {
            WeightSearch::Found(c) => assert!(c.alpha < 1.0),
            WeightSearch::NoWeights { .. } => panic!("desk scale should be dominant"),
        }
        let beta = cert.beta.unwrap();
        assert!(beta.beta >= 0.5);
        assert_eq!(cert.perturbed_alpha, None);
    }

    #[test]
    fn full_scale_needs_and_gets_perturbation() {
        let p = BuildingParams::full_scale();
        let g = generate_instance(&p, 7).unwrap();
        assert!(g.validate().is_empty());
        let cert = certify_instance(&g).unwrap();
        // Strongly monotone either way; if dominance fails the curvature
        // perturbation must restore it.
        match cert.weight_search {
            WeightSearch::Found(_) => {}
            WeightSearch::NoWeights { .. } => {
                assert!(cert.monotonicity > 0.0);
                let a = cert
                    .perturbed_alpha
                    .expect("perturbation restores dominance");
                assert!(a <= 0.5 + 1e-9);
            }
        }
    }

    #[test]
    fn comparison_report_shape_and_containment() {
        let p = BuildingParams::desk();
        let g = generate_instance(&p, 11).unwrap();
        let opts = IterateOptions {
            max_rounds: 80,
            ..Default::default()
        };
        let rep = run_comparison(&g, "desk-11", &opts).unwrap();
        assert_eq!(rep.rows.len(), 4);
        for row in &rep.rows {
            assert_eq!(row.instance, "desk-11");
            if row.procedure == "continuous" {
                assert!(
                    row.converged,
                    "continuous {} did not converge",
                    row.schedule
                );
            }
            if row.procedure == "mixed" {
                assert_eq!(row.contained, Some(true), "{row:?}");
            }
        }
    }
}
