//! End-to-end acceptance suite. Each test covers one numbered criterion
//! and prints a single pass line on success (visible with --nocapture).

use minep::br::{self, DEFAULT_NODE_BUDGET};
use minep::building::{self, BuildingParams};
use minep::certify::{self, BetaRequest, WeightSearch};
use minep::fixtures;
use minep::game::{block_norm, BoxBounds, JointPoint, QuadGame, WeightVector};
use minep::iterate::{self, IterateOptions, Schedule, StopReason};
use minep::oracle;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pass(n: usize, what: &str) {
    println!("criterion {n:02} PASS: {what}");
}

fn gs() -> Schedule {
    Schedule::GaussSeidelCyclic
}

fn default_opts() -> IterateOptions {
    IterateOptions::default()
}

/// Relaxed solution to high accuracy by a long continuous iteration.
fn relaxed_to(game: &QuadGame, tol: f64) -> JointPoint {
    let start = JointPoint::new(
        (0..game.n_players())
            .map(|nu| game.feasible_point(nu).unwrap())
            .collect(),
    );
    let opts = IterateOptions {
        step_tol: tol,
        max_rounds: 20_000,
        ..Default::default()
    };
    let t = iterate::run_continuous(game, &gs(), &start, &opts).unwrap();
    assert_eq!(t.stop, StopReason::Converged);
    t.last().clone()
}

#[test]
fn criterion_01_example_1_cycle_and_verification() {
    let g = fixtures::example_1(0.1);
    let x0 = JointPoint::from_scalars(&[-1.0, 1.0]);
    let t = iterate::run_mixed(&g, &gs(), &x0, &default_opts()).unwrap();
    let (start, period) = match t.stop {
        StopReason::CycleDetected { start, period } => (start, period),
        other => panic!("expected a cycle, got {other:?}"),
    };
    assert_eq!(period, 4);
    let cycle: Vec<(f64, f64)> = t.points[start..start + period]
        .iter()
        .map(|p| (p.blocks[0][0], p.blocks[1][0]))
        .collect();
    assert_eq!(
        cycle,
        vec![(-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (1.0, 1.0)]
    );
    for &(a, b) in &cycle {
        let p = JointPoint::from_scalars(&[a, b]);
        assert!(
            !oracle::verify_equilibrium(&g, &p, 1e-9)
                .unwrap()
                .is_equilibrium
        );
    }
    let origin = JointPoint::from_scalars(&[0.0, 0.0]);
    assert!(
        oracle::verify_equilibrium(&g, &origin, 1e-9)
            .unwrap()
            .is_equilibrium
    );
    pass(
        1,
        "Gauss-Seidel 4-cycle reproduced exactly; only the origin verifies",
    );
}

#[test]
fn criterion_02_limit_radius_contains_the_cycle() {
    let g = fixtures::example_1(0.1);
    let upsilon = certify::condensed_matrix(&g).unwrap();
    let w = WeightVector::unit(2);
    let cert = certify::contraction_certificate(&upsilon, &w).unwrap();
    assert!((cert.alpha - 0.55).abs() < 1e-12);
    let radius = iterate::radius_thm4(cert.alpha, 0.5, iterate::max_w_sqrt_i(&w, &g.int_counts));
    assert!((radius - 0.5 / 0.45).abs() < 1e-9);
    let x_bar = JointPoint::from_scalars(&[0.0, 0.0]);
    for &(a, b) in &[(-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (1.0, 1.0)] {
        let p = JointPoint::from_scalars(&[a, b]);
        let d = block_norm(&w, &p.sub(&x_bar));
        assert!((d - 1.0).abs() < 1e-12 && d <= radius);
    }
    pass(
        2,
        "cycle points at block-norm distance 1 <= limit radius 1.1111",
    );
}

#[test]
fn criterion_03_certificates_on_examples_4_and_5() {
    let g4 = fixtures::example_4();
    assert!((certify::strong_monotonicity(&g4) - 1.0).abs() < 1e-9);
    let u4 = certify::condensed_matrix(&g4).unwrap();
    match certify::find_dominating_weights(&u4) {
        WeightSearch::NoWeights { spectral_radius } => assert!(spectral_radius >= 1.0),
        WeightSearch::Found(_) => panic!("example 4 must not admit weights"),
    }
    let g5 = fixtures::example_5();
    let u5 = certify::condensed_matrix(&g5).unwrap();
    let c5 = certify::contraction_certificate(&u5, &WeightVector::unit(2)).unwrap();
    assert!(c5.dominant && (c5.alpha - 0.9).abs() < 1e-12);
    assert!(certify::strong_monotonicity(&g5) < 0.0);
    pass(
        3,
        "example 4: mu = 1, no weights; example 5: alpha = 0.9, mu < 0",
    );
}

/// Empirical block-contraction check of the simultaneous continuous
/// best-response map.
fn contraction_holds_empirically(
    game: &QuadGame,
    w: &WeightVector,
    alpha: f64,
    pairs: usize,
    seed: u64,
) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = |rng: &mut ChaCha8Rng| {
        JointPoint::new(
            (0..game.n_players())
                .map(|nu| {
                    DVector::from_fn(game.dims[nu], |j, _| {
                        rng.gen_range(game.boxes[nu].lower[j]..game.boxes[nu].upper[j])
                    })
                })
                .collect(),
        )
    };
    let br_map = |x: &JointPoint| {
        JointPoint::new(
            (0..game.n_players())
                .map(|nu| br::continuous_br(game, nu, x).unwrap().point)
                .collect(),
        )
    };
    (0..pairs).all(|_| {
        let x = sample(&mut rng);
        let y = sample(&mut rng);
        let lhs = block_norm(w, &br_map(&x).sub(&br_map(&y)));
        let rhs = alpha * block_norm(w, &x.sub(&y));
        lhs <= rhs + 1e-9
    })
}

#[test]
fn criterion_04_perturbations_restore_contraction() {
    let g = fixtures::example_4();
    let x_bar = JointPoint::zeros(&g);
    for perturb in [certify::perturb_proximal, certify::perturb_curvature] {
        let p = perturb(&g, 0.5, &x_bar).unwrap();
        let u = certify::condensed_matrix(&p).unwrap();
        let cert = certify::contraction_certificate(&u, &WeightVector::unit(3)).unwrap();
        assert!(cert.dominant && cert.alpha <= 0.5 + 1e-12);
        assert!(contraction_holds_empirically(
            &p, &cert.w, cert.alpha, 100, 4
        ));
    }
    pass(
        4,
        "both perturbations of example 4 reach alpha <= 0.5 and contract empirically",
    );
}

/// Random box-constrained quadratic game with a dominant condensed
/// matrix (off-diagonal row sums scaled to `ratio` of the diagonal).
#[allow(clippy::needless_range_loop)]
fn random_dominant_game(
    rng: &mut ChaCha8Rng,
    n_players: usize,
    max_dim: usize,
    ints: &dyn Fn(usize) -> usize,
    ratio: f64,
) -> QuadGame {
    let dims: Vec<usize> = (0..n_players).map(|_| rng.gen_range(1..=max_dim)).collect();
    let mut q_blocks: Vec<Vec<DMatrix<f64>>> = Vec::new();
    for nu in 0..n_players {
        let d = dims[nu];
        let mut row = Vec::new();
        for nv in 0..n_players {
            if nu == nv {
                let r = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
                row.push(r.transpose() * &r + DMatrix::<f64>::identity(d, d) * (d as f64));
            } else {
                row.push(DMatrix::from_fn(d, dims[nv], |_, _| {
                    rng.gen_range(-1.0..1.0)
                }));
            }
        }
        q_blocks.push(row);
    }
    // Scale the off-diagonal blocks so each condensed row is dominated.
    for nu in 0..n_players {
        let sigma = minep::linalg::lambda_min_sym(&q_blocks[nu][nu]);
        let off: f64 = (0..n_players)
            .filter(|&nv| nv != nu)
            .map(|nv| minep::linalg::spectral_norm(&q_blocks[nu][nv]))
            .sum();
        if off > 0.0 {
            let s = ratio * sigma / off;
            for nv in 0..n_players {
                if nv != nu {
                    q_blocks[nu][nv] *= s;
                }
            }
        }
    }
    let c = dims
        .iter()
        .map(|&d| DVector::from_fn(d, |_, _| rng.gen_range(-2.0..2.0)))
        .collect();
    let boxes = dims
        .iter()
        .map(|&d| BoxBounds::interval(d, -5.0, 5.0))
        .collect();
    QuadGame::boxed(
        dims.clone(),
        dims.iter().map(|&d| ints(d)).collect(),
        q_blocks,
        c,
        boxes,
    )
    .unwrap()
}

#[test]
fn criterion_05_continuous_iteration_caps() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..20 {
        let n = rng.gen_range(2..=4);
        let g = random_dominant_game(&mut rng, n, 3, &|_| 0, 0.5);
        let upsilon = certify::condensed_matrix(&g).unwrap();
        let cert = match certify::find_dominating_weights(&upsilon) {
            WeightSearch::Found(c) => c,
            WeightSearch::NoWeights { .. } => panic!("generator must produce dominant games"),
        };
        let x_bar = relaxed_to(&g, 1e-13);
        let x0 = JointPoint::new(
            g.dims
                .iter()
                .map(|&d| DVector::from_element(d, 5.0))
                .collect(),
        );
        let dist0 = block_norm(&cert.w, &x0.sub(&x_bar));
        let h = gs().steps_per_round(n);
        for eps in [1e-2, 1e-4] {
            let cap = iterate::cap_thm2(cert.alpha, eps, dist0, h).unwrap();
            let rounds = cap / h;
            let err = if rounds == 0 {
                dist0
            } else {
                let opts = IterateOptions {
                    max_rounds: rounds,
                    step_tol: 0.0,
                    ..Default::default()
                };
                let t = iterate::run_continuous(&g, &gs(), &x0, &opts).unwrap();
                block_norm(&cert.w, &t.last().sub(&x_bar))
            };
            assert!(err <= eps + 1e-9, "trial {trial}: err {err} > eps {eps}");
        }
    }
    pass(
        5,
        "cap_thm2 iteration counts reach 1e-2 and 1e-4 accuracy on 20 random games",
    );
}

#[test]
fn criterion_06_discrete_gap_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        // Integer coordinates separable with positive
        // diagonal curvature and integer box bounds.
        let mut g = random_dominant_game(&mut rng, 2, 3, &|d| d.min(2), 0.4);
        for nu in 0..2 {
            for j in 0..g.int_counts[nu] {
                for k in 0..g.dims[nu] {
                    if k != j {
                        g.q_blocks[nu][nu][(j, k)] = 0.0;
                        g.q_blocks[nu][nu][(k, j)] = 0.0;
                    }
                }
            }
        }
        let beta = certify::beta_certificate(&g, BetaRequest::QuadraticSeparable).unwrap();
        assert_eq!(beta.beta, 0.5);
        for _ in 0..50 {
            let x = JointPoint::new(
                (0..2)
                    .map(|nu| DVector::from_fn(g.dims[nu], |_, _| rng.gen_range(-5.0..5.0)))
                    .collect(),
            );
            for nu in 0..2 {
                if g.int_counts[nu] == 0 {
                    continue;
                }
                let m = br::mixed_br(&g, nu, &x, DEFAULT_NODE_BUDGET).unwrap();
                let c = br::continuous_br(&g, nu, &x).unwrap();
                let gap = (m.point - c.point).norm();
                let bound = 0.5 * (g.int_counts[nu] as f64).sqrt();
                assert!(gap <= bound + 1e-9, "gap {gap} > {bound}");
            }
        }
    }
    pass(
        6,
        "mixed/continuous BR gap <= 0.5 sqrt(i) on 20 random separable games x 50 points",
    );
}

#[test]
fn criterion_07_existence_end_to_end() {
    let g2 = fixtures::example_2(0.3, 0.3, 0.1, 0.1);
    let rep = iterate::solve_two_phase(&g2, &gs(), None, &default_opts()).unwrap();
    assert!(rep.certified);
    assert_eq!(rep.solution().blocks[0][0], 0.0);
    assert_eq!(rep.solution().blocks[1][0], 0.0);
    let s2 = oracle::enumerate_equilibria(&g2, 1e-9, 1_000_000).unwrap();
    assert_eq!(s2.points.len(), 1);
    assert_eq!(
        (s2.points[0].blocks[0][0], s2.points[0].blocks[1][0]),
        (0.0, 0.0)
    );

    let g3 = fixtures::example_3(0.05);
    let rep3 = iterate::solve_two_phase(&g3, &gs(), None, &default_opts()).unwrap();
    assert!(!rep3.certified);
    assert!(!rep3.existence.unwrap().certified);
    let s3 = oracle::enumerate_equilibria(&g3, 1e-9, 1_000_000).unwrap();
    assert!(s3.is_empty());
    pass(
        7,
        "example 2 certified with S = {(0,0)}; example 3 uncertified with S empty",
    );
}

#[test]
fn criterion_08_oracle_equivalence_on_integer_games() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut converged_runs = 0;
    for trial in 0..30 {
        let g = random_dominant_game(&mut rng, 2, 1, &|d| d, 0.3);
        let set = oracle::enumerate_equilibria(&g, 1e-9, 20_000).unwrap();
        let upsilon = certify::condensed_matrix(&g).unwrap();
        let cert = match certify::find_dominating_weights(&upsilon) {
            WeightSearch::Found(c) => c,
            WeightSearch::NoWeights { .. } => unreachable!(),
        };
        let beta = certify::beta_auto(&g).unwrap().beta;
        let x0 = JointPoint::from_scalars(&[
            rng.gen_range(-5i64..=5) as f64,
            rng.gen_range(-5i64..=5) as f64,
        ]);
        let opts = IterateOptions {
            max_rounds: 200,
            ..Default::default()
        };
        let t = iterate::run_mixed(&g, &gs(), &x0, &opts).unwrap();
        let tail = t.last();
        if t.stop == StopReason::Converged {
            converged_runs += 1;
            let hit = set.points.iter().any(|s| s.sub(tail).flat_norm() < 1e-9);
            assert!(
                hit,
                "trial {trial}: converged endpoint missing from oracle set"
            );
        }
        let cluster = iterate::cluster_thm1(
            cert.alpha,
            beta,
            iterate::max_w_sqrt_i(&cert.w, &g.int_counts),
        );
        for s in &set.points {
            let d = block_norm(&cert.w, &s.sub(tail));
            assert!(
                d <= cluster + 1e-9,
                "trial {trial}: equilibrium {d} outside cluster {cluster}"
            );
        }
    }
    assert!(converged_runs > 0);
    pass(
        8,
        "oracle agrees with run_mixed endpoints and cluster containment on 30 games",
    );
}

#[test]
fn criterion_09_equilibria_near_the_relaxed_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..20 {
        // Integer player coupled to continuous players.
        let g = random_dominant_game(&mut rng, 2, 2, &|_| 0, 0.35);
        let mut g = g;
        g.int_counts[0] = 1;
        // Integer bounds must be integral for the beta certificate.
        g.boxes[0].lower[0] = -5.0;
        g.boxes[0].upper[0] = 5.0;
        let upsilon = certify::condensed_matrix(&g).unwrap();
        let cert = match certify::find_dominating_weights(&upsilon) {
            WeightSearch::Found(c) => c,
            WeightSearch::NoWeights { .. } => unreachable!(),
        };
        let beta = certify::beta_auto(&g).unwrap().beta;
        let set = oracle::enumerate_equilibria(&g, 1e-7, 20_000).unwrap();
        let x_bar = relaxed_to(&g, 1e-12);
        let radius = iterate::radius_thm4(
            cert.alpha,
            beta,
            iterate::max_w_sqrt_i(&cert.w, &g.int_counts),
        );
        for s in &set.points {
            let d = block_norm(&cert.w, &s.sub(&x_bar));
            assert!(d <= radius + 1e-9, "trial {trial}: {d} > {radius}");
        }
    }
    pass(
        9,
        "every enumerated equilibrium lies within the limit radius of x-bar (20 games)",
    );
}

#[test]
fn criterion_10_smart_building_desk_scale() {
    let params = BuildingParams::desk();
    let gamma = 1.001;
    let mut jacobi_nonconverged = 0usize;
    for seed in 0..50u64 {
        let g = building::generate_instance(&params, seed).unwrap();
        // (a) structural validity and certification.
        assert!(g.validate().is_empty(), "seed {seed}: invalid instance");
        let cert = building::certify_instance(&g).unwrap();
        let contraction = match &cert.weight_search {
            WeightSearch::Found(c) => c.clone(),
            WeightSearch::NoWeights { .. } => panic!("seed {seed}: not dominant"),
        };
        let beta = cert.beta.as_ref().expect("beta certificate").beta;

        // (d) the relaxed solve (procedure (ii) phase one) converges.
        let start = JointPoint::new(
            (0..g.n_players())
                .map(|nu| g.feasible_point(nu).unwrap())
                .collect(),
        );
        let opts = IterateOptions {
            max_rounds: 200,
            ..Default::default()
        };
        let relaxed = iterate::run_continuous(&g, &gs(), &start, &opts).unwrap();
        assert_eq!(
            relaxed.stop,
            StopReason::Converged,
            "seed {seed}: relaxed solve"
        );
        let x_bar = relaxed.last().clone();

        // Mixed runs from the rounded relaxed solution, both schedules.
        let mut rounded = x_bar.clone();
        for nu in 0..g.n_players() {
            for j in 0..g.int_counts[nu] {
                rounded.blocks[nu][j] = (rounded.blocks[nu][j] + 0.5).floor();
            }
        }
        let mixed_opts = IterateOptions {
            max_rounds: 40,
            ..Default::default()
        };
        for schedule in [Schedule::JacobiFull, Schedule::GaussSeidelCyclic] {
            let t = iterate::run_mixed(&g, &schedule, &rounded, &mixed_opts).unwrap();
            if t.stop == StopReason::Converged {
                // (b) converged runs verify as equilibria.
                let chk = oracle::verify_equilibrium(&g, t.last(), 1e-6).unwrap();
                assert!(
                    chk.is_equilibrium,
                    "seed {seed}: converged point fails verification"
                );
            } else if schedule == Schedule::JacobiFull {
                // (c) non-converged Jacobi traces stay in the certified
                // ball around x-bar after the iteration cap.
                jacobi_nonconverged += 1;
                let w = &contraction.w;
                let mwsi = iterate::max_w_sqrt_i(w, &g.int_counts);
                let dist0 = block_norm(w, &rounded.sub(&x_bar));
                let h = schedule.steps_per_round(g.n_players());
                let cap =
                    iterate::cap_thm4(gamma, contraction.alpha, beta, mwsi, dist0, h).unwrap() / h;
                let radius = iterate::radius_thm3(gamma, contraction.alpha, beta, mwsi).unwrap()
                    + iterate::radius_thm4(contraction.alpha, beta, mwsi);
                for (k, p) in t.points.iter().enumerate() {
                    if k >= cap.max(1) {
                        let d = block_norm(w, &p.sub(&x_bar));
                        assert!(
                            d <= radius + 1e-9,
                            "seed {seed}: step {k} at {d} > {radius}"
                        );
                    }
                }
            }
        }
    }
    pass(
        10,
        &format!(
            "50 desk instances: valid, certified, relaxed solves converged; \
             {jacobi_nonconverged} non-converged Jacobi run(s) stayed in the certified ball"
        ),
    );
}

#[test]
fn criterion_11_block_norm_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=4);
        let w = WeightVector((0..n).map(|_| rng.gen_range(0.1..5.0)).collect());
        let dims: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
        let rand_point = |rng: &mut ChaCha8Rng| {
            JointPoint::new(
                dims.iter()
                    .map(|&d| DVector::from_fn(d, |_, _| rng.gen_range(-10.0..10.0)))
                    .collect(),
            )
        };
        let x = rand_point(&mut rng);
        let y = rand_point(&mut rng);
        let a: f64 = rng.gen_range(-5.0..5.0);
        let sum = JointPoint::new(x.blocks.iter().zip(&y.blocks).map(|(p, q)| p + q).collect());
        assert!(block_norm(&w, &sum) <= block_norm(&w, &x) + block_norm(&w, &y) + 1e-12);
        let ax = JointPoint::new(x.blocks.iter().map(|b| b * a).collect());
        assert!((block_norm(&w, &ax) - a.abs() * block_norm(&w, &x)).abs() <= 1e-12);
        if block_norm(&w, &x) == 0.0 {
            assert!(x.blocks.iter().all(|b| b.norm() == 0.0));
        }
    }
    pass(
        11,
        "triangle inequality, homogeneity and definiteness on 1000 random tuples",
    );
}
