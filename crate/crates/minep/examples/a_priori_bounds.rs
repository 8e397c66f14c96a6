//! A-priori convergence radii and iteration caps computed before
//! running a single best-response step, then checked against an
//! actual run.
//!
//! Run with: cargo run --example a_priori_bounds

use minep::fixtures;
use minep::game::{block_norm, JointPoint};
use minep::iterate::{self, IterateOptions, Schedule};

fn main() -> minep::Result<()> {
    let g = fixtures::example_2(0.3, 0.3, 0.1, 0.1);
    let schedule = Schedule::GaussSeidelCyclic;
    let opts = IterateOptions::default();

    // High-accuracy relaxed solution used as the reference point.
    let start = JointPoint::from_scalars(&[1.0, 1.0]);
    let long = IterateOptions {
        step_tol: 1e-13,
        max_rounds: 10_000,
        ..Default::default()
    };
    let x_bar = iterate::run_continuous(&g, &schedule, &start, &long)?
        .last()
        .clone();

    let rep = iterate::bound_report(&g, &schedule, &start, &x_bar, 1.05, 0.0)?;
    println!(
        "alpha = {:.4}, beta = {} ({:?}), h = {}",
        rep.alpha, rep.beta, rep.beta_basis, rep.h
    );
    println!(
        "exact mixed:     radius {:.4}, cluster {:.4}, cap {} inner steps",
        rep.radius_thm1, rep.cluster_thm1, rep.cap_thm1
    );
    println!(
        "near equilibria: radius {:.4}, limit {:.4}, cap {} inner steps",
        rep.radius_thm3, rep.radius_thm4, rep.cap_thm4
    );
    println!(
        "inexact:         radius {:.4}, cluster {:.4}",
        rep.radius_inexact, rep.cluster_inexact
    );

    // Verify the mixed iteration ends up inside the cluster radius.
    let upsilon = minep::certify::condensed_matrix(&g)?;
    let w = match minep::certify::find_dominating_weights(&upsilon) {
        minep::certify::WeightSearch::Found(c) => c.w,
        minep::certify::WeightSearch::NoWeights { .. } => unreachable!(),
    };
    let trace = iterate::run_mixed(&g, &schedule, &start, &opts)?;
    let dist = block_norm(&w, &trace.last().sub(&x_bar));
    println!(
        "run stopped after {} inner step(s): distance to relaxed solution {:.4} <= {:.4}",
        trace.steps(),
        dist,
        rep.cluster_thm1
    );
    Ok(())
}
