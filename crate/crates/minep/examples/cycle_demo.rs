//! The classic failure mode of best-response iterations on integer
//! variables: a two-player game whose Gauss-Seidel sweep enters a
//! 4-cycle around the unique equilibrium, which the verifier and the
//! a-priori limit radius still pin down exactly.
//!
//! Run with: cargo run --example cycle_demo

use minep::certify::{self, WeightSearch};
use minep::game::{block_norm, JointPoint};
use minep::iterate::{self, IterateOptions, Schedule, StopReason};
use minep::{fixtures, oracle};

fn main() -> minep::Result<()> {
    let g = fixtures::example_1(0.1);
    let x0 = JointPoint::from_scalars(&[-1.0, 1.0]);
    let trace = iterate::run_mixed(
        &g,
        &Schedule::GaussSeidelCyclic,
        &x0,
        &IterateOptions::default(),
    )?;

    match trace.stop {
        StopReason::CycleDetected { start, period } => {
            println!("cycle of period {period} detected from inner step {start}:");
            for p in &trace.points[start..start + period] {
                println!("  ({:+.0}, {:+.0})", p.blocks[0][0], p.blocks[1][0]);
            }
        }
        other => println!("unexpected stop: {other:?}"),
    }

    // None of the cycle points is an equilibrium; the origin is.
    for pt in [(-1.0, 1.0), (0.0, 0.0)] {
        let p = JointPoint::from_scalars(&[pt.0, pt.1]);
        let chk = oracle::verify_equilibrium(&g, &p, 1e-9)?;
        println!(
            "({:+.0}, {:+.0}) equilibrium: {}",
            pt.0, pt.1, chk.is_equilibrium
        );
    }

    // The whole cycle stays inside the certified limit radius around
    // the relaxed solution (the origin).
    let upsilon = certify::condensed_matrix(&g)?;
    if let WeightSearch::Found(c) = certify::find_dominating_weights(&upsilon) {
        let radius = iterate::radius_thm4(c.alpha, 0.5, iterate::max_w_sqrt_i(&c.w, &g.int_counts));
        let origin = JointPoint::from_scalars(&[0.0, 0.0]);
        let worst = trace
            .points
            .iter()
            .map(|p| block_norm(&c.w, &p.sub(&origin)))
            .fold(0.0, f64::max);
        println!("limit radius {radius:.4}; worst iterate distance {worst:.4}");
    }
    Ok(())
}
