//! Certification walkthrough: condensed matrix, dominating weights,
//! monotonicity, discrete-gap constant, and perturbation repair.
//!
//! Run with: cargo run --example certify_game

use minep::certify::{self, WeightSearch};
use minep::fixtures;
use minep::game::JointPoint;

fn main() -> minep::Result<()> {
    // A dominant two-player game: weights exist directly.
    let g = fixtures::example_1(0.1);
    let upsilon = certify::condensed_matrix(&g)?;
    println!("condensed matrix: {:?}", upsilon.entries);
    match certify::find_dominating_weights(&upsilon) {
        WeightSearch::Found(c) => {
            println!(
                "contraction modulus alpha = {:.4} with weights {:?}",
                c.alpha, c.w.0
            )
        }
        WeightSearch::NoWeights { spectral_radius } => {
            println!("no weights (spectral radius {spectral_radius:.4})")
        }
    }
    let beta = certify::beta_auto(&g)?;
    println!(
        "discrete gap beta = {} via {:?} basis\n",
        beta.beta, beta.basis
    );

    // A strongly monotone game whose condensed matrix is NOT dominant:
    // both perturbations restore a target modulus of 0.5.
    let g = fixtures::example_4();
    let mu = certify::strong_monotonicity(&g);
    let upsilon = certify::condensed_matrix(&g)?;
    match certify::find_dominating_weights(&upsilon) {
        WeightSearch::Found(_) => unreachable!(),
        WeightSearch::NoWeights { spectral_radius } => {
            println!("three-player game: mu = {mu:.4}, spectral radius {spectral_radius:.4} >= 1")
        }
    }
    let x_bar = JointPoint::zeros(&g);
    for (label, perturb) in [
        ("proximal", certify::perturb_proximal as fn(_, _, _) -> _),
        ("curvature", certify::perturb_curvature as fn(_, _, _) -> _),
    ] {
        let p = perturb(&g, 0.5, &x_bar)?;
        let u = certify::condensed_matrix(&p)?;
        if let WeightSearch::Found(c) = certify::find_dominating_weights(&u) {
            println!("  {label} perturbation at 0.5: alpha = {:.4}", c.alpha);
        }
    }
    Ok(())
}
