//! Smart-building demand response as a mixed-integer Nash game:
//! generate a seeded instance, certify it, and compare the two solve
//! procedures under both schedules.
//!
//! Run with: cargo run --release --example smart_building

use minep::building::{self, BuildingParams};
use minep::certify::WeightSearch;
use minep::iterate::IterateOptions;

fn main() -> minep::Result<()> {
    let params = BuildingParams::desk();
    let game = building::generate_instance(&params, 7)?;
    println!(
        "instance: {} buildings, horizon {}, {} variables per player ({} integer)",
        game.n_players(),
        params.horizon,
        game.dims[0],
        game.int_counts[0]
    );
    assert!(game.validate().is_empty());

    let cert = building::certify_instance(&game)?;
    println!("monotonicity constant: {:.4}", cert.monotonicity);
    match &cert.weight_search {
        WeightSearch::Found(c) => println!("contraction modulus: {:.4}", c.alpha),
        WeightSearch::NoWeights { spectral_radius } => {
            println!("not dominant (spectral radius {spectral_radius:.4})");
            if let Some(a) = cert.perturbed_alpha {
                println!("curvature perturbation restores alpha = {a:.4}");
            }
        }
    }
    if let Some(b) = &cert.beta {
        println!("discrete gap beta = {:.4} ({:?})", b.beta, b.basis);
    }

    let opts = IterateOptions {
        max_rounds: 80,
        ..Default::default()
    };
    let report = building::run_comparison(&game, "desk-7", &opts)?;
    println!("\ninstance,procedure,schedule,iterations,time_ms,converged,radius,contained");
    for r in &report.rows {
        println!(
            "{},{},{},{},{:.2},{},{},{}",
            r.instance,
            r.procedure,
            r.schedule,
            r.iterations,
            r.time_ms,
            r.converged,
            r.radius.map(|v| format!("{v:.4}")).unwrap_or_default(),
            r.contained.map(|v| v.to_string()).unwrap_or_default()
        );
    }
    Ok(())
}
