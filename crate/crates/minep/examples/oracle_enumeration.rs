//! Exhaustive equilibrium enumeration, independent of the solver:
//! walk every integer assignment, solve the restricted continuous
//! game, and verify each candidate by best responses.
//!
//! Run with: cargo run --example oracle_enumeration

use minep::{fixtures, oracle};

fn main() -> minep::Result<()> {
    for (label, game) in [
        ("two-player integer game", fixtures::example_1(0.1)),
        (
            "certifiable mixed game",
            fixtures::example_2(0.3, 0.3, 0.1, 0.1),
        ),
        ("equilibrium-free game", fixtures::example_3(0.05)),
    ] {
        let set = oracle::enumerate_equilibria(&game, 1e-9, 1_000_000)?;
        println!(
            "{label}: {} equilibria over {} integer assignment(s)",
            set.points.len(),
            set.assignments_checked
        );
        for p in &set.points {
            let coords: Vec<String> = p
                .blocks
                .iter()
                .flat_map(|b| b.iter().map(|v| format!("{v:.4}")))
                .collect();
            println!("  ({})", coords.join(", "));
        }
    }
    Ok(())
}
