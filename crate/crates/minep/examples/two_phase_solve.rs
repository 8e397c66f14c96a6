//! Two-phase solve: run the continuous relaxation, certify existence
//! and uniqueness of a nearby mixed-integer equilibrium, then either
//! fix the integers exactly or fall back to the mixed iteration.
//!
//! Run with: cargo run --example two_phase_solve

use minep::fixtures;
use minep::iterate::{self, IterateOptions, Schedule};

fn main() -> minep::Result<()> {
    for (label, game) in [
        ("certifiable", fixtures::example_2(0.3, 0.3, 0.1, 0.1)),
        ("uncertifiable", fixtures::example_3(0.05)),
    ] {
        let report = iterate::solve_two_phase(
            &game,
            &Schedule::GaussSeidelCyclic,
            None,
            &IterateOptions::default(),
        )?;
        println!("{label} game:");
        let relaxed = report.relaxed.last();
        println!(
            "  relaxed solution ({:.4}, {:.4}) after {} round(s)",
            relaxed.blocks[0][0],
            relaxed.blocks[1][0],
            report.relaxed.rounds()
        );
        match &report.existence {
            Some(e) if e.certified => println!(
                "  existence certified within radius {:.4}; integers {:?}",
                e.radius_used,
                e.fixed_integers.as_ref().unwrap()
            ),
            Some(e) => println!(
                "  not certified ({:?} candidates per player); mixed fallback",
                e.candidates_found
            ),
            None => println!("  certificates unavailable; mixed fallback"),
        }
        let x = report.solution();
        println!(
            "  final point ({:.4}, {:.4}), stop: {:?}\n",
            x.blocks[0][0], x.blocks[1][0], report.final_trace.stop
        );
    }
    Ok(())
}
