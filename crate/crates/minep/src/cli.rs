//! Command-line interface. Every subcommand works on a built-in fixture
//! (`--fixture example-1` .. `example-6`) or a JSON game document
//! (`--game path`), and prints either human-readable text or `--json`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::building::{self, BuildingParams};
use crate::certify::{self, WeightSearch};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::game::{JointPoint, QuadGame};
use crate::io;
use crate::iterate::{self, IterateOptions, Schedule, StopReason};
use crate::oracle;

#[derive(Debug, Parser)]
#[command(
    name = "minep",
    version,
    about = "Mixed-integer Nash equilibrium solver and certification toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    /// Built-in fixture id (example-1 .. example-6).
    #[arg(long, conflicts_with = "game")]
    pub fixture: Option<String>,
    /// Path to a JSON game document.
    #[arg(long)]
    pub game: Option<PathBuf>,
}

impl GameArgs {
    fn load(&self) -> Result<(QuadGame, String)> {
        match (&self.fixture, &self.game) {
            (Some(id), None) => {
                let g = fixtures::by_name(id).ok_or_else(|| {
                    Error::Parameter(format!(
                        "unknown fixture {id:?}; choose one of {}",
                        fixtures::FIXTURE_IDS.join(", ")
                    ))
                })?;
                Ok((g, id.clone()))
            }
            (None, Some(path)) => {
                let g = io::load_game(path)?;
                Ok((g, path.display().to_string()))
            }
            _ => Err(Error::Parameter(
                "pass exactly one of --fixture or --game".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScheduleArg {
    Jacobi,
    #[value(alias = "gs")]
    GaussSeidel,
}

impl ScheduleArg {
    fn schedule(self) -> Schedule {
        match self {
            ScheduleArg::Jacobi => Schedule::JacobiFull,
            ScheduleArg::GaussSeidel => Schedule::GaussSeidelCyclic,
        }
    }

    fn label(self) -> &'static str {
        match self {
            ScheduleArg::Jacobi => "jacobi",
            ScheduleArg::GaussSeidel => "gauss-seidel",
        }
    }
}

#[derive(Debug, Args)]
pub struct IterArgs {
    #[arg(long, value_enum, default_value = "gauss-seidel")]
    pub schedule: ScheduleArg,
    /// Best-response inexactness (0 = exact).
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 60)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub step_tol: f64,
}

impl IterArgs {
    fn options(&self) -> IterateOptions {
        IterateOptions {
            epsilon: self.epsilon,
            max_rounds: self.max_iter,
            step_tol: self.step_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScaleArg {
    Desk,
    Full,
}

impl ScaleArg {
    fn params(self) -> BuildingParams {
        match self {
            ScaleArg::Desk => BuildingParams::desk(),
            ScaleArg::Full => BuildingParams::full_scale(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a game's structural invariants.
    Validate(GameArgs),
    /// Contraction, monotonicity and discrete-gap certificates.
    Certify {
        #[command(flatten)]
        game: GameArgs,
        /// Target modulus for the perturbations when dominance fails.
        #[arg(long, default_value_t = 0.5)]
        alpha_bar: f64,
    },
    /// Best-response iteration on the continuous relaxation.
    SolveRelaxed {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        iter: IterArgs,
    },
    /// Two-phase solve: relax, certify existence, fix or fall back.
    Solve {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        iter: IterArgs,
    },
    /// A-priori convergence radii and iteration caps.
    Bounds {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        iter: IterArgs,
        #[arg(long, default_value_t = 1.001)]
        gamma: f64,
    },
    /// Existence/uniqueness test around the relaxed solution.
    Existence {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        iter: IterArgs,
    },
    /// Exhaustive equilibrium enumeration (independent of the solver).
    Oracle {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = oracle::DEFAULT_ORACLE_BUDGET)]
        budget: usize,
    },
    /// Generate a smart-building instance as a JSON game document.
    SmartbuildGen {
        #[arg(long, value_enum, default_value = "desk")]
        scale: ScaleArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify and benchmark a smart-building instance (CSV by default).
    SmartbuildRun {
        #[arg(long, value_enum, default_value = "desk")]
        scale: ScaleArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 80)]
        max_iter: usize,
    },
}

fn fmt_point(x: &JointPoint) -> String {
    let blocks: Vec<String> = x
        .blocks
        .iter()
        .map(|b| {
            let coords: Vec<String> = b.iter().map(|v| format!("{v:.6}")).collect();
            coords.join(", ")
        })
        .collect();
    format!("[{}]", blocks.join(" | "))
}

fn point_json(x: &JointPoint) -> serde_json::Value {
    json!(x
        .blocks
        .iter()
        .map(|b| b.iter().copied().collect::<Vec<f64>>())
        .collect::<Vec<_>>())
}

fn stop_label(stop: &StopReason) -> String {
    match stop {
        StopReason::Converged => "converged".into(),
        StopReason::MaxIter => "max-iterations".into(),
        StopReason::CycleDetected { start, period } => {
            format!("cycle (start {start}, period {period})")
        }
    }
}

fn relaxed_solution(game: &QuadGame, opts: &IterateOptions) -> Result<JointPoint> {
    let start = JointPoint::new(
        (0..game.n_players())
            .map(|nu| game.feasible_point(nu).ok_or(Error::Infeasible(nu)))
            .collect::<Result<Vec<_>>>()?,
    );
    let trace = iterate::run_continuous(game, &Schedule::GaussSeidelCyclic, &start, opts)?;
    Ok(trace.last().clone())
}

/// Runs one parsed command and returns its printable output.
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Validate(args) => {
            let (game, name) = args.load()?;
            let diags = game.validate();
            if cli.json {
                let list: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
                Ok(serde_json::to_string_pretty(&json!({
                    "instance": name,
                    "players": game.n_players(),
                    "valid": diags.is_empty(),
                    "diagnostics": list,
                }))?)
            } else if diags.is_empty() {
                Ok(format!("{name}: valid ({} players)", game.n_players()))
            } else {
                let mut out = format!("{name}: {} problem(s)\n", diags.len());
                for d in &diags {
                    out.push_str(&format!("  - {d}\n"));
                }
                Ok(out.trim_end().to_string())
            }
        }

        Command::Certify { game, alpha_bar } => {
            let (game, name) = game.load()?;
            let upsilon = certify::condensed_matrix(&game)?;
            let mu = certify::strong_monotonicity(&game);
            let search = certify::find_dominating_weights(&upsilon);
            let beta = certify::beta_auto(&game);
            let perturbed = match &search {
                WeightSearch::NoWeights { .. } if mu > 0.0 => {
                    let x_bar = JointPoint::zeros(&game);
                    let p = certify::perturb_curvature(&game, *alpha_bar, &x_bar)?;
                    match certify::find_dominating_weights(&certify::condensed_matrix(&p)?) {
                        WeightSearch::Found(c) => Some(c.alpha),
                        WeightSearch::NoWeights { .. } => None,
                    }
                }
                _ => None,
            };
            if cli.json {
                let (dominant, alpha, weights, rho) = match &search {
                    WeightSearch::Found(c) => (true, Some(c.alpha), Some(c.w.0.clone()), None),
                    WeightSearch::NoWeights { spectral_radius } => {
                        (false, None, None, Some(*spectral_radius))
                    }
                };
                Ok(serde_json::to_string_pretty(&json!({
                    "instance": name,
                    "condensed": upsilon.entries,
                    "monotonicity": mu,
                    "dominant": dominant,
                    "alpha": alpha,
                    "weights": weights,
                    "spectral_radius": rho,
                    "beta": beta.as_ref().ok().map(|b| b.beta),
                    "beta_basis": beta.as_ref().ok().map(|b| format!("{:?}", b.basis)),
                    "perturbed_alpha": perturbed,
                }))?)
            } else {
                let mut out = format!("{name}: monotonicity constant {mu:.6}\n");
                match &search {
                    WeightSearch::Found(c) => {
                        let w: Vec<String> = c.w.0.iter().map(|v| format!("{v:.4}")).collect();
                        out.push_str(&format!(
                            "contraction: alpha = {:.6} with weights [{}]\n",
                            c.alpha,
                            w.join(", ")
                        ));
                    }
                    WeightSearch::NoWeights { spectral_radius } => {
                        out.push_str(&format!(
                            "contraction: no dominating weights (spectral radius {spectral_radius:.6})\n"
                        ));
                        if let Some(a) = perturbed {
                            out.push_str(&format!(
                                "  curvature perturbation at alpha_bar {alpha_bar} gives alpha = {a:.6}\n"
                            ));
                        }
                    }
                }
                match &beta {
                    Ok(b) => out.push_str(&format!(
                        "discrete gap: beta = {} ({:?})\n",
                        b.beta, b.basis
                    )),
                    Err(e) => out.push_str(&format!("discrete gap: unavailable ({e})\n")),
                }
                Ok(out.trim_end().to_string())
            }
        }

        Command::SolveRelaxed { game, iter } => {
            let (game, name) = game.load()?;
            let opts = iter.options();
            let start = JointPoint::new(
                (0..game.n_players())
                    .map(|nu| game.feasible_point(nu).ok_or(Error::Infeasible(nu)))
                    .collect::<Result<Vec<_>>>()?,
            );
            let trace = iterate::run_continuous(&game, &iter.schedule.schedule(), &start, &opts)?;
            if cli.json {
                Ok(serde_json::to_string_pretty(&json!({
                    "instance": name,
                    "schedule": iter.schedule.label(),
                    "iterations": trace.rounds(),
                    "stop": stop_label(&trace.stop),
                    "point": point_json(trace.last()),
                }))?)
            } else {
                Ok(format!(
                    "{name}: {} after {} round(s) [{}]\n  x = {}",
                    stop_label(&trace.stop),
                    trace.rounds(),
                    iter.schedule.label(),
                    fmt_point(trace.last())
                ))
            }
        }

        Command::Solve { game, iter } => {
            let (game, name) = game.load()?;
            let opts = iter.options();
            let report = iterate::solve_two_phase(&game, &iter.schedule.schedule(), None, &opts)?;
            if cli.json {
                Ok(serde_json::to_string_pretty(&json!({
                    "instance": name,
                    "schedule": iter.schedule.label(),
                    "certified": report.certified,
                    "relaxed_point": point_json(report.relaxed.last()),
                    "relaxed_iterations": report.relaxed.rounds(),
                    "final_point": point_json(report.solution()),
                    "final_iterations": report.final_trace.rounds(),
                    "final_stop": stop_label(&report.final_trace.stop),
                    "alpha": report.contraction.as_ref().map(|c| c.alpha),
                    "beta": report.beta.as_ref().map(|b| b.beta),
                    "existence_candidates": report.existence.as_ref().map(|e| e.candidates_found.clone()),
                }))?)
            } else {
                let mut out = format!(
                    "{name}: relaxed solution {} after {} round(s)\n",
                    fmt_point(report.relaxed.last()),
                    report.relaxed.rounds()
                );
                match &report.existence {
                    Some(e) if e.certified => out.push_str(&format!(
                        "existence certified (radius {:.6}); integers fixed exactly\n",
                        e.radius_used
                    )),
                    Some(e) => out.push_str(&format!(
                        "existence not certified (candidates per player: {:?}); mixed fallback\n",
                        e.candidates_found
                    )),
                    None => out.push_str("certificates unavailable; mixed fallback\n"),
                }
                out.push_str(&format!(
                    "final: {} after {} round(s)\n  x = {}",
                    stop_label(&report.final_trace.stop),
                    report.final_trace.rounds(),
                    fmt_point(report.solution())
                ));
                Ok(out)
            }
        }

        Command::Bounds { game, iter, gamma } => {
            let (game, name) = game.load()?;
            let opts = iter.options();
            let x_bar = relaxed_solution(&game, &opts)?;
            let start = JointPoint::new(
                (0..game.n_players())
                    .map(|nu| game.feasible_point(nu).ok_or(Error::Infeasible(nu)))
                    .collect::<Result<Vec<_>>>()?,
            );
            let rep = iterate::bound_report(
                &game,
                &iter.schedule.schedule(),
                &start,
                &x_bar,
                *gamma,
                iter.epsilon,
            )?;
            if cli.json {
                let mut v = serde_json::to_value(&rep)?;
                v["instance"] = json!(name);
                Ok(serde_json::to_string_pretty(&v)?)
            } else {
                let mut out = format!(
                    "{name}: alpha {:.6}, beta {} ({:?}), gamma {}, h {}\n",
                    rep.alpha, rep.beta, rep.beta_basis, rep.gamma, rep.h
                );
                out.push_str(&format!(
                    "exact mixed:   radius {:.6} (cluster {:.6}), cap {} inner steps\n",
                    rep.radius_thm1, rep.cluster_thm1, rep.cap_thm1
                ));
                out.push_str(&format!(
                    "near equilib.: radius {:.6} (limit {:.6}), cap {} inner steps\n",
                    rep.radius_thm3, rep.radius_thm4, rep.cap_thm4
                ));
                out.push_str(&format!(
                    "inexact:       radius {:.6} (cluster {:.6})",
                    rep.radius_inexact, rep.cluster_inexact
                ));
                if let Some(k) = rep.cap_thm2 {
                    out.push_str(&format!("\ncontinuous cap to epsilon: {k} inner steps"));
                }
                Ok(out)
            }
        }

        Command::Existence { game, iter } => {
            let (game, name) = game.load()?;
            let opts = iter.options();
            let x_bar = relaxed_solution(&game, &opts)?;
            let upsilon = certify::condensed_matrix(&game)?;
            let contraction = match certify::find_dominating_weights(&upsilon) {
                WeightSearch::Found(c) => c,
                WeightSearch::NoWeights { spectral_radius } => {
                    return Err(Error::Structure(format!(
                        "no dominating weights (spectral radius {spectral_radius:.6})"
                    )))
                }
            };
            let beta = certify::beta_auto(&game)?;
            let cert = certify::existence_certificate(
                &game,
                &x_bar,
                contraction.alpha,
                beta.beta,
                &contraction.w,
                1_000_000,
            )?;
            if cli.json {
                let mut v = serde_json::to_value(&cert)?;
                v["instance"] = json!(name);
                v["relaxed_point"] = point_json(&x_bar);
                Ok(serde_json::to_string_pretty(&v)?)
            } else {
                let mut out = format!(
                    "{name}: relaxed solution {}, radius {:.6}\n",
                    fmt_point(&x_bar),
                    cert.radius_used
                );
                out.push_str(&format!(
                    "candidates per player: {:?}\n",
                    cert.candidates_found
                ));
                if cert.certified {
                    out.push_str(&format!(
                        "certified: unique equilibrium with integers {:?}",
                        cert.fixed_integers.as_ref().unwrap()
                    ));
                } else {
                    out.push_str("not certified: existence cannot be concluded");
                }
                Ok(out)
            }
        }

        Command::Oracle { game, tol, budget } => {
            let (game, name) = game.load()?;
            let set = oracle::enumerate_equilibria(&game, *tol, *budget)?;
            if cli.json {
                Ok(serde_json::to_string_pretty(&json!({
                    "instance": name,
                    "assignments_checked": set.assignments_checked,
                    "equilibria": set.points.iter().map(point_json).collect::<Vec<_>>(),
                }))?)
            } else {
                let mut out = format!(
                    "{name}: {} equilibria in {} assignment(s)\n",
                    set.points.len(),
                    set.assignments_checked
                );
                for p in &set.points {
                    out.push_str(&format!("  {}\n", fmt_point(p)));
                }
                Ok(out.trim_end().to_string())
            }
        }

        Command::SmartbuildGen { scale, seed, out } => {
            let params = scale.params();
            let game = building::generate_instance(&params, *seed)?;
            match out {
                Some(path) => {
                    io::save_game(path, &game)?;
                    Ok(format!(
                        "wrote {} ({} players, {} variables each, {} integer)",
                        path.display(),
                        game.n_players(),
                        game.dims[0],
                        game.int_counts[0]
                    ))
                }
                None => {
                    let doc = io::GameDocument::from_game(&game);
                    Ok(serde_json::to_string_pretty(&doc)?)
                }
            }
        }

        Command::SmartbuildRun {
            scale,
            seed,
            max_iter,
        } => {
            let params = scale.params();
            let game = building::generate_instance(&params, *seed)?;
            let label = format!(
                "smartbuild-{}-{seed}",
                match scale {
                    ScaleArg::Desk => "desk",
                    ScaleArg::Full => "full",
                }
            );
            let opts = IterateOptions {
                max_rounds: *max_iter,
                ..Default::default()
            };
            let report = building::run_comparison(&game, &label, &opts)?;
            if cli.json {
                Ok(serde_json::to_string_pretty(&report)?)
            } else {
                let mut out = String::from(
                    "instance,procedure,schedule,iterations,time_ms,converged,radius,contained\n",
                );
                for r in &report.rows {
                    out.push_str(&format!(
                        "{},{},{},{},{:.3},{},{},{}\n",
                        r.instance,
                        r.procedure,
                        r.schedule,
                        r.iterations,
                        r.time_ms,
                        r.converged,
                        r.radius.map(|v| format!("{v:.6}")).unwrap_or_default(),
                        r.contained.map(|v| v.to_string()).unwrap_or_default(),
                    ));
                }
                Ok(out.trim_end().to_string())
            }
        }
    }
}
