//! Solver and certification toolkit for quadratic Nash equilibrium
//! problems with mixed-integer strategies.
//!
//! The central objects are [`game::QuadGame`] (the problem data),
//! the certificates in [`certify`] (contraction modulus, discrete-gap
//! constant, existence around the relaxed solution), the best-response
//! solvers in [`br`], and the iteration engine with its a-priori bounds
//! in [`iterate`]. [`oracle`] cross-checks everything by enumeration,
//! [`building`] generates the smart-building experiment instances, and
//! [`io`]/[`cli`] handle JSON documents and the command line.
//!
//! See the `examples/` directory for end-to-end usage.

pub mod br;
pub mod building;
pub mod certify;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod io;
pub mod iterate;
pub mod linalg;
pub mod oracle;
pub mod qp;

pub use error::{Error, Result};
pub use game::{block_norm, BoxBounds, JointPoint, LinearSystem, QuadGame, WeightVector};
