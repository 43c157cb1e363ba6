//! Composite optimization around the proximal gradient mapping.
//!
//! * [`problem`]: oracle traits, the composite problem, and `G(x, t)`.
//! * [`functions`]: quadratic / logistic smooth parts and l1 / box terms.
//! * [`solvers`]: proximal gradient descent, FGM, and the accelerated scheme.
//! * [`certificates`]: numerical checks of the mapping inequalities and
//!   potential-function bounds.
//! * [`oracles`]: brute-force references for validation.
//! * [`fixture`], [`io`], [`cli`]: files and the command-line front end.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod cli;
pub mod error;
pub mod fixture;
pub mod functions;
pub mod hexfloat;
pub mod io;
pub mod oracles;
pub mod problem;
pub mod solvers;
pub mod tolerance;

pub use error::{Error, Result};
pub use problem::{
    pg_map, prox_apply, recover_subgradient, CompositeProblem, ProxOracle, Reference, SmoothOracle,
    StepRecord, Vector,
};
pub use tolerance::Tolerance;
