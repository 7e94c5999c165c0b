//! Solver library for the Bipartite Boolean Quadratic Programming Problem
//! (BBQP): maximise `f(x, y) = xᵀQy + cx + dy` over binary `x ∈ {0,1}ᵐ`,
//! `y ∈ {0,1}ⁿ`.
//!
//! The crate is organised bottom-up:
//!
//! - [`instance`] and [`solution`]: problem data and the incremental solution
//!   representation with cached row/column gains.
//! - [`generator`]: the five benchmark instance families and the
//!   degree-constrained random bipartite graph generator behind them.
//! - [`components`]: the nine solution-modifying operators (hill climbers and
//!   mutations).
//! - [`engine`]: Conditional Markov Chain Search (CMCS) configurations, the
//!   executor, its special-case constructors and the polishing pass.
//! - [`tuner`]: offline configuration of CMCS (gap objective, brute force for
//!   VNS / operator probabilities, evolutionary search for k-row matrices) and
//!   the best-known registry.

pub mod components;
pub mod engine;
pub mod error;
pub mod generator;
pub mod instance;
pub mod seed;
pub mod solution;
pub mod tuner;

pub use components::{ApplyOutcome, ComponentKind};
pub use engine::{CmcsConfig, RunParams, RunResult, Termination};
pub use error::{BbqpError, Result};
pub use instance::Family;
pub use instance::BbqpInstance;
pub use solution::Solution;
