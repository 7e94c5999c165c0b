//! Conditional Markov Chain Search.
//!
//! A configuration is an ordered component list plus two row-stochastic
//! matrices: `msucc` picks the next component after a strict improvement,
//! `mfail` after anything else. Standard metaheuristics (ILS, VNS, operator
//! probabilities, static MCHH) are special cases built by the constructors
//! in [`builders`].

pub mod builders;
mod config;
mod polish;
mod run;
pub mod shipped;

pub use builders::{make_ils, make_mchh, make_op_prob, make_uniform, make_vns};
pub(crate) use config::self_loop_prohibited;
pub use config::{is_k_row, validate_config, CmcsConfig, Matrix, Violation, ROUNDING_TOLERANCE};
pub use polish::{polish, POLISH_SEQUENCE};
pub use run::{roulette, run, run_from, RunParams, RunResult, Termination};
