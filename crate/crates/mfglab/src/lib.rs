//! Finite mean-field games.
//!
//! Exact population operators, values and exploitability; N-player Monte
//! Carlo simulation with exact small-N oracles; the two lower-bound
//! counterexample games; generalized circuits and their compilation into
//! mean-field instances; and the solvers needed to exercise all of it.

pub mod corpus;
pub mod counterexamples;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod expr;
pub mod format;
pub mod game;
pub mod gcircuit;
pub mod mfg;
pub mod reductions;
pub mod sim;
pub mod solvers;

pub use error::{Error, Result};
pub use expr::{omega, p_brittle, parse_expr, u_clamp, Expr};
pub use game::{Distribution, FhMfg, Flow, Kernel, Policy, PolicySeq, Rewards, StatMfg};
