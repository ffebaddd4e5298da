//! Minimum-cost edge-weight perturbations that force a chosen path to be the
//! shortest path between its endpoints.
//!
//! The main entry point is [`attack::pathperturb`], a constraint-generation
//! LP that adds one violating path per round until none remain. Two greedy
//! baselines, graph generators, edge-list IO and an experiment harness sit
//! alongside it.

pub mod attack;
pub mod error;
pub mod graph;
pub mod graphgen;
pub mod harness;
pub mod io;
pub mod lp;
pub mod oracle;

pub use attack::{
    apply_perturbation, greedy_first, greedy_min, pathperturb, run, verify_attack, Algorithm, AttackConfig,
    AttackResult, Verification,
};
pub use error::{Error, Result};
pub use graph::{path_length, EdgeId, Graph, GraphBuilder, NodeId, Path, PerturbationVector};
pub use oracle::constraint_oracle;
