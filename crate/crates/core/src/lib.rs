//! Control stack for a three-leaf soft robotic hat, with a deterministic
//! plant model and a scenario harness.
//!
//! The central behavior engine turns debounced perception summaries and
//! wearer overrides into command phases for two devolved subsystems: a
//! cable drive that homes, releases and waves each leaf, and a pneumatic
//! drive that regulates leaf pressure. Commands and telemetry cross a framed
//! serial protocol. [`sim::run`] wires everything to the [`plant`] model at
//! a fixed control rate and emits a per-tick [`trace`].

pub mod behavior;
pub mod cable;
pub mod config;
pub mod leaf;
pub mod perception;
pub mod plant;
pub mod pneumatics;
pub mod protocol;
pub mod scenario;
pub mod sim;
pub mod step_response;
pub mod fuzz;
pub mod trace;

pub use config::Config;
pub use leaf::{LeafSet, PerLeaf, NUM_LEAVES};
