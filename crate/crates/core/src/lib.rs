//! Resilient consensus over time-varying digraphs with malicious
//! adversaries.
//!
//! The crate bundles:
//!
//! - [`digraph`]: simple directed graphs with totally ordered node ids and
//!   piecewise-constant switching schedules;
//! - [`robustness`]: exact (r,s)-robustness decision procedures, maximal
//!   robustness reporting, and a degree-guaranteed growth construction;
//! - [`protocols`]: the linear consensus update and the ARC-P
//!   extreme-value filter in discrete and continuous form;
//! - [`adversaries`]: threat scopes (F-total / F-local), canned malicious
//!   strategies, and an attack generator for non-robust topologies;
//! - [`engine`]: deterministic synchronous execution with safety and
//!   contraction instrumentation, CSV trace output;
//! - [`scenario`]: plain-text experiment descriptions, ready-made
//!   presets, and batch running.

pub mod adversaries;
pub mod digraph;
pub mod engine;
pub mod error;
pub mod protocols;
pub mod robustness;
pub mod scenario;

pub use error::{Error, Result};
