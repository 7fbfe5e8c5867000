//! Sensor placement for networked control systems under stealthy
//! data-injection attacks.
//!
//! The pipeline is: build a [`graph::Network`], tune its self-loop gains
//! ([`dynamics::tune_self_loops`]), enumerate admissible monitor sets
//! ([`graph::enumerate_dominating_sets`]), and solve the defender/attacker
//! game ([`game::solve_stackelberg`]). The [`oracle`] module holds slow
//! independent checks of the fast paths.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod game;
pub mod graph;
pub mod impact;
pub mod oracle;
pub mod poly;
pub mod report;

pub use error::{Error, GraphError, Result};
