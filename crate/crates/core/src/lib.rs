//! Learned link, MCS and resource selection for virtualized RANs with several radio links.
//!
//! A differential semi-gradient SARSA agent with hashed tile coding picks a
//! `(link, MCS, resource amount)` action for every mobile terminal once per
//! decision period. A per-link Pareto block refines the greedy choices so the
//! resources granted on a link never exceed its capacity. The [`env`] module
//! simulates the slotted radio access network the agent controls, and
//! [`harness`] drives scenario runs and writes metrics.

// Parameter checks are written `!(x > 0.0)` on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod baselines;
pub mod domain;
pub mod env;
pub mod error;
pub mod harness;
pub mod pareto;
pub mod tiles;

pub use error::{Error, Result};
