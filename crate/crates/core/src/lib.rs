//! Simulation engine for a multi-provider swarm drone delivery broker.
//!
//! A request flows through three stages:
//!
//! 1. [`pruning`]: providers that cannot carry the packages are filtered out,
//!    and the survivors are optionally cut down using charging-station density
//!    heatmaps of their partner charging companies.
//! 2. [`composition`]: every surviving provider's swarm is routed greedily over
//!    the skyway [`network`], accumulating perceived QoS (delivery time, energy,
//!    cost and an execution-time proxy).
//! 3. [`recommend`]: the QoS metrics act as weighted voters that rank the
//!    providers; several vote-count systems pick the recommended provider and the
//!    pick is scored against the consumer's expectation.
//!
//! [`harness`] strings the stages together over seeded scenarios and writes the
//! experiment tables.

pub mod composition;
pub mod domain;
pub mod energy;
pub mod error;
pub mod harness;
pub mod network;
pub mod pruning;
pub mod recommend;
pub mod seed;

pub use error::{Error, Result};
