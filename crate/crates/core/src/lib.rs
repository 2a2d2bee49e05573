//! Models, simulation, measurement and bias audit of FIFO news feeds.
//!
//! - [`model`]: closed-form FIFO visibility and occupancy, the unfiltered
//!   baseline, a Markov-chain oracle, and timer-based (TTL) feeds.
//! - [`sim`]: discrete-event simulator of Poisson publishers, per-user
//!   filtering and periodic snapshots.
//! - [`metrics`]: effective rates, occupancy, visibility and occupancy-vs-K
//!   curves measured from snapshots.
//! - [`bias`]: model-predicted occupancy, bias against the unfiltered
//!   baseline with bootstrap intervals, and the measured-vs-model scatter.
//! - [`ingest`]: file formats and synthetic dataset generation.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bias;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod sim;
mod types;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
pub use types::{BotId, PostId, PostRecord, PublisherId, Snapshot, SnapshotEntry, SnapshotSet, Timestamp};

/// Feed size used when none is given: the top position only.
pub const DEFAULT_K: u32 = 1;
