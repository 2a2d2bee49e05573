//! Model-based bias of a filtered feed against the unfiltered baseline.
//!
//! `N^(m)` plugs measured effective rates into the FIFO occupancy,
//! `N^(m)ⱼ = λ̃ⱼ K / Σ λ̃`, and `N^(u)` does the same with creation rates
//! estimated from the publisher catalog. The bias is `b = N^(m) − N^(u)`.

mod bootstrap;
mod scatter;

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub use bootstrap::{bias_report, bootstrap_bias, percentile, BiasReport, BiasRow, BootstrapConfig};
pub use scatter::{validation_scatter, ScatterRow, ScatterTable};

use crate::error::{Error, Result};
use crate::model::{unfiltered_occupancy, CreationRates};
use crate::types::{PostRecord, PublisherId, Snapshot, SnapshotSet};

/// Posts per publisher in a catalog.
pub fn catalog_counts(catalog: &[PostRecord]) -> Result<BTreeMap<PublisherId, u64>> {
    if catalog.is_empty() {
        return Err(Error::domain("catalog is empty"));
    }
    let mut counts = BTreeMap::new();
    for post in catalog {
        *counts.entry(post.publisher_id.clone()).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Creation rates estimated as posts per publisher over the catalog window.
///
/// The time scale cancels in every share-based quantity, so raw counts are used.
pub fn creation_rates_from_catalog(catalog: &[PostRecord]) -> Result<CreationRates> {
    CreationRates::new(catalog_counts(catalog)?.into_iter().map(|(p, n)| (p, n as f64)))
}

/// Unique posts per publisher within the top `k` of one bot's snapshots.
pub(crate) fn unique_counts(snapshots: &[Snapshot], k: u32) -> BTreeMap<&PublisherId, u64> {
    let mut seen = HashMap::new();
    for snapshot in snapshots {
        for entry in snapshot.top(k as usize) {
            seen.entry((&entry.publisher_id, &entry.post_id)).or_insert(());
        }
    }
    let mut counts = BTreeMap::new();
    for (publisher, _) in seen.into_keys() {
        *counts.entry(publisher).or_insert(0) += 1;
    }
    counts
}

fn model_from_unique(unique: &BTreeMap<&PublisherId, u64>, k: u32) -> Option<BTreeMap<PublisherId, f64>> {
    let total: u64 = unique.values().sum();
    if total == 0 {
        return None;
    }
    Some(
        unique
            .iter()
            .map(|(p, &q)| ((*p).clone(), q as f64 * f64::from(k) / total as f64))
            .collect(),
    )
}

/// Model-predicted occupancy `N^(m)` from the bot's measured effective rates.
///
/// Covers the publishers seen within the bot's top `k`; they sum to `k`.
pub fn model_occupancy_from_measurements(set: &SnapshotSet, bot: &str, k: u32) -> Result<BTreeMap<PublisherId, f64>> {
    if k < 1 {
        return Err(Error::domain("K must be ≥ 1"));
    }
    let snapshots = set.snapshots(bot)?;
    model_from_unique(&unique_counts(snapshots, k), k)
        .ok_or_else(|| Error::Degenerate(format!("bot '{bot}' shows no posts within the top {k}")))
}

/// Bias of one publisher at one bot.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasEntry {
    pub n_model: f64,
    pub n_unfiltered: f64,
    pub bias: f64,
    /// False for publishers seen in the feed but missing from the catalog;
    /// their unfiltered occupancy is reported as 0.
    pub in_catalog: bool,
}

/// `b = N^(m) − N^(u)` for every publisher in the bot's feed or in the catalog.
pub fn bias(set: &SnapshotSet, catalog: &[PostRecord], bot: &str, k: u32) -> Result<BTreeMap<PublisherId, BiasEntry>> {
    let creation = creation_rates_from_catalog(catalog)?;
    let model = model_occupancy_from_measurements(set, bot, k)?;
    let unfiltered = unfiltered_occupancy(&creation, k)?;
    let publishers: BTreeSet<&PublisherId> = model.keys().chain(unfiltered.keys()).collect();
    Ok(publishers
        .into_iter()
        .map(|p| {
            let n_model = model.get(p).copied().unwrap_or(0.0);
            let n_unfiltered = unfiltered.get(p).copied().unwrap_or(0.0);
            let entry = BiasEntry {
                n_model,
                n_unfiltered,
                bias: n_model - n_unfiltered,
                in_catalog: unfiltered.contains_key(p),
            };
            (p.clone(), entry)
        })
        .collect())
}
