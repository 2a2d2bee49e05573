//! Percentile bootstrap for the bias.
//!
//! Each replicate draws, independently,
//! - `S` snapshots with replacement from the bot's snapshots, and
//! - `M` posts with replacement from the catalog of `M` posts,
//!
//! and recomputes `b* = N^(m)* − N^(u)*`.
//!
//! On the measured side every distinct post carries one unit of "unique post"
//! credit, split evenly over the snapshots it appears in. The credits of a
//! snapshot travel with it when resampled, so an identity resample reproduces
//! `Q` exactly and a resample that repeats a snapshot counts its posts again
//! instead of collapsing them.
//!
//! On the catalog side only per-publisher counts enter `N^(u)`, and the counts
//! of a with-replacement resample of `M` posts are multinomial with the
//! catalog shares; they are drawn directly as a chain of binomials.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use super::{bias, catalog_counts};
use crate::error::{Error, Result};
use crate::sim::{derive_seed, rng_from_seed};
use crate::types::{BotId, PostRecord, PublisherId, Snapshot, SnapshotSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub replicates: u32,
    /// Two-sided confidence level in (0, 1).
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 1000,
            level: 0.95,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::domain("replicates must be ≥ 1"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::domain(format!("level must be in (0, 1), got {}", self.level)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasRow {
    pub bot_id: BotId,
    pub publisher_id: PublisherId,
    pub k: u32,
    pub n_model: f64,
    pub n_unfiltered: f64,
    pub bias: f64,
    pub boot_mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicates: u32,
    pub level: f64,
    pub in_catalog: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BiasReport {
    pub rows: Vec<BiasRow>,
}

impl BiasReport {
    pub fn get(&self, bot: &str, publisher: &str) -> Option<&BiasRow> {
        self.rows
            .iter()
            .find(|r| r.bot_id.as_str() == bot && r.publisher_id.as_str() == publisher)
    }
}

/// Linear interpolation between order statistics at index `(n−1)·q` of a sorted slice.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-snapshot unique-post credit, `credits[s][j]`.
fn snapshot_credits(snapshots: &[Snapshot], k: u32, index: &HashMap<&PublisherId, usize>) -> Vec<Vec<f64>> {
    let mut appearances: HashMap<(&PublisherId, &crate::types::PostId), u32> = HashMap::new();
    for snapshot in snapshots {
        for entry in snapshot.top(k as usize) {
            *appearances.entry((&entry.publisher_id, &entry.post_id)).or_insert(0) += 1;
        }
    }
    snapshots
        .iter()
        .map(|snapshot| {
            let mut row = vec![0.0; index.len()];
            for entry in snapshot.top(k as usize) {
                let n = appearances[&(&entry.publisher_id, &entry.post_id)];
                row[index[&entry.publisher_id]] += 1.0 / f64::from(n);
            }
            row
        })
        .collect()
}

fn multinomial<R: Rng>(trials: u64, counts: &[u64], rng: &mut R) -> Vec<u64> {
    let mut remaining_trials = trials;
    let mut remaining_mass: u64 = counts.iter().sum();
    let mut out = Vec::with_capacity(counts.len());
    for &c in counts {
        let drawn = if remaining_trials == 0 || c == 0 {
            0
        } else if c >= remaining_mass {
            remaining_trials
        } else {
            let p = c as f64 / remaining_mass as f64;
            Binomial::new(remaining_trials, p).expect("valid binomial").sample(rng)
        };
        out.push(drawn);
        remaining_trials -= drawn;
        remaining_mass -= c;
    }
    out
}

/// Bootstrap bias rows for one bot, one per publisher in its feed or the catalog.
pub fn bootstrap_bias(
    set: &SnapshotSet,
    catalog: &[PostRecord],
    bot: &str,
    k: u32,
    config: &BootstrapConfig,
) -> Result<Vec<BiasRow>> {
    config.validate()?;
    let point = bias(set, catalog, bot, k)?;
    let snapshots = set.snapshots(bot)?;
    let bot_id = snapshots[0].bot_id.clone();

    let publishers: Vec<&PublisherId> = point.keys().collect();
    let index: HashMap<&PublisherId, usize> = publishers.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let credits = snapshot_credits(snapshots, k, &index);
    let counts = catalog_counts(catalog)?;
    let catalog_counts: Vec<u64> = publishers
        .iter()
        .map(|p| counts.get(*p).copied().unwrap_or(0))
        .collect();
    let catalog_size = catalog.len() as u64;
    let kf = f64::from(k);
    let width = publishers.len();

    let replicates: Vec<Vec<f64>> = (0..u64::from(config.replicates))
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(config.seed, r));
            let mut unique = vec![0.0; width];
            for _ in 0..snapshots.len() {
                let s = rng.random_range(0..snapshots.len());
                for (u, c) in unique.iter_mut().zip(&credits[s]) {
                    *u += c;
                }
            }
            let unique_total: f64 = unique.iter().sum();
            let resampled = multinomial(catalog_size, &catalog_counts, &mut rng);
            (0..width)
                .map(|j| {
                    // a resample of empty snapshots shows nothing: N^(m)* = 0
                    let n_model = if unique_total > 0.0 {
                        unique[j] * kf / unique_total
                    } else {
                        0.0
                    };
                    let n_unfiltered = resampled[j] as f64 * kf / catalog_size as f64;
                    n_model - n_unfiltered
                })
                .collect()
        })
        .collect();

    let alpha = 1.0 - config.level;
    Ok(publishers
        .iter()
        .enumerate()
        .map(|(j, publisher)| {
            let mut sample: Vec<f64> = replicates.iter().map(|b| b[j]).collect();
            let boot_mean = sample.iter().sum::<f64>() / sample.len() as f64;
            sample.sort_by(f64::total_cmp);
            let entry = &point[*publisher];
            BiasRow {
                bot_id: bot_id.clone(),
                publisher_id: (*publisher).clone(),
                k,
                n_model: entry.n_model,
                n_unfiltered: entry.n_unfiltered,
                bias: entry.bias,
                boot_mean,
                ci_low: percentile(&sample, alpha / 2.0),
                ci_high: percentile(&sample, 1.0 - alpha / 2.0),
                replicates: config.replicates,
                level: config.level,
                in_catalog: entry.in_catalog,
            }
        })
        .collect())
}

/// [`bootstrap_bias`] for every bot, each with the same seed.
pub fn bias_report(set: &SnapshotSet, catalog: &[PostRecord], k: u32, config: &BootstrapConfig) -> Result<BiasReport> {
    config.validate()?;
    let bots: BTreeSet<&BotId> = set.bot_ids().collect();
    let mut rows = Vec::new();
    for bot in bots {
        rows.extend(bootstrap_bias(set, catalog, bot.as_str(), k, config)?);
    }
    Ok(BiasReport { rows })
}
