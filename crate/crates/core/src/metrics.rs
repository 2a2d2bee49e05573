//! Exposure metrics measured from snapshot datasets.
//!
//! For bot `i`, publisher `j` and feed size `K`, with `Sᵢ` snapshots:
//! - `Qᵢⱼ`: distinct posts of `j` seen within the top `K` of any snapshot;
//! - `Iᵢⱼ`: impressions, one per (snapshot, post) within the top `K`;
//! - `Vᵢⱼ`: snapshots holding at least one post of `j` within the top `K`.
//!
//! Effective rate is `Q/S` posts per snapshot, occupancy `N = I/S`, visibility
//! `π = V/S`. All metrics are kept as integer counts and divided on demand.
//! Snapshots shorter than `K` contribute the entries they have.

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::types::{BotId, PostId, PublisherId, Snapshot, SnapshotSet};

/// Counts behind one cell of an [`ExposureTable`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExposureRow {
    pub bot_id: BotId,
    pub publisher_id: PublisherId,
    pub k: u32,
    pub impressions: u64,
    pub unique_posts: u64,
    pub visible_snapshots: u64,
    pub snapshots: u64,
}

impl ExposureRow {
    /// `N = I/S`
    pub fn occupancy(&self) -> f64 {
        self.impressions as f64 / self.snapshots as f64
    }

    /// `π = V/S`
    pub fn visibility(&self) -> f64 {
        self.visible_snapshots as f64 / self.snapshots as f64
    }

    pub fn normalized_occupancy(&self) -> f64 {
        self.impressions as f64 / (self.snapshots as f64 * f64::from(self.k))
    }

    /// `λ̃ = Q/S`, posts per snapshot.
    pub fn effective_rate(&self) -> f64 {
        self.unique_posts as f64 / self.snapshots as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExposureTable {
    pub rows: Vec<ExposureRow>,
}

impl ExposureTable {
    pub fn get(&self, bot: &str, publisher: &str) -> Option<&ExposureRow> {
        self.rows
            .iter()
            .find(|r| r.bot_id.as_str() == bot && r.publisher_id.as_str() == publisher)
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    impressions: u64,
    unique: u64,
    visible: u64,
}

fn check_k(k: u32) -> Result<()> {
    if k < 1 {
        Err(Error::domain("K must be ≥ 1"))
    } else {
        Ok(())
    }
}

fn count_bot(snapshots: &[Snapshot], k: u32) -> BTreeMap<&PublisherId, Counts> {
    let mut counts: BTreeMap<&PublisherId, Counts> = BTreeMap::new();
    let mut seen: HashSet<(&PublisherId, &PostId)> = HashSet::new();
    let mut present: HashSet<&PublisherId> = HashSet::new();
    for snapshot in snapshots {
        present.clear();
        for entry in snapshot.top(k as usize) {
            let c = counts.entry(&entry.publisher_id).or_default();
            c.impressions += 1;
            if seen.insert((&entry.publisher_id, &entry.post_id)) {
                c.unique += 1;
            }
            if present.insert(&entry.publisher_id) {
                c.visible += 1;
            }
        }
    }
    counts
}

fn bot_row(set: &SnapshotSet, bot: &str, publisher: &str, k: u32) -> Result<ExposureRow> {
    check_k(k)?;
    let snapshots = set.snapshots(bot)?;
    let counts = count_bot(snapshots, k)
        .into_iter()
        .find(|(p, _)| p.as_str() == publisher)
        .map_or_else(Counts::default, |(_, c)| c);
    Ok(ExposureRow {
        bot_id: snapshots[0].bot_id.clone(),
        publisher_id: PublisherId::new(publisher),
        k,
        impressions: counts.impressions,
        unique_posts: counts.unique,
        visible_snapshots: counts.visible,
        snapshots: snapshots.len() as u64,
    })
}

/// Measured effective arrival rate `Q/S` in posts per snapshot.
pub fn effective_rate(set: &SnapshotSet, bot: &str, publisher: &str, k: u32) -> Result<f64> {
    bot_row(set, bot, publisher, k).map(|r| r.effective_rate())
}

/// Average number of the publisher's posts within the top `k`.
pub fn occupancy(set: &SnapshotSet, bot: &str, publisher: &str, k: u32) -> Result<f64> {
    bot_row(set, bot, publisher, k).map(|r| r.occupancy())
}

/// Fraction of the bot's snapshots with at least one of the publisher's posts in the top `k`.
pub fn visibility(set: &SnapshotSet, bot: &str, publisher: &str, k: u32) -> Result<f64> {
    bot_row(set, bot, publisher, k).map(|r| r.visibility())
}

/// Counts for every bot and every publisher observed anywhere in the dataset.
pub fn exposure_table(set: &SnapshotSet, k: u32) -> Result<ExposureTable> {
    check_k(k)?;
    let mut rows = Vec::new();
    for bot in set.bot_ids() {
        let snapshots = set.snapshots(bot.as_str())?;
        let counts = count_bot(snapshots, k);
        for publisher in set.publishers() {
            let c = counts.get(publisher).copied().unwrap_or_default();
            rows.push(ExposureRow {
                bot_id: bot.clone(),
                publisher_id: publisher.clone(),
                k,
                impressions: c.impressions,
                unique_posts: c.unique,
                visible_snapshots: c.visible,
                snapshots: snapshots.len() as u64,
            });
        }
    }
    Ok(ExposureTable { rows })
}

/// One point of a normalized-occupancy curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveRow {
    pub bot_id: BotId,
    pub publisher_id: PublisherId,
    pub k: u32,
    pub impressions: u64,
    pub snapshots: u64,
}

impl CurveRow {
    /// `N/K = I / (S·K)`
    pub fn normalized_occupancy(&self) -> f64 {
        self.impressions as f64 / (self.snapshots as f64 * f64::from(self.k))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
}

impl CurveTable {
    /// Curve of one publisher at one bot, ordered by `K`.
    pub fn series(&self, bot: &str, publisher: &str) -> Vec<f64> {
        let mut rows: Vec<&CurveRow> = self
            .rows
            .iter()
            .filter(|r| r.bot_id.as_str() == bot && r.publisher_id.as_str() == publisher)
            .collect();
        rows.sort_by_key(|r| r.k);
        rows.into_iter().map(CurveRow::normalized_occupancy).collect()
    }
}

/// Normalized occupancy for `K = 1..=k_max` at one bot, for every publisher
/// the bot shows within the top `k_max`.
///
/// The denominator is always `S·K`, so snapshots shorter than `K` pull the
/// curve down rather than being rescaled by their observed length.
pub fn occupancy_curve(set: &SnapshotSet, bot: &str, k_max: u32) -> Result<CurveTable> {
    if k_max < 1 {
        return Err(Error::domain("K_max must be ≥ 1"));
    }
    let snapshots = set.snapshots(bot)?;
    // per_position[j][p] = snapshots whose position p+1 holds a post of j
    let mut per_position: BTreeMap<&PublisherId, Vec<u64>> = BTreeMap::new();
    for snapshot in snapshots {
        for (p, entry) in snapshot.top(k_max as usize).iter().enumerate() {
            per_position
                .entry(&entry.publisher_id)
                .or_insert_with(|| vec![0; k_max as usize])[p] += 1;
        }
    }
    let bot_id = snapshots[0].bot_id.clone();
    let mut rows = Vec::with_capacity(per_position.len() * k_max as usize);
    for (publisher, counts) in per_position {
        let mut impressions = 0;
        for (p, c) in counts.iter().enumerate() {
            impressions += c;
            rows.push(CurveRow {
                bot_id: bot_id.clone(),
                publisher_id: publisher.clone(),
                k: p as u32 + 1,
                impressions,
                snapshots: snapshots.len() as u64,
            });
        }
    }
    Ok(CurveTable { rows })
}

/// [`occupancy_curve`] for every bot.
pub fn occupancy_curves(set: &SnapshotSet, k_max: u32) -> Result<CurveTable> {
    let mut rows = Vec::new();
    for bot in set.bot_ids() {
        rows.extend(occupancy_curve(set, bot.as_str(), k_max)?.rows);
    }
    Ok(CurveTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::snap;
    use proptest::prelude::*;

    /// Two snapshots: tops (A, B), second positions (A, A).
    fn hand_set() -> SnapshotSet {
        SnapshotSet::new([
            snap("bot", 10, &[("a1", "A"), ("a0", "A")]),
            snap("bot", 20, &[("b1", "B"), ("a1", "A")]),
        ])
        .unwrap()
    }

    #[test]
    fn effective_rate_counts_unique_posts() {
        // 10 unique posts of X over 4 snapshots, some repeated
        let snaps = vec![
            snap("bot", 1, &[("x1", "X"), ("x2", "X"), ("x3", "X")]),
            snap("bot", 2, &[("x4", "X"), ("x5", "X"), ("x1", "X")]),
            snap("bot", 3, &[("x6", "X"), ("x7", "X"), ("x8", "X")]),
            snap("bot", 4, &[("x9", "X"), ("x10", "X"), ("x6", "X")]),
        ];
        let set = SnapshotSet::new(snaps).unwrap();
        assert_eq!(effective_rate(&set, "bot", "X", 3).unwrap(), 2.5);
        assert_eq!(effective_rate(&set, "bot", "absent", 3).unwrap(), 0.0);
        assert!(matches!(effective_rate(&set, "nobody", "X", 3), Err(Error::Lookup(_))));
        assert!(effective_rate(&set, "bot", "X", 0).is_err());
    }

    #[test]
    fn occupancy_counts_impressions() {
        // I = 6 over S = 4
        let set = SnapshotSet::new([
            snap("bot", 1, &[("a", "J"), ("b", "J")]),
            snap("bot", 2, &[("a", "J"), ("c", "O")]),
            snap("bot", 3, &[("d", "J"), ("a", "J")]),
            snap("bot", 4, &[("e", "O"), ("d", "J")]),
        ])
        .unwrap();
        assert_eq!(occupancy(&set, "bot", "J", 2).unwrap(), 1.5);
        assert_eq!(visibility(&set, "bot", "J", 2).unwrap(), 1.0);
        assert_eq!(visibility(&set, "bot", "O", 2).unwrap(), 0.5);
    }

    #[test]
    fn visibility_counts_snapshots() {
        let set = SnapshotSet::new([
            snap("bot", 1, &[("a", "J")]),
            snap("bot", 2, &[("b", "O")]),
            snap("bot", 3, &[("c", "J")]),
            snap("bot", 4, &[("d", "J")]),
        ])
        .unwrap();
        assert_eq!(visibility(&set, "bot", "J", 1).unwrap(), 0.75);
    }

    #[test]
    fn hand_dataset_curve() {
        let curve = occupancy_curve(&hand_set(), "bot", 2).unwrap();
        assert_eq!(curve.series("bot", "A"), vec![0.5, 0.75]);
        assert_eq!(curve.series("bot", "B"), vec![0.5, 0.25]);
        assert!(occupancy_curve(&hand_set(), "bot", 0).is_err());
    }

    #[test]
    fn sole_publisher_curve_is_one() {
        let set = SnapshotSet::new((0..5).map(|t| {
            let posts: Vec<String> = (0..4).map(|p| format!("p{}", t + p)).collect();
            let pairs: Vec<(&str, &str)> = posts.iter().map(|p| (p.as_str(), "only")).collect();
            snap("bot", t, &pairs)
        }))
        .unwrap();
        assert_eq!(
            occupancy_curve(&set, "bot", 4).unwrap().series("bot", "only"),
            vec![1.0; 4]
        );
    }

    #[test]
    fn short_snapshots_keep_denominator() {
        let set = SnapshotSet::new([snap("bot", 1, &[("a", "A"), ("b", "A")]), snap("bot", 2, &[("c", "A")])]).unwrap();
        let row = exposure_table(&set, 2).unwrap().rows.remove(0);
        assert_eq!((row.impressions, row.snapshots), (3, 2));
        assert_eq!(row.normalized_occupancy(), 0.75);
    }

    fn arb_set() -> impl Strategy<Value = Vec<Snapshot>> {
        // posts drawn from a small pool so repeats across snapshots occur
        let snapshot = prop::collection::vec((0u32..30, 0usize..4), 0..8).prop_map(|entries| {
            let mut seen = HashSet::new();
            entries
                .into_iter()
                .filter(|(post, _)| seen.insert(*post))
                .map(|(post, publisher)| (format!("post{post}"), format!("pub{}", (post as usize + publisher) % 4)))
                .collect::<Vec<_>>()
        });
        prop::collection::vec((0usize..2, snapshot), 1..25).prop_map(|snaps| {
            snaps
                .into_iter()
                .enumerate()
                .map(|(t, (bot, entries))| {
                    let pairs: Vec<(&str, &str)> = entries.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                    snap(&format!("bot{bot}"), t as i64 * 100, &pairs)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn exposure_rows_satisfy_count_bounds(snaps in arb_set(), k in 1u32..10) {
            let set = SnapshotSet::new(snaps).unwrap();
            let table = exposure_table(&set, k).unwrap();
            for row in &table.rows {
                let (n, pi) = (row.occupancy(), row.visibility());
                prop_assert!((0.0..=1.0).contains(&pi));
                prop_assert!(n >= 0.0 && n <= f64::from(k));
                prop_assert!(row.visible_snapshots <= row.impressions);
                prop_assert!(row.impressions <= u64::from(k) * row.visible_snapshots);
                prop_assert!(n / f64::from(k) <= pi);
                if k == 1 {
                    prop_assert_eq!(n.to_bits(), pi.to_bits());
                }
            }
            // per bot, occupancies sum to the mean snapshot length truncated at K
            for bot in set.bot_ids() {
                let snaps = set.snapshots(bot.as_str()).unwrap();
                let total_len: usize = snaps.iter().map(|s| s.entries.len().min(k as usize)).sum();
                let sum_i: u64 = table.rows.iter().filter(|r| &r.bot_id == bot).map(|r| r.impressions).sum();
                prop_assert_eq!(sum_i as usize, total_len);
            }
        }

        #[test]
        fn metrics_ignore_snapshot_order(snaps in arb_set(), k in 1u32..6, seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut shuffled = snaps.clone();
            shuffled.shuffle(&mut crate::sim::rng_from_seed(seed));
            let a = exposure_table(&SnapshotSet::new(snaps).unwrap(), k).unwrap();
            let b = exposure_table(&SnapshotSet::new(shuffled).unwrap(), k).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn curve_sums_to_at_most_one(snaps in arb_set(), k_max in 1u32..10) {
            let set = SnapshotSet::new(snaps).unwrap();
            for bot in set.bot_ids() {
                let curve = occupancy_curve(&set, bot.as_str(), k_max).unwrap();
                let snaps = set.snapshots(bot.as_str()).unwrap();
                for k in 1..=k_max {
                    let sum: f64 = curve.rows.iter().filter(|r| r.k == k).map(CurveRow::normalized_occupancy).sum();
                    prop_assert!(sum <= 1.0 + 1e-12);
                    if snaps.iter().all(|s| s.entries.len() >= k as usize) {
                        prop_assert!((sum - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
