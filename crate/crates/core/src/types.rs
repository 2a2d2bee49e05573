//! Identifiers, timestamps, posts and snapshots shared by every module.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(id: impl AsRef<str>) -> Self {
                Self(Arc::from(id.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Debug::fmt(&*self.0, f)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(Arc::from(s))
            }
        }
    };
}

string_id!(
    /// A content source (page) that publishes posts.
    PublisherId
);
string_id!(
    /// A synthetic subscriber whose feed is observed.
    BotId
);
string_id!(
    /// Opaque unique identity of one published post.
    PostId
);

/// UTC instant with nanosecond resolution, stored as nanoseconds since the Unix epoch.
///
/// Files carry RFC 3339 strings with exactly nine fractional digits and a `Z` suffix.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(i64);

impl Timestamp {
    pub const fn from_nanos(nanos: i64) -> Self {
        Self(nanos)
    }

    pub const fn as_nanos(self) -> i64 {
        self.0
    }

    pub fn to_rfc3339(self) -> String {
        DateTime::<Utc>::from_timestamp_nanos(self.0).to_rfc3339_opts(SecondsFormat::Nanos, true)
    }

    pub fn parse_rfc3339(s: &str) -> Result<Self, String> {
        let dt = DateTime::parse_from_rfc3339(s).map_err(|e| format!("invalid RFC 3339 time '{s}': {e}"))?;
        dt.with_timezone(&Utc)
            .timestamp_nanos_opt()
            .map(Self)
            .ok_or_else(|| format!("time '{s}' is outside the representable range"))
    }
}

impl fmt::Debug for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rfc3339())
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rfc3339())
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_rfc3339())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = <std::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        Timestamp::parse_rfc3339(&s).map_err(serde::de::Error::custom)
    }
}

/// One published post as listed in a publisher catalog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub post_id: PostId,
    pub publisher_id: PublisherId,
    pub publication_time: Timestamp,
}

/// One position of a captured feed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    /// 1-based position, 1 being the top of the feed.
    pub position: u32,
    pub post_id: PostId,
    pub publisher_id: PublisherId,
    pub publication_time: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub likes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shares: Option<u64>,
}

/// A timestamped capture of the top of one bot's feed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub bot_id: BotId,
    pub snapshot_time: Timestamp,
    pub entries: Vec<SnapshotEntry>,
}

impl Snapshot {
    /// Checks that positions run 1..=n in order and post ids are unique.
    ///
    /// On failure returns the offending field name and a message.
    pub fn check(&self) -> Result<(), (&'static str, String)> {
        let mut seen = HashSet::with_capacity(self.entries.len());
        for (idx, entry) in self.entries.iter().enumerate() {
            if entry.position < 1 {
                return Err(("position", "position must be ≥ 1".to_string()));
            }
            let expected = idx as u64 + 1;
            if u64::from(entry.position) != expected {
                let message = if u64::from(entry.position) < expected {
                    format!("duplicate or out-of-order position {}", entry.position)
                } else {
                    format!("position {} leaves a gap (expected {expected})", entry.position)
                };
                return Err(("position", message));
            }
            if !seen.insert(entry.post_id.as_str()) {
                return Err((
                    "post_id",
                    format!("duplicate post_id '{}' within snapshot", entry.post_id),
                ));
            }
        }
        Ok(())
    }

    /// Entries within the top `k` positions.
    pub fn top(&self, k: usize) -> &[SnapshotEntry] {
        &self.entries[..self.entries.len().min(k)]
    }
}

/// Validated collection of snapshots grouped by bot, each bot's list ordered by time.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SnapshotSet {
    bots: BTreeMap<BotId, Vec<Snapshot>>,
    publishers: BTreeSet<PublisherId>,
}

impl SnapshotSet {
    /// Groups snapshots by bot, sorting each bot's list by time (stable for ties).
    pub fn new(snapshots: impl IntoIterator<Item = Snapshot>) -> Result<Self> {
        let mut bots: BTreeMap<BotId, Vec<Snapshot>> = BTreeMap::new();
        let mut publishers = BTreeSet::new();
        for snapshot in snapshots {
            snapshot.check().map_err(|(field, message)| {
                Error::Domain(format!(
                    "snapshot of bot '{}' at {}: {field}: {message}",
                    snapshot.bot_id, snapshot.snapshot_time
                ))
            })?;
            for entry in &snapshot.entries {
                if !publishers.contains(entry.publisher_id.as_str()) {
                    publishers.insert(entry.publisher_id.clone());
                }
            }
            bots.entry(snapshot.bot_id.clone()).or_default().push(snapshot);
        }
        if bots.is_empty() {
            return Err(Error::Degenerate("no snapshots".into()));
        }
        for list in bots.values_mut() {
            list.sort_by_key(|s| s.snapshot_time);
        }
        Ok(Self { bots, publishers })
    }

    pub fn bot_ids(&self) -> impl Iterator<Item = &BotId> {
        self.bots.keys()
    }

    /// Every publisher seen at any bot and any position.
    pub fn publishers(&self) -> &BTreeSet<PublisherId> {
        &self.publishers
    }

    pub fn snapshots(&self, bot: &str) -> Result<&[Snapshot]> {
        self.bots
            .get(bot)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Lookup(format!("unknown bot '{bot}'")))
    }

    /// All snapshots, bots in id order and each bot's snapshots in time order.
    pub fn iter(&self) -> impl Iterator<Item = &Snapshot> {
        self.bots.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.bots.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bots.is_empty()
    }

    /// Longest snapshot in the set.
    pub fn max_len(&self) -> usize {
        self.iter().map(|s| s.entries.len()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(position: u32, post: &str, publisher: &str, t: i64) -> SnapshotEntry {
        SnapshotEntry {
            position,
            post_id: post.into(),
            publisher_id: publisher.into(),
            publication_time: Timestamp::from_nanos(t),
            likes: None,
            shares: None,
        }
    }

    #[test]
    fn timestamp_round_trips_through_rfc3339() {
        let t = Timestamp::from_nanos(1_517_443_200_123_456_789);
        let s = t.to_rfc3339();
        assert_eq!(s, "2018-02-01T00:00:00.123456789Z");
        assert_eq!(Timestamp::parse_rfc3339(&s).unwrap(), t);
        let offset = Timestamp::parse_rfc3339("2018-02-01T01:00:00+01:00").unwrap();
        assert_eq!(offset.as_nanos(), 1_517_443_200_000_000_000);
    }

    #[test]
    fn snapshot_check_rejects_bad_positions() {
        let mut s = Snapshot {
            bot_id: "b".into(),
            snapshot_time: Timestamp::from_nanos(0),
            entries: vec![entry(1, "a", "x", 0), entry(2, "b", "x", 0)],
        };
        assert!(s.check().is_ok());
        s.entries[1].position = 1;
        assert_eq!(s.check().unwrap_err().0, "position");
        s.entries[1].position = 3;
        assert_eq!(s.check().unwrap_err().0, "position");
        s.entries[0].position = 0;
        assert_eq!(s.check().unwrap_err().1, "position must be ≥ 1");
    }

    #[test]
    fn snapshot_check_rejects_duplicate_posts() {
        let s = Snapshot {
            bot_id: "b".into(),
            snapshot_time: Timestamp::from_nanos(0),
            entries: vec![entry(1, "a", "x", 0), entry(2, "a", "x", 0)],
        };
        assert_eq!(s.check().unwrap_err().0, "post_id");
    }

    #[test]
    fn set_groups_and_orders_by_time() {
        let mk = |bot: &str, t: i64| Snapshot {
            bot_id: bot.into(),
            snapshot_time: Timestamp::from_nanos(t),
            entries: vec![entry(1, &format!("{bot}{t}"), "x", t)],
        };
        let set = SnapshotSet::new([mk("b2", 5), mk("b1", 3), mk("b1", 1)]).unwrap();
        assert_eq!(set.bot_ids().map(BotId::as_str).collect::<Vec<_>>(), ["b1", "b2"]);
        let times: Vec<_> = set
            .snapshots("b1")
            .unwrap()
            .iter()
            .map(|s| s.snapshot_time.as_nanos())
            .collect();
        assert_eq!(times, [1, 3]);
        assert!(matches!(set.snapshots("nope"), Err(Error::Lookup(_))));
        assert!(matches!(SnapshotSet::new([]), Err(Error::Degenerate(_))));
    }
}
