use crate::types::{Snapshot, SnapshotEntry, Timestamp};

/// Snapshot from (post, publisher) pairs listed top to bottom; publication
/// times decrease down the list.
pub(crate) fn snap(bot: &str, t: i64, posts: &[(&str, &str)]) -> Snapshot {
    Snapshot {
        bot_id: bot.into(),
        snapshot_time: Timestamp::from_nanos(t),
        entries: posts
            .iter()
            .enumerate()
            .map(|(i, (post, publisher))| SnapshotEntry {
                position: i as u32 + 1,
                post_id: (*post).into(),
                publisher_id: (*publisher).into(),
                publication_time: Timestamp::from_nanos(t - i as i64 - 1),
                likes: None,
                shares: None,
            })
            .collect(),
    }
}
