use super::{model_from_unique, unique_counts};
use crate::error::{Error, Result};
use crate::metrics::exposure_table;
use crate::types::{BotId, PublisherId, SnapshotSet};

/// Measured against model-predicted occupancy of one (bot, publisher) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterRow {
    pub bot_id: BotId,
    pub publisher_id: PublisherId,
    pub k: u32,
    pub n_measured: f64,
    pub n_model: f64,
}

impl ScatterRow {
    pub fn deviation(&self) -> f64 {
        (self.n_measured - self.n_model).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScatterTable {
    pub rows: Vec<ScatterRow>,
}

impl ScatterTable {
    pub fn max_abs_deviation(&self) -> f64 {
        self.rows.iter().map(ScatterRow::deviation).fold(0.0, f64::max)
    }

    pub fn mean_abs_deviation(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(ScatterRow::deviation).sum::<f64>() / self.rows.len() as f64
    }
}

/// One point per (bot, publisher shown within the top `k`).
///
/// Bots whose feeds are empty within the top `k` contribute no points.
pub fn validation_scatter(set: &SnapshotSet, k: u32) -> Result<ScatterTable> {
    if set.is_empty() {
        return Err(Error::Degenerate("no snapshots".into()));
    }
    let measured = exposure_table(set, k)?;
    let mut rows = Vec::new();
    for bot in set.bot_ids() {
        let snapshots = set.snapshots(bot.as_str())?;
        let Some(model) = model_from_unique(&unique_counts(snapshots, k), k) else {
            continue;
        };
        for (publisher, n_model) in model {
            let row = measured
                .get(bot.as_str(), publisher.as_str())
                .expect("every observed publisher has an exposure row");
            rows.push(ScatterRow {
                bot_id: bot.clone(),
                publisher_id: publisher,
                k,
                n_measured: row.occupancy(),
                n_model,
            });
        }
    }
    Ok(ScatterTable { rows })
}
