use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BotId, PublisherId, Timestamp};

/// 2018-01-01T00:00:00Z, the default origin of simulated time.
pub const DEFAULT_START_NANOS: i64 = 1_514_764_800_000_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublisherSpec {
    pub id: PublisherId,
    /// Creation rate Λⱼ in posts per time unit.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BotSpec {
    pub id: BotId,
    /// Probability that a post of each publisher enters this bot's feed.
    /// Publishers not listed are not followed (probability 0).
    pub acceptance: BTreeMap<PublisherId, f64>,
}

impl BotSpec {
    pub fn acceptance_of(&self, publisher: &str) -> f64 {
        self.acceptance.get(publisher).copied().unwrap_or(0.0)
    }
}

/// Everything needed to reproduce one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub publishers: Vec<PublisherSpec>,
    pub bots: Vec<BotSpec>,
    /// Feed size: number of positions kept and captured.
    pub k: u32,
    /// Time between snapshots, in time units.
    pub snapshot_interval: f64,
    pub snapshot_count: u32,
    /// Time before the first snapshot window; defaults to [`SimConfig::default_warmup`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Length of one time unit in seconds, used when writing timestamps.
    #[serde(default = "default_time_unit")]
    pub time_unit_secs: f64,
    #[serde(default = "default_start")]
    pub start_time: Timestamp,
}

fn default_time_unit() -> f64 {
    3600.0
}

fn default_start() -> Timestamp {
    Timestamp::from_nanos(DEFAULT_START_NANOS)
}

impl SimConfig {
    /// Config with one bot per entry of `acceptance`, default timing fields.
    pub fn new(
        publishers: impl IntoIterator<Item = (impl Into<PublisherId>, f64)>,
        bots: impl IntoIterator<Item = (impl Into<BotId>, Vec<f64>)>,
        k: u32,
        snapshot_interval: f64,
        snapshot_count: u32,
        seed: u64,
    ) -> Self {
        let publishers: Vec<PublisherSpec> = publishers
            .into_iter()
            .map(|(id, rate)| PublisherSpec { id: id.into(), rate })
            .collect();
        let bots = bots
            .into_iter()
            .map(|(id, probs)| BotSpec {
                id: id.into(),
                acceptance: publishers.iter().map(|p| p.id.clone()).zip(probs).collect(),
            })
            .collect();
        Self {
            publishers,
            bots,
            k,
            snapshot_interval,
            snapshot_count,
            warmup: None,
            seed,
            time_unit_secs: default_time_unit(),
            start_time: default_start(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.publishers.is_empty() {
            return err("at least one publisher is required".into());
        }
        if self.bots.is_empty() {
            return err("at least one bot is required".into());
        }
        if self.k < 1 {
            return err("K must be ≥ 1".into());
        }
        if !(self.snapshot_interval > 0.0) || !self.snapshot_interval.is_finite() {
            return err(format!("snapshot_interval must be > 0, got {}", self.snapshot_interval));
        }
        if self.snapshot_count < 1 {
            return err("snapshot_count must be ≥ 1".into());
        }
        if let Some(w) = self.warmup {
            if !(w >= 0.0) || !w.is_finite() {
                return err(format!("warmup must be ≥ 0, got {w}"));
            }
        }
        if !(self.time_unit_secs > 0.0) || !self.time_unit_secs.is_finite() {
            return err(format!("time_unit_secs must be > 0, got {}", self.time_unit_secs));
        }
        let mut ids = HashSet::new();
        for p in &self.publishers {
            if !ids.insert(p.id.as_str()) {
                return err(format!("duplicate publisher '{}'", p.id));
            }
            if !(p.rate >= 0.0) || !p.rate.is_finite() {
                return err(format!("rate of publisher '{}' must be ≥ 0, got {}", p.id, p.rate));
            }
        }
        let mut bot_ids = HashSet::new();
        for bot in &self.bots {
            if !bot_ids.insert(bot.id.as_str()) {
                return err(format!("duplicate bot '{}'", bot.id));
            }
            for (publisher, &p) in &bot.acceptance {
                if !ids.contains(publisher.as_str()) {
                    return err(format!("bot '{}' accepts unknown publisher '{publisher}'", bot.id));
                }
                if !(0.0..=1.0).contains(&p) {
                    return err(format!(
                        "acceptance of '{publisher}' at bot '{}' must be in [0, 1], got {p}",
                        bot.id
                    ));
                }
            }
            if self.effective_total(bot) <= 0.0 {
                return err(format!(
                    "bot '{}' accepts no publisher with a positive rate; its feed would never fill",
                    bot.id
                ));
            }
        }
        Ok(())
    }

    /// λᵢ = Σⱼ pᵢⱼ Λⱼ for one bot.
    pub fn effective_total(&self, bot: &BotSpec) -> f64 {
        self.publishers
            .iter()
            .map(|p| bot.acceptance_of(p.id.as_str()) * p.rate)
            .sum()
    }

    /// Time for about `10·K` accepted arrivals at the slowest bot.
    pub fn default_warmup(&self) -> f64 {
        self.bots
            .iter()
            .map(|b| 10.0 * f64::from(self.k) / self.effective_total(b))
            .fold(0.0, f64::max)
    }

    pub fn effective_warmup(&self) -> f64 {
        self.warmup.unwrap_or_else(|| self.default_warmup())
    }

    /// Time of the last snapshot; no events are generated past it.
    pub fn horizon(&self) -> f64 {
        self.effective_warmup() + f64::from(self.snapshot_count) * self.snapshot_interval
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SimConfig {
        SimConfig::new([("a", 1.0), ("b", 2.0)], [("bot", vec![1.0, 0.5])], 2, 1.0, 10, 1)
    }

    #[test]
    fn valid_config_passes() {
        base().validate().unwrap();
        assert_eq!(base().effective_total(&base().bots[0]), 2.0);
        assert_eq!(base().default_warmup(), 10.0);
        assert_eq!(base().horizon(), 20.0);
    }

    #[test]
    fn invariant_violations_are_config_errors() {
        let cases: Vec<fn(&mut SimConfig)> = vec![
            |c| c.k = 0,
            |c| c.snapshot_interval = 0.0,
            |c| c.snapshot_count = 0,
            |c| c.warmup = Some(-1.0),
            |c| c.publishers[0].rate = -1.0,
            |c| c.publishers[1].id = "a".into(),
            |c| {
                c.bots[0].acceptance.insert("a".into(), 1.5);
            },
            |c| {
                c.bots[0].acceptance.insert("zzz".into(), 0.5);
            },
            |c| c.bots[0].acceptance.clear(),
            |c| c.bots.clear(),
        ];
        for (i, mutate) in cases.iter().enumerate() {
            let mut c = base();
            mutate(&mut c);
            assert!(matches!(c.validate(), Err(Error::Config(_))), "case {i}");
        }
    }

    #[test]
    fn parses_minimal_json() {
        let json = r#"{
            "publishers": [{"id": "a", "rate": 1.0}],
            "bots": [{"id": "b", "acceptance": {"a": 1.0}}],
            "k": 1, "snapshot_interval": 2.0, "snapshot_count": 3
        }"#;
        let c: SimConfig = serde_json::from_str(json).unwrap();
        c.validate().unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.time_unit_secs, 3600.0);
        assert_eq!(c.start_time.to_rfc3339(), "2018-01-01T00:00:00.000000000Z");
    }
}
