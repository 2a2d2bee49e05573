//! Discrete-event simulation of Poisson publishers feeding FIFO timelines.
//!
//! All publishers share one merged exponential clock with total rate `Λ = Σ Λⱼ`;
//! each event picks its publisher with probability `Λⱼ/Λ`. Every bot then
//! accepts the post independently with probability `pᵢⱼ`, which thins the
//! stream to rate `λᵢⱼ = pᵢⱼ Λⱼ`. Accepted posts enter at position 1 and push
//! older posts down; a post shifted past position `K` is evicted. Snapshots are
//! instantaneous reads of every timeline at `warmup + m·Δ`, `m = 1..=S`.

mod config;
mod rng;

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{weighted::WeightedIndex, Distribution, Exp};
use rayon::prelude::*;

pub use config::{BotSpec, PublisherSpec, SimConfig, DEFAULT_START_NANOS};
pub use rng::{derive_seed, rng_from_seed, SimRng, RNG_ALGORITHM};

use crate::error::{Error, Result};
use crate::types::{BotId, PostId, PostRecord, PublisherId, Snapshot, SnapshotEntry, SnapshotSet, Timestamp};

/// Ground-truth rates of one (bot, publisher) pair, in posts per time unit.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRow {
    pub bot_id: BotId,
    pub publisher_id: PublisherId,
    pub acceptance: f64,
    /// Λⱼ
    pub creation_rate: f64,
    /// λᵢⱼ = pᵢⱼ Λⱼ
    pub effective_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TruthTable {
    pub rows: Vec<TruthRow>,
}

impl TruthTable {
    pub fn from_config(config: &SimConfig) -> Self {
        let rows = config
            .bots
            .iter()
            .flat_map(|bot| {
                config.publishers.iter().map(move |p| {
                    let acceptance = bot.acceptance_of(p.id.as_str());
                    TruthRow {
                        bot_id: bot.id.clone(),
                        publisher_id: p.id.clone(),
                        acceptance,
                        creation_rate: p.rate,
                        effective_rate: acceptance * p.rate,
                    }
                })
            })
            .collect();
        Self { rows }
    }

    pub fn effective_rate(&self, bot: &str, publisher: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.bot_id.as_str() == bot && r.publisher_id.as_str() == publisher)
            .map(|r| r.effective_rate)
    }

    /// λᵢ for one bot.
    pub fn bot_total(&self, bot: &str) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.bot_id.as_str() == bot)
            .map(|r| r.effective_rate)
            .sum()
    }
}

/// Result of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    /// Every post published, in publication order.
    pub catalog: Vec<PostRecord>,
    /// Snapshots in capture order; bots in configuration order within one capture.
    pub snapshots: Vec<Snapshot>,
    pub truth: TruthTable,
}

impl SimOutput {
    pub fn snapshot_set(&self) -> Result<SnapshotSet> {
        SnapshotSet::new(self.snapshots.iter().cloned())
    }
}

/// Exponential inter-arrival sampling of a Poisson process on `(0, horizon]`.
pub fn generate_event_times<R: Rng + ?Sized>(rate: f64, horizon: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::domain(format!("rate must be ≥ 0, got {rate}")));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::domain(format!("horizon must be > 0, got {horizon}")));
    }
    if rate == 0.0 {
        return Ok(Vec::new());
    }
    let exp = Exp::new(rate).map_err(|e| Error::domain(e.to_string()))?;
    let mut times = Vec::with_capacity((rate * horizon * 1.1) as usize + 16);
    let mut t = 0.0;
    loop {
        let next = t + exp.sample(rng);
        if next > horizon {
            return Ok(times);
        }
        if next > t {
            times.push(next);
            t = next;
        }
    }
}

#[derive(Debug)]
struct Post {
    id: PostId,
    publisher: usize,
    time: Timestamp,
}

/// Runs one simulation. Deterministic given `config.seed`.
pub fn run_simulation(config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let rates: Vec<f64> = config.publishers.iter().map(|p| p.rate).collect();
    let total: f64 = rates.iter().sum();
    let chooser = WeightedIndex::new(&rates).map_err(|e| Error::Config(e.to_string()))?;
    let clock = Exp::new(total).map_err(|e| Error::Config(e.to_string()))?;
    let acceptance: Vec<Vec<f64>> = config
        .bots
        .iter()
        .map(|b| {
            config
                .publishers
                .iter()
                .map(|p| b.acceptance_of(p.id.as_str()))
                .collect()
        })
        .collect();

    let k = config.k as usize;
    let warmup = config.effective_warmup();
    let unit_nanos = config.time_unit_secs * 1e9;
    let start = config.start_time.as_nanos();
    let to_timestamp = |t: f64| Timestamp::from_nanos(start + (t * unit_nanos).round() as i64);

    let mut rng = rng_from_seed(config.seed);
    let expected_posts = (total * config.horizon()) as usize;
    let mut catalog = Vec::with_capacity(expected_posts + 16);
    let mut snapshots = Vec::with_capacity(config.snapshot_count as usize * config.bots.len());
    let mut timelines: Vec<VecDeque<usize>> = vec![VecDeque::with_capacity(k + 1); config.bots.len()];
    let mut posts: Vec<Post> = Vec::with_capacity(expected_posts + 16);

    let mut now = 0.0;
    let mut last_nanos = i64::MIN;
    let mut next_arrival = now + clock.sample(&mut rng);
    for m in 1..=config.snapshot_count {
        let snap_time = warmup + f64::from(m) * config.snapshot_interval;
        while next_arrival <= snap_time {
            now = next_arrival;
            let publisher = chooser.sample(&mut rng);
            // strictly increasing publication times even if two arrivals round to the same nanosecond
            let nanos = to_timestamp(now).as_nanos().max(last_nanos.saturating_add(1));
            last_nanos = nanos;
            let idx = posts.len();
            let post = Post {
                id: PostId::new(format!("p{idx}")),
                publisher,
                time: Timestamp::from_nanos(nanos),
            };
            catalog.push(PostRecord {
                post_id: post.id.clone(),
                publisher_id: config.publishers[publisher].id.clone(),
                publication_time: post.time,
            });
            posts.push(post);
            for (timeline, accept) in timelines.iter_mut().zip(&acceptance) {
                let u: f64 = rng.random();
                if u < accept[publisher] {
                    timeline.push_front(idx);
                    if timeline.len() > k {
                        timeline.pop_back();
                    }
                }
            }
            loop {
                let gap = clock.sample(&mut rng);
                if gap > 0.0 {
                    next_arrival = now + gap;
                    break;
                }
            }
        }
        let snapshot_time = to_timestamp(snap_time);
        for (bot, timeline) in config.bots.iter().zip(&timelines) {
            let entries = timeline
                .iter()
                .enumerate()
                .map(|(pos, &idx)| {
                    let post = &posts[idx];
                    SnapshotEntry {
                        position: pos as u32 + 1,
                        post_id: post.id.clone(),
                        publisher_id: config.publishers[post.publisher].id.clone(),
                        publication_time: post.time,
                        likes: None,
                        shares: None,
                    }
                })
                .collect();
            snapshots.push(Snapshot {
                bot_id: bot.id.clone(),
                snapshot_time,
                entries,
            });
        }
    }

    Ok(SimOutput {
        catalog,
        snapshots,
        truth: TruthTable::from_config(config),
    })
}

/// Independent replications of `config`, replication `r` seeded with
/// `derive_seed(config.seed, r)`. Runs in parallel; output is in replication order.
pub fn run_replications(config: &SimConfig, count: usize) -> Result<Vec<SimOutput>> {
    config.validate()?;
    (0..count as u64)
        .into_par_iter()
        .map(|r| {
            let mut c = config.clone();
            c.seed = derive_seed(config.seed, r);
            run_simulation(&c)
        })
        .collect()
}
