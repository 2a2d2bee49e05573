//! Analytic feed models: closed-form FIFO, its Markov-chain oracle, and the TTL variant.

mod ctmc;
mod fifo;
mod rates;
mod ttl;

pub use ctmc::{ctmc_stationary, StationaryDistribution, DENSE_STATE_LIMIT};
pub use fifo::{fifo_occupancy, fifo_visibility, unfiltered_occupancy};
pub use rates::{CreationRates, FeedRates, RateMap};
pub use ttl::{ttl_occupancy, ttl_timer_for_capacity, ttl_visibility};
