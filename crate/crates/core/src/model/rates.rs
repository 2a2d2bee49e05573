use std::collections::BTreeMap;
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::types::PublisherId;

/// Nonnegative per-publisher rates together with their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMap {
    per_publisher: BTreeMap<PublisherId, f64>,
    total: f64,
}

impl RateMap {
    /// Builds the map, summing duplicate publishers.
    pub fn new<I, P>(rates: I) -> Result<Self>
    where
        I: IntoIterator<Item = (P, f64)>,
        P: Into<PublisherId>,
    {
        let mut per_publisher = BTreeMap::new();
        for (publisher, rate) in rates {
            let publisher = publisher.into();
            if !rate.is_finite() || rate < 0.0 {
                return Err(Error::domain(format!(
                    "rate of publisher '{publisher}' must be finite and ≥ 0, got {rate}"
                )));
            }
            *per_publisher.entry(publisher).or_insert(0.0) += rate;
        }
        let total = per_publisher.values().sum();
        Ok(Self { per_publisher, total })
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn get(&self, publisher: &str) -> f64 {
        self.per_publisher.get(publisher).copied().unwrap_or(0.0)
    }

    /// Rate of everyone except `publisher`.
    pub fn rest(&self, publisher: &str) -> f64 {
        (self.total - self.get(publisher)).max(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PublisherId, f64)> {
        self.per_publisher.iter().map(|(p, r)| (p, *r))
    }

    pub fn len(&self) -> usize {
        self.per_publisher.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_publisher.is_empty()
    }

    pub(crate) fn require_positive_total(&self) -> Result<()> {
        if self.total > 0.0 {
            Ok(())
        } else {
            Err(Error::domain("total rate must be > 0 (all rates are zero)"))
        }
    }
}

/// Rates at which each publisher's posts enter one user's feed (after filtering).
#[derive(Debug, Clone, PartialEq)]
pub struct FeedRates(RateMap);

/// Rates at which each publisher creates posts, before any filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct CreationRates(RateMap);

macro_rules! rate_wrapper {
    ($name:ident) => {
        impl $name {
            pub fn new<I, P>(rates: I) -> Result<Self>
            where
                I: IntoIterator<Item = (P, f64)>,
                P: Into<PublisherId>,
            {
                RateMap::new(rates).map(Self)
            }
        }

        impl Deref for $name {
            type Target = RateMap;

            fn deref(&self) -> &RateMap {
                &self.0
            }
        }
    };
}

rate_wrapper!(FeedRates);
rate_wrapper!(CreationRates);
