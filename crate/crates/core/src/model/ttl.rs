//! Timer-based feed: every post stays for a fixed time `T` regardless of later
//! arrivals. Arrivals are Poisson, so the feed behaves as an M/G/∞ system.

use super::rates::CreationRates;
use crate::error::{Error, Result};

fn check(creation_j: f64, timer: f64) -> Result<()> {
    if !(creation_j >= 0.0) || !creation_j.is_finite() {
        return Err(Error::domain(format!("creation rate must be ≥ 0, got {creation_j}")));
    }
    if !(timer >= 0.0) || !timer.is_finite() {
        return Err(Error::domain(format!("timer must be ≥ 0, got {timer}")));
    }
    Ok(())
}

/// `1 − e^(−Λⱼ T)`: probability at least one post of the publisher is alive.
pub fn ttl_visibility(creation_j: f64, timer: f64) -> Result<f64> {
    check(creation_j, timer)?;
    Ok(-(-creation_j * timer).exp_m1())
}

/// `Λⱼ T`: mean number of live posts of the publisher.
pub fn ttl_occupancy(creation_j: f64, timer: f64) -> Result<f64> {
    check(creation_j, timer)?;
    Ok(creation_j * timer)
}

/// Timer that makes the expected feed content equal `k`, i.e. `K / Σ Λⱼ`.
pub fn ttl_timer_for_capacity(creation: &CreationRates, k: u32) -> Result<f64> {
    creation.require_positive_total()?;
    if k < 1 {
        return Err(Error::domain("K must be ≥ 1"));
    }
    Ok(f64::from(k) / creation.total())
}
