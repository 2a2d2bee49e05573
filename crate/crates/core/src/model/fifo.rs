//! Closed-form visibility and occupancy of a FIFO feed holding the newest `K` posts.
//!
//! Posts of publisher `j` reach a feed at rate `λⱼ` out of a total `λ`. The
//! publisher disappears from the top `K` only after `K` consecutive arrivals from
//! other publishers, so its visibility is `1 − (1 − λⱼ/λ)^K`. Every post resides
//! for `K` arrivals, i.e. `K/λ` time units, and Little's law gives the occupancy
//! `N = λⱼ K / λ`.

use std::collections::BTreeMap;

use super::rates::CreationRates;
use crate::error::{Error, Result};
use crate::types::PublisherId;

fn check_args(lambda_j: f64, lambda_total: f64, k: u32) -> Result<()> {
    if !(lambda_total > 0.0) || !lambda_total.is_finite() {
        return Err(Error::domain(format!("lambda_total must be > 0, got {lambda_total}")));
    }
    if !(lambda_j >= 0.0) {
        return Err(Error::domain(format!("lambda_j must be ≥ 0, got {lambda_j}")));
    }
    if lambda_j > lambda_total {
        return Err(Error::domain(format!(
            "lambda_j must be ≤ lambda_total, got {lambda_j} > {lambda_total}"
        )));
    }
    if k < 1 {
        return Err(Error::domain("K must be ≥ 1"));
    }
    Ok(())
}

/// Probability that at least one of the top `k` posts comes from the publisher.
pub fn fifo_visibility(lambda_j: f64, lambda_total: f64, k: u32) -> Result<f64> {
    check_args(lambda_j, lambda_total, k)?;
    let share = lambda_j / lambda_total;
    if k == 1 {
        // 1 − (1 − x) is x; returning the share keeps visibility and occupancy bit-equal
        return Ok(share);
    }
    // −expm1(K·ln(1 − x)) avoids cancellation for small shares
    let pi = -(f64::from(k) * (-share).ln_1p()).exp_m1();
    Ok(pi.clamp(0.0, 1.0))
}

/// Expected number of the publisher's posts among the top `k`.
pub fn fifo_occupancy(lambda_j: f64, lambda_total: f64, k: u32) -> Result<f64> {
    check_args(lambda_j, lambda_total, k)?;
    Ok(lambda_j * f64::from(k) / lambda_total)
}

/// Occupancy every publisher would have if all created posts reached the feed.
///
/// The result depends only on creation shares, so it is the same for every user.
pub fn unfiltered_occupancy(creation: &CreationRates, k: u32) -> Result<BTreeMap<PublisherId, f64>> {
    creation.require_positive_total()?;
    if k < 1 {
        return Err(Error::domain("K must be ≥ 1"));
    }
    let total = creation.total();
    creation
        .iter()
        .map(|(publisher, rate)| Ok((publisher.clone(), fifo_occupancy(rate.min(total), total, k)?)))
        .collect()
}
