//! Markov-chain oracle for FIFO visibility.
//!
//! The state is the topmost position held by one of the publisher's posts,
//! `x ∈ {1, …, K+1}`, where `K+1` is a fictitious position meaning "not in
//! the feed". An arrival from the publisher (rate `λⱼ`) moves the chain to
//! state 1 from anywhere; an arrival from anyone else (rate `λ₋ⱼ`) pushes the
//! chain from `x` to `x+1` for `x ≤ K` and leaves `K+1` in place.
//!
//! The stationary law is obtained numerically from the balance equations, so it
//! serves as an independent check on the closed form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest chain solved with a dense LU factorization. Larger chains use a
/// banded elimination that exploits the line structure.
pub const DENSE_STATE_LIMIT: usize = 2048;

/// Condition estimates above this are reported as numerical failures.
const MAX_CONDITION: f64 = 1e12;

/// Stationary probabilities of the topmost-position chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    probs: Vec<f64>,
}

impl StationaryDistribution {
    /// `probs()[x - 1]` is the probability of state `x`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability that the topmost post of the publisher is at `position`
    /// (1-based; `K+1` means absent).
    pub fn prob(&self, position: usize) -> f64 {
        self.probs[position - 1]
    }

    /// Feed size `K` the chain was built for.
    pub fn k(&self) -> usize {
        self.probs.len() - 1
    }

    /// Probability the publisher has at least one post in the feed.
    pub fn visibility(&self) -> f64 {
        1.0 - self.probs[self.k()]
    }
}

fn check_args(lambda_j: f64, lambda_rest: f64, k: u32) -> Result<()> {
    if !(lambda_j >= 0.0 && lambda_rest >= 0.0) || !lambda_j.is_finite() || !lambda_rest.is_finite() {
        return Err(Error::domain(format!(
            "rates must be finite and ≥ 0, got lambda_j={lambda_j}, lambda_rest={lambda_rest}"
        )));
    }
    if lambda_j + lambda_rest <= 0.0 {
        return Err(Error::domain("lambda_j or lambda_rest must be > 0"));
    }
    if k < 1 {
        return Err(Error::domain("K must be ≥ 1"));
    }
    Ok(())
}

/// Solves the balance equations of the `(K+1)`-state chain.
pub fn ctmc_stationary(lambda_j: f64, lambda_rest: f64, k: u32) -> Result<StationaryDistribution> {
    check_args(lambda_j, lambda_rest, k)?;
    let states = k as usize + 1;
    let probs = if states <= DENSE_STATE_LIMIT {
        solve_dense(lambda_j, lambda_rest, states)?
    } else {
        solve_banded(lambda_j, lambda_rest, states)
    };
    finish(probs)
}

/// Transition matrix of the uniformized chain, `P = I + Q/Λ` with `Λ = λⱼ + λ₋ⱼ`.
fn uniformized(lambda_j: f64, lambda_rest: f64, states: usize) -> DMatrix<f64> {
    let uniform = lambda_j + lambda_rest;
    let (to_top, shift) = (lambda_j / uniform, lambda_rest / uniform);
    let mut p = DMatrix::zeros(states, states);
    for x in 0..states {
        p[(x, 0)] += to_top;
        if x + 1 < states {
            p[(x, x + 1)] += shift;
        } else {
            p[(x, x)] += shift;
        }
    }
    p
}

fn solve_dense(lambda_j: f64, lambda_rest: f64, states: usize) -> Result<Vec<f64>> {
    // π (P − I) = 0  ⇔  (P − I)ᵀ πᵀ = 0; the last equation is replaced by Σπ = 1
    let p = uniformized(lambda_j, lambda_rest, states);
    let mut a = (p - DMatrix::identity(states, states)).transpose();
    a.row_mut(states - 1).fill(1.0);
    let mut rhs = DVector::zeros(states);
    rhs[states - 1] = 1.0;

    let lu = a.clone().lu();
    let diag = lu.u().diagonal();
    let (min_pivot, max_pivot) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), d| {
        (lo.min(d.abs()), hi.max(d.abs()))
    });
    let condition = if min_pivot > 0.0 {
        max_pivot / min_pivot
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Numerical {
            message: format!("balance system with {states} states is singular or ill-conditioned"),
            condition,
        });
    }
    let solution = lu.solve(&rhs).ok_or_else(|| Error::Numerical {
        message: "LU solve of balance equations failed".into(),
        condition,
    })?;
    let residual = (&a * &solution - &rhs).amax();
    if !(residual <= 1e-9) {
        return Err(Error::Numerical {
            message: format!("balance residual {residual:e} too large"),
            condition,
        });
    }
    Ok(solution.iter().copied().collect())
}

/// Forward elimination along the chain for large `K`.
///
/// Balance at state `x ∈ {2..K}` reads `π(x)(λⱼ + λ₋ⱼ) = π(x−1) λ₋ⱼ`, state `K+1`
/// reads `π(K+1) λⱼ = π(K) λ₋ⱼ`, and the states are normalized afterwards.
fn solve_banded(lambda_j: f64, lambda_rest: f64, states: usize) -> Vec<f64> {
    let mut probs = vec![0.0; states];
    if lambda_j == 0.0 {
        probs[states - 1] = 1.0;
        return probs;
    }
    let uniform = lambda_j + lambda_rest;
    probs[0] = 1.0;
    for x in 1..states - 1 {
        probs[x] = probs[x - 1] * lambda_rest / uniform;
    }
    probs[states - 1] = probs[states - 2] * lambda_rest / lambda_j;
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    probs
}

fn finish(mut probs: Vec<f64>) -> Result<StationaryDistribution> {
    for p in probs.iter_mut() {
        if *p < 0.0 {
            if *p < -1e-12 {
                return Err(Error::Numerical {
                    message: format!("negative stationary probability {p:e}"),
                    condition: f64::NAN,
                });
            }
            *p = 0.0;
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Numerical {
            message: format!("stationary probabilities sum to {total}"),
            condition: f64::NAN,
        });
    }
    Ok(StationaryDistribution { probs })
}
