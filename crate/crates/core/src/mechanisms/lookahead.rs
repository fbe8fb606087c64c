//! Two-bidder lookahead auction: the higher bidder faces the revenue-optimal
//! posted price for her value distribution conditioned on the lower bid and on
//! her being the higher bidder. Bidder 1 (index 0) counts as higher on ties.

use crate::dist::{JointDistribution, TypeSpace};
use crate::error::{Error, Result};

use super::{AuctionOutcome, Mechanism};

const PRICE_TIE_TOL: f64 = 1e-12;

fn require_two(space: &TypeSpace) -> Result<()> {
    match space.n_bidders() {
        2 => Ok(()),
        got => Err(Error::UnsupportedBidderCount { supported: 2, got }),
    }
}

/// Best posted price over ascending `(price, mass)` candidates, where a price
/// sells to all mass at or above it. Near-ties go to the lowest price.
/// Returns `(price, unnormalized expected revenue)`.
fn optimal_price(candidates: &[(f64, f64)]) -> (f64, f64) {
    let mut tail = 0.0;
    let mut revenues = vec![0.0; candidates.len()];
    for (k, &(price, mass)) in candidates.iter().enumerate().rev() {
        tail += mass;
        revenues[k] = price * tail;
    }
    let best = revenues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = PRICE_TIE_TOL * best.abs().max(1.0);
    let k = revenues.iter().position(|&r| r >= best - slack).expect("non-empty candidate set");
    (candidates[k].0, revenues[k])
}

/// Price candidates for `high` given `low`'s value index.
fn candidates(d: &JointDistribution, high: usize, low_index: usize) -> Vec<(f64, f64)> {
    let space = d.space();
    let low = 1 - high;
    let floor = space.value(low, low_index);
    (0..space.size(high))
        .filter(|&x| {
            let v = space.value(high, x);
            if high == 0 {
                v >= floor
            } else {
                v > floor
            }
        })
        .map(|x| {
            let mut profile = [0usize; 2];
            profile[high] = x;
            profile[low] = low_index;
            (space.value(high, x), d.prob(&profile))
        })
        .collect()
}

/// Outcome of the lookahead auction at a profile of value indices.
pub fn lookahead_outcome(d: &JointDistribution, profile: &[usize]) -> Result<AuctionOutcome> {
    let space = d.space();
    require_two(space)?;
    space.check_profile(profile)?;
    let high = if space.value(0, profile[0]) >= space.value(1, profile[1]) { 0 } else { 1 };
    let low = 1 - high;
    let (price, _) = optimal_price(&candidates(d, high, profile[low]));
    let mut out = AuctionOutcome::empty(2);
    if space.value(high, profile[high]) >= price {
        out.allocation[high] = 1.0;
        out.payment[high] = price;
    }
    Ok(out)
}

/// Expected lookahead revenue, summing the optimal conditional price revenue
/// over each possible lower bid for each bidder.
pub fn lookahead_revenue(d: &JointDistribution) -> Result<f64> {
    let space = d.space();
    require_two(space)?;
    let mut total = 0.0;
    for high in 0..2 {
        for low_index in 0..space.size(1 - high) {
            let c = candidates(d, high, low_index);
            if !c.is_empty() {
                total += optimal_price(&c).1;
            }
        }
    }
    Ok(total)
}

/// The lookahead auction as a [`Mechanism`] (uses no samples).
#[derive(Clone, Debug)]
pub struct LookaheadAuction {
    pub dist: JointDistribution,
}

impl Mechanism for LookaheadAuction {
    fn space(&self) -> &TypeSpace {
        self.dist.space()
    }

    fn outcome(&self, profile: &[usize], _samples: &[usize]) -> Result<AuctionOutcome> {
        lookahead_outcome(&self.dist, profile)
    }
}
