//! Auction constructions.
//!
//! Every mechanism maps a reported profile (per-bidder value indices) and a
//! tuple of sample profiles (joint profile indices) to an [`AuctionOutcome`].
//! Mechanisms that do not use samples ignore the second argument.

mod lookahead;
mod lottery;

pub use lookahead::{lookahead_outcome, lookahead_revenue, LookaheadAuction};
pub use lottery::{
    build_conddist, run_sample_auction, sample_bound, sample_search, solve_lotteries, stacked_conddist,
    stacked_rank, vcg_interim_utilities, InterimUtilityTable, LotterySchedule, SampleAuction,
};

use crate::dist::TypeSpace;
use crate::error::Result;

/// Allocation probabilities and payments; negative payments go to the bidder.
#[derive(Clone, Debug, PartialEq)]
pub struct AuctionOutcome {
    pub allocation: Vec<f64>,
    pub payment: Vec<f64>,
}

impl AuctionOutcome {
    pub fn empty(n: usize) -> Self {
        Self { allocation: vec![0.0; n], payment: vec![0.0; n] }
    }

    /// Quasi-linear utility of `bidder` whose true value is `value`.
    pub fn utility(&self, bidder: usize, value: f64) -> f64 {
        self.allocation[bidder] * value - self.payment[bidder]
    }

    pub fn revenue(&self) -> f64 {
        self.payment.iter().sum()
    }

    pub fn winner(&self) -> Option<usize> {
        self.allocation.iter().position(|&x| x > 0.0)
    }
}

/// Anything that can be run on a reported profile plus sample profiles.
pub trait Mechanism {
    fn space(&self) -> &TypeSpace;

    /// Number of sample profiles consumed per run.
    fn sample_count(&self) -> usize {
        0
    }

    fn outcome(&self, profile: &[usize], samples: &[usize]) -> Result<AuctionOutcome>;
}

/// Highest bid wins (lowest index on ties) and pays the highest other bid.
pub fn second_price(values: &[f64]) -> AuctionOutcome {
    assert!(values.len() >= 2, "second price needs at least two bidders");
    let mut winner = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[winner] {
            winner = i;
        }
    }
    let price = values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != winner)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out = AuctionOutcome::empty(values.len());
    out.allocation[winner] = 1.0;
    out.payment[winner] = price;
    out
}

/// Plain second-price auction on a type space.
#[derive(Clone, Debug)]
pub struct SecondPriceAuction {
    pub space: TypeSpace,
}

impl Mechanism for SecondPriceAuction {
    fn space(&self) -> &TypeSpace {
        &self.space
    }

    fn outcome(&self, profile: &[usize], _samples: &[usize]) -> Result<AuctionOutcome> {
        self.space.check_profile(profile)?;
        Ok(second_price(&self.space.profile_values(profile)))
    }
}
