//! Second price plus sample-dependent lotteries.
//!
//! For bidder `i` with value `v` under member `D^j`, the joint law of the
//! opponents' bids and `m` independent samples is
//! `π^{v,j} = D^j(· | v) ⊗ D^j ⊗ ... ⊗ D^j`. A lottery `c_i` indexed the same
//! way extracts the second-price surplus exactly when `π^{v,j} · c_i = Γ_{i,v,j}`
//! for every `(v, j)`.

use crate::dist::{check_cm_condition, span_dimension, DistributionFamily, TypeSpace};
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, SolveOutcome};

use super::{second_price, AuctionOutcome, Mechanism};

/// Expected second-price utility of one bidder, per own value and member.
#[derive(Clone, Debug, PartialEq)]
pub struct InterimUtilityTable {
    pub bidder: usize,
    n_members: usize,
    /// `(value, member)` in row-major order, member fastest.
    entries: Vec<f64>,
}

impl InterimUtilityTable {
    pub fn get(&self, value: usize, member: usize) -> f64 {
        self.entries[value * self.n_members + member]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }
}

pub fn vcg_interim_utilities(fam: &DistributionFamily, bidder: usize) -> Result<InterimUtilityTable> {
    let space = fam.space();
    let mut entries = Vec::with_capacity(space.size(bidder) * fam.len());
    for v in 0..space.size(bidder) {
        let own = space.value(bidder, v);
        for d in fam.members() {
            let cond = d.conditional(bidder, v)?;
            let u: f64 = cond
                .probs
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(o, &p)| {
                    let profile = space.compose(bidder, v, o);
                    p * second_price(&space.profile_values(&profile)).utility(bidder, own)
                })
                .sum();
            entries.push(u);
        }
    }
    Ok(InterimUtilityTable { bidder, n_members: fam.len(), entries })
}

/// `π^{v,j}` for `bidder` at value index `value` under member `member`.
pub fn build_conddist(
    fam: &DistributionFamily,
    bidder: usize,
    value: usize,
    member: usize,
    m: usize,
    cap: usize,
) -> Result<Vec<f64>> {
    let d = fam.member(member);
    let cond = d.conditional(bidder, value)?;
    let samples = linalg::kronecker_power(d.probs(), m, cap)?;
    linalg::kron_vec(&cond.probs, &samples, cap)
}

/// Rows `π^{v,j}` for all `(v, j)`, member fastest.
pub fn stacked_conddist(fam: &DistributionFamily, bidder: usize, m: usize, cap: usize) -> Result<DenseMatrix> {
    let space = fam.space();
    let rows = space.size(bidder) * fam.len();
    let cols = (space.n_opponent_profiles(bidder) as u128)
        .saturating_mul((space.n_profiles() as u128).saturating_pow(m as u32));
    if rows as u128 * cols > cap as u128 {
        return Err(Error::DimensionOverflow { requested: rows as u128 * cols, cap });
    }
    let mut out = Vec::with_capacity(rows);
    for v in 0..space.size(bidder) {
        for j in 0..fam.len() {
            out.push(build_conddist(fam, bidder, v, j, m, cap)?);
        }
    }
    DenseMatrix::from_rows(&out)
}

pub fn stacked_rank(fam: &DistributionFamily, bidder: usize, m: usize, tol: f64, cap: usize) -> Result<usize> {
    Ok(linalg::rank(&stacked_conddist(fam, bidder, m, cap)?, tol))
}

/// Worst-case sample count `k - r + 1`.
pub fn sample_bound(fam: &DistributionFamily, tol: f64) -> usize {
    fam.len() - span_dimension(fam, tol) + 1
}

fn require_cm(fam: &DistributionFamily, tol: f64) -> Result<()> {
    for (member, d) in fam.members().iter().enumerate() {
        if let Some(bidder) = check_cm_condition(d, tol)?.iter().position(|ok| !ok) {
            return Err(Error::CmViolation { member, bidder });
        }
    }
    Ok(())
}

/// Smallest `m` at which every bidder's stacked `π^{v,j}` have full row rank.
pub fn sample_search(fam: &DistributionFamily, tol: f64, cap: usize) -> Result<usize> {
    require_cm(fam, tol)?;
    let bound = sample_bound(fam, tol);
    let space = fam.space();
    for m in 0..=bound {
        let mut full = true;
        for i in 0..space.n_bidders() {
            if stacked_rank(fam, i, m, tol, cap)? < space.size(i) * fam.len() {
                full = false;
                break;
            }
        }
        if full {
            return Ok(m);
        }
    }
    Err(Error::RankDeficient { max_m: bound })
}

/// Charges for one bidder indexed by `(v_{-i}, s_1, ..., s_m)`, row-major with
/// the opponent profile slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct LotterySchedule {
    pub bidder: usize,
    pub m: usize,
    pub charges: Vec<f64>,
}

impl LotterySchedule {
    pub fn zero(space: &TypeSpace, bidder: usize, m: usize) -> Self {
        let len = space.n_opponent_profiles(bidder) * space.n_profiles().pow(m as u32);
        Self { bidder, m, charges: vec![0.0; len] }
    }

    pub fn index(&self, n_profiles: usize, opponent: usize, samples: &[usize]) -> usize {
        samples.iter().fold(opponent, |acc, &s| acc * n_profiles + s)
    }
}

/// Second price plus one lottery per bidder, built for a family.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleAuction {
    family: DistributionFamily,
    m: usize,
    lotteries: Vec<LotterySchedule>,
    residuals: Vec<f64>,
}

impl SampleAuction {
    /// Assemble from parts, checking shapes against the family's type space.
    pub fn from_parts(
        family: DistributionFamily,
        m: usize,
        lotteries: Vec<LotterySchedule>,
        residuals: Vec<f64>,
    ) -> Result<Self> {
        let space = family.space();
        let n = space.n_bidders();
        if lotteries.len() != n {
            return Err(Error::WrongLength { expected: n, got: lotteries.len() });
        }
        if residuals.len() != n {
            return Err(Error::WrongLength { expected: n, got: residuals.len() });
        }
        for (i, l) in lotteries.iter().enumerate() {
            let expected = LotterySchedule::zero(space, i, m).charges.len();
            if l.bidder != i || l.m != m {
                return Err(Error::InvalidArgument(format!("lottery {i} has bidder {} and m {}", l.bidder, l.m)));
            }
            if l.charges.len() != expected {
                return Err(Error::WrongLength { expected, got: l.charges.len() });
            }
            if l.charges.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidArgument(format!("lottery {i} has non-finite charges")));
            }
        }
        Ok(Self { family, m, lotteries, residuals })
    }

    /// Pure second price expressed with all-zero lotteries.
    pub fn zero(family: DistributionFamily, m: usize) -> Self {
        let n = family.space().n_bidders();
        let lotteries = (0..n).map(|i| LotterySchedule::zero(family.space(), i, m)).collect();
        Self { family, m, lotteries, residuals: vec![0.0; n] }
    }

    pub fn family(&self) -> &DistributionFamily {
        &self.family
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lotteries(&self) -> &[LotterySchedule] {
        &self.lotteries
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Lottery charge for `bidder` given the full reported profile and samples.
    pub fn charge(&self, bidder: usize, profile: &[usize], samples: &[usize]) -> f64 {
        let space = self.family.space();
        let l = &self.lotteries[bidder];
        l.charges[l.index(space.n_profiles(), space.opponent_index(bidder, profile), samples)]
    }

    pub fn max_abs_charge(&self) -> f64 {
        self.lotteries.iter().flat_map(|l| l.charges.iter()).fold(0.0, |a, c| a.max(c.abs()))
    }
}

impl Mechanism for SampleAuction {
    fn space(&self) -> &TypeSpace {
        self.family.space()
    }

    fn sample_count(&self) -> usize {
        self.m
    }

    fn outcome(&self, profile: &[usize], samples: &[usize]) -> Result<AuctionOutcome> {
        run_sample_auction(self, profile, samples)
    }
}

/// Solve each bidder's lottery system at sample count `m`, taking the
/// minimum-norm solution.
pub fn solve_lotteries(fam: &DistributionFamily, m: usize, tol: f64, cap: usize) -> Result<SampleAuction> {
    require_cm(fam, linalg::DEFAULT_RANK_TOL)?;
    let n = fam.space().n_bidders();
    let mut lotteries = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for bidder in 0..n {
        let a = stacked_conddist(fam, bidder, m, cap)?;
        let gamma = vcg_interim_utilities(fam, bidder)?;
        match linalg::min_norm_solve(&a, gamma.as_slice(), tol)? {
            SolveOutcome::Solution { x, residual } => {
                lotteries.push(LotterySchedule { bidder, m, charges: x });
                residuals.push(residual);
            }
            SolveOutcome::NoSolution { residual, .. } => return Err(Error::NoSolution { bidder, residual }),
        }
    }
    Ok(SampleAuction { family: fam.clone(), m, lotteries, residuals })
}

/// Run the auction on a reported profile (value indices) and `m` sample
/// profiles (joint profile indices).
pub fn run_sample_auction(auction: &SampleAuction, profile: &[usize], samples: &[usize]) -> Result<AuctionOutcome> {
    let space = auction.family.space();
    space.check_profile(profile)?;
    if samples.len() != auction.m {
        return Err(Error::ProfileOutOfSupport(format!("expected {} samples, got {}", auction.m, samples.len())));
    }
    if let Some(s) = samples.iter().find(|&&s| s >= space.n_profiles()) {
        return Err(Error::ProfileOutOfSupport(format!("sample index {s} out of range")));
    }
    let mut out = second_price(&space.profile_values(profile));
    for i in 0..space.n_bidders() {
        out.payment[i] += auction.charge(i, profile, samples);
    }
    Ok(out)
}
