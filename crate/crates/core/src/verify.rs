//! Exact certification by enumeration over the finite support, plus a seeded
//! Monte-Carlo cross-check.
//!
//! Every exact quantity sums over all reported profiles and all ordered
//! `m`-tuples of sample profiles, so the cost is `|T|^(m+1)` outcome
//! evaluations; the enumeration is refused above the configured cap.

use serde::{Deserialize, Serialize};

use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::mechanisms::{Mechanism, SampleAuction};
use crate::sampling::{seeded_rng, ProfileSampler, RunningStats};

/// Default tolerance for certification verdicts.
pub const DEFAULT_CERT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub member: usize,
    pub label: String,
    pub revenue: f64,
    /// `E[max_i v_i]`.
    pub surplus: f64,
    /// `interim_utilities[i][v]`: expected utility of bidder `i` at value index `v`.
    pub interim_utilities: Vec<Vec<f64>>,
    pub max_abs_interim_utility: f64,
    pub dsic_ok: bool,
    pub interim_ir_ok: bool,
    pub full_surplus_ok: bool,
}

impl CertificationReport {
    pub fn all_ok(&self) -> bool {
        self.dsic_ok && self.interim_ir_ok && self.full_surplus_ok
    }
}

fn enumeration_size(mech: &dyn Mechanism, extra: usize, cap: usize) -> Result<()> {
    let n = mech.space().n_profiles() as u128;
    let requested = n.saturating_pow(mech.sample_count() as u32 + 1).saturating_mul(extra as u128);
    if requested > cap as u128 {
        return Err(Error::DimensionOverflow { requested, cap });
    }
    Ok(())
}

/// Odometer step over sample tuples, last sample fastest. False on wrap-around.
fn advance(samples: &mut [usize], n: usize) -> bool {
    for s in samples.iter_mut().rev() {
        *s += 1;
        if *s < n {
            return true;
        }
        *s = 0;
    }
    false
}

/// Calls `f(profile, samples)` for every reported profile and every ordered
/// tuple of sample profiles.
fn for_each_realization(mech: &dyn Mechanism, mut f: impl FnMut(&[usize], &[usize]) -> Result<()>) -> Result<()> {
    let space = mech.space();
    let n = space.n_profiles();
    let m = mech.sample_count();
    let mut samples = vec![0usize; m];
    for idx in 0..n {
        let profile = space.profile_at(idx);
        samples.iter_mut().for_each(|s| *s = 0);
        loop {
            f(&profile, &samples)?;
            if !advance(&mut samples, n) {
                break;
            }
        }
    }
    Ok(())
}

/// Expected revenue, per-bidder interim utilities and welfare of `mech` when
/// both bids and samples come from `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMoments {
    pub revenue: f64,
    pub welfare: f64,
    pub interim_utilities: Vec<Vec<f64>>,
}

pub fn exact_moments(mech: &dyn Mechanism, d: &JointDistribution, cap: usize) -> Result<ExactMoments> {
    enumeration_size(mech, 1, cap)?;
    let space = mech.space();
    if space != d.space() {
        return Err(Error::HeterogeneousTypeSpaces);
    }
    let nb = space.n_bidders();
    let probs = d.probs();
    let mut revenue = 0.0;
    let mut welfare = 0.0;
    let mut joint_utility: Vec<Vec<f64>> = (0..nb).map(|i| vec![0.0; space.size(i)]).collect();
    for_each_realization(mech, |profile, samples| {
        let weight = d.prob(profile) * samples.iter().map(|&s| probs[s]).product::<f64>();
        if weight == 0.0 {
            return Ok(());
        }
        let out = mech.outcome(profile, samples)?;
        revenue += weight * out.revenue();
        for i in 0..nb {
            let v = space.value(i, profile[i]);
            welfare += weight * out.allocation[i] * v;
            joint_utility[i][profile[i]] += weight * out.utility(i, v);
        }
        Ok(())
    })?;
    let interim_utilities = joint_utility
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let marginal = d.marginal(i);
            // values with zero marginal carry no interim constraint
            row.iter().zip(&marginal).map(|(u, p)| if *p > 0.0 { u / p } else { 0.0 }).collect()
        })
        .collect();
    Ok(ExactMoments { revenue, welfare, interim_utilities })
}

/// Certify `auction` under each member of its own family.
pub fn exact_certify(auction: &SampleAuction, tol: f64, cap: usize) -> Result<Vec<CertificationReport>> {
    let dsic_ok = check_dsic(auction, tol, cap)?;
    let fam = auction.family();
    fam.members()
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let moments = exact_moments(auction, d, cap)?;
            let surplus = d.expected_max_value();
            let max_abs_interim_utility =
                moments.interim_utilities.iter().flatten().fold(0.0f64, |a, u| a.max(u.abs()));
            let interim_ir_ok = moments.interim_utilities.iter().flatten().all(|&u| u >= -tol);
            Ok(CertificationReport {
                member: j,
                label: fam.labels()[j].clone(),
                revenue: moments.revenue,
                surplus,
                interim_utilities: moments.interim_utilities,
                max_abs_interim_utility,
                dsic_ok,
                interim_ir_ok,
                full_surplus_ok: (moments.revenue - surplus).abs() <= tol,
            })
        })
        .collect()
}

/// Exhaustive dominant-strategy check over every profile, sample tuple,
/// bidder and misreport.
pub fn check_dsic(mech: &dyn Mechanism, tol: f64, cap: usize) -> Result<bool> {
    let space = mech.space();
    let widest = (0..space.n_bidders()).map(|i| space.size(i)).max().unwrap_or(1);
    enumeration_size(mech, widest * space.n_bidders(), cap)?;
    let mut ok = true;
    for_each_realization(mech, |profile, samples| {
        if !ok {
            return Ok(());
        }
        let truthful = mech.outcome(profile, samples)?;
        let mut report = profile.to_vec();
        for i in 0..space.n_bidders() {
            let value = space.value(i, profile[i]);
            let honest = truthful.utility(i, value);
            for lie in 0..space.size(i) {
                if lie == profile[i] {
                    continue;
                }
                report[i] = lie;
                let deviated = mech.outcome(&report, samples)?.utility(i, value);
                if honest < deviated - tol {
                    ok = false;
                }
            }
            report[i] = profile[i];
        }
        Ok(())
    })?;
    Ok(ok)
}

/// True iff every bidder's realized utility is at least `-tol` everywhere.
pub fn check_expost_ir(mech: &dyn Mechanism, tol: f64, cap: usize) -> Result<bool> {
    enumeration_size(mech, 1, cap)?;
    let space = mech.space();
    let mut ok = true;
    for_each_realization(mech, |profile, samples| {
        let out = mech.outcome(profile, samples)?;
        for i in 0..space.n_bidders() {
            if out.utility(i, space.value(i, profile[i])) < -tol {
                ok = false;
            }
        }
        Ok(())
    })?;
    Ok(ok)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub trials: u64,
    pub seed: u64,
    pub mean_revenue: f64,
    pub revenue_std_error: f64,
    pub mean_utility: Vec<f64>,
    pub utility_std_error: Vec<f64>,
}

/// Seeded simulation of `mech` with bids and samples drawn from `d`.
pub fn simulate(mech: &dyn Mechanism, d: &JointDistribution, trials: u64, seed: u64) -> Result<SimulationResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let space = mech.space();
    let nb = space.n_bidders();
    let sampler = ProfileSampler::new(d);
    let mut rng = seeded_rng(seed);
    let mut revenue = RunningStats::default();
    let mut utility = vec![RunningStats::default(); nb];
    let mut samples = vec![0usize; mech.sample_count()];
    for _ in 0..trials {
        let profile = space.profile_at(sampler.draw(&mut rng));
        for s in samples.iter_mut() {
            *s = sampler.draw(&mut rng);
        }
        let out = mech.outcome(&profile, &samples)?;
        revenue.push(out.revenue());
        for i in 0..nb {
            utility[i].push(out.utility(i, space.value(i, profile[i])));
        }
    }
    Ok(SimulationResult {
        trials,
        seed,
        mean_revenue: revenue.mean(),
        revenue_std_error: revenue.std_error(),
        mean_utility: utility.iter().map(RunningStats::mean).collect(),
        utility_std_error: utility.iter().map(RunningStats::std_error).collect(),
    })
}

/// Simulate `auction` under member `member` of its family.
pub fn monte_carlo(auction: &SampleAuction, member: usize, trials: u64, seed: u64) -> Result<SimulationResult> {
    let fam = auction.family();
    if member >= fam.len() {
        return Err(Error::InvalidArgument(format!("member {member} out of range for a family of {}", fam.len())));
    }
    simulate(auction, fam.member(member), trials, seed)
}
