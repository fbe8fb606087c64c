//! Comparative experiments on the biased pair `{D_A, D_B}`: how many samples a
//! likelihood test needs to tell the members apart, and how far the best
//! interim-IR revenue without samples falls below the full surplus.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{coin_pair, coin_family, equal_revenue_product, DistributionFamily};
use crate::error::{Error, Result};
use crate::mechanisms::lookahead_revenue;
use crate::sampling::{seeded_rng, ProfileSampler};

const LIKELIHOOD_TIE_TOL: f64 = 1e-12;

/// Maximum-likelihood guess from per-profile sample counts.
fn distinguish_counts(fam: &DistributionFamily, counts: &[u64]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, d) in fam.members().iter().enumerate() {
        let mut ll = 0.0;
        let mut possible = true;
        for (&c, &p) in counts.iter().zip(d.probs()) {
            if c == 0 {
                continue;
            }
            if p == 0.0 {
                possible = false;
                break;
            }
            ll += c as f64 * p.ln();
        }
        if !possible {
            continue;
        }
        match best {
            Some((_, b)) if ll <= b + LIKELIHOOD_TIE_TOL * b.abs().max(1.0) => {}
            _ => best = Some((j, ll)),
        }
    }
    best.map(|(j, _)| j).ok_or(Error::AllZeroLikelihood)
}

/// Index of the member maximizing the likelihood of `samples` (joint profile
/// indices). Ties, up to a relative 1e-12, go to the lowest index; members
/// that give any sample zero mass are skipped.
pub fn naive_distinguish(fam: &DistributionFamily, samples: &[usize]) -> Result<usize> {
    let n = fam.space().n_profiles();
    let mut counts = vec![0u64; n];
    for &s in samples {
        if s >= n {
            return Err(Error::ProfileOutOfSupport(format!("sample index {s} out of range")));
        }
        counts[s] += 1;
    }
    distinguish_counts(fam, &counts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinguisherCurve {
    pub h: usize,
    pub eps: f64,
    pub sample_counts: Vec<usize>,
    pub error_rates: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl DistinguisherCurve {
    /// Binomial standard error of the `k`-th error rate.
    pub fn std_error(&self, k: usize) -> f64 {
        let p = self.error_rates[k];
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("samples,error_rate,std_error\n");
        for (k, (m, e)) in self.sample_counts.iter().zip(&self.error_rates).enumerate() {
            out.push_str(&format!("{m},{e},{}\n", self.std_error(k)));
        }
        out
    }
}

/// Empirical misidentification rate of [`naive_distinguish`] on `{D_A, D_B}`.
///
/// Each episode picks the true member uniformly and draws `m` samples from it.
/// Every sample count reuses the same seed, so curves are comparable across `m`.
pub fn distinguisher_curve(
    h: usize,
    eps: f64,
    sample_counts: &[usize],
    trials: u64,
    seed: u64,
) -> Result<DistinguisherCurve> {
    if trials < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 trials, got {trials}")));
    }
    let fam = coin_family(h, eps)?;
    let samplers: Vec<ProfileSampler> = fam.members().iter().map(ProfileSampler::new).collect();
    let mut counts = vec![0u64; fam.space().n_profiles()];
    let mut error_rates = Vec::with_capacity(sample_counts.len());
    for &m in sample_counts {
        let mut rng = seeded_rng(seed);
        let mut errors = 0u64;
        for _ in 0..trials {
            let truth = usize::from(rng.gen_bool(0.5));
            counts.iter_mut().for_each(|c| *c = 0);
            for _ in 0..m {
                counts[samplers[truth].draw(&mut rng)] += 1;
            }
            if distinguish_counts(&fam, &counts)? != truth {
                errors += 1;
            }
        }
        error_rates.push(errors as f64 / trials as f64);
    }
    Ok(DistinguisherCurve { h, eps, sample_counts: sample_counts.to_vec(), error_rates, trials, seed })
}

/// Full surplus against lookahead revenue on `D_A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub h: usize,
    pub eps: f64,
    /// `E[max(v_1, v_2)]` under `D_A`.
    pub full_surplus: f64,
    pub lookahead_rev_da: f64,
    /// Lookahead revenue on the independent product `A`.
    pub lookahead_rev_a: f64,
    /// `(1 + eps) * lookahead_rev_a`.
    pub skew_bound: f64,
    /// `2 (1 + eps) * lookahead_rev_a`, which caps any DSIC ex-post-IR revenue on `D_A`.
    pub revenue_bound: f64,
    pub within_skew_bound: bool,
    pub within_revenue_bound: bool,
    /// `full_surplus / lookahead_rev_da`.
    pub ratio: f64,
}

const BOUND_TOL: f64 = 1e-12;

pub fn surplus_gap(h: usize, eps: f64) -> Result<GapReport> {
    let (da, _) = coin_pair(h, eps)?;
    let a = equal_revenue_product(h)?;
    let full_surplus = da.expected_max_value();
    let lookahead_rev_da = lookahead_revenue(&da)?;
    let lookahead_rev_a = lookahead_revenue(&a)?;
    let skew_bound = (1.0 + eps) * lookahead_rev_a;
    let revenue_bound = 2.0 * skew_bound;
    Ok(GapReport {
        h,
        eps,
        full_surplus,
        lookahead_rev_da,
        lookahead_rev_a,
        skew_bound,
        revenue_bound,
        within_skew_bound: lookahead_rev_da <= skew_bound + BOUND_TOL,
        within_revenue_bound: lookahead_rev_da <= revenue_bound + BOUND_TOL,
        ratio: full_surplus / lookahead_rev_da,
    })
}
