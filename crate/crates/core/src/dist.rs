//! Finite joint distributions over bidder value profiles.
//!
//! Profiles are stored densely in row-major order over the Cartesian product
//! of the per-bidder value sets, with the last bidder varying fastest. The same
//! order is used for opponent profiles `v_{-i}` (the remaining bidders in their
//! original order) and for sample profiles, so Kronecker indexing downstream is
//! just concatenation of these indices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};

/// Inputs whose probabilities sum to within this of 1 are accepted and rescaled.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Per-bidder supports. Values are strictly increasing and non-negative.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeSpace {
    values: Vec<Vec<f64>>,
}

impl TypeSpace {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidTypeSpace(format!("need at least 2 bidders, got {}", values.len())));
        }
        for (i, vs) in values.iter().enumerate() {
            if vs.is_empty() {
                return Err(Error::InvalidTypeSpace(format!("bidder {i} has an empty value set")));
            }
            if vs.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidTypeSpace(format!("bidder {i} has a negative or non-finite value")));
            }
            if vs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidTypeSpace(format!("bidder {i} values are not strictly increasing")));
            }
        }
        Ok(Self { values })
    }

    /// `n` bidders all with values `1..=h`.
    pub fn integer_grid(n: usize, h: usize) -> Result<Self> {
        Self::new(vec![(1..=h).map(|v| v as f64).collect(); n])
    }

    pub fn n_bidders(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self, bidder: usize) -> &[f64] {
        &self.values[bidder]
    }

    pub fn all_values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn size(&self, bidder: usize) -> usize {
        self.values[bidder].len()
    }

    /// Number of full profiles, `|T|`.
    pub fn n_profiles(&self) -> usize {
        self.values.iter().map(Vec::len).product()
    }

    /// Number of opponent profiles, `|T_{-i}|`.
    pub fn n_opponent_profiles(&self, bidder: usize) -> usize {
        self.n_profiles() / self.size(bidder)
    }

    pub fn value(&self, bidder: usize, index: usize) -> f64 {
        self.values[bidder][index]
    }

    /// Position of `value` in bidder's support, compared exactly.
    pub fn index_of(&self, bidder: usize, value: f64) -> Option<usize> {
        self.values[bidder].iter().position(|&v| v == value)
    }

    pub fn check_profile(&self, profile: &[usize]) -> Result<()> {
        if profile.len() != self.n_bidders() {
            return Err(Error::ProfileOutOfSupport(format!(
                "profile has {} entries for {} bidders",
                profile.len(),
                self.n_bidders()
            )));
        }
        for (i, &p) in profile.iter().enumerate() {
            if p >= self.size(i) {
                return Err(Error::ProfileOutOfSupport(format!("bidder {i} value index {p} out of range")));
            }
        }
        Ok(())
    }

    /// Map a profile of values to per-bidder value indices.
    pub fn locate(&self, values: &[f64]) -> Result<Vec<usize>> {
        if values.len() != self.n_bidders() {
            return Err(Error::ProfileOutOfSupport(format!("{values:?}")));
        }
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| self.index_of(i, v).ok_or_else(|| Error::ProfileOutOfSupport(format!("{values:?}"))))
            .collect()
    }

    pub fn profile_index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.values).fold(0, |acc, (&p, vs)| acc * vs.len() + p)
    }

    pub fn profile_at(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.n_bidders()];
        for i in (0..self.n_bidders()).rev() {
            out[i] = index % self.size(i);
            index /= self.size(i);
        }
        out
    }

    pub fn profile_values(&self, profile: &[usize]) -> Vec<f64> {
        profile.iter().enumerate().map(|(i, &p)| self.value(i, p)).collect()
    }

    /// Row-major index of the opponents of `bidder` within `profile`.
    pub fn opponent_index(&self, bidder: usize, profile: &[usize]) -> usize {
        profile
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != bidder)
            .fold(0, |acc, (i, &p)| acc * self.size(i) + p)
    }

    /// Rebuild a full profile from bidder's own index and an opponent index.
    pub fn compose(&self, bidder: usize, own: usize, mut opponent: usize) -> Vec<usize> {
        let mut out = vec![0; self.n_bidders()];
        out[bidder] = own;
        for i in (0..self.n_bidders()).rev().filter(|&i| i != bidder) {
            out[i] = opponent % self.size(i);
            opponent /= self.size(i);
        }
        out
    }

    /// True when every bidder has the same value set.
    pub fn is_homogeneous(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }
}

/// Probability mass over the profiles of a [`TypeSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    space: TypeSpace,
    probs: Vec<f64>,
}

impl JointDistribution {
    /// Validates and, if needed, rescales `probs` to sum to 1.
    ///
    /// Vectors already normalized to working precision are kept bit-for-bit so
    /// that serialization round trips are exact.
    pub fn new(space: TypeSpace, mut probs: Vec<f64>) -> Result<Self> {
        let expected = space.n_profiles();
        if probs.len() != expected {
            return Err(Error::WrongLength { expected, got: probs.len() });
        }
        if let Some((index, &mass)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
            return Err(Error::NegativeMass { index, mass });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        if (sum - 1.0).abs() > probs.len() as f64 * f64::EPSILON {
            probs.iter_mut().for_each(|p| *p /= sum);
        }
        Ok(Self { space, probs })
    }

    pub fn space(&self) -> &TypeSpace {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, profile: &[usize]) -> f64 {
        self.probs[self.space.profile_index(profile)]
    }

    /// Marginal distribution of one bidder's value.
    pub fn marginal(&self, bidder: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.space.size(bidder)];
        for (idx, &p) in self.probs.iter().enumerate() {
            out[self.space.profile_at(idx)[bidder]] += p;
        }
        out
    }

    /// Unnormalized slice `D(v_i, ·)` over opponent profiles.
    pub fn slice(&self, bidder: usize, value: usize) -> Vec<f64> {
        (0..self.space.n_opponent_profiles(bidder))
            .map(|o| self.prob(&self.space.compose(bidder, value, o)))
            .collect()
    }

    /// Conditional distribution of opponents' values given bidder's value index.
    pub fn conditional(&self, bidder: usize, value: usize) -> Result<ConditionalVector> {
        let slice = self.slice(bidder, value);
        let mass: f64 = slice.iter().sum();
        if mass <= 0.0 {
            return Err(Error::ZeroMarginal { bidder, value });
        }
        Ok(ConditionalVector { bidder, value, probs: slice.into_iter().map(|p| p / mass).collect() })
    }

    /// Coordinate-permuted copy: bidder `i` of the result takes the role of
    /// bidder `perm[i]` of `self`. Requires a homogeneous type space.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if !self.space.is_homogeneous() {
            return Err(Error::HeterogeneousTypeSpaces);
        }
        let n = self.space.n_bidders();
        let mut probs = vec![0.0; self.probs.len()];
        for (idx, p) in probs.iter_mut().enumerate() {
            let profile = self.space.profile_at(idx);
            let mut source = vec![0; n];
            for i in 0..n {
                source[perm[i]] = profile[i];
            }
            *p = self.prob(&source);
        }
        Ok(Self { space: self.space.clone(), probs })
    }

    /// `E[max_i v_i]`.
    pub fn expected_max_value(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(idx, &p)| {
                let vals = self.space.profile_values(&self.space.profile_at(idx));
                p * vals.into_iter().fold(f64::NEG_INFINITY, f64::max)
            })
            .sum()
    }
}

/// Conditional mass on opponent profiles given one bidder's value.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalVector {
    pub bidder: usize,
    /// Index of the conditioning value in the bidder's support.
    pub value: usize,
    pub probs: Vec<f64>,
}

/// Ordered family of joint distributions over one type space.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionFamily {
    members: Vec<JointDistribution>,
    labels: Vec<String>,
}

impl DistributionFamily {
    pub fn new(members: Vec<JointDistribution>) -> Result<Self> {
        let labels = (0..members.len()).map(|j| format!("D{}", j + 1)).collect();
        Self::with_labels(members, labels)
    }

    pub fn with_labels(members: Vec<JointDistribution>, labels: Vec<String>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyFamily)?;
        if members.iter().any(|d| d.space != first.space) {
            return Err(Error::HeterogeneousTypeSpaces);
        }
        if labels.len() != members.len() {
            return Err(Error::WrongLength { expected: members.len(), got: labels.len() });
        }
        Ok(Self { members, labels })
    }

    pub fn space(&self) -> &TypeSpace {
        &self.members[0].space
    }

    pub fn members(&self) -> &[JointDistribution] {
        &self.members
    }

    pub fn member(&self, j: usize) -> &JointDistribution {
        &self.members[j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn new_joint(space: TypeSpace, probs: Vec<f64>) -> Result<JointDistribution> {
    JointDistribution::new(space, probs)
}

pub fn conditional(d: &JointDistribution, bidder: usize, value: usize) -> Result<ConditionalVector> {
    d.conditional(bidder, value)
}

/// Equal-revenue marginal on `1..=h`: `P(v >= k) = 1/k`.
pub fn equal_revenue(h: usize) -> Result<Vec<f64>> {
    if h == 0 {
        return Err(Error::BadH(h));
    }
    Ok((1..=h)
        .map(|k| if k < h { 1.0 / (k as f64 * (k + 1) as f64) } else { 1.0 / h as f64 })
        .collect())
}

/// Independent joint distribution with the given marginals on `space`.
pub fn product_joint(space: TypeSpace, marginals: &[Vec<f64>]) -> Result<JointDistribution> {
    if marginals.len() != space.n_bidders() {
        return Err(Error::WrongLength { expected: space.n_bidders(), got: marginals.len() });
    }
    for (i, m) in marginals.iter().enumerate() {
        if m.len() != space.size(i) {
            return Err(Error::WrongLength { expected: space.size(i), got: m.len() });
        }
    }
    let probs = (0..space.n_profiles())
        .map(|idx| space.profile_at(idx).iter().enumerate().map(|(i, &p)| marginals[i][p]).product())
        .collect();
    JointDistribution::new(space, probs)
}

/// Two bidders with i.i.d. equal-revenue values truncated at `h`.
pub fn equal_revenue_product(h: usize) -> Result<JointDistribution> {
    let er = equal_revenue(h)?;
    product_joint(TypeSpace::integer_grid(2, h)?, &[er.clone(), er])
}

/// The biased pair `(D_A, D_B)`.
///
/// Both start from two i.i.d. equal-revenue draws. With probability `eps` the
/// higher value goes to bidder 1 (for `D_A`) or bidder 2 (for `D_B`); otherwise
/// the values are assigned at random. As matrices, with `A` the product matrix
/// and `B` its upper triangle with halved diagonal, `D_A = A + eps (Bᵀ - B)` and
/// `D_B = A + eps (B - Bᵀ)`.
pub fn coin_pair(h: usize, eps: f64) -> Result<(JointDistribution, JointDistribution)> {
    if h < 2 {
        return Err(Error::BadH(h));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadEps(eps));
    }
    coin_pair_unchecked(h, eps)
}

pub(crate) fn coin_pair_unchecked(h: usize, eps: f64) -> Result<(JointDistribution, JointDistribution)> {
    let er = equal_revenue(h)?;
    let a = |r: usize, c: usize| er[r] * er[c];
    let b = |r: usize, c: usize| match r.cmp(&c) {
        std::cmp::Ordering::Less => a(r, c),
        std::cmp::Ordering::Equal => a(r, c) / 2.0,
        std::cmp::Ordering::Greater => 0.0,
    };
    let mut da = Vec::with_capacity(h * h);
    let mut db = Vec::with_capacity(h * h);
    for r in 0..h {
        for c in 0..h {
            let skew = b(c, r) - b(r, c);
            da.push(a(r, c) + eps * skew);
            db.push(a(r, c) - eps * skew);
        }
    }
    let space = TypeSpace::integer_grid(2, h)?;
    Ok((JointDistribution::new(space.clone(), da)?, JointDistribution::new(space, db)?))
}

/// `{D_A, D_B}` as a labelled family.
pub fn coin_family(h: usize, eps: f64) -> Result<DistributionFamily> {
    let (da, db) = coin_pair(h, eps)?;
    DistributionFamily::with_labels(vec![da, db], vec!["D_A".into(), "D_B".into()])
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// All distinct coordinate permutations of `d`, identity first.
pub fn permutation_family(d: &JointDistribution) -> Result<DistributionFamily> {
    let mut members: Vec<JointDistribution> = Vec::new();
    let mut labels = Vec::new();
    for perm in permutations(d.space.n_bidders()) {
        let p = d.permuted(&perm)?;
        if !members.iter().any(|m| m.probs == p.probs) {
            labels.push(format!("perm{perm:?}"));
            members.push(p);
        }
    }
    DistributionFamily::with_labels(members, labels)
}

/// Matrix whose rows are bidder's conditional vectors, one per value.
pub fn conditional_matrix(d: &JointDistribution, bidder: usize) -> Result<DenseMatrix> {
    let rows = (0..d.space.size(bidder))
        .map(|v| d.conditional(bidder, v).map(|c| c.probs))
        .collect::<Result<Vec<_>>>()?;
    DenseMatrix::from_rows(&rows)
}

/// Per-bidder verdict: are the conditionals `{D_{i,v}}_v` linearly independent?
pub fn check_cm_condition(d: &JointDistribution, tol: f64) -> Result<Vec<bool>> {
    (0..d.space.n_bidders())
        .map(|i| Ok(linalg::rank(&conditional_matrix(d, i)?, tol) == d.space.size(i)))
        .collect()
}

/// Dimension of the span of the members' probability vectors.
pub fn span_dimension(fam: &DistributionFamily, tol: f64) -> usize {
    let rows: Vec<Vec<f64>> = fam.members.iter().map(|d| d.probs.clone()).collect();
    linalg::rank(&DenseMatrix::from_rows(&rows).expect("members share a type space"), tol)
}

/// Free parameters of the tight-sample-count construction.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundParams {
    /// Unnormalized mass of the shared first row of bidder 1; one entry per
    /// value of bidder 2.
    pub shared_row: Vec<f64>,
    /// Base mass of every other entry.
    pub base: f64,
    /// Size of the per-member bumps relative to `base`.
    pub perturbation: f64,
}

impl LowerBoundParams {
    pub fn uniform(t2: usize) -> Self {
        Self { shared_row: vec![1.0; t2], base: 1.0, perturbation: 0.1 }
    }

    /// Randomized positive parameters, reproducible per seed.
    pub fn seeded(t2: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            shared_row: (0..t2).map(|_| rng.gen_range(0.5..1.5)).collect(),
            base: 1.0,
            perturbation: rng.gen_range(0.05..0.3),
        }
    }
}

/// A family of `k` two-bidder distributions spanning exactly `r` dimensions
/// that needs `k - r + 1` samples.
///
/// Bidder 1's lowest value has the same conditional under every member. The
/// first two members are `J + δE` and `J + 2δE` (all-`base` matrix plus a
/// diagonal bump below the shared row); members `3..=r` add one off-diagonal
/// bump each; members `r+1..=k` are convex mixtures `λ_j D¹ + (1-λ_j) D²` with
/// `λ_j = j/(k-r+1)`. The result is re-verified before it is returned.
pub fn lower_bound_family(k: usize, r: usize, sizes: (usize, usize)) -> Result<DistributionFamily> {
    lower_bound_family_with(k, r, sizes, &LowerBoundParams::uniform(sizes.1))
}

pub fn lower_bound_family_with(
    k: usize,
    r: usize,
    (t1, t2): (usize, usize),
    params: &LowerBoundParams,
) -> Result<DistributionFamily> {
    if r < 2 || r >= k {
        return Err(Error::InfeasibleSizes(format!("need 2 <= r < k, got k={k}, r={r}")));
    }
    // CM for both bidders forces a square support
    if t1 != t2 {
        return Err(Error::InfeasibleSizes(format!("supports must have equal sizes, got {t1} and {t2}")));
    }
    let min_size = r.max(2) + 1;
    if t1 < min_size {
        return Err(Error::InfeasibleSizes(format!("supports must have at least {min_size} values")));
    }
    if params.shared_row.len() != t2 || params.shared_row.iter().any(|&x| !(x > 0.0)) || !(params.base > 0.0) {
        return Err(Error::InfeasibleSizes("shared row must be positive with one entry per value".into()));
    }
    // off-diagonal slots (a, b) with a, b >= 1, a != b; a bump at column 0 would
    // make the row differences dependent on the all-ones direction
    let slots: Vec<(usize, usize)> = (1..t1)
        .flat_map(|a| (1..t2).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    if slots.len() < r - 2 {
        return Err(Error::InfeasibleSizes(format!("not enough free entries for r={r}")));
    }

    let delta = params.perturbation * params.base;
    let build = |scale: f64, bump: Option<(usize, usize)>| {
        let mut m = vec![params.base; t1 * t2];
        m[..t2].copy_from_slice(&params.shared_row);
        for a in 1..t1 {
            m[a * t2 + a] += scale * delta;
        }
        if let Some((a, b)) = bump {
            m[a * t2 + b] += delta;
        }
        let total: f64 = m.iter().sum();
        m.iter_mut().for_each(|x| *x /= total);
        m
    };

    let mut raw = vec![build(1.0, None), build(2.0, None)];
    raw.extend(slots.iter().take(r - 2).map(|&slot| build(1.0, Some(slot))));
    for j in 1..=(k - r) {
        let lambda = j as f64 / (k - r + 1) as f64;
        let mix = raw[0].iter().zip(&raw[1]).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
        raw.push(mix);
    }

    let space = TypeSpace::integer_grid(2, t1)?;
    let members = raw
        .into_iter()
        .map(|p| JointDistribution::new(space.clone(), p))
        .collect::<Result<Vec<_>>>()?;
    let labels = (1..=k).map(|j| format!("L{j}")).collect();
    let fam = DistributionFamily::with_labels(members, labels)?;
    verify_lower_bound_family(&fam, r)?;
    Ok(fam)
}

fn verify_lower_bound_family(fam: &DistributionFamily, r: usize) -> Result<()> {
    let tol = linalg::DEFAULT_RANK_TOL;
    for (j, d) in fam.members().iter().enumerate() {
        if let Some(bidder) = check_cm_condition(d, tol)?.iter().position(|ok| !ok) {
            return Err(Error::InfeasibleSizes(format!("member {j} fails the CM condition for bidder {bidder}")));
        }
    }
    let dim = span_dimension(fam, tol);
    if dim != r {
        return Err(Error::InfeasibleSizes(format!("span dimension {dim}, wanted {r}")));
    }
    let reference = fam.member(0).conditional(0, 0)?.probs;
    for d in fam.members() {
        let c = d.conditional(0, 0)?.probs;
        if c.iter().zip(&reference).any(|(x, y)| (x - y).abs() > 1e-12) {
            return Err(Error::InfeasibleSizes("shared conditional differs across members".into()));
        }
    }
    Ok(())
}
