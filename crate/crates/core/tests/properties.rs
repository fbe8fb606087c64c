use cm_core::dist::{
    coin_pair, equal_revenue_product, lower_bound_family, new_joint, product_joint, span_dimension, DistributionFamily,
    JointDistribution, TypeSpace,
};
use cm_core::experiments::{distinguisher_curve, surplus_gap};
use cm_core::linalg::{self, kron_vec, min_norm_solve, DenseMatrix, DEFAULT_CAP, DEFAULT_RANK_TOL, DEFAULT_SOLVE_TOL};
use cm_core::mechanisms::{
    lookahead_revenue, run_sample_auction, sample_bound, solve_lotteries, stacked_rank, LookaheadAuction, Mechanism,
};
use cm_core::sampling::seeded_rng;
use cm_core::verify::{check_dsic, check_expost_ir, exact_certify, exact_moments};
use proptest::prelude::*;
use rand::Rng;

const PROPTEST_CASES: u32 = 48;

fn normalized(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn joint(t: usize, w: &[f64]) -> JointDistribution {
    new_joint(TypeSpace::integer_grid(2, t).unwrap(), normalized(w)).unwrap()
}

fn positive_weights(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, len)
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-3.0f64..3.0, rows * cols).prop_map(move |d| DenseMatrix::new(rows, cols, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(PROPTEST_CASES))]

    #[test]
    fn conditionals_are_normalized(w in positive_weights(9)) {
        let d = joint(3, &w);
        for i in 0..2 {
            for v in 0..3 {
                let s: f64 = d.conditional(i, v).unwrap().probs.iter().sum();
                prop_assert!((s - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn product_conditionals_ignore_own_value(a in positive_weights(3), b in positive_weights(4)) {
        let space = TypeSpace::new(vec![vec![1.0, 2.0, 3.0], vec![0.5, 1.0, 4.0, 9.0]]).unwrap();
        let d = product_joint(space, &[normalized(&a), normalized(&b)]).unwrap();
        for i in 0..2 {
            let first = d.conditional(i, 0).unwrap().probs;
            for v in 1..d.space().size(i) {
                let c = d.conditional(i, v).unwrap().probs;
                let dev = c.iter().zip(&first).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                prop_assert!(dev <= 1e-15);
            }
        }
    }

    #[test]
    fn span_dimension_ignores_order(ws in prop::collection::vec(positive_weights(4), 1..5), rot in 0usize..4) {
        let mut members: Vec<JointDistribution> = ws.iter().map(|w| joint(2, w)).collect();
        let before = span_dimension(&DistributionFamily::new(members.clone()).unwrap(), DEFAULT_RANK_TOL);
        let shift = rot % members.len();
        members.rotate_left(shift);
        members.reverse();
        let after = span_dimension(&DistributionFamily::new(members).unwrap(), DEFAULT_RANK_TOL);
        prop_assert_eq!(before, after);
    }

    #[test]
    fn coin_routes_agree(h in 2usize..10, eps in 0.001f64..0.999) {
        let (da, db) = coin_pair(h, eps).unwrap();
        let a = equal_revenue_product(h).unwrap();
        for r in 0..h {
            for c in 0..h {
                let scale = if r > c { 1.0 + eps } else if r < c { 1.0 - eps } else { 1.0 };
                prop_assert!((da.prob(&[r, c]) - scale * a.prob(&[r, c])).abs() <= 1e-15);
                prop_assert_eq!(db.prob(&[c, r]), da.prob(&[r, c]));
            }
        }
        // value reassignment leaves the maximum untouched
        prop_assert!((da.expected_max_value() - a.expected_max_value()).abs() <= 1e-12);
        prop_assert!((db.expected_max_value() - a.expected_max_value()).abs() <= 1e-12);
    }

    #[test]
    fn rank_of_transpose(m in matrix(3, 5), dup in any::<bool>()) {
        let m = if dup {
            let mut rows: Vec<Vec<f64>> = (0..3).map(|r| m.row(r).to_vec()).collect();
            rows[2] = rows[0].iter().zip(&rows[1]).map(|(a, b)| a - 2.0 * b).collect();
            DenseMatrix::from_rows(&rows).unwrap()
        } else {
            m
        };
        prop_assert_eq!(linalg::rank(&m, DEFAULT_RANK_TOL), linalg::rank(&m.transpose(), DEFAULT_RANK_TOL));
    }

    #[test]
    fn kronecker_bilinear_and_associative(
        u in prop::collection::vec(-2.0f64..2.0, 3),
        w in prop::collection::vec(-2.0f64..2.0, 3),
        v in prop::collection::vec(-2.0f64..2.0, 2),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
    ) {
        let combo: Vec<f64> = u.iter().zip(&w).map(|(x, y)| alpha * x + beta * y).collect();
        let lhs = kron_vec(&combo, &v, DEFAULT_CAP).unwrap();
        let ku = kron_vec(&u, &v, DEFAULT_CAP).unwrap();
        let kw = kron_vec(&w, &v, DEFAULT_CAP).unwrap();
        for k in 0..lhs.len() {
            prop_assert!((lhs[k] - (alpha * ku[k] + beta * kw[k])).abs() <= 1e-12);
        }
        let left = kron_vec(&kron_vec(&u, &v, DEFAULT_CAP).unwrap(), &w, DEFAULT_CAP).unwrap();
        let right = kron_vec(&u, &kron_vec(&v, &w, DEFAULT_CAP).unwrap(), DEFAULT_CAP).unwrap();
        for (a, b) in left.iter().zip(&right) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn min_norm_beats_null_space_shifts(a in matrix(2, 5), b in prop::collection::vec(-2.0f64..2.0, 2), z in prop::collection::vec(-1.0f64..1.0, 5)) {
        let out = min_norm_solve(&a, &b, DEFAULT_SOLVE_TOL).unwrap();
        prop_assume!(out.solution().is_some());
        let x = out.solution().unwrap();
        // project z onto the null space of a: z - A^T (A A^T)^+ A z, via the same solver
        let az = a.mul_vec(&z);
        let back = min_norm_solve(&a, &az, DEFAULT_SOLVE_TOL).unwrap();
        let row_part = back.solution().unwrap();
        let null: Vec<f64> = z.iter().zip(row_part).map(|(p, q)| p - q).collect();
        prop_assert!(linalg::norm2(&a.mul_vec(&null)) <= 1e-9);
        let y: Vec<f64> = x.iter().zip(&null).map(|(p, q)| p + q).collect();
        prop_assert!(linalg::norm2(x) <= linalg::norm2(&y) + 1e-9);
    }

    #[test]
    fn lookahead_routes_agree_and_are_ir(t in 2usize..5, w in positive_weights(16), zero in 0usize..16) {
        let mut w = w[..t * t].to_vec();
        w[zero % (t * t)] = 0.0;
        let d = joint(t, &w);
        let mech = LookaheadAuction { dist: d.clone() };
        let enumerated = exact_moments(&mech, &d, DEFAULT_CAP).unwrap().revenue;
        prop_assert!((lookahead_revenue(&d).unwrap() - enumerated).abs() <= 1e-12);
        prop_assert!(check_expost_ir(&mech, 0.0, DEFAULT_CAP).unwrap());
        prop_assert!(check_dsic(&mech, 1e-9, DEFAULT_CAP).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Random two-member families on 2x2 or 3x3 supports: with one sample the
    /// solved auction is DSIC, leaves zero interim utility, and truthful and
    /// misreported utilities coincide whenever the allocation is unchanged.
    #[test]
    fn solved_auctions_are_dsic_with_zero_interim_utility(
        t in 2usize..4,
        a in positive_weights(9),
        b in positive_weights(9),
    ) {
        let fam = DistributionFamily::new(vec![joint(t, &a[..t * t]), joint(t, &b[..t * t])]).unwrap();
        prop_assume!(span_dimension(&fam, DEFAULT_RANK_TOL) == 2);
        let auction = solve_lotteries(&fam, 1, DEFAULT_SOLVE_TOL, DEFAULT_CAP).unwrap();
        prop_assert!(check_dsic(&auction, 1e-9, DEFAULT_CAP).unwrap());
        for r in exact_certify(&auction, 1e-8, DEFAULT_CAP).unwrap() {
            prop_assert!(r.max_abs_interim_utility <= 1e-8);
            prop_assert!(r.full_surplus_ok);
        }
        let space = auction.space().clone();
        for idx in 0..space.n_profiles() {
            let profile = space.profile_at(idx);
            for s in 0..space.n_profiles() {
                let honest = run_sample_auction(&auction, &profile, &[s]).unwrap();
                for i in 0..2 {
                    for lie in 0..space.size(i) {
                        let mut report = profile.clone();
                        report[i] = lie;
                        let dev = run_sample_auction(&auction, &report, &[s]).unwrap();
                        if dev.allocation[i] == honest.allocation[i] {
                            let v = space.value(i, profile[i]);
                            prop_assert!((dev.utility(i, v) - honest.utility(i, v)).abs() <= 1e-12);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn rank_certificate_at_sample_bound() {
    for seed in 0..100u64 {
        let mut rng = seeded_rng(seed);
        let t = rng.gen_range(2..=3);
        let k = rng.gen_range(1..=3);
        let members: Vec<JointDistribution> = (0..k)
            .map(|_| {
                let w: Vec<f64> = (0..t * t).map(|_| rng.gen_range(0.05..1.0)).collect();
                joint(t, &w)
            })
            .collect();
        let fam = DistributionFamily::new(members).unwrap();
        let m = sample_bound(&fam, DEFAULT_RANK_TOL);
        for i in 0..2 {
            assert_eq!(stacked_rank(&fam, i, m, DEFAULT_RANK_TOL, DEFAULT_CAP).unwrap(), t * k, "seed {seed}");
        }
    }
}

#[test]
fn lower_bound_rank_deficiency_up_to_k_minus_r() {
    for (k, r) in [(3, 2), (4, 2), (4, 3)] {
        let t = r + 1;
        let fam = lower_bound_family(k, r, (t, t)).unwrap();
        for m in 0..=(k - r) {
            assert!(stacked_rank(&fam, 0, m, DEFAULT_RANK_TOL, DEFAULT_CAP).unwrap() < t * k, "k={k} r={r} m={m}");
        }
        assert_eq!(stacked_rank(&fam, 0, k - r + 1, DEFAULT_RANK_TOL, DEFAULT_CAP).unwrap(), t * k);
    }
}

#[test]
fn distinguisher_error_shrinks_with_samples() {
    let counts = [0, 1, 4, 16, 64, 256, 1024];
    let curve = distinguisher_curve(2, 0.1, &counts, 2000, 11).unwrap();
    for k in 1..counts.len() {
        let slack = 3.0 * (curve.std_error(k) + curve.std_error(k - 1));
        assert!(curve.error_rates[k] <= curve.error_rates[k - 1] + slack, "{:?}", curve.error_rates);
    }
}

#[test]
fn headline_contrast_one_sample() {
    for eps in [0.02, 0.05, 0.1] {
        let fam = cm_core::dist::coin_family(2, eps).unwrap();
        let auction = solve_lotteries(&fam, 1, DEFAULT_SOLVE_TOL, DEFAULT_CAP).unwrap();
        assert!(exact_certify(&auction, 1e-9, DEFAULT_CAP).unwrap().iter().all(|r| r.full_surplus_ok));
        let curve = distinguisher_curve(2, eps, &[1], 5000, 5).unwrap();
        assert!(curve.error_rates[0] >= 0.4, "eps={eps}: {}", curve.error_rates[0]);
    }
}

#[test]
fn surplus_gap_ratio_grows_with_h() {
    let ratios: Vec<f64> = [2, 4, 8, 16, 32, 64].iter().map(|&h| surplus_gap(h, 0.1).unwrap().ratio).collect();
    assert!(ratios.windows(2).all(|w| w[1] >= w[0]), "{ratios:?}");
}
