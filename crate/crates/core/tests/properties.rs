use cellfree::channel::{sample_small_scale, LargeScaleMatrix};
use cellfree::closed_form::{
    all_exclusion_sets, approx_lb_imperfect, approx_lb_perfect, approx_lb_perfect_with, approx_ub_imperfect,
    approx_ub_perfect, gamma_moment_match, strongest_antennas, ExclusionSets,
};
use cellfree::io::{read_matrix, write_matrix};
use cellfree::linalg::{CMatrix, RMatrix};
use cellfree::order_stats::{access_distance_cdf, heron_term, inverse_cdf};
use cellfree::rng::{stream_at, Domain};
use cellfree::{zf_column_norms, zf_detector_matrix};
use proptest::prelude::*;

fn gains() -> impl Strategy<Value = LargeScaleMatrix<f64>> {
    (1usize..6)
        .prop_flat_map(|k| (Just(k), k + 2..40))
        .prop_flat_map(|(k, l)| (Just((l, k)), prop::collection::vec(-3.0f64..3.0, l * k)))
        .prop_map(|((l, k), exps)| {
            let m = RMatrix::from_col_major(l, k, exps.iter().map(|e| 10f64.powf(*e)).collect()).unwrap();
            LargeScaleMatrix::from_gains(m, 4.0).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lower_never_exceeds_upper(ls in gains(), rho_db in -10.0f64..30.0, rho_p_db in -10.0f64..30.0) {
        let (rho, rho_p) = (10f64.powf(rho_db / 10.0), 10f64.powf(rho_p_db / 10.0));
        for k in 0..ls.num_users() {
            let (ub, lb) = (approx_ub_perfect(&ls, k, rho).unwrap(), approx_lb_perfect(&ls, k, rho));
            if let Ok(lb) = lb {
                prop_assert!(lb.value <= ub.value * (1.0 + 1e-12));
            }
            let ub_i = approx_ub_imperfect(&ls, k, rho, rho_p).unwrap();
            prop_assert!(ub_i.value < ub.value);
            if let Ok(lb_i) = approx_lb_imperfect(&ls, k, rho, rho_p) {
                prop_assert!(lb_i.value <= ub_i.value * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn better_pilots_help(ls in gains(), rho_p_db in -10.0f64..30.0, step in 0.1f64..10.0) {
        let lo = 10f64.powf(rho_p_db / 10.0);
        let hi = 10f64.powf((rho_p_db + step) / 10.0);
        for k in 0..ls.num_users() {
            prop_assert!(approx_ub_imperfect(&ls, k, 1.0, lo).unwrap().value < approx_ub_imperfect(&ls, k, 1.0, hi).unwrap().value);
            if let (Ok(a), Ok(b)) = (approx_lb_imperfect(&ls, k, 1.0, lo), approx_lb_imperfect(&ls, k, 1.0, hi)) {
                prop_assert!(a.value < b.value);
            }
        }
    }

    #[test]
    fn lower_grows_with_any_retained_gain(
        weights in prop::collection::vec(1e-3f64..1e3, 2..30),
        pick in any::<prop::sample::Index>(),
        factor in 1.0f64..100.0,
    ) {
        let l = weights.len();
        let i = pick.index(l);
        let sets = ExclusionSets::forced(l, []).unwrap();
        let ls = LargeScaleMatrix::from_gains(RMatrix::from_col_major(l, 1, weights.clone()).unwrap(), 4.0).unwrap();
        let mut bumped = weights;
        bumped[i] *= factor;
        let ls2 = LargeScaleMatrix::from_gains(RMatrix::from_col_major(l, 1, bumped).unwrap(), 4.0).unwrap();
        let a = approx_lb_perfect_with(&ls, 0, &sets, 0.5).unwrap().value;
        let b = approx_lb_perfect_with(&ls2, 0, &sets, 0.5).unwrap().value;
        prop_assert!(b >= a * (1.0 - 1e-12));
    }

    #[test]
    fn moment_match_identities(weights in prop::collection::vec(1e-3f64..1e3, 1..40)) {
        let fit = gamma_moment_match(&weights).unwrap();
        let s1: f64 = weights.iter().sum();
        let s2: f64 = weights.iter().map(|w| w * w).sum();
        prop_assert!((fit.mean() - s1).abs() <= 1e-12 * s1);
        prop_assert!((fit.shape * fit.scale * fit.scale - s2).abs() <= 1e-12 * s2);
        prop_assert!(fit.shape >= 1.0 - 1e-12 && fit.shape <= weights.len() as f64 * (1.0 + 1e-12));
        prop_assert!((fit.inverse_mean_reciprocal() - (s1 - s2 / s1)).abs() <= 1e-9 * s1);
    }

    #[test]
    fn exclusion_sets_partition_antennas(ls in gains()) {
        let strongest = strongest_antennas(&ls);
        for (k, sets) in all_exclusion_sets(&ls).iter().enumerate() {
            let mut expected: Vec<usize> = strongest.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, &l)| l).collect();
            expected.sort_unstable();
            expected.dedup();
            prop_assert_eq!(sets.excluded(), &expected[..]);
            prop_assert_eq!(sets.excluded().len() + sets.retained().len(), ls.num_antennas());
            prop_assert!(sets.retained().iter().all(|l| !expected.contains(l)));
        }
    }

    #[test]
    fn access_cdf_is_monotone(x in 0.0f64..1.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let end = 1.0 + x;
        let (f_lo, f_hi) = (access_distance_cdf(lo * end, x).unwrap(), access_distance_cdf(hi * end, x).unwrap());
        prop_assert!(f_lo <= f_hi + 1e-14);
        prop_assert!((0.0..=1.0).contains(&f_lo) && (0.0..=1.0).contains(&f_hi));
    }

    #[test]
    fn inverse_cdf_round_trips(x in 0.0f64..0.999, z in 0.0f64..1.0) {
        let y = inverse_cdf(z, x).unwrap();
        prop_assert!((access_distance_cdf(y, x).unwrap() - z).abs() < 1e-10);
        let knee = 1.0 - x;
        if z > knee * knee {
            prop_assert!(knee < z.sqrt() && z.sqrt() <= y * (1.0 + 1e-12));
            prop_assert!(y <= 2.0 * z.sqrt() - knee + 1e-12);
        } else {
            prop_assert!((y - z.sqrt()).abs() <= 1e-12);
        }
    }

    #[test]
    fn heron_matches_cross_product(x in 0.0f64..1.0, theta in 0.0f64..std::f64::consts::PI) {
        // Triangle with vertices at the origin, the user (x, 0) and a boundary point.
        let (px, py) = (theta.cos(), theta.sin());
        let y = ((px - x).powi(2) + py * py).sqrt();
        let area = 0.5 * x * py;
        prop_assert!((heron_term(x, y).unwrap() - area).abs() < 1e-7);
    }

    #[test]
    fn zf_detector_inverts_channel(seed in any::<u64>(), k in 1usize..7, extra in 0usize..20) {
        let l = k + extra + 1;
        let g: CMatrix<f64> = sample_small_scale(l, k, &mut stream_at(seed, Domain::Oracle, 0, 0));
        let a = zf_detector_matrix(&g).unwrap();
        let prod = a.adjoint_mul(&g).unwrap();
        prop_assert!(prod.max_abs_diff(&CMatrix::identity(k)) < 1e-10);
        for (j, n) in zf_column_norms(&g).unwrap().into_iter().enumerate() {
            prop_assert!((a.col_norm_sqr(j) - n).abs() <= 1e-10 * n);
        }
    }

    #[test]
    fn single_precision_tracks_double(ls in gains()) {
        let narrow = LargeScaleMatrix::from_gains(ls.gamma().map(|v| v as f32), 4.0).unwrap();
        for k in 0..ls.num_users() {
            let wide = approx_ub_perfect(&ls, k, 1.0).unwrap().value;
            let single = approx_ub_perfect(&narrow, k, 1.0f32).unwrap().value as f64;
            prop_assert!((wide - single).abs() <= 1e-5 * wide.max(1.0));
        }
    }

    #[test]
    fn matrix_text_round_trips(ls in gains()) {
        let back: RMatrix<f64> = read_matrix(&write_matrix(ls.gamma())).unwrap();
        prop_assert_eq!(&back, ls.gamma());
    }
}
