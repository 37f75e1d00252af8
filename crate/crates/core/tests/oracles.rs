//! Cross-checks against independent implementations and direct simulation.

use approx::assert_relative_eq;
use cellfree::channel::{estimation_params, sample_pilot_estimate, sample_small_scale, LargeScaleMatrix};
use cellfree::closed_form::{colocated_bound, ApproxKind};
use cellfree::geometry::{distance, sample_disk_point, DeploymentMode};
use cellfree::linalg::{CMatrix, RMatrix};
use cellfree::montecarlo::{average_over_topologies, rate_imperfect_csi, rate_perfect_csi, SimConfig, TrialSource};
use cellfree::order_stats::{access_distance_cdf, q_l_asymptotic, q_l_numeric};
use cellfree::rng::{stream_at, Domain};
use cellfree::special::{beta, ln_beta, ln_gamma};
use cellfree::stats::{ks_p_value, ks_statistic, Welford};
use cellfree::zf_column_norms;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

fn oracle_rng(major: u64) -> cellfree::rng::SimRng {
    stream_at(77, Domain::Oracle, major, 0)
}

#[test]
fn ln_gamma_matches_statrs() {
    for i in 1..400 {
        let x = i as f64 * 0.37;
        let ours = ln_gamma(x);
        let theirs = statrs::function::gamma::ln_gamma(x);
        assert!((ours - theirs).abs() <= 1e-12 * theirs.abs().max(1.0), "x={x}");
    }
    for &(a, b) in &[(0.5, 0.5), (2.5, 300.0), (7.0, 1e4)] {
        let theirs = statrs::function::beta::ln_beta(a, b);
        assert!((ln_beta(a, b) - theirs).abs() < 1e-10 * theirs.abs().max(1.0));
    }
}

#[test]
fn beta_tail_approaches_gamma_power() {
    for l in 1..=3 {
        for alpha in [3.0, 4.0] {
            let x = l as f64 + alpha / 2.0;
            for y in [1e3, 1e4] {
                let ratio = (ln_beta(x, y) + x * f64::ln(y) - ln_gamma(x)).exp();
                assert!((ratio - 1.0).abs() < 0.01, "x={x} y={y} ratio={ratio}");
            }
        }
    }
    assert_relative_eq!(beta(2.0_f64, 3.0), 1.0 / 12.0, max_relative = 1e-14);
}

#[test]
fn numeric_moment_sits_within_boundary_factor_of_asymptote() {
    let alpha = 3.0;
    let numeric = q_l_numeric(1, 4000, 10, alpha).unwrap().value;
    let asym = q_l_asymptotic(1, 4000, 10, alpha).unwrap();
    let ratio = numeric / asym;
    assert!((1.0..=2f64.powf(alpha)).contains(&ratio), "ratio={ratio}");
}

#[test]
fn access_cdf_matches_geometric_sampling() {
    let (x, y) = (0.5, 0.8);
    let n = 2_000_000;
    let mut rng = oracle_rng(1);
    let user = [x, 0.0];
    let hits = (0..n).filter(|_| distance(user, sample_disk_point(&mut rng)) <= y).count();
    let p = hits as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let f = access_distance_cdf(y, x).unwrap();
    assert!((p - f).abs() < 4.0 * se, "mc={p} cdf={f} se={se}");
}

#[test]
fn small_scale_moduli_are_exponential() {
    let h: CMatrix<f64> = sample_small_scale(200, 100, &mut oracle_rng(2));
    let mut p: Vec<f64> = h.iter().map(|z| z.norm_sqr()).collect();
    let d = ks_statistic(&mut p, |v| 1.0 - (-v).exp());
    assert!(ks_p_value(d, p.len()) > 0.01);
}

#[test]
fn zf_norms_match_general_inverse_on_path_loss_channels() {
    let mut rng = oracle_rng(3);
    for _ in 0..50 {
        let (l, k) = (rng.random_range(12..80usize), rng.random_range(2..9usize));
        let gains = RMatrix::from_fn(l, k, |_, _| distance([0.0; 2], sample_disk_point::<f64, _>(&mut rng)).powf(-4.0));
        let h: CMatrix<f64> = sample_small_scale(l, k, &mut rng);
        let g = CMatrix::from_fn(l, k, |i, j| h.get(i, j) * gains.get(i, j).sqrt());
        let gn = DMatrix::from_fn(l, k, |i, j| g.get(i, j));
        let inv = (gn.adjoint() * &gn).try_inverse().unwrap();
        for (kk, n) in zf_column_norms(&g).unwrap().into_iter().enumerate() {
            let reference = inv[(kk, kk)].re;
            assert!((n - reference).abs() < 1e-8 * reference);
        }
    }
}

#[test]
fn single_user_rate_matches_scalar_simulation() {
    let (l, gamma0, rho_u) = (24usize, 0.8, 0.5);
    let ls = LargeScaleMatrix::identical_rows(l, &[gamma0], 4.0).unwrap();
    let ours = rate_perfect_csi(&ls, rho_u, 4000, TrialSource::new(11)).unwrap().rate[0];

    let mut rng = oracle_rng(4);
    let oracle: Welford<f64> = (0..4000)
        .map(|_| {
            let chi: f64 = (0..l).map(|_| Distribution::<f64>::sample(&Exp1, &mut rng)).sum::<f64>();
            (1.0 + rho_u * gamma0 * chi).log2()
        })
        .collect();
    let se = (ours.std_error.powi(2) + oracle.std_error().powi(2)).sqrt();
    assert!((ours.mean - oracle.mean()).abs() < 3.0 * se);
}

#[test]
fn single_user_imperfect_rate_matches_scalar_simulation() {
    let (l, gamma0, rho_u, rho_p) = (16usize, 2.0, 1.0, 0.5);
    let ls = LargeScaleMatrix::identical_rows(l, &[gamma0], 4.0).unwrap();
    let ours = rate_imperfect_csi(&ls, rho_u, rho_p, 4000, TrialSource::new(12)).unwrap().rate[0];

    // For one user the detector is ĝ/‖ĝ‖², so the SINR is
    // rho_u ‖ĝ‖² / (rho_u gamma_tilde + 1) with ‖ĝ‖² ~ gamma_hat · Gamma(L, 1).
    let gamma_hat = rho_p * gamma0 * gamma0 / (rho_p * gamma0 + 1.0);
    let gamma_tilde = gamma0 / (rho_p * gamma0 + 1.0);
    let law = Gamma::new(l as f64, 1.0).unwrap();
    let mut rng = oracle_rng(5);
    let oracle: Welford<f64> = (0..4000)
        .map(|_| (1.0 + rho_u * gamma_hat * law.sample(&mut rng) / (rho_u * gamma_tilde + 1.0)).log2())
        .collect();
    let se = (ours.std_error.powi(2) + oracle.std_error().powi(2)).sqrt();
    assert!((ours.mean - oracle.mean()).abs() < 3.0 * se);
}

#[test]
fn colocated_rate_lies_between_closed_forms() {
    let gains = [1.0_f64, 3.0, 0.5, 2.0];
    let (l, rho_u) = (40, 0.1);
    let ls = LargeScaleMatrix::identical_rows(l, &gains, 4.0).unwrap();
    let stats = rate_perfect_csi(&ls, rho_u, 2000, TrialSource::new(13)).unwrap();
    for k in 0..gains.len() {
        let ub = colocated_bound(ApproxKind::UbPerfect, l, &gains, k, rho_u, None).unwrap();
        let lb = colocated_bound(ApproxKind::LbPerfect, l, &gains, k, rho_u, None).unwrap();
        let r = stats.rate[k];
        assert!(lb <= r.mean + 2.0 * r.std_error && r.mean <= ub + 2.0 * r.std_error, "k={k}");
        // The reference bounds are exact for this channel law.
        assert!((stats.true_ub[k] - ub).abs() < 0.02 * ub);
        assert!((stats.true_lb[k] - lb).abs() < 0.02 * lb);
    }
}

#[test]
fn huge_pilot_power_recovers_perfect_csi() {
    let ls = LargeScaleMatrix::from_gains(RMatrix::from_fn(30, 3, |i, j| 0.5 + ((i * 3 + j * 5) % 7) as f64), 4.0).unwrap();
    let src = TrialSource::new(14);
    let perfect = rate_perfect_csi(&ls, 0.3, 300, src).unwrap();
    let imperfect = rate_imperfect_csi(&ls, 0.3, 1e12, 300, src).unwrap();
    for (p, q) in perfect.rate.iter().zip(&imperfect.rate) {
        let se = (p.std_error.powi(2) + q.std_error.powi(2)).sqrt();
        assert!((p.mean - q.mean).abs() < 3.0 * se);
    }
}

#[test]
fn estimated_channel_is_worse_than_perfect_channel() {
    let ls = LargeScaleMatrix::from_gains(RMatrix::from_fn(30, 3, |i, j| 0.5 + ((i * 3 + j * 5) % 7) as f64), 4.0).unwrap();
    let src = TrialSource::new(15);
    let perfect = rate_perfect_csi(&ls, 0.3, 300, src).unwrap();
    let imperfect = rate_imperfect_csi(&ls, 0.3, 1.0, 300, src).unwrap();
    for (p, q) in perfect.rate.iter().zip(&imperfect.rate) {
        assert!(q.mean < p.mean);
    }
}

#[test]
fn pilot_pathway_has_mmse_variances() {
    let gains = [0.5, 4.0];
    let rho_p = 2.0;
    let ls = LargeScaleMatrix::identical_rows(2000, &gains, 4.0).unwrap();
    let est = estimation_params(&ls, rho_p).unwrap();
    let (g, g_hat) = sample_pilot_estimate(&ls, rho_p, &mut oracle_rng(6)).unwrap();
    for k in 0..2 {
        let n = g.rows() as f64;
        let var_hat = g_hat.col(k).iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        let var_err = g.col(k).iter().zip(g_hat.col(k)).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / n;
        let cross = g_hat.col(k).iter().zip(g.col(k)).map(|(b, a)| b.conj() * (a - b)).sum::<num_complex::Complex64>() / n;
        let (vh, vt) = (est.gamma_hat().get(0, k), est.gamma_tilde().get(0, k));
        assert!((var_hat - vh).abs() < 0.1 * vh);
        assert!((var_err - vt).abs() < 0.1 * vt);
        assert!(cross.norm() < 0.1 * (vh * vt).sqrt());
    }
}

#[test]
fn colocated_average_is_bracketed() {
    let config: SimConfig<f64> = SimConfig {
        antennas: 60,
        users: 5,
        n_user_topologies: 8,
        n_antenna_topologies: 1,
        n_small_scale: 100,
        mode: DeploymentMode::Colocated,
        ..SimConfig::standard()
    };
    let r = average_over_topologies(&config).unwrap();
    assert!(r.approx_lb.mean <= r.average_rate.mean && r.average_rate.mean <= r.approx_ub.mean);
    assert_eq!(r.approx_ub, r.coloc_ub);
}

#[test]
fn geometric_chi_square_for_disk_angles() {
    // Angles of uniform disk points fall evenly into 16 sectors.
    let mut rng = oracle_rng(7);
    let mut counts = [0usize; 16];
    let n = 64_000;
    for _ in 0..n {
        let p = sample_disk_point::<f64, _>(&mut rng);
        let t = p[1].atan2(p[0]).rem_euclid(std::f64::consts::TAU);
        counts[((t / std::f64::consts::TAU) * 16.0) as usize % 16] += 1;
    }
    let e = n as f64 / 16.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let p = 1.0 - ChiSquared::new(15.0).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2={chi2} p={p}");
}
