//! Monte Carlo estimates of the ZF uplink rate and of the relative error of
//! the closed-form approximations.
//!
//! A run draws `n_user × n_antenna` placements (user and antenna positions
//! come from separate streams and are paired in every combination), and for
//! each placement averages `n_small_scale` Rayleigh draws. The perfect- and
//! imperfect-CSI estimators read the same small-scale streams, so their
//! results are paired draw by draw.

use rayon::prelude::*;

use crate::channel::{compose_channel, estimation_params, large_scale_fading, scale_by_variance, sample_small_scale, LargeScaleMatrix};
use crate::closed_form::{approximations, colocated_bound, error_power_extremes, ApproxKind};
use crate::error::{Error, Result};
use crate::geometry::{colocated_topology, pairwise_distances, sample_disk_points, DeploymentMode, Topology};
use crate::linalg::{CMatrix, RMatrix};
use crate::rng::{stream_at, Domain};
use crate::scalar::{db_to_linear, log2_1p, Real};
use crate::stats::{Estimate, Welford};
use crate::zf::{imperfect_csi_denominator_with_row_sums, zf_solve};

/// Redraws allowed for one ill-conditioned trial before giving up.
pub const MAX_ATTEMPTS: u64 = 16;
/// Largest tolerated share of rejected trials.
pub const MAX_REJECTED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CsiMode {
    Perfect,
    Imperfect,
}

impl CsiMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CsiMode::Perfect => "perfect",
            CsiMode::Imperfect => "imperfect",
        }
    }
}

impl std::str::FromStr for CsiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect" => Ok(Self::Perfect),
            "imperfect" => Ok(Self::Imperfect),
            other => Err(Error::Format(format!("unknown CSI mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig<T> {
    pub antennas: usize,
    pub users: usize,
    pub alpha: T,
    pub rho_u_db: T,
    pub rho_p_db: T,
    pub n_user_topologies: usize,
    pub n_antenna_topologies: usize,
    pub n_small_scale: usize,
    pub master_seed: u64,
    pub csi: CsiMode,
    pub mode: DeploymentMode,
    /// Distances are raised to at least this value before the path loss.
    pub min_distance: T,
}

impl<T: Real> SimConfig<T> {
    /// 30 × 30 placements with 200 small-scale draws each, L = 300, K = 10,
    /// α = 4, ρ_u = -10 dB, ρ_p = 0 dB.
    pub fn standard() -> Self {
        Self {
            antennas: 300,
            users: 10,
            alpha: T::lit(4.0),
            rho_u_db: T::lit(-10.0),
            rho_p_db: T::lit(0.0),
            n_user_topologies: 30,
            n_antenna_topologies: 30,
            n_small_scale: 200,
            master_seed: 2024,
            csi: CsiMode::Perfect,
            mode: DeploymentMode::CellFree,
            min_distance: T::zero(),
        }
    }

    /// Reduced 5 × 5 × 50 budget for quick checks.
    pub fn fast() -> Self {
        Self {
            n_user_topologies: 5,
            n_antenna_topologies: 5,
            n_small_scale: 50,
            ..Self::standard()
        }
    }

    pub fn rho_u(&self) -> T {
        db_to_linear(self.rho_u_db)
    }

    pub fn rho_p(&self) -> T {
        db_to_linear(self.rho_p_db)
    }

    pub fn topologies(&self) -> usize {
        self.n_user_topologies * self.n_antenna_topologies
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value: f64, reason| Err(Error::InvalidParameter { name, value, reason });
        if self.users == 0 {
            return bad("users", 0.0, "need at least one user");
        }
        if self.antennas <= self.users {
            return bad("antennas", self.antennas as f64, "zero forcing needs more antennas than users");
        }
        for (name, v) in [
            ("n_user_topologies", self.n_user_topologies),
            ("n_antenna_topologies", self.n_antenna_topologies),
            ("n_small_scale", self.n_small_scale),
        ] {
            if v == 0 {
                return bad(name, 0.0, "counts must be at least 1");
            }
        }
        if self.topologies() >= 1 << 28 || self.n_small_scale >= 1 << 20 {
            return bad("n_small_scale", self.n_small_scale as f64, "trial counts exceed the stream address space");
        }
        if !(self.alpha > T::zero()) || !self.alpha.is_finite() {
            return bad("alpha", self.alpha.to_f64_lossy(), "path-loss exponent must be positive");
        }
        if !self.rho_u_db.is_finite() {
            return bad("rho_u_db", self.rho_u_db.to_f64_lossy(), "must be finite");
        }
        if !self.rho_p_db.is_finite() {
            return bad("rho_p_db", self.rho_p_db.to_f64_lossy(), "must be finite");
        }
        if !(self.min_distance >= T::zero()) {
            return bad("min_distance", self.min_distance.to_f64_lossy(), "must be nonnegative");
        }
        Ok(())
    }
}

/// Where a placement's small-scale draws come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSource {
    pub seed: u64,
    pub placement: u64,
}

impl TrialSource {
    pub fn new(seed: u64) -> Self {
        Self { seed, placement: 0 }
    }

    /// Small-scale matrix for `trial`; `attempt > 0` are redraws after a rejection.
    pub fn draw<T: Real>(&self, trial: u64, attempt: u64, antennas: usize, users: usize) -> CMatrix<T> {
        let minor = trial | (attempt << 20);
        sample_small_scale(antennas, users, &mut stream_at(self.seed, Domain::SmallScale, self.placement, minor))
    }
}

/// Small-scale averages for one large-scale realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallScaleStats<T> {
    /// `E log2(1 + SINR_k)` per user.
    pub rate: Vec<Estimate<T>>,
    /// Jensen upper bound per user, e.g. `log2(1 + rho_u E[1/‖a_k‖²])`.
    pub true_ub: Vec<T>,
    /// Jensen lower bound per user, e.g. `log2(1 + rho_u / E[‖a_k‖²])`.
    pub true_lb: Vec<T>,
    pub rejected: u64,
    pub trials: u64,
}

struct TrialValues<T> {
    rate: Vec<T>,
    norm_sq: Vec<T>,
}

/// Per-user rate accumulators, mean of `1/‖a‖²`, mean of `‖a‖²`, rejections.
type TrialTotals<T> = (Vec<Welford<T>>, Vec<T>, Vec<T>, u64);

fn run_trials<T: Real>(
    antennas: usize,
    users: usize,
    n_trials: usize,
    source: TrialSource,
    mut trial: impl FnMut(&CMatrix<T>) -> Result<TrialValues<T>>,
) -> Result<TrialTotals<T>> {
    if n_trials == 0 {
        return Err(Error::InvalidParameter {
            name: "n_trials",
            value: 0.0,
            reason: "need at least one trial",
        });
    }
    let mut rate = vec![Welford::new(); users];
    let mut inv = vec![T::zero(); users];
    let mut norm = vec![T::zero(); users];
    let mut rejected = 0u64;
    for t in 0..n_trials as u64 {
        let mut attempt = 0;
        let values = loop {
            let h = source.draw::<T>(t, attempt, antennas, users);
            match trial(&h) {
                Ok(v) => break v,
                Err(Error::IllConditioned { condition, .. }) => {
                    rejected += 1;
                    attempt += 1;
                    if attempt >= MAX_ATTEMPTS {
                        return Err(Error::IllConditioned {
                            condition,
                            trial: Some(t),
                        });
                    }
                }
                Err(e) => return Err(e),
            }
        };
        for k in 0..users {
            rate[k].push(values.rate[k]);
            inv[k] = inv[k] + values.norm_sq[k].recip();
            norm[k] = norm[k] + values.norm_sq[k];
        }
    }
    let total = n_trials as u64 + rejected;
    if rejected as f64 > MAX_REJECTED_FRACTION * total as f64 {
        return Err(Error::ConditioningAlarm { rejected, total });
    }
    let n = T::from_count(n_trials);
    let mean_inv = inv.into_iter().map(|s| s / n).collect();
    let mean_norm = norm.into_iter().map(|s| s / n).collect();
    Ok((rate, mean_inv, mean_norm, rejected))
}

fn check_ls<T: Real>(ls: &LargeScaleMatrix<T>, rho_u: T) -> Result<()> {
    if ls.num_antennas() <= ls.num_users() {
        return Err(Error::InvalidParameter {
            name: "antennas",
            value: ls.num_antennas() as f64,
            reason: "zero forcing needs more antennas than users",
        });
    }
    if !(rho_u > T::zero()) || !rho_u.is_finite() {
        return Err(Error::InvalidParameter {
            name: "rho_u",
            value: rho_u.to_f64_lossy(),
            reason: "must be positive and finite",
        });
    }
    Ok(())
}

/// Exact perfect-CSI rate `E log2(1 + rho_u / ‖a_k‖²)` averaged over
/// `n_trials` Rayleigh draws.
pub fn rate_perfect_csi<T: Real>(ls: &LargeScaleMatrix<T>, rho_u: T, n_trials: usize, source: TrialSource) -> Result<SmallScaleStats<T>> {
    check_ls(ls, rho_u)?;
    let (l, k) = ls.gamma().shape();
    let (rate, inv, norm, rejected) = run_trials(l, k, n_trials, source, |h| {
        let g = compose_channel(ls, h)?;
        let norm_sq = zf_solve(&g, false)?.column_sq_norms;
        let rate = norm_sq.iter().map(|&n| log2_1p(rho_u / n)).collect();
        Ok(TrialValues { rate, norm_sq })
    })?;
    Ok(SmallScaleStats {
        rate: rate.iter().map(|w| Estimate { mean: w.mean(), std_error: w.std_error() }).collect(),
        true_ub: inv.iter().map(|&v| log2_1p(rho_u * v)).collect(),
        true_lb: norm.iter().map(|&v| log2_1p(rho_u / v)).collect(),
        rejected,
        trials: n_trials as u64,
    })
}

/// Exact imperfect-CSI rate with a ZF detector built from the MMSE estimate.
/// The estimate is drawn as `sqrt(gamma_hat) ∘ H` from the same streams as
/// [`rate_perfect_csi`].
pub fn rate_imperfect_csi<T: Real>(
    ls: &LargeScaleMatrix<T>,
    rho_u: T,
    rho_p: T,
    n_trials: usize,
    source: TrialSource,
) -> Result<SmallScaleStats<T>> {
    check_ls(ls, rho_u)?;
    let est = estimation_params(ls, rho_p)?;
    let row_sums = est.error_row_sums();
    let (err_min, err_max) = error_power_extremes(&est);
    let (l, k) = ls.gamma().shape();
    let (rate, inv, norm, rejected) = run_trials(l, k, n_trials, source, |h| {
        let g_hat = scale_by_variance(est.gamma_hat(), h)?;
        let sol = zf_solve(&g_hat, true)?;
        let a_hat = sol.detector.as_ref().expect("materialized");
        let rate = (0..k)
            .map(|user| log2_1p(rho_u / imperfect_csi_denominator_with_row_sums(a_hat, &row_sums, rho_u, user)))
            .collect();
        Ok(TrialValues {
            rate,
            norm_sq: sol.column_sq_norms,
        })
    })?;
    let ub_scale = rho_u / (rho_u * err_min + T::one());
    let lb_scale = rho_u / (rho_u * err_max + T::one());
    Ok(SmallScaleStats {
        rate: rate.iter().map(|w| Estimate { mean: w.mean(), std_error: w.std_error() }).collect(),
        true_ub: inv.iter().map(|&v| log2_1p(ub_scale * v)).collect(),
        true_lb: norm.iter().map(|&v| log2_1p(lb_scale / v)).collect(),
        rejected,
        trials: n_trials as u64,
    })
}

/// Everything measured on one placement; vectors are indexed by user.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementSample<T> {
    pub user_index: usize,
    pub antenna_index: usize,
    pub sim: Vec<T>,
    pub approx_ub: Vec<T>,
    pub approx_lb: Vec<T>,
    pub coloc_ub: Vec<T>,
    pub coloc_lb: Vec<T>,
    pub true_ub: Vec<T>,
    pub true_lb: Vec<T>,
    pub rejected: u64,
}

fn mean<T: Real>(v: &[T]) -> T {
    crate::stats::pairwise_sum(v) / T::from_count(v.len())
}

fn relative_errors<T: Real>(truth: &[T], approx: &[T]) -> Result<Vec<T>> {
    truth
        .iter()
        .zip(approx)
        .map(|(&t, &a)| {
            if t > T::zero() {
                Ok((t - a).abs() / t)
            } else {
                Err(Error::Domain {
                    what: "reference bound",
                    value: t.to_f64_lossy(),
                })
            }
        })
        .collect()
}

impl<T: Real> PlacementSample<T> {
    pub fn mean_sim(&self) -> T {
        mean(&self.sim)
    }

    /// Per-user `|TRUE - APPRX| / TRUE` for the upper approximation.
    pub fn rae_ub(&self) -> Result<Vec<T>> {
        relative_errors(&self.true_ub, &self.approx_ub)
    }

    pub fn rae_lb(&self) -> Result<Vec<T>> {
        relative_errors(&self.true_lb, &self.approx_lb)
    }
}

/// User and antenna positions of placement `(u, a)` under `config`.
pub fn placement_topology<T: Real>(config: &SimConfig<T>, u: usize, a: usize) -> Result<Topology<T>> {
    let mut user_rng = stream_at(config.master_seed, Domain::UserPositions, u as u64, 0);
    let users = sample_disk_points(config.users, &mut user_rng)?;
    match config.mode {
        DeploymentMode::Colocated => colocated_topology(config.antennas, users),
        DeploymentMode::CellFree => {
            let mut antenna_rng = stream_at(config.master_seed, Domain::AntennaPositions, a as u64, 0);
            let antennas = sample_disk_points(config.antennas, &mut antenna_rng)?;
            Topology::new(antennas, users, DeploymentMode::CellFree)
        }
    }
}

/// Per-user gains of the same users served from the disk center.
pub fn colocated_gains<T: Real>(topology: &Topology<T>, alpha: T, min_distance: T) -> Result<Vec<T>> {
    let radii = RMatrix::from_col_major(1, topology.num_users(), topology.user_radii())?;
    let ls = large_scale_fading(&radii, alpha, min_distance)?;
    Ok(ls.gamma().iter().collect())
}

fn colocated_pair<T: Real>(config: &SimConfig<T>, gains: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let imperfect = config.csi == CsiMode::Imperfect;
    let rho_p = imperfect.then(|| config.rho_p());
    let eval = |upper| -> Result<Vec<T>> {
        (0..gains.len())
            .map(|k| colocated_bound(ApproxKind::new(upper, imperfect), config.antennas, gains, k, config.rho_u(), rho_p))
            .collect()
    };
    Ok((eval(true)?, eval(false)?))
}

/// Closed-form quantities of one placement, without small-scale trials.
pub fn placement_closed_form<T: Real>(config: &SimConfig<T>, topology: &Topology<T>) -> Result<(LargeScaleMatrix<T>, [Vec<T>; 4])> {
    let ls = large_scale_fading(&pairwise_distances(topology), config.alpha, config.min_distance)?;
    let gains = colocated_gains(topology, config.alpha, config.min_distance)?;
    let (coloc_ub, coloc_lb) = colocated_pair(config, &gains)?;
    let (approx_ub, approx_lb) = match config.mode {
        // All antennas tie for every user, so the exclusion-set construction
        // is degenerate; the co-located forms are the exact limits.
        DeploymentMode::Colocated => (coloc_ub.clone(), coloc_lb.clone()),
        DeploymentMode::CellFree => {
            let rho_p = (config.csi == CsiMode::Imperfect).then(|| config.rho_p());
            let pairs = approximations(&ls, config.rho_u(), rho_p)?;
            (pairs.iter().map(|p| p.upper).collect(), pairs.iter().map(|p| p.lower).collect())
        }
    };
    Ok((ls, [approx_ub, approx_lb, coloc_ub, coloc_lb]))
}

/// Simulate placement `(u, a)`.
pub fn simulate_placement<T: Real>(config: &SimConfig<T>, u: usize, a: usize) -> Result<PlacementSample<T>> {
    let topology = placement_topology(config, u, a)?;
    let (ls, [approx_ub, approx_lb, coloc_ub, coloc_lb]) = placement_closed_form(config, &topology)?;
    let source = TrialSource {
        seed: config.master_seed,
        placement: (u * config.n_antenna_topologies + a) as u64,
    };
    let stats = match config.csi {
        CsiMode::Perfect => rate_perfect_csi(&ls, config.rho_u(), config.n_small_scale, source)?,
        CsiMode::Imperfect => rate_imperfect_csi(&ls, config.rho_u(), config.rho_p(), config.n_small_scale, source)?,
    };
    Ok(PlacementSample {
        user_index: u,
        antenna_index: a,
        sim: stats.rate.iter().map(|e| e.mean).collect(),
        approx_ub,
        approx_lb,
        coloc_ub,
        coloc_lb,
        true_ub: stats.true_ub,
        true_lb: stats.true_lb,
        rejected: stats.rejected,
    })
}

/// Averages over all placements. Standard errors treat each placement's
/// user-averaged value as one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport<T> {
    pub per_user_rate: Vec<Estimate<T>>,
    pub average_rate: Estimate<T>,
    pub approx_ub: Estimate<T>,
    pub approx_lb: Estimate<T>,
    pub coloc_ub: Estimate<T>,
    pub coloc_lb: Estimate<T>,
    pub true_ub: Estimate<T>,
    pub true_lb: Estimate<T>,
    pub rae_ub_pct: Estimate<T>,
    pub rae_lb_pct: Estimate<T>,
    pub rejected_trials: u64,
    pub samples: Vec<PlacementSample<T>>,
}

impl<T: Real> RateReport<T> {
    /// `(metric name, estimate)` in the order they are written out.
    pub fn metrics(&self) -> Vec<(&'static str, Estimate<T>)> {
        vec![
            ("sim_rate", self.average_rate),
            ("approx_ub", self.approx_ub),
            ("approx_lb", self.approx_lb),
            ("coloc_ub", self.coloc_ub),
            ("coloc_lb", self.coloc_lb),
            ("rae_ub_pct", self.rae_ub_pct),
            ("rae_lb_pct", self.rae_lb_pct),
        ]
    }
}

fn outer_estimate<T: Real>(samples: &[PlacementSample<T>], f: impl Fn(&PlacementSample<T>) -> T) -> Estimate<T> {
    let values: Vec<T> = samples.iter().map(f).collect();
    let base = Estimate::of(&values);
    Estimate {
        mean: mean(&values),
        std_error: base.std_error,
    }
}

fn summarize<T: Real>(users: usize, samples: Vec<PlacementSample<T>>) -> Result<RateReport<T>> {
    let hundred = T::lit(100.0);
    let mut rae_ub = Vec::with_capacity(samples.len());
    let mut rae_lb = Vec::with_capacity(samples.len());
    for s in &samples {
        rae_ub.push(mean(&s.rae_ub()?) * hundred);
        rae_lb.push(mean(&s.rae_lb()?) * hundred);
    }
    let per_user_rate = (0..users)
        .map(|k| Estimate::of(&samples.iter().map(|s| s.sim[k]).collect::<Vec<_>>()))
        .collect();
    Ok(RateReport {
        per_user_rate,
        average_rate: outer_estimate(&samples, |s| s.mean_sim()),
        approx_ub: outer_estimate(&samples, |s| mean(&s.approx_ub)),
        approx_lb: outer_estimate(&samples, |s| mean(&s.approx_lb)),
        coloc_ub: outer_estimate(&samples, |s| mean(&s.coloc_ub)),
        coloc_lb: outer_estimate(&samples, |s| mean(&s.coloc_lb)),
        true_ub: outer_estimate(&samples, |s| mean(&s.true_ub)),
        true_lb: outer_estimate(&samples, |s| mean(&s.true_lb)),
        rae_ub_pct: Estimate {
            mean: mean(&rae_ub),
            std_error: Estimate::of(&rae_ub).std_error,
        },
        rae_lb_pct: Estimate {
            mean: mean(&rae_lb),
            std_error: Estimate::of(&rae_lb).std_error,
        },
        rejected_trials: samples.iter().map(|s| s.rejected).sum(),
        samples,
    })
}

/// Nested average over placements and small-scale draws. Placements run in
/// parallel; results are reduced in placement order, so the report does not
/// depend on the thread count.
pub fn average_over_topologies<T: Real>(config: &SimConfig<T>) -> Result<RateReport<T>> {
    config.validate()?;
    let n_a = config.n_antenna_topologies;
    let samples = (0..config.topologies())
        .into_par_iter()
        .map(|i| simulate_placement(config, i / n_a, i % n_a))
        .collect::<Result<Vec<_>>>()?;
    summarize(config.users, samples)
}

/// Placement-averaged closed forms only (no small-scale trials).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormReport<T> {
    pub approx_ub: Estimate<T>,
    pub approx_lb: Estimate<T>,
    pub coloc_ub: Estimate<T>,
    pub coloc_lb: Estimate<T>,
}

pub fn average_closed_form<T: Real>(config: &SimConfig<T>) -> Result<ClosedFormReport<T>> {
    config.validate()?;
    let n_a = config.n_antenna_topologies;
    let per: Vec<[T; 4]> = (0..config.topologies())
        .into_par_iter()
        .map(|i| {
            let topology = placement_topology(config, i / n_a, i % n_a)?;
            let (_, v) = placement_closed_form(config, &topology)?;
            Ok([mean(&v[0]), mean(&v[1]), mean(&v[2]), mean(&v[3])])
        })
        .collect::<Result<_>>()?;
    let est = |j: usize| {
        let values: Vec<T> = per.iter().map(|v| v[j]).collect();
        Estimate {
            mean: mean(&values),
            std_error: Estimate::of(&values).std_error,
        }
    };
    Ok(ClosedFormReport {
        approx_ub: est(0),
        approx_lb: est(1),
        coloc_ub: est(2),
        coloc_lb: est(3),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Upper,
    Lower,
}

/// One row of an RAE table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaeRow<T> {
    pub antennas: usize,
    pub alpha: T,
    pub csi: CsiMode,
    pub rae_pct: Estimate<T>,
}

/// RAE percentages for every antenna count in `antennas`, keeping the rest of
/// `config`.
pub fn rae_table<T: Real>(config: &SimConfig<T>, antennas: &[usize], bound: BoundKind) -> Result<Vec<RaeRow<T>>> {
    antennas
        .iter()
        .map(|&l| {
            let c = SimConfig { antennas: l, ..*config };
            let report = average_over_topologies(&c)?;
            Ok(RaeRow {
                antennas: l,
                alpha: c.alpha,
                csi: c.csi,
                rae_pct: match bound {
                    BoundKind::Upper => report.rae_ub_pct,
                    BoundKind::Lower => report.rae_lb_pct,
                },
            })
        })
        .collect()
}
