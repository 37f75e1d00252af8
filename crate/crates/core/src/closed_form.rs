//! Closed-form rate approximations that depend only on large-scale fading.
//!
//! For user `k`, the ZF detector approximately discards the antennas that are
//! strongest for the other users (the exclusion set). The upper approximation
//! sums the gains over the retained antennas; the lower one replaces the
//! retained energy by a moment-matched Gamma variable and takes the mean of
//! its inverse. Imperfect-CSI variants swap in estimate variances and inflate
//! the noise by the smallest (upper) or largest (lower) per-antenna error
//! power.

use crate::channel::{estimation_params, EstimationParams, LargeScaleMatrix};
use crate::error::{Error, Result};
use crate::scalar::{log2_1p, Real};

/// Antennas excluded for one user and their complement. Indices are
/// zero-based and sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusionSets {
    excluded: Vec<usize>,
    retained: Vec<usize>,
}

impl ExclusionSets {
    /// Exclude exactly `excluded` (deduplicated) out of `antennas`.
    pub fn forced(antennas: usize, excluded: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = vec![false; antennas];
        for l in excluded {
            if l >= antennas {
                return Err(Error::IndexOutOfRange {
                    what: "antenna",
                    index: l,
                    size: antennas,
                });
            }
            mask[l] = true;
        }
        let (ex, keep): (Vec<usize>, Vec<usize>) = (0..antennas).partition(|&l| mask[l]);
        Ok(Self {
            excluded: ex,
            retained: keep,
        })
    }

    pub fn excluded(&self) -> &[usize] {
        &self.excluded
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }
}

/// Index of the strongest antenna for every user; ties go to the smaller index.
pub fn strongest_antennas<T: Real>(ls: &LargeScaleMatrix<T>) -> Vec<usize> {
    (0..ls.num_users())
        .map(|n| {
            ls.user(n)
                .iter()
                .enumerate()
                .fold((0, T::neg_infinity()), |best, (l, &g)| if g > best.1 { (l, g) } else { best })
                .0
        })
        .collect()
}

fn sets_from_strongest(antennas: usize, strongest: &[usize], k: usize) -> ExclusionSets {
    let others = strongest.iter().enumerate().filter(|&(n, _)| n != k).map(|(_, &l)| l);
    ExclusionSets::forced(antennas, others).expect("argmax indices are in range")
}

/// Exclusion sets of user `k`: the deduplicated strongest antennas of all
/// other users, and the remaining antennas.
pub fn exclusion_sets<T: Real>(ls: &LargeScaleMatrix<T>, k: usize) -> Result<ExclusionSets> {
    check_user(ls, k)?;
    Ok(sets_from_strongest(ls.num_antennas(), &strongest_antennas(ls), k))
}

/// Exclusion sets for every user.
pub fn all_exclusion_sets<T: Real>(ls: &LargeScaleMatrix<T>) -> Vec<ExclusionSets> {
    let strongest = strongest_antennas(ls);
    (0..ls.num_users())
        .map(|k| sets_from_strongest(ls.num_antennas(), &strongest, k))
        .collect()
}

fn check_user<T: Real>(ls: &LargeScaleMatrix<T>, k: usize) -> Result<()> {
    if k >= ls.num_users() {
        return Err(Error::IndexOutOfRange {
            what: "user",
            index: k,
            size: ls.num_users(),
        });
    }
    Ok(())
}

/// Gamma law matched to the first two moments of a sum of independent
/// exponentials with means `weights`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFit<T> {
    pub shape: T,
    pub scale: T,
}

impl<T: Real> GammaFit<T> {
    pub fn mean(&self) -> T {
        self.shape * self.scale
    }

    /// `1 / E[1/X]`, finite for shape > 1.
    pub fn inverse_mean_reciprocal(&self) -> T {
        self.scale * (self.shape - T::one())
    }
}

/// `shape = (Σw)² / Σw²`, `scale = Σw² / Σw`.
pub fn gamma_moment_match<T: Real>(weights: &[T]) -> Result<GammaFit<T>> {
    if weights.is_empty() {
        return Err(Error::EmptyInput("gamma moment-match weights"));
    }
    if let Some(&bad) = weights.iter().find(|w| !(**w > T::zero()) || !w.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "weight",
            value: bad.to_f64_lossy(),
            reason: "weights must be positive and finite",
        });
    }
    let (s1, s2) = weights
        .iter()
        .fold((T::zero(), T::zero()), |(s1, s2), &w| (s1 + w, s2 + w * w));
    Ok(GammaFit {
        shape: s1 * s1 / s2,
        scale: s2 / s1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ApproxKind {
    UbPerfect,
    LbPerfect,
    UbImperfect,
    LbImperfect,
}

impl ApproxKind {
    pub const ALL: [ApproxKind; 4] = [Self::UbPerfect, Self::LbPerfect, Self::UbImperfect, Self::LbImperfect];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::UbPerfect => "ub_perfect",
            Self::LbPerfect => "lb_perfect",
            Self::UbImperfect => "ub_imperfect",
            Self::LbImperfect => "lb_imperfect",
        }
    }

    pub fn is_upper(self) -> bool {
        matches!(self, Self::UbPerfect | Self::UbImperfect)
    }

    pub fn is_imperfect(self) -> bool {
        matches!(self, Self::UbImperfect | Self::LbImperfect)
    }

    pub fn new(upper: bool, imperfect: bool) -> Self {
        match (upper, imperfect) {
            (true, false) => Self::UbPerfect,
            (false, false) => Self::LbPerfect,
            (true, true) => Self::UbImperfect,
            (false, true) => Self::LbImperfect,
        }
    }
}

impl std::str::FromStr for ApproxKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Format(format!("unknown approximation kind {s:?}")))
    }
}

/// An approximate rate in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxRate<T> {
    pub value: T,
    pub kind: ApproxKind,
    pub colocated: bool,
}

fn gains_over<T: Real>(column: &[T], retained: &[usize]) -> Vec<T> {
    retained.iter().map(|&l| column[l]).collect()
}

fn lower_from_weights<T: Real>(weights: &[T], user: usize) -> Result<T> {
    if weights.is_empty() {
        return Err(Error::EmptyRetainedSet(user));
    }
    let fit = gamma_moment_match(weights)?;
    let cross = cross_moment(weights);
    if !(cross > T::zero()) {
        return Err(Error::DegenerateGammaFit {
            user,
            shape: fit.shape.to_f64_lossy(),
        });
    }
    Ok(cross / (fit.shape * fit.scale))
}

/// `(Σw)² - Σw² = 2 Σ_i w_i Σ_{j<i} w_j`, summed without cancellation.
///
/// `scale * (shape - 1)` equals this divided by `Σw`, but forming `shape - 1`
/// directly loses every digit when one weight dominates, which happens for a
/// user sitting almost on top of a retained antenna.
fn cross_moment<T: Real>(weights: &[T]) -> T {
    let mut prefix = T::zero();
    let mut acc = T::zero();
    for &w in weights {
        acc = acc + w * prefix;
        prefix = prefix + w;
    }
    acc + acc
}

fn check_positive<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: v.to_f64_lossy(),
            reason: "must be positive and finite",
        })
    }
}

/// Upper approximation with perfect CSI over explicit exclusion sets.
pub fn approx_ub_perfect_with<T: Real>(ls: &LargeScaleMatrix<T>, k: usize, sets: &ExclusionSets, rho_u: T) -> Result<ApproxRate<T>> {
    check_user(ls, k)?;
    check_positive("rho_u", rho_u)?;
    if sets.retained().is_empty() {
        return Err(Error::EmptyRetainedSet(k));
    }
    let column = ls.user(k);
    let sum = sets.retained().iter().fold(T::zero(), |s, &l| s + column[l]);
    Ok(ApproxRate {
        value: log2_1p(rho_u * sum),
        kind: ApproxKind::UbPerfect,
        colocated: false,
    })
}

/// Lower approximation with perfect CSI over explicit exclusion sets.
pub fn approx_lb_perfect_with<T: Real>(ls: &LargeScaleMatrix<T>, k: usize, sets: &ExclusionSets, rho_u: T) -> Result<ApproxRate<T>> {
    check_user(ls, k)?;
    check_positive("rho_u", rho_u)?;
    let effective = lower_from_weights(&gains_over(ls.user(k), sets.retained()), k)?;
    Ok(ApproxRate {
        value: log2_1p(rho_u * effective),
        kind: ApproxKind::LbPerfect,
        colocated: false,
    })
}

/// `min_l Σ_n gamma_tilde[l][n]` and `max_l Σ_n gamma_tilde[l][n]`.
pub fn error_power_extremes<T: Real>(est: &EstimationParams<T>) -> (T, T) {
    est.error_row_sums()
        .into_iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), s| (lo.min(s), hi.max(s)))
}

/// Upper approximation with imperfect CSI over explicit exclusion sets.
pub fn approx_ub_imperfect_with<T: Real>(
    est: &EstimationParams<T>,
    k: usize,
    sets: &ExclusionSets,
    rho_u: T,
) -> Result<ApproxRate<T>> {
    check_positive("rho_u", rho_u)?;
    if k >= est.gamma_hat().cols() {
        return Err(Error::IndexOutOfRange {
            what: "user",
            index: k,
            size: est.gamma_hat().cols(),
        });
    }
    if sets.retained().is_empty() {
        return Err(Error::EmptyRetainedSet(k));
    }
    let (err_min, _) = error_power_extremes(est);
    let column = est.gamma_hat().col(k);
    let sum = sets.retained().iter().fold(T::zero(), |s, &l| s + column[l]);
    Ok(ApproxRate {
        value: log2_1p(rho_u / (rho_u * err_min + T::one()) * sum),
        kind: ApproxKind::UbImperfect,
        colocated: false,
    })
}

/// Lower approximation with imperfect CSI over explicit exclusion sets.
pub fn approx_lb_imperfect_with<T: Real>(
    est: &EstimationParams<T>,
    k: usize,
    sets: &ExclusionSets,
    rho_u: T,
) -> Result<ApproxRate<T>> {
    check_positive("rho_u", rho_u)?;
    if k >= est.gamma_hat().cols() {
        return Err(Error::IndexOutOfRange {
            what: "user",
            index: k,
            size: est.gamma_hat().cols(),
        });
    }
    let (_, err_max) = error_power_extremes(est);
    let effective = lower_from_weights(&gains_over(est.gamma_hat().col(k), sets.retained()), k)?;
    Ok(ApproxRate {
        value: log2_1p(rho_u / (rho_u * err_max + T::one()) * effective),
        kind: ApproxKind::LbImperfect,
        colocated: false,
    })
}

/// `log2(1 + rho_u Σ_{retained} gamma_{l,k})`.
pub fn approx_ub_perfect<T: Real>(ls: &LargeScaleMatrix<T>, k: usize, rho_u: T) -> Result<ApproxRate<T>> {
    approx_ub_perfect_with(ls, k, &exclusion_sets(ls, k)?, rho_u)
}

/// `log2(1 + rho_u Φ (Ψ - 1))` with `(Ψ, Φ)` matched over the retained gains.
pub fn approx_lb_perfect<T: Real>(ls: &LargeScaleMatrix<T>, k: usize, rho_u: T) -> Result<ApproxRate<T>> {
    approx_lb_perfect_with(ls, k, &exclusion_sets(ls, k)?, rho_u)
}

pub fn approx_ub_imperfect<T: Real>(ls: &LargeScaleMatrix<T>, k: usize, rho_u: T, rho_p: T) -> Result<ApproxRate<T>> {
    let est = estimation_params(ls, rho_p)?;
    approx_ub_imperfect_with(&est, k, &exclusion_sets(ls, k)?, rho_u)
}

pub fn approx_lb_imperfect<T: Real>(ls: &LargeScaleMatrix<T>, k: usize, rho_u: T, rho_p: T) -> Result<ApproxRate<T>> {
    let est = estimation_params(ls, rho_p)?;
    approx_lb_imperfect_with(&est, k, &exclusion_sets(ls, k)?, rho_u)
}

/// Upper and lower approximations for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxPair<T> {
    pub upper: T,
    pub lower: T,
}

/// Both approximations for every user of one large-scale realization.
/// `rho_p = None` selects perfect CSI.
pub fn approximations<T: Real>(ls: &LargeScaleMatrix<T>, rho_u: T, rho_p: Option<T>) -> Result<Vec<ApproxPair<T>>> {
    let sets = all_exclusion_sets(ls);
    match rho_p {
        None => sets
            .iter()
            .enumerate()
            .map(|(k, s)| {
                Ok(ApproxPair {
                    upper: approx_ub_perfect_with(ls, k, s, rho_u)?.value,
                    lower: approx_lb_perfect_with(ls, k, s, rho_u)?.value,
                })
            })
            .collect(),
        Some(rho_p) => {
            let est = estimation_params(ls, rho_p)?;
            sets.iter()
                .enumerate()
                .map(|(k, s)| {
                    Ok(ApproxPair {
                        upper: approx_ub_imperfect_with(&est, k, s, rho_u)?.value,
                        lower: approx_lb_imperfect_with(&est, k, s, rho_u)?.value,
                    })
                })
                .collect()
        }
    }
}

/// Rate bounds of a co-located array where user `k` has gain `gains[k]` at
/// every one of `antennas` antennas. Imperfect kinds require `rho_p`.
pub fn colocated_bound<T: Real>(kind: ApproxKind, antennas: usize, gains: &[T], k: usize, rho_u: T, rho_p: Option<T>) -> Result<T> {
    let users = gains.len();
    if k >= users {
        return Err(Error::IndexOutOfRange {
            what: "user",
            index: k,
            size: users,
        });
    }
    check_positive("rho_u", rho_u)?;
    for &g in gains {
        check_positive("gamma", g)?;
    }
    if antennas < users {
        return Err(Error::InvalidParameter {
            name: "antennas",
            value: antennas as f64,
            reason: "zero forcing needs at least as many antennas as users",
        });
    }
    let dof = if kind.is_upper() {
        antennas - users + 1
    } else {
        if antennas <= users {
            return Err(Error::InvalidParameter {
                name: "antennas",
                value: antennas as f64,
                reason: "lower bound needs more antennas than users",
            });
        }
        antennas - users
    };
    let dof = T::from_count(dof);
    let gain = gains[k];
    let snr = if kind.is_imperfect() {
        let rho_p = rho_p.ok_or(Error::InvalidParameter {
            name: "rho_p",
            value: f64::NAN,
            reason: "imperfect-CSI bound needs a pilot power",
        })?;
        check_positive("rho_p", rho_p)?;
        let error_power = gains
            .iter()
            .fold(T::zero(), |s, &g| s + g / (rho_p * g + T::one()));
        let estimate = rho_p * gain / (rho_p * gain + T::one()) * gain;
        rho_u * dof / (rho_u * error_power + T::one()) * estimate
    } else {
        rho_u * dof * gain
    };
    Ok(log2_1p(snr))
}
