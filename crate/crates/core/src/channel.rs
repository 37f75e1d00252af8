//! Large-scale path gains, Rayleigh small-scale fading and MMSE channel
//! estimation statistics.
//!
//! Powers (`rho_u`, `rho_p`) are linear throughout this module.

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::DistanceMatrix;
use crate::linalg::{CMatrix, RMatrix};
use crate::scalar::Real;

/// L×K complex channel (true or estimated).
pub type ChannelMatrix<T> = CMatrix<T>;

/// Path gains `gamma[l][k] = d_{l,k}^(-alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleMatrix<T> {
    gamma: RMatrix<T>,
    alpha: T,
}

impl<T: Real> LargeScaleMatrix<T> {
    /// Wrap explicit gains. Every entry must be positive and finite.
    pub fn from_gains(gamma: RMatrix<T>, alpha: T) -> Result<Self> {
        if gamma.rows() == 0 || gamma.cols() == 0 {
            return Err(Error::EmptyInput("large-scale gains"));
        }
        if let Some(bad) = gamma.iter().find(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: bad.to_f64_lossy(),
                reason: "path gains must be positive and finite",
            });
        }
        Ok(Self { gamma, alpha })
    }

    /// Every antenna sees user `k` with the same gain `gains[k]`.
    pub fn identical_rows(antennas: usize, gains: &[T], alpha: T) -> Result<Self> {
        Self::from_gains(RMatrix::from_fn(antennas, gains.len(), |_, k| gains[k]), alpha)
    }

    #[inline]
    pub fn gamma(&self) -> &RMatrix<T> {
        &self.gamma
    }

    #[inline]
    pub fn get(&self, l: usize, k: usize) -> T {
        self.gamma.get(l, k)
    }

    /// Gains of user `k` across all antennas.
    #[inline]
    pub fn user(&self, k: usize) -> &[T] {
        self.gamma.col(k)
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn num_antennas(&self) -> usize {
        self.gamma.rows()
    }

    pub fn num_users(&self) -> usize {
        self.gamma.cols()
    }
}

/// Path gains from distances. Distances below `min_distance` are raised to it;
/// with `min_distance = 0` an exact zero distance is an error.
pub fn large_scale_fading<T: Real>(distances: &DistanceMatrix<T>, alpha: T, min_distance: T) -> Result<LargeScaleMatrix<T>> {
    if !(alpha > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha.to_f64_lossy(),
            reason: "path-loss exponent must be positive",
        });
    }
    if !(min_distance >= T::zero()) {
        return Err(Error::InvalidParameter {
            name: "min_distance",
            value: min_distance.to_f64_lossy(),
            reason: "distance guard must be nonnegative",
        });
    }
    if let Some((l, k, _)) = distances.indexed().find(|&(_, _, d)| d.max(min_distance) == T::zero()) {
        return Err(Error::SingularDistance { antenna: l, user: k });
    }
    let gamma = distances.map(|d| d.max(min_distance).powf(-alpha));
    LargeScaleMatrix::from_gains(gamma, alpha)
}

/// One CN(0, 1) draw: real and imaginary parts each with variance 1/2.
#[inline]
pub fn sample_cn<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let s = T::FRAC_1_SQRT_2();
    Complex::new(T::standard_normal(rng) * s, T::standard_normal(rng) * s)
}

/// L×K matrix of i.i.d. CN(0, 1) entries, filled column by column.
pub fn sample_small_scale<T: Real, R: Rng + ?Sized>(antennas: usize, users: usize, rng: &mut R) -> CMatrix<T> {
    CMatrix::from_fn(antennas, users, |_, _| sample_cn(rng))
}

/// Scale entry `(l, k)` of `h` by `sqrt(variance[l][k])`.
pub fn scale_by_variance<T: Real>(variance: &RMatrix<T>, h: &CMatrix<T>) -> Result<CMatrix<T>> {
    variance.zip_map(h, |v, z| z * v.sqrt())
}

/// `g_{l,k} = h_{l,k} * sqrt(gamma_{l,k})`.
pub fn compose_channel<T: Real>(ls: &LargeScaleMatrix<T>, h: &CMatrix<T>) -> Result<ChannelMatrix<T>> {
    scale_by_variance(ls.gamma(), h)
}

/// Per-entry variances of the MMSE estimate and its error under orthogonal
/// pilots of power `rho_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationParams<T> {
    gamma_hat: RMatrix<T>,
    gamma_tilde: RMatrix<T>,
    rho_p: T,
}

impl<T: Real> EstimationParams<T> {
    pub fn gamma_hat(&self) -> &RMatrix<T> {
        &self.gamma_hat
    }

    pub fn gamma_tilde(&self) -> &RMatrix<T> {
        &self.gamma_tilde
    }

    pub fn rho_p(&self) -> T {
        self.rho_p
    }

    /// `Σ_n gamma_tilde[l][n]` for every antenna `l`.
    pub fn error_row_sums(&self) -> Vec<T> {
        let g = &self.gamma_tilde;
        (0..g.rows()).map(|l| g.row(l).fold(T::zero(), |s, v| s + v)).collect()
    }
}

/// `gamma_hat = rho_p gamma^2 / (rho_p gamma + 1)`, `gamma_tilde = gamma / (rho_p gamma + 1)`.
pub fn estimation_params<T: Real>(ls: &LargeScaleMatrix<T>, rho_p: T) -> Result<EstimationParams<T>> {
    if !(rho_p > T::zero()) || !rho_p.is_finite() {
        return Err(Error::InvalidParameter {
            name: "rho_p",
            value: rho_p.to_f64_lossy(),
            reason: "pilot power must be positive and finite",
        });
    }
    let gamma_hat = ls.gamma().map(|g| {
        let snr = rho_p * g;
        snr / (snr + T::one()) * g
    });
    let gamma_tilde = ls.gamma().map(|g| g / (rho_p * g + T::one()));
    Ok(EstimationParams {
        gamma_hat,
        gamma_tilde,
        rho_p,
    })
}

/// Draw the estimated channel directly from its marginal law
/// `ĝ_{l,k} ~ CN(0, gamma_hat[l][k])`.
pub fn sample_estimated_channel<T: Real, R: Rng + ?Sized>(params: &EstimationParams<T>, rng: &mut R) -> ChannelMatrix<T> {
    let (l, k) = params.gamma_hat.shape();
    let h = sample_small_scale(l, k, rng);
    scale_by_variance(&params.gamma_hat, &h).expect("shapes match by construction")
}

/// True channel and its MMSE estimate from an explicit pilot observation
/// `y = sqrt(rho_p) g + w`, `ĝ = sqrt(rho_p) gamma / (rho_p gamma + 1) * y`.
pub fn sample_pilot_estimate<T: Real, R: Rng + ?Sized>(
    ls: &LargeScaleMatrix<T>,
    rho_p: T,
    rng: &mut R,
) -> Result<(ChannelMatrix<T>, ChannelMatrix<T>)> {
    // Validates rho_p.
    estimation_params(ls, rho_p)?;
    let (rows, cols) = ls.gamma().shape();
    let h = sample_small_scale(rows, cols, rng);
    let g = compose_channel(ls, &h)?;
    let w: CMatrix<T> = sample_small_scale(rows, cols, rng);
    let sp = rho_p.sqrt();
    let mut g_hat = g.clone();
    for k in 0..cols {
        for l in 0..rows {
            let gamma = ls.get(l, k);
            let c = sp * gamma / (rho_p * gamma + T::one());
            g_hat.set(l, k, (g.get(l, k) * sp + w.get(l, k)) * c);
        }
    }
    Ok((g, g_hat))
}
