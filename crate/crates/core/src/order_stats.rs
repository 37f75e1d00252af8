//! Distance distributions for uniformly placed antennas on the unit disk.
//!
//! A user sits at radius `x`; antennas are uniform on the disk. `F(y; x)` is
//! the probability that one antenna lies within distance `y` of the user,
//! i.e. the lens area between the disk and a circle of radius `y` around the
//! user, divided by `π`. The printed arccos argument `(x²+y²+1)/(2xy)` in the
//! usual statement of this law never lies in `[-1, 1]`; the circle
//! intersection formula needs `(x²+y²-1)/(2xy)`, which is what is used here.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{distance, sample_disk_point};
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::scalar::Real;
use crate::special::{ln_beta, ln_binomial, ln_gamma, ln_order_stat_prefactor};

/// Negative radicands down to this value are treated as rounding noise.
pub const HERON_CLAMP: f64 = 1e-14;
/// Absolute slack accepted on the support boundary `1 + x`.
const SUPPORT_SLACK: f64 = 1e-12;

/// Area of the triangle with sides `x`, `y` and 1.
pub fn heron_term<T: Real>(x: T, y: T) -> Result<T> {
    let one = T::one();
    let radicand = (x + y + one) * (y - x + one) * (x - y + one) * (x + y - one);
    if radicand < T::zero() {
        if radicand < -T::lit(HERON_CLAMP) {
            return Err(Error::Domain {
                what: "heron radicand",
                value: radicand.to_f64_lossy(),
            });
        }
        return Ok(T::zero());
    }
    Ok(T::lit(0.25) * radicand.sqrt())
}

fn clamp_unit<T: Real>(v: T) -> T {
    v.max(-T::one()).min(T::one())
}

/// Checks `x ∈ [0, 1]` and `y ∈ [0, 1 + x]`. Returns `false` when `y` sits
/// just past the upper end (inside the slack), where the law is saturated.
fn check_domain<T: Real>(y: T, x: T) -> Result<bool> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::Domain {
            what: "user radius",
            value: x.to_f64_lossy(),
        });
    }
    let top = T::one() + x;
    if !(y >= T::zero() && y <= top + T::lit(SUPPORT_SLACK)) {
        return Err(Error::Domain {
            what: "access distance",
            value: y.to_f64_lossy(),
        });
    }
    Ok(y < top)
}

fn cdf_unchecked<T: Real>(y: T, x: T) -> T {
    let one = T::one();
    if y <= one - x {
        return y * y;
    }
    if y >= one + x {
        return one;
    }
    let two = T::lit(2.0);
    let a = clamp_unit((x * x + y * y - one) / (two * x * y));
    let b = clamp_unit((one + x * x - y * y) / (two * x));
    let s = heron_term(x, y).unwrap_or(T::zero());
    let f = (y * y * a.acos() + b.acos() - two * s) / T::PI();
    f.max(T::zero()).min(one)
}

fn pdf_unchecked<T: Real>(y: T, x: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    if y <= one - x {
        return two * y;
    }
    if y >= one + x {
        return T::zero();
    }
    let a = clamp_unit((x * x + y * y - one) / (two * x * y));
    two * y / T::PI() * a.acos()
}

/// Distance law of one uniform antenna seen from a user at radius `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskDistanceLaw<T> {
    x: T,
}

impl<T: Real> DiskDistanceLaw<T> {
    pub fn new(x: T) -> Result<Self> {
        check_domain(T::zero(), x)?;
        Ok(Self { x })
    }

    pub fn radius(&self) -> T {
        self.x
    }

    pub fn support_end(&self) -> T {
        T::one() + self.x
    }

    pub fn cdf(&self, y: T) -> Result<T> {
        access_distance_cdf(y, self.x)
    }

    pub fn pdf(&self, y: T) -> Result<T> {
        access_distance_pdf(y, self.x)
    }

    pub fn inverse_cdf(&self, z: T) -> Result<T> {
        inverse_cdf(z, self.x)
    }
}

/// `F(y; x)`.
pub fn access_distance_cdf<T: Real>(y: T, x: T) -> Result<T> {
    if !check_domain(y, x)? {
        return Ok(T::one());
    }
    Ok(cdf_unchecked(y, x))
}

/// `f(y; x) = dF/dy`.
pub fn access_distance_pdf<T: Real>(y: T, x: T) -> Result<T> {
    if !check_domain(y, x)? {
        return Ok(T::zero());
    }
    Ok(pdf_unchecked(y, x))
}

/// `F⁻¹(z; x)`: a square root on the inner branch, bisection on the lens branch.
pub fn inverse_cdf<T: Real>(z: T, x: T) -> Result<T> {
    check_domain(T::zero(), x)?;
    if !(z >= T::zero() && z <= T::one()) {
        return Err(Error::Domain {
            what: "probability",
            value: z.to_f64_lossy(),
        });
    }
    let one = T::one();
    let inner = one - x;
    if z <= inner * inner {
        return Ok(z.sqrt());
    }
    // Bisect until the bracket cannot shrink further; F is monotone but has
    // a derivative kink at the knee, so no Newton steps.
    let (mut lo, mut hi) = (inner, one + x);
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if cdf_unchecked(mid, x) < z {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(T::lit(0.5) * (lo + hi))
}

fn check_rank(l: usize, m: usize) -> Result<()> {
    if l == 0 || l > m {
        return Err(Error::IndexOutOfRange {
            what: "order-statistic rank",
            index: l,
            size: m,
        });
    }
    Ok(())
}

fn ln_kernel<T: Real>(l: usize, m: usize, ln_pref: T, f: T, pdf: T) -> T {
    if pdf <= T::zero() {
        return T::neg_infinity();
    }
    let mut acc = ln_pref + pdf.ln();
    if l > 1 {
        acc = acc + T::from_count(l - 1) * f.ln();
    }
    if m > l {
        acc = acc + T::from_count(m - l) * (-f).ln_1p();
    }
    acc
}

/// Density of the `l`-th smallest of `m` independent access distances.
pub fn order_stat_pdf<T: Real>(l: usize, m: usize, y: T, x: T) -> Result<T> {
    check_rank(l, m)?;
    if !check_domain(y, x)? {
        return Ok(T::zero());
    }
    let ln_pref = ln_order_stat_prefactor::<T>(l, m);
    Ok(ln_kernel(l, m, ln_pref, cdf_unchecked(y, x), pdf_unchecked(y, x)).exp())
}

/// CDF of the `l`-th smallest of `m` access distances, `P(Bin(m, F) ≥ l)`.
pub fn order_stat_cdf<T: Real>(l: usize, m: usize, y: T, x: T) -> Result<T> {
    check_rank(l, m)?;
    let f = access_distance_cdf(y, x)?;
    if f <= T::zero() {
        return Ok(T::zero());
    }
    if f >= T::one() {
        return Ok(T::one());
    }
    let (lf, lq) = (f.ln(), (-f).ln_1p());
    let below = (0..l).fold(T::zero(), |s, j| {
        s + (ln_binomial::<T>(m, j) + T::from_count(j) * lf + T::from_count(m - j) * lq).exp()
    });
    Ok((T::one() - below).max(T::zero()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    Quadrature,
    MonteCarlo,
    Asymptotic,
}

/// An estimate of `Q_l(L) = E[(d^(l))^α]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentResult<T> {
    pub value: T,
    pub abs_error_estimate: T,
    pub method: MomentMethod,
}

/// Number of candidate antennas `m = L - K + 1`, checked against `l`.
pub fn candidate_count(l: usize, antennas: usize, users: usize) -> Result<usize> {
    if users == 0 || antennas + 1 < users {
        return Err(Error::InvalidParameter {
            name: "antennas",
            value: antennas as f64,
            reason: "need L >= K - 1 and K >= 1",
        });
    }
    let m = antennas + 1 - users;
    check_rank(l, m)?;
    Ok(m)
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha.to_f64_lossy(),
            reason: "path-loss exponent must be positive",
        })
    }
}

/// Relative accuracy targets for [`q_l_numeric`].
const INNER_REL: f64 = 1e-10;
const OUTER_REL: f64 = 1e-8;

/// `Q_l(L)` by nested adaptive quadrature over the user radius and the
/// distance. The distance range is cut where the binomial tail beyond it is
/// far below the requested accuracy.
pub fn q_l_numeric<T: Real>(l: usize, antennas: usize, users: usize, alpha: T) -> Result<MomentResult<T>> {
    let m = candidate_count(l, antennas, users)?;
    check_alpha(alpha)?;
    let ln_pref = ln_order_stat_prefactor::<T>(l, m);
    let lf = T::from_count(l);
    let z_cut = ((lf + T::lit(40.0) * lf.sqrt() + T::lit(40.0)) / T::from_count(m)).min(T::one());
    let typical = (lf / T::from_count(m)).sqrt();
    let tiny = T::min_positive_value();

    let mut inner_error = T::zero();
    let mut failed = false;
    let mut inner = |x: T| -> T {
        let y_cut = inverse_cdf(z_cut, x).unwrap_or(T::one() + x);
        let mut points: Vec<T> = (0..=8).map(|i| y_cut * T::from_count(i) / T::lit(8.0)).collect();
        let knee = T::one() - x;
        if knee > T::zero() && knee < y_cut {
            points.push(knee);
            points.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        }
        let mut integrand = |y: T| {
            if y <= T::zero() {
                return T::zero();
            }
            let k = ln_kernel(l, m, ln_pref, cdf_unchecked(y, x), pdf_unchecked(y, x));
            (k + alpha * y.ln()).exp()
        };
        let r = integrate_with_breaks(&mut integrand, &points, Tolerance::new(tiny, T::lit(INNER_REL)));
        failed |= !r.converged;
        inner_error = inner_error.max(r.error);
        T::lit(2.0) * x * r.value
    };

    let mut breaks = vec![T::zero()];
    for c in [64.0, 16.0, 8.0, 4.0, 2.0, 1.0] {
        let p = T::one() - T::lit(c) * typical;
        if p > *breaks.last().expect("non-empty") {
            breaks.push(p);
        }
    }
    breaks.push(T::one());
    let outer = integrate_with_breaks(&mut inner, &breaks, Tolerance::new(tiny, T::lit(OUTER_REL)));
    let abs_error_estimate = outer.error + inner_error;
    if !outer.converged || failed {
        return Err(Error::Quadrature {
            partial: outer.value.to_f64_lossy(),
            error: abs_error_estimate.to_f64_lossy(),
        });
    }
    Ok(MomentResult {
        value: outer.value,
        abs_error_estimate,
        method: MomentMethod::Quadrature,
    })
}

/// Large-`L` asymptote `m!/((l-1)!(m-l)!) · Γ(l+α/2) · (m-l+1)^-(l+α/2)`.
/// It tracks the part of `Q_l` that ignores the disk boundary, so the full
/// moment exceeds it by a bounded factor.
pub fn q_l_asymptotic<T: Real>(l: usize, antennas: usize, users: usize, alpha: T) -> Result<T> {
    let m = candidate_count(l, antennas, users)?;
    check_alpha(alpha)?;
    let shape = T::from_count(l) + alpha / T::lit(2.0);
    let ln = ln_order_stat_prefactor::<T>(l, m) + ln_gamma(shape) - shape * T::from_count(m - l + 1).ln();
    Ok(ln.exp())
}

/// The boundary-free part `m!/((l-1)!(m-l)!) · B(l+α/2, m-l+1)`, i.e. the
/// moment for a user whose distance law is `y²` everywhere.
pub fn q_l_interior<T: Real>(l: usize, antennas: usize, users: usize, alpha: T) -> Result<T> {
    let m = candidate_count(l, antennas, users)?;
    check_alpha(alpha)?;
    let shape = T::from_count(l) + alpha / T::lit(2.0);
    Ok((ln_order_stat_prefactor::<T>(l, m) + ln_beta(shape, T::from_count(m - l + 1))).exp())
}

/// `Q_l(L)` by direct simulation: a uniform user, `L-K+1` uniform antennas,
/// and the `l`-th smallest distance raised to `α`.
pub fn q_l_montecarlo<T: Real, R: Rng + ?Sized>(
    l: usize,
    antennas: usize,
    users: usize,
    alpha: T,
    samples: usize,
    rng: &mut R,
) -> Result<MomentResult<T>> {
    let m = candidate_count(l, antennas, users)?;
    check_alpha(alpha)?;
    if samples < 2 {
        return Err(Error::InvalidParameter {
            name: "samples",
            value: samples as f64,
            reason: "need at least two samples for an error estimate",
        });
    }
    let mut d = vec![T::zero(); m];
    let mut acc = crate::stats::Welford::new();
    for _ in 0..samples {
        let user = sample_disk_point(rng);
        for v in d.iter_mut() {
            *v = distance(user, sample_disk_point(rng));
        }
        let (_, nth, _) = d.select_nth_unstable_by(l - 1, |a, b| a.partial_cmp(b).expect("finite"));
        acc.push(nth.powf(alpha));
    }
    Ok(MomentResult {
        value: acc.mean(),
        abs_error_estimate: acc.std_error(),
        method: MomentMethod::MonteCarlo,
    })
}

/// One row of the `Q_l` table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QRow<T> {
    pub l: usize,
    pub antennas: usize,
    pub users: usize,
    pub alpha: T,
    pub numeric: MomentResult<T>,
    pub asymptotic: T,
}

pub fn q_table<T: Real>(ls: &[usize], antennas: &[usize], users: usize, alpha: T) -> Result<Vec<QRow<T>>> {
    let mut rows = Vec::with_capacity(ls.len() * antennas.len());
    for &a in antennas {
        for &l in ls {
            rows.push(QRow {
                l,
                antennas: a,
                users,
                alpha,
                numeric: q_l_numeric(l, a, users, alpha)?,
                asymptotic: q_l_asymptotic(l, a, users, alpha)?,
            });
        }
    }
    Ok(rows)
}
