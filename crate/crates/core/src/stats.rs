//! Summary statistics and goodness-of-fit helpers.

use crate::scalar::Real;

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Welford<T> {
    count: usize,
    mean: T,
    m2: T,
}

impl<T: Real> Default for Welford<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Welford<T> {
    pub fn new() -> Self {
        Self {
            count: 0,
            mean: T::zero(),
            m2: T::zero(),
        }
    }

    pub fn push(&mut self, x: T) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean = self.mean + delta / T::from_count(self.count);
        self.m2 = self.m2 + delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    /// Unbiased sample variance; zero with fewer than two samples.
    pub fn variance(&self) -> T {
        if self.count < 2 {
            T::zero()
        } else {
            self.m2 / T::from_count(self.count - 1)
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> T {
        if self.count == 0 {
            T::zero()
        } else {
            (self.variance() / T::from_count(self.count)).sqrt()
        }
    }
}

impl<T: Real> FromIterator<T> for Welford<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut w = Self::new();
        for x in iter {
            w.push(x);
        }
        w
    }
}

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub mean: T,
    pub std_error: T,
}

impl<T: Real> Estimate<T> {
    pub fn of(values: &[T]) -> Self {
        let w: Welford<T> = values.iter().copied().collect();
        Self {
            mean: w.mean(),
            std_error: w.std_error(),
        }
    }

    pub fn exact(mean: T) -> Self {
        Self {
            mean,
            std_error: T::zero(),
        }
    }
}

/// Pairwise summation in fixed index order.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    match values.len() {
        0 => T::zero(),
        1..=8 => values.iter().fold(T::zero(), |s, &v| s + v),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope<T: Real>(x: &[T], y: &[T]) -> T {
    assert_eq!(x.len(), y.len());
    let n = T::from_count(x.len());
    let mx = x.iter().fold(T::zero(), |s, &v| s + v) / n;
    let my = y.iter().fold(T::zero(), |s, &v| s + v) / n;
    let (num, den) = x.iter().zip(y).fold((T::zero(), T::zero()), |(num, den), (&xi, &yi)| {
        (num + (xi - mx) * (yi - my), den + (xi - mx) * (xi - mx))
    });
    num / den
}

/// One-sample Kolmogorov–Smirnov statistic of `samples` against `cdf`.
/// Sorts `samples` in place.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Asymptotic Kolmogorov survival function `P(K > lambda)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// p-value of a KS statistic `d` from `n` samples (Stephens' correction).
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}
