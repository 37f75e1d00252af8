//! Gamma-family special functions.

use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Real>(x: T) -> T {
    debug_assert!(x > T::zero(), "ln_gamma needs a positive argument");
    let half = T::lit(0.5);
    if x < half {
        // Reflection keeps the series in its accurate range.
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_count(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * (T::TAU()).ln() + (x + half) * t.ln() - t + acc.ln()
}

pub fn gamma<T: Real>(x: T) -> T {
    ln_gamma(x).exp()
}

/// `ln B(a, b)`.
pub fn ln_beta<T: Real>(a: T, b: T) -> T {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

pub fn beta<T: Real>(a: T, b: T) -> T {
    ln_beta(a, b).exp()
}

/// `ln(n! / ((l-1)! (n-l)!))`, the order-statistic density prefactor for the
/// `l`-th smallest of `n` samples.
pub fn ln_order_stat_prefactor<T: Real>(l: usize, n: usize) -> T {
    debug_assert!(1 <= l && l <= n);
    ln_gamma(T::from_count(n + 1)) - ln_gamma(T::from_count(l)) - ln_gamma(T::from_count(n - l + 1))
}

/// `ln C(n, j)`.
pub fn ln_binomial<T: Real>(n: usize, j: usize) -> T {
    debug_assert!(j <= n);
    ln_gamma(T::from_count(n + 1)) - ln_gamma(T::from_count(j + 1)) - ln_gamma(T::from_count(n - j + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        let mut f = 1.0_f64;
        for n in 1..25 {
            f *= n as f64;
            let got = gamma(n as f64 + 1.0);
            assert!((got - f).abs() / f < 1e-13, "n={n}");
        }
    }

    #[test]
    fn half_integers() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((gamma(0.5_f64) - sqrt_pi).abs() < 1e-14);
        assert!((gamma(1.5_f64) - 0.5 * sqrt_pi).abs() < 1e-14);
        assert!((gamma(3.0_f64) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_arguments_follow_stirling() {
        for &x in &[1e3_f64, 1e5, 1e7] {
            let stirling = (x - 0.5) * x.ln() - x + 0.5 * (std::f64::consts::TAU).ln() + 1.0 / (12.0 * x);
            assert!((ln_gamma(x) - stirling).abs() < 1e-9 * stirling.abs());
        }
    }

    #[test]
    fn beta_symmetry_and_values() {
        assert!((beta(1.0_f64, 3.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((beta(2.0_f64, 3.0) - 1.0 / 12.0).abs() < 1e-15);
        assert!((ln_beta(2.5_f64, 7.0) - ln_beta(7.0, 2.5)).abs() < 1e-14);
    }

    #[test]
    fn combinatorics() {
        assert!((ln_binomial::<f64>(10, 3).exp() - 120.0).abs() < 1e-10);
        // 4! / (1! 2!)
        assert!((ln_order_stat_prefactor::<f64>(2, 4).exp() - 12.0).abs() < 1e-12);
        assert!((ln_order_stat_prefactor::<f64>(1, 1).exp() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn f32_gamma() {
        assert!((gamma(5.0_f32) - 24.0).abs() < 1e-4);
    }
}
