//! Zero-forcing detection: `A = G (G†G)⁻¹`.
//!
//! Perfect-CSI rates only need `‖a_k‖² = [(G†G)⁻¹]_kk`, so the detector is
//! materialized only when a per-antenna weighting of its entries is needed.

use crate::channel::EstimationParams;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::Real;

/// Largest accepted 1-norm condition number of the diagonally equilibrated
/// Gram matrix: 1e12 in `f64`, scaled by machine epsilon for other types.
pub fn condition_limit<T: Real>() -> T {
    T::lit(1e12 * f64::EPSILON) / T::epsilon()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZfSolution<T> {
    /// `‖a_k‖²` for every user.
    pub column_sq_norms: Vec<T>,
    /// `A`, when requested.
    pub detector: Option<CMatrix<T>>,
    /// Condition number of the equilibrated Gram matrix.
    pub condition: T,
    /// Set when the Hermitian factorization failed and the pivoted solve was used.
    pub used_fallback: bool,
}

struct GramInverse<T> {
    inverse: CMatrix<T>,
    condition: T,
    used_fallback: bool,
}

fn gram_inverse<T: Real>(g: &CMatrix<T>) -> Result<GramInverse<T>> {
    let (rows, cols) = g.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyInput("channel matrix"));
    }
    if rows < cols {
        return Err(Error::ShapeMismatch {
            expected: (cols, cols),
            found: (rows, cols),
        });
    }
    let m = linalg::gram(g);
    let ill = |condition: T| Error::IllConditioned {
        condition: condition.to_f64_lossy(),
        trial: None,
    };
    let (inverse, used_fallback) = match linalg::cholesky(&m) {
        Some(r) => (linalg::inverse_from_cholesky(&r), false),
        None => (linalg::lu_inverse(&m).ok_or_else(|| ill(T::infinity()))?, true),
    };

    // Condition of D M D with D = diag(M)^(-1/2), whose inverse is D⁻¹ M⁻¹ D⁻¹.
    let d: Vec<T> = (0..cols).map(|j| m.get(j, j).re).collect();
    if d.iter().any(|v| !(*v > T::zero())) {
        return Err(ill(T::infinity()));
    }
    let scaled = |a: &CMatrix<T>, power: T| {
        CMatrix::from_fn(cols, cols, |i, j| a.get(i, j) * (d[i] * d[j]).powf(power))
    };
    let half = T::lit(0.5);
    let condition = linalg::norm1(&scaled(&m, -half)) * linalg::norm1(&scaled(&inverse, half));
    if !condition.is_finite() || condition > condition_limit::<T>() {
        return Err(ill(condition));
    }
    Ok(GramInverse {
        inverse,
        condition,
        used_fallback,
    })
}

/// Solve for the ZF quantities of `g`, optionally forming `A`.
pub fn zf_solve<T: Real>(g: &CMatrix<T>, materialize: bool) -> Result<ZfSolution<T>> {
    let GramInverse {
        inverse,
        condition,
        used_fallback,
    } = gram_inverse(g)?;
    let column_sq_norms = (0..g.cols()).map(|k| inverse.get(k, k).re).collect();
    let detector = if materialize { Some(g.mul(&inverse)?) } else { None };
    Ok(ZfSolution {
        column_sq_norms,
        detector,
        condition,
        used_fallback,
    })
}

/// Diagonal of `(G†G)⁻¹`, i.e. the squared norms of the ZF detector columns.
pub fn zf_column_norms<T: Real>(g: &CMatrix<T>) -> Result<Vec<T>> {
    zf_solve(g, false).map(|s| s.column_sq_norms)
}

/// The ZF detector `A = G (G†G)⁻¹`.
pub fn zf_detector_matrix<T: Real>(g: &CMatrix<T>) -> Result<CMatrix<T>> {
    Ok(zf_solve(g, true)?.detector.expect("materialized"))
}

/// `rho_u Σ_l |â_{l,k}|² s_l + ‖â_k‖²` with precomputed error row sums
/// `s_l = Σ_n gamma_tilde[l][n]`.
pub fn imperfect_csi_denominator_with_row_sums<T: Real>(a_hat: &CMatrix<T>, row_sums: &[T], rho_u: T, k: usize) -> T {
    let mut weighted = T::zero();
    let mut plain = T::zero();
    for (z, &s) in a_hat.col(k).iter().zip(row_sums) {
        let p = z.norm_sqr();
        weighted = weighted + p * s;
        plain = plain + p;
    }
    rho_u * weighted + plain
}

/// Effective noise-plus-estimation-error power seen by user `k` through the
/// detector `a_hat` built from the estimated channel.
pub fn imperfect_csi_denominator<T: Real>(a_hat: &CMatrix<T>, est: &EstimationParams<T>, rho_u: T, k: usize) -> Result<T> {
    if a_hat.shape() != est.gamma_tilde().shape() {
        return Err(Error::ShapeMismatch {
            expected: est.gamma_tilde().shape(),
            found: a_hat.shape(),
        });
    }
    if k >= a_hat.cols() {
        return Err(Error::IndexOutOfRange {
            what: "user",
            index: k,
            size: a_hat.cols(),
        });
    }
    Ok(imperfect_csi_denominator_with_row_sums(a_hat, &est.error_row_sums(), rho_u, k))
}
