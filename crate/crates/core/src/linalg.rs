//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Matrix-vector product accumulated column by column, left to right.
///
/// The controller paths rely on this fixed order so that algebraically
/// identical laws (the one-step predictive law and its baseline) produce
/// identical bits.
pub fn mul_vec<T: Real>(m: &DMatrix<T>, v: &DVector<T>) -> DVector<T> {
    assert_eq!(m.ncols(), v.len(), "mul_vec shape");
    let mut out = DVector::zeros(m.nrows());
    for (c, &x) in v.iter().enumerate() {
        for r in 0..m.nrows() {
            out[r] += m[(r, c)] * x;
        }
    }
    out
}

/// `m^p` for `p >= 0`; `m^0` is the identity.
pub fn matrix_power<T: Real>(m: &DMatrix<T>, p: usize) -> DMatrix<T> {
    debug_assert!(m.is_square());
    let mut out = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..p {
        out = &out * m;
    }
    out
}

/// Block-diagonal matrix with `count` copies of `block`.
pub fn block_diag<T: Real>(block: &DMatrix<T>, count: usize) -> DMatrix<T> {
    let (r, c) = block.shape();
    let mut out = DMatrix::zeros(r * count, c * count);
    for i in 0..count {
        out.view_mut((i * r, i * c), (r, c)).copy_from(block);
    }
    out
}

pub fn all_finite<T: Real>(m: &DMatrix<T>) -> bool {
    m.iter().all(|x| x.is_finite())
}

pub fn vec_finite<T: Real>(v: &DVector<T>) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// What to do when the regularized normal matrix is singular.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SingularPolicy {
    /// Report [`Error::Singular`].
    Error,
    /// With a zero weight, fall back to the minimum-norm least-squares gain
    /// (the `lambda -> 0+` limit of the ridge gain).
    #[default]
    MinimumNorm,
}

/// Gain `(psi^T psi + diag(weights))^-1 psi^T` of the ridge-regularized
/// least-squares problem `min |r - psi x|^2 + x^T diag(weights) x`.
///
/// The normal matrix is factored by Cholesky. A rank check is only performed
/// when some weight is exactly zero; a positive diagonal keeps the normal
/// matrix positive definite.
pub fn ridge_gain<T: Real>(
    psi: &DMatrix<T>,
    weights: &DVector<T>,
    policy: SingularPolicy,
) -> Result<DMatrix<T>> {
    check_len("ridge weights", psi.ncols(), weights.len())?;
    if weights.iter().any(|&w| w < T::zero() || !w.is_finite()) {
        return Err(Error::Config("control weights must be finite and >= 0".into()));
    }
    let n = psi.ncols();
    if n == 0 {
        return Ok(DMatrix::zeros(0, psi.nrows()));
    }
    let mut normal = psi.transpose() * psi;
    for i in 0..n {
        normal[(i, i)] += weights[i];
    }
    let has_zero_weight = weights.iter().any(|w| w.is_zero());
    let condition = match normal.clone().cholesky() {
        Some(chol) => {
            let cond = cholesky_condition(chol.l_dirty());
            if !has_zero_weight || cond * to_f64(T::default_epsilon()) < 1e-4 {
                return Ok(chol.solve(&psi.transpose()));
            }
            cond
        }
        None => f64::INFINITY,
    };
    if policy == SingularPolicy::MinimumNorm && weights.iter().all(|w| w.is_zero()) {
        let eps = T::default_epsilon() * lit(psi.nrows().max(n) as f64);
        let svd = psi.clone().svd(true, true);
        let max_sv = svd.singular_values.max();
        return svd
            .pseudo_inverse(eps * max_sv)
            .map_err(|_| Error::Singular { condition });
    }
    Err(Error::Singular { condition })
}

/// Condition estimate of `L L^T` from the diagonal of its Cholesky factor.
fn cholesky_condition<T: Real>(l: &DMatrix<T>) -> f64 {
    let diag = l.diagonal();
    let lo = diag.iter().map(|x| to_f64(x.abs())).fold(f64::INFINITY, f64::min);
    let hi = diag.iter().map(|x| to_f64(x.abs())).fold(0.0, f64::max);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        (hi / lo).powi(2)
    }
}
