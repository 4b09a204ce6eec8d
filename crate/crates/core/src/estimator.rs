//! Online pseudo-Jacobian estimation by the projection algorithm.

use nalgebra::{DMatrix, DVector};

use crate::edlm::Pjm;
use crate::error::{check_len, Error, Result};
use crate::linalg::all_finite;
use crate::scalar::Real;

/// How the `(mu I + h h')^-1` factor is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum UpdateMode {
    /// Factor the full square matrix.
    #[default]
    Direct,
    /// Closed form `h' (mu I + h h')^-1 = h' / (mu + |h|^2)`.
    RankOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum ResetPolicy {
    #[default]
    Off,
    /// Restore a column block to its initial value once its Frobenius norm
    /// drops to the threshold.
    NormThreshold(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorState<T: Real> {
    pub phi_hat: Pjm<T>,
    pub initial: Pjm<T>,
    pub eta: T,
    pub mu: T,
    pub last_dh: Option<DVector<T>>,
    pub mode: UpdateMode,
}

impl<T: Real> EstimatorState<T> {
    pub fn new(initial: Pjm<T>, eta: T, mu: T) -> Result<Self> {
        if !(eta > T::zero()) || !eta.is_finite() {
            return Err(Error::Config("estimator step gain must be positive".into()));
        }
        if !(mu > T::zero()) || !mu.is_finite() {
            return Err(Error::Config("estimator regularizer must be positive".into()));
        }
        Ok(EstimatorState {
            phi_hat: initial.clone(),
            initial,
            eta,
            mu,
            last_dh: None,
            mode: UpdateMode::Direct,
        })
    }

    pub fn with_mode(mut self, mode: UpdateMode) -> Self {
        self.mode = mode;
        self
    }
}

/// `phi(k) = phi(k-1) + eta (dy(k) - phi(k-1) dH(k-1)) dH(k-1)' (mu I + dH dH')^-1`.
pub fn projection_update<T: Real>(
    st: &EstimatorState<T>,
    y_k: &DVector<T>,
    y_km1: &DVector<T>,
    dh_km1: &DVector<T>,
) -> Result<EstimatorState<T>> {
    let dims = st.phi_hat.dims();
    check_len("estimator output", dims.outputs, y_k.len())?;
    check_len("estimator previous output", dims.outputs, y_km1.len())?;
    check_len("estimator increment vector", dims.width(), dh_km1.len())?;
    let phi = st.phi_hat.stacked();
    let innovation = (y_k - y_km1) - &phi * dh_km1;
    let row = match st.mode {
        UpdateMode::Direct => {
            let n = dh_km1.len();
            let mut m = dh_km1 * dh_km1.transpose();
            for i in 0..n {
                m[(i, i)] += st.mu;
            }
            let chol = m.cholesky().ok_or(Error::Singular {
                condition: f64::INFINITY,
            })?;
            // symmetric, so h' M^-1 = (M^-1 h)'
            chol.solve(dh_km1).transpose()
        }
        UpdateMode::RankOne => dh_km1.transpose() / (st.mu + dh_km1.dot(dh_km1)),
    };
    let next: DMatrix<T> = phi + (innovation * row) * st.eta;
    if !all_finite(&next) {
        return Err(Error::NonFinite("pseudo-Jacobian estimate"));
    }
    Ok(EstimatorState {
        phi_hat: Pjm::from_stacked(dims, &next)?,
        last_dh: Some(dh_km1.clone()),
        ..st.clone()
    })
}

/// Applies `policy` to each column block of the estimate.
pub fn maybe_reset<T: Real>(st: &EstimatorState<T>, policy: ResetPolicy) -> EstimatorState<T> {
    let ResetPolicy::NormThreshold(eps) = policy else {
        return st.clone();
    };
    let dims = st.phi_hat.dims();
    let mut phi = st.phi_hat.stacked();
    let init = st.initial.stacked();
    let mut offset = 0;
    let widths = std::iter::repeat_n(dims.outputs, dims.output_order)
        .chain(std::iter::repeat_n(dims.inputs, dims.input_order));
    let mut changed = false;
    for w in widths {
        let norm = crate::scalar::to_f64(phi.columns(offset, w).norm());
        if norm <= eps {
            phi.columns_mut(offset, w).copy_from(&init.columns(offset, w));
            changed = true;
        }
        offset += w;
    }
    if !changed {
        return st.clone();
    }
    EstimatorState {
        phi_hat: Pjm::from_stacked(dims, &phi).expect("restored blocks keep the shape"),
        ..st.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edlm::Dims;
    use nalgebra::dvector;

    fn state(mode: UpdateMode) -> EstimatorState<f64> {
        let dims = Dims::new(2, 3, 1, 2).unwrap();
        EstimatorState::new(Pjm::filled(dims, 0.01).unwrap(), 1.5, 1.0)
            .unwrap()
            .with_mode(mode)
    }

    fn sample_dh() -> DVector<f64> {
        dvector![1.0, 1.0, 0.3, -0.2, 0.5, 0.0, 0.1, 0.0]
    }

    #[test]
    fn zero_innovation_is_fixed_point() {
        let st = state(UpdateMode::Direct);
        let dh = sample_dh();
        let y_prev = dvector![0.2, -0.4];
        let y = &y_prev + st.phi_hat.stacked() * &dh;
        let next = projection_update(&st, &y, &y_prev, &dh).unwrap();
        assert!((next.phi_hat.stacked() - st.phi_hat.stacked()).amax() < 1e-15);
    }

    #[test]
    fn zero_increment_is_fixed_point() {
        let st = state(UpdateMode::Direct);
        let next = projection_update(&st, &dvector![3.0, 1.0], &dvector![0.0, 0.0], &DVector::zeros(8)).unwrap();
        assert_eq!(next.phi_hat, st.phi_hat);
    }

    #[test]
    fn rank_one_matches_direct() {
        let dh = sample_dh();
        let (y, yp) = (dvector![1.0, 0.5], dvector![0.0, 0.0]);
        let a = projection_update(&state(UpdateMode::Direct), &y, &yp, &dh).unwrap();
        let b = projection_update(&state(UpdateMode::RankOne), &y, &yp, &dh).unwrap();
        assert!((a.phi_hat.stacked() - b.phi_hat.stacked()).amax() < 1e-14);
    }

    #[test]
    fn rejects_bad_gains() {
        let dims = Dims::new(1, 1, 0, 1).unwrap();
        assert!(EstimatorState::new(Pjm::filled(dims, 1.0).unwrap(), 0.0, 1.0).is_err());
        assert!(EstimatorState::new(Pjm::filled(dims, 1.0).unwrap(), 1.0, 0.0).is_err());
    }

    #[test]
    fn reset_policies() {
        let st = state(UpdateMode::Direct);
        assert_eq!(maybe_reset(&st, ResetPolicy::Off), st);
        assert_eq!(maybe_reset(&st, ResetPolicy::NormThreshold(1e-4)), st);
        let zeroed = EstimatorState {
            phi_hat: Pjm::zeros(st.phi_hat.dims()).unwrap(),
            ..st.clone()
        };
        assert_eq!(maybe_reset(&zeroed, ResetPolicy::NormThreshold(1e-4)).phi_hat, st.initial);
        assert_eq!(maybe_reset(&zeroed, ResetPolicy::Off), zeroed);
    }
}
