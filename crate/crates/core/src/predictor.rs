//! N-step prediction operators built from the data model.
//!
//! With `dU_prev = dU_Lu(k-1)` and the future increments `dU = [du(k); ..; du(k+Nu-1)]`
//! the stacked prediction is
//!
//! ```text
//! Y_N(k+1) = E y(k) + PsiY~ dY_Ly(k) + PsiU~ dU_prev + PsiNu~ dU
//! ```
//!
//! Each row block `j` of the raw operators describes `dy(k+j)` and follows
//! from substituting the previously predicted increments into the data model:
//!
//! ```text
//! PsiY[j]   = phiY C^(j-1)    + phiY sum_{i=0}^{j-2} C^i D PsiY[j-i-1]
//! PsiU[j]   = phiU A^j        + phiY sum_{i=0}^{j-2} C^i D PsiU[j-i-1]
//! PsiN[j,m] = phiU A^(j-m) B  + phiY sum_{i=0}^{j-m-1} C^i D PsiN[j-i-1,m]   (m <= j)
//! ```
//!
//! where `phiY`, `phiU` are taken from the pseudo-Jacobian of row `j`. The
//! tilde operators are the prefix sums `A_N Psi`, turning increments into levels.

use nalgebra::{DMatrix, DVector};

use crate::edlm::{Dims, Pjm};
use crate::error::{check_len, Error, Result};
use crate::linalg::{matrix_power, mul_vec};
use crate::scalar::Real;

/// Structural shift/injection matrices for one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftOperators<T: Real> {
    /// Down-shift on stacked input increments, `(Lu*Mu)^2`.
    pub a: DMatrix<T>,
    /// Injection of the newest input increment, `(Lu*Mu) x Mu`.
    pub b: DMatrix<T>,
    /// Down-shift on stacked output increments, `(Ly*My)^2`.
    pub c: DMatrix<T>,
    /// Injection of the newest output increment, `(Ly*My) x My`.
    pub d: DMatrix<T>,
    /// Block lower-triangular prefix-sum matrix, `(N*My)^2`.
    pub a_n: DMatrix<T>,
    /// `N` stacked identities, `(N*My) x My`.
    pub e: DMatrix<T>,
}

fn down_shift<T: Real>(blocks: usize, size: usize) -> DMatrix<T> {
    let n = blocks * size;
    let mut m = DMatrix::zeros(n, n);
    for i in 1..blocks {
        for r in 0..size {
            m[(i * size + r, (i - 1) * size + r)] = T::one();
        }
    }
    m
}

fn injection<T: Real>(blocks: usize, size: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(blocks * size, size);
    if blocks > 0 {
        m.view_mut((0, 0), (size, size)).fill_with_identity();
    }
    m
}

/// Builds `A, B, C, D, A_N, E` for the given dimensions and prediction horizon.
pub fn build_shift_operators<T: Real>(dims: &Dims, horizon: usize) -> ShiftOperators<T> {
    let my = dims.outputs;
    let mut a_n = DMatrix::zeros(horizon * my, horizon * my);
    for i in 0..horizon {
        for j in 0..=i {
            a_n.view_mut((i * my, j * my), (my, my)).fill_with_identity();
        }
    }
    let mut e = DMatrix::zeros(horizon * my, my);
    for i in 0..horizon {
        e.view_mut((i * my, 0), (my, my)).fill_with_identity();
    }
    ShiftOperators {
        a: down_shift(dims.input_order, dims.inputs),
        b: injection(dims.input_order, dims.inputs),
        c: down_shift(dims.output_order, dims.outputs),
        d: injection(dims.output_order, dims.outputs),
        a_n,
        e,
    }
}

/// Prediction operators for one control step.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionOperators<T: Real> {
    dims: Dims,
    horizon: usize,
    control_horizon: usize,
    /// Raw increment operators (before prefix summation).
    pub psi_y: DMatrix<T>,
    pub psi_u: DMatrix<T>,
    pub psi_n: DMatrix<T>,
    /// Level operators `A_N Psi`.
    pub psi_y_tilde: DMatrix<T>,
    pub psi_u_tilde: DMatrix<T>,
    pub psi_n_tilde: DMatrix<T>,
    /// First `Nu` block columns of `psi_n_tilde`.
    pub psi_nu_tilde: DMatrix<T>,
    pub e: DMatrix<T>,
}

impl<T: Real> PredictionOperators<T> {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Prediction horizon `N`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Control horizon `Nu`.
    pub fn control_horizon(&self) -> usize {
        self.control_horizon
    }
}

fn check_horizons(horizon: usize, control_horizon: usize) -> Result<()> {
    if horizon == 0 || control_horizon == 0 || control_horizon > horizon {
        return Err(Error::Config(format!(
            "horizons must satisfy 1 <= Nu <= N (got N = {horizon}, Nu = {control_horizon})"
        )));
    }
    Ok(())
}

/// Operators under the frozen-PJM approximation `phi(k+i) = phi(k)`.
pub fn build_prediction_operators<T: Real>(
    pjm: &Pjm<T>,
    horizon: usize,
    control_horizon: usize,
) -> Result<PredictionOperators<T>> {
    check_horizons(horizon, control_horizon)?;
    let pjms = vec![pjm.clone(); horizon];
    build_prediction_operators_tv(&pjms, horizon, control_horizon)
}

/// Operators with a per-step pseudo-Jacobian: `pjms[i]` is the PJM at `k+i`.
pub fn build_prediction_operators_tv<T: Real>(
    pjms: &[Pjm<T>],
    horizon: usize,
    control_horizon: usize,
) -> Result<PredictionOperators<T>> {
    check_horizons(horizon, control_horizon)?;
    check_len("pjm sequence length", horizon, pjms.len())?;
    let dims = pjms[0].dims();
    if pjms.iter().any(|p| p.dims() != dims) {
        return Err(Error::Config("pjm sequence has inconsistent dimensions".into()));
    }
    let (my, mu) = (dims.outputs, dims.inputs);
    let wy = dims.output_width();
    let wu = dims.input_width();
    let shifts = build_shift_operators::<T>(&dims, horizon);
    let has_outputs = dims.output_order > 0;

    // Powers of the shifts; A^p = 0 for p >= Lu and C^p = 0 for p >= Ly, but
    // they are formed literally so the recursions read as written.
    let a_pow: Vec<DMatrix<T>> = (0..=horizon).map(|p| matrix_power(&shifts.a, p)).collect();
    let c_pow: Vec<DMatrix<T>> = (0..horizon).map(|p| matrix_power(&shifts.c, p)).collect();
    // C^i D, the lifting of a single output increment into the stacked output increments.
    let c_d: Vec<DMatrix<T>> = c_pow.iter().map(|cp| cp * &shifts.d).collect();

    let mut psi_y = DMatrix::zeros(horizon * my, wy);
    let mut psi_u = DMatrix::zeros(horizon * my, wu);
    let mut psi_n = DMatrix::zeros(horizon * my, horizon * mu);

    for j in 1..=horizon {
        let pjm = &pjms[j - 1];
        let phi_y = pjm.phi_y();
        let phi_u = pjm.phi_u();
        let row = (j - 1) * my;

        // Output-history operator.
        if has_outputs {
            let mut acc = phi_y * &c_pow[j - 1];
            let mut lifted = DMatrix::zeros(wy, wy);
            for i in 0..j.saturating_sub(1) {
                let prev = psi_y.rows((j - i - 2) * my, my);
                lifted += &c_d[i] * prev;
            }
            acc += phi_y * lifted;
            psi_y.rows_mut(row, my).copy_from(&acc);
        }

        // Past-input operator.
        let mut acc = phi_u * &a_pow[j];
        if has_outputs {
            let mut lifted = DMatrix::zeros(wy, wu);
            for i in 0..j.saturating_sub(1) {
                let prev = psi_u.rows((j - i - 2) * my, my);
                lifted += &c_d[i] * prev;
            }
            acc += phi_y * lifted;
        }
        psi_u.rows_mut(row, my).copy_from(&acc);

        // Future-input operator, block columns m <= j.
        for m in 1..=j {
            let mut acc = phi_u * (&a_pow[j - m] * &shifts.b);
            if has_outputs {
                let mut lifted = DMatrix::zeros(wy, mu);
                for i in 0..(j - m) {
                    let prev = psi_n.view(((j - i - 2) * my, (m - 1) * mu), (my, mu));
                    lifted += &c_d[i] * prev;
                }
                acc += phi_y * lifted;
            }
            psi_n.view_mut((row, (m - 1) * mu), (my, mu)).copy_from(&acc);
        }
    }

    let psi_y_tilde = &shifts.a_n * &psi_y;
    let psi_u_tilde = &shifts.a_n * &psi_u;
    let psi_n_tilde = &shifts.a_n * &psi_n;
    let psi_nu_tilde = psi_n_tilde.columns(0, control_horizon * mu).into_owned();

    Ok(PredictionOperators {
        dims,
        horizon,
        control_horizon,
        psi_y,
        psi_u,
        psi_n,
        psi_y_tilde,
        psi_u_tilde,
        psi_n_tilde,
        psi_nu_tilde,
        e: shifts.e,
    })
}

/// Stacked prediction `Y_N(k+1)`.
pub fn predict<T: Real>(
    ops: &PredictionOperators<T>,
    y_k: &DVector<T>,
    d_y: &DVector<T>,
    d_u_prev: &DVector<T>,
    d_u_future: &DVector<T>,
) -> Result<DVector<T>> {
    let dims = ops.dims();
    check_len("output vector", dims.outputs, y_k.len())?;
    check_len("output increment stack", dims.output_width(), d_y.len())?;
    check_len("past input increment stack", dims.input_width(), d_u_prev.len())?;
    check_len(
        "future input increments",
        ops.control_horizon() * dims.inputs,
        d_u_future.len(),
    )?;
    Ok(mul_vec(&ops.e, y_k)
        + mul_vec(&ops.psi_y_tilde, d_y)
        + mul_vec(&ops.psi_u_tilde, d_u_prev)
        + mul_vec(&ops.psi_nu_tilde, d_u_future))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edlm::{edlm_step, HistoryWindow};
    use nalgebra::dvector;

    fn dims(my: usize, mu: usize, ly: usize, lu: usize) -> Dims {
        Dims::new(my, mu, ly, lu).unwrap()
    }

    fn lcg_pjm(d: Dims, seed: u64) -> Pjm<f64> {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let vals: Vec<f64> = (0..d.outputs * d.width())
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect();
        Pjm::from_stacked(d, &DMatrix::from_row_slice(d.outputs, d.width(), &vals)).unwrap()
    }

    #[test]
    fn shift_structure() {
        let d = dims(2, 2, 1, 2);
        let s = build_shift_operators::<f64>(&d, 2);
        let mut a = DMatrix::zeros(4, 4);
        a.view_mut((2, 0), (2, 2)).fill_with_identity();
        assert_eq!(s.a, a);
        assert_eq!(&s.a * &s.a, DMatrix::zeros(4, 4));
        let i2 = DMatrix::<f64>::identity(2, 2);
        let mut a_n = DMatrix::zeros(4, 4);
        a_n.view_mut((0, 0), (2, 2)).copy_from(&i2);
        a_n.view_mut((2, 0), (2, 2)).copy_from(&i2);
        a_n.view_mut((2, 2), (2, 2)).copy_from(&i2);
        assert_eq!(s.a_n, a_n);
        assert_eq!(s.e.nrows(), 4);
    }

    #[test]
    fn zero_output_order_gives_empty_blocks() {
        let d = dims(2, 2, 0, 1);
        let s = build_shift_operators::<f64>(&d, 3);
        assert_eq!(s.c.shape(), (0, 0));
        assert_eq!(s.d.shape(), (0, 2));
        let pjm = lcg_pjm(d, 3);
        let ops = build_prediction_operators(&pjm, 3, 2).unwrap();
        assert_eq!(ops.psi_y_tilde.shape(), (6, 0));
        // Lu = 1: A = 0, so the past-input operator vanishes
        assert_eq!(ops.psi_u_tilde, DMatrix::zeros(6, 2));
        // input-only model: every row block of PsiN~ below the diagonal is phiU
        let phi = pjm.leading_input();
        for i in 0..3 {
            for m in 0..2.min(i + 1) {
                assert_eq!(ops.psi_nu_tilde.view((i * 2, m * 2), (2, 2)), phi);
            }
        }
    }

    #[test]
    fn one_step_operator_is_leading_input_block() {
        let d = dims(2, 3, 1, 2);
        let pjm = lcg_pjm(d, 7);
        let ops = build_prediction_operators(&pjm, 1, 1).unwrap();
        assert_eq!(ops.psi_nu_tilde, pjm.leading_input());
    }

    #[test]
    fn horizon_violation_is_config_error() {
        let pjm = lcg_pjm(dims(1, 1, 1, 1), 1);
        assert!(matches!(build_prediction_operators(&pjm, 2, 3), Err(Error::Config(_))));
        assert!(matches!(build_prediction_operators(&pjm, 0, 0), Err(Error::Config(_))));
    }

    #[test]
    fn tv_rejects_inconsistent_dims() {
        let a = lcg_pjm(dims(2, 2, 1, 2), 1);
        let b = lcg_pjm(dims(2, 2, 1, 1), 2);
        assert!(build_prediction_operators_tv(&[a, b], 2, 2).is_err());
    }

    #[test]
    fn last_past_input_column_block_vanishes() {
        let d = dims(2, 2, 2, 3);
        let ops = build_prediction_operators(&lcg_pjm(d, 11), 5, 3).unwrap();
        let last = ops.psi_u.columns(4, 2);
        assert!(last.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn two_step_tv_entry_matches_hand_expansion() {
        // PsiN[2,1] = phiU(k+1) A B + phiY(k+1) D phiU(k) B
        let d = dims(2, 2, 1, 2);
        let p0 = lcg_pjm(d, 5);
        let p1 = p0.scaled(2.0);
        let ops = build_prediction_operators_tv(&[p0.clone(), p1.clone()], 2, 2).unwrap();
        let expect = p1.input_block(1) + p1.output_block(0) * p0.input_block(0);
        let got = ops.psi_n.view((2, 0), (2, 2)).into_owned();
        assert!((got - expect).amax() < 1e-14);
        // and PsiY[2] = phiY(k+1) (C + D phiY(k)) with C = 0 for Ly = 1
        let expect_y = p1.output_block(0) * p0.output_block(0);
        assert!((ops.psi_y.rows(2, 2) - expect_y).amax() < 1e-14);
    }

    #[test]
    fn predict_with_zero_increments_holds_output() {
        let d = dims(2, 2, 1, 2);
        let ops = build_prediction_operators(&lcg_pjm(d, 9), 4, 2).unwrap();
        let y = dvector![0.25, -1.0];
        let pred = predict(&ops, &y, &DVector::zeros(2), &DVector::zeros(4), &DVector::zeros(4)).unwrap();
        for i in 0..4 {
            assert_eq!(pred.rows(i * 2, 2), y);
        }
    }

    #[test]
    fn predict_matches_iterated_model_steps() {
        let d = dims(2, 2, 1, 2);
        let pjm = lcg_pjm(d, 21);
        let mut hist = HistoryWindow::new(2, 2);
        for t in 0..6 {
            let x = t as f64;
            hist.push_y(dvector![x.sin(), x.cos()]).unwrap();
            if t < 5 {
                hist.push_u(dvector![0.3 * x, -0.1 * x * x]).unwrap();
            }
        }
        let k = hist.k();
        let future = dvector![0.5, -0.2, 0.1, 0.3];
        let ops = build_prediction_operators(&pjm, 3, 2).unwrap();
        let pred = predict(
            &ops,
            &hist.y_at(k).unwrap(),
            &hist.delta_y_stack(k, 1).unwrap(),
            &hist.delta_u_stack(k - 1, 2).unwrap(),
            &future,
        )
        .unwrap();
        let mut sim = hist.clone();
        let mut u = sim.u_at(k - 1).unwrap();
        for j in 0..3 {
            let du = if j < 2 { future.rows(j * 2, 2).into_owned() } else { DVector::zeros(2) };
            u += du;
            sim.push_u(u.clone()).unwrap();
            let t = sim.k();
            let next = edlm_step(&pjm, &sim.delta_h(t, 1, 2).unwrap(), &sim.y_at(t).unwrap()).unwrap();
            assert!((pred.rows(j * 2, 2) - &next).amax() < 1e-12);
            sim.push_y(next).unwrap();
        }
    }
}
