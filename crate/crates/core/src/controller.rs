//! Receding-horizon control laws.
//!
//! Every law solves a ridge-regularized least-squares problem on the stacked
//! prediction and applies only the first input increment.

use nalgebra::{DMatrix, DVector};

use crate::edlm::{analytic_pjm, analytic_pjm_at, Dims, HistoryWindow, JacobianSource, Pjm};
use crate::error::{check_len, Error, Result};
use crate::linalg::{block_diag, mul_vec, ridge_gain, SingularPolicy};
use crate::predictor::{build_prediction_operators_tv, build_shift_operators, predict, PredictionOperators};
use crate::scalar::{lit, Real};

pub use crate::plants::Preview;

/// Penalty on future input increments.
#[derive(Clone, Debug, PartialEq)]
pub enum Lambda<T: Real> {
    /// `lambda * I`.
    Scalar(T),
    /// One weight per stacked increment entry (`Nu * inputs`).
    Diagonal(DVector<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Variant<T: Real> {
    Standard,
    /// Separate proportional and integral weights on the tracking error.
    /// Either gain may be an `outputs x outputs` generator, repeated along the
    /// diagonal, or a full `N*outputs` square matrix.
    Pi { kp: DMatrix<T>, ki: DMatrix<T> },
    /// Re-linearize along the predicted trajectory up to `max_iters` times.
    Iterative { max_iters: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControllerConfig<T: Real> {
    pub dims: Dims,
    pub horizon: usize,
    pub control_horizon: usize,
    pub lambda: Lambda<T>,
    pub variant: Variant<T>,
    pub preview: Preview,
    pub singular_policy: SingularPolicy,
}

impl<T: Real> ControllerConfig<T> {
    pub fn new(dims: Dims, horizon: usize, control_horizon: usize, lambda: Lambda<T>) -> Result<Self> {
        let cfg = ControllerConfig {
            dims,
            horizon,
            control_horizon,
            lambda,
            variant: Variant::Standard,
            preview: Preview::Full,
            singular_policy: SingularPolicy::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_variant(mut self, variant: Variant<T>) -> Result<Self> {
        self.variant = variant;
        self.validate()?;
        Ok(self)
    }

    pub fn with_preview(mut self, preview: Preview) -> Self {
        self.preview = preview;
        self
    }

    pub fn with_singular_policy(mut self, policy: SingularPolicy) -> Self {
        self.singular_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        if self.horizon == 0 || self.control_horizon == 0 || self.control_horizon > self.horizon {
            return Err(Error::Config(format!(
                "horizons must satisfy 1 <= Nu <= N (got N = {}, Nu = {})",
                self.horizon, self.control_horizon
            )));
        }
        let w = self.weights()?;
        if w.iter().any(|&x| x < T::zero() || !x.is_finite()) {
            return Err(Error::Config("control weights must be finite and >= 0".into()));
        }
        match &self.variant {
            Variant::Standard => {}
            Variant::Pi { kp, ki } => {
                self.tracking_gain(kp)?;
                self.tracking_gain(ki)?;
            }
            Variant::Iterative { max_iters } => {
                if *max_iters == 0 {
                    return Err(Error::Config("iterative controller needs max_iters >= 1".into()));
                }
            }
        }
        Ok(())
    }

    /// Diagonal of the increment penalty, length `Nu * inputs`.
    pub fn weights(&self) -> Result<DVector<T>> {
        let n = self.control_horizon * self.dims.inputs;
        match &self.lambda {
            Lambda::Scalar(l) => Ok(DVector::from_element(n, *l)),
            Lambda::Diagonal(d) => {
                check_len("lambda diagonal", n, d.len())?;
                Ok(d.clone())
            }
        }
    }

    /// Expands a PI gain to `N*outputs` square.
    pub fn tracking_gain(&self, gain: &DMatrix<T>) -> Result<DMatrix<T>> {
        let m = self.dims.outputs;
        let full = self.horizon * m;
        match gain.shape() {
            (r, c) if r == full && c == full => Ok(gain.clone()),
            (r, c) if r == m && c == m => Ok(block_diag(gain, self.horizon)),
            (r, c) => Err(Error::Config(format!(
                "PI gain must be {m}x{m} or {full}x{full}, got {r}x{c}"
            ))),
        }
    }
}

/// Result of one control solve.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlDecision<T: Real> {
    /// Input applied at `k`.
    pub u: DVector<T>,
    /// All `Nu` planned increments; the first block is applied.
    pub du_full: DVector<T>,
    /// Cost at the returned increments.
    pub cost: T,
    pub iterations: usize,
    /// The iterative solve stopped early because the increments blew up.
    pub diverged_iteration: bool,
    /// The last iterate's cost exceeds the first's.
    pub cost_increase: bool,
}

/// Measured quantities the laws consume at time `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Measured<T: Real> {
    pub y_k: DVector<T>,
    pub y_prev: DVector<T>,
    /// `[dy(k); ...; dy(k-Ly+1)]`.
    pub d_y: DVector<T>,
    /// `[du(k-1); ...; du(k-Lu)]`.
    pub d_u_prev: DVector<T>,
    pub u_prev: DVector<T>,
}

impl<T: Real> Measured<T> {
    /// Reads the quantities at the history's latest output time.
    pub fn from_history(hist: &HistoryWindow<T>, dims: Dims) -> Result<Self> {
        check_len("history outputs", dims.outputs, hist.outputs())?;
        check_len("history inputs", dims.inputs, hist.inputs())?;
        let k = hist.k();
        Ok(Measured {
            y_k: hist.y_at(k)?,
            y_prev: hist.y_at(k - 1)?,
            d_y: hist.delta_y_stack(k, dims.output_order)?,
            d_u_prev: hist.delta_u_stack(k - 1, dims.input_order)?,
            u_prev: hist.u_at(k - 1)?,
        })
    }
}

/// Tracking cost `|Y* - Y|^2 + dU' diag(w) dU`.
pub fn cost<T: Real>(
    ops: &PredictionOperators<T>,
    measured: &Measured<T>,
    du: &DVector<T>,
    y_star: &DVector<T>,
    weights: &DVector<T>,
) -> Result<T> {
    check_len("reference preview", ops.horizon() * ops.dims().outputs, y_star.len())?;
    check_len("control weights", du.len(), weights.len())?;
    let pred = predict(ops, &measured.y_k, &measured.d_y, &measured.d_u_prev, du)?;
    let r = y_star - pred;
    let penalty = du.iter().zip(weights.iter()).fold(T::zero(), |acc, (&x, &w)| acc + w * x * x);
    Ok(r.dot(&r) + penalty)
}

fn check_ops<T: Real>(ops: &PredictionOperators<T>, cfg: &ControllerConfig<T>) -> Result<()> {
    if ops.dims() != cfg.dims || ops.horizon() != cfg.horizon || ops.control_horizon() != cfg.control_horizon {
        return Err(Error::Config("prediction operators do not match the controller configuration".into()));
    }
    Ok(())
}

// Shared solve: `target` replaces `Y* - E y(k)` in the bracket.
fn solve<T: Real>(
    ops: &PredictionOperators<T>,
    measured: &Measured<T>,
    target: DVector<T>,
    cfg: &ControllerConfig<T>,
) -> Result<DVector<T>> {
    let bracket =
        target - mul_vec(&ops.psi_y_tilde, &measured.d_y) - mul_vec(&ops.psi_u_tilde, &measured.d_u_prev);
    let gain = ridge_gain(&ops.psi_nu_tilde, &cfg.weights()?, cfg.singular_policy)?;
    Ok(mul_vec(&gain, &bracket))
}

fn decide<T: Real>(
    ops: &PredictionOperators<T>,
    measured: &Measured<T>,
    du_full: DVector<T>,
    y_star: &DVector<T>,
    cfg: &ControllerConfig<T>,
) -> Result<ControlDecision<T>> {
    let mu = cfg.dims.inputs;
    let u = &measured.u_prev + du_full.rows(0, mu);
    let j = cost(ops, measured, &du_full, y_star, &cfg.weights()?)?;
    Ok(ControlDecision {
        u,
        du_full,
        cost: j,
        iterations: 1,
        diverged_iteration: false,
        cost_increase: false,
    })
}

/// The predictive law with a fixed set of operators.
pub fn mfapc_control<T: Real>(
    ops: &PredictionOperators<T>,
    hist: &HistoryWindow<T>,
    y_star: &DVector<T>,
    cfg: &ControllerConfig<T>,
) -> Result<ControlDecision<T>> {
    let measured = Measured::from_history(hist, cfg.dims)?;
    mfapc_control_measured(ops, &measured, y_star, cfg)
}

pub fn mfapc_control_measured<T: Real>(
    ops: &PredictionOperators<T>,
    measured: &Measured<T>,
    y_star: &DVector<T>,
    cfg: &ControllerConfig<T>,
) -> Result<ControlDecision<T>> {
    check_ops(ops, cfg)?;
    check_len("reference preview", cfg.horizon * cfg.dims.outputs, y_star.len())?;
    let target = y_star - mul_vec(&ops.e, &measured.y_k);
    let du = solve(ops, measured, target, cfg)?;
    decide(ops, measured, du, y_star, cfg)
}

/// The law with proportional and integral weights on the tracking error.
///
/// `y_star_prev` is the preview issued at `k-1`, i.e. `y*(k), ..., y*(k+N-1)`.
pub fn mfapc_control_pi<T: Real>(
    ops: &PredictionOperators<T>,
    hist: &HistoryWindow<T>,
    y_star: &DVector<T>,
    y_star_prev: &DVector<T>,
    cfg: &ControllerConfig<T>,
) -> Result<ControlDecision<T>> {
    let Variant::Pi { kp, ki } = &cfg.variant else {
        return Err(Error::Config("PI law requires the PI controller variant".into()));
    };
    check_ops(ops, cfg)?;
    let n = cfg.horizon * cfg.dims.outputs;
    check_len("reference preview", n, y_star.len())?;
    check_len("previous reference preview", n, y_star_prev.len())?;
    let measured = Measured::from_history(hist, cfg.dims)?;
    let err_now = y_star - mul_vec(&ops.e, &measured.y_k);
    let err_prev = y_star_prev - mul_vec(&ops.e, &measured.y_prev);
    let ki = cfg.tracking_gain(ki)?;
    let kp = cfg.tracking_gain(kp)?;
    let target = mul_vec(&ki, &err_now) + mul_vec(&kp, &(&err_now - err_prev));
    let du = solve(ops, &measured, target, cfg)?;
    decide(ops, &measured, du, y_star, cfg)
}

/// Predicted inputs `u(k), ..., u(k+N-1)` under the planned increments.
fn planned_inputs<T: Real>(u_prev: &DVector<T>, du: &DVector<T>, inputs: usize, horizon: usize) -> Vec<DVector<T>> {
    let steps = du.len() / inputs;
    let mut u = u_prev.clone();
    (0..horizon)
        .map(|j| {
            if j < steps {
                u += du.rows(j * inputs, inputs);
            }
            u.clone()
        })
        .collect()
}

/// PJMs at `k, ..., k+N-1` evaluated along the trajectory the plan predicts.
fn trajectory_pjms<T: Real, P: JacobianSource<T> + ?Sized>(
    plant: &P,
    hist: &HistoryWindow<T>,
    ops: &PredictionOperators<T>,
    measured: &Measured<T>,
    du: &DVector<T>,
) -> Result<Vec<Pjm<T>>> {
    let dims = ops.dims();
    let n = ops.horizon();
    let k = hist.k();
    let pred = predict(ops, &measured.y_k, &measured.d_y, &measured.d_u_prev, du)?;
    let inputs = planned_inputs(&measured.u_prev, du, dims.inputs, n);
    let mut ext = hist.clone();
    for (j, u) in inputs.into_iter().enumerate() {
        ext.push_u(u)?;
        if j + 1 < n {
            ext.push_y(pred.rows(j * dims.outputs, dims.outputs).into_owned())?;
        }
    }
    (0..n).map(|j| analytic_pjm_at(plant, &ext, k + j as i64, dims)).collect()
}

/// Iterative law: the first pass uses the PJM at `k` over the whole horizon,
/// later passes re-linearize the plant along the previously predicted
/// trajectory.
pub fn mfapc_control_iterative<T: Real, P: JacobianSource<T> + ?Sized>(
    plant: &P,
    hist: &HistoryWindow<T>,
    y_star: &DVector<T>,
    cfg: &ControllerConfig<T>,
) -> Result<ControlDecision<T>> {
    let max_iters = match cfg.variant {
        Variant::Iterative { max_iters } => max_iters,
        _ => 1,
    };
    check_len("reference preview", cfg.horizon * cfg.dims.outputs, y_star.len())?;
    let measured = Measured::from_history(hist, cfg.dims)?;
    let mut pjms = vec![analytic_pjm(plant, hist, cfg.dims)?; cfg.horizon];
    let mut first_cost = None;
    let mut best: Option<ControlDecision<T>> = None;
    for i in 0..max_iters {
        let ops = build_prediction_operators_tv(&pjms, cfg.horizon, cfg.control_horizon)?;
        let target = y_star - mul_vec(&ops.e, &measured.y_k);
        let du = solve(&ops, &measured, target, cfg)?;
        if let Some(prev) = &best {
            if du.norm() > lit::<T>(10.0) * prev.du_full.norm() {
                let mut out = best.take().expect("previous iterate");
                out.diverged_iteration = true;
                return Ok(out);
            }
        }
        let mut decision = decide(&ops, &measured, du, y_star, cfg)?;
        decision.iterations = i + 1;
        let first = *first_cost.get_or_insert(decision.cost);
        decision.cost_increase = decision.cost > first;
        if i + 1 < max_iters {
            pjms = trajectory_pjms(plant, hist, &ops, &measured, &decision.du_full)?;
        }
        best = Some(decision);
    }
    Ok(best.expect("at least one iteration"))
}

/// One-step baseline law: a single increment, one-step-ahead reference.
pub fn mfac_control<T: Real>(
    pjm: &Pjm<T>,
    hist: &HistoryWindow<T>,
    y_star_next: &DVector<T>,
    lambda: T,
) -> Result<ControlDecision<T>> {
    let dims = pjm.dims();
    check_len("reference", dims.outputs, y_star_next.len())?;
    let measured = Measured::from_history(hist, dims)?;
    let leading = pjm.leading_input();
    // remaining input blocks, shifted one place left
    let tail = pjm.phi_u() * &build_shift_operators::<T>(&dims, 1).a;
    let bracket = (y_star_next - &measured.y_k)
        - mul_vec(pjm.phi_y(), &measured.d_y)
        - mul_vec(&tail, &measured.d_u_prev);
    let weights = DVector::from_element(dims.inputs, lambda);
    let gain = ridge_gain(&leading, &weights, SingularPolicy::default())?;
    let du = mul_vec(&gain, &bracket);
    let u = &measured.u_prev + &du;
    let pred = &measured.y_k
        + mul_vec(pjm.phi_y(), &measured.d_y)
        + mul_vec(&tail, &measured.d_u_prev)
        + mul_vec(&leading, &du);
    let r = y_star_next - pred;
    let j = r.dot(&r) + lambda * du.dot(&du);
    Ok(ControlDecision {
        u,
        du_full: du,
        cost: j,
        iterations: 1,
        diverged_iteration: false,
        cost_increase: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::build_prediction_operators;
    use nalgebra::dvector;

    fn ex11_pjm() -> Pjm<f64> {
        let dims = Dims::new(2, 2, 1, 2).unwrap();
        Pjm::new(
            dims,
            DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, -1.0, 1.4]),
            DMatrix::from_row_slice(2, 4, &[1.3, 0.0, 0.7, 0.5, 1.0, 0.0, 0.6, 0.8]),
        )
        .unwrap()
    }

    fn sample_history() -> HistoryWindow<f64> {
        let ys = [dvector![0.0, 0.0], dvector![1.0, 1.0], dvector![0.0, 0.0], dvector![0.4, -0.2]];
        let us = [dvector![0.0, 0.0], dvector![0.3, 0.1], dvector![-0.2, 0.5]];
        HistoryWindow::seeded(2, 2, &ys, &us).unwrap()
    }

    fn cfg(n: usize, nu: usize, lambda: f64) -> ControllerConfig<f64> {
        ControllerConfig::new(Dims::new(2, 2, 1, 2).unwrap(), n, nu, Lambda::Scalar(lambda)).unwrap()
    }

    fn preview(n: usize) -> DVector<f64> {
        DVector::from_fn(2 * n, |i, _| if i % 2 == 0 { 3.0 } else { -1.0 })
    }

    fn fd_gradient(ops: &PredictionOperators<f64>, m: &Measured<f64>, du: &DVector<f64>, ys: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(du.len(), |i, _| {
            let h = 1e-4 * (1.0 + du[i].abs());
            let mut p = du.clone();
            p[i] += h;
            let mut q = du.clone();
            q[i] -= h;
            (cost(ops, m, &p, ys, w).unwrap() - cost(ops, m, &q, ys, w).unwrap()) / (2.0 * h)
        })
    }

    #[test]
    fn solution_is_stationary() {
        let c = cfg(2, 2, 1e-4);
        let ops = build_prediction_operators(&ex11_pjm(), 2, 2).unwrap();
        let hist = sample_history();
        let ys = preview(2);
        let d = mfapc_control(&ops, &hist, &ys, &c).unwrap();
        let m = Measured::from_history(&hist, c.dims).unwrap();
        let w = c.weights().unwrap();
        let g = fd_gradient(&ops, &m, &d.du_full, &ys, &w);
        let g0 = fd_gradient(&ops, &m, &DVector::zeros(4), &ys, &w);
        assert!(g.amax() <= 1e-6 * (1.0 + g0.norm()), "gradient {g}");
    }

    #[test]
    fn applies_first_block_only() {
        let c = cfg(3, 2, 0.5);
        let ops = build_prediction_operators(&ex11_pjm(), 3, 2).unwrap();
        let hist = sample_history();
        let d = mfapc_control(&ops, &hist, &preview(3), &c).unwrap();
        let u_prev = hist.u_at(hist.k() - 1).unwrap();
        assert_eq!(d.u, &u_prev + d.du_full.rows(0, 2));
    }

    #[test]
    fn at_target_with_no_motion_holds_input() {
        let c = cfg(2, 2, 0.1);
        let ops = build_prediction_operators(&ex11_pjm(), 2, 2).unwrap();
        let ys = vec![dvector![0.5, 0.5]; 4];
        let us = vec![dvector![0.2, 0.3]; 3];
        let hist = HistoryWindow::seeded(2, 2, &ys, &us).unwrap();
        let d = mfapc_control(&ops, &hist, &dvector![0.5, 0.5, 0.5, 0.5], &c).unwrap();
        assert_eq!(d.du_full, DVector::zeros(4));
        assert_eq!(d.u, dvector![0.2, 0.3]);
        assert_eq!(d.cost, 0.0);
    }

    #[test]
    fn zero_gain_system_gives_zero_increment() {
        let dims = Dims::new(2, 3, 1, 2).unwrap();
        let mut phi_u = DMatrix::zeros(2, 6);
        phi_u.view_mut((0, 3), (2, 3)).copy_from(&DMatrix::from_row_slice(2, 3, &[0.7, 0.2, 0.4, 0.6, 0.8, 0.4]));
        let pjm = Pjm::new(dims, DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, -1.0, 1.0]), phi_u).unwrap();
        let c = ControllerConfig::new(dims, 1, 1, Lambda::Scalar(0.01)).unwrap();
        let ops = build_prediction_operators(&pjm, 1, 1).unwrap();
        let hist = HistoryWindow::seeded(2, 3, &[dvector![0.0, 0.0], dvector![1.0, 1.0]], &[]).unwrap();
        let d = mfapc_control(&ops, &hist, &dvector![3.0, 3.0], &c).unwrap();
        assert_eq!(d.du_full, DVector::zeros(3));
    }

    #[test]
    fn lambda_shrinks_increments() {
        let ops = build_prediction_operators(&ex11_pjm(), 2, 2).unwrap();
        let hist = sample_history();
        let ys = preview(2);
        let norm = |l: f64| mfapc_control(&ops, &hist, &ys, &cfg(2, 2, l)).unwrap().du_full.norm();
        let grid = [0.0, 1e-6, 1e-3, 0.1, 1.0, 10.0, 1e3];
        for w in grid.windows(2) {
            assert!(norm(w[1]) <= norm(w[0]) * (1.0 + 1e-12));
        }
        assert!(norm(1e9) <= 1e-6 * norm(1.0));
    }

    #[test]
    fn one_step_law_matches_baseline_bitwise() {
        let pjm = ex11_pjm();
        let hist = sample_history();
        let c = cfg(1, 1, 1e-3);
        let ops = build_prediction_operators(&pjm, 1, 1).unwrap();
        let ys = dvector![3.0, -1.0];
        let a = mfapc_control(&ops, &hist, &ys, &c).unwrap();
        let b = mfac_control(&pjm, &hist, &ys, 1e-3).unwrap();
        assert_eq!(a.u, b.u);
        assert_eq!(a.du_full, b.du_full);
    }

    #[test]
    fn baseline_deadbeat_with_invertible_gain() {
        let dims = Dims::new(2, 2, 0, 1).unwrap();
        let phi_u = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.5, 3.0]);
        let pjm = Pjm::new(dims, DMatrix::zeros(2, 0), phi_u).unwrap();
        let hist = sample_history();
        let target = dvector![1.0, -2.0];
        let d = mfac_control(&pjm, &hist, &target, 0.0).unwrap();
        let y_next = hist.y_at(hist.k()).unwrap() + pjm.phi_u() * &d.du_full;
        assert!((y_next - target).amax() < 1e-12);
    }

    #[test]
    fn pi_with_unit_integral_gain_is_standard_law() {
        let ops = build_prediction_operators(&ex11_pjm(), 2, 2).unwrap();
        let hist = sample_history();
        let ys = preview(2);
        let base = cfg(2, 2, 1e-2);
        let pi = base
            .clone()
            .with_variant(Variant::Pi {
                kp: DMatrix::zeros(2, 2),
                ki: DMatrix::identity(2, 2),
            })
            .unwrap();
        let a = mfapc_control(&ops, &hist, &ys, &base).unwrap();
        let b = mfapc_control_pi(&ops, &hist, &ys, &preview(2), &pi).unwrap();
        assert_eq!(a.du_full, b.du_full);
    }

    #[test]
    fn pi_gain_shapes() {
        let c = cfg(3, 1, 1.0);
        assert_eq!(c.tracking_gain(&DMatrix::identity(2, 2)).unwrap(), DMatrix::identity(6, 6));
        assert_eq!(c.tracking_gain(&DMatrix::identity(6, 6)).unwrap(), DMatrix::identity(6, 6));
        assert!(c.tracking_gain(&DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn invalid_configs_rejected() {
        let d = Dims::new(2, 2, 1, 2).unwrap();
        assert!(ControllerConfig::new(d, 2, 3, Lambda::Scalar(1.0)).is_err());
        assert!(ControllerConfig::new(d, 2, 2, Lambda::Scalar(-1.0)).is_err());
        assert!(ControllerConfig::new(d, 2, 2, Lambda::Diagonal(dvector![1.0, 1.0])).is_err());
        assert!(cfg(2, 2, 1.0).with_variant(Variant::Iterative { max_iters: 0 }).is_err());
    }

    #[test]
    fn singular_policy_error_reports_condition() {
        // the second input never reaches the outputs
        let dims = Dims::new(2, 2, 0, 1).unwrap();
        let pjm = Pjm::new(dims, DMatrix::zeros(2, 0), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0])).unwrap();
        let ops = build_prediction_operators(&pjm, 1, 1).unwrap();
        let c = ControllerConfig::new(dims, 1, 1, Lambda::Scalar(0.0))
            .unwrap()
            .with_singular_policy(SingularPolicy::Error);
        let hist = sample_history();
        assert!(matches!(
            mfapc_control(&ops, &hist, &dvector![1.0, 1.0], &c),
            Err(Error::Singular { .. })
        ));
        let c = c.with_singular_policy(SingularPolicy::MinimumNorm);
        let d = mfapc_control(&ops, &hist, &dvector![1.0, 1.0], &c).unwrap();
        assert_eq!(d.du_full[1], 0.0);
    }
}
