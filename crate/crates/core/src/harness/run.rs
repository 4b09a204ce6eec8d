//! Closed-loop experiment runner.

use nalgebra::DVector;

use super::config::{EstimatorSettings, ExperimentConfig, Law, PjmSource};
use super::trace::{SimTrace, TraceRow};
use super::HarnessError;
use crate::analysis::closed_loop_t;
use crate::controller::{
    mfac_control, mfapc_control, mfapc_control_iterative, mfapc_control_pi, ControlDecision, ControllerConfig,
    Lambda, Variant,
};
use crate::edlm::{analytic_pjm_at, Dims, HistoryWindow, Pjm};
use crate::estimator::{maybe_reset, projection_update, EstimatorState};
use crate::plants::PlantDef;
use crate::predictor::build_prediction_operators;

/// Magnitude beyond which a trajectory counts as divergent.
pub const DIVERGENCE_BOUND: f64 = 1e8;

enum Source {
    Analytic,
    Estimated(EstimatorState<f64>, EstimatorSettings),
    Fixed(Pjm<f64>),
}

fn runtime(step: i64) -> impl Fn(crate::Error) -> HarnessError {
    move |source| HarnessError::Runtime { step, source }
}

fn estimator_state(cfg: &ExperimentConfig, s: &EstimatorSettings) -> Result<EstimatorState<f64>, HarnessError> {
    let initial = Pjm::from_stacked(cfg.dims(), &s.initial).map_err(|e| HarnessError::Config(e.to_string()))?;
    EstimatorState::new(initial, s.eta, s.mu)
        .map(|st| st.with_mode(s.mode))
        .map_err(|e| HarnessError::Config(e.to_string()))
}

fn resolve_source(cfg: &ExperimentConfig) -> Result<Source, HarnessError> {
    match &cfg.pjm_source {
        PjmSource::Analytic => Ok(Source::Analytic),
        PjmSource::Estimated(s) => Ok(Source::Estimated(estimator_state(cfg, s)?, s.clone())),
        PjmSource::Frozen(m) => Ok(Source::Fixed(
            Pjm::from_stacked(cfg.dims(), m).map_err(|e| HarnessError::Config(e.to_string()))?,
        )),
        PjmSource::FrozenFromEstimate { settings, at } => {
            let mut pre = cfg.clone();
            pre.pjm_source = PjmSource::Estimated(settings.clone());
            pre.steps = (*at).max(1) as usize;
            pre.analysis = false;
            let (trace, last) = simulate(&pre)?;
            if let Some(step) = trace.diverged_at {
                return Err(HarnessError::Divergence { step });
            }
            let pjm = last.ok_or_else(|| HarnessError::Config("estimate never formed".into()))?;
            Ok(Source::Fixed(pjm))
        }
    }
}

/// Runs the configured closed loop for `steps` rows.
///
/// Each control step `k` first updates the estimate with the data through
/// `y(k)` (estimate-then-control), then computes `u(k)` and advances the plant
/// to `y(k+1)`. Rows before the first control step replay the initial
/// samples.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SimTrace, HarnessError> {
    simulate(cfg).map(|(trace, _)| trace)
}

/// Like [`run_experiment`], also returning the last PJM used by the controller.
pub fn simulate(cfg: &ExperimentConfig) -> Result<(SimTrace, Option<Pjm<f64>>), HarnessError> {
    let dims = cfg.dims();
    let ctrl = cfg.effective_controller()?;
    let mut plant = cfg.build_plant()?;
    let mut source = resolve_source(cfg)?;
    let k0 = cfg.first_control_step();
    let ys = &cfg.plant.initial_outputs;
    let us = &cfg.plant.initial_inputs;
    let mut hist = HistoryWindow::seeded(dims.outputs, dims.inputs, ys, &us[..us.len().min(k0 as usize - 1)])
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut trace = SimTrace::new(dims.outputs, dims.inputs, dims.outputs * dims.width());
    let mut last_pjm = None;
    let steps = cfg.steps as i64;

    for k in 1..=steps.min(k0 - 1) {
        let y = hist.y_at(k).map_err(runtime(k))?;
        let u = us.get(k as usize - 1).cloned().unwrap_or_else(|| DVector::zeros(dims.inputs));
        let pjm = current_pjm(&source, &plant, &hist, k, dims).map_err(runtime(k))?;
        trace.push(row(cfg, k, &y, &u, None, &pjm, None));
    }

    for k in k0..=steps {
        if let Source::Estimated(st, settings) = &mut source {
            if k > k0 {
                let dh = hist.delta_h(k - 1, dims.output_order, dims.input_order).map_err(runtime(k))?;
                let next = projection_update(st, &hist.y_at(k).map_err(runtime(k))?, &hist.y_at(k - 1).map_err(runtime(k))?, &dh)
                    .map_err(runtime(k))?;
                *st = maybe_reset(&next, settings.reset);
            }
        }
        let pjm = current_pjm(&source, &plant, &hist, k, dims).map_err(runtime(k))?;
        let decision = control_step(cfg, &ctrl, &plant, &hist, &pjm, k).map_err(runtime(k))?;
        let y_k = hist.y_at(k).map_err(runtime(k))?;
        let max_pole = if cfg.analysis { pole_radius(&pjm, &ctrl) } else { None };
        trace.push(row(cfg, k, &y_k, &decision.u, Some(decision.cost), &pjm, max_pole));
        last_pjm = Some(pjm);

        if !bounded(&decision.u) {
            trace.diverged_at = Some(k);
            break;
        }
        let y_next = plant.step(&decision.u).map_err(runtime(k))?;
        hist.push_u(decision.u).map_err(runtime(k))?;
        if !bounded(&y_next) {
            trace.diverged_at = Some(k + 1);
            break;
        }
        hist.push_y(y_next).map_err(runtime(k))?;
    }
    Ok((trace, last_pjm))
}

fn bounded(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite() && x.abs() <= DIVERGENCE_BOUND)
}

fn current_pjm(
    source: &Source,
    plant: &PlantDef<f64>,
    hist: &HistoryWindow<f64>,
    k: i64,
    dims: Dims,
) -> crate::Result<Pjm<f64>> {
    match source {
        Source::Analytic => analytic_pjm_at(plant, hist, k, dims),
        Source::Estimated(st, _) => Ok(st.phi_hat.clone()),
        Source::Fixed(p) => Ok(p.clone()),
    }
}

fn control_step(
    cfg: &ExperimentConfig,
    ctrl: &ControllerConfig<f64>,
    plant: &PlantDef<f64>,
    hist: &HistoryWindow<f64>,
    pjm: &Pjm<f64>,
    k: i64,
) -> crate::Result<ControlDecision<f64>> {
    let preview = cfg.reference.preview(k, ctrl.horizon, ctrl.preview);
    match cfg.law {
        Law::Mfac => {
            let Lambda::Scalar(l) = ctrl.lambda else { unreachable!("validated scalar") };
            mfac_control(pjm, hist, &preview, l)
        }
        Law::Mfapc => match &ctrl.variant {
            Variant::Standard => {
                let ops = build_prediction_operators(pjm, ctrl.horizon, ctrl.control_horizon)?;
                mfapc_control(&ops, hist, &preview, ctrl)
            }
            Variant::Pi { .. } => {
                let ops = build_prediction_operators(pjm, ctrl.horizon, ctrl.control_horizon)?;
                let prev = cfg.reference.preview(k - 1, ctrl.horizon, ctrl.preview);
                mfapc_control_pi(&ops, hist, &preview, &prev, ctrl)
            }
            Variant::Iterative { .. } => mfapc_control_iterative(plant, hist, &preview, ctrl),
        },
    }
}

fn pole_radius(pjm: &Pjm<f64>, ctrl: &ControllerConfig<f64>) -> Option<f64> {
    closed_loop_t(pjm, ctrl).and_then(|cl| cl.poles()).ok().map(|r| r.max_modulus)
}

fn row(
    cfg: &ExperimentConfig,
    k: i64,
    y: &DVector<f64>,
    u: &DVector<f64>,
    cost: Option<f64>,
    pjm: &Pjm<f64>,
    max_pole: Option<f64>,
) -> TraceRow {
    let y_star = cfg.reference.value(k);
    TraceRow {
        k,
        e: (&y_star - y).as_slice().to_vec(),
        y: y.as_slice().to_vec(),
        u: u.as_slice().to_vec(),
        y_star: y_star.as_slice().to_vec(),
        cost,
        phi: pjm.flatten(),
        max_pole,
    }
}

/// Frozen PJM an analysis of this configuration uses: the analytic PJM at the
/// first control step, the initial or fixed estimate otherwise.
pub fn analysis_pjm(cfg: &ExperimentConfig) -> Result<Pjm<f64>, HarnessError> {
    let plant = cfg.build_plant()?;
    let source = resolve_source(cfg)?;
    let dims = cfg.dims();
    let k0 = cfg.first_control_step();
    let us = &cfg.plant.initial_inputs;
    let hist = HistoryWindow::seeded(
        dims.outputs,
        dims.inputs,
        &cfg.plant.initial_outputs,
        &us[..us.len().min(k0 as usize - 1)],
    )
    .map_err(|e| HarnessError::Config(e.to_string()))?;
    current_pjm(&source, &plant, &hist, k0, dims).map_err(runtime(k0))
}
