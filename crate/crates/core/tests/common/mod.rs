#![allow(dead_code)]

use mfapc::controller::{mfapc_control, ControllerConfig, Lambda};
use mfapc::edlm::{analytic_pjm, Dims, HistoryWindow, Pjm};
use mfapc::plants::{benchmark_initial_inputs, benchmark_initial_outputs, PlantDef};
use mfapc::predictor::build_prediction_operators;
use nalgebra::{DMatrix, DVector};

pub fn dims(my: usize, mu: usize, ly: usize, lu: usize) -> Dims {
    Dims::new(my, mu, ly, lu).unwrap()
}

pub fn pjm_from(d: Dims, vals: &[f64]) -> Pjm<f64> {
    Pjm::from_stacked(d, &DMatrix::from_row_slice(d.outputs, d.width(), &vals[..d.outputs * d.width()])).unwrap()
}

/// History with `y(1..=len)` and `u(1..len)` taken from flat sample lists.
pub fn history(my: usize, mu: usize, len: usize, ys: &[f64], us: &[f64]) -> HistoryWindow<f64> {
    let y: Vec<DVector<f64>> = (0..len).map(|t| DVector::from_column_slice(&ys[t * my..(t + 1) * my])).collect();
    let u: Vec<DVector<f64>> = (0..len - 1)
        .map(|t| DVector::from_column_slice(&us[t * mu..(t + 1) * mu]))
        .collect();
    HistoryWindow::seeded(my, mu, &y, &u).unwrap()
}

pub fn max_abs(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// Plant positioned at the benchmark start-up, with the matching history.
pub fn benchmark_start(mut plant: PlantDef<f64>) -> (PlantDef<f64>, HistoryWindow<f64>) {
    let ys = benchmark_initial_outputs::<f64>(plant.outputs());
    let us = benchmark_initial_inputs::<f64>(plant.inputs());
    plant.reset_state(&ys, &us).unwrap();
    let hist = HistoryWindow::seeded(plant.outputs(), plant.inputs(), &ys, &us).unwrap();
    (plant, hist)
}

pub fn ex11_pjm() -> Pjm<f64> {
    let (plant, hist) = benchmark_start(PlantDef::ex11());
    analytic_pjm(&plant, &hist, dims(2, 2, 1, 2)).unwrap()
}

pub fn ex11_controller(lambda: f64) -> ControllerConfig<f64> {
    ControllerConfig::new(dims(2, 2, 1, 2), 2, 2, Lambda::Scalar(lambda)).unwrap()
}

/// Closed loop of the Example 1.1 plant under a frozen-PJM controller tracking
/// a constant reference; returns the error at every step.
pub fn ex11_step_run(ctrl: &ControllerConfig<f64>, target: &DVector<f64>, steps: usize) -> Vec<DVector<f64>> {
    let pjm = ex11_pjm();
    let ops = build_prediction_operators(&pjm, ctrl.horizon, ctrl.control_horizon).unwrap();
    let (mut plant, mut hist) = benchmark_start(PlantDef::ex11());
    let preview = DVector::from_iterator(
        ctrl.horizon * 2,
        (0..ctrl.horizon).flat_map(|_| target.iter().copied()),
    );
    let mut errors = Vec::with_capacity(steps);
    for _ in 0..steps {
        let d = mfapc_control(&ops, &hist, &preview, ctrl).unwrap();
        let y = plant.step(&d.u).unwrap();
        hist.push_u(d.u).unwrap();
        errors.push(target - &y);
        hist.push_y(y).unwrap();
        if errors.last().unwrap().amax() > 1e8 || !errors.last().unwrap().iter().all(|x| x.is_finite()) {
            break;
        }
    }
    errors
}
