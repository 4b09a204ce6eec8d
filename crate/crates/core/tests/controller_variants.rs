mod common;

use common::*;
use mfapc::controller::{mfapc_control, mfapc_control_iterative, ControllerConfig, Lambda, Variant};
use mfapc::edlm::analytic_pjm;
use mfapc::harness::{parse_config, run_experiment, SimTrace};
use mfapc::plants::{PlantDef, Preview, ReferenceDef};
use mfapc::predictor::build_prediction_operators;

fn iterative(max_iters: usize, lambda: f64) -> ControllerConfig<f64> {
    ControllerConfig::new(dims(2, 2, 1, 2), 2, 2, Lambda::Scalar(lambda))
        .unwrap()
        .with_variant(Variant::Iterative { max_iters })
        .unwrap()
}

#[test]
fn single_iteration_on_linear_plant_is_standard_law() {
    let (plant, hist) = benchmark_start(PlantDef::ex11());
    let y_star = ReferenceDef::square_pm3(2).preview(3, 2, Preview::Full);
    let ops = build_prediction_operators(&analytic_pjm(&plant, &hist, dims(2, 2, 1, 2)).unwrap(), 2, 2).unwrap();
    let standard = mfapc_control(&ops, &hist, &y_star, &ex11_controller(1e-4)).unwrap();
    let once = mfapc_control_iterative(&plant, &hist, &y_star, &iterative(1, 1e-4)).unwrap();
    assert_eq!(once.u, standard.u);
    assert_eq!(once.du_full, standard.du_full);
}

#[test]
fn linear_plant_is_a_fixed_point_of_the_iteration() {
    let (plant, hist) = benchmark_start(PlantDef::ex11());
    let y_star = ReferenceDef::square_pm3(2).preview(3, 2, Preview::Full);
    let once = mfapc_control_iterative(&plant, &hist, &y_star, &iterative(1, 1e-4)).unwrap();
    for n in 2..6 {
        let many = mfapc_control_iterative(&plant, &hist, &y_star, &iterative(n, 1e-4)).unwrap();
        assert_eq!(many.du_full, once.du_full);
        assert!(!many.cost_increase && !many.diverged_iteration);
    }
}

#[test]
fn nonlinear_iteration_lowers_cost_or_flags() {
    let (mut plant, mut hist) = benchmark_start(PlantDef::ex2());
    let reference = ReferenceDef::<f64>::MixedEx2;
    for k in 3..7 {
        let y_star = reference.preview(k, 2, Preview::Full);
        let one = mfapc_control_iterative(&plant, &hist, &y_star, &iterative(1, 1.0)).unwrap();
        let three = mfapc_control_iterative(&plant, &hist, &y_star, &iterative(3, 1.0)).unwrap();
        assert!(three.cost <= one.cost || three.cost_increase || three.diverged_iteration, "k = {k}");
        let y = plant.step(&one.u).unwrap();
        hist.push_u(one.u).unwrap();
        hist.push_y(y).unwrap();
    }
}

fn pi_run(kp: &str, ki: &str, lambda: f64, plant_extra: &str, run_extra: &str) -> SimTrace {
    let text = format!(
        "[plant]\nkind = linear_ex11\ninitial_outputs = 0, 0; 1, 1; 0, 0\n{plant_extra}\n\
         [controller]\nlaw = mfapc\nlambda = {lambda}\nvariant = pi\nkp = {kp}\nki = {ki}\n\
         [run]\nsteps = 120\n{run_extra}\n"
    );
    run_experiment(&parse_config(&text).unwrap()).unwrap()
}

#[test]
fn integral_action_removes_disturbance_offset() {
    let dist = "disturbance = 5, 10";
    let without = pi_run("1, 0; 0, 1", "0, 0; 0, 0", 1e-4, dist, "");
    let with = pi_run("0, 0; 0, 0", "1, 0; 0, 1", 1e-4, dist, "");
    let last_err = |t: &SimTrace| {
        let r = t.rows.iter().rev().find(|r| r.k == 75).unwrap();
        r.e.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    };
    assert!(without.diverged_at.is_none() && with.diverged_at.is_none());
    assert!(last_err(&without) > 1e-2, "static error {}", last_err(&without));
    assert!(last_err(&with) < 1e-3);
}

#[test]
fn stronger_integral_gain_reacts_faster() {
    // a well-damped loop; the unit step arrives at the first control step k = 3
    let unit = pi_run("0, 0; 0, 0", "1, 0; 0, 1", 100.0, "", "reference = step");
    let double = pi_run("0, 0; 0, 0", "2, 0; 0, 2", 100.0, "", "reference = step");
    let err = |t: &SimTrace| t.row(6).unwrap().e.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(err(&double) < err(&unit), "{} vs {}", err(&double), err(&unit));
}
