//! Benchmark plants and reference trajectories.

use std::collections::VecDeque;

use nalgebra::{dvector, DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::edlm::{DelayMatrix, JacobianSource};
use crate::error::{check_len, Error, Result};
use crate::scalar::{lit, Real};

/// Which benchmark a plant reproduces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlantKind {
    /// 2x2 linear plant with unequal input delays.
    LinearEx11,
    /// 2-output, 3-input linear plant with a uniform two-step delay.
    LinearEx12,
    /// 2x2 nonlinear plant.
    NonlinearEx2,
    /// Linear plant from user-supplied coefficients.
    UserLinear,
}

impl PlantKind {
    pub fn name(&self) -> &'static str {
        match self {
            PlantKind::LinearEx11 => "linear_ex11",
            PlantKind::LinearEx12 => "linear_ex12",
            PlantKind::NonlinearEx2 => "nonlinear_ex2",
            PlantKind::UserLinear => "user_linear",
        }
    }
}

/// `y(k+1) = sum_i Ay[i] y(k-i) + sum_j Bu[j] u(k-j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel<T: Real> {
    pub output_coeffs: Vec<DMatrix<T>>,
    pub input_coeffs: Vec<DMatrix<T>>,
}

#[derive(Clone, Debug, PartialEq)]
enum Model<T: Real> {
    Linear(LinearModel<T>),
    NonlinearEx2,
}

/// Constant additive disturbance on `y(k+1)` from time `start` on.
#[derive(Clone, Debug, PartialEq)]
pub struct Disturbance<T: Real> {
    pub w: DVector<T>,
    pub start: i64,
}

/// A stateful plant simulator.
#[derive(Clone, Debug)]
pub struct PlantDef<T: Real> {
    kind: PlantKind,
    model: Model<T>,
    outputs: usize,
    inputs: usize,
    // newest first: y(k), y(k-1), ...
    ys: VecDeque<DVector<T>>,
    // newest first: u(k-1), u(k-2), ...
    us: VecDeque<DVector<T>>,
    k: i64,
    disturbance: Option<Disturbance<T>>,
    delays: Option<DelayMatrix>,
}

fn mat<T: Real>(rows: usize, cols: usize, vals: &[f64]) -> DMatrix<T> {
    DMatrix::from_row_slice(rows, cols, &vals.iter().map(|&v| lit(v)).collect::<Vec<T>>())
}

impl<T: Real> PlantDef<T> {
    fn from_model(kind: PlantKind, model: Model<T>, outputs: usize, inputs: usize) -> Self {
        let mut p = PlantDef {
            kind,
            model,
            outputs,
            inputs,
            ys: VecDeque::new(),
            us: VecDeque::new(),
            k: 1,
            disturbance: None,
            delays: None,
        };
        p.reset_state(&[DVector::zeros(outputs)], &[]).expect("zero state");
        p
    }

    /// `y(k+1) = [[-1, 2], [-1, 1.4]] y(k) + [[1.3, 0], [1, 0]] u(k) + [[0.7, 0.5], [0.6, 0.8]] u(k-1)`.
    pub fn ex11() -> Self {
        let model = LinearModel {
            output_coeffs: vec![mat(2, 2, &[-1.0, 2.0, -1.0, 1.4])],
            input_coeffs: vec![mat(2, 2, &[1.3, 0.0, 1.0, 0.0]), mat(2, 2, &[0.7, 0.5, 0.6, 0.8])],
        };
        let mut p = PlantDef::from_model(PlantKind::LinearEx11, Model::Linear(model), 2, 2);
        p.delays = Some(DelayMatrix::new(vec![vec![1, 2], vec![1, 2]]).expect("static delays"));
        p
    }

    /// The two-step-delay plant: the coefficient on `u(k)` is identically zero.
    pub fn ex12() -> Self {
        let model = LinearModel {
            output_coeffs: vec![mat(2, 2, &[-1.0, 1.0, -1.0, 1.0])],
            input_coeffs: vec![DMatrix::zeros(2, 3), mat(2, 3, &[0.7, 0.2, 0.4, 0.6, 0.8, 0.4])],
        };
        let mut p = PlantDef::from_model(PlantKind::LinearEx12, Model::Linear(model), 2, 3);
        p.delays = Some(DelayMatrix::new(vec![vec![2, 2, 2], vec![2, 2, 2]]).expect("static delays"));
        p
    }

    pub fn ex2() -> Self {
        PlantDef::from_model(PlantKind::NonlinearEx2, Model::NonlinearEx2, 2, 2)
    }

    pub fn user_linear(output_coeffs: Vec<DMatrix<T>>, input_coeffs: Vec<DMatrix<T>>) -> Result<Self> {
        let first = input_coeffs
            .first()
            .ok_or_else(|| Error::Config("linear plant needs at least one input coefficient".into()))?;
        let (outputs, inputs) = first.shape();
        if outputs == 0 || inputs == 0 {
            return Err(Error::Config("linear plant coefficients must be non-empty".into()));
        }
        for a in &output_coeffs {
            if a.shape() != (outputs, outputs) {
                return Err(Error::Config("output coefficients must be square with one row per output".into()));
            }
        }
        for b in &input_coeffs {
            if b.shape() != (outputs, inputs) {
                return Err(Error::Config("input coefficients must share one shape".into()));
            }
        }
        let model = LinearModel {
            output_coeffs,
            input_coeffs,
        };
        Ok(PlantDef::from_model(PlantKind::UserLinear, Model::Linear(model), outputs, inputs))
    }

    /// Random linear plant scaled so the free output response is contractive.
    pub fn random_linear(outputs: usize, inputs: usize, output_lags: usize, input_lags: usize, seed: u64) -> Result<Self> {
        if input_lags == 0 {
            return Err(Error::Config("random plant needs at least one input lag".into()));
        }
        let mut rng = StdRng::seed_from_u64(seed);
        let mut draw = |r: usize, c: usize, scale: f64| -> DMatrix<T> {
            DMatrix::from_fn(r, c, |_, _| lit(scale * rng.gen_range(-1.0..1.0)))
        };
        // sum of row-sum norms < 1 keeps the autonomous part stable
        let out_scale = if output_lags > 0 { 0.8 / (output_lags * outputs) as f64 } else { 0.0 };
        let ay = (0..output_lags).map(|_| draw(outputs, outputs, out_scale)).collect();
        let bu = (0..input_lags).map(|_| draw(outputs, inputs, 1.0)).collect();
        PlantDef::user_linear(ay, bu)
    }

    pub fn kind(&self) -> PlantKind {
        self.kind
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn delays(&self) -> Option<&DelayMatrix> {
        self.delays.as_ref()
    }

    /// Time index of the current output.
    pub fn time(&self) -> i64 {
        self.k
    }

    /// Current output `y(k)`.
    pub fn output(&self) -> &DVector<T> {
        &self.ys[0]
    }

    pub fn linear_model(&self) -> Option<&LinearModel<T>> {
        match &self.model {
            Model::Linear(m) => Some(m),
            Model::NonlinearEx2 => None,
        }
    }

    pub fn with_disturbance(mut self, w: DVector<T>, start: i64) -> Result<Self> {
        check_len("disturbance", self.outputs, w.len())?;
        self.disturbance = Some(Disturbance { w, start });
        Ok(self)
    }

    pub fn disturbance(&self) -> Option<&Disturbance<T>> {
        self.disturbance.as_ref()
    }

    /// Sets the recursion state from `y(1..=n)` and `u(1..=m)`, so the next
    /// step produces `y(n+1)` from `u(n)`. Samples before time 1 are padded with
    /// `y(1)` and zero inputs.
    pub fn reset_state(&mut self, ys: &[DVector<T>], us: &[DVector<T>]) -> Result<()> {
        let first = ys
            .first()
            .ok_or_else(|| Error::Config("plant needs at least one initial output".into()))?;
        for y in ys {
            check_len("initial output", self.outputs, y.len())?;
        }
        for u in us {
            check_len("initial input", self.inputs, u.len())?;
        }
        let n = ys.len();
        self.ys = (0..self.output_lags())
            .map(|i| ys.get(n.wrapping_sub(1 + i)).unwrap_or(first).clone())
            .collect();
        // inputs u(n-1), u(n-2), ...; anything not supplied is zero
        self.us = (1..self.input_lags())
            .map(|j| {
                let t = n as i64 - j as i64; // 1-based time
                if t >= 1 && (t as usize) <= us.len() {
                    us[t as usize - 1].clone()
                } else {
                    DVector::zeros(self.inputs)
                }
            })
            .collect();
        self.k = n as i64;
        Ok(())
    }

    /// The one-step map without disturbance, at `ys = [y(k), ..]`, `us = [u(k), ..]`.
    pub fn eval(&self, ys: &[DVector<T>], us: &[DVector<T>]) -> DVector<T> {
        match &self.model {
            Model::Linear(m) => {
                let mut y = DVector::zeros(self.outputs);
                for (a, yi) in m.output_coeffs.iter().zip(ys) {
                    y += a * yi;
                }
                for (b, ui) in m.input_coeffs.iter().zip(us) {
                    y += b * ui;
                }
                y
            }
            Model::NonlinearEx2 => ex2_map(&ys[0], &us[0], &us[1]),
        }
    }

    /// Advances the plant by one step under `u(k)` and returns `y(k+1)`.
    pub fn step(&mut self, u: &DVector<T>) -> Result<DVector<T>> {
        check_len("plant input", self.inputs, u.len())?;
        let ys: Vec<DVector<T>> = self.ys.iter().cloned().collect();
        let mut us = Vec::with_capacity(self.input_lags());
        us.push(u.clone());
        us.extend(self.us.iter().cloned());
        let mut next = self.eval(&ys, &us);
        if let Some(d) = &self.disturbance {
            if self.k + 1 >= d.start {
                next += &d.w;
            }
        }
        self.ys.push_front(next.clone());
        self.ys.truncate(self.output_lags());
        if self.input_lags() > 1 {
            self.us.push_front(u.clone());
            self.us.truncate(self.input_lags() - 1);
        }
        self.k += 1;
        Ok(next)
    }
}

/// Free-function form of [`PlantDef::step`].
pub fn plant_step<T: Real>(plant: &mut PlantDef<T>, u: &DVector<T>) -> Result<DVector<T>> {
    plant.step(u)
}

fn ex2_map<T: Real>(y: &DVector<T>, u: &DVector<T>, u_prev: &DVector<T>) -> DVector<T> {
    let c = lit::<T>;
    let (y1, y2) = (y[0], y[1]);
    let (u1, u2) = (u[0], u[1]);
    let (p1, p2) = (u_prev[0], u_prev[1]);
    let f1 = -c(0.1) * y1 * y1 * y1 + c(0.1) * y2 * y2 + c(0.7) * p1 + c(0.5) * p2
        + c(0.2) * u1 * u1 * u1
        + (u1 * u1).cos()
        + c(0.1) * u2 * u2 * u2
        + c(0.5) * (u2 * u2).sin();
    let f2 = -c(0.1) * y1 * y1 + c(0.2) * y2 * y2 * y2 + c(0.6) * p1 + c(0.8) * p2
        + c(0.1) * u1 * u1 * u1 * u1
        + c(0.2) * u1.sin()
        + c(0.1) * u2 * u2
        + c(0.9) * u2;
    dvector![f1, f2]
}

fn ex2_jacobian<T: Real>(y: &DVector<T>, u: &DVector<T>) -> (Vec<DMatrix<T>>, Vec<DMatrix<T>>) {
    let c = lit::<T>;
    let (y1, y2) = (y[0], y[1]);
    let (u1, u2) = (u[0], u[1]);
    let d_y = DMatrix::from_row_slice(
        2,
        2,
        &[-c(0.3) * y1 * y1, c(0.2) * y2, -c(0.2) * y1, c(0.6) * y2 * y2],
    );
    let d_u = DMatrix::from_row_slice(
        2,
        2,
        &[
            c(0.6) * u1 * u1 - c(2.0) * u1 * (u1 * u1).sin(),
            c(0.3) * u2 * u2 + u2 * (u2 * u2).cos(),
            c(0.4) * u1 * u1 * u1 + c(0.2) * u1.cos(),
            c(0.2) * u2 + c(0.9),
        ],
    );
    let d_u_prev = mat(2, 2, &[0.7, 0.5, 0.6, 0.8]);
    (vec![d_y], vec![d_u, d_u_prev])
}

impl<T: Real> JacobianSource<T> for PlantDef<T> {
    fn plant_name(&self) -> String {
        self.kind.name().to_string()
    }

    fn output_lags(&self) -> usize {
        match &self.model {
            Model::Linear(m) => m.output_coeffs.len().max(1),
            Model::NonlinearEx2 => 1,
        }
    }

    fn input_lags(&self) -> usize {
        match &self.model {
            Model::Linear(m) => m.input_coeffs.len(),
            Model::NonlinearEx2 => 2,
        }
    }

    fn jacobian(&self, ys: &[DVector<T>], us: &[DVector<T>]) -> Option<(Vec<DMatrix<T>>, Vec<DMatrix<T>>)> {
        match &self.model {
            Model::Linear(m) => Some((m.output_coeffs.clone(), m.input_coeffs.clone())),
            Model::NonlinearEx2 => Some(ex2_jacobian(&ys[0], &us[0])),
        }
    }
}

/// How the controller previews the reference over the prediction horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Preview {
    /// `y*(k+1), ..., y*(k+N)` from the generator.
    #[default]
    Full,
    /// `y*(k+i) := y*(k+1)` for every `i`.
    Hold,
}

/// Reference trajectory generator.
#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceDef<T: Real> {
    /// `y*(k+1) = amplitude * (-1)^round(k / half_period)` on every output.
    Square { outputs: usize, amplitude: T, half_period: f64 },
    /// Sinusoids on `1..=400`, a unit square wave afterwards (two outputs).
    MixedEx2,
    /// Tabulated values for `k = 1, 2, ...`; held beyond either end.
    Table(Vec<DVector<T>>),
    /// Constant set-point.
    Step(DVector<T>),
}

/// Rounds half away from zero.
fn round_half_away(x: f64) -> f64 {
    x.round()
}

fn alternating(k: f64, half_period: f64) -> f64 {
    if (round_half_away(k / half_period) as i64).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

impl<T: Real> ReferenceDef<T> {
    /// The +/-3 square wave switching every 50 steps.
    pub fn square_pm3(outputs: usize) -> Self {
        ReferenceDef::Square {
            outputs,
            amplitude: lit(3.0),
            half_period: 50.0,
        }
    }

    pub fn outputs(&self) -> usize {
        match self {
            ReferenceDef::Square { outputs, .. } => *outputs,
            ReferenceDef::MixedEx2 => 2,
            ReferenceDef::Table(rows) => rows.first().map(|r| r.len()).unwrap_or(0),
            ReferenceDef::Step(v) => v.len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReferenceDef::Square { .. } => "square",
            ReferenceDef::MixedEx2 => "mixed_ex2",
            ReferenceDef::Table(_) => "table",
            ReferenceDef::Step(_) => "step",
        }
    }

    /// `y*(k)`.
    pub fn value(&self, k: i64) -> DVector<T> {
        match self {
            ReferenceDef::Square {
                outputs,
                amplitude,
                half_period,
            } => {
                // the generator is written for y*(k+1) in terms of k
                let s = alternating((k - 1) as f64, *half_period);
                DVector::from_element(*outputs, *amplitude * lit(s))
            }
            ReferenceDef::MixedEx2 => {
                let kf = k as f64;
                if k <= 400 {
                    dvector![
                        lit(5.0 * (kf / 40.0).sin() + 2.0 * (kf / 20.0).cos()),
                        lit(2.0 * (kf / 10.0).sin() + 5.0 * (kf / 30.0).sin())
                    ]
                } else {
                    let s = lit(alternating(kf, 50.0));
                    dvector![s, s]
                }
            }
            ReferenceDef::Table(rows) => {
                let idx = (k.max(1) as usize - 1).min(rows.len() - 1);
                rows[idx].clone()
            }
            ReferenceDef::Step(v) => v.clone(),
        }
    }

    /// Stacked `Y*_N(k+1)`.
    pub fn preview(&self, k: i64, horizon: usize, mode: Preview) -> DVector<T> {
        let m = self.outputs();
        let mut out = DVector::zeros(horizon * m);
        for i in 0..horizon {
            let t = match mode {
                Preview::Full => k + 1 + i as i64,
                Preview::Hold => k + 1,
            };
            out.rows_mut(i * m, m).copy_from(&self.value(t));
        }
        out
    }

    /// Start times of the constant-reference segments within `1..=last`.
    ///
    /// The sinusoidal part of the mixed trajectory counts as one segment.
    pub fn segment_starts(&self, last: i64) -> Vec<i64> {
        let mut starts = vec![1];
        for k in 2..=last {
            let boundary = match self {
                ReferenceDef::MixedEx2 if k <= 400 => false,
                ReferenceDef::MixedEx2 if k == 401 => true,
                _ => self.value(k) != self.value(k - 1),
            };
            if boundary {
                starts.push(k);
            }
        }
        starts
    }
}

/// Initial outputs `y(1) = y(3) = 0`, `y(2) = [1, .., 1]` used by every benchmark.
pub fn benchmark_initial_outputs<T: Real>(outputs: usize) -> Vec<DVector<T>> {
    vec![
        DVector::zeros(outputs),
        DVector::from_element(outputs, T::one()),
        DVector::zeros(outputs),
    ]
}

/// Initial inputs `u(1) = u(2) = 0`.
pub fn benchmark_initial_inputs<T: Real>(inputs: usize) -> Vec<DVector<T>> {
    vec![DVector::zeros(inputs), DVector::zeros(inputs)]
}
