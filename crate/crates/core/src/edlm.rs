//! Equivalent-dynamic-linearization data model.
//!
//! The plant is described locally by the incremental model
//! `y(k+1) = y(k) + phi(k) * dH(k)`, where `dH(k)` stacks the latest
//! `output_order` output increments and `input_order` input increments and
//! `phi(k)` is the pseudo-Jacobian matrix ([`Pjm`]).

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::linalg::{all_finite, mul_vec};
use crate::scalar::Real;

/// Dimensions shared by a pseudo-Jacobian, its history and its controller.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dims {
    /// Number of outputs.
    pub outputs: usize,
    /// Number of inputs.
    pub inputs: usize,
    /// Pseudo order on output increments (may be zero).
    pub output_order: usize,
    /// Pseudo order on input increments (at least one).
    pub input_order: usize,
}

impl Dims {
    pub fn new(outputs: usize, inputs: usize, output_order: usize, input_order: usize) -> Result<Self> {
        let dims = Dims {
            outputs,
            inputs,
            output_order,
            input_order,
        };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.outputs == 0 || self.inputs == 0 {
            return Err(Error::Config("outputs and inputs must be positive".into()));
        }
        if self.input_order == 0 {
            return Err(Error::Config("input pseudo order must be at least 1".into()));
        }
        Ok(())
    }

    /// Length of the stacked output increments.
    pub fn output_width(&self) -> usize {
        self.output_order * self.outputs
    }

    /// Length of the stacked input increments.
    pub fn input_width(&self) -> usize {
        self.input_order * self.inputs
    }

    /// Length of `dH(k)`.
    pub fn width(&self) -> usize {
        self.output_width() + self.input_width()
    }
}

/// Pseudo-Jacobian matrix `[Phi_1 .. Phi_Ly | Phi_Ly+1 .. Phi_Ly+Lu]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pjm<T: Real> {
    dims: Dims,
    phi_y: DMatrix<T>,
    phi_u: DMatrix<T>,
}

impl<T: Real> Pjm<T> {
    pub fn new(dims: Dims, phi_y: DMatrix<T>, phi_u: DMatrix<T>) -> Result<Self> {
        dims.validate()?;
        check_len("pjm output block rows", dims.outputs, phi_y.nrows())?;
        check_len("pjm output block cols", dims.output_width(), phi_y.ncols())?;
        check_len("pjm input block rows", dims.outputs, phi_u.nrows())?;
        check_len("pjm input block cols", dims.input_width(), phi_u.ncols())?;
        if !all_finite(&phi_y) || !all_finite(&phi_u) {
            return Err(Error::NonFinite("pseudo-Jacobian"));
        }
        Ok(Pjm { dims, phi_y, phi_u })
    }

    /// Builds from the full `outputs x width` row `[phi_y | phi_u]`.
    pub fn from_stacked(dims: Dims, stacked: &DMatrix<T>) -> Result<Self> {
        check_len("pjm stacked cols", dims.width(), stacked.ncols())?;
        check_len("pjm stacked rows", dims.outputs, stacked.nrows())?;
        let wy = dims.output_width();
        Pjm::new(
            dims,
            stacked.columns(0, wy).into_owned(),
            stacked.columns(wy, dims.input_width()).into_owned(),
        )
    }

    /// Builds from the individual blocks `Phi_1, ..., Phi_Ly+Lu`.
    pub fn from_blocks(dims: Dims, blocks: &[DMatrix<T>]) -> Result<Self> {
        check_len("pjm block count", dims.output_order + dims.input_order, blocks.len())?;
        let mut stacked = DMatrix::zeros(dims.outputs, dims.width());
        let mut col = 0;
        for (i, b) in blocks.iter().enumerate() {
            let w = if i < dims.output_order { dims.outputs } else { dims.inputs };
            check_len("pjm block rows", dims.outputs, b.nrows())?;
            check_len("pjm block cols", w, b.ncols())?;
            stacked.columns_mut(col, w).copy_from(b);
            col += w;
        }
        Pjm::from_stacked(dims, &stacked)
    }

    pub fn filled(dims: Dims, value: T) -> Result<Self> {
        Pjm::from_stacked(dims, &DMatrix::from_element(dims.outputs, dims.width(), value))
    }

    pub fn zeros(dims: Dims) -> Result<Self> {
        Pjm::filled(dims, T::zero())
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Output block row `[Phi_1 .. Phi_Ly]`.
    pub fn phi_y(&self) -> &DMatrix<T> {
        &self.phi_y
    }

    /// Input block row `[Phi_Ly+1 .. Phi_Ly+Lu]`.
    pub fn phi_u(&self) -> &DMatrix<T> {
        &self.phi_u
    }

    pub fn stacked(&self) -> DMatrix<T> {
        let mut s = DMatrix::zeros(self.dims.outputs, self.dims.width());
        s.columns_mut(0, self.dims.output_width()).copy_from(&self.phi_y);
        s.columns_mut(self.dims.output_width(), self.dims.input_width())
            .copy_from(&self.phi_u);
        s
    }

    /// `Phi_{i+1}`, zero-based over the output blocks.
    pub fn output_block(&self, i: usize) -> DMatrix<T> {
        let m = self.dims.outputs;
        self.phi_y.columns(i * m, m).into_owned()
    }

    /// `Phi_{Ly+j+1}`, zero-based over the input blocks.
    pub fn input_block(&self, j: usize) -> DMatrix<T> {
        let m = self.dims.inputs;
        self.phi_u.columns(j * m, m).into_owned()
    }

    /// The leading input coefficient `Phi_{Ly+1}`.
    pub fn leading_input(&self) -> DMatrix<T> {
        self.input_block(0)
    }

    pub fn scaled(&self, c: T) -> Self {
        Pjm {
            dims: self.dims,
            phi_y: &self.phi_y * c,
            phi_u: &self.phi_u * c,
        }
    }

    /// Row-major flattening of `[phi_y | phi_u]`.
    pub fn flatten(&self) -> Vec<T> {
        let s = self.stacked();
        (0..s.nrows())
            .flat_map(|r| (0..s.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| s[(r, c)])
            .collect()
    }
}

/// Input/output delay structure `d[i][j]` (steps between input `j` and output `i`).
///
/// Descriptive metadata only: nothing in the controller consults it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelayMatrix {
    delays: Vec<Vec<usize>>,
}

impl DelayMatrix {
    pub fn new(delays: Vec<Vec<usize>>) -> Result<Self> {
        let cols = delays.first().map(Vec::len).unwrap_or(0);
        if delays.is_empty() || cols == 0 || delays.iter().any(|r| r.len() != cols) {
            return Err(Error::Config("delay matrix must be a non-empty rectangle".into()));
        }
        if delays.iter().flatten().any(|&d| d < 1) {
            return Err(Error::Config("delays must be at least one step".into()));
        }
        Ok(DelayMatrix { delays })
    }

    pub fn get(&self, output: usize, input: usize) -> usize {
        self.delays[output][input]
    }

    pub fn max_delay(&self) -> usize {
        self.delays.iter().flatten().copied().max().unwrap_or(0)
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.delays
    }
}

/// Rolling record of measured outputs and applied inputs.
///
/// Time indices start at 1. Samples before time 1 are padded: `y(t) = y(1)` and
/// `u(t) = 0`, so every increment near start-up is well defined. An input that has
/// not been recorded yet reads as the last recorded one (no increment).
#[derive(Clone, Debug)]
pub struct HistoryWindow<T: Real> {
    outputs: usize,
    inputs: usize,
    depth: Option<usize>,
    first_y: Option<DVector<T>>,
    y: VecDeque<DVector<T>>,
    y_start: i64,
    u: VecDeque<DVector<T>>,
    u_start: i64,
}

impl<T: Real> HistoryWindow<T> {
    /// Unbounded history.
    pub fn new(outputs: usize, inputs: usize) -> Self {
        HistoryWindow {
            outputs,
            inputs,
            depth: None,
            first_y: None,
            y: VecDeque::new(),
            y_start: 1,
            u: VecDeque::new(),
            u_start: 1,
        }
    }

    /// History retaining only the latest `depth` samples of each signal.
    pub fn with_depth(outputs: usize, inputs: usize, depth: usize) -> Self {
        HistoryWindow {
            depth: Some(depth.max(1)),
            ..HistoryWindow::new(outputs, inputs)
        }
    }

    /// History holding `y(1..=ys.len())` and `u(1..=us.len())`.
    pub fn seeded(outputs: usize, inputs: usize, ys: &[DVector<T>], us: &[DVector<T>]) -> Result<Self> {
        let mut h = HistoryWindow::new(outputs, inputs);
        for y in ys {
            h.push_y(y.clone())?;
        }
        for u in us {
            h.push_u(u.clone())?;
        }
        Ok(h)
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    /// Time index of the latest output sample (0 when empty).
    pub fn k(&self) -> i64 {
        self.y_start + self.y.len() as i64 - 1
    }

    /// Time index of the latest recorded input (0 when none).
    pub fn last_input_time(&self) -> i64 {
        self.u_start + self.u.len() as i64 - 1
    }

    pub fn push_y(&mut self, y: DVector<T>) -> Result<()> {
        check_len("history output sample", self.outputs, y.len())?;
        if self.first_y.is_none() {
            self.first_y = Some(y.clone());
        }
        self.y.push_back(y);
        if let Some(d) = self.depth {
            while self.y.len() > d {
                self.y.pop_front();
                self.y_start += 1;
            }
        }
        Ok(())
    }

    pub fn push_u(&mut self, u: DVector<T>) -> Result<()> {
        check_len("history input sample", self.inputs, u.len())?;
        self.u.push_back(u);
        if let Some(d) = self.depth {
            while self.u.len() > d {
                self.u.pop_front();
                self.u_start += 1;
            }
        }
        Ok(())
    }

    pub fn y_at(&self, t: i64) -> Result<DVector<T>> {
        if t < 1 {
            return self.first_y.clone().ok_or(Error::History {
                requested: t,
                oldest: self.y_start,
                latest: self.k(),
            });
        }
        if t > self.k() || t < self.y_start {
            return Err(Error::History {
                requested: t,
                oldest: self.y_start,
                latest: self.k(),
            });
        }
        Ok(self.y[(t - self.y_start) as usize].clone())
    }

    pub fn u_at(&self, t: i64) -> Result<DVector<T>> {
        if t < 1 || self.u.is_empty() {
            return Ok(DVector::zeros(self.inputs));
        }
        let last = self.last_input_time();
        if t > last {
            return Ok(self.u[self.u.len() - 1].clone());
        }
        if t < self.u_start {
            return Err(Error::History {
                requested: t,
                oldest: self.u_start,
                latest: last,
            });
        }
        Ok(self.u[(t - self.u_start) as usize].clone())
    }

    /// `y(t) - y(t-1)`.
    pub fn delta_y(&self, t: i64) -> Result<DVector<T>> {
        Ok(self.y_at(t)? - self.y_at(t - 1)?)
    }

    /// `u(t) - u(t-1)`.
    pub fn delta_u(&self, t: i64) -> Result<DVector<T>> {
        Ok(self.u_at(t)? - self.u_at(t - 1)?)
    }

    /// `[dy(t); dy(t-1); ...; dy(t-order+1)]`.
    pub fn delta_y_stack(&self, t: i64, order: usize) -> Result<DVector<T>> {
        let m = self.outputs;
        let mut out = DVector::zeros(order * m);
        for i in 0..order {
            out.rows_mut(i * m, m).copy_from(&self.delta_y(t - i as i64)?);
        }
        Ok(out)
    }

    /// `[du(t); du(t-1); ...; du(t-order+1)]`.
    pub fn delta_u_stack(&self, t: i64, order: usize) -> Result<DVector<T>> {
        let m = self.inputs;
        let mut out = DVector::zeros(order * m);
        for i in 0..order {
            out.rows_mut(i * m, m).copy_from(&self.delta_u(t - i as i64)?);
        }
        Ok(out)
    }

    /// `dH(t)`: output increments followed by input increments.
    pub fn delta_h(&self, t: i64, output_order: usize, input_order: usize) -> Result<DVector<T>> {
        let dy = self.delta_y_stack(t, output_order)?;
        let du = self.delta_u_stack(t, input_order)?;
        let mut out = DVector::zeros(dy.len() + du.len());
        out.rows_mut(0, dy.len()).copy_from(&dy);
        out.rows_mut(dy.len(), du.len()).copy_from(&du);
        Ok(out)
    }
}

/// `dH(k)` at the history's latest output time `k`.
pub fn build_delta_h<T: Real>(hist: &HistoryWindow<T>, output_order: usize, input_order: usize) -> Result<DVector<T>> {
    hist.delta_h(hist.k(), output_order, input_order)
}

/// One step of the data model: `y(k+1) = y(k) + [phi_y | phi_u] dH(k)`.
pub fn edlm_step<T: Real>(pjm: &Pjm<T>, delta_h: &DVector<T>, y_k: &DVector<T>) -> Result<DVector<T>> {
    let dims = pjm.dims();
    check_len("increment vector", dims.width(), delta_h.len())?;
    check_len("output vector", dims.outputs, y_k.len())?;
    Ok(y_k + mul_vec(&pjm.stacked(), delta_h))
}

/// A plant whose one-step map has closed-form partial derivatives.
pub trait JacobianSource<T: Real> {
    /// Human-readable plant name for error messages.
    fn plant_name(&self) -> String;

    /// Number of output arguments of the one-step map, `y(t), ..., y(t-n_y)`.
    fn output_lags(&self) -> usize;

    /// Number of input arguments, `u(t), ..., u(t-n_u)`.
    fn input_lags(&self) -> usize;

    /// Partial derivatives of `f` with respect to each output and input
    /// argument, evaluated at `ys = [y(t), y(t-1), ..]`, `us = [u(t), u(t-1), ..]`.
    /// `None` when the plant has no closed form.
    fn jacobian(&self, ys: &[DVector<T>], us: &[DVector<T>]) -> Option<(Vec<DMatrix<T>>, Vec<DMatrix<T>>)>;
}

/// Analytic pseudo-Jacobian at the history's latest time `k`: the stacked true
/// Jacobians of the plant map evaluated at its arguments at time `k-1`.
pub fn analytic_pjm<T: Real, P: JacobianSource<T> + ?Sized>(
    plant: &P,
    hist: &HistoryWindow<T>,
    dims: Dims,
) -> Result<Pjm<T>> {
    analytic_pjm_at(plant, hist, hist.k(), dims)
}

/// Analytic pseudo-Jacobian `phi(t)`.
///
/// Blocks beyond the plant's own orders are zero; plant arguments beyond the
/// requested pseudo orders are dropped.
pub fn analytic_pjm_at<T: Real, P: JacobianSource<T> + ?Sized>(
    plant: &P,
    hist: &HistoryWindow<T>,
    t: i64,
    dims: Dims,
) -> Result<Pjm<T>> {
    check_len("plant outputs", dims.outputs, hist.outputs())?;
    check_len("plant inputs", dims.inputs, hist.inputs())?;
    let ys = (0..plant.output_lags())
        .map(|i| hist.y_at(t - 1 - i as i64))
        .collect::<Result<Vec<_>>>()?;
    let us = (0..plant.input_lags())
        .map(|j| hist.u_at(t - 1 - j as i64))
        .collect::<Result<Vec<_>>>()?;
    let (dy, du) = plant
        .jacobian(&ys, &us)
        .ok_or_else(|| Error::Unsupported(plant.plant_name()))?;
    let mut blocks = Vec::with_capacity(dims.output_order + dims.input_order);
    for i in 0..dims.output_order {
        blocks.push(dy.get(i).cloned().unwrap_or_else(|| DMatrix::zeros(dims.outputs, dims.outputs)));
    }
    for j in 0..dims.input_order {
        blocks.push(du.get(j).cloned().unwrap_or_else(|| DMatrix::zeros(dims.outputs, dims.inputs)));
    }
    Pjm::from_blocks(dims, &blocks)
}
