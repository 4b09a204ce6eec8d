//! Closed-loop analysis under a frozen pseudo-Jacobian.
//!
//! With `w = z^-1` and `D = 1 - w`, the data model and the predictive law form
//! the loop
//!
//! ```text
//! (I - w phi_y(w)) D y(k) = phi_u(w) du(k-1)
//! R(w) du(k-1)            = K H(z) y*(k) - S(w) y(k)
//! ```
//!
//! where `K` is the first block row of the ridge gain (only the first planned
//! increment is applied), `R = I + w K Psi_U T_u` and
//! `S = w K (Psi_Y T_y D + E)`. Eliminating the input gives
//! `T = (I - w phi_y) D + phi_u R^-1 S`; clearing the denominator yields the
//! polynomial matrix `T_hat = det(R) (I - w phi_y) D + phi_u adj(R) S`.
//!
//! Poles are taken from the determinant of the stacked loop matrix
//! `[[(I - w phi_y) D, -phi_u], [S, R]]`, which equals
//! `det(T_hat) / det(R)^(outputs-1)` and so carries no spurious roots from
//! the cleared denominator.

use nalgebra::{Complex, DMatrix, DVector};

use crate::controller::{ControllerConfig, Preview};
use crate::edlm::Pjm;
use crate::error::{check_len, Error, Result};
use crate::linalg::ridge_gain;
use crate::predictor::build_prediction_operators;
use crate::scalar::{lit, to_f64, Real};

/// Scalar polynomial in `w = z^-1`; `coeffs[i]` multiplies `w^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T: Real> {
    pub coeffs: Vec<T>,
}

impl<T: Real> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in `w`; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, w: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * w + c)
    }

    pub fn add(&self, other: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Poly<T>, i: usize| p.coeffs.get(i).copied().unwrap_or_else(T::zero);
        Poly::new((0..n).map(|i| get(self, i) + get(other, i)).collect())
    }

    pub fn scale(&self, c: T) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|&x| x * c).collect())
    }

    pub fn mul(&self, other: &Poly<T>) -> Poly<T> {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, p: usize) -> Poly<T> {
        (0..p).fold(Poly::constant(T::one()), |acc, _| acc.mul(self))
    }

    /// Roots in the `z` plane of `p(z^-1)`.
    ///
    /// Leading zero coefficients in `w` correspond to roots at infinity and are
    /// dropped.
    pub fn z_roots(&self) -> Result<Vec<Complex<T>>> {
        let first = self.coeffs.iter().position(|c| !c.is_zero()).ok_or(Error::Degenerate)?;
        let c = &self.coeffs[first..];
        let d = c.len() - 1;
        if d == 0 {
            return Ok(Vec::new());
        }
        // z^d p(1/z) = c0 z^d + c1 z^(d-1) + ... + cd
        let mut companion = DMatrix::zeros(d, d);
        for j in 0..d {
            companion[(0, j)] = -c[j + 1] / c[0];
        }
        for i in 1..d {
            companion[(i, i - 1)] = T::one();
        }
        Ok(companion.complex_eigenvalues().iter().cloned().collect())
    }
}

/// Matrix polynomial in `w = z^-1`; `coeffs[i]` multiplies `w^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix<T: Real> {
    rows: usize,
    cols: usize,
    pub coeffs: Vec<DMatrix<T>>,
}

impl<T: Real> PolyMatrix<T> {
    pub fn new(rows: usize, cols: usize, coeffs: Vec<DMatrix<T>>) -> Result<Self> {
        for c in &coeffs {
            if c.shape() != (rows, cols) {
                return Err(Error::Config("polynomial matrix coefficients must share one shape".into()));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("polynomial matrix coefficient"));
            }
        }
        Ok(PolyMatrix { rows, cols, coeffs }.trimmed())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(m: DMatrix<T>) -> Self {
        let (rows, cols) = m.shape();
        PolyMatrix {
            rows,
            cols,
            coeffs: vec![m],
        }
        .trimmed()
    }

    pub fn identity(n: usize) -> Self {
        PolyMatrix::constant(DMatrix::identity(n, n))
    }

    /// `m * w^power`.
    pub fn monomial(m: DMatrix<T>, power: usize) -> Self {
        let (rows, cols) = m.shape();
        let mut coeffs = vec![DMatrix::zeros(rows, cols); power];
        coeffs.push(m);
        PolyMatrix { rows, cols, coeffs }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.iter().all(|x| x.is_zero())) {
            self.coeffs.pop();
        }
        self
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn entry(&self, r: usize, c: usize) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|m| m[(r, c)]).collect())
    }

    pub fn from_entries(rows: usize, cols: usize, entry: impl Fn(usize, usize) -> Poly<T>) -> Self {
        let polys: Vec<Poly<T>> = (0..rows * cols).map(|i| entry(i / cols, i % cols)).collect();
        let len = polys.iter().map(|p| p.coeffs.len()).max().unwrap_or(0);
        let coeffs = (0..len)
            .map(|d| {
                DMatrix::from_fn(rows, cols, |r, c| {
                    polys[r * cols + c].coeffs.get(d).copied().unwrap_or_else(T::zero)
                })
            })
            .collect();
        PolyMatrix { rows, cols, coeffs }.trimmed()
    }

    pub fn eval(&self, w: T) -> DMatrix<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(DMatrix::zeros(self.rows, self.cols), |acc, c| acc * w + c)
    }

    pub fn add(&self, other: &PolyMatrix<T>) -> PolyMatrix<T> {
        assert_eq!(self.shape(), other.shape(), "polynomial matrix sum shape");
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = DMatrix::zeros(self.rows, self.cols);
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero))
            .collect();
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            coeffs,
        }
        .trimmed()
    }

    pub fn scale(&self, c: T) -> PolyMatrix<T> {
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            coeffs: self.coeffs.iter().map(|m| m * c).collect(),
        }
        .trimmed()
    }

    pub fn scale_poly(&self, p: &Poly<T>) -> PolyMatrix<T> {
        PolyMatrix::from_entries(self.rows, self.cols, |r, c| self.entry(r, c).mul(p))
    }

    pub fn mul(&self, other: &PolyMatrix<T>) -> PolyMatrix<T> {
        assert_eq!(self.cols, other.rows, "polynomial matrix product shape");
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return PolyMatrix::zeros(self.rows, other.cols);
        }
        let mut coeffs = vec![DMatrix::zeros(self.rows, other.cols); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        PolyMatrix {
            rows: self.rows,
            cols: other.cols,
            coeffs,
        }
        .trimmed()
    }

    /// Exact determinant by cofactor expansion over column subsets.
    pub fn det(&self) -> Poly<T> {
        assert_eq!(self.rows, self.cols, "determinant of a non-square polynomial matrix");
        let n = self.rows;
        let entries: Vec<Vec<Poly<T>>> = (0..n).map(|r| (0..n).map(|c| self.entry(r, c)).collect()).collect();
        let all_rows: Vec<usize> = (0..n).collect();
        minor_det(&entries, &all_rows, &(0..n).collect::<Vec<_>>())
    }

    /// Classical adjoint, `adj(M) M = det(M) I`.
    pub fn adjugate(&self) -> PolyMatrix<T> {
        assert_eq!(self.rows, self.cols, "adjugate of a non-square polynomial matrix");
        let n = self.rows;
        let entries: Vec<Vec<Poly<T>>> = (0..n).map(|r| (0..n).map(|c| self.entry(r, c)).collect()).collect();
        PolyMatrix::from_entries(n, n, |r, c| {
            // adj[r][c] = (-1)^(r+c) det(minor without row c, column r)
            let rows: Vec<usize> = (0..n).filter(|&i| i != c).collect();
            let cols: Vec<usize> = (0..n).filter(|&j| j != r).collect();
            let m = minor_det(&entries, &rows, &cols);
            if (r + c) % 2 == 0 {
                m
            } else {
                m.scale(-T::one())
            }
        })
    }
}

// Determinant of the submatrix on `rows` x `cols`, dynamic programming over
// subsets of columns: dp[mask] sums the signed products assigning the first
// popcount(mask) rows to the columns in mask.
fn minor_det<T: Real>(entries: &[Vec<Poly<T>>], rows: &[usize], cols: &[usize]) -> Poly<T> {
    let n = rows.len();
    if n == 0 {
        return Poly::constant(T::one());
    }
    let mut dp: Vec<Option<Poly<T>>> = vec![None; 1 << n];
    dp[0] = Some(Poly::constant(T::one()));
    for mask in 0usize..(1 << n) {
        let Some(acc) = dp[mask].take() else { continue };
        let r = mask.count_ones() as usize;
        if r == n {
            dp[mask] = Some(acc);
            continue;
        }
        for j in 0..n {
            if mask & (1 << j) != 0 {
                continue;
            }
            let e = &entries[rows[r]][cols[j]];
            if e.is_zero() {
                continue;
            }
            // sign from the number of already-used columns to the right of j
            let inversions = (mask >> (j + 1)).count_ones();
            let mut term = acc.mul(e);
            if inversions % 2 == 1 {
                term = term.scale(-T::one());
            }
            let slot = &mut dp[mask | (1 << j)];
            *slot = Some(match slot.take() {
                Some(p) => p.add(&term),
                None => term,
            });
        }
        dp[mask] = Some(acc);
    }
    dp[(1 << n) - 1].clone().unwrap_or_else(Poly::zero)
}

pub const STABILITY_MARGIN: f64 = 1e-6;

/// Roots of `det T(z)` and their largest modulus.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleReport<T: Real> {
    pub roots: Vec<Complex<T>>,
    pub max_modulus: T,
}

impl<T: Real> PoleReport<T> {
    /// Strictly inside the unit circle, with a margin covering the rounding
    /// of repeated roots on the circle itself.
    pub fn is_stable(&self) -> bool {
        self.max_modulus < T::one() - lit(STABILITY_MARGIN)
    }
}

pub fn modulus<T: Real>(z: &Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

pub fn poles<T: Real>(t: &PolyMatrix<T>) -> Result<PoleReport<T>> {
    let det = t.det();
    if det.is_zero() {
        return Err(Error::Degenerate);
    }
    let roots = det.z_roots()?;
    let max_modulus = roots.iter().map(|r| modulus(r)).fold(T::zero(), |a, b| a.max(b));
    Ok(PoleReport { roots, max_modulus })
}

/// Polynomial blocks of the frozen-PJM loop.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoop<T: Real> {
    /// First block row of the ridge gain.
    pub gain: DMatrix<T>,
    /// `(I - w phi_y(w)) (1 - w)`.
    pub output_part: PolyMatrix<T>,
    /// `phi_u(w)`.
    pub input_part: PolyMatrix<T>,
    pub r: PolyMatrix<T>,
    pub s: PolyMatrix<T>,
    /// `[[output_part, -input_part], [S, R]]`.
    pub system: PolyMatrix<T>,
    /// Denominator-cleared closed-loop matrix.
    pub t_hat: PolyMatrix<T>,
    /// `det R`, the common denominator of `T = T_hat / det R`.
    pub denominator: Poly<T>,
    horizon: usize,
    preview: Preview,
}

impl<T: Real> ClosedLoop<T> {
    /// Closed-loop poles from the loop determinant.
    pub fn poles(&self) -> Result<PoleReport<T>> {
        poles(&self.system)
    }

    /// `T(w)` evaluated numerically.
    pub fn t_at(&self, w: T) -> Result<DMatrix<T>> {
        let r_inv = invert(self.r.eval(w))?;
        Ok(self.output_part.eval(w) + self.input_part.eval(w) * r_inv * self.s.eval(w))
    }
}

fn invert<T: Real>(m: DMatrix<T>) -> Result<DMatrix<T>> {
    m.try_inverse().ok_or(Error::Singular {
        condition: f64::INFINITY,
    })
}

/// Assembles the closed loop of the predictive law around a frozen PJM.
pub fn closed_loop_t<T: Real>(pjm: &Pjm<T>, cfg: &ControllerConfig<T>) -> Result<ClosedLoop<T>> {
    if pjm.dims() != cfg.dims {
        return Err(Error::Config("pjm dimensions do not match the controller".into()));
    }
    let dims = cfg.dims;
    let (my, mu) = (dims.outputs, dims.inputs);
    let ops = build_prediction_operators(pjm, cfg.horizon, cfg.control_horizon)?;
    let p = ridge_gain(&ops.psi_nu_tilde, &cfg.weights()?, cfg.singular_policy)?;
    let k = p.rows(0, mu).into_owned();
    let one_minus_w = Poly::new(vec![T::one(), -T::one()]);

    let k_psi_u = &k * &ops.psi_u_tilde;
    let mut r = PolyMatrix::identity(mu);
    for j in 0..dims.input_order {
        r = r.add(&PolyMatrix::monomial(k_psi_u.columns(j * mu, mu).into_owned(), j + 1));
    }

    let k_psi_y = &k * &ops.psi_y_tilde;
    let mut ky = PolyMatrix::zeros(mu, my);
    for i in 0..dims.output_order {
        ky = ky.add(&PolyMatrix::monomial(k_psi_y.columns(i * my, my).into_owned(), i));
    }
    let s0 = ky.scale_poly(&one_minus_w).add(&PolyMatrix::constant(&k * &ops.e));
    let s = s0.mul(&PolyMatrix::monomial(DMatrix::identity(my, my), 1));

    let mut phi_y = PolyMatrix::zeros(my, my);
    for i in 0..dims.output_order {
        phi_y = phi_y.add(&PolyMatrix::monomial(pjm.output_block(i), i));
    }
    let mut phi_u = PolyMatrix::zeros(my, mu);
    for j in 0..dims.input_order {
        phi_u = phi_u.add(&PolyMatrix::monomial(pjm.input_block(j), j));
    }
    let output_part = PolyMatrix::identity(my)
        .add(&phi_y.mul(&PolyMatrix::monomial(DMatrix::identity(my, my), 1)).scale(-T::one()))
        .scale_poly(&one_minus_w);

    let n = my + mu;
    let system = PolyMatrix::from_entries(n, n, |row, col| match (row < my, col < my) {
        (true, true) => output_part.entry(row, col),
        (true, false) => phi_u.entry(row, col - my).scale(-T::one()),
        (false, true) => s.entry(row - my, col),
        (false, false) => r.entry(row - my, col - my),
    });

    let denominator = r.det();
    let t_hat = output_part
        .scale_poly(&denominator)
        .add(&phi_u.mul(&r.adjugate()).mul(&s));

    Ok(ClosedLoop {
        gain: k,
        output_part,
        input_part: phi_u,
        r,
        s,
        system,
        t_hat,
        denominator,
        horizon: cfg.horizon,
        preview: cfg.preview,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceKind<T: Real> {
    /// `y*(k) = v` for `k >= 0`.
    Step(DVector<T>),
    /// `y*(k) = k v`.
    Ramp(DVector<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState<T: Real> {
    /// Limit of `y* - y`.
    pub error: DVector<T>,
    /// Gap between the quadratic and linear extrapolations.
    pub spread: T,
    /// The extrapolation did not settle; the limit may not exist.
    pub warning: bool,
}

/// Final-value limit of the tracking error, extrapolated from samples at
/// `z = 1 + eps`.
pub fn steady_state_error<T: Real>(
    pjm: &Pjm<T>,
    cfg: &ControllerConfig<T>,
    reference: &ReferenceKind<T>,
) -> Result<SteadyState<T>> {
    let cl = closed_loop_t(pjm, cfg)?;
    let report = cl.poles()?;
    if !report.is_stable() {
        return Err(Error::Unstable {
            max_modulus: to_f64(report.max_modulus),
        });
    }
    let my = cfg.dims.outputs;
    let (v, ramp) = match reference {
        ReferenceKind::Step(v) => (v, false),
        ReferenceKind::Ramp(v) => (v, true),
    };
    check_len("reference direction", my, v.len())?;
    let eps = [1e-3, 1e-4, 1e-5];
    let samples = eps
        .iter()
        .map(|&e| {
            let z = T::one() + lit(e);
            let w = T::one() / z;
            let t = cl.t_at(w)?;
            let r_inv = invert(cl.r.eval(w))?;
            let h = preview_operator(&cl, z, my);
            let d = &t - cl.input_part.eval(w) * r_inv * &cl.gain * h;
            let mut err = invert(t)? * d * v;
            if ramp {
                err /= z - T::one();
            }
            Ok(err)
        })
        .collect::<Result<Vec<DVector<T>>>>()?;
    let x: Vec<T> = eps.iter().map(|&e| lit(e)).collect();
    let quadratic = neville_at_zero(&x, &samples);
    let linear = neville_at_zero(&x[1..], &samples[1..]);
    let spread = (&quadratic - &linear).amax();
    let scale = T::one() + quadratic.amax();
    Ok(SteadyState {
        error: quadratic,
        spread,
        warning: !(spread <= lit::<T>(1e-6) * scale) || samples.iter().any(|s| !s.iter().all(|x| x.is_finite())),
    })
}

// `[I; zI; ...; z^(N-1) I]`, or the stacked identity when the preview is held.
fn preview_operator<T: Real>(cl: &ClosedLoop<T>, z: T, my: usize) -> DMatrix<T> {
    let mut h = DMatrix::zeros(cl.horizon * my, my);
    let mut p = T::one();
    for i in 0..cl.horizon {
        let c = match cl.preview {
            Preview::Full => p,
            Preview::Hold => T::one(),
        };
        h.view_mut((i * my, 0), (my, my)).copy_from(&(DMatrix::identity(my, my) * c));
        p *= z;
    }
    h
}

// Value at 0 of the interpolating polynomial through (x_i, f_i).
fn neville_at_zero<T: Real>(x: &[T], f: &[DVector<T>]) -> DVector<T> {
    let mut p: Vec<DVector<T>> = f.to_vec();
    let n = x.len();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (x[i], x[i + m]);
            p[i] = (&p[i + 1] * xi - &p[i] * xj) / (xi - xj);
        }
    }
    p.swap_remove(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::Lambda;
    use crate::edlm::Dims;

    fn diag_poly(n: usize, p: &[f64]) -> PolyMatrix<f64> {
        PolyMatrix::new(n, n, p.iter().map(|&c| DMatrix::identity(n, n) * c).collect()).unwrap()
    }

    fn sorted_moduli(r: &PoleReport<f64>) -> Vec<f64> {
        let mut m: Vec<f64> = r.roots.iter().map(|c| c.norm()).collect();
        m.sort_by(f64::total_cmp);
        m
    }

    #[test]
    fn integrator_poles() {
        let r = poles(&diag_poly(2, &[1.0, -1.0])).unwrap();
        assert_eq!(r.roots.len(), 2);
        for z in &r.roots {
            assert!((z - Complex::new(1.0, 0.0)).norm() < 1e-7);
        }
    }

    #[test]
    fn first_order_poles() {
        let r = poles(&diag_poly(2, &[1.0, -0.5])).unwrap();
        for z in &r.roots {
            assert!((z - Complex::new(0.5, 0.0)).norm() < 1e-12);
        }
        assert!((r.max_modulus - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_determinant_is_degenerate() {
        let m = PolyMatrix::new(2, 2, vec![DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])]).unwrap();
        assert_eq!(poles(&m), Err(Error::Degenerate));
    }

    #[test]
    fn determinant_and_adjugate() {
        let m = PolyMatrix::new(
            3,
            3,
            vec![
                DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.5, 1.0, -1.0, 0.0, 3.0, 2.0]),
                DMatrix::from_row_slice(3, 3, &[0.2, 0.0, 1.0, -0.4, 0.3, 0.0, 1.0, 0.0, 0.1]),
            ],
        )
        .unwrap();
        let det = m.det();
        for &w in &[0.0f64, 0.3, -1.7, 2.5] {
            let direct = m.eval(w).determinant();
            assert!((det.eval(w) - direct).abs() < 1e-12 * (1.0 + direct.abs()));
        }
        let prod = m.adjugate().mul(&m);
        let expect = PolyMatrix::identity(3).scale_poly(&det);
        for (a, b) in prod.coeffs.iter().zip(&expect.coeffs) {
            assert!((a - b).amax() < 1e-12);
        }
    }

    #[test]
    fn scalar_one_step_loop() {
        let dims = Dims::new(1, 1, 0, 1).unwrap();
        let (phi, lambda) = (0.8f64, 0.3);
        let pjm = Pjm::new(dims, DMatrix::zeros(1, 0), DMatrix::from_element(1, 1, phi)).unwrap();
        let cfg = ControllerConfig::new(dims, 1, 1, Lambda::Scalar(lambda)).unwrap();
        let cl = closed_loop_t(&pjm, &cfg).unwrap();
        // T = (1 - w) + w phi^2 / (phi^2 + lambda)
        let g = phi * phi / (phi * phi + lambda);
        let t = &cl.t_hat;
        assert_eq!(cl.denominator, Poly::constant(1.0));
        assert!((t.coeffs[0][(0, 0)] - 1.0).abs() < 1e-15);
        assert!((t.coeffs[1][(0, 0)] - (g - 1.0)).abs() < 1e-15);
        let r = cl.poles().unwrap();
        assert!((r.max_modulus - (1.0 - g)).abs() < 1e-12);
    }

    #[test]
    fn zero_pjm_is_open_loop_integrator() {
        let dims = Dims::new(2, 2, 1, 2).unwrap();
        let pjm = Pjm::zeros(dims).unwrap();
        let cfg = ControllerConfig::new(dims, 2, 2, Lambda::Scalar(0.1)).unwrap();
        let cl = closed_loop_t(&pjm, &cfg).unwrap();
        assert_eq!(cl.t_hat, diag_poly(2, &[1.0, -1.0]));
        let m = sorted_moduli(&cl.poles().unwrap());
        assert!(m.iter().all(|x| (x - 1.0).abs() < 1e-7));
        assert!(matches!(
            steady_state_error(&pjm, &cfg, &ReferenceKind::Step(DVector::from_element(2, 1.0))),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn neville_recovers_quadratic() {
        let x = [1e-3, 1e-4, 1e-5];
        let f: Vec<DVector<f64>> = x.iter().map(|&e| DVector::from_element(1, 2.0 + 3.0 * e - 5.0 * e * e)).collect();
        assert!((neville_at_zero(&x, &f)[0] - 2.0).abs() < 1e-12);
    }
}
