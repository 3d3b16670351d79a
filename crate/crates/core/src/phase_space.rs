//! Wigner-function representations of single- and two-mode states.
//!
//! Quadratures are x = a + a†, p = i(a† − a), so the vacuum has unit variance
//! in each and W_vac = exp(−(x² + p²)/2)/(2π). Pure-state overlaps are
//! Tr(ρ₁ρ₂) = 4π∫W₁W₂.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::special::laguerre;

/// Vacuum variance of each quadrature.
pub const VACUUM_VARIANCE: f64 = 1.0;
/// Tolerance of the uncertainty-relation eigenvalue check.
pub const UNCERTAINTY_TOL: f64 = 1e-9;
/// Tolerance for a grid to count as normalized.
pub const NORM_TOL: f64 = 1e-6;
pub const DEFAULT_GRID_POINTS: usize = 401;
pub const DEFAULT_GRID_SPAN: f64 = 10.0;
/// Gaussian tails are cut this many standard deviations out.
pub const SUPPORT_SIGMAS: f64 = 9.0;

/// Symplectic form for `n` modes, blocks [[0, 1], [−1, 0]].
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    om
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Validates symmetry, positivity and cov + iΩ ≥ 0.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::InvalidState(format!("mean has odd or zero length {dim}")));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: cov.nrows(),
            });
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let scale = cov.amax().max(1.0);
        if (&cov - cov.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidState("covariance is not symmetric".into()));
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        let om = symplectic_form(dim / 2);
        let herm = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(cov[(i, j)], om[(i, j)]));
        let min_eig = SymmetricEigen::new(herm).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -UNCERTAINTY_TOL * scale {
            return Err(Error::InvalidState(format!(
                "covariance violates the uncertainty relation (min eigenvalue of V + iΩ is {min_eig:e})"
            )));
        }
        if cov.clone().cholesky().is_none() {
            return Err(Error::InvalidState("covariance is not positive definite".into()));
        }
        Ok(Self { mean, cov })
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Tensor product, `self` first.
    pub fn product(&self, other: &GaussianState) -> GaussianState {
        let (a, b) = (self.mean.len(), other.mean.len());
        let mut mean = DVector::zeros(a + b);
        mean.rows_mut(0, a).copy_from(&self.mean);
        mean.rows_mut(a, b).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(a + b, a + b);
        cov.view_mut((0, 0), (a, a)).copy_from(&self.cov);
        cov.view_mut((a, a), (b, b)).copy_from(&other.cov);
        GaussianState { mean, cov }
    }

    /// Reduced state of one mode.
    pub fn mode(&self, index: usize) -> Result<GaussianState> {
        if index >= self.n_modes() {
            return Err(Error::param("mode_index", format!("{index} out of range")));
        }
        let i = 2 * index;
        Ok(GaussianState {
            mean: self.mean.rows(i, 2).into_owned(),
            cov: self.cov.view((i, i), (2, 2)).into_owned(),
        })
    }

    /// Wigner density at the phase-space point `r`.
    pub fn wigner(&self, r: &[f64]) -> f64 {
        let d = DVector::from_column_slice(r) - &self.mean;
        let chol = self.cov.clone().cholesky().expect("validated covariance");
        let sol = chol.solve(&d);
        let det = chol.determinant();
        let n = self.n_modes() as i32;
        (-0.5 * d.dot(&sol)).exp() / ((2.0 * PI).powi(n) * det.sqrt())
    }

    /// Fast evaluator for a single-mode state.
    pub fn density(&self) -> Result<GaussianDensity> {
        if self.n_modes() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.mean.len(),
            });
        }
        Ok(GaussianDensity::new(
            [self.mean[0], self.mean[1]],
            [[self.cov[(0, 0)], self.cov[(0, 1)]], [self.cov[(1, 0)], self.cov[(1, 1)]]],
        ))
    }

    /// Tr ρ² = 1/√det V in this convention.
    pub fn purity(&self) -> f64 {
        1.0 / self.cov.determinant().sqrt()
    }
}

/// Closed-form bivariate normal density.
#[derive(Debug, Clone, Copy)]
pub struct GaussianDensity {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
    inv: [f64; 3],
    norm: f64,
}

impl GaussianDensity {
    pub fn new(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Self {
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        let inv = [cov[1][1] / det, -cov[0][1] / det, cov[0][0] / det];
        Self {
            mean,
            cov,
            inv,
            norm: 1.0 / (2.0 * PI * det.sqrt()),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64, p: f64) -> f64 {
        let dx = x - self.mean[0];
        let dp = p - self.mean[1];
        let q = self.inv[0] * dx * dx + 2.0 * self.inv[1] * dx * dp + self.inv[2] * dp * dp;
        self.norm * (-0.5 * q).exp()
    }

    /// Log of the unnormalized density; `eval` is `norm · exp(log_kernel)`.
    #[inline]
    pub fn log_kernel(&self, x: f64, p: f64) -> f64 {
        let dx = x - self.mean[0];
        let dp = p - self.mean[1];
        -0.5 * (self.inv[0] * dx * dx + 2.0 * self.inv[1] * dx * dp + self.inv[2] * dp * dp)
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn max_sigma(&self) -> f64 {
        let (a, b, c) = (self.cov[0][0], self.cov[0][1], self.cov[1][1]);
        let tr = 0.5 * (a + c);
        let disc = (0.25 * (a - c).powi(2) + b * b).sqrt();
        (tr + disc).sqrt()
    }
}

pub fn make_vacuum() -> GaussianState {
    GaussianState {
        mean: DVector::zeros(2),
        cov: DMatrix::identity(2, 2) * VACUUM_VARIANCE,
    }
}

/// Squeezed vacuum with var(x) = e^{2r}, var(p) = e^{−2r}.
pub fn make_squeezed(r: f64) -> Result<GaussianState> {
    ensure_finite("r", r)?;
    GaussianState::new(DVector::zeros(2), DMatrix::from_diagonal(&DVector::from_vec(vec![(2.0 * r).exp(), (-2.0 * r).exp()])))
}

pub fn make_squeezed_thermal(v_theta: f64, v_l: f64) -> Result<GaussianState> {
    ensure_positive("V_theta", v_theta)?;
    ensure_positive("V_L", v_l)?;
    if v_theta * v_l < 1.0 - UNCERTAINTY_TOL {
        return Err(Error::InvalidState(format!(
            "V_theta·V_L = {} violates the uncertainty bound 1",
            v_theta * v_l
        )));
    }
    GaussianState::new(DVector::zeros(2), DMatrix::from_diagonal(&DVector::from_vec(vec![v_theta, v_l])))
}

pub fn make_thermal(n_bar: f64) -> Result<GaussianState> {
    if !(n_bar.is_finite() && n_bar >= 0.0) {
        return Err(Error::param("n_bar", "must be non-negative"));
    }
    let v = 2.0 * n_bar + 1.0;
    make_squeezed_thermal(v, v)
}

/// Coherent state with quadrature means (x, p).
pub fn make_coherent(x: f64, p: f64) -> Result<GaussianState> {
    ensure_finite("x", x)?;
    ensure_finite("p", p)?;
    GaussianState::new(DVector::from_vec(vec![x, p]), DMatrix::identity(2, 2))
}

/// A single-mode Wigner function that can be evaluated anywhere.
pub trait WignerFunction: Send + Sync {
    fn eval(&self, x: f64, p: f64) -> f64;
    /// Radius outside which |W| is negligible (below ~1e−16 of its peak).
    fn support_radius(&self) -> f64;
    /// (x_min, x_max, p_min, p_max) outside which |W| is negligible.
    fn support_box(&self) -> [f64; 4] {
        let r = self.support_radius();
        [-r, r, -r, r]
    }
    fn describe(&self) -> String;
}

impl WignerFunction for GaussianDensity {
    fn eval(&self, x: f64, p: f64) -> f64 {
        GaussianDensity::eval(self, x, p)
    }

    fn support_radius(&self) -> f64 {
        self.mean[0].hypot(self.mean[1]) + SUPPORT_SIGMAS * self.max_sigma()
    }

    fn describe(&self) -> String {
        format!("gaussian(mean={:?}, cov={:?})", self.mean, self.cov)
    }
}

/// Even cat |α⟩ + |−α⟩, with α given in annihilation-operator units.
#[derive(Debug, Clone, Copy)]
pub struct EvenCat {
    /// α as the real 2-vector (Re α, Im α).
    alpha: [f64; 2],
    norm: f64,
}

impl EvenCat {
    pub fn new(alpha: Complex64) -> Result<Self> {
        ensure_finite("alpha", alpha.re)?;
        ensure_finite("alpha", alpha.im)?;
        let a2 = alpha.norm_sqr();
        Ok(Self {
            alpha: [alpha.re, alpha.im],
            norm: 1.0 / (2.0 * PI * (1.0 + (-2.0 * a2).exp())),
        })
    }

    pub fn real(alpha: f64) -> Result<Self> {
        if alpha < 0.0 {
            return Err(Error::param("alpha", "must be non-negative"));
        }
        Self::new(Complex64::new(alpha, 0.0))
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.alpha[0], self.alpha[1])
    }
}

impl WignerFunction for EvenCat {
    #[inline]
    fn eval(&self, x: f64, p: f64) -> f64 {
        let [ar, ai] = self.alpha;
        let a2 = ar * ar + ai * ai;
        let r_dot_a = x * ar + p * ai;
        // ϖα = (Im α, −Re α)
        let r_dot_wa = x * ai - p * ar;
        let env = -0.5 * (x * x + p * p);
        // e^{−2|α|²}cosh(2r·α) folded into the exponent to avoid overflow
        let c = 0.5 * ((env - 2.0 * a2 + 2.0 * r_dot_a).exp() + (env - 2.0 * a2 - 2.0 * r_dot_a).exp());
        self.norm * (c + env.exp() * (2.0 * r_dot_wa).cos())
    }

    fn support_radius(&self) -> f64 {
        2.0 * self.alpha[0].hypot(self.alpha[1]) + SUPPORT_SIGMAS
    }

    fn describe(&self) -> String {
        format!("even_cat(alpha={}+{}i)", self.alpha[0], self.alpha[1])
    }
}

/// Fock state |n⟩: (−1)ⁿ L_n(x² + p²) e^{−(x²+p²)/2}/(2π).
#[derive(Debug, Clone, Copy)]
pub struct FockWigner {
    pub n: usize,
}

impl WignerFunction for FockWigner {
    #[inline]
    fn eval(&self, x: f64, p: f64) -> f64 {
        let rho2 = x * x + p * p;
        let sign = if self.n.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * laguerre(self.n, rho2) * (-0.5 * rho2).exp() / (2.0 * PI)
    }

    fn support_radius(&self) -> f64 {
        (4.0 * self.n as f64 + 2.0).sqrt() + SUPPORT_SIGMAS
    }

    fn describe(&self) -> String {
        format!("fock(n={})", self.n)
    }
}

/// Bilinear interpolation of a sampled grid, zero outside it.
impl WignerFunction for GridWigner {
    fn eval(&self, x: f64, p: f64) -> f64 {
        self.interpolate(x, p)
    }

    fn support_radius(&self) -> f64 {
        let x = self.x_axis.min.abs().max(self.x_axis.max.abs());
        let p = self.p_axis.min.abs().max(self.p_axis.max.abs());
        x.hypot(p)
    }

    fn support_box(&self) -> [f64; 4] {
        [self.x_axis.min, self.x_axis.max, self.p_axis.min, self.p_axis.max]
    }

    fn describe(&self) -> String {
        format!("grid({})", self.provenance)
    }
}

/// Uniform sample points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        ensure_finite("axis min", min)?;
        ensure_finite("axis max", max)?;
        if !(max > min) || points < 2 {
            return Err(Error::param("axis", format!("need max > min and ≥ 2 points, got [{min}, {max}] × {points}")));
        }
        Ok(Self { min, max, points })
    }

    pub fn symmetric(half_span: f64, points: usize) -> Result<Self> {
        Self::new(-half_span, half_span, points)
    }

    pub fn default_axis() -> Self {
        Self::symmetric(DEFAULT_GRID_SPAN, DEFAULT_GRID_POINTS).expect("static axis")
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        // Evaluate from the nearer end so symmetric axes stay exactly symmetric.
        let h = self.step();
        if 2 * i < self.points {
            self.min + i as f64 * h
        } else {
            self.max - (self.points - 1 - i) as f64 * h
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }

    pub fn half_span(&self) -> f64 {
        self.min.abs().max(self.max.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormFlag {
    Normalized,
    Unnormalized,
}

/// Single-mode Wigner function sampled on a rectangular grid. Values are
/// stored x-major: `values[ix * p_axis.points + ip]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWigner {
    pub x_axis: Axis,
    pub p_axis: Axis,
    pub values: Vec<f64>,
    pub norm: NormFlag,
    pub provenance: String,
}

/// JSON sidecar accompanying a grid CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub x_axis: Axis,
    pub p_axis: Axis,
    pub norm: NormFlag,
    pub provenance: String,
    pub integral: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub success_weight: Option<f64>,
}

impl GridWigner {
    pub fn new(x_axis: Axis, p_axis: Axis, values: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if values.len() != x_axis.points * p_axis.points {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}×{} grid",
                values.len(),
                x_axis.points,
                p_axis.points
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite Wigner value at flat index {i}")));
        }
        let mut g = Self {
            x_axis,
            p_axis,
            values,
            norm: NormFlag::Unnormalized,
            provenance: provenance.into(),
        };
        if (g.integral() - 1.0).abs() <= NORM_TOL {
            g.norm = NormFlag::Normalized;
        }
        Ok(g)
    }

    pub fn cell(&self) -> f64 {
        self.x_axis.step() * self.p_axis.step()
    }

    #[inline]
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.p_axis.points + ip]
    }

    /// Riemann sum Σ W Δx Δp.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell()
    }

    pub fn is_normalized(&self) -> bool {
        self.norm == NormFlag::Normalized
    }

    /// Divides by the grid integral.
    pub fn normalized(mut self) -> Result<Self> {
        let total = self.integral();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Numerical(format!("cannot normalize a grid with integral {total}")));
        }
        self.values.iter_mut().for_each(|v| *v /= total);
        self.norm = NormFlag::Normalized;
        Ok(self)
    }

    pub fn same_grid(&self, other: &GridWigner) -> bool {
        self.x_axis == other.x_axis && self.p_axis == other.p_axis
    }

    pub fn linf_distance(&self, other: &GridWigner) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("grids differ".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Grid point of the maximum.
    pub fn argmax(&self) -> (f64, f64) {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let np = self.p_axis.points;
        (self.x_axis.value(i / np), self.p_axis.value(i % np))
    }

    /// ∫W dp as a function of x.
    pub fn marginal_x(&self) -> Vec<f64> {
        let np = self.p_axis.points;
        let dp = self.p_axis.step();
        self.values.chunks(np).map(|row| row.iter().sum::<f64>() * dp).collect()
    }

    /// ∫W dx as a function of p.
    pub fn marginal_p(&self) -> Vec<f64> {
        let np = self.p_axis.points;
        let dx = self.x_axis.step();
        let mut out = vec![0.0; np];
        for row in self.values.chunks(np) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|o| *o *= dx);
        out
    }

    /// (⟨x⟩, ⟨p⟩, var x, var p) from the grid.
    pub fn moments(&self) -> (f64, f64, f64, f64) {
        let mx = self.marginal_x();
        let mp = self.marginal_p();
        let stats = |m: &[f64], axis: &Axis| {
            let h = axis.step();
            let total: f64 = m.iter().sum::<f64>() * h;
            let mean = m.iter().enumerate().map(|(i, w)| w * axis.value(i)).sum::<f64>() * h / total;
            let var = m.iter().enumerate().map(|(i, w)| w * (axis.value(i) - mean).powi(2)).sum::<f64>() * h / total;
            (mean, var)
        };
        let (ax, vx) = stats(&mx, &self.x_axis);
        let (ap, vp) = stats(&mp, &self.p_axis);
        (ax, ap, vx, vp)
    }

    /// Bilinear interpolation, zero outside the grid.
    pub fn interpolate(&self, x: f64, p: f64) -> f64 {
        let tx = (x - self.x_axis.min) / self.x_axis.step();
        let tp = (p - self.p_axis.min) / self.p_axis.step();
        let nx = self.x_axis.points;
        let np = self.p_axis.points;
        if !(tx >= 0.0 && tp >= 0.0 && tx <= (nx - 1) as f64 && tp <= (np - 1) as f64) {
            return 0.0;
        }
        let ix = (tx.floor() as usize).min(nx - 2);
        let ip = (tp.floor() as usize).min(np - 2);
        let fx = tx - ix as f64;
        let fp = tp - ip as f64;
        let v00 = self.at(ix, ip);
        let v01 = self.at(ix, ip + 1);
        let v10 = self.at(ix + 1, ip);
        let v11 = self.at(ix + 1, ip + 1);
        (1.0 - fx) * ((1.0 - fp) * v00 + fp * v01) + fx * ((1.0 - fp) * v10 + fp * v11)
    }

    pub fn sidecar(&self, success_weight: Option<f64>) -> GridSidecar {
        GridSidecar {
            x_axis: self.x_axis,
            p_axis: self.p_axis,
            norm: self.norm,
            provenance: self.provenance.clone(),
            integral: self.integral(),
            success_weight,
        }
    }

    /// Three-column CSV `x,p,W` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,p,W")?;
        let np = self.p_axis.points;
        for ix in 0..self.x_axis.points {
            let x = self.x_axis.value(ix);
            for ip in 0..np {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", x, self.p_axis.value(ip), self.at(ix, ip))?;
            }
        }
        Ok(())
    }

    /// Parses the CSV written by [`GridWigner::write_csv`] and re-checks the
    /// grid invariants.
    pub fn read_csv<R: BufRead>(reader: R, provenance: impl Into<String>) -> Result<Self> {
        let mut xs: Vec<f64> = Vec::new();
        let mut ps: Vec<f64> = Vec::new();
        let mut vals = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if lineno == 0 && line.trim() == "x,p,W" {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected three columns", lineno + 1)));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)));
            let (x, p, v) = (parse(cols[0])?, parse(cols[1])?, parse(cols[2])?);
            if xs.last() != Some(&x) {
                xs.push(x);
            }
            if xs.len() == 1 {
                ps.push(p);
            }
            vals.push(v);
        }
        if xs.len() < 2 || ps.len() < 2 {
            return Err(Error::Parse("grid needs at least two points per axis".into()));
        }
        let x_axis = Axis::new(xs[0], xs[xs.len() - 1], xs.len())?;
        let p_axis = Axis::new(ps[0], ps[ps.len() - 1], ps.len())?;
        for (axis, samples) in [(&x_axis, &xs), (&p_axis, &ps)] {
            let tol = 1e-9 * axis.step();
            if samples.iter().enumerate().any(|(i, v)| (v - axis.value(i)).abs() > tol) {
                return Err(Error::Parse("axis samples are not uniform".into()));
            }
        }
        Self::new(x_axis, p_axis, vals, provenance)
    }
}

/// Samples `f` on the grid.
pub fn sample_function(f: &dyn WignerFunction, x_axis: Axis, p_axis: Axis) -> Result<GridWigner> {
    let np = p_axis.points;
    let mut values = vec![0.0; x_axis.points * np];
    values.par_chunks_mut(np).enumerate().for_each(|(ix, row)| {
        let x = x_axis.value(ix);
        for (ip, v) in row.iter_mut().enumerate() {
            *v = f.eval(x, p_axis.value(ip));
        }
    });
    GridWigner::new(x_axis, p_axis, values, f.describe())
}

/// Default axis for a state whose support extends to `radius`.
pub fn axis_for_radius(radius: f64, points: usize) -> Result<Axis> {
    Axis::symmetric(radius.max(DEFAULT_GRID_SPAN), points)
}

pub fn gaussian_to_grid(s: &GaussianState, x_axis: Axis, p_axis: Axis) -> Result<GridWigner> {
    let d = s.density()?;
    let sx = d.cov[0][0].sqrt();
    let sp = d.cov[1][1].sqrt();
    let cover = |axis: &Axis, mu: f64, sigma: f64| ((mu - axis.min) / sigma).min((axis.max - mu) / sigma);
    let cx = cover(&x_axis, d.mean[0], sx);
    let cp = cover(&p_axis, d.mean[1], sp);
    if cx < 4.0 || cp < 4.0 {
        return Err(Error::Coverage(format!(
            "axes cover only {:.2}σ in x and {:.2}σ in p (need 4σ)",
            cx, cp
        )));
    }
    sample_function(&d, x_axis, p_axis)
}

/// Even cat on the default grid, widened to ±(2α + 8).
pub fn make_even_cat(alpha: f64) -> Result<GridWigner> {
    let cat = EvenCat::real(alpha)?;
    let axis = axis_for_radius(2.0 * alpha + 8.0, DEFAULT_GRID_POINTS)?;
    sample_function(&cat, axis, axis)
}

pub fn make_fock_wigner(n: usize) -> Result<GridWigner> {
    let axis = Axis::default_axis();
    sample_function(&FockWigner { n }, axis, axis)
}

/// ∫|W| − 1.
pub fn negativity_volume(w: &GridWigner) -> Result<f64> {
    if !w.is_normalized() {
        return Err(Error::InvalidState(format!(
            "negativity needs a normalized grid (integral {})",
            w.integral()
        )));
    }
    let abs: f64 = w.values.iter().map(|v| v.abs()).sum::<f64>() * w.cell();
    Ok((abs - 1.0).max(0.0))
}

/// Pure-state overlap 4π∫W_a W_b, clamped to [0, 1 + 1e−6].
pub fn fidelity_overlap(a: &GridWigner, b: &GridWigner) -> Result<f64> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch("fidelity needs a common grid".into()));
    }
    if !(a.is_normalized() && b.is_normalized()) {
        return Err(Error::InvalidState("fidelity needs normalized grids".into()));
    }
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok((4.0 * PI * s * a.cell()).clamp(0.0, 1.0 + 1e-6))
}

/// Tr ρ² = 4π∫W².
pub fn purity(w: &GridWigner) -> f64 {
    4.0 * PI * w.values.iter().map(|v| v * v).sum::<f64>() * w.cell()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(span: f64, n: usize) -> Axis {
        Axis::symmetric(span, n).unwrap()
    }

    #[test]
    fn vacuum_basics() {
        let v = make_vacuum();
        assert!((v.wigner(&[0.0, 0.0]) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let g = gaussian_to_grid(&v, axis(8.0, 201), axis(8.0, 201)).unwrap();
        assert!((g.integral() - 1.0).abs() < 1e-6);
        assert!((purity(&g) - 1.0).abs() < 1e-6);
        let (_, _, vx, _) = g.moments();
        assert!((vx - 1.0).abs() < 1e-6);
        assert!((v.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn squeezed_states() {
        let s = make_squeezed(1.15).unwrap();
        assert!((s.cov()[(0, 0)] - 9.974182454814718).abs() < 1e-12);
        assert!((s.cov().determinant() - 1.0).abs() < 1e-12);
        assert_eq!(make_squeezed(0.0).unwrap(), make_vacuum());
        let g = gaussian_to_grid(&s, axis(30.0, 601), axis(3.0, 301)).unwrap();
        let (_, _, vx, vp) = g.moments();
        assert!((vx - s.cov()[(0, 0)]).abs() < 1e-4);
        assert!((vp - s.cov()[(1, 1)]).abs() < 1e-4);
    }

    #[test]
    fn squeezed_thermal_guards() {
        assert!(make_squeezed_thermal(0.2, 2000.0).is_ok());
        assert_eq!(make_squeezed_thermal(1.0, 1.0).unwrap(), make_vacuum());
        assert!(matches!(make_squeezed_thermal(0.1, 5.0), Err(Error::InvalidState(_))));
    }

    #[test]
    fn uncertainty_check_rejects_correlated_violation() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.9, 0.9, 1.0]);
        assert!(GaussianState::new(DVector::zeros(2), cov).is_err());
    }

    #[test]
    fn coherent_peak_location_and_coverage() {
        let s = make_coherent(3.0, -2.0).unwrap();
        let g = gaussian_to_grid(&s, axis(10.0, 201), axis(10.0, 201)).unwrap();
        let (x, p) = g.argmax();
        assert!((x - 3.0).abs() < 1e-12 && (p + 2.0).abs() < 1e-12);
        assert!(matches!(
            gaussian_to_grid(&make_vacuum(), axis(3.0, 31), axis(3.0, 31)),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn cat_closed_form() {
        let c = EvenCat::real(2.0).unwrap();
        assert!((c.eval(0.0, 0.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let zero = EvenCat::real(0.0).unwrap();
        let vac = make_vacuum().density().unwrap();
        for &(x, p) in &[(0.3, -1.2), (2.0, 2.0), (-4.0, 0.5)] {
            assert!((zero.eval(x, p) - vac.eval(x, p)).abs() < 1e-12);
        }
        let g = make_even_cat(2.0).unwrap();
        assert!(g.is_normalized());
        assert_eq!(g.x_axis.max, 12.0);
        assert!(g.min_value() < 0.0);
        // a cat along p is the x-cat rotated by a quarter turn
        let q = EvenCat::new(Complex64::new(0.0, 2.0)).unwrap();
        assert!((q.eval(0.4, 3.1) - c.eval(-3.1, 0.4)).abs() < 1e-15);
    }

    #[test]
    fn fock_closed_form() {
        let w1 = make_fock_wigner(1).unwrap();
        assert!(w1.is_normalized());
        assert!((FockWigner { n: 1 }.eval(0.0, 0.0) + 1.0 / (2.0 * PI)).abs() < 1e-15);
        let w0 = make_fock_wigner(0).unwrap();
        let vac = gaussian_to_grid(&make_vacuum(), w0.x_axis, w0.p_axis).unwrap();
        assert!(w0.linf_distance(&vac).unwrap() < 1e-15);
    }

    #[test]
    fn negativity_values() {
        let vac = gaussian_to_grid(&make_vacuum(), axis(8.0, 401), axis(8.0, 401)).unwrap();
        assert!(negativity_volume(&vac).unwrap() < 1e-9);
        let f1 = sample_function(&FockWigner { n: 1 }, axis(8.0, 401), axis(8.0, 401)).unwrap();
        let expect = 2.0 * (2.0 * (-0.5f64).exp() - 1.0);
        assert!((negativity_volume(&f1).unwrap() - expect).abs() < 1e-3);
        let un = GridWigner::new(axis(1.0, 3), axis(1.0, 3), vec![1.0; 9], "ones").unwrap();
        assert!(negativity_volume(&un).is_err());
    }

    #[test]
    fn overlaps() {
        let ax = axis(10.0, 401);
        let vac = gaussian_to_grid(&make_vacuum(), ax, ax).unwrap();
        assert!((fidelity_overlap(&vac, &vac).unwrap() - 1.0).abs() < 1e-6);
        let f1 = sample_function(&FockWigner { n: 1 }, ax, ax).unwrap();
        assert!(fidelity_overlap(&vac, &f1).unwrap() < 1e-6);
        let coh = gaussian_to_grid(&make_coherent(2.0, 0.0).unwrap(), ax, ax).unwrap();
        assert!((fidelity_overlap(&vac, &coh).unwrap() - (-1.0f64).exp()).abs() < 1e-6);
        let other = gaussian_to_grid(&make_vacuum(), axis(9.0, 401), ax).unwrap();
        assert!(matches!(fidelity_overlap(&vac, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn marginals_of_negative_state_are_nonnegative() {
        let g = make_even_cat(2.0).unwrap();
        assert!(g.marginal_x().iter().all(|&v| v > -1e-9));
        assert!(g.marginal_p().iter().all(|&v| v > -1e-9));
    }

    #[test]
    fn csv_round_trip() {
        let g = make_fock_wigner(2).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = GridWigner::read_csv(buf.as_slice(), g.provenance.clone()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn symmetric_axis_is_exactly_symmetric() {
        let a = Axis::default_axis();
        for i in 0..a.points {
            assert_eq!(a.value(i), -a.value(a.points - 1 - i));
        }
        assert_eq!(a.value(200), 0.0);
    }
}
