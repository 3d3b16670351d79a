//! Measurement back-action on two-mode product states.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::phase_space::{Axis, GaussianDensity, GaussianState, GridWigner, WignerFunction};
use crate::quadrature::gauss_legendre;
use crate::special::laguerre;
use crate::symplectic::SymplecticMatrix;

/// Width of the Gaussian that stands in for the homodyne δ-ridge.
pub const DEFAULT_HOMODYNE_SIGMA: f64 = 0.025;
pub const DEFAULT_NODES: usize = 64;
pub const MAX_NODES: usize = 256;
pub const CONVERGENCE_TOL: f64 = 1e-5;
/// Edge values above this fraction of the peak mean the grid clips the state.
pub const EDGE_TOL: f64 = 1e-6;
/// Outcome probabilities below this are indistinguishable from quadrature
/// roundoff and are treated as impossible.
pub const MIN_SUCCESS_WEIGHT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PovmKind {
    PhotonNumber { m: usize, eta: f64 },
    Homodyne { angle_phi: f64, outcome: f64, width_sigma: f64 },
}

/// Wigner function of a POVM element, normalized so that
/// Tr[ρΠ] = 4π∫W_ρ W_Π.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PovmWigner {
    pub kind: PovmKind,
    /// Precomputed (prefactor, Laguerre argument scale, envelope rate) or
    /// (cos φ, sin φ, ridge normalization).
    #[serde(skip)]
    c: [f64; 3],
}

pub fn povm_photon_number(m: usize, eta: f64) -> Result<PovmWigner> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::param("eta", format!("must lie in (0, 1], got {eta}")));
    }
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let pref = sign * eta.powi(m as i32) / (2.0 - eta).powi(1 + m as i32) / (2.0 * PI);
    Ok(PovmWigner {
        kind: PovmKind::PhotonNumber { m, eta },
        c: [pref, 1.0 / (2.0 - eta), eta / (2.0 * (2.0 - eta))],
    })
}

pub fn povm_homodyne(phi: f64, outcome: f64, sigma: f64) -> Result<PovmWigner> {
    ensure_finite("phi", phi)?;
    ensure_finite("outcome", outcome)?;
    ensure_positive("sigma", sigma)?;
    let (s, c) = phi.sin_cos();
    Ok(PovmWigner {
        kind: PovmKind::Homodyne {
            angle_phi: phi,
            outcome,
            width_sigma: sigma,
        },
        c: [c, s, 1.0 / ((2.0 * PI).sqrt() * sigma * 4.0 * PI)],
    })
}

impl PovmWigner {
    #[inline]
    pub fn eval(&self, x: f64, p: f64) -> f64 {
        match self.kind {
            PovmKind::PhotonNumber { m, .. } => {
                let y = x * x + p * p;
                let [pref, scale, rate] = self.c;
                pref * laguerre(m, y * scale) * (-rate * y).exp()
            }
            PovmKind::Homodyne { outcome, width_sigma, .. } => {
                let [c, s, norm] = self.c;
                let u = (x * c + p * s - outcome) / width_sigma;
                norm * (-0.5 * u * u).exp()
            }
        }
    }

    /// (coefficient, exponent) with `eval = coefficient · exp(exponent)`.
    #[inline]
    fn split(&self, x: f64, p: f64) -> (f64, f64) {
        match self.kind {
            PovmKind::PhotonNumber { m, .. } => {
                let y = x * x + p * p;
                let [pref, scale, rate] = self.c;
                (pref * laguerre(m, y * scale), -rate * y)
            }
            PovmKind::Homodyne { outcome, width_sigma, .. } => {
                let [c, s, norm] = self.c;
                let u = (x * c + p * s - outcome) / width_sigma;
                (norm, -0.5 * u * u)
            }
        }
    }

    /// Measurement angle; photon counting is phase-insensitive and reports 0.
    pub fn angle(&self) -> f64 {
        match self.kind {
            PovmKind::PhotonNumber { .. } => 0.0,
            PovmKind::Homodyne { angle_phi, .. } => angle_phi,
        }
    }
}

/// A single-mode input to conditioning.
#[derive(Clone)]
pub enum ModeState {
    Gaussian(GaussianDensity),
    Function(Arc<dyn WignerFunction>),
}

impl ModeState {
    pub fn gaussian(s: &GaussianState) -> Result<Self> {
        Ok(ModeState::Gaussian(s.density()?))
    }

    pub fn function(f: impl WignerFunction + 'static) -> Self {
        ModeState::Function(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: f64, p: f64) -> f64 {
        match self {
            ModeState::Gaussian(g) => g.eval(x, p),
            ModeState::Function(f) => f.eval(x, p),
        }
    }

    #[inline]
    fn split(&self, x: f64, p: f64) -> (f64, f64) {
        match self {
            ModeState::Gaussian(g) => (g.norm(), g.log_kernel(x, p)),
            ModeState::Function(f) => (f.eval(x, p), 0.0),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ModeState::Gaussian(g) => WignerFunction::describe(g),
            ModeState::Function(f) => f.describe(),
        }
    }
}

impl std::fmt::Debug for ModeState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditioningOptions {
    pub nodes: usize,
    pub max_nodes: usize,
    pub convergence_tol: f64,
    /// Half-width of the Gaussian integration frame in standard deviations.
    pub frame_sigmas: f64,
    /// Every `check_stride`-th output point along each axis enters the
    /// node-doubling check.
    pub check_stride: usize,
}

impl Default for ConditioningOptions {
    fn default() -> Self {
        Self {
            nodes: DEFAULT_NODES,
            max_nodes: MAX_NODES,
            convergence_tol: CONVERGENCE_TOL,
            frame_sigmas: 10.0,
            check_stride: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConditionalResult {
    pub state: GridWigner,
    pub success_weight: f64,
    /// Quadrature nodes per axis that passed the convergence check.
    pub nodes: usize,
}

fn block(m: &DMatrix<f64>, row: usize, col: usize) -> Matrix2<f64> {
    Matrix2::new(
        m[(2 * row, 2 * col)],
        m[(2 * row, 2 * col + 1)],
        m[(2 * row + 1, 2 * col)],
        m[(2 * row + 1, 2 * col + 1)],
    )
}

/// Axis-aligned box in the rotated integration coordinates, given as a
/// centre that moves linearly with the output point and fixed half-widths.
#[derive(Debug, Clone, Copy)]
struct MovingBox {
    offset: Vector2<f64>,
    slope: Matrix2<f64>,
    half: Vector2<f64>,
}

impl MovingBox {
    fn at(&self, r: &Vector2<f64>) -> (Vector2<f64>, Vector2<f64>) {
        let c = self.offset + self.slope * r;
        (c - self.half, c + self.half)
    }
}

/// Everything needed to evaluate the unnormalized conditional Wigner
/// function of the kept mode at any point.
#[derive(Debug, Clone)]
pub struct ConditionalKernel {
    states: [ModeState; 2],
    povm: PovmWigner,
    /// Maps from (r_kept, w) to each input mode's argument.
    kept_map: [Matrix2<f64>; 2],
    meas_map: [Matrix2<f64>; 2],
    rotation: Matrix2<f64>,
    boxes: Vec<MovingBox>,
}

impl ConditionalKernel {
    /// `measured` selects which mode (0 or 1) the POVM acts on after `m`.
    pub fn new(first: ModeState, second: ModeState, m: &SymplecticMatrix, povm: PovmWigner, measured: usize, opts: &ConditioningOptions) -> Result<Self> {
        if m.n_modes() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: m.n_modes(),
            });
        }
        if measured > 1 {
            return Err(Error::param("measured", "must be 0 or 1"));
        }
        let kept = 1 - measured;
        let inv = m.inverse();
        let (s, c) = povm.angle().sin_cos();
        let rotation = Matrix2::new(c, -s, s, c);
        let kept_map = [block(inv.matrix(), 0, kept), block(inv.matrix(), 1, kept)];
        let meas_map = [block(inv.matrix(), 0, measured) * rotation, block(inv.matrix(), 1, measured) * rotation];
        let states = [first, second];

        // Gaussian envelope of the integrand over w: exp(−½wᵀAw + wᵀ(h0 − G r)).
        let mut a = Matrix2::<f64>::zeros();
        let mut h0 = Vector2::<f64>::zeros();
        let mut g = Matrix2::<f64>::zeros();
        let mut boxes = Vec::new();
        for f in 0..2 {
            let q = meas_map[f];
            let k = kept_map[f];
            match &states[f] {
                ModeState::Gaussian(d) => {
                    let cov = Matrix2::new(d.cov[0][0], d.cov[0][1], d.cov[1][0], d.cov[1][1]);
                    let prec = cov
                        .try_inverse()
                        .ok_or_else(|| Error::InvalidState("singular Gaussian covariance".into()))?;
                    let mu = Vector2::new(d.mean[0], d.mean[1]);
                    a += q.transpose() * prec * q;
                    h0 += q.transpose() * prec * mu;
                    g += q.transpose() * prec * k;
                }
                ModeState::Function(func) => {
                    let det = q.determinant();
                    let scale = q.norm_squared().max(1e-300);
                    if det.abs() > 1e-12 * scale {
                        let qi = q.try_inverse().expect("checked determinant");
                        let r = func.support_radius();
                        let half = Vector2::new(
                            r * qi.row(0).norm(),
                            r * qi.row(1).norm(),
                        );
                        boxes.push(MovingBox {
                            offset: Vector2::zeros(),
                            slope: -qi * k,
                            half,
                        });
                    }
                }
            }
        }
        match povm.kind {
            PovmKind::PhotonNumber { eta, .. } => {
                a += Matrix2::identity() * (eta / (2.0 - eta));
            }
            PovmKind::Homodyne { outcome, width_sigma, .. } => {
                let p = 1.0 / (width_sigma * width_sigma);
                a[(0, 0)] += p;
                h0[0] += outcome * p;
            }
        }
        let a_det = a.determinant();
        if a_det > 1e-14 * a.norm_squared().max(1e-300) && a[(0, 0)] > 0.0 {
            let cov = a.try_inverse().expect("checked determinant");
            boxes.push(MovingBox {
                offset: cov * h0,
                slope: -cov * g,
                half: Vector2::new(opts.frame_sigmas * cov[(0, 0)].sqrt(), opts.frame_sigmas * cov[(1, 1)].sqrt()),
            });
        } else {
            // A direction with no Gaussian confinement must be bounded by a
            // function's support in both coordinates.
            let bounded = |i: usize| boxes.iter().any(|b| b.half[i].is_finite());
            if boxes.is_empty() || !bounded(0) || !bounded(1) {
                return Err(Error::Coverage("conditioning integrand is not confined in the measured mode".into()));
            }
        }
        Ok(Self {
            states,
            povm,
            kept_map,
            meas_map,
            rotation,
            boxes,
        })
    }

    /// Unnormalized conditional value 4π∫d²r_B W_1 W_2 W_Π at (x, p) of the
    /// kept mode, using an `nodes`×`nodes` Gauss–Legendre rule.
    pub fn raw(&self, x: f64, p: f64, nodes: usize) -> f64 {
        let r = Vector2::new(x, p);
        let mut lo = Vector2::repeat(f64::NEG_INFINITY);
        let mut hi = Vector2::repeat(f64::INFINITY);
        for b in &self.boxes {
            let (l, h) = b.at(&r);
            lo = lo.sup(&l);
            hi = hi.inf(&h);
        }
        if !(lo[0] < hi[0] && lo[1] < hi[1]) {
            return 0.0;
        }
        let rule = gauss_legendre(nodes);
        let (us, wu) = rule.mapped(lo[0], hi[0]);
        let (vs, wv) = rule.mapped(lo[1], hi[1]);
        let base = [self.kept_map[0] * r, self.kept_map[1] * r];
        let (q0, q1, rot) = (self.meas_map[0], self.meas_map[1], self.rotation);
        let mut total = 0.0;
        for (u, wu) in us.iter().zip(&wu) {
            let mut row = 0.0;
            for (v, wv) in vs.iter().zip(&wv) {
                let w = Vector2::new(*u, *v);
                let a0 = base[0] + q0 * w;
                let a1 = base[1] + q1 * w;
                let rb = rot * w;
                let (c0, e0) = self.states[0].split(a0[0], a0[1]);
                let (c1, e1) = self.states[1].split(a1[0], a1[1]);
                let (c2, e2) = self.povm.split(rb[0], rb[1]);
                row += wv * c0 * c1 * c2 * (e0 + e1 + e2).exp();
            }
            total += wu * row;
        }
        4.0 * PI * total
    }

    fn raw_grid(&self, x_axis: &Axis, p_axis: &Axis, nodes: usize) -> Vec<f64> {
        let np = p_axis.points;
        let mut values = vec![0.0; x_axis.points * np];
        values.par_chunks_mut(np).enumerate().for_each(|(ix, row)| {
            let x = x_axis.value(ix);
            for (ip, v) in row.iter_mut().enumerate() {
                *v = self.raw(x, p_axis.value(ip), nodes);
            }
        });
        values
    }

    fn check_points(x_axis: &Axis, p_axis: &Axis, stride: usize) -> Vec<(f64, f64)> {
        let stride = stride.max(1);
        let mut pts = Vec::new();
        for ix in (0..x_axis.points).step_by(stride) {
            for ip in (0..p_axis.points).step_by(stride) {
                pts.push((x_axis.value(ix), p_axis.value(ip)));
            }
        }
        pts
    }

    fn max_change(&self, pts: &[(f64, f64)], nodes: usize) -> f64 {
        pts.par_iter()
            .map(|&(x, p)| (self.raw(x, p, nodes) - self.raw(x, p, 2 * nodes)).abs())
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn edge_ratio(values: &[f64], nx: usize, np: usize) -> f64 {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let mut edge = 0.0f64;
    for ix in 0..nx {
        for ip in 0..np {
            if ix == 0 || ip == 0 || ix == nx - 1 || ip == np - 1 {
                edge = edge.max(values[ix * np + ip].abs());
            }
        }
    }
    edge / peak
}

/// Normalizes a raw conditional grid, checking that it is not clipped.
pub(crate) fn finish_conditional(x_axis: Axis, p_axis: Axis, values: Vec<f64>, provenance: String, nodes: usize) -> Result<ConditionalResult> {
    let cell = x_axis.step() * p_axis.step();
    let weight: f64 = values.iter().sum::<f64>() * cell;
    if !(weight >= MIN_SUCCESS_WEIGHT) || !weight.is_finite() {
        return Err(Error::ImpossibleOutcome(weight));
    }
    let edge = edge_ratio(&values, x_axis.points, p_axis.points);
    if edge > EDGE_TOL {
        return Err(Error::Coverage(format!(
            "conditional state reaches the grid edge at {edge:.2e} of its peak; widen the grid"
        )));
    }
    let values = values.into_iter().map(|v| v / weight).collect();
    let state = GridWigner::new(x_axis, p_axis, values, provenance)?;
    Ok(ConditionalResult {
        state,
        success_weight: weight,
        nodes,
    })
}

/// Conditions the product state `first ⊗ second`, transformed by `m`, on the
/// POVM outcome of mode `measured`, and returns the other mode on the grid.
pub fn condition_product_state(
    first: ModeState,
    second: ModeState,
    m: &SymplecticMatrix,
    povm: PovmWigner,
    measured: usize,
    x_axis: Axis,
    p_axis: Axis,
    opts: &ConditioningOptions,
) -> Result<ConditionalResult> {
    conditional_evaluator(first, second, m, povm, measured, x_axis, p_axis, opts).map(|(r, _)| r)
}

/// Like [`condition_product_state`] but also returns a lazily evaluated,
/// normalized conditional Wigner function usable off the grid.
pub fn conditional_evaluator(
    first: ModeState,
    second: ModeState,
    m: &SymplecticMatrix,
    povm: PovmWigner,
    measured: usize,
    x_axis: Axis,
    p_axis: Axis,
    opts: &ConditioningOptions,
) -> Result<(ConditionalResult, ConditionalEvaluator)> {
    let provenance = format!(
        "conditioned on {:?} of mode {measured} | inputs {} ⊗ {}",
        povm.kind,
        first.describe(),
        second.describe()
    );
    let kernel = ConditionalKernel::new(first, second, m, povm, measured, opts)?;
    let mut nodes = opts.nodes.max(2);
    let mut values = kernel.raw_grid(&x_axis, &p_axis, nodes);
    let cell = x_axis.step() * p_axis.step();
    let weight: f64 = values.iter().sum::<f64>() * cell;
    if !(weight >= MIN_SUCCESS_WEIGHT) {
        return Err(Error::ImpossibleOutcome(weight));
    }
    let pts = ConditionalKernel::check_points(&x_axis, &p_axis, opts.check_stride);
    let start = nodes;
    loop {
        let change = kernel.max_change(&pts, nodes) / weight;
        if change <= opts.convergence_tol {
            break;
        }
        if 2 * nodes > opts.max_nodes {
            return Err(Error::Numerical(format!(
                "conditioning quadrature did not converge: doubling {nodes} nodes changes the state by {change:.2e}"
            )));
        }
        nodes *= 2;
    }
    if nodes != start {
        values = kernel.raw_grid(&x_axis, &p_axis, nodes);
    }
    let result = finish_conditional(x_axis, p_axis, values, provenance, nodes)?;
    let eval = ConditionalEvaluator {
        kernel: Arc::new(kernel),
        nodes,
        weight: result.success_weight,
        peak: result.state.max_value().max(-result.state.min_value()),
        grid: Arc::new(result.state.clone()),
    };
    Ok((result, eval))
}

/// Below this fraction of the peak, grid cells are treated as empty by the
/// lazy evaluator.
pub const SCREEN_TOL: f64 = 1e-12;

/// Normalized conditional Wigner function evaluated on demand. Points inside
/// grid cells whose sampled corners are all negligible return zero without
/// integrating.
#[derive(Debug, Clone)]
pub struct ConditionalEvaluator {
    kernel: Arc<ConditionalKernel>,
    nodes: usize,
    weight: f64,
    peak: f64,
    grid: Arc<GridWigner>,
}

impl ConditionalEvaluator {
    pub fn success_weight(&self) -> f64 {
        self.weight
    }

    pub fn grid(&self) -> &GridWigner {
        &self.grid
    }

    fn negligible(&self, x: f64, p: f64) -> bool {
        let g = &self.grid;
        let tx = (x - g.x_axis.min) / g.x_axis.step();
        let tp = (p - g.p_axis.min) / g.p_axis.step();
        let (nx, np) = (g.x_axis.points, g.p_axis.points);
        if !(tx >= 0.0 && tp >= 0.0 && tx <= (nx - 1) as f64 && tp <= (np - 1) as f64) {
            return false;
        }
        let ix = (tx.floor() as usize).min(nx - 2);
        let ip = (tp.floor() as usize).min(np - 2);
        let peak = self.peak;
        let corners = [g.at(ix, ip), g.at(ix + 1, ip), g.at(ix, ip + 1), g.at(ix + 1, ip + 1)];
        corners.iter().all(|v| v.abs() < SCREEN_TOL * peak)
    }
}

impl WignerFunction for ConditionalEvaluator {
    fn eval(&self, x: f64, p: f64) -> f64 {
        if self.negligible(x, p) {
            return 0.0;
        }
        self.kernel.raw(x, p, self.nodes) / self.weight
    }

    fn support_radius(&self) -> f64 {
        self.grid.support_radius()
    }

    fn support_box(&self) -> [f64; 4] {
        self.grid.support_box()
    }

    fn describe(&self) -> String {
        format!("conditional state ({} nodes)", self.nodes)
    }
}

/// Homodyne conditioning of a two-mode Gaussian state on the exact
/// quadrature outcome u = x cosφ + p sinφ of mode `measured`. Returns the
/// kept mode and the outcome probability density.
pub fn gaussian_homodyne_condition(state: &GaussianState, measured: usize, phi: f64, outcome: f64) -> Result<(GaussianState, f64)> {
    if state.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: state.n_modes(),
        });
    }
    if measured > 1 {
        return Err(Error::param("measured", "must be 0 or 1"));
    }
    ensure_finite("phi", phi)?;
    ensure_finite("outcome", outcome)?;
    let kept = 1 - measured;
    let (s, c) = phi.sin_cos();
    let n = Vector2::new(c, s);
    let cov = state.cov();
    let mean = state.mean();
    let ckk = block(cov, kept, kept);
    let ckb = block(cov, kept, measured);
    let cbb = block(cov, measured, measured);
    let mk = Vector2::new(mean[2 * kept], mean[2 * kept + 1]);
    let mb = Vector2::new(mean[2 * measured], mean[2 * measured + 1]);
    let var_u = (n.transpose() * cbb * n)[(0, 0)];
    let gain = ckb * n / var_u;
    let du = outcome - n.dot(&mb);
    let new_mean = mk + gain * du;
    let new_cov = ckk - gain * (ckb * n).transpose();
    let new_cov = (new_cov + new_cov.transpose()) * 0.5;
    let density = (-0.5 * du * du / var_u).exp() / (2.0 * PI * var_u).sqrt();
    let out = GaussianState::new(
        DVector::from_vec(vec![new_mean[0], new_mean[1]]),
        DMatrix::from_row_slice(2, 2, &[new_cov[(0, 0)], new_cov[(0, 1)], new_cov[(1, 0)], new_cov[(1, 1)]]),
    )?;
    Ok((out, density))
}
