//! Truncated Fock-space reference implementation. Everything here is
//! computed from operators and density matrices, independently of the
//! phase-space machinery it is used to validate.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ensure_finite, Error, Result};
use crate::phase_space::{Axis, GridWigner};
use crate::special::{assoc_laguerre_all, binomial, ln_factorials};

pub const DEFAULT_TRUNCATION: usize = 40;
pub const POVM_TRUNCATION: usize = 60;
pub const DEFAULT_DEFICIT_TOL: f64 = 1e-10;
pub const DEFAULT_LEAK_TOL: f64 = 1e-8;
/// Smallest outcome probability that conditioning accepts.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleState {
    Vacuum,
    Fock(usize),
    Coherent(Complex64),
    /// Squeezed vacuum with var(x) = e^{2r}.
    Squeezed(f64),
    Thermal(f64),
    EvenCat(Complex64),
}

#[derive(Debug, Clone)]
pub struct FockDensityMatrix {
    pub n_modes: usize,
    pub truncation: usize,
    pub rho: DMatrix<Complex64>,
    /// Largest probability mass discarded by truncation so far.
    pub discarded: f64,
}

impl FockDensityMatrix {
    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Checks Hermiticity (1e−12), unit trace (1e−10) and eigenvalues ≥ −1e−10.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_defect();
        let tr = self.trace();
        if herm > 1e-12 {
            return Err(Error::InvalidState(format!("density matrix not Hermitian ({herm:e})")));
        }
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let ev = self.min_eigenvalue();
        if ev < -1e-10 {
            return Err(Error::InvalidState(format!("negative eigenvalue {ev:e}")));
        }
        Ok(())
    }

    /// Photon-number distribution of a single-mode state.
    pub fn photon_distribution(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|z| z.re).collect()
    }

    /// Quadrature means (x, p) of each mode.
    pub fn quadrature_means(&self) -> Vec<(f64, f64)> {
        let n1 = self.truncation + 1;
        (0..self.n_modes)
            .map(|mode| {
                // ⟨a⟩ = Σ √k ρ_{k, k−1} along the chosen mode
                let mut a = Complex64::new(0.0, 0.0);
                for i in 0..self.dim() {
                    let (k1, k2) = (i / n1, i % n1);
                    let k = if self.n_modes == 1 || mode == 1 { k2 } else { k1 };
                    if k == 0 {
                        continue;
                    }
                    let j = if self.n_modes == 1 || mode == 1 { i - 1 } else { i - n1 };
                    a += self.rho[(i, j)] * (k as f64).sqrt();
                }
                (2.0 * a.re, 2.0 * a.im)
            })
            .collect()
    }

    /// (var x, cov xp, var p) of a single-mode state.
    pub fn quadrature_covariance(&self) -> Result<(f64, f64, f64)> {
        if self.n_modes != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.n_modes,
            });
        }
        let n = self.truncation;
        let mut a = Complex64::new(0.0, 0.0);
        let mut a2 = Complex64::new(0.0, 0.0);
        let mut ada = 0.0;
        for k in 1..=n {
            a += self.rho[(k, k - 1)] * (k as f64).sqrt();
            ada += self.rho[(k, k)].re * k as f64;
            if k >= 2 {
                a2 += self.rho[(k, k - 2)] * ((k * (k - 1)) as f64).sqrt();
            }
        }
        // x = a + a†, p = i(a† − a)
        let ex2 = 2.0 * a2.re + 2.0 * ada + 1.0;
        let ep2 = -2.0 * a2.re + 2.0 * ada + 1.0;
        let exp_sym = 2.0 * a2.im;
        let (mx, mp) = (2.0 * a.re, 2.0 * a.im);
        Ok((ex2 - mx * mx, exp_sym - mx * mp, ep2 - mp * mp))
    }

    /// ⟨a†a⟩ of a single-mode state.
    pub fn mean_photon_number(&self) -> f64 {
        self.photon_distribution().iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}

fn pure(amps: Vec<Complex64>, truncation: usize, deficit: f64) -> FockDensityMatrix {
    let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    let v = nalgebra::DVector::from_vec(amps) / Complex64::new(norm.sqrt(), 0.0);
    FockDensityMatrix {
        n_modes: 1,
        truncation,
        rho: &v * v.adjoint(),
        discarded: deficit,
    }
}

fn coherent_amplitudes(alpha: Complex64, n: usize) -> Vec<Complex64> {
    let mut amps = Vec::with_capacity(n + 1);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    amps.push(c);
    for k in 1..=n {
        c = c * alpha / (k as f64).sqrt();
        amps.push(c);
    }
    amps
}

/// Builds a normalized truncated state, failing when the discarded tail
/// exceeds [`DEFAULT_DEFICIT_TOL`].
pub fn build_state(kind: OracleState, truncation: usize) -> Result<FockDensityMatrix> {
    build_state_with_tolerance(kind, truncation, DEFAULT_DEFICIT_TOL)
}

pub fn build_state_with_tolerance(kind: OracleState, truncation: usize, deficit_tol: f64) -> Result<FockDensityMatrix> {
    let n = truncation;
    let zero = Complex64::new(0.0, 0.0);
    let (state, deficit) = match kind {
        OracleState::Vacuum => build_state_with_tolerance(OracleState::Fock(0), n, deficit_tol).map(|s| (s, 0.0))?,
        OracleState::Fock(k) => {
            if k > n {
                return Err(Error::Truncation(format!("|{k}⟩ does not fit in truncation {n}")));
            }
            let mut amps = vec![zero; n + 1];
            amps[k] = Complex64::new(1.0, 0.0);
            (pure(amps, n, 0.0), 0.0)
        }
        OracleState::Coherent(alpha) => {
            ensure_finite("alpha", alpha.norm())?;
            let amps = coherent_amplitudes(alpha, n);
            let kept: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
            let deficit = (1.0 - kept).max(0.0);
            (pure(amps, n, deficit), deficit)
        }
        OracleState::Squeezed(r) => {
            ensure_finite("r", r)?;
            // ⟨2k|S⟩ = tanh(r)^k √((2k)!)/(2^k k!)/√cosh r
            let t = r.tanh();
            let mut amps = vec![zero; n + 1];
            let mut c = 1.0 / r.cosh().sqrt();
            let mut k = 0usize;
            while 2 * k <= n {
                amps[2 * k] = Complex64::new(c, 0.0);
                let kf = k as f64;
                c *= t * ((2.0 * kf + 1.0) * (2.0 * kf + 2.0)).sqrt() / (2.0 * (kf + 1.0));
                k += 1;
            }
            let kept: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
            let deficit = (1.0 - kept).max(0.0);
            (pure(amps, n, deficit), deficit)
        }
        OracleState::Thermal(nbar) => {
            if !(nbar.is_finite() && nbar >= 0.0) {
                return Err(Error::param("n_bar", "must be non-negative"));
            }
            let q = nbar / (nbar + 1.0);
            let diag: Vec<f64> = (0..=n).map(|k| q.powi(k as i32) / (nbar + 1.0)).collect();
            let deficit = q.powi(n as i32 + 1);
            let total: f64 = diag.iter().sum();
            let rho = DMatrix::from_fn(n + 1, n + 1, |i, j| {
                if i == j {
                    Complex64::new(diag[i] / total, 0.0)
                } else {
                    zero
                }
            });
            (
                FockDensityMatrix {
                    n_modes: 1,
                    truncation: n,
                    rho,
                    discarded: deficit,
                },
                deficit,
            )
        }
        OracleState::EvenCat(alpha) => {
            ensure_finite("alpha", alpha.norm())?;
            let mut amps = coherent_amplitudes(alpha, n);
            for (k, a) in amps.iter_mut().enumerate() {
                *a = if k % 2 == 0 { *a * 2.0 } else { zero };
            }
            let full = 2.0 * (1.0 + (-2.0 * alpha.norm_sqr()).exp());
            let kept: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
            let deficit = (1.0 - kept / full).max(0.0);
            (pure(amps, n, deficit), deficit)
        }
    };
    if deficit > deficit_tol {
        return Err(Error::Truncation(format!(
            "{kind:?} at truncation {n} discards {deficit:.3e} of its norm (tolerance {deficit_tol:e})"
        )));
    }
    Ok(state)
}

/// ρ_A ⊗ ρ_B with index n_A·(N+1) + n_B.
pub fn tensor(a: &FockDensityMatrix, b: &FockDensityMatrix) -> Result<FockDensityMatrix> {
    if a.n_modes != 1 || b.n_modes != 1 || a.truncation != b.truncation {
        return Err(Error::InvalidState("tensor needs two single-mode states of equal truncation".into()));
    }
    Ok(FockDensityMatrix {
        n_modes: 2,
        truncation: a.truncation,
        rho: a.rho.kronecker(&b.rho),
        discarded: a.discarded.max(b.discarded),
    })
}

/// U = exp[θ(a†b − ab†)] restricted to the sector of total photon number
/// `total`, as a real matrix indexed by the mode-A photon number.
fn beam_splitter_sector(total: usize, theta: f64) -> DMatrix<f64> {
    let d = total + 1;
    if d == 1 {
        return DMatrix::identity(1, 1);
    }
    // The generator is real antisymmetric; iG is Hermitian.
    let mut h = DMatrix::<Complex64>::zeros(d, d);
    for p in 0..total {
        let g = (((p + 1) * (total - p)) as f64).sqrt();
        // G[p+1, p] = g, G[p, p+1] = −g
        h[(p + 1, p)] = Complex64::new(0.0, g);
        h[(p, p + 1)] = Complex64::new(0.0, -g);
    }
    let eig = SymmetricEigen::new(h);
    let v = &eig.eigenvectors;
    // exp(θG) = exp(−iθH)
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -theta * l)));
    let u = v * phases * v.adjoint();
    u.map(|z| z.re)
}

/// Conjugates a two-mode state by the beam-splitter unitary whose quadrature
/// action is [`crate::symplectic::beam_splitter`].
pub fn apply_beam_splitter(rho: &FockDensityMatrix, t_tap: f64) -> Result<FockDensityMatrix> {
    apply_beam_splitter_with_tolerance(rho, t_tap, DEFAULT_LEAK_TOL)
}

pub fn apply_beam_splitter_with_tolerance(rho: &FockDensityMatrix, t_tap: f64, leak_tol: f64) -> Result<FockDensityMatrix> {
    if rho.n_modes != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.n_modes,
        });
    }
    if !(0.0..=1.0).contains(&t_tap) {
        return Err(Error::param("T_tap", format!("must lie in [0, 1], got {t_tap}")));
    }
    let n = rho.truncation;
    let n1 = n + 1;
    let theta = t_tap.sqrt().acos();

    // For each sector: the in-range basis (photon numbers of mode A) and the
    // unitary restricted to it.
    let sectors: Vec<(Vec<usize>, DMatrix<f64>)> = (0..=2 * n)
        .into_par_iter()
        .map(|total| {
            let lo = total.saturating_sub(n);
            let hi = total.min(n);
            let idx: Vec<usize> = (lo..=hi).map(|p| p * n1 + (total - p)).collect();
            let full = beam_splitter_sector(total, theta);
            let u = DMatrix::from_fn(hi - lo + 1, hi - lo + 1, |i, j| full[(lo + i, lo + j)]);
            (idx, u)
        })
        .collect();

    let dim = rho.dim();
    let blocks: Vec<Vec<(usize, usize, Complex64)>> = (0..sectors.len())
        .into_par_iter()
        .map(|a| {
            let (ia, ua) = &sectors[a];
            let uac = ua.map(|v| Complex64::new(v, 0.0));
            let mut out = Vec::new();
            for (ib, ub) in &sectors {
                let block = DMatrix::from_fn(ia.len(), ib.len(), |i, j| rho.rho[(ia[i], ib[j])]);
                if block.iter().all(|z| z.norm_sqr() == 0.0) {
                    continue;
                }
                let ubt = ub.transpose().map(|v| Complex64::new(v, 0.0));
                let res = &uac * block * ubt;
                for i in 0..ia.len() {
                    for j in 0..ib.len() {
                        out.push((ia[i], ib[j], res[(i, j)]));
                    }
                }
            }
            out
        })
        .collect();
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for block in blocks {
        for (i, j, v) in block {
            out[(i, j)] = v;
        }
    }
    let leak = 1.0 - out.trace().re;
    if leak > leak_tol {
        return Err(Error::Truncation(format!(
            "beam splitter pushes {leak:.3e} of the norm above truncation {n} (tolerance {leak_tol:e})"
        )));
    }
    let tr = out.trace();
    out /= tr;
    Ok(FockDensityMatrix {
        n_modes: 2,
        truncation: n,
        rho: out,
        discarded: rho.discarded.max(leak),
    })
}

/// Diagonal of Π_m(η) = η^m Σ_k C(k, m)(1−η)^{k−m}|k⟩⟨k|.
pub fn povm_diagonal(m: usize, eta: f64, truncation: usize) -> Result<Vec<f64>> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::param("eta", format!("must lie in (0, 1], got {eta}")));
    }
    Ok((0..=truncation)
        .map(|k| {
            if k < m {
                0.0
            } else {
                binomial(k, m) * eta.powi(m as i32) * (1.0 - eta).powi((k - m) as i32)
            }
        })
        .collect())
}

/// Measures mode B with Π_m(η) and returns the normalized state of mode A
/// together with the outcome probability.
pub fn apply_povm_and_condition(rho: &FockDensityMatrix, m: usize, eta: f64) -> Result<(FockDensityMatrix, f64)> {
    if rho.n_modes != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.n_modes,
        });
    }
    let n = rho.truncation;
    let n1 = n + 1;
    let pi = povm_diagonal(m, eta, n)?;
    let mut out = DMatrix::<Complex64>::zeros(n1, n1);
    for i in 0..n1 {
        for j in 0..n1 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, w) in pi.iter().enumerate() {
                if *w != 0.0 {
                    acc += rho.rho[(i * n1 + k, j * n1 + k)] * *w;
                }
            }
            out[(i, j)] = acc;
        }
    }
    let prob = out.trace().re;
    if !(prob >= MIN_OUTCOME_PROBABILITY) {
        return Err(Error::ImpossibleOutcome(prob));
    }
    out /= Complex64::new(prob, 0.0);
    Ok((
        FockDensityMatrix {
            n_modes: 1,
            truncation: n,
            rho: out,
            discarded: rho.discarded,
        },
        prob,
    ))
}

/// Partial trace over one mode of a two-mode state.
pub fn reduced_state(rho: &FockDensityMatrix, keep: usize) -> Result<FockDensityMatrix> {
    if rho.n_modes != 2 || keep > 1 {
        return Err(Error::InvalidState("reduced_state needs a two-mode state and keep ∈ {0, 1}".into()));
    }
    let n1 = rho.truncation + 1;
    let idx = |kept: usize, traced: usize| if keep == 0 { kept * n1 + traced } else { traced * n1 + kept };
    let out = DMatrix::from_fn(n1, n1, |i, j| (0..n1).map(|k| rho.rho[(idx(i, k), idx(j, k))]).sum());
    Ok(FockDensityMatrix {
        n_modes: 1,
        truncation: rho.truncation,
        rho: out,
        discarded: rho.discarded,
    })
}

/// Sampling of the characteristic function β = βr + iβi on a square grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicGrid {
    pub half_width: f64,
    pub step: f64,
}

impl CharacteristicGrid {
    pub fn points(&self) -> usize {
        2 * (self.half_width / self.step).ceil() as usize + 1
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points();
        let h = (n / 2) as isize;
        (0..n).map(|i| (i as isize - h) as f64 * self.step).collect()
    }

    /// Chooses the grid from the state's moments so that χ has decayed at the
    /// edge and the Wigner period exceeds the state support plus the output
    /// window.
    pub fn for_state(rho: &FockDensityMatrix, x_axis: &Axis, p_axis: &Axis) -> Result<Self> {
        let (vx, _, vp) = rho.quadrature_covariance()?;
        let means = rho.quadrature_means()[0];
        let nbar = rho.mean_photon_number().max(0.0);
        let s_min = vx.min(vp).max(1e-6).sqrt();
        let s_max = vx.max(vp).max(1.0).sqrt();
        let half_width = (9.0 / s_min).max(2.0 * nbar.sqrt() + 9.0);
        let support = means.0.hypot(means.1) + 9.0 * s_max;
        let window = x_axis.half_span().max(p_axis.half_span());
        let period = support + window + 4.0;
        Ok(Self {
            half_width,
            step: 2.0 * PI / period,
        })
    }
}

/// Tr[A D(β)] over the grid for an operator A on the truncated space.
fn characteristic(op: &DMatrix<Complex64>, grid: &CharacteristicGrid) -> (Vec<f64>, Vec<Complex64>) {
    let n = op.nrows() - 1;
    let lnf = ln_factorials(n);
    let betas = grid.values();
    let nb = betas.len();
    let mut chi = vec![Complex64::new(0.0, 0.0); nb * nb];
    chi.par_chunks_mut(nb).enumerate().for_each(|(ia, row)| {
        let br = betas[ia];
        let mut lag = Vec::with_capacity(n + 1);
        for (ib, out) in row.iter_mut().enumerate() {
            let bi = betas[ib];
            let beta = Complex64::new(br, bi);
            let x = beta.norm_sqr();
            let ln_abs = 0.5 * x.ln();
            let unit = if x > 0.0 { beta / x.sqrt() } else { Complex64::new(1.0, 0.0) };
            let mneg = -beta.conj();
            let unit_neg = if x > 0.0 { mneg / x.sqrt() } else { Complex64::new(1.0, 0.0) };
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..=n {
                assoc_laguerre_all(n - a, a, x, &mut lag);
                let pow_ln = if a == 0 { 0.0 } else if x > 0.0 { a as f64 * ln_abs } else { f64::NEG_INFINITY };
                if pow_ln == f64::NEG_INFINITY {
                    continue;
                }
                let up = unit.powi(a as i32);
                let dn = unit_neg.powi(a as i32);
                for (k, l) in lag.iter().enumerate() {
                    // D_{k+a,k} = √(k!/(k+a)!) β^a e^{−x/2} L_k^{(a)}(x), and
                    // D_{k,k+a} the same with (−β*)^a.
                    let mag = (0.5 * (lnf[k] - lnf[k + a]) + pow_ln - 0.5 * x).exp() * l;
                    acc += op[(k, k + a)] * up * mag;
                    if a > 0 {
                        acc += op[(k + a, k)] * dn * mag;
                    }
                }
            }
            *out = acc;
        }
    });
    (betas, chi)
}

/// Wigner function of an arbitrary operator on the truncated space,
/// (1/4π²)∫d²β Tr[A D(β)] e^{i(p βr − x βi)}.
pub fn operator_wigner(op: &DMatrix<Complex64>, x_axis: &Axis, p_axis: &Axis, grid: &CharacteristicGrid) -> Vec<f64> {
    let (betas, chi) = characteristic(op, grid);
    let nb = betas.len();
    let xs = x_axis.values();
    let ps = p_axis.values();
    let chi_m = DMatrix::from_row_slice(nb, nb, &chi);
    // G[a, j] = Σ_b χ[a, b] e^{−i x_j βi_b}
    let ex = DMatrix::from_fn(nb, xs.len(), |b, j| Complex64::from_polar(1.0, -xs[j] * betas[b]));
    let g = chi_m * ex;
    // W[j, k] = Re Σ_a G[a, j] e^{i p_k βr_a}
    let fp = DMatrix::from_fn(nb, ps.len(), |a, k| Complex64::from_polar(1.0, ps[k] * betas[a]));
    let w = g.transpose() * fp;
    let scale = grid.step * grid.step / (4.0 * PI * PI);
    let mut values = Vec::with_capacity(xs.len() * ps.len());
    for j in 0..xs.len() {
        for k in 0..ps.len() {
            values.push(w[(j, k)].re * scale);
        }
    }
    values
}

/// Wigner function of a single-mode state via its characteristic function.
pub fn wigner_reconstruct(rho: &FockDensityMatrix, x_axis: Axis, p_axis: Axis) -> Result<GridWigner> {
    let grid = CharacteristicGrid::for_state(rho, &x_axis, &p_axis)?;
    wigner_reconstruct_with(rho, x_axis, p_axis, &grid)
}

pub fn wigner_reconstruct_with(rho: &FockDensityMatrix, x_axis: Axis, p_axis: Axis, grid: &CharacteristicGrid) -> Result<GridWigner> {
    if rho.n_modes != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: rho.n_modes,
        });
    }
    let values = operator_wigner(&rho.rho, &x_axis, &p_axis, grid);
    let w = GridWigner::new(x_axis, p_axis, values, format!("fock oracle, truncation {}", rho.truncation))?;
    // Only judge the norm when the window holds essentially all of the state.
    let (vx, _, vp) = rho.quadrature_covariance()?;
    let (mx, mp) = rho.quadrature_means()[0];
    let covers = |axis: &Axis, m: f64, v: f64| axis.min <= m - 7.0 * v.sqrt() && axis.max >= m + 7.0 * v.sqrt();
    if covers(&x_axis, mx, vx) && covers(&p_axis, mp, vp) {
        let err = (w.integral() - rho.trace().re).abs();
        if err > 1e-4 {
            return Err(Error::Numerical(format!(
                "characteristic-function resolution too coarse (norm error {err:.3e})"
            )));
        }
    }
    Ok(w)
}

/// Wigner function of the POVM element Π_m(η).
pub fn povm_wigner_oracle(m: usize, eta: f64, truncation: usize, x_axis: Axis, p_axis: Axis) -> Result<GridWigner> {
    let diag = povm_diagonal(m, eta, truncation)?;
    let op = DMatrix::from_fn(truncation + 1, truncation + 1, |i, j| {
        if i == j {
            Complex64::new(diag[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    // Π's Wigner function has Gaussian envelope variance (2−η)/η.
    let var = (2.0 - eta) / eta;
    let support = 9.0 * var.sqrt() + (4.0 * m as f64 + 2.0).sqrt() * var.sqrt();
    let window = x_axis.half_span().max(p_axis.half_span());
    let grid = CharacteristicGrid {
        half_width: 9.0 / (eta / (2.0 - eta)).sqrt().min(1.0) + 9.0,
        step: 2.0 * PI / (support + window + 4.0),
    };
    let values = operator_wigner(&op, &x_axis, &p_axis, &grid);
    let mut w = GridWigner::new(x_axis, p_axis, values, format!("POVM m={m} eta={eta} via fock oracle"))?;
    w.norm = crate::phase_space::NormFlag::Unnormalized;
    Ok(w)
}
