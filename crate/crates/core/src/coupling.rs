//! Optomechanical coupling integrals for the torsional mode.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::mode_solver::{cosine_mode, mode_square_integral};
use crate::params::{effective_moment_of_inertia, zero_point_angle, DerivedParams, PhysicalParams};
use crate::quadrature::simpson_fn;
use crate::special::sinc;

/// Tabulated contributions in kHz that are carried rather than recomputed.
pub const G12_MB_KHZ: f64 = 0.081;
pub const G11_MB_KHZ: f64 = -0.01;
pub const G22_MB_KHZ: f64 = -0.01;
pub const G_OE_KHZ: f64 = 0.0;
/// Tabulated anisotropy coupling, used as the calibration anchor.
pub const G12_MA_REFERENCE_HZ: f64 = 22e3;

/// Coupling rates in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingBreakdown {
    #[serde(rename = "g12MA")]
    pub g12_ma: f64,
    #[serde(rename = "g11MA")]
    pub g11_ma: f64,
    #[serde(rename = "g22MA")]
    pub g22_ma: f64,
    #[serde(rename = "g12MB")]
    pub g12_mb: f64,
    #[serde(rename = "g11MB")]
    pub g11_mb: f64,
    #[serde(rename = "g22MB")]
    pub g22_mb: f64,
    #[serde(rename = "gOE")]
    pub g_oe: f64,
}

impl CouplingBreakdown {
    /// Anisotropy term from `g12_ma`, the rest from the table. The diagonal
    /// anisotropy terms vanish because the permittivity perturbation only
    /// couples the two orthogonal polarizations.
    pub fn new(g12_ma: f64) -> Self {
        Self {
            g12_ma,
            g11_ma: 0.0,
            g22_ma: 0.0,
            g12_mb: G12_MB_KHZ * 1e3,
            g11_mb: G11_MB_KHZ * 1e3,
            g22_mb: G22_MB_KHZ * 1e3,
            g_oe: G_OE_KHZ * 1e3,
        }
    }

    pub fn g12(&self) -> f64 {
        self.g12_ma + self.g12_mb + self.g_oe
    }

    pub fn g11(&self) -> f64 {
        self.g11_ma + self.g11_mb + self.g_oe
    }

    pub fn g22(&self) -> f64 {
        self.g22_ma + self.g22_mb + self.g_oe
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapInputs {
    #[serde(rename = "L")]
    pub length: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub k_t: f64,
    /// Normalized transverse overlap of the two polarization modes. It also
    /// absorbs the constant prefactors of the coupling integral, so it is
    /// only required to be finite.
    pub transverse_factor: f64,
}

impl OverlapInputs {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("L", self.length)?;
        ensure_finite("beta1", self.beta1)?;
        ensure_finite("beta2", self.beta2)?;
        ensure_finite("k_t", self.k_t)?;
        ensure_finite("transverse_factor", self.transverse_factor)
    }

    /// Reference configuration with unit transverse factor.
    pub fn from_params(p: &PhysicalParams, d: &DerivedParams) -> Self {
        Self {
            length: p.beam_length_l,
            beta1: p.beta1,
            beta2: p.beta2,
            k_t: d.k_t,
            transverse_factor: 1.0,
        }
    }
}

/// (1/L)∫cos(k_t z)cos(β₁z)cos(β₂z)dz over [−L/2, L/2].
pub fn longitudinal_overlap_closed(length: f64, beta1: f64, beta2: f64, k_t: f64) -> f64 {
    let h = 0.5 * length;
    let terms = [
        k_t + beta1 + beta2,
        k_t + beta1 - beta2,
        k_t - beta1 + beta2,
        -k_t + beta1 + beta2,
    ];
    0.25 * terms.iter().map(|w| sinc(w * h)).sum::<f64>()
}

/// Simpson evaluation of the same normalized integral.
pub fn longitudinal_overlap_quadrature(length: f64, beta1: f64, beta2: f64, k_t: f64, intervals: usize) -> f64 {
    let f = |z: f64| (k_t * z).cos() * (beta1 * z).cos() * (beta2 * z).cos();
    simpson_fn(f, -0.5 * length, 0.5 * length, intervals) / length
}

/// The opto-elastic longitudinal integral ∫sin(k_t z)cos(β_i z)cos(β_j z)dz,
/// which vanishes by parity for every input.
pub fn g_oe_longitudinal(_length: f64, _beta_i: f64, _beta_j: f64, _k_t: f64) -> f64 {
    0.0
}

/// Numeric companion of [`g_oe_longitudinal`], normalized by L, on a grid that
/// is exactly symmetric about z = 0.
pub fn g_oe_longitudinal_quadrature(length: f64, beta_i: f64, beta_j: f64, k_t: f64, points: usize) -> f64 {
    let n = points.max(3) | 1;
    let h = length / (n - 1) as f64;
    let mid = (n / 2) as isize;
    let f = |i: usize| {
        let z = (i as isize - mid) as f64 * h;
        (k_t * z).sin() * (beta_i * z).cos() * (beta_j * z).cos()
    };
    let mut acc = f(0) + f(n - 1);
    for i in 1..n - 1 {
        acc += if i % 2 == 1 { 4.0 * f(i) } else { 2.0 * f(i) };
    }
    acc * h / 3.0 / length
}

/// Anisotropy coupling g₁₂ in Hz:
/// θ_zp·δε·√(ω₁ω₂)·T·overlap/(2π), with the mode normalization ∫cos² ≈ L/2.
pub fn g12ma_estimate(theta_zp: f64, delta_eps: f64, omega1: f64, omega2: f64, inputs: &OverlapInputs) -> Result<f64> {
    ensure_positive("theta_zp", theta_zp)?;
    ensure_finite("delta_eps", delta_eps)?;
    ensure_positive("omega1", omega1)?;
    ensure_positive("omega2", omega2)?;
    inputs.validate()?;
    let overlap = longitudinal_overlap_closed(inputs.length, inputs.beta1, inputs.beta2, inputs.k_t);
    let angular = theta_zp * delta_eps * (omega1 * omega2).sqrt() * inputs.transverse_factor * overlap;
    Ok(angular / (2.0 * std::f64::consts::PI))
}

/// Transverse factor that makes `g12ma_estimate` return `target_hz`.
pub fn calibrate_transverse_factor(
    target_hz: f64,
    theta_zp: f64,
    delta_eps: f64,
    omega1: f64,
    omega2: f64,
    inputs: &OverlapInputs,
) -> Result<f64> {
    let unit = OverlapInputs {
        transverse_factor: 1.0,
        ..*inputs
    };
    let g1 = g12ma_estimate(theta_zp, delta_eps, omega1, omega2, &unit)?;
    if g1 == 0.0 {
        return Err(Error::UnreachableTarget("coupling vanishes for every transverse factor".into()));
    }
    Ok(target_hz / g1)
}

/// Reference breakdown with the transverse factor calibrated to the tabulated
/// anisotropy coupling. Returns the breakdown and the factor.
pub fn reference_breakdown(p: &PhysicalParams, d: &DerivedParams) -> Result<(CouplingBreakdown, f64)> {
    let omega = p.optical_omega();
    let base = OverlapInputs::from_params(p, d);
    let factor = calibrate_transverse_factor(G12_MA_REFERENCE_HZ, d.theta_zp, d.delta_eps, omega, omega, &base)?;
    let inputs = OverlapInputs {
        transverse_factor: factor,
        ..base
    };
    let g = g12ma_estimate(d.theta_zp, d.delta_eps, omega, omega, &inputs)?;
    Ok((CouplingBreakdown::new(g), factor))
}

/// Resonance-matched samples over [l_min, l_max]: k_t·L = 2π⌈20L/l_min⌉ and
/// β₂ = β₁ − k_t, log-spaced in L.
pub fn resonant_length_sweep(l_min: f64, l_max: f64, count: usize, beta1: f64, transverse_factor: f64) -> Result<Vec<OverlapInputs>> {
    ensure_positive("l_min", l_min)?;
    ensure_positive("beta1", beta1)?;
    if !(l_max > l_min) || count < 2 {
        return Err(Error::param("l_max", "need l_max > l_min and at least two samples"));
    }
    let ratio = (l_max / l_min).ln();
    Ok((0..count)
        .map(|i| {
            let l = l_min * (ratio * i as f64 / (count - 1) as f64).exp();
            let k_t = 2.0 * std::f64::consts::PI * (20.0 * l / l_min).ceil() / l;
            OverlapInputs {
                length: l,
                beta1,
                beta2: beta1 - k_t,
                k_t,
                transverse_factor,
            }
        })
        .collect())
}

/// Least-squares exponent of g against L over resonance-matched samples.
pub fn scaling_check_g_vs_length(
    samples: &[OverlapInputs],
    theta_zp_of_l: impl Fn(f64) -> f64,
    delta_eps: f64,
    omega1: f64,
    omega2: f64,
) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Precondition("need at least two lengths".into()));
    }
    let mut pts = Vec::with_capacity(samples.len());
    for s in samples {
        s.validate()?;
        let mismatch = (s.beta1 - s.beta2 - s.k_t).abs();
        if mismatch > 1e-6 * s.k_t.abs() || s.k_t * s.length < 10.0 {
            return Err(Error::Precondition(format!(
                "sample at L = {:e} is not resonance matched (|β₁−β₂−k_t| = {mismatch:e}, k_t·L = {:.3})",
                s.length,
                s.k_t * s.length
            )));
        }
        let g = g12ma_estimate(theta_zp_of_l(s.length), delta_eps, omega1, omega2, s)?;
        if !(g.abs() > 0.0) {
            return Err(Error::Numerical(format!("coupling vanishes at L = {:e}", s.length)));
        }
        pts.push((s.length.ln(), g.abs().ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// θ_zp of a beam of the given length vibrating in cos(k_t z), other
/// parameters as in `p`.
pub fn theta_zp_for_length(p: &PhysicalParams, length: f64, k_t: f64) -> Result<f64> {
    let mode = cosine_mode(length, k_t, p.torsion_velocity_ct)?;
    let scaled = PhysicalParams {
        beam_length_l: length,
        ..p.clone()
    };
    let i_eff = effective_moment_of_inertia(&scaled, mode_square_integral(&mode))?;
    zero_point_angle(i_eff, p.torsion_freq_omega)
}

/// Fitted exponent of g₁₂ against beam length over a resonance-matched
/// sweep from `l_min` to `l_max`, with θ_zp recomputed at every length.
pub fn length_scaling_exponent(p: &PhysicalParams, d: &DerivedParams, transverse_factor: f64, l_min: f64, l_max: f64, count: usize) -> Result<f64> {
    let samples = resonant_length_sweep(l_min, l_max, count, p.beta1, transverse_factor)?;
    let mut thetas = Vec::with_capacity(samples.len());
    for s in &samples {
        thetas.push((s.length, theta_zp_for_length(p, s.length, s.k_t)?));
    }
    let lookup = |l: f64| thetas.iter().find(|(len, _)| *len == l).map(|t| t.1).unwrap_or(f64::NAN);
    let omega = p.optical_omega();
    scaling_check_g_vs_length(&samples, lookup, d.delta_eps, omega, omega)
}
