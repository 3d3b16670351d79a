//! Physical constants of the torsional optomechanical system and the
//! quantities derived from them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::mode_solver::{cosine_mode, mode_square_integral};

/// Reduced Planck constant, J·s (exact SI value).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact SI value).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;
/// Each timescale ratio in Ω < 1/τ < κ must exceed this to pass silently.
pub const TIMESCALE_FACTOR: f64 = 5.0;
/// The torsional wavevector as printed in the reference parameter table,
/// which disagrees with Ω/c_t by a factor of two.
pub const TABULATED_KT: f64 = 100.0 * std::f64::consts::PI;

const REFERENCE_JSON: &str = include_str!("../data/reference_params.json");

fn default_g() -> f64 {
    22e3
}
fn default_multiplier() -> f64 {
    10.0
}
fn default_temperature() -> f64 {
    0.1
}

/// All SI inputs. Field names double as the JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub beam_width_a: f64,
    #[serde(rename = "beam_length_L")]
    pub beam_length_l: f64,
    pub mass_density_rho: f64,
    #[serde(rename = "torsion_freq_Omega")]
    pub torsion_freq_omega: f64,
    pub torsion_velocity_ct: f64,
    #[serde(rename = "mech_quality_Qm")]
    pub mech_quality_qm: f64,
    pub cavity_kappa: f64,
    pub wavelength_lambda: f64,
    #[serde(rename = "optical_quality_Qo")]
    pub optical_quality_qo: f64,
    pub eps_xx: f64,
    pub eps_yy: f64,
    pub eps_zz: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub pulse_bandwidth_inv_tau: f64,
    /// Single-photon coupling rate in Hz.
    #[serde(default = "default_g")]
    pub g_coupling: f64,
    /// Moment-of-inertia enhancement for the structures around the beam.
    #[serde(default = "default_multiplier")]
    pub inertia_multiplier: f64,
    /// Bath temperature in K.
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

impl PhysicalParams {
    /// The bundled reference parameter set.
    pub fn reference() -> Self {
        serde_json::from_str(REFERENCE_JSON).expect("bundled reference parameters parse")
    }

    pub fn reference_json() -> &'static str {
        REFERENCE_JSON
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("beam_width_a", self.beam_width_a)?;
        ensure_positive("beam_length_L", self.beam_length_l)?;
        ensure_positive("mass_density_rho", self.mass_density_rho)?;
        ensure_positive("torsion_freq_Omega", self.torsion_freq_omega)?;
        ensure_positive("torsion_velocity_ct", self.torsion_velocity_ct)?;
        ensure_positive("mech_quality_Qm", self.mech_quality_qm)?;
        ensure_positive("cavity_kappa", self.cavity_kappa)?;
        ensure_positive("wavelength_lambda", self.wavelength_lambda)?;
        ensure_positive("optical_quality_Qo", self.optical_quality_qo)?;
        ensure_positive("eps_xx", self.eps_xx)?;
        ensure_positive("eps_yy", self.eps_yy)?;
        ensure_positive("eps_zz", self.eps_zz)?;
        ensure_positive("beta1", self.beta1)?;
        ensure_positive("beta2", self.beta2)?;
        ensure_positive("pulse_bandwidth_inv_tau", self.pulse_bandwidth_inv_tau)?;
        ensure_positive("inertia_multiplier", self.inertia_multiplier)?;
        ensure_positive("temperature", self.temperature)?;
        if !(self.g_coupling.is_finite() && self.g_coupling >= 0.0) {
            return Err(Error::param("g_coupling", "must be non-negative"));
        }
        if self.eps_xx < self.eps_yy {
            return Err(Error::param("eps_xx", "must be at least eps_yy"));
        }
        Ok(())
    }

    /// Optical angular frequency 2πc/λ.
    pub fn optical_omega(&self) -> f64 {
        2.0 * std::f64::consts::PI * C_LIGHT / self.wavelength_lambda
    }

    pub fn delta_eps(&self) -> f64 {
        self.eps_xx - self.eps_yy
    }
}

/// Quantities computed from [`PhysicalParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub k_t: f64,
    #[serde(rename = "I_eff")]
    pub i_eff: f64,
    pub theta_zp: f64,
    pub delta_eps: f64,
    pub g_coupling: f64,
    pub chi: f64,
    /// ∫θ² dz of the mode used for `I_eff`, in m.
    pub mode_sq_integral: f64,
    /// Pulse photon number that `chi` was evaluated at.
    pub n_in: f64,
}

impl DerivedParams {
    /// Runs the whole chain for a pulse of `n_in` photons. The mode entering
    /// `I_eff` is cos(k_t z) with k_t = Ω/c_t.
    pub fn compute(p: &PhysicalParams, n_in: f64) -> Result<Self> {
        p.validate()?;
        let k_t = derive_wavevector(p)?;
        let mode = cosine_mode(p.beam_length_l, k_t, p.torsion_velocity_ct)?;
        let integral = mode_square_integral(&mode);
        let i_eff = effective_moment_of_inertia(p, integral)?;
        let theta_zp = zero_point_angle(i_eff, p.torsion_freq_omega)?;
        let chi = coupling_coefficient_chi(p.g_coupling, p.cavity_kappa, n_in)?;
        Ok(Self {
            k_t,
            i_eff,
            theta_zp,
            delta_eps: p.delta_eps(),
            g_coupling: p.g_coupling,
            chi,
            mode_sq_integral: integral,
            n_in,
        })
    }
}

pub fn derive_wavevector(p: &PhysicalParams) -> Result<f64> {
    ensure_positive("torsion_velocity_ct", p.torsion_velocity_ct)?;
    ensure_positive("torsion_freq_Omega", p.torsion_freq_omega)?;
    Ok(p.torsion_freq_omega / p.torsion_velocity_ct)
}

/// `(multiplier/6)·ρ·a⁴·∫θ²dz`.
pub fn effective_moment_of_inertia(p: &PhysicalParams, mode_sq_integral: f64) -> Result<f64> {
    let l = p.beam_length_l;
    if !(mode_sq_integral > 0.0 && mode_sq_integral <= l * (1.0 + 1e-12)) {
        return Err(Error::param(
            "mode_sq_integral",
            format!("must lie in (0, L], got {mode_sq_integral:e} with L = {l:e}"),
        ));
    }
    ensure_positive("mass_density_rho", p.mass_density_rho)?;
    ensure_positive("beam_width_a", p.beam_width_a)?;
    Ok(p.inertia_multiplier / 6.0 * p.mass_density_rho * p.beam_width_a.powi(4) * mode_sq_integral)
}

pub fn zero_point_angle(i_eff: f64, omega: f64) -> Result<f64> {
    ensure_positive("I_eff", i_eff)?;
    ensure_positive("Omega", omega)?;
    Ok((HBAR / (2.0 * i_eff * omega)).sqrt())
}

/// χ = 8g√N_in/κ with g in Hz and κ in rad/s.
pub fn coupling_coefficient_chi(g: f64, kappa: f64, n_in: f64) -> Result<f64> {
    ensure_positive("kappa", kappa)?;
    if !(g.is_finite() && g >= 0.0) {
        return Err(Error::param("g", "must be non-negative"));
    }
    if !(n_in.is_finite() && n_in >= 0.0) {
        return Err(Error::param("N_in", "must be non-negative"));
    }
    Ok(8.0 * g * n_in.sqrt() / kappa)
}

/// Smallest pulse photon number reaching `chi_target`.
pub fn photon_threshold(g: f64, kappa: f64, chi_target: f64) -> Result<f64> {
    ensure_positive("kappa", kappa)?;
    ensure_positive("chi_target", chi_target)?;
    if g == 0.0 {
        return Err(Error::UnreachableTarget("zero coupling never reaches a positive chi".into()));
    }
    ensure_positive("g", g)?;
    let root = chi_target * kappa / (8.0 * g);
    Ok(root * root)
}

/// Bose occupation of a mode at angular frequency `omega` and temperature `t`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    ensure_positive("omega", omega)?;
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::param("temperature", "must be non-negative"));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (HBAR * omega / (K_B * temperature)).exp_m1())
}

/// Human-readable warnings for the ordering Ω ≪ 1/τ ≪ κ.
pub fn timescale_warnings(p: &PhysicalParams) -> Vec<String> {
    let mut out = Vec::new();
    let pairs = [
        ("1/tau / Omega", p.pulse_bandwidth_inv_tau / p.torsion_freq_omega),
        ("kappa / (1/tau)", p.cavity_kappa / p.pulse_bandwidth_inv_tau),
    ];
    for (name, ratio) in pairs {
        if !(ratio > TIMESCALE_FACTOR) {
            out.push(format!("timescale ratio {name} = {ratio:.3} is not above {TIMESCALE_FACTOR}"));
        }
    }
    out
}
