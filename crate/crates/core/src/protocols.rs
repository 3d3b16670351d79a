//! The state-preparation procedures built from the primitives, and the
//! closed-form reference states they are checked against.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::measurement::{
    conditional_evaluator, finish_conditional, gaussian_homodyne_condition, povm_photon_number, ConditionalEvaluator, ConditionalResult,
    ConditioningOptions, ModeState,
};
use crate::phase_space::{
    make_squeezed, make_squeezed_thermal, make_thermal, make_vacuum, sample_function, Axis, GaussianState, GridWigner, WignerFunction,
    SUPPORT_SIGMAS, UNCERTAINTY_TOL,
};
use crate::quadrature::gauss_legendre;
use crate::symplectic::{apply_gaussian, beam_splitter, om_interaction, phase_rotation};

/// Quadrature variances after one pulse with a p_L = 0 homodyne record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeReport {
    pub var_theta_out: f64,
    #[serde(rename = "var_L_out")]
    pub var_l_out: f64,
    pub n_eff: f64,
    pub chi: f64,
    pub n_bar: f64,
    /// Strong-coupling limits 1/χ² and √(n̄/(2χ²)).
    pub var_theta_asymptotic: f64,
    pub n_eff_asymptotic: f64,
}

fn n_eff(var_theta: f64, var_l: f64) -> f64 {
    (0.5 * (var_theta * var_l).sqrt() - 0.5).max(0.0)
}

/// Exact conditional variances for a vacuum optical pulse meeting a thermal
/// mechanical state: var θ = V/(1 + χ²V), var L = V + χ² with V = 2n̄ + 1.
pub fn single_pulse_squeeze(n_bar: f64, chi: f64) -> Result<SqueezeReport> {
    if !(n_bar.is_finite() && n_bar >= 0.0) {
        return Err(Error::param("n_bar", "must be non-negative"));
    }
    ensure_finite("chi", chi)?;
    if chi == 0.0 {
        return Err(Error::param("chi", "no squeezing without coupling"));
    }
    let v = 2.0 * n_bar + 1.0;
    let c2 = chi * chi;
    let var_theta = v / (1.0 + c2 * v);
    let var_l = v + c2;
    Ok(SqueezeReport {
        var_theta_out: var_theta,
        var_l_out: var_l,
        n_eff: n_eff(var_theta, var_l),
        chi,
        n_bar,
        var_theta_asymptotic: 1.0 / c2,
        n_eff_asymptotic: (n_bar / (2.0 * c2)).sqrt(),
    })
}

/// The same pulse computed by transforming the joint Gaussian state and
/// conditioning it on the homodyne outcome. Returns the mechanical state and
/// the outcome probability density.
pub fn pulse_one(n_bar: f64, chi: f64, outcome_p: f64) -> Result<(GaussianState, f64)> {
    let joint = make_vacuum().product(&make_thermal(n_bar)?);
    let out = apply_gaussian(&om_interaction(chi)?, &joint)?;
    gaussian_homodyne_condition(&out, 0, PI / 2.0, outcome_p)
}

pub fn single_pulse_squeeze_gaussian(n_bar: f64, chi: f64) -> Result<SqueezeReport> {
    let formula = single_pulse_squeeze(n_bar, chi)?;
    let (mech, _) = pulse_one(n_bar, chi, 0.0)?;
    let var_theta = mech.cov()[(0, 0)];
    let var_l = mech.cov()[(1, 1)];
    Ok(SqueezeReport {
        var_theta_out: var_theta,
        var_l_out: var_l,
        n_eff: n_eff(var_theta, var_l),
        ..formula
    })
}

/// T = (e^{2r} − 1)/(e^{2r} − e^{−2r}), evaluated as 1/(1 + e^{−2r}).
pub fn optimal_tap(r1: f64) -> Result<f64> {
    ensure_positive("r1", r1)?;
    Ok(1.0 / (1.0 + (-2.0 * r1).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatPrepConfig {
    pub r1: f64,
    pub r2: f64,
    #[serde(rename = "T_tap")]
    pub t_tap: f64,
    pub m: usize,
    pub eta: f64,
    pub chi: f64,
    /// Variance of θ in the mechanical state that meets the second pulse.
    #[serde(rename = "V_theta")]
    pub v_theta: f64,
    /// Variance of L in the mechanical state that meets the second pulse.
    #[serde(rename = "V_L")]
    pub v_l: f64,
    pub homodyne_outcome_p: f64,
}

impl Default for CatPrepConfig {
    fn default() -> Self {
        Self {
            r1: 1.15,
            r2: -1.15,
            t_tap: 1.0 / (1.0 + (-2.3f64).exp()),
            m: 1,
            eta: 1.0,
            chi: 1.0,
            v_theta: 2000.0,
            v_l: 0.2,
            homodyne_outcome_p: 0.0,
        }
    }
}

impl CatPrepConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("r1", self.r1)?;
        ensure_finite("r2", self.r2)?;
        ensure_finite("chi", self.chi)?;
        ensure_finite("homodyne_outcome_p", self.homodyne_outcome_p)?;
        if !(0.0..=1.0).contains(&self.t_tap) {
            return Err(Error::param("T_tap", format!("must lie in [0, 1], got {}", self.t_tap)));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::param("eta", format!("must lie in (0, 1], got {}", self.eta)));
        }
        ensure_positive("V_theta", self.v_theta)?;
        ensure_positive("V_L", self.v_l)?;
        if self.v_theta * self.v_l < 1.0 - UNCERTAINTY_TOL {
            return Err(Error::param("V_theta", "V_theta·V_L violates the uncertainty bound"));
        }
        Ok(())
    }

    pub fn mechanical_state(&self) -> Result<GaussianState> {
        make_squeezed_thermal(self.v_theta, self.v_l)
    }

    /// Quadrature variances of the tapped optical mode before detection.
    pub fn tapped_variances(&self) -> (f64, f64) {
        let t = self.t_tap;
        let vx = t * (2.0 * self.r1).exp() + (1.0 - t) * (2.0 * self.r2).exp();
        let vp = t * (-2.0 * self.r1).exp() + (1.0 - t) * (-2.0 * self.r2).exp();
        (vx, vp)
    }

    /// Axes wide enough for the photon-subtracted output, never narrower
    /// than `min_half_span`.
    pub fn optical_axes(&self, points: usize, min_half_span: f64) -> Result<(Axis, Axis)> {
        let (vx, vp) = self.tapped_variances();
        let reach = 7.0 + (4.0 * self.m as f64 + 2.0).sqrt();
        Ok((
            Axis::symmetric(min_half_span.max(reach * vx.sqrt()), points)?,
            Axis::symmetric(min_half_span.max(reach * vp.sqrt()), points)?,
        ))
    }
}

/// Generalized photon subtraction: two squeezed vacua mixed on a beam
/// splitter, with m photons counted in the second output port.
pub fn gps_optical_cat(cfg: &CatPrepConfig, x_axis: Axis, p_axis: Axis, opts: &ConditioningOptions) -> Result<ConditionalResult> {
    gps_optical_cat_evaluator(cfg, x_axis, p_axis, opts).map(|(r, _)| r)
}

pub fn gps_optical_cat_evaluator(
    cfg: &CatPrepConfig,
    x_axis: Axis,
    p_axis: Axis,
    opts: &ConditioningOptions,
) -> Result<(ConditionalResult, ConditionalEvaluator)> {
    cfg.validate()?;
    conditional_evaluator(
        ModeState::gaussian(&make_squeezed(cfg.r1)?)?,
        ModeState::gaussian(&make_squeezed(cfg.r2)?)?,
        &beam_splitter(cfg.t_tap)?,
        povm_photon_number(cfg.m, cfg.eta)?,
        1,
        x_axis,
        p_axis,
        opts,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrepOptions {
    /// Gauss–Legendre order per panel.
    pub order: usize,
    pub panels: usize,
    pub max_panels: usize,
    pub convergence_tol: f64,
    /// Every `check_stride`-th θ row enters the panel-doubling check.
    pub check_stride: usize,
}

impl Default for PrepOptions {
    fn default() -> Self {
        Self {
            order: 16,
            panels: 8,
            max_panels: 256,
            convergence_tol: 1e-9,
            check_stride: 16,
        }
    }
}

fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for k in 0..panels {
        let (x, w) = rule.mapped(a + k as f64 * h, a + (k + 1) as f64 * h);
        xs.extend(x);
        ws.extend(w);
    }
    (xs, ws)
}

/// Conditional mechanical state after the second pulse:
/// W(θ, L) ∝ ∫dx W_L(x, p + χθ) W_M(θ, L + χx), the homodyne record p_L = p
/// entering as an exact δ. The success weight is the outcome probability
/// density at p.
pub fn condition_mechanics(
    optical: &dyn WignerFunction,
    mechanical: &GaussianState,
    chi: f64,
    outcome_p: f64,
    theta_axis: Axis,
    l_axis: Axis,
    opts: &PrepOptions,
) -> Result<ConditionalResult> {
    ensure_finite("chi", chi)?;
    ensure_finite("homodyne_outcome_p", outcome_p)?;
    if mechanical.n_modes() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: mechanical.n_modes(),
        });
    }
    let dm = mechanical.density()?;
    let [x_lo, x_hi, _, _] = optical.support_box();
    let (mut lo, mut hi) = (x_lo, x_hi);
    if chi != 0.0 {
        // L + χx must fall inside the mechanical L support for some L on the axis.
        let reach = SUPPORT_SIGMAS * dm.cov[1][1].sqrt() + 1.0;
        let mu = dm.mean[1];
        let (a, b) = ((mu - reach - l_axis.max) / chi, (mu + reach - l_axis.min) / chi);
        lo = lo.max(a.min(b));
        hi = hi.min(a.max(b));
    }
    if !(lo < hi) {
        return Err(Error::Coverage("optical and mechanical supports do not overlap on this grid".into()));
    }
    let thetas = theta_axis.values();
    let ls = l_axis.values();
    let row = |theta: f64, xs: &[f64], ws: &[f64]| -> Vec<f64> {
        let f: Vec<f64> = xs.iter().map(|x| optical.eval(*x, outcome_p + chi * theta)).collect();
        ls.iter()
            .map(|l| {
                let mut acc = 0.0;
                for k in 0..xs.len() {
                    if f[k] != 0.0 {
                        acc += ws[k] * f[k] * dm.eval(theta, l + chi * xs[k]);
                    }
                }
                acc
            })
            .collect()
    };
    let grid = |panels: usize| -> Vec<f64> {
        let (xs, ws) = composite_rule(lo, hi, panels, opts.order);
        let rows: Vec<Vec<f64>> = thetas.par_iter().map(|t| row(*t, &xs, &ws)).collect();
        rows.into_iter().flatten().collect()
    };
    let mut panels = opts.panels.max(1);
    let mut values = grid(panels);
    let cell = theta_axis.step() * l_axis.step();
    let weight: f64 = values.iter().sum::<f64>() * cell;
    let sample: Vec<f64> = thetas.iter().step_by(opts.check_stride.max(1)).cloned().collect();
    let start = panels;
    loop {
        let (xs, ws) = composite_rule(lo, hi, panels, opts.order);
        let (xs2, ws2) = composite_rule(lo, hi, 2 * panels, opts.order);
        let change = sample
            .par_iter()
            .map(|t| {
                let a = row(*t, &xs, &ws);
                let b = row(*t, &xs2, &ws2);
                a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0, f64::max)
            / weight.abs().max(f64::MIN_POSITIVE);
        if change <= opts.convergence_tol {
            break;
        }
        if 2 * panels > opts.max_panels {
            return Err(Error::Numerical(format!(
                "mechanical conditioning did not converge: doubling {panels} panels changes the state by {change:.2e}"
            )));
        }
        panels *= 2;
    }
    if panels != start {
        values = grid(panels);
    }
    finish_conditional(
        theta_axis,
        l_axis,
        values,
        format!(
            "mechanical state after homodyne p_L = {outcome_p}, chi = {chi} | optical {} | mechanical {}",
            optical.describe(),
            WignerFunction::describe(&dm)
        ),
        panels * opts.order,
    )
}

/// [`condition_mechanics`] with the mechanical input and coupling taken
/// from `cfg`.
pub fn mechanical_state_prep(
    optical: &dyn WignerFunction,
    cfg: &CatPrepConfig,
    theta_axis: Axis,
    l_axis: Axis,
    opts: &PrepOptions,
) -> Result<ConditionalResult> {
    cfg.validate()?;
    condition_mechanics(optical, &cfg.mechanical_state()?, cfg.chi, cfg.homodyne_outcome_p, theta_axis, l_axis, opts)
}

/// Reference state for a single-photon optical input,
/// ∝ e^{−aθ²/2 − bL²/2}[(1+B)θ² + L²/(1+B) − 1] with a = 1 + 1/V_θ,
/// B = V_L and b = 1/(1+B), where V_θ and V_L are the mechanical input
/// variances (χ = 1, p = 0).
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormSfock {
    a: f64,
    b: f64,
    one_plus_b: f64,
    norm: f64,
}

pub fn closed_form_sfock(var_theta_in: f64, var_l_in: f64) -> Result<ClosedFormSfock> {
    ensure_positive("V_theta", var_theta_in)?;
    ensure_positive("V_L", var_l_in)?;
    let a = 1.0 + 1.0 / var_theta_in;
    let one_plus_b = 1.0 + var_l_in;
    let b = 1.0 / one_plus_b;
    let integral = 2.0 * PI / (a * b).sqrt() * one_plus_b / a;
    Ok(ClosedFormSfock {
        a,
        b,
        one_plus_b,
        norm: 1.0 / integral,
    })
}

impl WignerFunction for ClosedFormSfock {
    fn eval(&self, theta: f64, l: f64) -> f64 {
        let env = (-0.5 * self.a * theta * theta - 0.5 * self.b * l * l).exp();
        self.norm * env * (self.one_plus_b * theta * theta + l * l / self.one_plus_b - 1.0)
    }

    fn support_radius(&self) -> f64 {
        let s = (1.0 / self.a).max(1.0 / self.b).sqrt();
        s * (SUPPORT_SIGMAS + 2.0)
    }

    fn describe(&self) -> String {
        format!("closed-form single-photon transfer (a={}, b={})", self.a, self.b)
    }
}

/// Reference state for an even-cat input of amplitude α along p,
/// ∝ e^{−aθ²/2 − bL²/2}[cos(2αL/(1+B)) + e^{−2α²/(1+B)}cosh(2αθ)].
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormScat {
    a: f64,
    b: f64,
    one_plus_b: f64,
    alpha: f64,
    norm: f64,
}

pub fn closed_form_scat(var_theta_in: f64, var_l_in: f64, alpha: f64) -> Result<ClosedFormScat> {
    ensure_positive("V_theta", var_theta_in)?;
    ensure_positive("V_L", var_l_in)?;
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::param("alpha", "must be non-negative"));
    }
    let a = 1.0 + 1.0 / var_theta_in;
    let one_plus_b = 1.0 + var_l_in;
    let b = 1.0 / one_plus_b;
    let damp = -2.0 * alpha * alpha / one_plus_b;
    // (2π/√(ab)) e^{−2α²/(1+B)}(1 + e^{2α²/a}), kept in log form
    let log_integral = (2.0 * PI / (a * b).sqrt()).ln() + damp + (2.0 * alpha * alpha / a).exp().ln_1p();
    Ok(ClosedFormScat {
        a,
        b,
        one_plus_b,
        alpha,
        norm: (-log_integral).exp(),
    })
}

impl ClosedFormScat {
    /// Fringe period along L.
    pub fn fringe_period(&self) -> f64 {
        PI * self.one_plus_b / self.alpha
    }
}

impl WignerFunction for ClosedFormScat {
    fn eval(&self, theta: f64, l: f64) -> f64 {
        let env = -0.5 * self.a * theta * theta - 0.5 * self.b * l * l;
        let al = self.alpha;
        let damp = -2.0 * al * al / self.one_plus_b;
        let fringe = env.exp() * (2.0 * al * l / self.one_plus_b).cos();
        let blobs = 0.5 * ((env + damp + 2.0 * al * theta).exp() + (env + damp - 2.0 * al * theta).exp());
        self.norm * (fringe + blobs)
    }

    fn support_radius(&self) -> f64 {
        let s = (1.0 / self.a).max(1.0 / self.b).sqrt();
        2.0 * self.alpha / self.a + SUPPORT_SIGMAS * s
    }

    fn describe(&self) -> String {
        format!("closed-form cat transfer (alpha={}, a={}, b={})", self.alpha, self.a, self.b)
    }
}

/// Samples a closed form on a grid and renormalizes on it.
pub fn sample_closed_form(f: &dyn WignerFunction, x_axis: Axis, p_axis: Axis) -> Result<GridWigner> {
    sample_function(f, x_axis, p_axis)
}

/// Optical input for the second pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpticalInput {
    Fock { n: usize },
    /// Even cat with amplitude along p, α = i·alpha.
    EvenCat { alpha: f64 },
    /// Generalized photon subtraction output for the run's configuration.
    Gps,
}

pub fn optical_function(input: OpticalInput) -> Result<Arc<dyn WignerFunction>> {
    Ok(match input {
        OpticalInput::Fock { n } => Arc::new(crate::phase_space::FockWigner { n }),
        OpticalInput::EvenCat { alpha } => Arc::new(crate::phase_space::EvenCat::new(Complex64::new(0.0, alpha))?),
        OpticalInput::Gps => return Err(Error::Precondition("the GPS input is built by the protocol itself".into())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPulseConfig {
    pub cat: CatPrepConfig,
    pub n_bar: f64,
    /// Coupling of the cooling pulse.
    pub chi1: f64,
    /// Take the second pulse's mechanical input from the first pulse rather
    /// than from `cat.v_theta`, `cat.v_l`.
    pub use_pulse1_mechanics: bool,
}

#[derive(Debug, Clone)]
pub struct TwoPulseResult {
    pub pulse1: SqueezeReport,
    pub pulse1_weight: f64,
    pub mechanical_input: GaussianState,
    pub optical: ConditionalResult,
    pub mechanical: ConditionalResult,
    pub success_weight: f64,
}

/// Mechanical output axes that hold the transferred optical state.
pub fn mechanical_axes(optical_box: [f64; 4], mechanical: &GaussianState, chi: f64, outcome_p: f64, points: usize, min_half_span: f64) -> Result<(Axis, Axis)> {
    let [x_lo, x_hi, p_lo, p_hi] = optical_box;
    let s_theta = mechanical.cov()[(0, 0)].sqrt();
    let s_l = mechanical.cov()[(1, 1)].sqrt();
    let mu = mechanical.mean();
    let theta_reach = if chi != 0.0 {
        let t = ((p_lo - outcome_p) / chi).abs().max(((p_hi - outcome_p) / chi).abs());
        t.min(mu[0].abs() + SUPPORT_SIGMAS * s_theta)
    } else {
        mu[0].abs() + SUPPORT_SIGMAS * s_theta
    };
    let l_reach = chi.abs() * x_lo.abs().max(x_hi.abs()) + mu[1].abs() + SUPPORT_SIGMAS * s_l;
    Ok((
        Axis::symmetric(min_half_span.max(theta_reach), points)?,
        Axis::symmetric(min_half_span.max(l_reach), points)?,
    ))
}

/// Cooling pulse, quarter-period free rotation, optical cat preparation and
/// transfer, chained.
pub fn two_pulse_protocol(
    cfg: &TwoPulseConfig,
    points: usize,
    min_half_span: f64,
    cond: &ConditioningOptions,
    prep: &PrepOptions,
) -> Result<TwoPulseResult> {
    cfg.cat.validate()?;
    let pulse1 = single_pulse_squeeze_gaussian(cfg.n_bar, cfg.chi1)?;
    let (cooled, pulse1_weight) = pulse_one(cfg.n_bar, cfg.chi1, 0.0)?;
    let mechanical_input = if cfg.use_pulse1_mechanics {
        apply_gaussian(&phase_rotation(PI / 2.0, 0, 1)?, &cooled)?
    } else {
        cfg.cat.mechanical_state()?
    };
    let (ox, op) = cfg.cat.optical_axes(points, min_half_span)?;
    let (optical, eval) = gps_optical_cat_evaluator(&cfg.cat, ox, op, cond)?;
    let (ta, la) = mechanical_axes(
        eval.support_box(),
        &mechanical_input,
        cfg.cat.chi,
        cfg.cat.homodyne_outcome_p,
        points,
        min_half_span,
    )?;
    let mechanical = condition_mechanics(&eval, &mechanical_input, cfg.cat.chi, cfg.cat.homodyne_outcome_p, ta, la, prep)?;
    let success_weight = pulse1_weight * optical.success_weight * mechanical.success_weight;
    Ok(TwoPulseResult {
        pulse1,
        pulse1_weight,
        mechanical_input,
        optical,
        mechanical,
        success_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{fidelity_overlap, gaussian_to_grid, make_fock_wigner, negativity_volume, EvenCat, FockWigner};

    #[test]
    fn squeeze_reference_numbers() {
        let r = single_pulse_squeeze(1e4, 1.0).unwrap();
        assert!((r.n_eff - 70.2124).abs() < 1e-3, "{}", r.n_eff);
        assert!((r.n_eff - r.n_eff_asymptotic).abs() / r.n_eff_asymptotic < 0.01);
        let z = single_pulse_squeeze(0.0, 1.0).unwrap();
        assert!((z.var_theta_out - 0.5).abs() < 1e-15);
        assert!((z.var_l_out - 2.0).abs() < 1e-15);
        assert!(z.n_eff.abs() < 1e-15);
        assert!(single_pulse_squeeze(1.0, 0.0).is_err());
    }

    #[test]
    fn formula_matches_gaussian_pipeline() {
        for (n, c) in [(0.0, 1.0), (3.5, 0.2), (1e4, 2.0), (417.0, 0.7)] {
            let a = single_pulse_squeeze(n, c).unwrap();
            let b = single_pulse_squeeze_gaussian(n, c).unwrap();
            assert!((a.var_theta_out - b.var_theta_out).abs() < 1e-9);
            assert!((a.var_l_out - b.var_l_out).abs() < 1e-9 * a.var_l_out.max(1.0));
        }
    }

    #[test]
    fn tap_limits() {
        assert!((optimal_tap(1.15).unwrap() - 0.909).abs() < 1e-3);
        assert!((optimal_tap(1e-8).unwrap() - 0.5).abs() < 1e-8);
        assert!((optimal_tap(40.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(optimal_tap(0.0).is_err());
        assert!(optimal_tap(-1.0).is_err());
    }

    #[test]
    fn closed_forms_are_normalized() {
        let ax = Axis::symmetric(14.0, 281).unwrap();
        let s = sample_function(&closed_form_sfock(2000.0, 0.2).unwrap(), ax, ax).unwrap();
        assert!((s.integral() - 1.0).abs() < 1e-9);
        assert!(s.min_value() < 0.0);
        let c = sample_function(&closed_form_scat(2000.0, 0.2, 2.0).unwrap(), ax, ax).unwrap();
        assert!((c.integral() - 1.0).abs() < 1e-9);
        let period = closed_form_scat(2000.0, 0.2, 2.0).unwrap().fringe_period();
        assert!((period - 0.6 * PI).abs() < 1e-12);
        assert!(closed_form_sfock(3.0, 1.0).unwrap().eval(0.0, 0.0) < 0.0);
    }

    #[test]
    fn closed_form_limits() {
        let ax = crate::phase_space::Axis::default_axis();
        let s = sample_function(&closed_form_sfock(1e6, 1e-3).unwrap(), ax, ax).unwrap();
        assert!(fidelity_overlap(&s, &make_fock_wigner(1).unwrap()).unwrap() > 0.999);
        let c = sample_function(&closed_form_scat(1e6, 1e-3, 2.0).unwrap(), ax, ax).unwrap();
        // the p-oriented optical cat lands with its blobs along θ
        let cat = sample_function(&EvenCat::real(2.0).unwrap(), ax, ax).unwrap();
        assert!(fidelity_overlap(&c, &cat).unwrap() > 0.99);
        let g = sample_function(&closed_form_scat(2000.0, 0.2, 0.0).unwrap(), ax, ax).unwrap();
        assert!(negativity_volume(&g).unwrap() < 1e-12);
    }

    #[test]
    fn transfer_reproduces_closed_forms() {
        let ax = Axis::symmetric(10.0, 101).unwrap();
        let mech = make_squeezed_thermal(2000.0, 0.2).unwrap();
        let opts = PrepOptions::default();
        let fock = condition_mechanics(&FockWigner { n: 1 }, &mech, 1.0, 0.0, ax, ax, &opts).unwrap();
        let reference = sample_function(&closed_form_sfock(2000.0, 0.2).unwrap(), ax, ax).unwrap();
        let err = fock.state.linf_distance(&reference).unwrap();
        assert!(err < 1e-6, "{err}");
        let cat = EvenCat::new(Complex64::new(0.0, 2.0)).unwrap();
        let out = condition_mechanics(&cat, &mech, 1.0, 0.0, ax, ax, &opts).unwrap();
        let reference = sample_function(&closed_form_scat(2000.0, 0.2, 2.0).unwrap(), ax, ax).unwrap();
        let err = out.state.linf_distance(&reference).unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn uncoupled_transfer_returns_mechanics() {
        let ax = Axis::symmetric(10.0, 101).unwrap();
        let mech = make_squeezed_thermal(2.0, 0.8).unwrap();
        let out = condition_mechanics(&FockWigner { n: 1 }, &mech, 0.0, 0.3, ax, ax, &PrepOptions::default()).unwrap();
        let reference = gaussian_to_grid(&mech, ax, ax).unwrap();
        assert!(out.state.linf_distance(&reference).unwrap() < 1e-9);
    }

    #[test]
    fn gaussian_transfer_matches_covariance_update() {
        let ax = Axis::symmetric(12.0, 121).unwrap();
        let mech = make_squeezed_thermal(3.0, 1.5).unwrap();
        let vac = make_vacuum();
        let out = condition_mechanics(&vac.density().unwrap(), &mech, 0.8, 0.5, ax, ax, &PrepOptions::default()).unwrap();
        let joint = apply_gaussian(&om_interaction(0.8).unwrap(), &vac.product(&mech)).unwrap();
        let (cond, density) = gaussian_homodyne_condition(&joint, 0, PI / 2.0, 0.5).unwrap();
        let reference = gaussian_to_grid(&cond, ax, ax).unwrap();
        assert!(out.state.linf_distance(&reference).unwrap() < 1e-6);
        assert!((out.success_weight - density).abs() < 1e-6);
    }

    #[test]
    fn config_validation() {
        let mut c = CatPrepConfig::default();
        c.validate().unwrap();
        c.eta = 0.0;
        assert!(c.validate().is_err());
        let c = CatPrepConfig {
            v_theta: 0.1,
            v_l: 0.1,
            ..CatPrepConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
