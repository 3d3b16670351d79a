//! Configuration-driven runs of the torcat protocols.

use std::fmt::Write as _;
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use torcat_core::coupling::{
    g_oe_longitudinal, g_oe_longitudinal_quadrature, length_scaling_exponent, longitudinal_overlap_closed, longitudinal_overlap_quadrature,
    reference_breakdown, OverlapInputs,
};
use torcat_core::fock_oracle::{
    apply_beam_splitter_with_tolerance, apply_povm_and_condition, build_state, build_state_with_tolerance, povm_wigner_oracle, tensor,
    wigner_reconstruct, OracleState,
};
use torcat_core::measurement::{povm_photon_number, ConditioningOptions};
use torcat_core::params::{photon_threshold, thermal_occupation, timescale_warnings, DerivedParams, PhysicalParams, TABULATED_KT};
use torcat_core::phase_space::{make_even_cat, make_fock_wigner, negativity_volume, purity, sample_function, Axis, FockWigner};
use torcat_core::protocols::{
    closed_form_scat, closed_form_sfock, gps_optical_cat, gps_optical_cat_evaluator, mechanical_axes, mechanical_state_prep, optical_function,
    single_pulse_squeeze, single_pulse_squeeze_gaussian, two_pulse_protocol, CatPrepConfig, OpticalInput, PrepOptions, TwoPulseConfig,
};
use torcat_core::{GridWigner, WignerFunction};

pub const DEFAULT_GRID_POINTS: usize = 401;
pub const DEFAULT_GRID_SPAN: f64 = 10.0;
pub const DEFAULT_TRUNCATION: usize = 40;

/// Truncation deficit and beam-splitter leak accepted by the GPS oracle at
/// small truncations, where r = 1.15 squeezing does not fit to 1e−10.
pub const ORACLE_GPS_DEFICIT_TOL: f64 = 1e-3;
pub const ORACLE_GPS_LEAK_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    ParamsReport,
    CouplingReport,
    Squeeze,
    GpsCat,
    MechPrep,
    TwoPulse,
    OracleCheck,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::ParamsReport => "params-report",
            Protocol::CouplingReport => "coupling-report",
            Protocol::Squeeze => "squeeze",
            Protocol::GpsCat => "gps-cat",
            Protocol::MechPrep => "mech-prep",
            Protocol::TwoPulse => "two-pulse",
            Protocol::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpticalInputName {
    Fock1,
    EvenCat,
    Gps,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params_file: PathBuf,
    #[serde(default)]
    pub protocol: Option<Protocol>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Reserved; every computation is deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default)]
    pub grid_span: Option<f64>,
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub n_in: Option<f64>,
    #[serde(default)]
    pub chi: Option<f64>,
    #[serde(default)]
    pub chi1: Option<f64>,
    #[serde(default)]
    pub n_bar: Option<f64>,
    #[serde(default)]
    pub r1: Option<f64>,
    #[serde(default)]
    pub r2: Option<f64>,
    #[serde(default, rename = "T_tap")]
    pub t_tap: Option<f64>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default, rename = "V_theta")]
    pub v_theta: Option<f64>,
    #[serde(default, rename = "V_L")]
    pub v_l: Option<f64>,
    #[serde(default)]
    pub homodyne_outcome_p: Option<f64>,
    #[serde(default)]
    pub optical_input: Option<OpticalInputName>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub use_pulse1_mechanics: Option<bool>,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "torcat", version, about = "Pulsed torsional optomechanics protocol runner")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the configured protocol.
    #[arg(long, value_enum)]
    pub protocol: Option<Protocol>,
    /// Overrides the configured output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Grid points per axis [default: 401].
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Minimum grid half-span in quadrature units [default: 10].
    #[arg(long)]
    pub grid_span: Option<f64>,
    /// Fock truncation for the oracle [default: 40].
    #[arg(long)]
    pub truncation: Option<usize>,
}

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl From<torcat_core::Error> for Failure {
    fn from(e: torcat_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

/// A fully resolved run: config merged with command-line overrides.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: RunConfig,
    pub protocol: Protocol,
    pub output_dir: PathBuf,
    pub params: PhysicalParams,
    pub grid_points: usize,
    pub grid_span: f64,
    pub truncation: usize,
}

/// Reads and checks the configuration without touching the output directory.
pub fn resolve(cli: &Cli) -> Result<Run, Failure> {
    let text = fs::read_to_string(&cli.config).map_err(|e| invalid(format!("config: cannot read {}: {e}", cli.config.display())))?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| invalid(format!("config: {e}")))?;
    let base = cli.config.parent().unwrap_or(Path::new("."));
    let params_path = if config.params_file.is_absolute() {
        config.params_file.clone()
    } else {
        base.join(&config.params_file)
    };
    if config.params_file.as_os_str().is_empty() || !params_path.is_file() {
        return Err(invalid(format!("params_file: {} does not exist", params_path.display())));
    }
    let params = PhysicalParams::load(&params_path).map_err(|e| invalid(format!("params_file: {e}")))?;
    let protocol = cli
        .protocol
        .or(config.protocol)
        .ok_or_else(|| invalid("protocol: not given in the config or on the command line"))?;
    let output_dir = cli
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| invalid("output_dir: not given in the config or on the command line"))?;
    let grid_points = cli.grid_points.or(config.grid_points).unwrap_or(DEFAULT_GRID_POINTS);
    let grid_span = cli.grid_span.or(config.grid_span).unwrap_or(DEFAULT_GRID_SPAN);
    let truncation = cli.truncation.or(config.truncation).unwrap_or(DEFAULT_TRUNCATION);
    if grid_points < 3 {
        return Err(invalid("grid_points: need at least 3"));
    }
    if !(grid_span.is_finite() && grid_span > 0.0) {
        return Err(invalid("grid_span: must be positive"));
    }
    if truncation < 1 {
        return Err(invalid("truncation: must be at least 1"));
    }
    if output_dir.exists() && !output_dir.is_dir() {
        return Err(invalid(format!("output_dir: {} is not a directory", output_dir.display())));
    }
    Ok(Run {
        config,
        protocol,
        output_dir,
        params,
        grid_points,
        grid_span,
        truncation,
    })
}

/// Everything a protocol produces, held in memory until it has succeeded.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub report: Map<String, Value>,
    pub summary: Vec<String>,
    pub grids: Vec<(String, GridWigner, Option<f64>)>,
}

impl Artifacts {
    fn set(&mut self, key: &str, value: impl Serialize) {
        self.report.insert(key.to_string(), serde_json::to_value(value).expect("report values serialize"));
    }

    fn line(&mut self, text: impl Into<String>) {
        self.summary.push(text.into());
    }

    fn grid(&mut self, name: &str, w: GridWigner, weight: Option<f64>) {
        self.grids.push((name.to_string(), w, weight));
    }
}

fn cat_config(c: &RunConfig) -> Result<CatPrepConfig, Failure> {
    let d = CatPrepConfig::default();
    let cfg = CatPrepConfig {
        r1: c.r1.unwrap_or(d.r1),
        r2: c.r2.unwrap_or(d.r2),
        t_tap: match (c.t_tap, c.r1) {
            (Some(t), _) => t,
            (None, Some(r1)) => torcat_core::protocols::optimal_tap(r1)?,
            (None, None) => d.t_tap,
        },
        m: c.m.unwrap_or(d.m),
        eta: c.eta.unwrap_or(d.eta),
        chi: c.chi.unwrap_or(d.chi),
        v_theta: c.v_theta.unwrap_or(d.v_theta),
        v_l: c.v_l.unwrap_or(d.v_l),
        homodyne_outcome_p: c.homodyne_outcome_p.unwrap_or(d.homodyne_outcome_p),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn n_bar_for(run: &Run) -> Result<f64, Failure> {
    match run.config.n_bar {
        Some(n) if n.is_finite() && n >= 0.0 => Ok(n),
        Some(n) => Err(invalid(format!("n_bar: must be non-negative, got {n}"))),
        None => Ok(thermal_occupation(run.params.torsion_freq_omega, run.params.temperature)?),
    }
}

/// Runs the protocol and returns its artifacts without writing anything.
pub fn compute(run: &Run) -> Result<Artifacts, Failure> {
    let mut out = Artifacts::default();
    out.set("protocol", run.protocol.name());
    out.set("seed", run.config.seed);
    out.set("grid_points", run.grid_points);
    out.set("grid_span", run.grid_span);
    out.line(format!("protocol: {}", run.protocol.name()));
    match run.protocol {
        Protocol::ParamsReport => params_report(run, &mut out)?,
        Protocol::CouplingReport => coupling_report(run, &mut out)?,
        Protocol::Squeeze => squeeze(run, &mut out)?,
        Protocol::GpsCat => gps_cat(run, &mut out)?,
        Protocol::MechPrep => mech_prep(run, &mut out)?,
        Protocol::TwoPulse => two_pulse(run, &mut out)?,
        Protocol::OracleCheck => oracle_check(run, &mut out)?,
    }
    Ok(out)
}

fn params_report(run: &Run, out: &mut Artifacts) -> Result<(), Failure> {
    let p = &run.params;
    let threshold = photon_threshold(p.g_coupling, p.cavity_kappa, 1.0)?;
    let n_in = run.config.n_in.unwrap_or(threshold);
    let d = DerivedParams::compute(p, n_in)?;
    let n_bar = thermal_occupation(p.torsion_freq_omega, p.temperature)?;
    out.set("derived", &d);
    out.set("N_in_threshold_chi1", threshold);
    out.set("k_t_tabulated", TABULATED_KT);
    out.set("n_bar_thermal", n_bar);
    out.set("timescale_warnings", timescale_warnings(p));
    out.line(format!("theta_zp = {:.6e} rad", d.theta_zp));
    out.line(format!("I_eff = {:.6e} kg m^2", d.i_eff));
    out.line(format!("k_t = {:.6e} 1/m", d.k_t));
    out.line(format!("chi = {:.6} at N_in = {:.6e}", d.chi, n_in));
    out.line(format!("N_in for chi = 1: {threshold:.6e}"));
    out.line(format!("thermal occupation at {} K: {n_bar:.6e}", p.temperature));
    for w in timescale_warnings(p) {
        out.line(format!("warning: {w}"));
    }
    Ok(())
}

fn coupling_report(run: &Run, out: &mut Artifacts) -> Result<(), Failure> {
    let p = &run.params;
    let threshold = photon_threshold(p.g_coupling, p.cavity_kappa, 1.0)?;
    let d = DerivedParams::compute(p, run.config.n_in.unwrap_or(threshold))?;
    let (breakdown, factor) = reference_breakdown(p, &d)?;
    let inputs = OverlapInputs::from_params(p, &d);
    let closed = longitudinal_overlap_closed(inputs.length, inputs.beta1, inputs.beta2, inputs.k_t);
    let simpson = longitudinal_overlap_quadrature(inputs.length, inputs.beta1, inputs.beta2, inputs.k_t, 20_000);
    let goe = g_oe_longitudinal(inputs.length, inputs.beta1, inputs.beta2, inputs.k_t);
    let goe_num = g_oe_longitudinal_quadrature(inputs.length, inputs.beta1, inputs.beta2, inputs.k_t, 20_001);
    let k40 = 40.0 * std::f64::consts::PI / inputs.length;
    let asymptote = longitudinal_overlap_closed(inputs.length, inputs.beta1, inputs.beta1 - k40, k40);
    let exponent = length_scaling_exponent(p, &d, factor, 1e-3, 1e-2, 12)?;
    out.set("breakdown", breakdown);
    out.set("transverse_factor", factor);
    out.set("overlap_closed", closed);
    out.set("overlap_simpson", simpson);
    out.set("g_oe_closed", goe);
    out.set("g_oe_numeric", goe_num);
    out.set("resonant_overlap_ktL_40pi", asymptote);
    out.set("length_scaling_exponent", exponent);
    out.line(format!("g12 = {:.6} kHz (g12MA = {:.6} kHz)", breakdown.g12() / 1e3, breakdown.g12_ma / 1e3));
    out.line(format!("transverse factor = {factor:.6}"));
    out.line(format!("overlap closed = {closed:.12e}, simpson = {simpson:.12e}"));
    out.line(format!("g_OE = {goe}, numeric = {goe_num:.3e}"));
    out.line(format!("resonant overlap (k_t L = 40 pi) = {asymptote:.6}"));
    out.line(format!("g vs L exponent = {exponent:.4}"));
    Ok(())
}

fn squeeze(run: &Run, out: &mut Artifacts) -> Result<(), Failure> {
    let chi = run.config.chi.unwrap_or(1.0);
    let n_bar = n_bar_for(run)?;
    let formula = single_pulse_squeeze(n_bar, chi)?;
    let pipeline = single_pulse_squeeze_gaussian(n_bar, chi)?;
    out.set("squeeze", formula);
    out.set("squeeze_gaussian_pipeline", pipeline);
    out.set(
        "pipeline_deviation",
        json!({
            "var_theta": (formula.var_theta_out - pipeline.var_theta_out).abs(),
            "var_L": (formula.var_l_out - pipeline.var_l_out).abs(),
        }),
    );
    out.line(format!("n_bar = {n_bar:.6e}, chi = {chi}"));
    out.line(format!("var_theta_out = {:.9e} (1/chi^2 = {:.6e})", formula.var_theta_out, formula.var_theta_asymptotic));
    out.line(format!("var_L_out = {:.9e}", formula.var_l_out));
    out.line(format!("n_eff = {:.6} (asymptotic {:.6})", formula.n_eff, formula.n_eff_asymptotic));
    Ok(())
}

fn describe_state(out: &mut Artifacts, name: &str, w: &GridWigner, weight: f64) -> Result<(), Failure> {
    let neg = negativity_volume(w)?;
    let (mx, mp, vx, vp) = w.moments();
    out.set(
        name,
        json!({
            "negativity_volume": neg,
            "success_weight": weight,
            "min_value": w.min_value(),
            "purity": purity(w),
            "mean": [mx, mp],
            "variance": [vx, vp],
        }),
    );
    out.line(format!("{name}: negativity volume = {neg:.6e}, success weight = {weight:.6e}, min W = {:.6e}", w.min_value()));
    Ok(())
}

fn gps_cat(run: &Run, out: &mut Artifacts) -> Result<(), Failure> {
    let cfg = cat_config(&run.config)?;
    let (ax, ap) = cfg.optical_axes(run.grid_points, run.grid_span)?;
    let r = gps_optical_cat(&cfg, ax, ap, &ConditioningOptions::default())?;
    out.set("config", cfg);
    out.set("quadrature_nodes", r.nodes);
    describe_state(out, "optical", &r.state, r.success_weight)?;
    out.grid("optical", r.state, Some(r.success_weight));
    Ok(())
}

fn mech_prep(run: &Run, out: &mut Artifacts) -> Result<(), Failure> {
    let cfg = cat_config(&run.config)?;
    let input = run.config.optical_input.unwrap_or(OpticalInputName::Fock1);
    let alpha = run.config.alpha.unwrap_or(2.0);
    let mech = cfg.mechanical_state()?;
    let prep = PrepOptions::default();
    out.set("config", cfg);
    out.set("optical_input", input);
    let (state, weight, reference) = match input {
        OpticalInputName::Gps => {
            let (ox, op) = cfg.optical_axes(run.grid_points, run.grid_span)?;
            let (opt, eval) = gps_optical_cat_evaluator(&cfg, ox, op, &ConditioningOptions::default())?;
            describe_state(out, "optical", &opt.state, opt.success_weight)?;
            let (ta, la) = mechanical_axes(eval.support_box(), &mech, cfg.chi, cfg.homodyne_outcome_p, run.grid_points, run.grid_span)?;
            let r = mechanical_state_prep(&eval, &cfg, ta, la, &prep)?;
            out.grid("optical", opt.state, Some(opt.success_weight));
            (r.state, r.success_weight, None)
        }
        OpticalInputName::Fock1 | OpticalInputName::EvenCat => {
            let (optical, reference): (Box<dyn WignerFunction>, Option<Box<dyn WignerFunction>>) = match input {
                OpticalInputName::Fock1 => (
                    Box::new(FockWigner { n: 1 }),
                    Some(Box::new(closed_form_sfock(cfg.v_theta, cfg.v_l)?)),
                ),
                _ => {
                    let f = optical_function(OpticalInput::EvenCat { alpha })?;
                    (Box::new(ArcFn(f)), Some(Box::new(closed_form_scat(cfg.v_theta, cfg.v_l, alpha)?)))
                }
            };
            let [x_lo, x_hi, p_lo, p_hi] = optical.support_box();
            let (ta, la) = mechanical_axes([x_lo, x_hi, p_lo, p_hi], &mech, cfg.chi, cfg.homodyne_outcome_p, run.grid_points, run.grid_span)?;
            let r = mechanical_state_prep(optical.as_ref(), &cfg, ta, la, &prep)?;
            // The closed forms hold for unit coupling and a p = 0 record.
            let reference = if cfg.chi == 1.0 && cfg.homodyne_outcome_p == 0.0 { reference } else { None };
            (r.state, r.success_weight, reference)
        }
    };
    describe_state(out, "mechanical", &state, weight)?;
    if let Some(f) = reference {
        let grid = sample_function(f.as_ref(), state.x_axis, state.p_axis)?;
        let dev = state.linf_distance(&grid)?;
        out.set("closed_form_linf", dev);
        out.line(format!("closed-form L-infinity deviation = {dev:.3e}"));
    }
    out.grid("mechanical", state, Some(weight));
    Ok(())
}

struct ArcFn(std::sync::Arc<dyn WignerFunction>);

impl WignerFunction for ArcFn {
    fn eval(&self, x: f64, p: f64) -> f64 {
        self.0.eval(x, p)
    }
    fn support_radius(&self) -> f64 {
        self.0.support_radius()
    }
    fn describe(&self) -> String {
        self.0.describe()
    }
}

fn two_pulse(run: &Run, out: &mut Artifacts) -> Result<(), Failure> {
    let cat = cat_config(&run.config)?;
    let cfg = TwoPulseConfig {
        cat,
        n_bar: n_bar_for(run)?,
        chi1: run.config.chi1.unwrap_or(1.0),
        use_pulse1_mechanics: run.config.use_pulse1_mechanics.unwrap_or(true),
    };
    let r = two_pulse_protocol(&cfg, run.grid_points, run.grid_span, &ConditioningOptions::default(), &PrepOptions::default())?;
    out.set("config", cfg);
    out.set("pulse1", r.pulse1);
    out.set("pulse1_weight", r.pulse1_weight);
    out.set(
        "mechanical_input_covariance",
        [
            [r.mechanical_input.cov()[(0, 0)], r.mechanical_input.cov()[(0, 1)]],
            [r.mechanical_input.cov()[(1, 0)], r.mechanical_input.cov()[(1, 1)]],
        ],
    );
    out.set("success_weight", r.success_weight);
    out.line(format!("pulse 1: n_eff = {:.6}, var_theta = {:.6e}", r.pulse1.n_eff, r.pulse1.var_theta_out));
    describe_state(out, "optical", &r.optical.state, r.optical.success_weight)?;
    describe_state(out, "mechanical", &r.mechanical.state, r.mechanical.success_weight)?;
    out.line(format!("chained success weight = {:.6e}", r.success_weight));
    out.grid("optical", r.optical.state, Some(r.optical.success_weight));
    out.grid("mechanical", r.mechanical.state, Some(r.mechanical.success_weight));
    Ok(())
}

fn oracle_check(run: &Run, out: &mut Artifacts) -> Result<(), Failure> {
    let n = run.truncation;
    let alpha = run.config.alpha.unwrap_or(2.0);
    let mut checks = Map::new();

    let fock = make_fock_wigner(1)?;
    let w = wigner_reconstruct(&build_state(OracleState::Fock(1), n)?, fock.x_axis, fock.p_axis)?;
    checks.insert("fock1_linf".into(), json!(fock.linf_distance(&w)?));

    let cat = make_even_cat(alpha)?;
    let w = wigner_reconstruct(&build_state(OracleState::EvenCat(Complex64::new(alpha, 0.0)), n)?, cat.x_axis, cat.p_axis)?;
    checks.insert("even_cat_linf".into(), json!(cat.linf_distance(&w)?));

    let cfg = cat_config(&run.config)?;
    let ax = Axis::symmetric(run.grid_span, run.grid_points)?;
    let povm = povm_photon_number(cfg.m, cfg.eta)?;
    let o = povm_wigner_oracle(cfg.m, cfg.eta, n, ax, ax)?;
    let mut dev: f64 = 0.0;
    for ix in 0..ax.points {
        for ip in 0..ax.points {
            dev = dev.max((povm.eval(ax.value(ix), ax.value(ip)) - o.at(ix, ip)).abs());
        }
    }
    checks.insert("povm_linf".into(), json!(dev));

    let (gx, gp) = cfg.optical_axes(run.grid_points, run.grid_span)?;
    let gps = gps_optical_cat(&cfg, gx, gp, &ConditioningOptions::default())?;
    let a = build_state_with_tolerance(OracleState::Squeezed(cfg.r1), n, ORACLE_GPS_DEFICIT_TOL)?;
    let b = build_state_with_tolerance(OracleState::Squeezed(cfg.r2), n, ORACLE_GPS_DEFICIT_TOL)?;
    let mixed = apply_beam_splitter_with_tolerance(&tensor(&a, &b)?, cfg.t_tap, ORACLE_GPS_LEAK_TOL)?;
    let (cond, prob) = apply_povm_and_condition(&mixed, cfg.m, cfg.eta)?;
    let oracle = wigner_reconstruct(&cond, gx, gp)?;
    checks.insert("gps_linf".into(), json!(gps.state.linf_distance(&oracle)?));
    checks.insert("gps_success_weight".into(), json!(gps.success_weight));
    checks.insert("oracle_probability".into(), json!(prob));
    checks.insert("oracle_discarded".into(), json!(mixed.discarded));

    out.set("truncation", n);
    out.set("config", cfg);
    for (k, v) in &checks {
        out.line(format!("{k} = {}", v));
    }
    out.set("checks", Value::Object(checks));
    out.grid("gps", gps.state, Some(gps.success_weight));
    out.grid("oracle_gps", oracle, Some(prob));
    Ok(())
}

/// Serializes every artifact and re-parses each grid before anything is
/// written.
pub fn render(art: &Artifacts) -> Result<Vec<(String, Vec<u8>)>, Failure> {
    let mut files = Vec::new();
    let mut report = art.report.clone();
    let mut grids = Map::new();
    for (name, w, weight) in &art.grids {
        let mut csv = Vec::new();
        w.write_csv(&mut csv)?;
        let back = GridWigner::read_csv(Cursor::new(&csv), w.provenance.clone())?;
        if back.values != w.values || back.x_axis != w.x_axis || back.p_axis != w.p_axis {
            return Err(Failure::Numerical(format!("grid {name} does not survive a CSV round trip")));
        }
        let sidecar = serde_json::to_vec_pretty(&w.sidecar(*weight)).map_err(|e| Failure::Numerical(e.to_string()))?;
        grids.insert(name.clone(), json!(format!("state_{name}.csv")));
        files.push((format!("state_{name}.csv"), csv));
        files.push((format!("state_{name}.json"), sidecar));
    }
    if !grids.is_empty() {
        report.insert("grids".into(), Value::Object(grids));
    }
    let mut report_bytes = serde_json::to_vec_pretty(&Value::Object(report)).map_err(|e| Failure::Numerical(e.to_string()))?;
    report_bytes.push(b'\n');
    files.push(("report.json".into(), report_bytes));
    let mut summary = String::new();
    for line in &art.summary {
        let _ = writeln!(summary, "{line}");
    }
    files.push(("summary.txt".into(), summary.into_bytes()));
    Ok(files)
}

pub fn write(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| invalid(format!("output_dir: cannot create {}: {e}", dir.display())))?;
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| invalid(format!("output_dir: cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Resolve, compute, render, then write; nothing reaches disk on failure.
pub fn execute(cli: &Cli) -> Result<PathBuf, Failure> {
    let run = resolve(cli)?;
    let art = compute(&run)?;
    let files = render(&art)?;
    write(&run.output_dir, &files)?;
    Ok(run.output_dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_named() {
        let err = serde_json::from_str::<RunConfig>(r#"{"params_file": "x.json", "chii": 1.0}"#).unwrap_err();
        assert!(err.to_string().contains("chii"));
    }

    #[test]
    fn protocol_names_round_trip() {
        for p in [
            Protocol::ParamsReport,
            Protocol::CouplingReport,
            Protocol::Squeeze,
            Protocol::GpsCat,
            Protocol::MechPrep,
            Protocol::TwoPulse,
            Protocol::OracleCheck,
        ] {
            let s = serde_json::to_string(&p).unwrap();
            assert_eq!(s, format!("\"{}\"", p.name()));
        }
    }

    #[test]
    fn failures_map_to_exit_codes() {
        let v: Failure = torcat_core::Error::Precondition("x".into()).into();
        assert_eq!(v.exit_code(), 2);
        let n: Failure = torcat_core::Error::Numerical("x".into()).into();
        assert_eq!(n.exit_code(), 3);
    }
}
