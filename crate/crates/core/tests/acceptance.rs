//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! with the measured numbers, its pinned tolerances and its wall time.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torcat_core::coupling::{
    g_oe_longitudinal, g_oe_longitudinal_quadrature, length_scaling_exponent, longitudinal_overlap_closed, longitudinal_overlap_quadrature,
    reference_breakdown,
};
use torcat_core::fock_oracle::{
    apply_beam_splitter_with_tolerance, apply_povm_and_condition, build_state, build_state_with_tolerance, povm_wigner_oracle, tensor,
    wigner_reconstruct, OracleState, POVM_TRUNCATION,
};
use torcat_core::measurement::{
    condition_product_state, povm_homodyne, povm_photon_number, ConditioningOptions, ModeState, DEFAULT_HOMODYNE_SIGMA,
};
use torcat_core::params::{photon_threshold, DerivedParams, PhysicalParams};
use torcat_core::phase_space::{
    gaussian_to_grid, make_coherent, make_even_cat, make_fock_wigner, make_squeezed, make_squeezed_thermal, make_thermal, negativity_volume, sample_function, EvenCat, FockWigner,
};
use torcat_core::protocols::{
    closed_form_scat, closed_form_sfock, condition_mechanics, gps_optical_cat, mechanical_state_prep, single_pulse_squeeze,
    single_pulse_squeeze_gaussian, CatPrepConfig, PrepOptions,
};
use torcat_core::symplectic::{beam_splitter, om_interaction, phase_rotation, single_mode_squeeze};
use torcat_core::{Axis, Error, GridWigner, SymplecticMatrix};

struct Report {
    ok: bool,
    notes: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Self { ok: true, notes: Vec::new() }
    }

    /// Records `value` against `tol` with `value <= tol` as the pass rule.
    fn below(&mut self, label: &str, value: f64, tol: f64) {
        let pass = value <= tol;
        self.ok &= pass;
        self.notes.push(format!("{label} {value:.3e} <= {tol:.0e}{}", if pass { "" } else { " FAILED" }));
    }

    fn above(&mut self, label: &str, value: f64, floor: f64) {
        let pass = value > floor;
        self.ok &= pass;
        self.notes.push(format!("{label} {value:.4e} > {floor:e}{}", if pass { "" } else { " FAILED" }));
    }

    fn rel(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        let dev = (value / target - 1.0).abs();
        let pass = dev <= tol;
        self.ok &= pass;
        self.notes.push(format!("{label} {value:.6e} vs {target:.4e} (rel {dev:.1e} <= {tol}){}", if pass { "" } else { " FAILED" }));
    }
}

fn run(index: usize, name: &str, budget: Duration, body: impl FnOnce(&mut Report)) -> bool {
    let start = Instant::now();
    let mut r = Report::new();
    body(&mut r);
    let took = start.elapsed();
    let in_time = took <= budget;
    let pass = r.ok && in_time;
    let line = format!(
        "[{}] criterion {index} {name}: {}; {:.2} s of {} s budget{}\n",
        if pass { "PASS" } else { "FAIL" },
        r.notes.join("; "),
        took.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { " EXCEEDED" }
    );
    // Written straight to the stream so the line survives test capture.
    let _ = std::io::stderr().write_all(line.as_bytes());
    pass
}

fn grid_povm_linf(m: usize, eta: f64, ax: Axis) -> f64 {
    let povm = povm_photon_number(m, eta).unwrap();
    let oracle = povm_wigner_oracle(m, eta, POVM_TRUNCATION, ax, ax).unwrap();
    let mut e: f64 = 0.0;
    for ix in 0..ax.points {
        for ip in 0..ax.points {
            e = e.max((povm.eval(ax.value(ix), ax.value(ip)) - oracle.at(ix, ip)).abs());
        }
    }
    e
}

fn parameter_chain(r: &mut Report) {
    let p = PhysicalParams::reference();
    let threshold = photon_threshold(p.g_coupling, p.cavity_kappa, 1.0).unwrap();
    let d = DerivedParams::compute(&p, threshold).unwrap();
    r.rel("theta_zp", d.theta_zp, 6.16e-9, 5e-3);
    r.rel("I_eff", d.i_eff, 4.4163e-25, 5e-3);
    r.rel("N_in(chi=1)", threshold, 6.45e7, 1e-2);
}

fn coupling_integrals(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let l = 10f64.powf(rng.gen_range(-5.0..-3.0));
        let b1 = rng.gen_range(0.0..1e7);
        let b2 = rng.gen_range(0.0..1e7);
        let k = 2.0 * PI * rng.gen_range(1..=20) as f64 / l;
        // 25 Simpson intervals per radian at the fastest frequency
        let fastest = (k + b1 + b2) * l;
        let n = ((fastest * 25.0) as usize).max(2000) & !1;
        let c = longitudinal_overlap_closed(l, b1, b2, k);
        let q = longitudinal_overlap_quadrature(l, b1, b2, k, n);
        worst = worst.max((c - q).abs());
    }
    r.below("closed vs Simpson (1000 draws)", worst, 1e-9);

    let mut asym: f64 = 0.0;
    for turns in [20.0, 40.0, 80.0] {
        let l = 1e-3;
        let k = 2.0 * PI * turns / l;
        let v = longitudinal_overlap_closed(l, 5e6 + k, 5e6, k);
        asym = asym.max((v - 0.25).abs());
    }
    r.below("|resonant overlap - 1/4|", asym, 0.01);

    let p = PhysicalParams::reference();
    let d = DerivedParams::compute(&p, 1e8).unwrap();
    let exact = g_oe_longitudinal(p.beam_length_l, p.beta1, p.beta2, d.k_t);
    let numeric = g_oe_longitudinal_quadrature(p.beam_length_l, p.beta1, p.beta2, d.k_t, 20_001);
    r.below("|g_OE|", exact.abs(), 0.0);
    r.below("|g_OE numeric|", numeric.abs(), 1e-12);

    let (_, factor) = reference_breakdown(&p, &d).unwrap();
    let slope = length_scaling_exponent(&p, &d, factor, 1e-3, 1e-2, 12).unwrap();
    r.below("|g-vs-L exponent + 0.5|", (slope + 0.5).abs(), 0.05);
}

fn oracle_certification(r: &mut Report) {
    let mut fock: f64 = 0.0;
    for n in 0..=4 {
        let g = make_fock_wigner(n).unwrap();
        let o = wigner_reconstruct(&build_state(OracleState::Fock(n), 40).unwrap(), g.x_axis, g.p_axis).unwrap();
        fock = fock.max(g.linf_distance(&o).unwrap());
    }
    r.below("Fock n<=4", fock, 1e-6);
    let mut cat: f64 = 0.0;
    for a in [0.5, 1.0, 2.0, 3.0] {
        let g = make_even_cat(a).unwrap();
        let o = wigner_reconstruct(&build_state(OracleState::EvenCat(Complex64::new(a, 0.0)), 60).unwrap(), g.x_axis, g.p_axis).unwrap();
        cat = cat.max(g.linf_distance(&o).unwrap());
    }
    r.below("even cat alpha<=3", cat, 1e-6);
    let ax = Axis::default_axis();
    let mut povm: f64 = 0.0;
    for eta in [0.5, 1.0] {
        for m in 0..=3 {
            povm = povm.max(grid_povm_linf(m, eta, ax));
        }
    }
    r.below("POVM m<=3 eta in {0.5,1} (N=60)", povm, 1e-6);
}

/// Mechanical transfer of an optical state through χ = 1 with a p = 0 record,
/// using a regularized homodyne of width `sigma`.
fn homodyne_transfer(optical: ModeState, mech: &ModeState, sigma: f64, ax: Axis) -> GridWigner {
    condition_product_state(
        optical,
        mech.clone(),
        &om_interaction(1.0).unwrap(),
        povm_homodyne(PI / 2.0, 0.0, sigma).unwrap(),
        0,
        ax,
        ax,
        &ConditioningOptions::default(),
    )
    .unwrap()
    .state
}

fn conditioning_vs_closed_forms(r: &mut Report) {
    let ax = Axis::default_axis();
    let cfg = CatPrepConfig::default();
    let (vt, vl) = (cfg.v_theta, cfg.v_l);
    let prep = PrepOptions::default();

    let fock = mechanical_state_prep(&FockWigner { n: 1 }, &cfg, ax, ax, &prep).unwrap().state;
    let reference = sample_function(&closed_form_sfock(vt, vl).unwrap(), ax, ax).unwrap();
    r.below("single photon vs W_sfock", fock.linf_distance(&reference).unwrap(), 1e-4);

    let cat = EvenCat::new(Complex64::new(0.0, 2.0)).unwrap();
    let out = mechanical_state_prep(&cat, &cfg, ax, ax, &prep).unwrap().state;
    let reference = sample_function(&closed_form_scat(vt, vl, 2.0).unwrap(), ax, ax).unwrap();
    r.below("even cat vs W_scat", out.linf_distance(&reference).unwrap(), 1e-4);

    let mech = ModeState::gaussian(&make_squeezed_thermal(vt, vl).unwrap()).unwrap();
    let fine = homodyne_transfer(ModeState::function(cat), &mech, DEFAULT_HOMODYNE_SIGMA, ax);
    let coarse = homodyne_transfer(ModeState::function(cat), &mech, 2.0 * DEFAULT_HOMODYNE_SIGMA, ax);
    r.below("homodyne sigma=0.025 vs W_scat", fine.linf_distance(&reference).unwrap(), 1e-4);
    r.below("sigma halving 0.05 -> 0.025", fine.linf_distance(&coarse).unwrap(), 1e-4);
}

fn gps_vs_oracle(r: &mut Report) {
    let mut worst: f64 = 0.0;
    let mut neg = Vec::new();
    for m in 0..=3 {
        let cfg = CatPrepConfig { m, ..CatPrepConfig::default() };
        let (ax, ap) = cfg.optical_axes(201, 10.0).unwrap();
        let gps = gps_optical_cat(&cfg, ax, ap, &ConditioningOptions::default()).unwrap();
        let a = build_state_with_tolerance(OracleState::Squeezed(cfg.r1), 40, 1e-3).unwrap();
        let b = build_state_with_tolerance(OracleState::Squeezed(cfg.r2), 40, 1e-3).unwrap();
        let mixed = apply_beam_splitter_with_tolerance(&tensor(&a, &b).unwrap(), cfg.t_tap, 1e-2).unwrap();
        let (cond, _) = apply_povm_and_condition(&mixed, m, cfg.eta).unwrap();
        let oracle = wigner_reconstruct(&cond, ax, ap).unwrap();
        worst = worst.max(gps.state.linf_distance(&oracle).unwrap());
        neg.push(negativity_volume(&gps.state).unwrap());
    }
    r.below("pipeline vs oracle m<=3 (N=40)", worst, 1e-3);
    r.below("m=0 negativity", neg[0], 1e-6);
    for (m, v) in neg.iter().enumerate().skip(1) {
        r.above(&format!("m={m} negativity"), *v, 0.01);
    }
}

fn squeezing(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut dev: f64 = 0.0;
    let mut worst_theta = f64::NEG_INFINITY;
    for _ in 0..100 {
        let n = rng.gen_range(0.0..1e4);
        let chi = rng.gen_range(0.05..5.0);
        let a = single_pulse_squeeze(n, chi).unwrap();
        let b = single_pulse_squeeze_gaussian(n, chi).unwrap();
        dev = dev.max((a.var_theta_out - b.var_theta_out).abs() / a.var_theta_out);
        dev = dev.max((a.var_l_out - b.var_l_out).abs() / a.var_l_out);
        if chi >= 1.0 {
            worst_theta = worst_theta.max(a.var_theta_out);
        }
    }
    r.below("formula vs Gaussian conditioning (rel)", dev, 1e-9);
    r.below("max var_theta_out for chi>=1", worst_theta, 1.0);
    let s = single_pulse_squeeze(1e4, 1.0).unwrap();
    r.below("|n_eff - 70.21|", (s.n_eff - 70.21).abs(), 0.01);
    r.below("n_eff vs asymptote (rel)", (s.n_eff / s.n_eff_asymptotic - 1.0).abs(), 0.01);
}

fn structural_invariants(r: &mut Report) {
    let maps: Vec<SymplecticMatrix> = vec![
        beam_splitter(0.909).unwrap(),
        om_interaction(1.0).unwrap(),
        phase_rotation(0.7, 1, 2).unwrap(),
        beam_splitter(0.3).unwrap().compose(&om_interaction(-2.5).unwrap()).unwrap(),
    ];
    let sym = maps.iter().map(|m| m.symplectic_defect()).fold(0.0, f64::max);
    let sq = single_mode_squeeze(1.15).unwrap().symplectic_defect();
    r.below("symplectic defect", sym.max(sq), 1e-12);

    let ax = Axis::default_axis();
    let cfg = CatPrepConfig::default();
    let (ox, op) = cfg.optical_axes(201, 10.0).unwrap();
    let gps = gps_optical_cat(&cfg, ox, op, &ConditioningOptions::default()).unwrap();
    let mech = mechanical_state_prep(&FockWigner { n: 1 }, &cfg, ax, ax, &PrepOptions::default()).unwrap();
    let mut grids = vec![gps.state.clone(), mech.state.clone(), make_even_cat(2.0).unwrap()];
    for n in 0..=4 {
        grids.push(make_fock_wigner(n).unwrap());
    }
    grids.push(wigner_reconstruct(&build_state(OracleState::Fock(3), 40).unwrap(), ax, ax).unwrap());
    grids.push(sample_function(&closed_form_scat(cfg.v_theta, cfg.v_l, 2.0).unwrap(), ax, ax).unwrap());
    let norm = grids.iter().map(|g| (g.integral() - 1.0).abs()).fold(0.0, f64::max);
    r.below("Wigner norm defect", norm, 1e-6);

    let mut marg = f64::INFINITY;
    for g in &grids {
        for v in g.marginal_x().into_iter().chain(g.marginal_p()) {
            marg = marg.min(v);
        }
    }
    r.above("min marginal", marg, -1e-6);

    // Σ_m Tr ρΠ_m = 1 through the overlap Tr ρΠ = 4π∫W_ρ W_Π.
    let mut povm: f64 = 0.0;
    let states = [make_coherent(1.5, -0.7).unwrap(), make_thermal(0.8).unwrap(), make_squeezed(0.5).unwrap()];
    for eta in [0.5, 1.0] {
        for s in &states {
            let w = gaussian_to_grid(s, ax, ax).unwrap();
            let mut total = 0.0;
            for m in 0..=40 {
                let op = povm_photon_number(m, eta).unwrap();
                let mut acc = 0.0;
                for ix in 0..ax.points {
                    for ip in 0..ax.points {
                        acc += w.at(ix, ip) * op.eval(ax.value(ix), ax.value(ip));
                    }
                }
                total += 4.0 * PI * acc * w.cell();
            }
            povm = povm.max((total - 1.0).abs());
        }
    }
    r.below("POVM completeness", povm, 1e-3);

    // Outcome densities of a single-photon probe on a squeezed mechanical state.
    let probe = make_squeezed_thermal(0.5, 4.0).unwrap();
    let small = Axis::symmetric(20.0, 81).unwrap();
    let outcomes = Axis::symmetric(10.0, 101).unwrap();
    let mut total = 0.0;
    for i in 0..outcomes.points {
        let w = match condition_mechanics(&FockWigner { n: 1 }, &probe, 1.0, outcomes.value(i), small, small, &PrepOptions::default()) {
            Ok(c) => c.success_weight,
            // far tails sit below the reportable weight floor
            Err(Error::ImpossibleOutcome(_)) => 0.0,
            Err(e) => panic!("{e}"),
        };
        let edge = if i == 0 || i + 1 == outcomes.points { 0.5 } else { 1.0 };
        total += edge * w * outcomes.step();
    }
    r.below("homodyne outcome completeness", (total - 1.0).abs(), 1e-3);

    let again = gps_optical_cat(&cfg, ox, op, &ConditioningOptions::default()).unwrap();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    gps.state.write_csv(&mut a).unwrap();
    again.state.write_csv(&mut b).unwrap();
    let same = a == b && gps.success_weight.to_bits() == again.success_weight.to_bits();
    r.below("rerun byte differences", if same { 0.0 } else { 1.0 }, 0.0);
}

#[test]
fn acceptance() {
    let results = [
        run(1, "parameter chain", Duration::from_secs(1), parameter_chain),
        run(2, "coupling integrals", Duration::from_secs(10), coupling_integrals),
        run(3, "closed forms vs Fock oracle", Duration::from_secs(120), oracle_certification),
        run(4, "conditioning vs closed forms", Duration::from_secs(300), conditioning_vs_closed_forms),
        run(5, "GPS cat vs oracle", Duration::from_secs(600), gps_vs_oracle),
        run(6, "squeezing and cooling", Duration::from_secs(1), squeezing),
        run(7, "structural invariants", Duration::from_secs(300), structural_invariants),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
