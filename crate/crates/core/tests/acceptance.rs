//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test -p casorati --test acceptance -- --nocapture` to see
//! the per-criterion summary lines.

use casorati::casorati_delta::{
    extremize_hyperplane, hyperplane_extremes, oracle_extremum, ExtremizeConfig, ExtremumKind,
};
use casorati::invariants::{scalar_curvature, scalar_from_identity};
use casorati::slant_model::{random_instance, SlantInstance};
use casorati::verifier::{
    build_equality_case, build_equality_instance, check_bound_with_extremes, check_inequality,
    hessian_spectrum, BoundRequest, CheckOptions,
};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
use std::time::Instant;

struct Criterion {
    name: &'static str,
    passed: bool,
    detail: String,
}

impl Criterion {
    fn report(self) {
        let status = if self.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {}: {}", self.name, self.detail);
        assert!(self.passed, "{}: {}", self.name, self.detail);
    }
}

/// Criterion 1: slack of the generalized bounds stays above -1e-9 over a
/// 1000-instance sweep crossed with five r values.
#[test]
fn c1_inequality_sweep() {
    let start = Instant::now();
    let c_values = [-4.0, 0.0, 4.0];
    let thetas = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3];
    let r_values = [2.0, 6.0, 11.0, 18.0, 30.0];
    let options = CheckOptions::default();
    let mut min_slack = f64::INFINITY;
    let mut checks = 0usize;
    for i in 0..1000u64 {
        let c = c_values[(i % 3) as usize];
        let theta = thetas[((i / 3) % 3) as usize];
        let inst = random_instance(4, 2, c, theta, 1.0, 0x5eed_0000 + i).unwrap();
        let extremes = hyperplane_extremes(inst.sff(), i, &options.extremize).unwrap();
        for r in r_values {
            let report = check_bound_with_extremes(
                &inst,
                BoundRequest::Generalized { r },
                &extremes,
                &options,
            )
            .unwrap();
            min_slack = min_slack.min(report.slack);
            checks += 1;
        }
    }
    Criterion {
        name: "criterion 1 (inequality sweep)",
        passed: min_slack >= -1e-9 && checks == 5000,
        detail: format!(
            "{checks} checks, min slack {min_slack:.3e}, elapsed {:.1?}",
            start.elapsed()
        ),
    }
    .report();
}

/// Criterion 2: built equality cases close the bound and classify as
/// quasi-umbilical with the predicted eigenvalue ratio.
#[test]
fn c2_equality_round_trip() {
    let mut worst_slack: f64 = 0.0;
    let mut worst_ratio_err: f64 = 0.0;
    let mut all_classified = true;
    let mut cases = 0usize;
    for (n, m) in [(4usize, 2usize), (6, 2)] {
        let scale = (n * (n - 1)) as f64;
        for r in [scale / 2.0, scale / 3.0, 2.0 * scale] {
            for a in [0.5, 1.0, 3.0] {
                let inst = build_equality_instance(n, m, 4.0, FRAC_PI_3, r, a).unwrap();
                let report = check_inequality(&inst, r, cases as u64).unwrap();
                worst_slack = worst_slack.max(report.slack.abs());
                all_classified &= report.equality_detected && report.quasi_umbilical;
                let pattern = report.pattern.expect("pattern detected");
                let ratio_err = (pattern.b / pattern.a - scale / r).abs();
                worst_ratio_err = worst_ratio_err.max(ratio_err);
                cases += 1;
            }
        }
    }
    Criterion {
        name: "criterion 2 (equality round-trip)",
        passed: all_classified && worst_slack <= 1e-9 && worst_ratio_err <= 1e-10 && cases == 18,
        detail: format!(
            "{cases} cases, |slack| <= {worst_slack:.3e}, ratio error <= {worst_ratio_err:.3e}"
        ),
    }
    .report();
}

/// Criterion 3: the Gauss-equation scalar curvature and the closed identity
/// agree to 1e-10 relative on 500 random instances.
#[test]
fn c3_two_route_scalar_curvature() {
    let mut worst_rel: f64 = 0.0;
    for i in 0..500u64 {
        let n = if i % 2 == 0 { 4 } else { 6 };
        let c = [-4.0, 0.0, 4.0][(i % 3) as usize];
        let theta = 0.2 + 1.3 * ((i % 29) as f64) / 29.0;
        let inst = random_instance(n, 2, c, theta, 1.0, 0xace_0000 + i).unwrap();
        let direct = scalar_curvature(&inst);
        let identity = scalar_from_identity(&inst);
        let rel = (direct - identity).abs() / (1.0 + direct.abs());
        worst_rel = worst_rel.max(rel);
    }
    Criterion {
        name: "criterion 3 (two-route scalar curvature)",
        passed: worst_rel <= 1e-10,
        detail: format!("500 instances, worst relative gap {worst_rel:.3e}"),
    }
    .report();
}

/// Criterion 4: numeric Hessian spectra match the closed forms, with one
/// zero eigenvalue and a vanishing polynomial at the critical family.
#[test]
fn c4_hessian_spectrum() {
    let mut worst_eig: f64 = 0.0;
    let mut worst_p: f64 = 0.0;
    let mut ok = true;
    for (n, r) in [(4usize, 2.0), (4, 6.0), (4, 11.0), (6, 10.0), (6, 25.0)] {
        let report = hessian_spectrum(n, r).unwrap();
        worst_eig = worst_eig.max(report.max_eig_error);
        worst_p = worst_p.max(report.p_at_critical.abs());
        let zeros = report
            .hessian_eigs
            .iter()
            .filter(|l| l.abs() < 1e-9)
            .count();
        ok &= zeros == 1 && report.hessian_eigs.iter().all(|&l| l >= -1e-9);
    }
    // worked anchor: (n, r) = (4, 6) has the distinct values {0, 7, 10, 20}
    let anchor = hessian_spectrum(4, 6.0).unwrap();
    let mut distinct: Vec<f64> = Vec::new();
    for &eig in &anchor.hessian_eigs {
        if distinct.iter().all(|d| (d - eig).abs() > 1e-6) {
            distinct.push(eig);
        }
    }
    let anchor_ok = distinct.len() == 4
        && [0.0, 7.0, 10.0, 20.0]
            .iter()
            .zip(distinct.iter())
            .all(|(want, got)| (want - got).abs() < 1e-9);
    Criterion {
        name: "criterion 4 (Hessian spectrum)",
        passed: ok && anchor_ok && worst_eig <= 1e-9 && worst_p <= 1e-10,
        detail: format!(
            "5 parameter pairs, eig error <= {worst_eig:.3e}, |P(h_c)| <= {worst_p:.3e}, anchor {distinct:?}"
        ),
    }
    .report();
}

/// Criterion 5: optimizer and grid oracle agree to 1e-6 on random n = 4
/// instances, and coordinate-axis optima are recovered exactly on diagonal
/// equality cases.
#[test]
fn c5_optimizer_vs_oracle() {
    let cfg = ExtremizeConfig::default();
    let mut worst_gap: f64 = 0.0;
    for i in 0..100u64 {
        let inst = random_instance(4, 2, 0.0, FRAC_PI_4, 1.0, 0xface_0000 + i).unwrap();
        for kind in [ExtremumKind::Inf, ExtremumKind::Sup] {
            let opt = extremize_hyperplane(inst.sff(), kind, i, &cfg).unwrap();
            let oracle = oracle_extremum(inst.sff(), kind, 24).unwrap();
            worst_gap = worst_gap.max((opt.value - oracle).abs());
        }
    }

    let mut axes_ok = true;
    for (r, a) in [(6.0, 1.0), (6.0, 0.5), (4.0, 2.0)] {
        let sff = build_equality_case(4, 2, r, a).unwrap();
        let inf = extremize_hyperplane(&sff, ExtremumKind::Inf, 1, &cfg).unwrap();
        // the infimum compresses away the distinguished direction: C(L) = a^2
        axes_ok &= (inf.value - a * a).abs() < 1e-12;
        axes_ok &= (inf.hyperplane.normal()[3].abs() - 1.0).abs() < 1e-9;
        let sup = extremize_hyperplane(&sff, ExtremumKind::Sup, 1, &cfg).unwrap();
        let sup_oracle = oracle_extremum(&sff, ExtremumKind::Sup, 24).unwrap();
        axes_ok &= (sup.value - sup_oracle).abs() < 1e-9;
    }
    Criterion {
        name: "criterion 5 (optimizer vs oracle)",
        passed: worst_gap <= 1e-6 && axes_ok,
        detail: format!(
            "100 instances x 2 kinds, worst gap {worst_gap:.3e}, axis optima exact: {axes_ok}"
        ),
    }
    .report();
}

/// Criterion 6: the scaling relations between the generalized and
/// normalized delta curvatures hold to 1e-10 relative on 200 instances.
#[test]
fn c6_scaling_relations() {
    let mut worst: f64 = 0.0;
    for i in 0..200u64 {
        let c = [-4.0, 0.0, 4.0][(i % 3) as usize];
        let inst = random_instance(4, 2, c, FRAC_PI_3, 1.0, 0xbeef_0000 + i).unwrap();
        let (g50, g51) = casorati::casorati_delta::check_scaling_relations(&inst, i).unwrap();
        // relative to the magnitude of the quantities being compared
        let report =
            casorati::delta_casorati(&inst, 6.0, casorati::DeltaConvention::Standard, i).unwrap();
        let scale = 1.0 + 12.0 * report.delta_small.abs();
        worst = worst.max(g50 / scale).max(g51 / scale);
    }
    Criterion {
        name: "criterion 6 (scaling relations)",
        passed: worst <= 1e-10,
        detail: format!("200 instances, worst relative gap {worst:.3e}"),
    }
    .report();
}

/// Criterion 7: the analytic sphere gradient of C(u^perp) matches central
/// finite differences with step 1e-5 to 1e-6 relative.
#[test]
fn c7_gradient_check() {
    let mut worst_rel: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6ead5eed);
    for i in 0..50u64 {
        let inst = random_instance(4, 2, 0.0, FRAC_PI_4, 1.0, 0xdead_0000 + i).unwrap();
        let u = DVector::<f64>::from_fn(4, |_, _| StandardNormal.sample(&mut rng)).normalize();
        let grad = casorati::casorati_delta::hyperplane_objective_gradient(inst.sff(), &u);
        let t = DVector::<f64>::from_fn(4, |_, _| StandardNormal.sample(&mut rng));
        let t = (&t - &u * u.dot(&t)).normalize();
        let h = 1e-5;
        let plus =
            casorati::casorati_delta::hyperplane_objective(inst.sff(), &(&u + &t * h).normalize());
        let minus =
            casorati::casorati_delta::hyperplane_objective(inst.sff(), &(&u - &t * h).normalize());
        let fd = (plus - minus) / (2.0 * h);
        let rel = (grad.dot(&t) - fd).abs() / (1.0 + fd.abs());
        worst_rel = worst_rel.max(rel);
    }
    Criterion {
        name: "criterion 7 (gradient check)",
        passed: worst_rel <= 1e-6,
        detail: format!("50 pairs, worst relative gap {worst_rel:.3e}"),
    }
    .report();
}

/// Criterion 8: perturbing one off-diagonal entry of an equality case by
/// epsilon produces positive slack scaling as epsilon^2 within a factor of 2.
#[test]
fn c8_perturbation_sharpness() {
    let base = build_equality_case(4, 2, 6.0, 1.0).unwrap();
    let mut slacks = Vec::new();
    for k in 1..=6u32 {
        let eps = 10f64.powi(-(k as i32));
        let mut sff = base.clone();
        sff.set(0, 0, 1, eps);
        let inst = SlantInstance::new(4, 2, 0.0, FRAC_PI_4, sff).unwrap();
        let report = check_inequality(&inst, 6.0, k as u64).unwrap();
        slacks.push((eps, report.slack));
    }
    let all_positive = slacks.iter().all(|&(_, s)| s > 0.0);
    // quadratic coefficient estimated from the largest perturbation; the
    // hand-derived value for (n, r) = (4, 6) is 2(n+r)/(rn) = 5/6
    let kappa = slacks[0].1 / (slacks[0].0 * slacks[0].0);
    let mut scaling_ok = (kappa - 5.0 / 6.0).abs() < 0.5 * 5.0 / 6.0;
    for &(eps, slack) in &slacks[1..] {
        let predicted = kappa * eps * eps;
        scaling_ok &= slack >= predicted / 2.0 && slack <= predicted * 2.0;
    }
    Criterion {
        name: "criterion 8 (perturbation sharpness)",
        passed: all_positive && scaling_ok,
        detail: format!(
            "kappa {kappa:.6}, slacks {:?}",
            slacks
                .iter()
                .map(|&(_, s)| format!("{s:.3e}"))
                .collect::<Vec<_>>()
        ),
    }
    .report();
}
