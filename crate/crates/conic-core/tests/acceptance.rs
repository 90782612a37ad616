//! Acceptance suite: the project's exit criteria, one test per criterion
//! (criterion 8 is split into its labeled sub-claims). Each test prints a
//! `ACCEPTANCE <id> PASS|FAIL` line (run with `--nocapture` to see them all).
//!
//! Desk scale: spindle alpha = 2/3, cutoff 450 (~1.35e5 modes), t in [0, 13],
//! eps in [0.02, 0.2].

use std::f64::consts::PI;

use conic_core::flow::{
    flow_exact, flow_interior, flow_interior_observed, polar_passage_advance, FlowOptions,
};
use conic_core::lengths::length_sets;
use conic_core::model::TAU;
use conic_core::oracle::{closure_search, shoot_radial_eigen, ShootingConfig};
use conic_core::spectrum::bessel::{bessel_zero, besselj_and_deriv};
use conic_core::spectrum::{flat_cone_modes, spindle_modes, weyl_fit, EigenEntry, EigenTable};
use conic_core::trace::{
    eps_ladder, heat_trace, scaling_exponent, singularity_report, smoothed_wave_trace, synthesize,
    ScanParams,
};
use conic_core::{Alpha, BCospherePoint, ConePointId, ConicModel, RimCondition};

const CUTOFF: f64 = 450.0;

fn report(id: &str, ok: bool, detail: &str) {
    println!(
        "ACCEPTANCE {id} {}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance criterion {id} failed: {detail}");
}

#[test]
fn criterion_01_sphere_degeneration_exact() {
    let t = spindle_modes(Alpha::Rational(1, 1), CUTOFF).unwrap();
    let lmax = (0.5 * (-1.0 + (1.0 + 4.0 * CUTOFF * CUTOFF).sqrt())).floor() as u64;
    let mut mult_by_l = vec![0u64; lmax as usize + 1];
    let mut exact = true;
    for e in &t.entries {
        let l = (e.m + e.k) as f64;
        exact &= e.nu.to_bits() == l.to_bits();
        exact &= e.lambda.to_bits() == (l * (l + 1.0)).to_bits();
        mult_by_l[(e.m + e.k) as usize] += e.mult as u64;
    }
    let mults_ok = mult_by_l
        .iter()
        .enumerate()
        .all(|(l, &m)| m == 2 * l as u64 + 1);
    report(
        "1",
        exact && mults_ok,
        &format!("alpha=1 table is l(l+1) with multiplicity 2l+1, bit-exact, l <= {lmax}"),
    );
}

#[test]
fn criterion_02_oracle_spectral_equivalence() {
    let config = ShootingConfig::default();
    let mut worst: f64 = 0.0;
    for alpha in [
        Alpha::Rational(2, 3),
        Alpha::Rational(1, 1),
        Alpha::Rational(3, 2),
    ] {
        let model = ConicModel::spindle(alpha).unwrap();
        let a = alpha.value();
        for m in 0..=2u32 {
            let eigs = shoot_radial_eigen(&model, m, 20, &config).unwrap();
            for (i, &lam) in eigs.iter().enumerate() {
                let k = if m == 0 { i + 1 } else { i };
                let nu = m as f64 / a + k as f64;
                let want = nu * (nu + 1.0);
                worst = worst.max(((lam - want) / want).abs());
            }
        }
    }
    report(
        "2",
        worst <= 1e-6,
        &format!("shooting vs closed form, worst relative error {worst:.2e} (<= 1e-6)"),
    );
}

#[test]
fn criterion_03_bessel_layer() {
    // half-integer zeros are k pi
    let mut worst: f64 = 0.0;
    for k in 1..=100 {
        let z = bessel_zero(0.5, k).unwrap();
        worst = worst.max(((z - k as f64 * PI) / (k as f64 * PI)).abs());
    }
    let half_ok = worst <= 1e-12;

    // j_{0,1} against an independent series-bisection oracle
    let series = |x: f64| {
        let q = 0.25 * x * x;
        let (mut term, mut sum) = (1.0, 1.0);
        for k in 1..60 {
            term *= -q / (k as f64 * k as f64);
            sum += term;
        }
        sum
    };
    let (mut a, mut b) = (2.0_f64, 3.0_f64);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if series(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let j01_ok = (bessel_zero(0.0, 1).unwrap() - 0.5 * (a + b)).abs() <= 1e-10;

    // interlacing across the alpha = 1/2 flat-cone table
    let table =
        flat_cone_modes(Alpha::Rational(1, 2), 1.0, RimCondition::Dirichlet, CUTOFF).unwrap();
    let mut orders: Vec<f64> = table.entries.iter().map(|e| e.nu).collect();
    orders.sort_by(|x, y| x.partial_cmp(y).unwrap());
    orders.dedup();
    let mut interlace_ok = true;
    for &nu in &orders {
        let j1 = bessel_zero(nu, 1).unwrap();
        let j1u = bessel_zero(nu + 1.0, 1).unwrap();
        let j2 = bessel_zero(nu, 2).unwrap();
        interlace_ok &= j1 < j1u && j1u < j2;
    }
    report(
        "3",
        half_ok && j01_ok && interlace_ok,
        &format!(
            "half-integer worst rel {worst:.2e}; j01 oracle {}; interlacing over {} orders {}",
            j01_ok,
            orders.len(),
            interlace_ok
        ),
    );
}

#[test]
fn criterion_04_completeness_anchors() {
    let table = spindle_modes(Alpha::Rational(2, 3), CUTOFF).unwrap();
    let fit = weyl_fit(&table).unwrap();
    let tau = 1e-3;
    let heat = tau * heat_trace(&table, tau).unwrap();
    let alpha = 2.0 / 3.0;
    let heat_dev = ((heat - alpha) / alpha).abs();
    let spindle_ok = fit.rel_deviation <= 0.02 && heat_dev <= 0.02;

    // flat-cone counterpart of the Weyl check (3% budget)
    let fc = flat_cone_modes(Alpha::Rational(1, 2), 1.0, RimCondition::Dirichlet, CUTOFF).unwrap();
    let fc_fit = weyl_fit(&fc).unwrap();
    let fc_ok = fc_fit.rel_deviation <= 0.03;
    report(
        "4",
        spindle_ok && fc_ok,
        &format!(
            "Weyl slope dev {:.3}% (<=2%), tau*heat dev {:.3}% (<=2%), flat-cone slope dev {:.3}% (<=3%)",
            100.0 * fit.rel_deviation,
            100.0 * heat_dev,
            100.0 * fc_fit.rel_deviation
        ),
    );
}

#[test]
fn criterion_05_flow_engine() {
    let m = ConicModel::spindle(Alpha::Rational(2, 3)).unwrap();
    let opts = FlowOptions::default();

    // constraint drift over length 100
    let p = BCospherePoint::new(&m, ConePointId::NORTH, 1.0, 0.0, 0.6, 0.9).unwrap();
    let mut drift = 0.0_f64;
    flow_interior_observed(&m, &p, 100.0, &opts, |_, q| {
        drift = drift.max((q.constraint(&m) - 1.0).abs());
    })
    .unwrap();

    // numeric vs exact endpoint over length 20
    let mut endpoint_err = 0.0_f64;
    for (x, y, xi, eta) in [
        (0.9, 0.0, -0.3, 1.2),
        (1.2, 2.0, 0.8, -0.5),
        (1.5, 1.0, -0.9, 0.4),
        (0.5, 4.0, 0.1, 2.0),
    ] {
        let p = BCospherePoint::new(&m, ConePointId::NORTH, x, y, xi, eta).unwrap();
        let num = flow_interior(&m, &p, 20.0, &opts).unwrap().segment.end;
        let ex = flow_exact(&m, &p, 20.0).unwrap();
        endpoint_err = endpoint_err.max(num.state_distance(&ex, &m));
    }

    // time reversal
    let p = BCospherePoint::new(&m, ConePointId::NORTH, 1.1, 0.5, 0.45, 1.0).unwrap();
    let fwd = flow_interior(&m, &p, 15.0, &opts).unwrap().segment.end;
    let back = flow_interior(&m, &fwd.reversed(), 15.0, &opts)
        .unwrap()
        .segment
        .end;
    let reversal_err = back.reversed().state_distance(&p, &m);

    // escape estimate near the flat-cone tip on a 10^3-trajectory sample:
    // x(t)^2 >= t^2/2 - 2 eps t for t in [tbar/4, tbar/2], eps = tbar/8
    let fc = ConicModel::flat_cone(Alpha::Rational(1, 2), 1.0, RimCondition::Dirichlet).unwrap();
    let tbar = 0.2;
    let eps = tbar / 8.0;
    let mut escape_ok = true;
    let mut sampled = 0;
    for i in 0..10 {
        let x0 = eps * (i as f64 + 0.5) / 10.0;
        for j in 0..10 {
            let angle = PI * (j as f64 + 0.5) / 10.0;
            for l in 0..10 {
                let y0 = TAU * l as f64 / 10.0;
                let p = BCospherePoint::new(
                    &fc,
                    ConePointId::TIP,
                    x0,
                    y0,
                    -angle.cos(),
                    angle.sin() * fc.alpha_value(),
                )
                .unwrap();
                sampled += 1;
                for step in 0..5 {
                    let t = tbar / 4.0 + (tbar / 4.0) * step as f64 / 4.0;
                    let q = flow_interior(&fc, &p, t, &opts).unwrap().segment.end;
                    escape_ok &= q.x * q.x >= t * t / 2.0 - 2.0 * eps * t;
                }
            }
        }
    }
    let ok = drift <= 1e-8 && endpoint_err <= 1e-6 && reversal_err <= 1e-6 && escape_ok;
    report(
        "5",
        ok,
        &format!(
            "drift {drift:.2e} (<=1e-8/100), exact-endpoint {endpoint_err:.2e} (<=1e-6), \
             reversal {reversal_err:.2e} (<=1e-6), escape bound on {sampled} trajectories {escape_ok}"
        ),
    );
}

#[test]
fn criterion_06_geometric_limit_law() {
    let m = ConicModel::spindle(Alpha::Rational(2, 3)).unwrap();
    let target = PI / m.alpha_value();
    let opts = FlowOptions::default();
    let gate = 0.3;
    let mut advances = Vec::new();
    for &b in &[1e-2, 1e-3, 1e-4] {
        advances.push(polar_passage_advance(&m, b, gate, &opts).unwrap());
    }
    let monotone = advances[0] < advances[1] && advances[1] < advances[2];
    let final_err = (advances[2] - target).abs();
    report(
        "6",
        monotone && final_err <= 1e-2,
        &format!(
            "passage advances {advances:?} -> pi/alpha = {target:.6}, monotone {monotone}, final error {final_err:.2e} (<=1e-2)"
        ),
    );
}

#[test]
fn criterion_07_length_sets() {
    let m23 = ConicModel::spindle(Alpha::Rational(2, 3)).unwrap();
    let sets = length_sets(&m23, 13.0).unwrap();
    let dif = sets.dif();
    let geo = sets.geo();
    let want_dif = [4.0 * PI / 3.0, TAU, 8.0 * PI / 3.0, 4.0 * PI];
    let want_geo = [4.0 * PI / 3.0, 8.0 * PI / 3.0, 4.0 * PI];
    let close = |got: &[f64], want: &[f64]| {
        got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-9)
    };
    let sets_ok = close(&dif, &want_dif) && close(&geo, &want_geo);

    // every length confirmed by the closure-search oracle to 1e-6
    let hits = closure_search(&m23, 13.0, 400).unwrap();
    let oracle_ok = dif
        .iter()
        .all(|l| hits.iter().any(|h| (h.length - l).abs() <= 1e-6));

    // Geo within Dif across the tested alphas
    let mut subset_ok = true;
    for alpha in [
        Alpha::Rational(2, 3),
        Alpha::Rational(1, 1),
        Alpha::Rational(3, 2),
        Alpha::Real(1.0 / 2.0_f64.sqrt()),
    ] {
        let m = ConicModel::spindle(alpha).unwrap();
        let s = length_sets(&m, 13.0).unwrap();
        let d = s.dif();
        subset_ok &= s
            .geo()
            .iter()
            .all(|g| d.iter().any(|x| (x - g).abs() < 1e-9));
    }
    report(
        "7",
        sets_ok && oracle_ok && subset_ok,
        &format!(
            "Dif {dif:?} Geo {geo:?}; oracle confirmation {oracle_ok}; Geo within Dif {subset_ok}"
        ),
    );
}

fn spindle_report() -> &'static (EigenTable, conic_core::trace::SingularityReport) {
    use std::sync::OnceLock;
    static CELL: OnceLock<(EigenTable, conic_core::trace::SingularityReport)> = OnceLock::new();
    CELL.get_or_init(|| {
        let table = spindle_modes(Alpha::Rational(2, 3), CUTOFF).unwrap();
        let m = ConicModel::spindle(Alpha::Rational(2, 3)).unwrap();
        let sets = length_sets(&m, 13.0).unwrap();
        let eps = eps_ladder(0.02, 0.2, 8);
        let rep = singularity_report(&table, &sets, &eps, &ScanParams::with_horizon(13.0)).unwrap();
        (table, rep)
    })
}

#[test]
fn criterion_08a_singular_support_within_dif() {
    let (_, rep) = &spindle_report();
    let ok = !rep.entries.is_empty()
        && rep
            .entries
            .iter()
            .all(|e| e.distance <= rep.params.match_tol);
    let detail: Vec<String> = rep
        .entries
        .iter()
        .map(|e| format!("t0={:.4} (dist {:.4})", e.t0, e.distance))
        .collect();
    report(
        "8a-support",
        ok,
        &format!(
            "detected singular times within 0.02 of Dif: {}",
            detail.join(", ")
        ),
    );
}

#[test]
fn criterion_08a_every_dif_length_detected() {
    // Honest red: the 2-diffraction meridian chains at t = 2 pi produce no
    // sup-growth at this smoothing scale (the cross-section mode sum is a
    // delta comb supported on multiples of 4 pi / 3, which vanishes
    // identically near 2 pi), so the mollifier-scaling proxy cannot detect
    // that element of Dif. See the decisions ledger for the analysis; the
    // criterion is asserted as specified.
    let (_, rep) = &spindle_report();
    let missing: Vec<String> = rep
        .dif_checks
        .iter()
        .filter(|c| !c.detected)
        .map(|c| format!("L={:.4} (a={:.3})", c.length, c.exponent))
        .collect();
    report(
        "8a-completeness",
        missing.is_empty(),
        &format!(
            "every Dif length in (0.5, 13] detected with a > 0.5; not detected: [{}]",
            missing.join(", ")
        ),
    );
}

#[test]
fn criterion_08b_exponent_at_zero() {
    let (_, rep) = &spindle_report();
    let a0 = rep.exponent_at_zero;
    report(
        "8b",
        (a0 - 2.0).abs() <= 0.1,
        &format!("a(0) = {a0:.3} within 2.0 +- 0.1"),
    );
}

#[test]
fn criterion_08c_diffractive_time_is_weak() {
    let (_, rep) = &spindle_report();
    let a2pi = dif_exponent(rep, TAU);
    report(
        "8c",
        a2pi <= 1.2,
        &format!("a(2pi) = {a2pi:.3} <= 1.2 (diffractive-only time)"),
    );
}

#[test]
fn criterion_08d_ordering() {
    let (_, rep) = &spindle_report();
    let a2pi = dif_exponent(rep, TAU);
    let a_equator = dif_exponent(rep, 4.0 * PI / 3.0);
    let a_period = dif_exponent(rep, 4.0 * PI);
    let ok = a2pi < a_equator - 0.3 && a2pi < a_period - 0.5;
    report(
        "8d",
        ok,
        &format!(
            "a(2pi) = {a2pi:.3} < a(4pi/3) - 0.3 = {:.3} and < a(4pi) - 0.5 = {:.3}",
            a_equator - 0.3,
            a_period - 0.5
        ),
    );
}

#[test]
fn criterion_08e_regular_point() {
    let table = spindle_modes(Alpha::Rational(2, 3), CUTOFF).unwrap();
    let eps = eps_ladder(0.02, 0.2, 8);
    let fit = scaling_exponent(&table, 5.0, &eps, 0.05).unwrap();
    report(
        "8e",
        fit.exponent <= 0.3,
        &format!("a(5.0) = {:.3} <= 0.3 (regular point)", fit.exponent),
    );
}

fn dif_exponent(rep: &conic_core::trace::SingularityReport, length: f64) -> f64 {
    rep.dif_checks
        .iter()
        .find(|c| (c.length - length).abs() < 1e-6)
        .unwrap_or_else(|| panic!("length {length} missing from Dif checks"))
        .exponent
}

#[test]
fn criterion_09_estimator_calibration() {
    // synthetic comb: lambda_k = (k pi)^2; exponent 1.00 +- 0.05 at t = 2 on
    // a ladder fine enough that the O(1) background does not bias the fit
    let eps_fine = eps_ladder(0.002, 0.02, 8);
    let cutoff = conic_core::trace::TAIL_FACTOR / eps_fine[0] * 1.05;
    let kmax = (cutoff / PI).floor() as u32;
    let comb = EigenTable {
        descriptor: "synthetic comb".into(),
        cutoff,
        weyl_target: f64::NAN,
        entries: (1..=kmax)
            .map(|k| {
                let s = k as f64 * PI;
                EigenEntry {
                    m: 0,
                    k,
                    nu: 0.0,
                    lambda: s * s,
                    mult: 1,
                }
            })
            .collect(),
    };
    let fit = scaling_exponent(&comb, 2.0, &eps_fine, 0.05).unwrap();
    let comb_ok = (fit.exponent - 1.0).abs() <= 0.05;

    // single mode reproduces the closed form to 1e-12
    let single = EigenTable {
        descriptor: "single".into(),
        cutoff: 1e4,
        weyl_target: f64::NAN,
        entries: vec![EigenEntry {
            m: 0,
            k: 0,
            nu: 0.0,
            lambda: 1.0,
            mult: 1,
        }],
    };
    let grid: Vec<f64> = (0..100).map(|i| i as f64 * 0.13).collect();
    let mut single_err = 0.0_f64;
    for &eps in &[0.05, 0.12] {
        let vals = smoothed_wave_trace(&single, &grid, eps).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            single_err = single_err.max((vals[i] - (-eps * eps / 2.0).exp() * t.cos()).abs());
        }
    }

    // evenness and bit-exact rerun determinism on the desk-scale table
    let table = spindle_modes(Alpha::Rational(2, 3), CUTOFF).unwrap();
    let eps = eps_ladder(0.02, 0.2, 8);
    let ts: Vec<f64> = (0..80).map(|i| i as f64 * 0.16).collect();
    let neg: Vec<f64> = ts.iter().map(|t| -t).collect();
    let fwd = synthesize(&table, &ts, &eps).unwrap();
    let bwd = synthesize(&table, &neg, &eps).unwrap();
    let mut even_err = 0.0_f64;
    for (ra, rb) in fwd.values.iter().zip(&bwd.values) {
        for (x, y) in ra.iter().zip(rb) {
            even_err = even_err.max((x - y).abs());
        }
    }
    let rerun = synthesize(&table, &ts, &eps).unwrap();
    let deterministic = fwd
        .values
        .iter()
        .zip(&rerun.values)
        .all(|(ra, rb)| ra.iter().zip(rb).all(|(x, y)| x.to_bits() == y.to_bits()));

    let ok = comb_ok && single_err <= 1e-12 && even_err <= 1e-12 && deterministic;
    report(
        "9",
        ok,
        &format!(
            "comb a = {:.3} (1.00 +- 0.05), single-mode err {single_err:.2e} (<=1e-12), \
             evenness {even_err:.2e} (<=1e-12), bit-exact rerun {deterministic}",
            fit.exponent
        ),
    );
}

/// Supporting check (trace module example): the sphere's singular set is
/// {2 pi, 4 pi}, all geometric.
#[test]
fn sphere_singular_set_support() {
    let table = spindle_modes(Alpha::Rational(1, 1), CUTOFF).unwrap();
    let m = ConicModel::spindle(Alpha::Rational(1, 1)).unwrap();
    let sets = length_sets(&m, 13.0).unwrap();
    let eps = eps_ladder(0.02, 0.2, 8);
    let rep = singularity_report(&table, &sets, &eps, &ScanParams::with_horizon(13.0)).unwrap();
    assert_eq!(rep.entries.len(), 2, "expected exactly two singular times");
    let want = [TAU, 2.0 * TAU];
    for (e, w) in rep.entries.iter().zip(&want) {
        assert!(
            (e.t0 - w).abs() <= 0.02,
            "singular time {} not at {w}",
            e.t0
        );
        assert_eq!(e.class, conic_core::trace::SingularClass::Geometric);
    }
    assert!(rep.flags.singular_only_on_dif && rep.flags.zero_anchor);
}

/// Supporting check (flow example): a radial meridian from the equator
/// arrives at the pole at length pi/2 with the stated leftover budget, and
/// the Bessel evaluator keeps residuals at returned zeros below the
/// derivative scale.
#[test]
fn spot_checks_support() {
    let m = ConicModel::spindle(Alpha::Rational(2, 3)).unwrap();
    let p = BCospherePoint::new(&m, ConePointId::NORTH, PI / 2.0, 0.0, -1.0, 0.0).unwrap();
    let r = flow_interior(&m, &p, PI, &FlowOptions::default()).unwrap();
    let arr = r.arrival.unwrap();
    assert!((arr.at_length - PI / 2.0).abs() < 1e-12);
    assert!((arr.remaining - PI / 2.0).abs() < 1e-12);

    for (nu, k) in [(0.0, 1), (2.0, 5), (10.0, 3), (436.0, 1)] {
        let z = bessel_zero(nu, k).unwrap();
        let (j, jd) = besselj_and_deriv(nu, z);
        assert!(j.abs() <= 1e-12 * z * jd.abs());
    }
}

/// Supporting check (dichotomy confirmation): on the alpha = 3/2 spindle the
/// meridian chain at 2 pi admits geometric continuations (pi-pairs exist on
/// a cross section of diameter 3 pi / 2), and there the trace *is* singular
/// and detected — the same length that stays invisible on alpha = 2/3 where
/// the chain is diffractive-only.
#[test]
fn alpha_three_halves_two_pi_detected_support() {
    let cutoff = 200.0;
    let table = spindle_modes(Alpha::Rational(3, 2), cutoff).unwrap();
    let m = ConicModel::spindle(Alpha::Rational(3, 2)).unwrap();
    let sets = length_sets(&m, 7.0).unwrap();
    assert_eq!(sets.lengths.len(), 1);
    assert!(sets.lengths[0].in_geo, "2 pi must be geometric for alpha = 3/2");
    let eps = eps_ladder(0.04, 0.2, 8);
    let mut params = ScanParams::with_horizon(7.0);
    params.window = 0.1;
    let rep = singularity_report(&table, &sets, &eps, &params).unwrap();
    assert_eq!(rep.entries.len(), 1, "expected exactly one singular time");
    let e = &rep.entries[0];
    assert!((e.t0 - TAU).abs() <= 0.02, "singular time {} not at 2 pi", e.t0);
    assert_eq!(e.class, conic_core::trace::SingularClass::Geometric);
    assert!(e.exponent > 0.5, "a(2 pi) = {} should be detected", e.exponent);
    assert!(rep.flags.singular_only_on_dif && rep.flags.zero_anchor);
}
