//! `verify`: the oracle suite. Re-derives spectra by shooting, closed
//! geodesics by dense scanning, Bessel zeros by independent bisection, and
//! checks the flow engine's conservation laws. Prints one PASS/FAIL line per
//! check; any failure makes the command exit with code 3.

use std::f64::consts::PI;

use conic_core::flow::{
    flow_exact, flow_interior, flow_interior_observed, polar_passage_advance, FlowOptions,
};
use conic_core::lengths::length_sets;
use conic_core::model::TAU;
use conic_core::oracle::{closure_search, shoot_radial_eigen, ShootingConfig};
use conic_core::spectrum::bessel::bessel_zero;
use conic_core::spectrum::{spindle_modes, weyl_fit};
use conic_core::trace::heat_trace;
use conic_core::{Alpha, BCospherePoint, ConePointId, ConicModel, ModelKind, RimCondition};

use crate::config::RunConfig;

type Check = (&'static str, Result<(), String>);

pub fn verify(cfg: &RunConfig) -> anyhow::Result<bool> {
    let model = cfg.model_instance()?;
    let mut checks: Vec<Check> = vec![
        ("bessel-half-integer-zeros", bessel_half_integer()),
        ("bessel-j01-series-bisection", bessel_j01_oracle()),
        ("bessel-interlacing", bessel_interlacing()),
        ("flow-escape-estimate", escape_estimate()),
    ];

    if model.kind() == ModelKind::Spindle {
        checks.push(("spectrum-vs-shooting-oracle", shooting_agreement(&model)));
        checks.push((
            "lengths-vs-closure-search",
            closure_agreement(&model, cfg.horizon),
        ));
        checks.push(("flow-constraint-drift", constraint_drift(&model)));
        checks.push(("flow-vs-exact-endpoint", exact_agreement(&model)));
        checks.push(("flow-time-reversal", time_reversal(&model)));
        checks.push(("flow-geometric-limit", geometric_limit(&model)));
        checks.push(("weyl-heat-anchors", weyl_heat_anchor(&model)));
    }

    let mut all_ok = true;
    for (name, result) in &checks {
        match result {
            Ok(()) => println!("PASS {name}"),
            Err(msg) => {
                all_ok = false;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    Ok(all_ok)
}

fn bessel_half_integer() -> Result<(), String> {
    for k in 1..=100 {
        let z = bessel_zero(0.5, k).map_err(|e| e.to_string())?;
        let want = k as f64 * PI;
        if ((z - want) / want).abs() > 1e-12 {
            return Err(format!("j_(1/2,{k}) = {z}, want {want}"));
        }
    }
    Ok(())
}

fn bessel_j01_oracle() -> Result<(), String> {
    // independent bisection on the ascending series of J_0
    let series = |x: f64| {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
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
    let oracle = 0.5 * (a + b);
    let main = bessel_zero(0.0, 1).map_err(|e| e.to_string())?;
    if (main - oracle).abs() > 1e-10 {
        return Err(format!("j_(0,1) = {main} vs series bisection {oracle}"));
    }
    Ok(())
}

fn bessel_interlacing() -> Result<(), String> {
    for &nu in &[0.0, 1.0 / 3.0, 2.0] {
        let j1 = bessel_zero(nu, 1).map_err(|e| e.to_string())?;
        let j1u = bessel_zero(nu + 1.0, 1).map_err(|e| e.to_string())?;
        let j2 = bessel_zero(nu, 2).map_err(|e| e.to_string())?;
        if !(j1 < j1u && j1u < j2) {
            return Err(format!("interlacing broken at nu = {nu}"));
        }
    }
    Ok(())
}

fn shooting_agreement(model: &ConicModel) -> Result<(), String> {
    let alpha = model.alpha_value();
    let config = ShootingConfig::default();
    for m in 0..=2u32 {
        let eigs = shoot_radial_eigen(model, m, 10, &config).map_err(|e| e.to_string())?;
        for (i, &lam) in eigs.iter().enumerate() {
            // closed form: nu = m/alpha + k; the oracle skips the zero mode
            let k = if m == 0 { i + 1 } else { i };
            let nu = m as f64 / alpha + k as f64;
            let want = nu * (nu + 1.0);
            if ((lam - want) / want).abs() > 1e-6 {
                return Err(format!(
                    "m={m}, index {i}: shooting {lam} vs closed form {want}"
                ));
            }
        }
    }
    Ok(())
}

fn closure_agreement(model: &ConicModel, horizon: f64) -> Result<(), String> {
    let horizon = horizon.min(30.0);
    let sets = length_sets(model, horizon).map_err(|e| e.to_string())?;
    let hits = closure_search(model, horizon, 400).map_err(|e| e.to_string())?;
    for l in &sets.lengths {
        if !hits.iter().any(|h| (h.length - l.length).abs() <= 1e-6) {
            return Err(format!(
                "record length {} not reproduced by the scan",
                l.length
            ));
        }
    }
    for h in &hits {
        if !sets
            .lengths
            .iter()
            .any(|l| (l.length - h.length).abs() <= 1e-6)
        {
            return Err(format!("scan closure {} missing from Dif", h.length));
        }
    }
    Ok(())
}

fn constraint_drift(model: &ConicModel) -> Result<(), String> {
    let p = BCospherePoint::new(model, ConePointId::NORTH, 1.0, 0.0, 0.6, 0.9)
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    flow_interior_observed(model, &p, 100.0, &FlowOptions::default(), |_, q| {
        worst = worst.max((q.constraint(model) - 1.0).abs());
    })
    .map_err(|e| e.to_string())?;
    if worst > 1e-8 {
        return Err(format!("constraint drift {worst:e} over length 100"));
    }
    Ok(())
}

fn exact_agreement(model: &ConicModel) -> Result<(), String> {
    let starts = [
        (0.9, 0.0, -0.3, 1.2),
        (1.2, 2.0, 0.8, -0.5),
        (1.5, 1.0, -0.9, 0.4),
    ];
    for (x, y, xi, eta) in starts {
        let p = BCospherePoint::new(model, ConePointId::NORTH, x, y, xi, eta)
            .map_err(|e| e.to_string())?;
        let num = flow_interior(model, &p, 20.0, &FlowOptions::default())
            .map_err(|e| e.to_string())?
            .segment
            .end;
        let ex = flow_exact(model, &p, 20.0).map_err(|e| e.to_string())?;
        let d = num.state_distance(&ex, model);
        if d > 1e-6 {
            return Err(format!(
                "endpoint error {d:e} from start ({x}, {y}, {xi}, {eta})"
            ));
        }
    }
    Ok(())
}

fn time_reversal(model: &ConicModel) -> Result<(), String> {
    let p = BCospherePoint::new(model, ConePointId::NORTH, 1.1, 0.5, 0.45, 1.0)
        .map_err(|e| e.to_string())?;
    let opts = FlowOptions::default();
    let fwd = flow_interior(model, &p, 15.0, &opts)
        .map_err(|e| e.to_string())?
        .segment
        .end;
    let back = flow_interior(model, &fwd.reversed(), 15.0, &opts)
        .map_err(|e| e.to_string())?
        .segment
        .end;
    let d = back.reversed().state_distance(&p, model);
    if d > 1e-6 {
        return Err(format!("round-trip error {d:e}"));
    }
    Ok(())
}

/// Escape estimate near the tip of a flat cone: trajectories starting at
/// x0 < eps satisfy x(t)^2 >= t^2/2 - 2 eps t on t in [tbar/4, tbar/2],
/// with eps = tbar/8.
fn escape_estimate() -> Result<(), String> {
    let model = ConicModel::flat_cone(Alpha::Rational(1, 2), 1.0, RimCondition::Dirichlet)
        .map_err(|e| e.to_string())?;
    let tbar = 0.2;
    let eps = tbar / 8.0;
    let opts = FlowOptions::default();
    // 10 radii x 10 directions x 10 azimuths = 1000 trajectories
    let mut checked = 0usize;
    for i in 0..10 {
        let x0 = eps * (i as f64 + 0.5) / 10.0;
        for j in 0..10 {
            let angle = PI * (j as f64 + 0.5) / 10.0; // direction vs inward radial
            for l in 0..10 {
                let y0 = TAU * l as f64 / 10.0;
                // unit direction at angle to the inward radial:
                // xi^2 + (eta/alpha)^2 = 1 on the flat cone
                let xi = -angle.cos();
                let eta = angle.sin() * model.alpha_value();
                let p = BCospherePoint::new(&model, ConePointId::TIP, x0, y0, xi, eta)
                    .map_err(|e| e.to_string())?;
                if p.clairaut().abs() < 1e-13 && p.xi_bar < 0.0 {
                    continue; // would pass through the tip
                }
                for step in 0..5 {
                    let t = tbar / 4.0 + (tbar / 4.0) * step as f64 / 4.0;
                    let q = flow_interior(&model, &p, t, &opts)
                        .map_err(|e| e.to_string())?
                        .segment
                        .end;
                    let bound = t * t / 2.0 - 2.0 * eps * t;
                    if q.x * q.x < bound {
                        return Err(format!(
                            "x({t})^2 = {:e} below bound {bound:e} from x0 = {x0}",
                            q.x * q.x
                        ));
                    }
                }
                checked += 1;
            }
        }
    }
    if checked < 900 {
        return Err(format!("only {checked} trajectories checked"));
    }
    Ok(())
}

fn geometric_limit(model: &ConicModel) -> Result<(), String> {
    let target = PI / model.alpha_value();
    let opts = FlowOptions::default();
    let gate = 0.3;
    let mut prev = f64::NEG_INFINITY;
    let mut final_err = f64::NAN;
    for &b in &[1e-2, 1e-3, 1e-4] {
        let adv = polar_passage_advance(model, b, gate, &opts).map_err(|e| e.to_string())?;
        if adv <= prev {
            return Err(format!("advance not monotone in b: {adv} after {prev}"));
        }
        prev = adv;
        final_err = (adv - target).abs();
    }
    if final_err > 1e-2 {
        return Err(format!("final advance misses pi/alpha by {final_err:e}"));
    }
    Ok(())
}

fn weyl_heat_anchor(model: &ConicModel) -> Result<(), String> {
    let table = spindle_modes(model.alpha(), 450.0).map_err(|e| e.to_string())?;
    let fit = weyl_fit(&table).map_err(|e| e.to_string())?;
    if fit.rel_deviation > 0.02 {
        return Err(format!(
            "Weyl slope {} deviates {:.3}% from alpha",
            fit.slope,
            100.0 * fit.rel_deviation
        ));
    }
    let tau = 1e-3;
    let heat = heat_trace(&table, tau).map_err(|e| e.to_string())?;
    let target = model.area() / (4.0 * PI);
    let dev = (tau * heat - target).abs() / target;
    if dev > 0.02 {
        return Err(format!(
            "tau * heat = {} deviates {:.3}%",
            tau * heat,
            100.0 * dev
        ));
    }
    Ok(())
}
