//! Measurement of the azimuth advance across a near-pole passage.
//!
//! A geodesic grazing a cone point picks up a limiting azimuth advance of
//! pi/alpha: the boundary flow segment it degenerates to is a cross-section
//! geodesic of h0-length pi. This module launches near-meridian geodesics at
//! a given closest-approach parameter and measures the advance between the
//! two crossings of a gate radius, bisecting the crossing lengths with the
//! numerical integrator itself.

use std::f64::consts::PI;

use super::{flow_interior, flow_interior_observed, FlowError, FlowOptions};
use crate::model::{BCospherePoint, ConePointId, ConicModel, ModelKind};

/// Azimuth advance accumulated while the trajectory is inside `x < gate`,
/// for the spindle geodesic whose closest approach to the north pole is
/// `impact` (in radial distance). Converges to pi/alpha as impact drops.
pub fn polar_passage_advance(
    model: &ConicModel,
    impact: f64,
    gate: f64,
    opts: &FlowOptions,
) -> Result<f64, FlowError> {
    assert_eq!(model.kind(), ModelKind::Spindle, "spindle models only");
    assert!(
        impact > 0.0 && impact < gate && gate < PI / 2.0,
        "need 0 < impact < gate < pi/2"
    );
    let clairaut = model.profile_chart(impact);
    let x0 = PI / 2.0;
    let eta = clairaut / x0;
    let denom = model.profile_chart(x0);
    let xi = -(1.0 - (clairaut / denom) * (clairaut / denom)).sqrt();
    let start = BCospherePoint::new(model, ConePointId::NORTH, x0, 0.0, xi, eta)?;

    // sample the flow across one full polar approach and return
    let mut samples: Vec<(f64, f64, f64)> = Vec::new(); // (s, x, y)
    let horizon = PI + 0.5;
    flow_interior_observed(model, &start, horizon, opts, |s, q| {
        let x_north = if q.chart == ConePointId::NORTH {
            q.x
        } else {
            PI - q.x
        };
        samples.push((s, x_north, q.y));
    })?;

    let entry = crossing(model, &start, &samples, gate, true, opts)?;
    let exit = crossing(model, &start, &samples, gate, false, opts)?;
    Ok(exit - entry)
}

/// Bisect the arc length at which the trajectory crosses `x = gate`
/// (downward on entry, upward on exit) and return the azimuth there.
fn crossing(
    model: &ConicModel,
    start: &BCospherePoint,
    samples: &[(f64, f64, f64)],
    gate: f64,
    downward: bool,
    opts: &FlowOptions,
) -> Result<f64, FlowError> {
    let pair = samples.windows(2).find(|w| {
        if downward {
            w[0].1 > gate && w[1].1 <= gate
        } else {
            w[0].1 <= gate && w[1].1 > gate
        }
    });
    let Some(w) = pair else {
        return Err(FlowError::BadLength);
    };
    let (mut lo, mut hi) = (w[0].0, w[1].0);
    let x_at = |s: f64| -> Result<(f64, f64), FlowError> {
        if s == 0.0 {
            return Ok((start.theta_global(model), start.y));
        }
        let r = flow_interior(model, start, s, opts)?;
        let q = r.segment.end;
        Ok((q.theta_global(model), q.y))
    };
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (x, _) = x_at(mid)?;
        let below = x <= gate;
        if below == downward {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let (_, y) = x_at(0.5 * (lo + hi))?;
    Ok(y)
}
