//! Closed-form geodesic flow, used as the oracle for the numerical
//! integrator.
//!
//! Spindle: `d theta^2 + alpha^2 sin^2 theta dphi^2` pulls back to the round
//! sphere under `psi = alpha phi`, so interior geodesics are great circles of
//! the cover. We flow with orbital elements (inclination, node, argument of
//! latitude) and unwrap the azimuth in closed form.
//!
//! Flat cone: `dx^2 + alpha^2 x^2 dphi^2` unfolds to the plane under
//! `beta = alpha phi`; geodesics are straight chords, and a chord missing the
//! origin subtends less than pi of polar angle, so the unwrap is direct.

use std::f64::consts::PI;

use super::{FlowError, RADIAL_CLAIRAUT_TOL};
use crate::model::{BCospherePoint, ConePointId, ConicModel, ModelKind};

/// Endpoint of the unit-speed geodesic of the given length through `p`.
/// Exact up to rounding; errors if the trajectory runs into a cone point
/// (Clairaut constant ~ 0), which is the integrator's event territory.
pub fn flow_exact(
    model: &ConicModel,
    p: &BCospherePoint,
    length: f64,
) -> Result<BCospherePoint, FlowError> {
    if !(length >= 0.0) || !length.is_finite() {
        return Err(FlowError::BadLength);
    }
    match model.kind() {
        ModelKind::Spindle => spindle_exact(model, p, length),
        ModelKind::FlatCone => flat_cone_exact(model, p, length),
    }
}

fn spindle_exact(
    model: &ConicModel,
    p: &BCospherePoint,
    length: f64,
) -> Result<BCospherePoint, FlowError> {
    let alpha = model.alpha_value();
    let eta = p.clairaut();
    if eta.abs() <= RADIAL_CLAIRAUT_TOL {
        return Err(FlowError::HitsConePoint);
    }
    // mirror retrograde motion to reduce to cos(i) > 0
    let mirror = eta < 0.0;
    let (y0, eta_s) = if mirror { (-p.y, -eta) } else { (p.y, eta) };

    let theta0 = p.theta_global(model);
    let theta_dot0 = if p.chart == ConePointId::NORTH {
        p.xi_bar
    } else {
        -p.xi_bar
    };
    let cos_i = (eta_s / alpha).clamp(0.0, 1.0);
    let sin_i = (1.0 - cos_i * cos_i).sqrt();
    let psi0 = alpha * y0;

    let (theta, theta_dot, psi) = if sin_i < 1e-12 {
        // equatorial orbit of the cover
        (PI / 2.0, 0.0, psi0 + length)
    } else {
        let sin_u0 = (theta0.cos() / sin_i).clamp(-1.0, 1.0);
        let cos_u0 = -theta_dot0 * theta0.sin() / sin_i;
        let u0 = sin_u0.atan2(cos_u0);
        let node = psi0 - azimuth_track(cos_i, u0);
        let u = u0 + length;
        let c = (sin_i * u.sin()).clamp(-1.0, 1.0);
        let theta = c.acos();
        let theta_dot = -sin_i * u.cos() / theta.sin();
        (theta, theta_dot, node + azimuth_track(cos_i, u))
    };

    let y_out = if mirror { -(psi / alpha) } else { psi / alpha };
    state_from_global(model, theta, y_out, theta_dot, eta)
}

/// Continuous unwrap of atan(cos_i * tan u): both sides pass odd multiples
/// of pi/2 together, so the branch index is floor(u/pi + 1/2).
fn azimuth_track(cos_i: f64, u: f64) -> f64 {
    let n = (u / PI + 0.5).floor();
    (cos_i * u.tan()).atan() + PI * n
}

fn state_from_global(
    model: &ConicModel,
    theta: f64,
    y: f64,
    theta_dot: f64,
    eta: f64,
) -> Result<BCospherePoint, FlowError> {
    let (chart, x, xi) = if theta <= PI / 2.0 {
        (ConePointId::NORTH, theta, theta_dot)
    } else {
        (ConePointId::SOUTH, PI - theta, -theta_dot)
    };
    Ok(BCospherePoint::new(model, chart, x, y, xi, eta / x)?)
}

fn flat_cone_exact(
    model: &ConicModel,
    p: &BCospherePoint,
    length: f64,
) -> Result<BCospherePoint, FlowError> {
    let alpha = model.alpha_value();
    if p.clairaut().abs() <= RADIAL_CLAIRAUT_TOL && p.xi_bar < 0.0 && length >= p.x {
        return Err(FlowError::HitsConePoint);
    }
    let beta0 = alpha * p.y;
    let (z_re, z_im) = (p.x * beta0.cos(), p.x * beta0.sin());
    // unit velocity in the unfolded plane: radial xi, transverse eta/alpha
    let (w_re, w_im) = {
        let vr = p.xi_bar;
        let vt = p.eta_bar / alpha;
        (
            vr * beta0.cos() - vt * beta0.sin(),
            vr * beta0.sin() + vt * beta0.cos(),
        )
    };
    let ze_re = z_re + length * w_re;
    let ze_im = z_im + length * w_im;
    let r = (ze_re * ze_re + ze_im * ze_im).sqrt();
    if r <= RADIAL_CLAIRAUT_TOL {
        return Err(FlowError::HitsConePoint);
    }
    // polar-angle increment relative to the start; a chord missing the
    // origin stays within (-pi, pi), so the principal value is the truth
    let cross = z_re * ze_im - z_im * ze_re;
    let dot = z_re * ze_re + z_im * ze_im;
    let dbeta = cross.atan2(dot);
    let y_out = p.y + dbeta / alpha;
    let xi_out = (w_re * ze_re + w_im * ze_im) / r;
    let eta_out = alpha * (w_re * -ze_im + w_im * ze_re) / r;
    Ok(BCospherePoint::new(
        model,
        ConePointId::TIP,
        r,
        y_out,
        xi_out,
        eta_out,
    )?)
}
