//! Diffractive and geometric continuation through cone points, and the
//! existential time-t relations between cosphere states.
//!
//! All geodesics leaving a cone point are radial, so on a rotationally
//! symmetric model a path through the boundary decomposes as: a meridian
//! segment into a pole, (J-1) full pole-to-pole meridians, and a meridian
//! segment out to the final state. Each jump contributes one free azimuth,
//! which mode G pins down to h0-distance pi. This makes the existential
//! search exact: length bookkeeping picks the jump count, parity picks the
//! pole sequence, and mode G reduces to a reachability check on azimuth
//! offsets of +- pi/alpha.

use std::f64::consts::PI;

use super::{flow_exact, radial_target, FlowError, RADIAL_CLAIRAUT_TOL};
use crate::model::{normalize_angle, BCospherePoint, ConePointId, ConicModel, ModelKind, TAU};

/// Default tolerance of the geometric pairing test.
pub const TOL_GEO: f64 = 1e-9;

/// Default cap on the number of diffractions explored by `relates`.
pub const DEFAULT_JUMP_BUDGET: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialSign {
    /// Heading into the cone point (xi_bar = -1).
    Inward,
    /// Emanating from the cone point (xi_bar = +1).
    Outward,
}

/// Radial state over a cone point: any outgoing direction is admissible for
/// a diffractive continuation, and they are all of this form.
pub fn diffractive_outgoing(
    model: &ConicModel,
    component: ConePointId,
    y_out: f64,
    sign: RadialSign,
) -> Result<BCospherePoint, FlowError> {
    if !model.is_cone_point(component) {
        return Err(FlowError::Model(
            crate::model::ModelError::InvalidConePoint(component),
        ));
    }
    let xi = match sign {
        RadialSign::Outward => 1.0,
        RadialSign::Inward => -1.0,
    };
    Ok(BCospherePoint {
        chart: component,
        x: 0.0,
        y: normalize_angle(y_out),
        xi_bar: xi,
        eta_bar: 0.0,
    })
}

/// True iff the two cross-section angles are h0-distance pi apart (the
/// geometric continuation condition), within `TOL_GEO`.
pub fn is_geometric_pair(model: &ConicModel, y_in: f64, y_out: f64) -> bool {
    (model.cross_section_distance(y_in, y_out) - PI).abs() <= TOL_GEO
}

/// Exact form of the pairing test for rational alpha = p/q and an angular
/// offset given as the rational multiple `(num/den) pi` of pi: the distance
/// is exactly pi iff min(num/den, 2 - num/den) = q/p.
pub fn is_geometric_offset_exact(alpha_p: u64, alpha_q: u64, num: u64, den: u64) -> bool {
    if den == 0 {
        return false;
    }
    // reduce num/den mod 2 and fold onto [0, 1]
    let num = num % (2 * den);
    let (fn_, fd) = (num.min(2 * den - num), den);
    // min-offset / pi = fn_/fd must equal q/p
    fn_ as u128 * alpha_p as u128 == alpha_q as u128 * fd as u128
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelateMode {
    Diffractive,
    Geometric,
}

/// Does a path per the diffractive (mode D) or geometric (mode G) relation
/// connect `p` to `q` with total interior length within `tol` of `t`?
///
/// `Err(BudgetExceeded)` means the answer is indeterminate: a connecting
/// path would need more than `jump_budget` diffractions.
pub fn relates(
    model: &ConicModel,
    p: &BCospherePoint,
    q: &BCospherePoint,
    t: f64,
    mode: RelateMode,
    tol: f64,
    jump_budget: usize,
) -> Result<bool, FlowError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(FlowError::BadLength);
    }
    for s in [p, q] {
        let c = s.constraint(model);
        if (c - 1.0).abs() > 1e-6 {
            return Err(FlowError::OffConstraint {
                excess: (c - 1.0).abs(),
            });
        }
    }
    // Route 1: no diffraction, a single interior geodesic of length t.
    if direct_interior_connects(model, p, q, t, tol) {
        return Ok(true);
    }
    // Route 2: through the boundary. Both endpoints must ride meridians.
    let p_radial = p.clairaut().abs() <= RADIAL_CLAIRAUT_TOL && p.x > 0.0 || p.x == 0.0;
    let q_radial = q.clairaut().abs() <= RADIAL_CLAIRAUT_TOL;
    if !(p_radial && q_radial) {
        return Ok(false);
    }
    let Some((first_pole, ell_in)) = radial_target(model, p) else {
        return Ok(false);
    };
    // final segment: emanates from some pole and ends at q moving away
    let Some((last_pole, ell_out)) = radial_source(model, q) else {
        return Ok(false);
    };

    let interior = t - ell_in - ell_out;
    match model.kind() {
        ModelKind::FlatCone => {
            // the only boundary route is one jump at the tip
            if first_pole != ConePointId::TIP || last_pole != ConePointId::TIP {
                return Ok(false);
            }
            if interior.abs() > tol {
                return Ok(false);
            }
            match mode {
                RelateMode::Diffractive => Ok(true),
                RelateMode::Geometric => Ok(geometric_chain_reachable(model, p.y, q.y, 1, tol)),
            }
        }
        ModelKind::Spindle => {
            // interior must equal (J-1) full meridians
            let jm1 = (interior / PI).round();
            if jm1 < 0.0 || (interior - jm1 * PI).abs() > tol {
                return Ok(false);
            }
            let jumps = jm1 as usize + 1;
            if jumps > jump_budget {
                return Err(FlowError::BudgetExceeded {
                    jumps,
                    budget: jump_budget,
                });
            }
            // parity: meridians alternate poles, so the emitting pole of the
            // last jump is determined by the first pole and the jump count
            let expected_last = if jumps % 2 == 1 {
                first_pole
            } else {
                model.opposite(first_pole).unwrap()
            };
            if expected_last != last_pole {
                return Ok(false);
            }
            match mode {
                RelateMode::Diffractive => Ok(true),
                RelateMode::Geometric => Ok(geometric_chain_reachable(model, p.y, q.y, jumps, tol)),
            }
        }
    }
}

/// Can `jumps` geometric continuations (each an azimuth offset of
/// +- pi/alpha mod 2 pi) carry azimuth `y_in` to `y_out`?
fn geometric_chain_reachable(
    model: &ConicModel,
    y_in: f64,
    y_out: f64,
    jumps: usize,
    tol: f64,
) -> bool {
    let alpha = model.alpha_value();
    let step = PI / alpha;
    // distance pi is attainable on the circle only when pi/alpha fits
    // within half the circumference
    if step > PI * 2.0 - step + TOL_GEO && alpha < 1.0 {
        return false;
    }
    if alpha < 1.0 {
        return false;
    }
    let diff = y_out - y_in;
    let mut s = -(jumps as i64);
    while s <= jumps as i64 {
        let total = s as f64 * step;
        let w = (diff - total).rem_euclid(TAU);
        if w.min(TAU - w) <= tol + TOL_GEO {
            return true;
        }
        s += 2;
    }
    false
}

/// Meridian distance from the pole that emitted `q` (the pole `q` is moving
/// away from), when `q` is radial.
fn radial_source(model: &ConicModel, q: &BCospherePoint) -> Option<(ConePointId, f64)> {
    match model.kind() {
        ModelKind::Spindle => {
            if q.xi_bar > 0.0 {
                Some((q.chart, q.x))
            } else {
                let opp = model.opposite(q.chart).unwrap();
                Some((opp, PI - q.x))
            }
        }
        ModelKind::FlatCone => {
            if q.xi_bar > 0.0 {
                Some((q.chart, q.x))
            } else {
                None
            }
        }
    }
}

fn direct_interior_connects(
    model: &ConicModel,
    p: &BCospherePoint,
    q: &BCospherePoint,
    t: f64,
    tol: f64,
) -> bool {
    match flow_exact(model, p, t) {
        Ok(end) => end.state_distance(q, model) <= tol.max(1e-9),
        Err(_) => {
            // radial start: the direct route exists only if the meridian
            // carries p to q without meeting a pole
            if p.clairaut().abs() > RADIAL_CLAIRAUT_TOL {
                return false;
            }
            if let Some((_, dist)) = radial_target(model, p) {
                if t < dist {
                    // advance along the meridian analytically
                    if let Ok(r) = super::flow_interior(model, p, t, &super::FlowOptions::default())
                    {
                        return r.arrival.is_none()
                            && r.segment.end.state_distance(q, model) <= tol.max(1e-9);
                    }
                }
            }
            false
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Alpha;

    fn spindle(p: u64, q: u64) -> ConicModel {
        ConicModel::spindle(Alpha::Rational(p, q)).unwrap()
    }

    fn equator_heading_north(m: &ConicModel, y: f64) -> BCospherePoint {
        BCospherePoint::new(m, ConePointId::NORTH, PI / 2.0, y, -1.0, 0.0).unwrap()
    }

    #[test]
    fn outgoing_states_are_radial() {
        let m = spindle(2, 3);
        let p = diffractive_outgoing(&m, ConePointId::NORTH, 0.0, RadialSign::Outward).unwrap();
        assert_eq!((p.x, p.xi_bar, p.eta_bar), (0.0, 1.0, 0.0));
        let p2 = diffractive_outgoing(&m, ConePointId::NORTH, 9.0, RadialSign::Outward).unwrap();
        assert_eq!(p2.xi_bar, 1.0);
        assert!(diffractive_outgoing(&m, ConePointId(7), 0.0, RadialSign::Outward).is_err());
    }

    #[test]
    fn geometric_pair_examples() {
        let m23 = spindle(2, 3);
        // max h0-distance is pi alpha = 2pi/3 < pi: no geometric pairs
        for dy in [0.0, 0.5, PI, 4.0] {
            assert!(!is_geometric_pair(&m23, 0.0, dy));
        }
        let m1 = spindle(1, 1);
        assert!(is_geometric_pair(&m1, 0.3, 0.3 + PI));
        let m32 = spindle(3, 2);
        assert!(is_geometric_pair(&m32, 0.0, TAU / 3.0));
        assert!(!is_geometric_pair(&m32, 0.0, 0.5));
    }

    #[test]
    fn geometric_pair_exact_rational() {
        // alpha = 3/2, offset (2/3) pi: exact hit
        assert!(is_geometric_offset_exact(3, 2, 2, 3));
        // alpha = 1, offset pi
        assert!(is_geometric_offset_exact(1, 1, 1, 1));
        // alpha = 2/3 admits none
        assert!(!is_geometric_offset_exact(2, 3, 1, 1));
        assert!(!is_geometric_offset_exact(2, 3, 3, 2));
        // offsets fold mod 2 pi
        assert!(is_geometric_offset_exact(1, 1, 3, 1));
    }

    #[test]
    fn meridian_double_pass_relates_diffractively() {
        // equator heading north, back to itself after pi/2 + pi + pi/2
        let m = spindle(2, 3);
        let p = equator_heading_north(&m, 0.0);
        let yes = relates(
            &m,
            &p,
            &p,
            2.0 * PI,
            RelateMode::Diffractive,
            1e-6,
            DEFAULT_JUMP_BUDGET,
        )
        .unwrap();
        assert!(yes);
        // but not geometrically (alpha < 1 admits no pi-pairs)
        let no = relates(
            &m,
            &p,
            &p,
            2.0 * PI,
            RelateMode::Geometric,
            1e-6,
            DEFAULT_JUMP_BUDGET,
        )
        .unwrap();
        assert!(!no);
    }

    #[test]
    fn sphere_great_circle_is_geometric() {
        let m = spindle(1, 1);
        let p = equator_heading_north(&m, 0.0);
        let yes = relates(
            &m,
            &p,
            &p,
            2.0 * PI,
            RelateMode::Geometric,
            1e-6,
            DEFAULT_JUMP_BUDGET,
        )
        .unwrap();
        assert!(yes);
    }

    #[test]
    fn wrong_lengths_do_not_relate() {
        let m = spindle(2, 3);
        let p = equator_heading_north(&m, 0.0);
        for t in [1.0, PI, 2.0 * PI - 0.01, 5.0] {
            let r = relates(&m, &p, &p, t, RelateMode::Diffractive, 1e-6, 8).unwrap();
            assert!(!r, "unexpected relation at t = {t}");
        }
    }

    #[test]
    fn interior_route_works_for_non_radial_states() {
        let m = spindle(2, 3);
        let p = BCospherePoint::new(&m, ConePointId::NORTH, 1.0, 0.5, 0.4, 1.0).unwrap();
        let q = flow_exact(&m, &p, 3.0).unwrap();
        assert!(relates(&m, &p, &q, 3.0, RelateMode::Diffractive, 1e-6, 6).unwrap());
        assert!(relates(&m, &p, &q, 3.0, RelateMode::Geometric, 1e-6, 6).unwrap());
        assert!(!relates(&m, &p, &q, 3.3, RelateMode::Diffractive, 1e-6, 6).unwrap());
    }

    #[test]
    fn budget_exhaustion_is_indeterminate() {
        let m = spindle(2, 3);
        let p = equator_heading_north(&m, 0.0);
        // t = 8 pi needs 8 jumps, over a budget of 6
        let r = relates(&m, &p, &p, 8.0 * PI, RelateMode::Diffractive, 1e-6, 6);
        assert!(matches!(r, Err(FlowError::BudgetExceeded { jumps: 8, .. })));
    }

    #[test]
    fn relates_is_stable_under_perturbation() {
        // a relation holding with slack keeps holding for perturbed data
        // with correspondingly scaled tolerance
        let m = spindle(2, 3);
        let p = equator_heading_north(&m, 0.0);
        let t = 2.0 * PI;
        assert!(relates(&m, &p, &p, t, RelateMode::Diffractive, 1e-6, 6).unwrap());
        let dp = 1e-4;
        let p2 = BCospherePoint::new(&m, ConePointId::NORTH, PI / 2.0 + dp, dp, -1.0, 0.0).unwrap();
        let q2 = BCospherePoint::new(&m, ConePointId::NORTH, PI / 2.0 - dp, dp, -1.0, 0.0).unwrap();
        let scaled_tol = 1e-6 + 2.0 * dp + 1e-3;
        assert!(relates(
            &m,
            &p2,
            &q2,
            t + 1e-3,
            RelateMode::Diffractive,
            scaled_tol,
            6
        )
        .unwrap());
    }

    #[test]
    fn flat_cone_tip_relation() {
        use crate::model::RimCondition;
        let m = ConicModel::flat_cone(Alpha::Rational(1, 2), 1.0, RimCondition::Dirichlet).unwrap();
        let p = BCospherePoint::new(&m, ConePointId::TIP, 0.3, 0.0, -1.0, 0.0).unwrap();
        let q = BCospherePoint::new(&m, ConePointId::TIP, 0.7, 2.0, 1.0, 0.0).unwrap();
        // one jump at the tip: t = 0.3 + 0.7
        assert!(relates(&m, &p, &q, 1.0, RelateMode::Diffractive, 1e-6, 6).unwrap());
        assert!(!relates(&m, &p, &q, 0.9, RelateMode::Diffractive, 1e-6, 6).unwrap());
        // no pi-pairs on a cross-section of diameter pi/2
        assert!(!relates(&m, &p, &q, 1.0, RelateMode::Geometric, 1e-6, 6).unwrap());
        // outward-heading states never reach the tip again
        let out1 = BCospherePoint::new(&m, ConePointId::TIP, 0.3, 0.0, 1.0, 0.0).unwrap();
        assert!(!relates(&m, &out1, &q, 1.0, RelateMode::Diffractive, 1e-6, 6).unwrap());
    }

    #[test]
    fn spindle_three_halves_meridian_pair_is_geometric() {
        let m = spindle(3, 2);
        let p = equator_heading_north(&m, 0.0);
        // jump offsets +-2pi/3 close the azimuth chain for J = 2 via s = 0,
        // and the wrap jump at the start pole also satisfies the pi-pairing
        let yes = relates(&m, &p, &p, 2.0 * PI, RelateMode::Geometric, 1e-6, 6).unwrap();
        assert!(yes);
    }
}
