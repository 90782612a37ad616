//! Geodesic flow on the rescaled b-cosphere bundle.
//!
//! In chart coordinates (x, y, xi_bar, eta_bar) with profile a(x), the
//! unit-speed flow reads
//!
//! ```text
//!   dx/dt      = xi_bar
//!   dy/dt      = x eta_bar / a^2
//!   dxi/dt     = x^2 eta_bar^2 a' / a^3
//!   deta/dt    = - xi_bar eta_bar / x
//! ```
//!
//! subject to `xi_bar^2 + (x eta_bar / a)^2 = 1`. The parameter is arc
//! length. The angular momentum `eta = x eta_bar` is conserved (Clairaut);
//! it vanishes exactly on the meridians, which are the only geodesics
//! reaching a cone point.

mod exact;
mod integrator;
mod passage;
mod relates;

pub use exact::flow_exact;
pub use integrator::{flow_interior, flow_interior_observed, FlowOptions};
pub use passage::polar_passage_advance;
pub use relates::{
    diffractive_outgoing, is_geometric_offset_exact, is_geometric_pair, relates, RadialSign,
    RelateMode, DEFAULT_JUMP_BUDGET, TOL_GEO,
};

use thiserror::Error;

use crate::model::{BCospherePoint, ConePointId, ConicModel, ModelError, ModelKind};

/// Clairaut threshold below which a trajectory is treated as exactly radial
/// (product of the cone-arrival tolerances x_event * eta_event).
pub const RADIAL_CLAIRAUT_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("state violates the cosphere constraint by {excess:e}")]
    OffConstraint { excess: f64 },
    #[error("state sits at a cone point without an outgoing radial direction")]
    AtConePoint,
    #[error("trajectory passes through a cone point; use the event machinery")]
    HitsConePoint,
    #[error("step size underflow at accumulated length {at_length}")]
    StepUnderflow { at_length: f64 },
    #[error("step budget exhausted at accumulated length {at_length}")]
    MaxSteps { at_length: f64 },
    #[error("trajectory reached the flat-cone rim (billiards out of scope)")]
    RimReached,
    #[error("target length must be positive")]
    BadLength,
    #[error("relation search budget exceeded ({jumps} jumps needed, budget {budget}); result indeterminate")]
    BudgetExceeded { jumps: usize, budget: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Velocity of the unit-speed flow at an interior state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowVector {
    pub dx: f64,
    pub dy: f64,
    pub dxi_bar: f64,
    pub deta_bar: f64,
}

const CONSTRAINT_GATE: f64 = 1e-6;

/// Rescaled geodesic field in unit-speed time. Requires an interior state
/// (`x > 0`) on the constraint set.
pub fn rescaled_field(model: &ConicModel, p: &BCospherePoint) -> Result<FlowVector, FlowError> {
    if p.x <= 0.0 {
        return Err(FlowError::AtConePoint);
    }
    let c = p.constraint(model);
    if (c - 1.0).abs() > CONSTRAINT_GATE {
        return Err(FlowError::OffConstraint {
            excess: (c - 1.0).abs(),
        });
    }
    Ok(field_unchecked(model, p.x, p.y, p.xi_bar, p.eta_bar))
}

#[inline]
pub(crate) fn field_unchecked(
    model: &ConicModel,
    x: f64,
    _y: f64,
    xi: f64,
    eta: f64,
) -> FlowVector {
    let a = model.profile_chart(x);
    let da = model.profile_deriv_chart(x);
    let xa = x / a;
    FlowVector {
        dx: xi,
        dy: x * eta / (a * a),
        dxi_bar: xa * xa * eta * eta * da / a,
        deta_bar: -xi * eta / x,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Interior,
    BoundaryTransit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    Diffractive,
    Geometric,
}

#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub start: BCospherePoint,
    pub end: BCospherePoint,
    pub length: f64,
    pub kind: SegmentKind,
}

/// A concatenated path: interior segments joined by jumps at cone points.
/// Boundary transits contribute zero length.
#[derive(Debug, Clone, Default)]
pub struct GeodesicPath {
    pub segments: Vec<Segment>,
    pub jumps: Vec<JumpKind>,
    pub total_length: f64,
}

impl GeodesicPath {
    pub fn single(segment: Segment) -> Self {
        GeodesicPath {
            total_length: segment_length_contribution(&segment),
            segments: vec![segment],
            jumps: Vec::new(),
        }
    }

    pub fn push(&mut self, jump: JumpKind, segment: Segment) {
        self.jumps.push(jump);
        self.total_length += segment_length_contribution(&segment);
        self.segments.push(segment);
    }

    /// Structural invariants: lengths add up, jump count matches, each jump
    /// joins segments at the same cone-point component, and geometric jumps
    /// connect azimuths an h0-distance pi apart.
    pub fn validate(&self, model: &ConicModel) -> bool {
        if self.segments.is_empty() || self.jumps.len() + 1 != self.segments.len() {
            return false;
        }
        let sum: f64 = self.segments.iter().map(segment_length_contribution).sum();
        if (sum - self.total_length).abs() > 1e-9 * (1.0 + self.total_length.abs()) {
            return false;
        }
        for (i, jump) in self.jumps.iter().enumerate() {
            let a = &self.segments[i].end;
            let b = &self.segments[i + 1].start;
            if a.chart != b.chart || a.x.abs() > 1e-6 || b.x.abs() > 1e-6 {
                return false;
            }
            if !model.is_cone_point(a.chart) {
                return false;
            }
            if *jump == JumpKind::Geometric && !relates::is_geometric_pair(model, a.y, b.y) {
                return false;
            }
        }
        true
    }
}

fn segment_length_contribution(s: &Segment) -> f64 {
    match s.kind {
        SegmentKind::Interior => s.length,
        SegmentKind::BoundaryTransit => 0.0,
    }
}

/// Cone-point arrival produced by `flow_interior`.
#[derive(Debug, Clone, Copy)]
pub struct ConeArrival {
    pub component: ConePointId,
    /// Arc length from the start of the segment to the cone point.
    pub at_length: f64,
    /// Unused part of the requested length budget.
    pub remaining: f64,
}

/// Result of flowing a single interior segment.
#[derive(Debug, Clone)]
pub struct FlowResult {
    pub segment: Segment,
    pub arrival: Option<ConeArrival>,
}

impl FlowResult {
    pub fn into_path(self) -> GeodesicPath {
        GeodesicPath::single(self.segment)
    }
}

/// Meridian distance from the state's position to the pole it is moving
/// toward (spindle always has one; flat cone only when heading inward).
pub(crate) fn radial_target(model: &ConicModel, p: &BCospherePoint) -> Option<(ConePointId, f64)> {
    match model.kind() {
        ModelKind::Spindle => {
            if p.xi_bar < 0.0 {
                Some((p.chart, p.x))
            } else {
                let opp = model.opposite(p.chart).unwrap();
                Some((opp, std::f64::consts::PI - p.x))
            }
        }
        ModelKind::FlatCone => {
            if p.xi_bar < 0.0 {
                Some((p.chart, p.x))
            } else {
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Alpha, BCospherePoint, ConePointId, ConicModel};
    use std::f64::consts::PI;

    fn spindle23() -> ConicModel {
        ConicModel::spindle(Alpha::Rational(2, 3)).unwrap()
    }

    fn equator_point(model: &ConicModel, y: f64, xi: f64, eta_sign: f64) -> BCospherePoint {
        // on the equator x = pi/2, a = alpha; tangent direction has
        // eta_bar = +- a / x
        let eta = eta_sign * model.profile_chart(PI / 2.0) / (PI / 2.0);
        BCospherePoint::new(model, ConePointId::NORTH, PI / 2.0, y, xi, eta).unwrap()
    }

    #[test]
    fn radial_meridian_field() {
        let m = spindle23();
        let p = BCospherePoint::new(&m, ConePointId::NORTH, PI / 2.0, 0.3, -1.0, 0.0).unwrap();
        let v = rescaled_field(&m, &p).unwrap();
        assert_eq!(v.dx, -1.0);
        assert_eq!(v.dy, 0.0);
        assert_eq!(v.dxi_bar, 0.0);
        assert_eq!(v.deta_bar, 0.0);
    }

    #[test]
    fn equator_tangent_has_stationary_xi() {
        let m = spindle23();
        let p = equator_point(&m, 0.0, 0.0, 1.0);
        let v = rescaled_field(&m, &p).unwrap();
        // reflection symmetry across the equator: d xi / dt = 0 (a'(pi/2)=0)
        assert!(v.dxi_bar.abs() < 1e-15);
        // circulation speed: dphi/dt = 1/alpha on the equator
        assert!((v.dy - 1.0 / m.alpha_value()).abs() < 1e-14);
    }

    #[test]
    fn field_is_tangent_to_constraint_set() {
        let m = spindle23();
        let p = BCospherePoint::new(&m, ConePointId::NORTH, 0.9, 1.0, -0.4, 1.1).unwrap();
        let v = rescaled_field(&m, &p).unwrap();
        // directional derivative of c = xi^2 + (x eta / a)^2 along v
        let h = 1e-7;
        let mut q = p;
        q.x += h * v.dx;
        q.y += h * v.dy;
        q.xi_bar += h * v.dxi_bar;
        q.eta_bar += h * v.deta_bar;
        let dc = (q.constraint(&m) - p.constraint(&m)) / h;
        assert!(dc.abs() < 1e-6, "constraint derivative {dc}");
    }

    #[test]
    fn field_matches_exact_flow_difference_quotient() {
        let m = spindle23();
        let p = BCospherePoint::new(&m, ConePointId::NORTH, 1.1, 0.7, 0.55, 0.9).unwrap();
        let v = rescaled_field(&m, &p).unwrap();
        let h = 1e-5;
        let fwd = flow_exact(&m, &p, h).unwrap();
        let bwd = flow_exact(&m, &p.reversed(), h).unwrap();
        // central difference of the exact flow (reverse flow = flow of the
        // reversed state)
        let dx = (fwd.x - bwd.x) / (2.0 * h);
        let dy = (fwd.y - bwd.y) / (2.0 * h);
        let dxi = (fwd.xi_bar - (-bwd.xi_bar)) / (2.0 * h);
        let deta = (fwd.eta_bar - (-bwd.eta_bar)) / (2.0 * h);
        assert!((dx - v.dx).abs() < 1e-8, "dx {dx} vs {}", v.dx);
        assert!((dy - v.dy).abs() < 1e-8, "dy {dy} vs {}", v.dy);
        assert!((dxi - v.dxi_bar).abs() < 1e-8, "dxi {dxi} vs {}", v.dxi_bar);
        assert!(
            (deta - v.deta_bar).abs() < 1e-8,
            "deta {deta} vs {}",
            v.deta_bar
        );
    }

    #[test]
    fn field_rejects_bad_states() {
        let m = spindle23();
        let mut p = BCospherePoint::new(&m, ConePointId::NORTH, 0.5, 0.0, 1.0, 0.0).unwrap();
        p.xi_bar = 2.0; // push off the cosphere
        assert!(matches!(
            rescaled_field(&m, &p),
            Err(FlowError::OffConstraint { .. })
        ));
        p.xi_bar = 1.0;
        p.x = 0.0;
        assert!(matches!(
            rescaled_field(&m, &p),
            Err(FlowError::AtConePoint)
        ));
    }

    #[test]
    fn path_validation() {
        let m = spindle23();
        let pole_in = BCospherePoint::new(&m, ConePointId::NORTH, 0.0, 0.2, -1.0, 0.0).unwrap();
        let pole_out = BCospherePoint::new(&m, ConePointId::NORTH, 0.0, 1.2, 1.0, 0.0).unwrap();
        let start = BCospherePoint::new(&m, ConePointId::NORTH, 0.4, 0.2, -1.0, 0.0).unwrap();
        let end = BCospherePoint::new(&m, ConePointId::NORTH, 0.9, 1.2, 1.0, 0.0).unwrap();
        let mut path = GeodesicPath::single(Segment {
            start,
            end: pole_in,
            length: 0.4,
            kind: SegmentKind::Interior,
        });
        path.push(
            JumpKind::Diffractive,
            Segment {
                start: pole_out,
                end,
                length: 0.9,
                kind: SegmentKind::Interior,
            },
        );
        assert!(path.validate(&m));
        assert!((path.total_length - 1.3).abs() < 1e-12);
    }
}
