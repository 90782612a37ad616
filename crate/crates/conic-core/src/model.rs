//! Conic-surface models: spindles and flat cones of revolution.
//!
//! Both families carry a metric of the form `dx^2 + a(x)^2 dphi^2` near each
//! cone point, with `a(x) ~ alpha x` as `x -> 0`. The cross section at a cone
//! point is a circle of circumference `2 pi alpha`.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

pub const TAU: f64 = 2.0 * PI;

/// Cone parameter: the cone angle is `2 pi alpha`. Stored exactly when given
/// as a ratio of integers; rationality drives closed-geodesic enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    /// Exact `p/q` in lowest terms, `p, q >= 1`.
    Rational(u64, u64),
    /// Irrational (or decimal-given) value.
    Real(f64),
}

impl Alpha {
    pub fn rational(p: u64, q: u64) -> Result<Self, ModelError> {
        if p == 0 || q == 0 {
            return Err(ModelError::NonPositiveAlpha);
        }
        let g = gcd(p, q);
        Ok(Alpha::Rational(p / g, q / g))
    }

    pub fn real(v: f64) -> Result<Self, ModelError> {
        if !(v > 0.0) || !v.is_finite() {
            return Err(ModelError::NonPositiveAlpha);
        }
        Ok(Alpha::Real(v))
    }

    /// Parse `p/q` (kept exact) or a decimal literal.
    pub fn parse(s: &str) -> Result<Self, ModelError> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: u64 = p
                .trim()
                .parse()
                .map_err(|_| ModelError::BadAlphaLiteral(s.to_string()))?;
            let q: u64 = q
                .trim()
                .parse()
                .map_err(|_| ModelError::BadAlphaLiteral(s.to_string()))?;
            Alpha::rational(p, q)
        } else {
            let v: f64 = s
                .parse()
                .map_err(|_| ModelError::BadAlphaLiteral(s.to_string()))?;
            Alpha::real(v)
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Alpha::Rational(p, q) => p as f64 / q as f64,
            Alpha::Real(v) => v,
        }
    }

    pub fn as_rational(self) -> Option<(u64, u64)> {
        match self {
            Alpha::Rational(p, q) => Some((p, q)),
            Alpha::Real(_) => None,
        }
    }

    /// Canonical text form used in manifests and cache keys.
    pub fn canonical(&self) -> String {
        match self {
            Alpha::Rational(p, q) => format!("{}/{}", p, q),
            Alpha::Real(v) => format!("{:.16e}", v),
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Spindle,
    FlatCone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RimCondition {
    Dirichlet,
    Neumann,
}

impl fmt::Display for RimCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RimCondition::Dirichlet => f.write_str("dirichlet"),
            RimCondition::Neumann => f.write_str("neumann"),
        }
    }
}

/// Identifies a boundary component (cone point). The spindle has two
/// (`NORTH` at theta = 0, `SOUTH` at theta = pi); the flat cone has one
/// (`TIP`). Doubles as the chart label: a chart's radial coordinate is the
/// distance to its cone point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConePointId(pub usize);

impl ConePointId {
    pub const NORTH: ConePointId = ConePointId(0);
    pub const SOUTH: ConePointId = ConePointId(1);
    pub const TIP: ConePointId = ConePointId(0);
}

/// Circle cross section with metric `h0 = alpha^2 dphi^2`.
#[derive(Debug, Clone, Copy)]
pub struct CrossSection {
    alpha: f64,
}

impl CrossSection {
    pub fn circumference(&self) -> f64 {
        TAU * self.alpha
    }

    /// h0-distance between two cross-section angles.
    pub fn distance(&self, y1: f64, y2: f64) -> f64 {
        let d = (normalize_angle(y1) - normalize_angle(y2)).abs();
        self.alpha * d.min(TAU - d)
    }

    /// Diameter of the cross section, `pi alpha`.
    pub fn diameter(&self) -> f64 {
        PI * self.alpha
    }
}

/// Wrap an angle into `[0, 2 pi)`.
pub fn normalize_angle(y: f64) -> f64 {
    let r = y.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("alpha must be positive")]
    NonPositiveAlpha,
    #[error("cannot parse alpha literal `{0}` (expected p/q or decimal)")]
    BadAlphaLiteral(String),
    #[error("flat cone rim radius must be positive")]
    NonPositiveRim,
    #[error("coordinate {coord} outside model range [{lo}, {hi}]")]
    CoordinateOutOfRange { coord: f64, lo: f64, hi: f64 },
    #[error("invalid cone point id {0:?} for this model")]
    InvalidConePoint(ConePointId),
    #[error("direction vector is zero; cannot normalize onto the cosphere")]
    ZeroDirection,
}

/// An immutable 2-D conic surface of revolution.
#[derive(Debug, Clone)]
pub struct ConicModel {
    kind: ModelKind,
    alpha: Alpha,
    dimension: u32,
    rim_radius: f64,
    rim_condition: RimCondition,
}

impl ConicModel {
    /// Spindle (football): `d theta^2 + alpha^2 sin^2 theta dphi^2` on
    /// `theta in [0, pi]`, cone points at both ends.
    pub fn spindle(alpha: Alpha) -> Result<Self, ModelError> {
        if !(alpha.value() > 0.0) {
            return Err(ModelError::NonPositiveAlpha);
        }
        Ok(ConicModel {
            kind: ModelKind::Spindle,
            alpha,
            dimension: 2,
            rim_radius: f64::NAN,
            rim_condition: RimCondition::Dirichlet,
        })
    }

    /// Flat cone: `dx^2 + alpha^2 x^2 dphi^2` on `x in (0, rim]`, one cone
    /// point at the tip. The rim lies outside the closed-manifold hypotheses
    /// and is only used as a spectral testbed.
    pub fn flat_cone(alpha: Alpha, rim_radius: f64, bc: RimCondition) -> Result<Self, ModelError> {
        if !(alpha.value() > 0.0) {
            return Err(ModelError::NonPositiveAlpha);
        }
        if !(rim_radius > 0.0) || !rim_radius.is_finite() {
            return Err(ModelError::NonPositiveRim);
        }
        Ok(ConicModel {
            kind: ModelKind::FlatCone,
            alpha,
            dimension: 2,
            rim_radius,
            rim_condition: bc,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn alpha_value(&self) -> f64 {
        self.alpha.value()
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn rim_radius(&self) -> f64 {
        self.rim_radius
    }

    pub fn rim_condition(&self) -> RimCondition {
        self.rim_condition
    }

    pub fn cross_section(&self) -> CrossSection {
        CrossSection {
            alpha: self.alpha_value(),
        }
    }

    pub fn cone_points(&self) -> &'static [ConePointId] {
        match self.kind {
            ModelKind::Spindle => &[ConePointId::NORTH, ConePointId::SOUTH],
            ModelKind::FlatCone => &[ConePointId::TIP],
        }
    }

    pub fn is_cone_point(&self, id: ConePointId) -> bool {
        self.cone_points().contains(&id)
    }

    /// The chart reached by following the global coordinate forward from
    /// `from` (spindle: the opposite pole; flat cone: none).
    pub fn opposite(&self, from: ConePointId) -> Option<ConePointId> {
        match self.kind {
            ModelKind::Spindle => Some(if from == ConePointId::NORTH {
                ConePointId::SOUTH
            } else {
                ConePointId::NORTH
            }),
            ModelKind::FlatCone => None,
        }
    }

    /// Upper end of the global coordinate range (`pi` for the spindle,
    /// the rim radius for the flat cone).
    pub fn coordinate_max(&self) -> f64 {
        match self.kind {
            ModelKind::Spindle => PI,
            ModelKind::FlatCone => self.rim_radius,
        }
    }

    /// Profile radius `a` at a global coordinate (`theta` for the spindle,
    /// distance from the tip for the flat cone).
    pub fn profile(&self, theta: f64) -> Result<f64, ModelError> {
        let hi = self.coordinate_max();
        if !(0.0..=hi).contains(&theta) {
            return Err(ModelError::CoordinateOutOfRange {
                coord: theta,
                lo: 0.0,
                hi,
            });
        }
        Ok(self.profile_chart(theta))
    }

    /// Profile in chart-local form. For the spindle both charts see the same
    /// `a(x) = alpha sin x` (sin(pi - x) = sin x), so no chart argument is
    /// needed; the flat cone is `alpha x`.
    #[inline]
    pub fn profile_chart(&self, x: f64) -> f64 {
        match self.kind {
            ModelKind::Spindle => self.alpha_value() * x.sin(),
            ModelKind::FlatCone => self.alpha_value() * x,
        }
    }

    /// d a / d x in chart-local coordinates.
    #[inline]
    pub fn profile_deriv_chart(&self, x: f64) -> f64 {
        match self.kind {
            ModelKind::Spindle => self.alpha_value() * x.cos(),
            ModelKind::FlatCone => self.alpha_value(),
        }
    }

    /// Chart-local coordinate of the chart-switch boundary (spindle:
    /// equator at `x = pi/2`; flat cone: the rim).
    pub fn chart_extent(&self) -> f64 {
        match self.kind {
            ModelKind::Spindle => PI / 2.0,
            ModelKind::FlatCone => self.rim_radius,
        }
    }

    /// h0-distance on the cross-section circle at a cone point.
    pub fn cross_section_distance(&self, y1: f64, y2: f64) -> f64 {
        self.cross_section().distance(y1, y2)
    }

    /// Surface area (`4 pi alpha` for the spindle, `pi alpha R^2` for the
    /// flat cone); the Weyl slope target is `area / 4 pi`.
    pub fn area(&self) -> f64 {
        match self.kind {
            ModelKind::Spindle => 4.0 * PI * self.alpha_value(),
            ModelKind::FlatCone => PI * self.alpha_value() * self.rim_radius * self.rim_radius,
        }
    }

    /// Canonical descriptor used for manifests, cache keys, and cross-file
    /// consistency checks.
    pub fn descriptor(&self) -> String {
        match self.kind {
            ModelKind::Spindle => format!("spindle alpha={} dim=2", self.alpha.canonical()),
            ModelKind::FlatCone => format!(
                "flatcone alpha={} rim={:.16e} bc={} dim=2",
                self.alpha.canonical(),
                self.rim_radius,
                self.rim_condition
            ),
        }
    }
}

/// A state in the rescaled b-cosphere bundle, in chart-local coordinates:
/// `x` is the distance to the chart's cone point, `y` the cross-section
/// angle, and `(xi_bar, eta_bar)` the rescaled momenta subject to
/// `xi_bar^2 + (x eta_bar / a(x))^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BCospherePoint {
    pub chart: ConePointId,
    pub x: f64,
    pub y: f64,
    pub xi_bar: f64,
    pub eta_bar: f64,
}

impl BCospherePoint {
    /// Build a state on the constraint set, rescaling `(xi_bar, eta_bar)`
    /// onto the cosphere. Errors on a zero direction or invalid chart.
    pub fn new(
        model: &ConicModel,
        chart: ConePointId,
        x: f64,
        y: f64,
        xi_bar: f64,
        eta_bar: f64,
    ) -> Result<Self, ModelError> {
        if !model.is_cone_point(chart) {
            return Err(ModelError::InvalidConePoint(chart));
        }
        let mut p = BCospherePoint {
            chart,
            x,
            y: normalize_angle(y),
            xi_bar,
            eta_bar,
        };
        let c = p.constraint(model);
        if !(c > 0.0) || !c.is_finite() {
            return Err(ModelError::ZeroDirection);
        }
        p.renormalize(model);
        p.renormalize(model);
        Ok(p)
    }

    /// Constraint functional `c(p) = xi_bar^2 + h(eta_bar, eta_bar)`; equals
    /// 1 on the cosphere. Over a cone point (`x = 0`) the metric factor
    /// `x/a(x) -> 1/alpha` is taken in the limit.
    pub fn constraint(&self, model: &ConicModel) -> f64 {
        let r = self.x_over_a(model);
        self.xi_bar * self.xi_bar + (r * self.eta_bar) * (r * self.eta_bar)
    }

    #[inline]
    fn x_over_a(&self, model: &ConicModel) -> f64 {
        if self.x == 0.0 {
            1.0 / model.alpha_value()
        } else {
            self.x / model.profile_chart(self.x)
        }
    }

    /// Project the momenta back onto the constraint set.
    pub fn renormalize(&mut self, model: &ConicModel) {
        let c = self.constraint(model);
        let s = c.sqrt();
        self.xi_bar /= s;
        self.eta_bar /= s;
    }

    /// Conserved angular momentum `eta = x eta_bar` (the Clairaut constant
    /// for surfaces of revolution; zero exactly on meridians).
    pub fn clairaut(&self) -> f64 {
        self.x * self.eta_bar
    }

    /// Reverse the direction of motion.
    pub fn reversed(&self) -> Self {
        BCospherePoint {
            xi_bar: -self.xi_bar,
            eta_bar: -self.eta_bar,
            ..*self
        }
    }

    /// Global coordinate of the point (spindle: colatitude theta).
    pub fn theta_global(&self, model: &ConicModel) -> f64 {
        match model.kind() {
            ModelKind::Spindle => {
                if self.chart == ConePointId::NORTH {
                    self.x
                } else {
                    PI - self.x
                }
            }
            ModelKind::FlatCone => self.x,
        }
    }

    /// Euclidean-style distance between two states, mapping both to global
    /// coordinates; used for endpoint comparisons in tests.
    pub fn state_distance(&self, other: &Self, model: &ConicModel) -> f64 {
        let t1 = self.theta_global(model);
        let t2 = other.theta_global(model);
        let dy = {
            let d = (normalize_angle(self.y) - normalize_angle(other.y)).abs();
            d.min(TAU - d)
        };
        // xi_bar flips sign between spindle charts
        let sign1 = if self.chart == ConePointId::SOUTH {
            -1.0
        } else {
            1.0
        };
        let sign2 = if other.chart == ConePointId::SOUTH {
            -1.0
        } else {
            1.0
        };
        let dxi = sign1 * self.xi_bar - sign2 * other.xi_bar;
        let deta = self.clairaut() - other.clairaut();
        ((t1 - t2).powi(2) + dy * dy + dxi * dxi + deta * deta).sqrt()
    }
}
