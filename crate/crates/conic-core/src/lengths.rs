//! Enumeration of closed diffractive and geometric geodesics up to a length
//! horizon, and the sets Dif / Geo they generate.
//!
//! On the spindle the cone-hitting geodesics are exactly the meridians, so
//! diffractive concatenations are counted combinatorially: every closed
//! chain through the boundary is a string of pole-to-pole meridians of
//! length pi each, closing at lengths 2 pi n. Smooth closed geodesics are
//! the equator iterates plus, for rational alpha = p/q, the one-parameter
//! family closing after p radial oscillations at length 2 pi p (the
//! per-oscillation azimuth advance is 2 pi / alpha).

use std::f64::consts::PI;

use thiserror::Error;

use crate::model::{Alpha, ConicModel, ModelKind, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodesicClass {
    Smooth,
    DiffractiveOnly,
    GeometricThroughCone,
}

impl GeodesicClass {
    pub fn as_str(self) -> &'static str {
        match self {
            GeodesicClass::Smooth => "smooth",
            GeodesicClass::DiffractiveOnly => "diffractive_only",
            GeodesicClass::GeometricThroughCone => "geometric_through_cone",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplicityHint {
    Isolated,
    OneParameterFamily,
}

#[derive(Debug, Clone)]
pub struct ClosedGeodesicRecord {
    pub length: f64,
    pub class: GeodesicClass,
    pub description: String,
    pub multiplicity_hint: MultiplicityHint,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LengthError {
    #[error("horizon must be positive")]
    BadHorizon,
    #[error("operation requires a spindle model")]
    WrongModel,
    #[error("oscillation quadrature did not converge (reached {reached:e}, want {want:e})")]
    QuadratureFailure { reached: f64, want: f64 },
}

const DEDUP_TOL: f64 = 1e-9;
/// Tolerance of the commensurability scan for irrational alpha.
const CLOSURE_SCAN_TOL: f64 = 1e-8;

/// Per-oscillation azimuth advance and oscillation length at Clairaut
/// constant `c in (0, alpha)`, by quadrature with inverse-square-root
/// endpoint substitution. Adaptive Simpson refinement to `tol`.
pub fn oscillation_advance(
    model: &ConicModel,
    c: f64,
    tol: f64,
) -> Result<(f64, f64), LengthError> {
    if model.kind() != ModelKind::Spindle {
        return Err(LengthError::WrongModel);
    }
    let alpha = model.alpha_value();
    assert!(c > 0.0 && c < alpha, "Clairaut constant out of range");
    let theta_min = (c / alpha).asin();
    let mid = PI / 2.0;
    let sin_min = c / alpha;
    // dphi = c / (a sqrt(a^2 - c^2)) dtheta, dt = a / sqrt(a^2 - c^2) dtheta.
    // Substitute th = theta_min + s^2 and expand the vanishing factor as
    //   sin th - sin theta_min = 2 cos((th + theta_min)/2) sin(s^2 / 2),
    // which stays exact where direct subtraction cancels. The profile is
    // symmetric about the equator, so the quarter oscillation
    // [theta_min, pi/2] carries a quarter of both integrals.
    let da = alpha * theta_min.cos();
    let phi_limit = 2.0 / (2.0 * c * da).sqrt();
    let len_limit = (2.0 * c / da).sqrt();
    let root = move |th: f64, s: f64| {
        let diff = 2.0 * (0.5 * (th + theta_min)).cos() * (0.5 * s * s).sin();
        alpha * (diff * (th.sin() + sin_min)).sqrt()
    };
    let smax = (mid - theta_min).sqrt();
    let g_phi = move |s: f64| {
        if s == 0.0 {
            return phi_limit;
        }
        let th = theta_min + s * s;
        2.0 * s * c / (alpha * th.sin() * root(th, s))
    };
    let g_len = move |s: f64| {
        if s == 0.0 {
            return len_limit;
        }
        let th = theta_min + s * s;
        2.0 * s * alpha * th.sin() / root(th, s)
    };
    let phi_quarter = adaptive_simpson(&g_phi, 0.0, smax, tol)?;
    let len_quarter = adaptive_simpson(&g_len, 0.0, smax, tol)?;
    Ok((4.0 * phi_quarter, 4.0 * len_quarter))
}

fn adaptive_simpson(
    g: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, LengthError> {
    fn simpson(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (g(a) + 4.0 * g(0.5 * (a + b)) + g(b))
    }
    fn recurse(
        g: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, LengthError> {
        let m = 0.5 * (a + b);
        let left = simpson(g, a, m);
        let right = simpson(g, m, b);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol {
            return Ok(left + right + err / 15.0);
        }
        if depth == 0 {
            return Err(LengthError::QuadratureFailure {
                reached: err.abs() / 15.0,
                want: tol,
            });
        }
        Ok(recurse(g, a, m, left, tol * 0.5, depth - 1)?
            + recurse(g, m, b, right, tol * 0.5, depth - 1)?)
    }
    let whole = simpson(g, lo, hi);
    recurse(g, lo, hi, whole, tol, 48)
}

/// Smooth closed geodesics of the spindle up to `horizon`: equator iterates
/// always; the non-equatorial family exists iff the per-oscillation advance
/// `2 pi / alpha` is commensurate with `2 pi`.
pub fn smooth_closed_lengths(
    model: &ConicModel,
    horizon: f64,
) -> Result<Vec<ClosedGeodesicRecord>, LengthError> {
    if !(horizon > 0.0) {
        return Err(LengthError::BadHorizon);
    }
    if model.kind() != ModelKind::Spindle {
        return Err(LengthError::WrongModel);
    }
    let alpha = model.alpha_value();
    let mut records = Vec::new();

    // equator: primitive length 2 pi alpha
    let equator = TAU * alpha;
    let mut n = 1u64;
    while n as f64 * equator <= horizon + DEDUP_TOL {
        records.push(ClosedGeodesicRecord {
            length: n as f64 * equator,
            class: GeodesicClass::Smooth,
            description: format!("equator x{n}"),
            multiplicity_hint: MultiplicityHint::Isolated,
        });
        n += 1;
    }

    // oscillating family: closes after p oscillations of length 2 pi each
    let primitive_osc = match model.alpha() {
        Alpha::Rational(p, _q) => Some(p),
        Alpha::Real(_) => {
            // tolerance scan: q oscillations advance 2 pi q / alpha, closure
            // needs it to be 2 pi p for integers p, q
            let mut hit = None;
            let qmax = (horizon / TAU).floor() as u64;
            'scan: for q in 1..=qmax {
                let advance = q as f64 / alpha;
                let p = advance.round();
                if p >= 1.0 && (advance - p).abs() * TAU < CLOSURE_SCAN_TOL {
                    hit = Some(q);
                    break 'scan;
                }
            }
            hit
        }
    };
    if let Some(p) = primitive_osc {
        // cross-check the exact rational bookkeeping against the quadrature
        let (dphi, osc_len) = oscillation_advance(model, 0.5 * alpha, 1e-11)?;
        debug_assert!((dphi - TAU / alpha).abs() < 1e-8);
        debug_assert!((osc_len - TAU).abs() < 1e-8);
        let primitive = TAU * p as f64;
        let mut m = 1u64;
        while m as f64 * primitive <= horizon + DEDUP_TOL {
            records.push(ClosedGeodesicRecord {
                length: m as f64 * primitive,
                class: GeodesicClass::Smooth,
                description: format!("oscillation family (p={p}) x{m}"),
                multiplicity_hint: MultiplicityHint::OneParameterFamily,
            });
            m += 1;
        }
    }

    dedup_records(&mut records);
    Ok(records)
}

/// All closed diffractive geodesics up to `horizon`: the boundary-passing
/// chains plus the smooth ones (which are trivially diffractive). Flat-cone
/// models return the rim-reflection testbed records.
pub fn diffractive_closed_lengths(
    model: &ConicModel,
    horizon: f64,
) -> Result<Vec<ClosedGeodesicRecord>, LengthError> {
    if !(horizon > 0.0) {
        return Err(LengthError::BadHorizon);
    }
    match model.kind() {
        ModelKind::Spindle => {
            let mut records = smooth_closed_lengths(model, horizon)?;
            // meridian chains: 2n pole-to-pole segments, length 2 pi n;
            // the chain is geometric iff the cross section can realize
            // h0-distance pi, i.e. alpha >= 1
            let geometric = match model.alpha() {
                Alpha::Rational(p, q) => q <= p,
                Alpha::Real(a) => a >= 1.0,
            };
            let mut n = 1u64;
            while n as f64 * TAU <= horizon + DEDUP_TOL {
                records.push(ClosedGeodesicRecord {
                    length: n as f64 * TAU,
                    class: if geometric {
                        GeodesicClass::GeometricThroughCone
                    } else {
                        GeodesicClass::DiffractiveOnly
                    },
                    description: format!("meridian x{}", 2 * n),
                    multiplicity_hint: MultiplicityHint::OneParameterFamily,
                });
                n += 1;
            }
            dedup_records(&mut records);
            Ok(records)
        }
        ModelKind::FlatCone => {
            // testbed: tip -> rim -> tip bounces (rim reflection lies outside
            // the closed-manifold hypotheses)
            let bounce = 2.0 * model.rim_radius();
            let mut records = Vec::new();
            let mut n = 1u64;
            while n as f64 * bounce <= horizon + DEDUP_TOL {
                records.push(ClosedGeodesicRecord {
                    length: n as f64 * bounce,
                    class: GeodesicClass::DiffractiveOnly,
                    description: format!("tip bounce x{n} (testbed)"),
                    multiplicity_hint: MultiplicityHint::OneParameterFamily,
                });
                n += 1;
            }
            Ok(records)
        }
    }
}

fn dedup_records(records: &mut Vec<ClosedGeodesicRecord>) {
    records.sort_by(|a, b| {
        a.length
            .partial_cmp(&b.length)
            .unwrap()
            .then_with(|| a.description.cmp(&b.description))
    });
    let mut out: Vec<ClosedGeodesicRecord> = Vec::with_capacity(records.len());
    for r in records.drain(..) {
        if let Some(last) = out.last_mut() {
            if (last.length - r.length).abs() <= DEDUP_TOL && last.class == r.class {
                if !last.description.contains(&r.description) {
                    last.description = format!("{}; {}", last.description, r.description);
                }
                if r.multiplicity_hint == MultiplicityHint::OneParameterFamily {
                    last.multiplicity_hint = MultiplicityHint::OneParameterFamily;
                }
                continue;
            }
        }
        out.push(r);
    }
    *records = out;
}

/// A length with its set membership.
#[derive(Debug, Clone)]
pub struct TaggedLength {
    pub length: f64,
    pub in_geo: bool,
    /// classes of the records realizing this length
    pub classes: Vec<GeodesicClass>,
    pub description: String,
}

#[derive(Debug, Clone)]
pub struct LengthSets {
    pub records: Vec<ClosedGeodesicRecord>,
    pub lengths: Vec<TaggedLength>,
}

impl LengthSets {
    pub fn dif(&self) -> Vec<f64> {
        self.lengths.iter().map(|l| l.length).collect()
    }

    pub fn geo(&self) -> Vec<f64> {
        self.lengths
            .iter()
            .filter(|l| l.in_geo)
            .map(|l| l.length)
            .collect()
    }
}

/// Assemble Dif and Geo up to `horizon`. Geo collects the smooth records and
/// the cone-passing chains whose every jump admits the pi-pairing; zero is
/// excluded (the trace scanner treats t = 0 separately).
pub fn length_sets(model: &ConicModel, horizon: f64) -> Result<LengthSets, LengthError> {
    let records = diffractive_closed_lengths(model, horizon)?;
    let mut lengths: Vec<TaggedLength> = Vec::new();
    for r in &records {
        let geo = r.class != GeodesicClass::DiffractiveOnly;
        match lengths
            .iter_mut()
            .find(|l| (l.length - r.length).abs() <= DEDUP_TOL)
        {
            Some(l) => {
                l.in_geo |= geo;
                l.classes.push(r.class);
                l.description = format!("{}; {}", l.description, r.description);
            }
            None => lengths.push(TaggedLength {
                length: r.length,
                in_geo: geo,
                classes: vec![r.class],
                description: r.description.clone(),
            }),
        }
    }
    lengths.sort_by(|a, b| a.length.partial_cmp(&b.length).unwrap());
    Ok(LengthSets { records, lengths })
}
