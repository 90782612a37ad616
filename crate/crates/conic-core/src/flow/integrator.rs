//! Adaptive interior flow: embedded Dormand-Prince 5(4) in unit-speed time,
//! with the cosphere constraint re-projected after every accepted step,
//! chart switching at the equator, and analytic completion of radial
//! (meridian) motion.
//!
//! Radial trajectories are the only ones reaching a cone point; their
//! dynamics degenerate to `x = x0 - t`, so once the Clairaut constant is
//! below the event threshold the motion is completed exactly rather than
//! integrated. Everything else turns around at `a(x) = |clairaut|` and the
//! step controller follows it through the passage.

use std::f64::consts::PI;

use super::{
    field_unchecked, ConeArrival, FlowError, FlowResult, Segment, SegmentKind, RADIAL_CLAIRAUT_TOL,
};
use crate::model::{BCospherePoint, ConicModel, ModelKind};

#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Cone-arrival radius threshold.
    pub x_event: f64,
    /// Cone-arrival angular-alignment threshold.
    pub eta_event: f64,
    pub initial_step: f64,
    pub max_steps: u64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            rtol: 1e-11,
            atol: 1e-12,
            x_event: 1e-8,
            eta_event: 1e-6,
            initial_step: 0.02,
            max_steps: 20_000_000,
        }
    }
}

impl FlowOptions {
    /// A state is treated as exactly radial when its conserved angular
    /// momentum is below x_event * eta_event: by then the turning radius
    /// sits inside the arrival threshold.
    fn clairaut_gate(&self) -> f64 {
        (self.x_event * self.eta_event).max(RADIAL_CLAIRAUT_TOL)
    }
}

/// Flow a single interior segment of at most `target_length`, stopping early
/// at a cone-point arrival. See `flow_interior_observed` to also sample the
/// trajectory.
pub fn flow_interior(
    model: &ConicModel,
    p: &BCospherePoint,
    target_length: f64,
    opts: &FlowOptions,
) -> Result<FlowResult, FlowError> {
    flow_interior_observed(model, p, target_length, opts, |_, _| {})
}

/// As `flow_interior`, invoking `observer(arc_length, state)` at the start
/// and after every accepted step. Observed states carry an unwrapped `y`
/// so azimuth advances can be accumulated across the flow.
pub fn flow_interior_observed<F: FnMut(f64, &BCospherePoint)>(
    model: &ConicModel,
    p: &BCospherePoint,
    target_length: f64,
    opts: &FlowOptions,
    mut observer: F,
) -> Result<FlowResult, FlowError> {
    if !(target_length > 0.0) || !target_length.is_finite() {
        return Err(FlowError::BadLength);
    }
    let mut start = *p;
    let c0 = start.constraint(model);
    if (c0 - 1.0).abs() > 1e-6 {
        return Err(FlowError::OffConstraint {
            excess: (c0 - 1.0).abs(),
        });
    }
    start.renormalize(model);

    let radial = start.clairaut().abs() <= opts.clairaut_gate();
    if start.x <= 0.0 && !(radial && start.xi_bar > 0.0) {
        return Err(FlowError::AtConePoint);
    }

    if radial {
        flow_radial(model, &start, target_length, &mut observer)
    } else {
        flow_rk(model, &start, target_length, opts, &mut observer)
    }
}

/// Exact meridian motion: x advances linearly, charts switch at the equator,
/// arrival completes as x = x0 - t.
fn flow_radial<F: FnMut(f64, &BCospherePoint)>(
    model: &ConicModel,
    start: &BCospherePoint,
    target_length: f64,
    observer: &mut F,
) -> Result<FlowResult, FlowError> {
    let mut chart = start.chart;
    let mut x = start.x;
    let mut dir = start.xi_bar.signum();
    let mut s = 0.0_f64;
    observer(0.0, start);
    let extent = model.chart_extent();
    loop {
        let remaining = target_length - s;
        if dir < 0.0 {
            // heading into this chart's cone point
            if x <= remaining {
                let at = s + x;
                let end = BCospherePoint {
                    chart,
                    x: 0.0,
                    y: start.y,
                    xi_bar: -1.0,
                    eta_bar: 0.0,
                };
                observer(at, &end);
                return Ok(FlowResult {
                    segment: Segment {
                        start: *start,
                        end,
                        length: at,
                        kind: SegmentKind::Interior,
                    },
                    arrival: Some(ConeArrival {
                        component: chart,
                        at_length: at,
                        remaining: target_length - at,
                    }),
                });
            }
            x -= remaining;
            s = target_length;
        } else {
            // heading outward
            let to_edge = extent - x;
            if remaining <= to_edge {
                x += remaining;
                s = target_length;
            } else {
                match model.kind() {
                    ModelKind::Spindle => {
                        // cross the equator into the opposite chart
                        s += to_edge;
                        chart = model.opposite(chart).unwrap();
                        x = extent;
                        dir = -1.0;
                        let mid = BCospherePoint {
                            chart,
                            x,
                            y: start.y,
                            xi_bar: -1.0,
                            eta_bar: 0.0,
                        };
                        observer(s, &mid);
                        continue;
                    }
                    ModelKind::FlatCone => return Err(FlowError::RimReached),
                }
            }
        }
        let end = BCospherePoint {
            chart,
            x,
            y: start.y,
            xi_bar: dir,
            eta_bar: 0.0,
        };
        observer(s, &end);
        return Ok(FlowResult {
            segment: Segment {
                start: *start,
                end,
                length: target_length,
                kind: SegmentKind::Interior,
            },
            arrival: None,
        });
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type State = [f64; 4]; // x, y (unwrapped), xi_bar, eta_bar

fn rhs(model: &ConicModel, st: &State) -> State {
    let v = field_unchecked(model, st[0], st[1], st[2], st[3]);
    [v.dx, v.dy, v.dxi_bar, v.deta_bar]
}

fn flow_rk<F: FnMut(f64, &BCospherePoint)>(
    model: &ConicModel,
    start: &BCospherePoint,
    target_length: f64,
    opts: &FlowOptions,
    observer: &mut F,
) -> Result<FlowResult, FlowError> {
    let extent = model.chart_extent();
    let mut chart = start.chart;
    let mut st: State = [start.x, start.y, start.xi_bar, start.eta_bar];
    let mut s = 0.0_f64;
    let mut h = opts.initial_step.min(target_length);
    let mut steps = 0u64;
    observer(0.0, start);

    while s < target_length {
        if steps >= opts.max_steps {
            return Err(FlowError::MaxSteps { at_length: s });
        }
        steps += 1;
        h = h.min(target_length - s);
        if h < 1e-14 * (1.0 + s) {
            return Err(FlowError::StepUnderflow { at_length: s });
        }

        let mut k = [[0.0_f64; 4]; 7];
        k[0] = rhs(model, &st);
        let mut bad_stage = false;
        for i in 0..6 {
            let mut y = st;
            for (n, yn) in y.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(i + 1) {
                    acc += A[i][j] * kj[n];
                }
                *yn += h * acc;
            }
            let _ = C; // stage abscissae unused: the field is autonomous
            if y[0] <= 0.0 || (model.kind() == ModelKind::Spindle && y[0] >= PI) {
                bad_stage = true;
                break;
            }
            k[i + 1] = rhs(model, &y);
        }
        if bad_stage {
            h *= 0.5;
            continue;
        }

        let mut y5 = st;
        let mut err = 0.0_f64;
        for n in 0..4 {
            let mut acc5 = 0.0;
            let mut acc4 = 0.0;
            for j in 0..7 {
                acc5 += B5[j] * k[j][n];
                acc4 += B4[j] * k[j][n];
            }
            y5[n] = st[n] + h * acc5;
            let scale = opts.atol + opts.rtol * st[n].abs().max((st[n] + h * acc5).abs());
            let e = h * (acc5 - acc4) / scale;
            err += e * e;
        }
        err = (err / 4.0).sqrt();

        if err <= 1.0 {
            if y5[0] <= 0.0 {
                h *= 0.5;
                continue;
            }
            st = y5;
            s += h;
            // project the momenta back onto the cosphere
            let mut p = BCospherePoint {
                chart,
                x: st[0],
                y: st[1],
                xi_bar: st[2],
                eta_bar: st[3],
            };
            let c = p.constraint(model);
            let scale = c.sqrt();
            p.xi_bar /= scale;
            p.eta_bar /= scale;
            // chart switch past the spindle equator
            if model.kind() == ModelKind::Spindle && p.x > extent {
                p = BCospherePoint {
                    chart: model.opposite(chart).unwrap(),
                    x: PI - p.x,
                    y: p.y,
                    xi_bar: -p.xi_bar,
                    eta_bar: p.eta_bar * p.x / (PI - p.x),
                };
                chart = p.chart;
            }
            if model.kind() == ModelKind::FlatCone && p.x > model.rim_radius() {
                return Err(FlowError::RimReached);
            }
            st = [p.x, p.y, p.xi_bar, p.eta_bar];
            observer(s, &p);
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }

    let end = BCospherePoint {
        chart,
        x: st[0],
        y: st[1],
        xi_bar: st[2],
        eta_bar: st[3],
    };
    Ok(FlowResult {
        segment: Segment {
            start: *start,
            end,
            length: target_length,
            kind: SegmentKind::Interior,
        },
        arrival: None,
    })
}
