//! Numerical laboratory for geodesic flow and wave-trace analysis on 2-D
//! surfaces with cone points (spindles and flat cones).
//!
//! The pipeline: build a model, enumerate its closed diffractive and
//! geometric geodesics, synthesize the smoothed wave trace from the exact
//! eigenvalue table, and check that the trace is singular only at lengths of
//! closed diffractive geodesics, with weaker singularities away from the
//! geometric ones.

// negated comparisons like `!(x > 0.0)` are used deliberately: they reject
// NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod flow;
pub mod lengths;
pub mod model;
pub mod oracle;
pub mod spectrum;
pub mod sum;
pub mod trace;

pub use model::{Alpha, BCospherePoint, ConePointId, ConicModel, ModelKind, RimCondition};
