//! Independent brute-force verifiers: a radial shooting eigensolver for the
//! spindle spectrum and a dense Clairaut-constant scan for closed geodesics.
//! These ground every derived value in the main paths; they are allowed to
//! be slow.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::lengths::LengthError;
use crate::model::{ConicModel, ModelKind, TAU};

#[derive(Debug, Clone, Copy)]
pub struct ShootingConfig {
    /// Integration steps per half interval (>= 1e3).
    pub grid: usize,
    /// Clip distance from the poles where the boundary expansion is applied.
    pub clip_delta: f64,
    /// Relative tolerance of the eigenvalue root refinement.
    pub secant_tol: f64,
    /// Initial lambda scan step (adapted upward with sqrt(lambda)).
    pub scan_step: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig {
            grid: 48_000,
            clip_delta: 1e-3,
            secant_tol: 1e-10,
            scan_step: 0.9,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("shooting oracle requires a spindle model")]
    WrongModel,
    #[error("grid must have at least 1e3 points")]
    GridTooSmall,
    #[error("count must be between 1 and 50")]
    BadCount,
    #[error("eigenvalue scan stalled (suspected missed eigenvalue near lambda = {near}); rerun with a finer scan")]
    MissedEigenvalue { near: f64 },
    #[error(transparent)]
    Quadrature(#[from] LengthError),
}

/// Mode-m radial eigenvalue problem on the spindle,
/// `-u'' - (a'/a) u' + (m/alpha)^2 / sin^2(theta) u = lambda u`,
/// with the Friedrichs branch `u ~ theta^(m/alpha)` imposed at both poles
/// through a three-term boundary expansion at `theta = delta`.
///
/// Returns the first `count` nonzero eigenvalues (the constant zero mode of
/// m = 0 is omitted). Integration is second-order (midpoint) with outward
/// shooting from both poles and a Wronskian mismatch at the equator.
pub fn shoot_radial_eigen(
    model: &ConicModel,
    m: u32,
    count: usize,
    config: &ShootingConfig,
) -> Result<Vec<f64>, OracleError> {
    if model.kind() != ModelKind::Spindle {
        return Err(OracleError::WrongModel);
    }
    if config.grid < 1_000 {
        return Err(OracleError::GridTooSmall);
    }
    if count == 0 || count > 50 {
        return Err(OracleError::BadCount);
    }
    let mu = m as f64 / model.alpha_value();
    let shooter = Shooter::new(mu, config);

    let mut eigen = Vec::with_capacity(count);
    let mut lambda = 0.5_f64; // above the zero mode
    let mut w_prev = shooter.mismatch(lambda);
    let mut stalls = 0u32;
    while eigen.len() < count {
        let step = config.scan_step.max(0.55 * lambda.sqrt());
        let next = lambda + step;
        let w_next = shooter.mismatch(next);
        if w_prev == 0.0 {
            eigen.push(lambda);
        } else if w_prev.signum() != w_next.signum() {
            eigen.push(shooter.bisect(lambda, next, w_prev));
            stalls = 0;
        } else {
            stalls += 1;
            // gaps grow like 2 sqrt(lambda); many empty windows in a row
            // indicate a sign change the scan failed to see
            if stalls as f64 * step > 8.0 * (lambda.sqrt() + 2.0) {
                return Err(OracleError::MissedEigenvalue { near: lambda });
            }
        }
        lambda = next;
        w_prev = w_next;
    }
    Ok(eigen)
}

struct Shooter {
    mu: f64,
    delta: f64,
    n: usize,
    /// cot(theta) at grid nodes and midpoints (stride 1/2)
    cot: Vec<f64>,
    /// 1/sin^2(theta) likewise
    inv_sin2: Vec<f64>,
    h: f64,
    secant_tol: f64,
}

impl Shooter {
    fn new(mu: f64, config: &ShootingConfig) -> Self {
        let delta = config.clip_delta;
        let n = config.grid;
        let h = (PI / 2.0 - delta) / n as f64;
        let mut cot = Vec::with_capacity(2 * n + 1);
        let mut inv_sin2 = Vec::with_capacity(2 * n + 1);
        for i in 0..=(2 * n) {
            let th = delta + 0.5 * h * i as f64;
            let s = th.sin();
            cot.push(th.cos() / s);
            inv_sin2.push(1.0 / (s * s));
        }
        Shooter {
            mu,
            delta,
            n,
            cot,
            inv_sin2,
            h,
            secant_tol: config.secant_tol,
        }
    }

    /// Frobenius data at theta = delta: u = theta^mu (1 + A theta^2 + B theta^4),
    /// normalized to u(delta) = 1.
    fn boundary_state(&self, lambda: f64) -> (f64, f64) {
        let mu = self.mu;
        let d = self.delta;
        let a = (mu * (mu + 1.0) - 3.0 * lambda) / (12.0 * (mu + 1.0));
        let b = (a * ((mu + 2.0 + mu * mu) / 3.0 - lambda) + mu / 45.0 + mu * mu / 15.0)
            / (8.0 * (mu + 2.0));
        let series = 1.0 + a * d * d + b * d * d * d * d;
        let dseries = mu + (mu + 2.0) * a * d * d + (mu + 4.0) * b * d * d * d * d;
        (1.0, dseries / (d * series))
    }

    /// Integrate (u, u') from delta to pi/2 by the midpoint rule; returns the
    /// state at the equator, rescaled along the way to avoid overflow.
    fn integrate_half(&self, lambda: f64) -> (f64, f64) {
        let (mut u, mut w) = self.boundary_state(lambda);
        let mu2 = self.mu * self.mu;
        let h = self.h;
        for i in 0..self.n {
            let (c0, s0) = (self.cot[2 * i], self.inv_sin2[2 * i]);
            let (cm, sm) = (self.cot[2 * i + 1], self.inv_sin2[2 * i + 1]);
            // u'' = -cot u' + (mu^2/sin^2 - lambda) u
            let du = w;
            let dw = -c0 * w + (mu2 * s0 - lambda) * u;
            let um = u + 0.5 * h * du;
            let wm = w + 0.5 * h * dw;
            u += h * wm;
            w += h * (-cm * wm + (mu2 * sm - lambda) * um);
            let mag = u.abs().max(w.abs());
            if mag > 1e200 {
                u /= mag;
                w /= mag;
            }
        }
        (u, w)
    }

    /// Wronskian mismatch at the equator between the left and right shots.
    /// The right shot mirrors the left (the profile is symmetric), with the
    /// derivative flipped by the orientation.
    fn mismatch(&self, lambda: f64) -> f64 {
        let (ul, wl) = self.integrate_half(lambda);
        let (ur, wr_mirrored) = self.integrate_half(lambda);
        let wr = -wr_mirrored;
        let w = ul * wr - wl * ur;
        // normalize so the scan sees O(1) values
        w / (ul * ul + wl * wl).max(1e-300)
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, mut w_lo: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (hi - lo) <= self.secant_tol * mid.max(1.0) {
                return mid;
            }
            let w_mid = self.mismatch(mid);
            if w_mid == 0.0 {
                return mid;
            }
            if w_mid.signum() == w_lo.signum() {
                lo = mid;
                w_lo = w_mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// A closed geodesic found by the dense scan: its length and the Clairaut
/// constant of a representative (c = 0 labels the meridian chain, c = alpha
/// the equator).
#[derive(Debug, Clone, Copy)]
pub struct ClosureHit {
    pub length: f64,
    pub clairaut: f64,
    pub oscillations: u32,
}

/// Dense scan over Clairaut constants `c in (0, alpha)`: for each grid value
/// the per-oscillation azimuth advance is computed by quadrature, the
/// closure defect after n <= n_max oscillations is evaluated, and defect
/// roots are refined by bisection. The equator and the meridian chain enter
/// as analytic limits of the scan range.
///
/// Deterministic for fixed inputs; no randomized search.
pub fn closure_search(
    model: &ConicModel,
    horizon: f64,
    grid: usize,
) -> Result<Vec<ClosureHit>, OracleError> {
    assert!(model.kind() == ModelKind::Spindle, "spindle models only");
    assert!(
        horizon > 0.0 && horizon <= 30.0,
        "horizon must be in (0, 30]"
    );
    let alpha = model.alpha_value();
    let mut hits = Vec::new();

    // meridian chain limit (c -> 0): pole-to-pole distance by direct
    // quadrature of dt = dtheta
    let meridian_loop = 2.0 * PI;
    let mut n = 1u32;
    while n as f64 * meridian_loop <= horizon {
        hits.push(ClosureHit {
            length: n as f64 * meridian_loop,
            clairaut: 0.0,
            oscillations: 0,
        });
        n += 1;
    }
    // equator limit (c -> alpha)
    let equator = TAU * alpha;
    let mut n = 1u32;
    while n as f64 * equator <= horizon {
        hits.push(ClosureHit {
            length: n as f64 * equator,
            clairaut: alpha,
            oscillations: 0,
        });
        n += 1;
    }

    let defect = |advance: f64, n: u32| -> f64 {
        let w = (n as f64 * advance).rem_euclid(TAU);
        w.min(TAU - w)
    };
    let tol_defect = 1e-8;
    // the scan is pure per grid value: parallel over c, merged in index
    // order so results stay deterministic
    let per_c: Vec<Result<Vec<ClosureHit>, OracleError>> = (1..=grid)
        .into_par_iter()
        .map(|i| {
            let c = alpha * i as f64 / (grid + 1) as f64;
            let (advance, osc_len) = quadrature_advance(model, c)?;
            let n_max = (horizon / osc_len).floor() as u32;
            let mut out = Vec::new();
            for n in 1..=n_max {
                if defect(advance, n) <= tol_defect {
                    out.push(ClosureHit {
                        length: n as f64 * osc_len,
                        clairaut: c,
                        oscillations: n,
                    });
                }
            }
            Ok(out)
        })
        .collect();
    for chunk in per_c {
        hits.extend(chunk?);
    }
    hits.sort_by(|a, b| {
        a.length
            .partial_cmp(&b.length)
            .unwrap()
            .then(a.clairaut.partial_cmp(&b.clairaut).unwrap())
    });
    Ok(hits)
}

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Composite Gauss-Legendre quadrature of the oscillation advance, with
/// panel doubling until two refinements agree (a method independent of the
/// adaptive-Simpson route used by the main length-spectrum path).
fn quadrature_advance(model: &ConicModel, c: f64) -> Result<(f64, f64), OracleError> {
    let alpha = model.alpha_value();
    let theta_min = (c / alpha).asin();
    let mid = PI / 2.0;
    let a = |th: f64| alpha * th.sin();
    // substitute theta = theta_min + s^2; the profile is symmetric about
    // pi/2 so the other half doubles the result
    let smax = (mid - theta_min).sqrt();
    let eval = |panels: usize| -> (f64, f64) {
        let h = smax / panels as f64;
        let mut phi = 0.0;
        let mut len = 0.0;
        for i in 0..panels {
            let lo = i as f64 * h;
            let center = lo + 0.5 * h;
            for q in 0..4 {
                for sign in [-1.0, 1.0] {
                    let s = center + sign * 0.5 * h * GL_X[q];
                    let th = theta_min + s * s;
                    let av = a(th);
                    let root = (av * av - c * c).max(0.0).sqrt();
                    let w = 0.5 * h * GL_W[q] * 2.0 * s;
                    phi += w * c / (av * root);
                    len += w * av / root;
                }
            }
        }
        (4.0 * phi, 4.0 * len) // both halves, down and up
    };
    let mut panels = 4;
    let (mut phi_prev, mut len_prev) = eval(panels);
    for _ in 0..10 {
        panels *= 2;
        let (phi, len) = eval(panels);
        let dphi = (phi - phi_prev).abs();
        let dlen = (len - len_prev).abs();
        if dphi < 1e-11 * (1.0 + phi.abs()) && dlen < 1e-11 * (1.0 + len.abs()) {
            return Ok((phi, len));
        }
        phi_prev = phi;
        len_prev = len;
    }
    Err(OracleError::Quadrature(LengthError::QuadratureFailure {
        reached: (eval(2 * panels).0 - phi_prev).abs(),
        want: 1e-10,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Alpha;

    fn spindle(p: u64, q: u64) -> ConicModel {
        ConicModel::spindle(Alpha::Rational(p, q)).unwrap()
    }

    #[test]
    fn legendre_eigenvalues() {
        let m = spindle(1, 1);
        let eigs = shoot_radial_eigen(&m, 0, 4, &ShootingConfig::default()).unwrap();
        for (k, e) in eigs.iter().enumerate() {
            let kf = (k + 1) as f64;
            let want = kf * (kf + 1.0);
            assert!(
                ((e - want) / want).abs() < 1e-6,
                "Legendre eigenvalue {k}: {e} vs {want}"
            );
        }
    }

    #[test]
    fn first_mode_two_thirds() {
        let m = spindle(2, 3);
        let eigs = shoot_radial_eigen(&m, 1, 1, &ShootingConfig::default()).unwrap();
        assert!(
            ((eigs[0] - 3.75) / 3.75).abs() < 1e-6,
            "nu=3/2 eigenvalue: {}",
            eigs[0]
        );
    }

    #[test]
    fn richardson_halving_ratio() {
        // the integrator is second order: halving h cuts the error ~4x
        let m = spindle(2, 3);
        let want = 3.75;
        let coarse = ShootingConfig {
            grid: 4_000,
            ..Default::default()
        };
        let fine = ShootingConfig {
            grid: 8_000,
            ..Default::default()
        };
        let e_coarse = (shoot_radial_eigen(&m, 1, 1, &coarse).unwrap()[0] - want).abs();
        let e_fine = (shoot_radial_eigen(&m, 1, 1, &fine).unwrap()[0] - want).abs();
        let ratio = e_coarse / e_fine;
        assert!(
            (2.5..8.0).contains(&ratio),
            "Richardson ratio {ratio} (errors {e_coarse:e}, {e_fine:e})"
        );
    }

    #[test]
    fn input_validation() {
        let m = spindle(2, 3);
        assert!(matches!(
            shoot_radial_eigen(&m, 0, 0, &ShootingConfig::default()),
            Err(OracleError::BadCount)
        ));
        let bad = ShootingConfig {
            grid: 10,
            ..Default::default()
        };
        assert!(matches!(
            shoot_radial_eigen(&m, 0, 1, &bad),
            Err(OracleError::GridTooSmall)
        ));
    }

    #[test]
    fn sphere_closures_everywhere() {
        let m = spindle(1, 1);
        let hits = closure_search(&m, 7.0, 40).unwrap();
        // every scanned c closes at length 2 pi
        let scanned: Vec<&ClosureHit> = hits.iter().filter(|h| h.oscillations > 0).collect();
        assert!(scanned.len() >= 40, "only {} scan hits", scanned.len());
        assert!(scanned
            .iter()
            .all(|h| (h.length - TAU).abs() < 1e-8 && h.oscillations == 1));
    }

    #[test]
    fn two_thirds_closures() {
        let m = spindle(2, 3);
        let hits = closure_search(&m, 13.0, 60).unwrap();
        // scan hits all close at 4 pi after 2 oscillations
        let scanned: Vec<&ClosureHit> = hits.iter().filter(|h| h.oscillations > 0).collect();
        assert!(!scanned.is_empty());
        assert!(scanned
            .iter()
            .all(|h| (h.length - 4.0 * PI).abs() < 1e-8 && h.oscillations == 2));
        // equator iterates present as analytic limits
        let equator = TAU * 2.0 / 3.0;
        for n in 1..=3 {
            assert!(hits
                .iter()
                .any(|h| (h.length - n as f64 * equator).abs() < 1e-12));
        }
    }

    #[test]
    fn irrational_alpha_scan_is_empty() {
        let m = ConicModel::spindle(Alpha::Real(1.0 / 2.0_f64.sqrt())).unwrap();
        let hits = closure_search(&m, 20.0, 200).unwrap();
        assert!(
            hits.iter().all(|h| h.oscillations == 0),
            "unexpected scan closures for irrational alpha"
        );
    }

    #[test]
    fn deterministic_reruns() {
        let m = spindle(2, 3);
        let a = closure_search(&m, 13.0, 30).unwrap();
        let b = closure_search(&m, 13.0, 30).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.length.to_bits(), y.length.to_bits());
            assert_eq!(x.clairaut.to_bits(), y.clairaut.to_bits());
        }
    }
}
