//! Bessel functions of the first kind for real order, and their zeros.
//!
//! Everything here is self-contained (no external special-function crate):
//! the eigenvalue tables and their oracles must not share a dependency.
//!
//! Evaluation strategy by regime:
//! - ascending power series when `x <= 2 sqrt(nu+1) + 7` (terms decay, no
//!   destructive cancellation),
//! - otherwise Miller backward recurrence along the order ladder, normalized
//!   for `x < 25` by the Neumann column sum and for `x >= 25` by matching the
//!   bottom-of-ladder orders against the large-argument (Hankel) expansion.
//!
//! Zeros are bracketed from McMahon's expansion where it is trustworthy, from
//! an Airy-type estimate for the first zero at large order, and by sequential
//! interlacing walks in between; brackets are refined by safeguarded Newton.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BesselError {
    #[error("order must be nonnegative and finite, got {0}")]
    BadOrder(f64),
    #[error("zero index must be >= 1")]
    BadIndex,
    #[error("zero search did not converge for nu={nu}, k={k}")]
    NoConvergence { nu: f64, k: usize },
}

/// ln Gamma via the Lanczos approximation (g = 7, 9 coefficients),
/// accurate to ~1e-13 relative for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    for (i, &c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// J_nu(x) by the ascending series. Valid (accurate) when the terms decay,
/// i.e. roughly `x <= 2 sqrt(nu+1) + 7`.
fn series_j(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * (nu + kf));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    // (x/2)^nu / Gamma(nu+1), in logs to survive large nu
    let ln_pref = nu * (0.5 * x).ln() - ln_gamma(nu + 1.0);
    if ln_pref < -700.0 {
        return 0.0;
    }
    ln_pref.exp() * sum
}

/// Large-argument (Hankel) expansion, reliable for small orders and x >= ~25.
/// Exact for nu = 1/2. Sums until terms stop decreasing.
fn hankel_j(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let omega = x - nu * PI / 2.0 - PI / 4.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (kf * 8.0 * x);
        if term.abs() >= prev {
            break;
        }
        prev = term.abs();
        if k % 2 == 1 {
            // contributes to Q with alternating sign: k = 1, 3, 5 -> +, -, +
            let s = if k % 4 == 1 { 1.0 } else { -1.0 };
            q += s * term;
        } else {
            let s = if k % 4 == 2 { -1.0 } else { 1.0 };
            p += s * term;
        }
        if term.abs() < 1e-19 {
            break;
        }
    }
    (2.0 / (PI * x)).sqrt() * (p * omega.cos() - q * omega.sin())
}

/// Miller backward recurrence: returns (J_nu, J_{nu+1}).
fn miller_j(nu: f64, x: f64) -> (f64, f64) {
    let n = nu.floor();
    let f = nu - n; // ladder bottom order in [0, 1)
    let top = (nu + 1.0).max(x) + 22.0 + 10.0 * x.cbrt();
    let m = ((top - f).ceil() as usize).max(2);

    let mut jp = 0.0_f64; // J_{mu+1} (unnormalized)
    let mut jc = 1e-110_f64; // J_mu
    let mut out_nu = 0.0;
    let mut out_nup = 0.0;
    let mut anchor0 = 0.0; // unnormalized J_f
    let mut anchor1 = 0.0; // unnormalized J_{f+1}
                           // Neumann column sum anchored at the bottom order f:
                           //   sum_k c_k J_{f+2k} = (x/2)^f / Gamma(f+1),  c_0 = 1.
    let mut neumann = 0.0;

    let mut j = m as i64;
    while j >= 0 {
        let mu = f + j as f64;
        let jm = 2.0 * (mu + 1.0) / x * jc - jp; // J_{mu}  from J_{mu+1}, J_{mu+2}
        jp = jc;
        jc = jm;
        if jc.abs() > 1e250 {
            jc *= 1e-250;
            jp *= 1e-250;
            out_nu *= 1e-250;
            out_nup *= 1e-250;
            anchor0 *= 1e-250;
            anchor1 *= 1e-250;
            neumann *= 1e-250;
        }
        if (mu - nu).abs() < 0.25 {
            out_nu = jc;
        }
        if (mu - (nu + 1.0)).abs() < 0.25 {
            out_nup = jc;
        }
        if j == 0 {
            anchor0 = jc;
        }
        if j == 1 {
            anchor1 = jc;
        }
        if x < 25.0 && j % 2 == 0 {
            let k = (j / 2) as f64;
            let c = if f == 0.0 {
                if j == 0 {
                    1.0
                } else {
                    2.0
                }
            } else {
                // c_k = (f+2k) Gamma(f+k) / (k! Gamma(f+1)), computed in logs
                ((f + 2.0 * k).ln() + ln_gamma(f + k) - ln_gamma(k + 1.0) - ln_gamma(f + 1.0)).exp()
            };
            neumann += c * jc;
        }
        j -= 1;
    }

    let scale = if x < 25.0 {
        let target = (f * (0.5 * x).ln() - ln_gamma(f + 1.0)).exp();
        target / neumann
    } else {
        let a0 = hankel_j(f, x);
        let a1 = hankel_j(f + 1.0, x);
        // least-squares match against both anchors; immune to either one
        // sitting near its own zero
        (a0 * anchor0 + a1 * anchor1) / (anchor0 * anchor0 + anchor1 * anchor1)
    };
    (out_nu * scale, out_nup * scale)
}

/// (J_nu(x), J_{nu+1}(x)) for nu >= 0, x > 0.
pub fn besselj_pair(nu: f64, x: f64) -> (f64, f64) {
    debug_assert!(nu >= 0.0 && x > 0.0);
    if x <= 2.0 * (nu + 1.0).sqrt() + 7.0 {
        (series_j(nu, x), series_j(nu + 1.0, x))
    } else {
        miller_j(nu, x)
    }
}

pub fn besselj(nu: f64, x: f64) -> f64 {
    besselj_pair(nu, x).0
}

/// (J_nu, J'_nu) using J'_nu = (nu/x) J_nu - J_{nu+1}.
pub fn besselj_and_deriv(nu: f64, x: f64) -> (f64, f64) {
    let (j, jp1) = besselj_pair(nu, x);
    (j, (nu / x) * j - jp1)
}

/// McMahon expansion for the k-th zero of J_nu; trustworthy when the leading
/// correction is small against the zero spacing.
fn mcmahon_guess(nu: f64, k: usize) -> f64 {
    let mu = 4.0 * nu * nu;
    let b = (k as f64 + 0.5 * nu - 0.25) * PI;
    let e = 8.0 * b;
    b - (mu - 1.0) / e
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e * e * e)
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * e.powi(5))
}

fn mcmahon_reliable(nu: f64, k: usize) -> bool {
    let mu = 4.0 * nu * nu;
    let b = (k as f64 + 0.5 * nu - 0.25) * PI;
    b >= 1.6 * mu.max(1.0).powf(0.6) + 10.0
}

struct ZeroFinder<F: Fn(f64) -> (f64, f64)> {
    /// (value, derivative) of the function whose zeros we chase
    eval: F,
}

impl<F: Fn(f64) -> (f64, f64)> ZeroFinder<F> {
    /// Expand rightward from `start` in `step` increments until the sign of
    /// the value flips; returns the bracketing interval.
    fn bracket_from(&self, start: f64, step: f64, max_steps: usize) -> Option<(f64, f64)> {
        let mut a = start;
        let mut fa = (self.eval)(a).0;
        for _ in 0..max_steps {
            let b = a + step;
            let fb = (self.eval)(b).0;
            if fa == 0.0 {
                return Some((a, a));
            }
            if fa.signum() != fb.signum() {
                return Some((a, b));
            }
            a = b;
            fa = fb;
        }
        None
    }

    /// Safeguarded Newton inside a sign-change bracket.
    fn refine(&self, mut a: f64, mut b: f64) -> f64 {
        if a == b {
            return a;
        }
        let mut fa = (self.eval)(a).0;
        let mut x = 0.5 * (a + b);
        for _ in 0..100 {
            let (fx, dfx) = (self.eval)(x);
            if fx == 0.0 {
                return x;
            }
            if fx.signum() == fa.signum() {
                a = x;
                fa = fx;
            } else {
                b = x;
            }
            let newton = x - fx / dfx;
            let next = if dfx != 0.0 && newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
            if (next - x).abs() <= 1e-15 * x.abs() {
                return next;
            }
            x = next;
        }
        x
    }
}

/// k-th positive zero of J_nu (k >= 1), relative accuracy ~1e-14.
pub fn bessel_zero(nu: f64, k: usize) -> Result<f64, BesselError> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(BesselError::BadOrder(nu));
    }
    if k == 0 {
        return Err(BesselError::BadIndex);
    }
    let finder = ZeroFinder {
        eval: |x| besselj_and_deriv(nu, x),
    };
    if mcmahon_reliable(nu, k) {
        let g = mcmahon_guess(nu, k);
        // guess error << spacing/2, so a +-1.2 window brackets the right zero
        let (a, b) =
            bracket_containing(&finder, g, 1.2).ok_or(BesselError::NoConvergence { nu, k })?;
        return Ok(finder.refine(a, b));
    }
    // sequential walk with interlacing brackets; the walk step must stay
    // below the local zero spacing, which contracts to ~1.4 nu^(1/3) near
    // the turning point
    let mut prev = 0.0_f64;
    let mut gap = PI;
    for i in 1..=k {
        let (start, step) = if i == 1 {
            let step = (0.6 * nu.cbrt()).max(0.5);
            (nu.max(0.2) * (1.0 + 1e-12), step)
        } else {
            (prev + 0.25 * gap, 0.45 * gap)
        };
        let (a, b) = finder
            .bracket_from(start, step, 400)
            .ok_or(BesselError::NoConvergence { nu, k })?;
        let z = finder.refine(a, b);
        if i > 1 {
            gap = z - prev;
        }
        prev = z;
    }
    Ok(prev)
}

fn bracket_containing<F: Fn(f64) -> (f64, f64)>(
    finder: &ZeroFinder<F>,
    guess: f64,
    half_width: f64,
) -> Option<(f64, f64)> {
    let mut w = half_width;
    for _ in 0..6 {
        let a = guess - w;
        let b = guess + w;
        let fa = (finder.eval)(a).0;
        let fb = (finder.eval)(b).0;
        if fa.signum() != fb.signum() {
            return Some((a, b));
        }
        w *= 1.6;
    }
    None
}

/// k-th positive zero of J'_nu (k >= 1). For nu = 0 these are the positive
/// zeros of J_1 (the stationary point at x = 0 is not counted; the constant
/// eigenmode is handled by the caller).
pub fn bessel_deriv_zero(nu: f64, k: usize) -> Result<f64, BesselError> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(BesselError::BadOrder(nu));
    }
    if k == 0 {
        return Err(BesselError::BadIndex);
    }
    if nu == 0.0 {
        return bessel_zero(1.0, k);
    }
    // g(x) = J'_nu,  g'(x) = J''_nu = -J'_nu / x - (1 - nu^2/x^2) J_nu
    let finder = ZeroFinder {
        eval: |x| {
            let (j, jd) = besselj_and_deriv(nu, x);
            (jd, -jd / x - (1.0 - nu * nu / (x * x)) * j)
        },
    };
    let mut prev = 0.0_f64;
    let mut gap = PI;
    for i in 1..=k {
        let (start, step) = if i == 1 {
            let step = (0.5 * nu.cbrt()).max(0.25);
            (nu.max(0.05) * (1.0 + 1e-12), step)
        } else {
            (prev + 0.25 * gap, 0.45 * gap)
        };
        let (a, b) = finder
            .bracket_from(start, step, 400)
            .ok_or(BesselError::NoConvergence { nu, k })?;
        let z = finder.refine(a, b);
        if i > 1 {
            gap = z - prev;
        }
        prev = z;
    }
    Ok(prev)
}

/// Sequential generator of zeros of J_nu (or J'_nu) for table building:
/// amortizes the interlacing walk across increasing k.
pub struct ZeroLadder {
    nu: f64,
    derivative: bool,
    prev: Option<f64>,
    gap: f64,
    k: usize,
}

impl ZeroLadder {
    pub fn new(nu: f64, derivative: bool) -> Self {
        ZeroLadder {
            nu,
            derivative,
            prev: None,
            gap: PI,
            k: 0,
        }
    }

    pub fn next_zero(&mut self) -> Result<f64, BesselError> {
        self.k += 1;
        let z = match self.prev {
            None => {
                if self.derivative {
                    bessel_deriv_zero(self.nu, 1)?
                } else {
                    bessel_zero(self.nu, 1)?
                }
            }
            Some(p) => {
                let nu = self.nu;
                let z = if self.derivative {
                    let finder = ZeroFinder {
                        eval: |x| {
                            let (j, jd) = besselj_and_deriv(nu, x);
                            (jd, -jd / x - (1.0 - nu * nu / (x * x)) * j)
                        },
                    };
                    let (a, b) = finder
                        .bracket_from(p + 0.25 * self.gap, 0.45 * self.gap, 400)
                        .ok_or(BesselError::NoConvergence { nu, k: self.k })?;
                    finder.refine(a, b)
                } else {
                    let finder = ZeroFinder {
                        eval: |x| besselj_and_deriv(nu, x),
                    };
                    let (a, b) = finder
                        .bracket_from(p + 0.25 * self.gap, 0.45 * self.gap, 400)
                        .ok_or(BesselError::NoConvergence { nu, k: self.k })?;
                    finder.refine(a, b)
                };
                self.gap = z - p;
                z
            }
        };
        self.prev = Some(z);
        Ok(z)
    }
}
