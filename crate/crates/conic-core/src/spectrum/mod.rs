//! Exact eigenvalue tables of the Friedrichs Laplacian for the two model
//! families, plus the Weyl-law completeness check.
//!
//! Spindle: separation of variables gives radial Legendre-type modes with
//! spectral index `nu = m/alpha + k` and `lambda = nu (nu + 1)`; the
//! Friedrichs branch is the one behaving like `theta^(m/alpha)` at the poles,
//! which forces `nu - m/alpha` to be a nonnegative integer.
//!
//! Flat cone of rim radius R: regular Bessel branch of order `m/alpha`;
//! `lambda = (j_(m/alpha),k / R)^2` for Dirichlet, stationary points of J for
//! Neumann (plus the constant zero mode).

pub mod bessel;

use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{Alpha, ConicModel, ModelError, ModelKind, RimCondition};
use bessel::{BesselError, ZeroLadder};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenEntry {
    pub m: u32,
    pub k: u32,
    pub nu: f64,
    pub lambda: f64,
    pub mult: u32,
}

/// Complete eigenvalue table for `sqrt(lambda) <= cutoff`, sorted by lambda
/// (ties broken by (m, k)).
#[derive(Debug, Clone)]
pub struct EigenTable {
    pub descriptor: String,
    pub cutoff: f64,
    /// Weyl slope target `area / 4 pi` of the generating model.
    pub weyl_target: f64,
    pub entries: Vec<EigenEntry>,
}

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("cutoff must be positive")]
    BadCutoff,
    #[error("table would need ~{required} entries, beyond the memory budget")]
    TooLarge { required: u64 },
    #[error("table too small for a Weyl fit ({entries} entries, need >= {need})")]
    TableTooSmall { entries: usize, need: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error("model kind does not support this operation")]
    WrongModel,
    #[error("malformed eigenvalue CSV at line {line}: {reason}")]
    BadCsv { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

const MAX_ENTRIES: u64 = 200_000_000;

impl EigenTable {
    pub fn total_multiplicity(&self) -> u64 {
        self.entries.iter().map(|e| e.mult as u64).sum()
    }

    fn sort(&mut self) {
        self.entries.sort_by(|a, b| {
            a.lambda
                .partial_cmp(&b.lambda)
                .unwrap()
                .then(a.m.cmp(&b.m))
                .then(a.k.cmp(&b.k))
        });
    }

    /// CSV with mandatory header `m,k,nu,lambda,mult`; lambda and nu carry
    /// 17 significant digits so round trips are exact.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "m,k,nu,lambda,mult")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{:.16e},{:.16e},{}",
                e.m, e.k, e.nu, e.lambda, e.mult
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, descriptor: String) -> Result<Self, SpectrumError> {
        let mut entries = Vec::new();
        let mut lines = r.lines().enumerate();
        let header = lines
            .next()
            .ok_or(SpectrumError::BadCsv {
                line: 1,
                reason: "empty file".into(),
            })?
            .1?;
        if header.trim() != "m,k,nu,lambda,mult" {
            return Err(SpectrumError::BadCsv {
                line: 1,
                reason: format!("unexpected header `{header}`"),
            });
        }
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let mut field = |name: &str| {
                it.next().ok_or(SpectrumError::BadCsv {
                    line: idx + 1,
                    reason: format!("missing field {name}"),
                })
            };
            let m = field("m")?
                .trim()
                .parse()
                .map_err(|e| SpectrumError::BadCsv {
                    line: idx + 1,
                    reason: format!("m: {e}"),
                })?;
            let k = field("k")?
                .trim()
                .parse()
                .map_err(|e| SpectrumError::BadCsv {
                    line: idx + 1,
                    reason: format!("k: {e}"),
                })?;
            let nu = field("nu")?
                .trim()
                .parse()
                .map_err(|e| SpectrumError::BadCsv {
                    line: idx + 1,
                    reason: format!("nu: {e}"),
                })?;
            let lambda = field("lambda")?
                .trim()
                .parse()
                .map_err(|e| SpectrumError::BadCsv {
                    line: idx + 1,
                    reason: format!("lambda: {e}"),
                })?;
            let mult = field("mult")?
                .trim()
                .parse()
                .map_err(|e| SpectrumError::BadCsv {
                    line: idx + 1,
                    reason: format!("mult: {e}"),
                })?;
            entries.push(EigenEntry {
                m,
                k,
                nu,
                lambda,
                mult,
            });
        }
        let cutoff = entries
            .iter()
            .map(|e| e.lambda)
            .fold(0.0_f64, f64::max)
            .sqrt();
        Ok(EigenTable {
            descriptor,
            cutoff,
            weyl_target: f64::NAN,
            entries,
        })
    }
}

/// Complete spindle table for `sqrt(lambda) <= cutoff`.
pub fn spindle_modes(alpha: Alpha, cutoff: f64) -> Result<EigenTable, SpectrumError> {
    if !(cutoff > 0.0) {
        return Err(SpectrumError::BadCutoff);
    }
    let a = alpha.value();
    let nu_max = 0.5 * (-1.0 + (1.0 + 4.0 * cutoff * cutoff).sqrt());
    let est = (a * cutoff * cutoff) as u64 + 16;
    if est > MAX_ENTRIES {
        return Err(SpectrumError::TooLarge { required: est });
    }
    let mut entries = Vec::with_capacity((est / 2 + 8) as usize);
    let mut m = 0u32;
    loop {
        let base = m as f64 / a;
        if base > nu_max {
            break;
        }
        let kmax = (nu_max - base).floor() as u32;
        for k in 0..=kmax {
            let nu = base + k as f64;
            entries.push(EigenEntry {
                m,
                k,
                nu,
                lambda: nu * (nu + 1.0),
                mult: if m == 0 { 1 } else { 2 },
            });
        }
        m += 1;
    }
    let model = ConicModel::spindle(alpha)?;
    let mut table = EigenTable {
        descriptor: model.descriptor(),
        cutoff,
        weyl_target: model.area() / (4.0 * std::f64::consts::PI),
        entries,
    };
    table.sort();
    Ok(table)
}

/// Complete flat-cone table for `sqrt(lambda) <= cutoff`.
///
/// Dirichlet: `lambda = (j_(nu,k)/R)^2`, k >= 1. Neumann: stationary points
/// of the order-`nu` Bessel function; the constant mode enters as
/// `(m, k) = (0, 0)` with `lambda = 0`.
pub fn flat_cone_modes(
    alpha: Alpha,
    rim_radius: f64,
    bc: RimCondition,
    cutoff: f64,
) -> Result<EigenTable, SpectrumError> {
    if !(cutoff > 0.0) {
        return Err(SpectrumError::BadCutoff);
    }
    let model = ConicModel::flat_cone(alpha, rim_radius, bc)?;
    let a = alpha.value();
    let zmax = cutoff * rim_radius;
    let est = (a * cutoff * cutoff * rim_radius * rim_radius / 4.0) as u64 + 16;
    if est > MAX_ENTRIES {
        return Err(SpectrumError::TooLarge { required: est });
    }
    let mut entries = Vec::new();
    if bc == RimCondition::Neumann {
        entries.push(EigenEntry {
            m: 0,
            k: 0,
            nu: 0.0,
            lambda: 0.0,
            mult: 1,
        });
    }
    let derivative = bc == RimCondition::Neumann;
    // all zeros of J_nu and J'_nu exceed nu, so the m range is bounded
    let m_max = (a * zmax).floor() as u32;
    // mode families are independent: parallel over m, deterministic merge
    // through the final stable sort
    let per_m: Vec<Result<Vec<EigenEntry>, SpectrumError>> = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let nu = m as f64 / a;
            let mut out = Vec::new();
            let mut ladder = ZeroLadder::new(nu, derivative);
            let mut k = 1u32;
            loop {
                let z = ladder.next_zero()?;
                if z > zmax {
                    break;
                }
                let s = z / rim_radius;
                out.push(EigenEntry {
                    m,
                    k,
                    nu,
                    lambda: s * s,
                    mult: if m == 0 { 1 } else { 2 },
                });
                k += 1;
            }
            Ok(out)
        })
        .collect();
    for family in per_m {
        entries.extend(family?);
    }
    let mut table = EigenTable {
        descriptor: model.descriptor(),
        cutoff,
        weyl_target: model.area() / (4.0 * std::f64::consts::PI),
        entries,
    };
    table.sort();
    Ok(table)
}

/// Eigenvalue table for any model (dispatch by kind).
pub fn model_modes(model: &ConicModel, cutoff: f64) -> Result<EigenTable, SpectrumError> {
    match model.kind() {
        ModelKind::Spindle => spindle_modes(model.alpha(), cutoff),
        ModelKind::FlatCone => flat_cone_modes(
            model.alpha(),
            model.rim_radius(),
            model.rim_condition(),
            cutoff,
        ),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WeylFit {
    pub slope: f64,
    /// `area / 4 pi` of the generating model.
    pub target: f64,
    /// |slope - target| / target.
    pub rel_deviation: f64,
}

/// Least-squares slope of the counting function N(lambda) over the top half
/// of the table, compared against the Weyl target `area / 4 pi`.
pub fn weyl_fit(table: &EigenTable) -> Result<WeylFit, SpectrumError> {
    const NEED: usize = 10_000;
    if table.entries.len() < NEED {
        return Err(SpectrumError::TableTooSmall {
            entries: table.entries.len(),
            need: NEED,
        });
    }
    let lam_max = table.entries.last().unwrap().lambda;
    let mut count = 0.0_f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for e in &table.entries {
        count += e.mult as f64;
        if e.lambda > 0.5 * lam_max {
            let x = e.lambda;
            let y = count;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            n += 1.0;
        }
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let target = table.weyl_target;
    Ok(WeylFit {
        slope,
        target,
        rel_deviation: ((slope - target) / target).abs(),
    })
}
