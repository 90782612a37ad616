//! Run configuration: flat `key = value` text with `[section]` headers.
//! Command-line flags override file values; the serialized form is echoed
//! into every run manifest so outputs are diffable.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use conic_core::{Alpha, ConicModel, ModelKind, RimCondition};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // [model]
    pub model: ModelKind,
    pub alpha: Alpha,
    pub rim_radius: f64,
    pub bc: RimCondition,
    // [spectral]
    pub lambda_max: f64,
    // [trace]
    pub tmax: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_count: usize,
    pub window: f64,
    pub detection_threshold: f64,
    pub match_tol: f64,
    pub t_min: f64,
    // [lengths]
    pub horizon: f64,
    // [io]
    pub cache_dir: Option<PathBuf>,
    // [run]
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelKind::Spindle,
            alpha: Alpha::Rational(2, 3),
            rim_radius: 1.0,
            bc: RimCondition::Dirichlet,
            lambda_max: 202_500.0,
            tmax: 13.0,
            eps_min: 0.02,
            eps_max: 0.2,
            eps_count: 8,
            window: 0.05,
            detection_threshold: 0.5,
            match_tol: 0.02,
            t_min: 0.5,
            horizon: 13.0,
            cache_dir: None,
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn model_instance(&self) -> Result<ConicModel> {
        let m = match self.model {
            ModelKind::Spindle => ConicModel::spindle(self.alpha),
            ModelKind::FlatCone => ConicModel::flat_cone(self.alpha, self.rim_radius, self.bc),
        };
        m.map_err(|e| anyhow!("invalid model configuration: {e}"))
    }

    pub fn eps_ladder(&self) -> Vec<f64> {
        conic_core::trace::eps_ladder(self.eps_min, self.eps_max, self.eps_count)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.value() <= 0.0 || self.alpha.value().is_nan() {
            bail!("malformed config: alpha must be positive");
        }
        if self.lambda_max <= 0.0 || self.lambda_max.is_nan() {
            bail!("malformed config: lambda_max must be positive");
        }
        if !(self.eps_min > 0.0 && self.eps_max > self.eps_min && self.eps_count >= 2) {
            bail!("malformed config: eps ladder must satisfy 0 < eps_min < eps_max, count >= 2");
        }
        // the eps-vs-cutoff tail condition and the window-vs-eps_min floor
        // are enforced at synthesis/scan time against the actual inputs,
        // which is strictly sharper than the declared config values
        for (name, v) in [
            ("window", self.window),
            ("tmax", self.tmax),
            ("horizon", self.horizon),
            ("detection_threshold", self.detection_threshold),
            ("match_tol", self.match_tol),
            ("t_min", self.t_min),
        ] {
            if v <= 0.0 || !v.is_finite() {
                bail!("malformed config: {name} must be positive, got {v}");
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("malformed config at line {}: `{raw}`", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            cfg.apply(&section, key, value)
                .with_context(|| format!("malformed config at line {}", lineno + 1))?;
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let full = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        match full.as_str() {
            "model.model" => {
                self.model = parse_model_kind(value)?;
            }
            "model.alpha" => {
                self.alpha = Alpha::parse(value).map_err(|e| anyhow!("{e}"))?;
            }
            "model.rim_radius" => self.rim_radius = parse_f64(key, value)?,
            "model.bc" | "spectral.bc" => {
                self.bc = parse_bc(value)?;
            }
            "spectral.lambda_max" => self.lambda_max = parse_f64(key, value)?,
            "trace.tmax" => self.tmax = parse_f64(key, value)?,
            "trace.eps_min" => self.eps_min = parse_f64(key, value)?,
            "trace.eps_max" => self.eps_max = parse_f64(key, value)?,
            "trace.eps_count" => {
                self.eps_count = value
                    .parse()
                    .map_err(|e| anyhow!("bad value for eps_count: {e}"))?;
            }
            "trace.window" => self.window = parse_f64(key, value)?,
            "trace.detection_threshold" => self.detection_threshold = parse_f64(key, value)?,
            "trace.match_tol" => self.match_tol = parse_f64(key, value)?,
            "trace.t_min" => self.t_min = parse_f64(key, value)?,
            "lengths.horizon" => self.horizon = parse_f64(key, value)?,
            "io.cache_dir" => self.cache_dir = Some(PathBuf::from(value)),
            "run.threads" => {
                self.threads = value
                    .parse()
                    .map_err(|e| anyhow!("bad value for threads: {e}"))?;
            }
            other => bail!("unknown config key `{other}`"),
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[model]");
        let _ = writeln!(
            s,
            "model = {}",
            match self.model {
                ModelKind::Spindle => "spindle",
                ModelKind::FlatCone => "flatcone",
            }
        );
        let _ = writeln!(s, "alpha = {}", self.alpha.canonical());
        let _ = writeln!(s, "rim_radius = {:.16e}", self.rim_radius);
        let _ = writeln!(s, "bc = {}", self.bc);
        let _ = writeln!(s, "\n[spectral]");
        let _ = writeln!(s, "lambda_max = {:.16e}", self.lambda_max);
        let _ = writeln!(s, "\n[trace]");
        let _ = writeln!(s, "tmax = {:.16e}", self.tmax);
        let _ = writeln!(s, "eps_min = {:.16e}", self.eps_min);
        let _ = writeln!(s, "eps_max = {:.16e}", self.eps_max);
        let _ = writeln!(s, "eps_count = {}", self.eps_count);
        let _ = writeln!(s, "window = {:.16e}", self.window);
        let _ = writeln!(s, "detection_threshold = {:.16e}", self.detection_threshold);
        let _ = writeln!(s, "match_tol = {:.16e}", self.match_tol);
        let _ = writeln!(s, "t_min = {:.16e}", self.t_min);
        let _ = writeln!(s, "\n[lengths]");
        let _ = writeln!(s, "horizon = {:.16e}", self.horizon);
        let _ = writeln!(s, "\n[io]");
        if let Some(dir) = &self.cache_dir {
            let _ = writeln!(s, "cache_dir = {}", dir.display());
        }
        let _ = writeln!(s, "\n[run]");
        let _ = writeln!(s, "threads = {}", self.threads);
        s
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|e| anyhow!("bad value for {key}: {e}"))
}

pub fn parse_model_kind(value: &str) -> Result<ModelKind> {
    match value.to_ascii_lowercase().as_str() {
        "spindle" => Ok(ModelKind::Spindle),
        "flatcone" | "flat_cone" | "flat-cone" => Ok(ModelKind::FlatCone),
        other => bail!("unknown model kind `{other}` (expected spindle|flatcone)"),
    }
}

pub fn parse_bc(value: &str) -> Result<RimCondition> {
    match value.to_ascii_lowercase().as_str() {
        "dirichlet" => Ok(RimCondition::Dirichlet),
        "neumann" => Ok(RimCondition::Neumann),
        other => bail!("unknown boundary condition `{other}` (expected dirichlet|neumann)"),
    }
}
