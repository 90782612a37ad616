//! `conic`: spectra, length spectra, and wave-trace scans for 2-D surfaces
//! with cone points.
//!
//! Pipeline: `spectrum` -> `trace` -> `scan`/`report`, with `lengths`
//! supplying the predicted singular support, `flow` as a trajectory
//! debugger, and `verify` as the oracle suite.
//!
//! Exit codes: 0 success; 2 validation failure (bad flags, malformed config,
//! unreadable or inconsistent inputs); 3 oracle/conformance failure in
//! `verify`.

mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use conic_core::ConePointId;

#[derive(Parser)]
#[command(name = "conic", version, about = "conic-surface wave-trace laboratory")]
struct Cli {
    /// Configuration file (flat key = value with [section] headers);
    /// command-line flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (0 = hardware parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ModelFlags {
    /// Model kind: spindle | flatcone.
    #[arg(long)]
    model: Option<String>,
    /// Cone parameter alpha, as p/q (kept exact) or a decimal.
    #[arg(long)]
    alpha: Option<String>,
    /// Flat-cone rim radius.
    #[arg(long)]
    rim_radius: Option<f64>,
    /// Flat-cone rim condition: dirichlet | neumann.
    #[arg(long)]
    bc: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the complete eigenvalue table (CSV: m,k,nu,lambda,mult).
    Spectrum {
        #[command(flatten)]
        model: ModelFlags,
        /// Eigenvalue cutoff: the table is complete for lambda <= lambda-max.
        #[arg(long)]
        lambda_max: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Enumerate closed diffractive/geometric geodesics
    /// (CSV: length,set,class,description).
    Lengths {
        #[command(flatten)]
        model: ModelFlags,
        /// Length horizon.
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Debug: flow one geodesic and dump samples
    /// (CSV: s,x,y,xi_bar,eta_bar,segment_kind).
    Flow {
        #[command(flatten)]
        model: ModelFlags,
        /// Chart / cone-point index of the start state (0 = north/tip).
        #[arg(long, default_value_t = 0)]
        chart: usize,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        x: f64,
        #[arg(long, default_value_t = 0.0)]
        y: f64,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        xi: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eta: f64,
        #[arg(long)]
        length: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize the smoothed wave trace (CSV: t,eps,value).
    Trace {
        /// Eigenvalue table produced by `spectrum`.
        #[arg(long)]
        eigs: PathBuf,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        eps_min: Option<f64>,
        #[arg(long)]
        eps_max: Option<f64>,
        #[arg(long)]
        eps_count: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect and classify singular times
    /// (CSV: t0,exponent,residual,class,nearest_length,distance).
    Scan {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        lengths: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        window: Option<f64>,
        #[arg(long)]
        detection_threshold: Option<f64>,
        #[arg(long)]
        match_tol: Option<f64>,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        tmax: Option<f64>,
    },
    /// Run the oracle suite; exits 3 on any failure.
    Verify {
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Human-readable scan summary with theorem conformance verdicts.
    Report {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        lengths: PathBuf,
        #[arg(long)]
        window: Option<f64>,
        #[arg(long)]
        detection_threshold: Option<f64>,
        #[arg(long)]
        match_tol: Option<f64>,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        tmax: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow!("unreadable config {}: {e}", path.display()))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    Ok(cfg)
}

fn apply_model_flags(cfg: &mut RunConfig, flags: &ModelFlags) -> Result<()> {
    if let Some(m) = &flags.model {
        cfg.model = config::parse_model_kind(m)?;
    }
    if let Some(a) = &flags.alpha {
        cfg.alpha = conic_core::Alpha::parse(a).map_err(|e| anyhow!("{e}"))?;
    }
    if let Some(r) = flags.rim_radius {
        cfg.rim_radius = r;
    }
    if let Some(bc) = &flags.bc {
        cfg.bc = config::parse_bc(bc)?;
    }
    Ok(())
}

fn init_threads(cfg: &RunConfig) {
    if cfg.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
}

/// Ok(true) = success, Ok(false) = conformance failure (exit 3),
/// Err = validation failure (exit 2).
fn run(cli: Cli) -> Result<bool> {
    let mut cfg = load_config(&cli)?;
    match &cli.command {
        Command::Spectrum {
            model,
            lambda_max,
            out,
        } => {
            apply_model_flags(&mut cfg, model)?;
            if let Some(l) = lambda_max {
                cfg.lambda_max = *l;
            }
            cfg.validate()?;
            init_threads(&cfg);
            commands::spectrum(&cfg, out)?;
            Ok(true)
        }
        Command::Lengths {
            model,
            horizon,
            out,
        } => {
            apply_model_flags(&mut cfg, model)?;
            if let Some(h) = horizon {
                cfg.horizon = *h;
            }
            cfg.validate()?;
            commands::lengths(&cfg, out)?;
            Ok(true)
        }
        Command::Flow {
            model,
            chart,
            x,
            y,
            xi,
            eta,
            length,
            out,
        } => {
            apply_model_flags(&mut cfg, model)?;
            cfg.validate()?;
            let args = commands::FlowArgs {
                chart: ConePointId(*chart),
                x: *x,
                y: *y,
                xi: *xi,
                eta: *eta,
                length: *length,
            };
            commands::flow(&cfg, &args, out)?;
            Ok(true)
        }
        Command::Trace {
            eigs,
            tmax,
            eps_min,
            eps_max,
            eps_count,
            out,
        } => {
            if let Some(t) = tmax {
                cfg.tmax = *t;
            }
            if let Some(e) = eps_min {
                cfg.eps_min = *e;
            }
            if let Some(e) = eps_max {
                cfg.eps_max = *e;
            }
            if let Some(c) = eps_count {
                cfg.eps_count = *c;
            }
            cfg.validate()?;
            init_threads(&cfg);
            commands::tracecmd::trace(&cfg, eigs, out)?;
            Ok(true)
        }
        Command::Scan {
            trace,
            lengths,
            out,
            window,
            detection_threshold,
            match_tol,
            t_min,
            tmax,
        } => {
            apply_scan_flags(
                &mut cfg,
                window,
                detection_threshold,
                match_tol,
                t_min,
                tmax,
            );
            cfg.validate()?;
            commands::tracecmd::scan(&cfg, trace, lengths, out)?;
            Ok(true)
        }
        Command::Verify { model, horizon } => {
            apply_model_flags(&mut cfg, model)?;
            if let Some(h) = horizon {
                cfg.horizon = *h;
            }
            cfg.validate()?;
            init_threads(&cfg);
            commands::verify::verify(&cfg)
        }
        Command::Report {
            trace,
            lengths,
            window,
            detection_threshold,
            match_tol,
            t_min,
            tmax,
        } => {
            apply_scan_flags(
                &mut cfg,
                window,
                detection_threshold,
                match_tol,
                t_min,
                tmax,
            );
            cfg.validate()?;
            commands::tracecmd::report(&cfg, trace, lengths)?;
            Ok(true)
        }
    }
}

fn apply_scan_flags(
    cfg: &mut RunConfig,
    window: &Option<f64>,
    detection_threshold: &Option<f64>,
    match_tol: &Option<f64>,
    t_min: &Option<f64>,
    tmax: &Option<f64>,
) {
    if let Some(w) = window {
        cfg.window = *w;
    }
    if let Some(d) = detection_threshold {
        cfg.detection_threshold = *d;
    }
    if let Some(m) = match_tol {
        cfg.match_tol = *m;
    }
    if let Some(t) = t_min {
        cfg.t_min = *t;
    }
    if let Some(t) = tmax {
        cfg.tmax = *t;
    }
}
