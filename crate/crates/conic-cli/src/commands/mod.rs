//! Subcommand implementations.

pub mod tracecmd;
pub mod verify;

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use conic_core::flow::{flow_interior_observed, FlowOptions, SegmentKind};
use conic_core::lengths::length_sets;
use conic_core::spectrum::{model_modes, EigenTable};
use conic_core::{BCospherePoint, ConePointId, ConicModel};

use crate::config::RunConfig;
use crate::io::{self, Manifest};

pub fn manifest_for(cfg: &RunConfig, subcommand: &str, model: &ConicModel) -> Manifest {
    Manifest {
        subcommand: subcommand.to_string(),
        model_descriptor: model.descriptor(),
        config_echo: cfg.serialize(),
        extra: Vec::new(),
    }
}

/// Build (or load from cache) the eigenvalue table for the configured model.
pub fn build_table(cfg: &RunConfig, model: &ConicModel) -> Result<EigenTable> {
    let cutoff = cfg.lambda_max.sqrt();
    let cache_dir = std::env::var_os("CONIC_CACHE_DIR")
        .map(std::path::PathBuf::from)
        .or_else(|| cfg.cache_dir.clone());
    if let Some(dir) = &cache_dir {
        match io::cache_load(dir, &model.descriptor(), cutoff) {
            Ok(Some(table)) => return Ok(table),
            Ok(None) => {}
            Err(e) => eprintln!("warning: ignoring cache: {e}"),
        }
    }
    let table = model_modes(model, cutoff)?;
    if let Some(dir) = &cache_dir {
        if let Err(e) = io::cache_store(dir, &table) {
            eprintln!("warning: could not store cache entry: {e}");
        }
    }
    Ok(table)
}

/// `spectrum`: write the complete eigenvalue table as CSV.
pub fn spectrum(cfg: &RunConfig, out: &Path) -> Result<()> {
    let model = cfg.model_instance()?;
    let table = build_table(cfg, &model)?;
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    let mut manifest = manifest_for(cfg, "spectrum", &model);
    manifest
        .extra
        .push(("cutoff".to_string(), format!("{:.16e}", table.cutoff)));
    io::emit(out, &buf, &manifest)?;
    eprintln!(
        "spectrum: {} entries ({} modes) up to sqrt(lambda) = {} -> {}",
        table.entries.len(),
        table.total_multiplicity(),
        table.cutoff,
        out.display()
    );
    Ok(())
}

/// `lengths`: enumerate Dif/Geo and write the tagged length CSV.
pub fn lengths(cfg: &RunConfig, out: &Path) -> Result<()> {
    let model = cfg.model_instance()?;
    let sets = length_sets(&model, cfg.horizon)?;
    let mut text = String::from("length,set,class,description\n");
    for l in &sets.lengths {
        let set = if l.in_geo { "DG" } else { "D" };
        // the class column carries the leading record's class; coincident
        // records of other classes are folded into the description
        let class = l.classes.first().expect("tagged length without a record");
        let _ = writeln!(
            text,
            "{:.16e},{},{},{}",
            l.length,
            set,
            class.as_str(),
            l.description.replace(',', ";")
        );
    }
    io::emit(out, text.as_bytes(), &manifest_for(cfg, "lengths", &model))?;
    eprintln!(
        "lengths: |Dif| = {}, |Geo| = {} up to horizon {} -> {}",
        sets.dif().len(),
        sets.geo().len(),
        cfg.horizon,
        out.display()
    );
    Ok(())
}

pub struct FlowArgs {
    pub chart: ConePointId,
    pub x: f64,
    pub y: f64,
    pub xi: f64,
    pub eta: f64,
    pub length: f64,
}

/// `flow`: debug trajectory dump as CSV (s, x, y, xi_bar, eta_bar, kind).
pub fn flow(cfg: &RunConfig, args: &FlowArgs, out: &Path) -> Result<()> {
    let model = cfg.model_instance()?;
    let start = BCospherePoint::new(&model, args.chart, args.x, args.y, args.xi, args.eta)
        .map_err(|e| anyhow!("invalid start state: {e}"))?;
    let mut text = String::from("s,x,y,xi_bar,eta_bar,segment_kind\n");
    let result = flow_interior_observed(
        &model,
        &start,
        args.length,
        &FlowOptions::default(),
        |s, q| {
            let _ = writeln!(
                text,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},interior",
                s, q.x, q.y, q.xi_bar, q.eta_bar
            );
        },
    )
    .with_context(|| "flow failed")?;
    debug_assert_eq!(result.segment.kind, SegmentKind::Interior);
    io::emit(out, text.as_bytes(), &manifest_for(cfg, "flow", &model))?;
    match result.arrival {
        Some(arr) => eprintln!(
            "flow: cone-point arrival at component {} after length {:.12} (remaining {:.12}) -> {}",
            arr.component.0,
            arr.at_length,
            arr.remaining,
            out.display()
        ),
        None => eprintln!(
            "flow: completed length {:.12} -> {}",
            args.length,
            out.display()
        ),
    }
    Ok(())
}
