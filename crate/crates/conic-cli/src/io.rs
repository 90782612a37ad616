//! Atomic output files, run manifests, and the eigenvalue-table cache.
//!
//! Every artifact is written to a temporary sibling and renamed into place,
//! so interrupted runs never leave partial files at the target path. Each
//! output gets a `<file>.manifest` sidecar carrying the effective config,
//! the model checksum, and the sha256 of the file contents; `scan` uses the
//! model checksums to refuse mismatched inputs.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

use conic_core::spectrum::{EigenEntry, EigenTable};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Write `contents` at `path` atomically (temp sibling + rename).
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp{}",
            path.file_name().unwrap_or_default().to_string_lossy(),
            std::process::id()
        )),
        None => PathBuf::from(format!(".{}.tmp{}", path.display(), std::process::id())),
    };
    {
        let mut f = fs::File::create(&tmp)
            .with_context(|| format!("cannot create temporary file {}", tmp.display()))?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
        .with_context(|| format!("cannot move output into place at {}", path.display()))?;
    Ok(())
}

/// Manifest sidecar accompanying an output file.
pub struct Manifest {
    pub subcommand: String,
    pub model_descriptor: String,
    pub config_echo: String,
    /// extra `key = value` facts (e.g. the spectral cutoff of a table)
    pub extra: Vec<(String, String)>,
}

impl Manifest {
    pub fn model_checksum(&self) -> String {
        sha256_hex(self.model_descriptor.as_bytes())
    }

    pub fn write_for(&self, output: &Path, contents: &[u8]) -> Result<()> {
        let mut text = String::new();
        text.push_str("# conic run manifest\n");
        text.push_str(&format!("subcommand = {}\n", self.subcommand));
        text.push_str(&format!("model = {}\n", self.model_descriptor));
        text.push_str(&format!("model_checksum = {}\n", self.model_checksum()));
        for (k, v) in &self.extra {
            text.push_str(&format!("{k} = {v}\n"));
        }
        text.push_str(&format!(
            "output = {}\n",
            output.file_name().unwrap_or_default().to_string_lossy()
        ));
        text.push_str(&format!("sha256 = {}\n", sha256_hex(contents)));
        text.push_str("\n# effective configuration\n");
        for line in self.config_echo.lines() {
            text.push_str("# ");
            text.push_str(line);
            text.push('\n');
        }
        write_atomic(&manifest_path(output), text.as_bytes())
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut os = output.as_os_str().to_owned();
    os.push(".manifest");
    PathBuf::from(os)
}

/// Read a `key = value` field from a manifest sidecar, if the sidecar
/// exists. Hand-written CSVs without manifests skip consistency checks.
pub fn read_manifest_field(output: &Path, key: &str) -> Result<Option<String>> {
    let p = manifest_path(output);
    if !p.exists() {
        return Ok(None);
    }
    let text =
        fs::read_to_string(&p).with_context(|| format!("unreadable manifest {}", p.display()))?;
    let prefix = format!("{key} = ");
    for line in text.lines() {
        if let Some(v) = line.strip_prefix(&prefix) {
            return Ok(Some(v.trim().to_string()));
        }
    }
    Ok(None)
}

/// Read the `model_checksum` field from a manifest sidecar, if present.
pub fn read_model_checksum(output: &Path) -> Result<Option<String>> {
    match read_manifest_field(output, "model_checksum")? {
        Some(v) => Ok(Some(v)),
        None if manifest_path(output).exists() => Err(anyhow!(
            "manifest {} carries no model_checksum",
            manifest_path(output).display()
        )),
        None => Ok(None),
    }
}

/// Write an output together with its manifest.
pub fn emit(output: &Path, contents: &[u8], manifest: &Manifest) -> Result<()> {
    write_atomic(output, contents)?;
    manifest.write_for(output, contents)?;
    Ok(())
}

const CACHE_MAGIC: &[u8] = b"CONICEIG1\n";

fn cache_key(descriptor: &str, cutoff: f64) -> String {
    sha256_hex(format!("{descriptor}|cutoff={cutoff:.16e}").as_bytes())
}

fn cache_path(dir: &Path, descriptor: &str, cutoff: f64) -> PathBuf {
    dir.join(format!("{}.eig", cache_key(descriptor, cutoff)))
}

/// Binary cache of an eigenvalue table, keyed by (model descriptor, cutoff)
/// and integrity-checked with a trailing sha256.
pub fn cache_store(dir: &Path, table: &EigenTable) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut buf = Vec::with_capacity(32 + table.entries.len() * 28);
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(table.descriptor.as_bytes());
    buf.push(b'\n');
    buf.extend_from_slice(&table.cutoff.to_le_bytes());
    buf.extend_from_slice(&table.weyl_target.to_le_bytes());
    buf.extend_from_slice(&(table.entries.len() as u64).to_le_bytes());
    for e in &table.entries {
        buf.extend_from_slice(&e.m.to_le_bytes());
        buf.extend_from_slice(&e.k.to_le_bytes());
        buf.extend_from_slice(&e.nu.to_le_bytes());
        buf.extend_from_slice(&e.lambda.to_le_bytes());
        buf.extend_from_slice(&e.mult.to_le_bytes());
    }
    let digest = sha256_hex(&buf);
    buf.extend_from_slice(digest.as_bytes());
    write_atomic(&cache_path(dir, &table.descriptor, table.cutoff), &buf)
}

/// Load a cached table; `None` on miss, error on a corrupt entry.
pub fn cache_load(dir: &Path, descriptor: &str, cutoff: f64) -> Result<Option<EigenTable>> {
    let path = cache_path(dir, descriptor, cutoff);
    if !path.exists() {
        return Ok(None);
    }
    let buf = fs::read(&path)?;
    if buf.len() < CACHE_MAGIC.len() + 64 {
        bail!("cache entry {} is truncated", path.display());
    }
    let (body, digest) = buf.split_at(buf.len() - 64);
    if sha256_hex(body).as_bytes() != digest {
        bail!("cache entry {} failed its checksum", path.display());
    }
    let mut rest = body
        .strip_prefix(CACHE_MAGIC)
        .ok_or_else(|| anyhow!("cache entry {} has a bad magic header", path.display()))?;
    let nl = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| anyhow!("cache entry {} missing descriptor", path.display()))?;
    let desc = std::str::from_utf8(&rest[..nl])?.to_string();
    if desc != descriptor {
        // key collision would be a bug; treat as miss
        return Ok(None);
    }
    rest = &rest[nl + 1..];
    let take_f64 = |r: &mut &[u8]| -> Result<f64> {
        let (head, tail) = r.split_at(8);
        *r = tail;
        Ok(f64::from_le_bytes(head.try_into()?))
    };
    let take_u64 = |r: &mut &[u8]| -> Result<u64> {
        let (head, tail) = r.split_at(8);
        *r = tail;
        Ok(u64::from_le_bytes(head.try_into()?))
    };
    let take_u32 = |r: &mut &[u8]| -> Result<u32> {
        let (head, tail) = r.split_at(4);
        *r = tail;
        Ok(u32::from_le_bytes(head.try_into()?))
    };
    let stored_cutoff = take_f64(&mut rest)?;
    let weyl_target = take_f64(&mut rest)?;
    let count = take_u64(&mut rest)? as usize;
    if rest.len() != count * 28 {
        bail!("cache entry {} has inconsistent length", path.display());
    }
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let m = take_u32(&mut rest)?;
        let k = take_u32(&mut rest)?;
        let nu = take_f64(&mut rest)?;
        let lambda = take_f64(&mut rest)?;
        let mult = take_u32(&mut rest)?;
        entries.push(EigenEntry {
            m,
            k,
            nu,
            lambda,
            mult,
        });
    }
    Ok(Some(EigenTable {
        descriptor: desc,
        cutoff: stored_cutoff,
        weyl_target,
        entries,
    }))
}
