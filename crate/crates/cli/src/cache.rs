//! Hash-keyed cache of built complexes.

use std::fs;
use std::path::{Path, PathBuf};

use diamond_core::ComplexDescription;
use diamond_experiments::{main_complex, RunConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    version: u32,
    key: String,
    schedule: String,
    complex: ComplexDescription,
}

/// Only the schedule keys decide the complex.
pub fn schedule_text(cfg: &RunConfig) -> String {
    let sub = cfg.subdivision.map(|m| m.to_string()).unwrap_or_else(|| "none".into());
    format!("n0 = {}\nlevels = {}\ntoy = {}\nsubdivision = {sub}\n", cfg.n0, cfg.levels, cfg.toy)
}

pub fn cache_key(cfg: &RunConfig) -> String {
    let digest = format!("{:x}", Sha256::digest(schedule_text(cfg).as_bytes()));
    digest[..16].to_string()
}

pub fn cache_path(cfg: &RunConfig, dir: &Path) -> PathBuf {
    dir.join(format!("complex-{}.json", cache_key(cfg)))
}

/// Load the cached complex if present and intact.
pub fn load(cfg: &RunConfig, dir: &Path) -> Option<ComplexDescription> {
    let text = fs::read_to_string(cache_path(cfg, dir)).ok()?;
    let entry: CacheEntry = serde_json::from_str(&text).ok()?;
    (entry.version == CACHE_VERSION && entry.key == cache_key(cfg) && entry.schedule == schedule_text(cfg)).then_some(entry.complex)
}

/// Returns the cache file and whether it was already there.
pub fn build_cached(cfg: &RunConfig, dir: &Path) -> Result<(PathBuf, bool), CliError> {
    let path = cache_path(cfg, dir);
    if load(cfg, dir).is_some() {
        return Ok((path, true));
    }
    let complex = main_complex(cfg)?;
    fs::create_dir_all(dir)?;
    let entry = CacheEntry { version: CACHE_VERSION, key: cache_key(cfg), schedule: schedule_text(cfg), complex };
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_string(&entry).expect("complex serializes"))?;
    fs::rename(&tmp, &path)?;
    Ok((path, false))
}
