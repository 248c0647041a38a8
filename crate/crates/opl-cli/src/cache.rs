//! On-disk cache of enumeration censuses, keyed by vertex count, with a
//! checksum sidecar so stale or corrupted files are re-enumerated instead of
//! trusted.

use opl_core::{enumerate_counts, CountsTable};
use std::path::{Path, PathBuf};

pub const CACHE_ENV: &str = "OPL_CACHE";
pub const DEFAULT_CACHE_DIR: &str = "opl-cache";

/// Cache directory resolution: the `OPL_CACHE` environment variable
/// overrides everything, then the `--cache` flag, then the default.
pub fn resolve_cache_dir(flag: Option<&Path>) -> PathBuf {
    if let Ok(dir) = std::env::var(CACHE_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    flag.map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
}

fn counts_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("counts_n{n}.json"))
}

fn checksum_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("counts_n{n}.json.fnv"))
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn load(dir: &Path, n: usize) -> Option<CountsTable> {
    let body = std::fs::read(counts_path(dir, n)).ok()?;
    let recorded = std::fs::read_to_string(checksum_path(dir, n)).ok()?;
    if format!("{:016x}", fnv1a64(&body)) != recorded.trim() {
        return None;
    }
    let table = CountsTable::from_json(std::str::from_utf8(&body).ok()?).ok()?;
    (table.n() == n).then_some(table)
}

fn store(dir: &Path, table: &CountsTable) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let body = table.to_json();
    std::fs::write(counts_path(dir, table.n()), &body)?;
    std::fs::write(
        checksum_path(dir, table.n()),
        format!("{:016x}", fnv1a64(body.as_bytes())),
    )
}

/// Cached census lookup; enumerates within `cap` on a miss and persists the
/// result. Cache problems fall back to enumeration; only the enumeration
/// budget can make this fail.
pub fn counts_for(dir: &Path, n: usize, cap: u128) -> opl_core::Result<(CountsTable, bool)> {
    if let Some(table) = load(dir, n) {
        return Ok((table, true));
    }
    let table = enumerate_counts(n, cap)?;
    if let Err(err) = store(dir, &table) {
        eprintln!("warning: could not persist the census cache: {err}");
    }
    Ok((table, false))
}
