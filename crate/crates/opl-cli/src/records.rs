//! Append-only run records: one self-describing JSON object per line.

use serde_json::{json, Value};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

pub const SCHEMA_VERSION: u64 = 1;

/// Builds a run record. `result` must contain only reproducible data;
/// timing lives in its own field.
pub fn run_record(
    command: &str,
    params: Value,
    result: Value,
    seed: Option<(u64, u64)>,
    wall_time: f64,
) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": params,
        "result": result,
        "seed": seed.map(|(seed, stream)| json!({"seed": seed, "stream": stream})),
        "timing": {"wall_time": wall_time},
        "timestamp": rfc3339_utc_now(),
        "version": env!("CARGO_PKG_VERSION"),
    })
}

/// Appends one record as a single line. The whole line is written in one
/// call so concurrent appenders cannot interleave inside a record.
pub fn append_record(path: &Path, record: &Value) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = record.to_string();
    line.push('\n');
    file.write_all(line.as_bytes())
}

pub fn rfc3339_utc_now() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    rfc3339_utc(secs)
}

/// Civil UTC timestamp from Unix seconds, no leap-second adjustment.
pub fn rfc3339_utc(secs: u64) -> String {
    let days = secs / 86_400;
    let rem = secs % 86_400;
    let (hour, minute, second) = (rem / 3600, rem % 3600 / 60, rem % 60);

    // Gregorian calendar from day count, era by era.
    let z = days + 719_468;
    let era = z / 146_097;
    let doe = z % 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let year = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = doy - (153 * mp + 2) / 5 + 1;
    let month = if mp < 10 { mp + 3 } else { mp - 9 };
    let year = if month <= 2 { year + 1 } else { year };

    format!("{year:04}-{month:02}-{day:02}T{hour:02}:{minute:02}:{second:02}Z")
}
