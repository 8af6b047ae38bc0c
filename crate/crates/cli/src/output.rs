//! File writers and argument parsing shared by the subcommands and the
//! manifest runner.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Where a subcommand sends its main output. `--out` naming a file with an
/// extension is used as is; anything else is a directory that receives
/// `default_name`.
pub fn resolve_out(out: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    let out = out?;
    if out.extension().is_some() && !out.is_dir() {
        Some(out.to_path_buf())
    } else {
        Some(out.join(default_name))
    }
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).map_err(|e| CliError::io(p, e)),
        _ => Ok(()),
    }
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_text(path, &to_json(value)?)
}

/// RFC 4180 CSV with a header row.
pub fn csv_string(header: &[String], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io("<csv buffer>", e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Schema(e.to_string()))
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}

/// A `T` ladder: `50,100,200`, `1e2,1e3`, geometric `50:800:x2` or
/// arithmetic `10:40:+10`.
pub fn parse_ladder(s: &str) -> CliResult<Vec<f64>> {
    let num = |x: &str| -> CliResult<f64> {
        let v: f64 = x.trim().parse().map_err(|_| CliError::Schema(format!("bad ladder value {x:?}")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Schema(format!("bad ladder value {x:?}")))
        }
    };
    let parts: Vec<&str> = s.split(':').collect();
    let ladder = match parts.as_slice() {
        [list] => list.split(',').map(num).collect::<CliResult<Vec<_>>>()?,
        [lo, hi, step] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let step = step.trim();
            let mut out = Vec::new();
            if let Some(f) = step.strip_prefix('x') {
                let f = num(f)?;
                if !(f > 1.0) {
                    return Err(CliError::Schema("geometric ladder factor must exceed 1".into()));
                }
                let mut k = 0;
                loop {
                    let t = lo * f.powi(k);
                    if t > hi * (1.0 + 1e-12) {
                        break;
                    }
                    out.push(t);
                    k += 1;
                }
            } else {
                let d = num(step.strip_prefix('+').unwrap_or(step))?;
                if !(d > 0.0) {
                    return Err(CliError::Schema("arithmetic ladder step must be positive".into()));
                }
                let mut k = 0.0;
                while lo + k * d <= hi * (1.0 + 1e-12) {
                    out.push(lo + k * d);
                    k += 1.0;
                }
            }
            out
        }
        _ => return Err(CliError::Schema(format!("bad ladder {s:?}"))),
    };
    check_ladder(&ladder)?;
    Ok(ladder)
}

pub fn check_ladder(ladder: &[f64]) -> CliResult<()> {
    if ladder.is_empty() {
        return Err(CliError::Schema("ladder is empty".into()));
    }
    if !(ladder[0] >= 1.0) {
        return Err(CliError::Schema("ladder values must be at least 1".into()));
    }
    if ladder.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CliError::Schema("ladder must be strictly increasing".into()));
    }
    Ok(())
}
