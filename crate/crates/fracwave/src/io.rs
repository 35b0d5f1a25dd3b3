//! CSV readers/writers for the field types, atomic file output, and the run
//! manifest. All floats are written with 17 significant digits so reruns are
//! byte-identical.

use crate::forward::{FluxTrace, SpaceTimeField};
use crate::fracops::{TimeGrid, TimeSeries};
use crate::spatial::{MeshField, Side};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write via a temp file in the same directory, then rename into place, so
/// partially written outputs never appear under the final name.
pub fn atomic_write(path: &Path, contents: &str) -> Result<(), IoError> {
    let err = |source: std::io::Error| IoError::File {
        path: path.display().to_string(),
        source,
    };
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(err)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default()
    ));
    {
        let mut f = std::fs::File::create(&tmp).map_err(err)?;
        f.write_all(contents.as_bytes()).map_err(err)?;
        f.sync_all().map_err(err)?;
    }
    std::fs::rename(&tmp, path).map_err(err)
}

pub fn time_series_csv(series: &TimeSeries) -> String {
    let mut out = String::from("t,value\n");
    for (m, v) in series.values.iter().enumerate() {
        let _ = writeln!(out, "{},{}", fmt(series.grid.node(m)), fmt(*v));
    }
    out
}

pub fn mesh_field_csv(field: &MeshField) -> String {
    let mut out = String::from("x,value\n");
    for (i, v) in field.values.iter().enumerate() {
        let _ = writeln!(out, "{},{}", fmt(field.mesh.node(i + 1)), fmt(*v));
    }
    out
}

/// Long format, time-major, boundary nodes included.
pub fn space_time_csv(field: &SpaceTimeField) -> String {
    let mut out = String::from("t,x,value\n");
    let n = field.mesh.n_interior;
    for (m, row) in field.rows.iter().enumerate() {
        let t = field.grid.node(m);
        for (k, v) in row.iter().enumerate() {
            let x = if k == 0 {
                field.mesh.x_left
            } else if k == n + 1 {
                field.mesh.x_right
            } else {
                field.mesh.node(k)
            };
            let _ = writeln!(out, "{},{},{}", fmt(t), fmt(x), fmt(*v));
        }
    }
    out
}

pub fn flux_trace_csv(trace: &FluxTrace) -> String {
    let mut out = String::from("t,side,flux\n");
    for (side, vals) in &trace.traces {
        let name = match side {
            Side::Left => "left",
            Side::Right => "right",
        };
        for (m, v) in vals.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", fmt(trace.grid.node(m)), name, fmt(*v));
        }
    }
    out
}

/// Parse a `t,side,flux` file back onto its uniform grid.
pub fn read_flux_trace(path: &Path) -> Result<FluxTrace, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })?;
    let mut sides: Vec<(Side, Vec<(f64, f64)>)> = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let bad = |message: String| IoError::Format {
            path: path.display().to_string(),
            line: lineno + 1,
            message,
        };
        let t: f64 = cols
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad("bad t column".into()))?;
        let side = match cols.next().map(str::trim) {
            Some("left") => Side::Left,
            Some("right") => Side::Right,
            other => return Err(bad(format!("bad side column {other:?}"))),
        };
        let flux: f64 = cols
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad("bad flux column".into()))?;
        match sides.iter_mut().find(|(s, _)| *s == side) {
            Some((_, v)) => v.push((t, flux)),
            None => sides.push((side, vec![(t, flux)])),
        }
    }
    let bad = |message: String| IoError::Format {
        path: path.display().to_string(),
        line: 0,
        message,
    };
    let (_, first) = sides.first().ok_or_else(|| bad("no data rows".into()))?;
    let n_steps = first.len().checked_sub(1).filter(|n| *n > 0).ok_or_else(
        || bad("need at least two samples per side".into()),
    )?;
    let t_end = first.last().unwrap().0;
    if t_end <= 0.0 {
        return Err(bad("final time must be positive".into()));
    }
    let grid = TimeGrid::new(t_end, n_steps);
    let dt = grid.dt();
    let mut traces = Vec::new();
    for (side, rows) in sides {
        if rows.len() != n_steps + 1 {
            return Err(bad(format!("side {side:?} has {} rows", rows.len())));
        }
        for (m, (t, _)) in rows.iter().enumerate() {
            if (t - grid.node(m)).abs() > 1e-9 * t_end.max(1.0) {
                return Err(bad(format!("non-uniform time node at t={t}")));
            }
        }
        let _ = dt;
        traces.push((side, rows.into_iter().map(|(_, f)| f).collect()));
    }
    Ok(FluxTrace { grid, traces })
}

pub fn sha256_hex(contents: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(contents.as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Written last, only on success: what ran, how long, and what came out.
pub struct Manifest {
    pub version: String,
    pub config_echo: String,
    pub timings: Vec<(String, f64)>,
    pub outputs: Vec<(PathBuf, String)>,
}

impl Manifest {
    pub fn new(config_echo: &str) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_echo: config_echo.to_string(),
            timings: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record_output(&mut self, path: &Path, contents: &str) {
        self.outputs
            .push((path.to_path_buf(), sha256_hex(contents)));
    }

    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "version = {:?}", self.version);
        let _ = writeln!(out, "\n[timings]");
        for (name, secs) in &self.timings {
            let _ = writeln!(out, "{name} = {secs:.6}");
        }
        let _ = writeln!(out, "\n[outputs]");
        for (path, digest) in &self.outputs {
            let name = path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let _ = writeln!(out, "{name:?} = {digest:?}");
        }
        let _ = writeln!(out, "\n[config]");
        for line in self.config_echo.lines() {
            let _ = writeln!(out, "# {line}");
        }
        out
    }
}
