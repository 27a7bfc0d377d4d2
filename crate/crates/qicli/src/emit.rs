//! Deterministic row emission: CSV or JSON, to stdout or to a file written
//! atomically (temp file plus rename, so failures leave nothing behind).

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::sweep::SweepRow;

pub const CSV_HEADER: &str = "sweep_kind,sweep_value,scheme,convention,normalization,\
                              S,S_sigma,theta,delta,theta_p,delta_p,E1,E2,E3,E4,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Writes the rows to `out`, or to stdout when no path is given.
pub fn emit(rows: &[SweepRow], format: Format, out: Option<&Path>) -> Result<()> {
    if rows.is_empty() {
        bail!("no rows to emit");
    }
    let body = match format {
        Format::Csv => render_csv(rows),
        Format::Json => render_json(rows)?,
    };
    match out {
        Some(path) => write_atomic(path, body.as_bytes()),
        None => {
            std::io::stdout()
                .write_all(body.as_bytes())
                .context("writing rows to stdout")?;
            Ok(())
        }
    }
}

/// Twelve significant digits, normalized so negative zero never leaks into
/// the output (its sign bit is invisible to rerun comparisons otherwise).
fn sig12(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut text = String::with_capacity(64 + rows.len() * 256);
    text.push_str(CSV_HEADER);
    text.push('\n');
    for r in rows {
        let fields = [
            r.sweep_kind.clone(),
            sig12(r.sweep_value),
            r.scheme.to_owned(),
            r.convention.to_owned(),
            r.normalization.to_owned(),
            sig12(r.s),
            sig12(r.s_sigma),
            sig12(r.theta),
            sig12(r.delta),
            sig12(r.theta_p),
            sig12(r.delta_p),
            sig12(r.e1),
            sig12(r.e2),
            sig12(r.e3),
            sig12(r.e4),
            r.seed.to_string(),
        ];
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    text
}

pub fn render_json(rows: &[SweepRow]) -> Result<String> {
    let mut text = serde_json::to_string_pretty(rows).context("serializing rows to JSON")?;
    text.push('\n');
    Ok(text)
}

/// Full-file atomic write: the target never holds a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .with_context(|| format!("`{}` has no file name", path.display()))?;
    let mut tmp_name = file_name.to_owned();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);

    let write = || -> std::io::Result<()> {
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, path)
    };
    write().map_err(|err| {
        let _ = fs::remove_file(&tmp);
        anyhow::Error::new(err).context(format!("writing `{}`", path.display()))
    })
}
