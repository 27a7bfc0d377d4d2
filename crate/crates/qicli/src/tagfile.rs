//! Time-tag files: one click per line as `detector_id<TAB>timestamp_ns`,
//! sorted by timestamp. Detector ids run 1..=5 (detector 5 is the herald);
//! timestamps are integer nanoseconds.

use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::emit::write_atomic;

const DETECTORS: usize = 5;

/// Serializes five per-detector streams (seconds) into one sorted tag file.
pub fn export_streams(streams: &[Vec<f64>; DETECTORS], path: &Path) -> Result<()> {
    let mut tags: Vec<(u64, u8)> = Vec::with_capacity(streams.iter().map(Vec::len).sum());
    for (index, stream) in streams.iter().enumerate() {
        let id = index as u8 + 1;
        for &t in stream {
            if !t.is_finite() || t < 0.0 {
                bail!("detector {id} holds an invalid timestamp {t}");
            }
            tags.push(((t * 1e9).round() as u64, id));
        }
    }
    tags.sort_unstable();
    let mut text = String::with_capacity(tags.len() * 16);
    for (ns, id) in tags {
        text.push_str(&format!("{id}\t{ns}\n"));
    }
    write_atomic(path, text.as_bytes())
}

/// Reads a tag file back into five per-detector streams (seconds).
pub fn import_streams(path: &Path) -> Result<[Vec<f64>; DETECTORS]> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading tag file `{}`", path.display()))?;
    let mut streams: [Vec<f64>; DETECTORS] = Default::default();
    let mut last_ns = 0u64;
    for (number, line) in text.lines().enumerate() {
        let place = || format!("{}:{}", path.display(), number + 1);
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (id_text, ns_text) = line
            .split_once('\t')
            .with_context(|| format!("{}: expected `detector_id<TAB>timestamp_ns`", place()))?;
        let id: usize = id_text
            .trim()
            .parse()
            .with_context(|| format!("{}: `{id_text}` is not a detector id", place()))?;
        if !(1..=DETECTORS).contains(&id) {
            bail!("{}: detector id {id} outside 1..=5", place());
        }
        let ns: u64 = ns_text
            .trim()
            .parse()
            .with_context(|| format!("{}: `{ns_text}` is not a nanosecond timestamp", place()))?;
        if ns < last_ns {
            bail!(
                "{}: timestamps must be sorted ({} after {})",
                place(),
                ns,
                last_ns
            );
        }
        last_ns = ns;
        streams[id - 1].push(ns as f64 * 1e-9);
    }
    Ok(streams)
}
