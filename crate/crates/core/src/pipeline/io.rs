//! File formats: feature CSV matrices, boundary lists and stage dumps.
//!
//! Features are headerless CSV, one row per frame, columns = dimensions.
//! Ground truth is one ascending boundary index per line (a boundary at
//! `b` means a new segment starts at frame `b`). Floats are written with
//! the shortest representation that round-trips, so read -> write -> read
//! is bit-exact.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::FeatureSequence;
use crate::nonlocal::SimilarityMatrix;
use crate::segtree::Segmentation;

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    f.write_all(contents.as_bytes()).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Read a feature matrix from CSV. `skip_header` drops the first line.
pub fn read_features_csv(path: &Path, skip_header: bool) -> Result<FeatureSequence> {
    let text = read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 && skip_header {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                parse_error(path, lineno + 1, format!("not a number: {:?}", field.trim()))
            })?;
            if !v.is_finite() {
                return Err(parse_error(path, lineno + 1, "non-finite value"));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_error(path, 1, "no data rows"));
    }
    FeatureSequence::from_rows(rows)
}

fn format_matrix_csv<'a>(rows: impl Iterator<Item = &'a [f64]>) -> String {
    let mut out = String::new();
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn write_features_csv(path: &Path, seq: &FeatureSequence) -> Result<()> {
    write_file(path, &format_matrix_csv(seq.rows()))
}

pub fn write_similarity_csv(path: &Path, sim: &SimilarityMatrix) -> Result<()> {
    write_file(path, &format_matrix_csv(sim.rows()))
}

/// Write a single-column CSV (the adjacent-frame distance profile).
pub fn write_column_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = String::new();
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    write_file(path, &out)
}

/// Read ground-truth boundaries: one ascending index per line, blank lines
/// and `#` comments ignored. `n_frames` bounds the indices.
pub fn read_boundaries(path: &Path, n_frames: usize) -> Result<Segmentation> {
    let text = read_to_string(path)?;
    let mut boundaries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let b: usize = line
            .parse()
            .map_err(|_| parse_error(path, lineno + 1, format!("not an index: {line:?}")))?;
        boundaries.push(b);
    }
    Segmentation::new(boundaries, n_frames)
}

pub fn write_boundaries(path: &Path, seg: &Segmentation) -> Result<()> {
    write_file(path, &render_boundaries(seg))
}

pub fn render_boundaries(seg: &Segmentation) -> String {
    let mut out = String::new();
    for b in seg.boundaries() {
        out.push_str(&format!("{b}\n"));
    }
    out
}

/// One line of the evaluation record set. Field names and order are fixed.
pub fn render_record(
    sequence_id: &str,
    mode: &str,
    n_segments: usize,
    precision: f64,
    recall: f64,
    f_measure: f64,
) -> String {
    format!(
        "sequence_id={sequence_id} mode={mode} n_segments={n_segments} \
         precision={precision:.6} recall={recall:.6} f_measure={f_measure:.6}\n"
    )
}

/// Flat `key = value` file: one pair per line, `#` comments and blank
/// lines ignored. Returns pairs in file order; later duplicates win at
/// lookup time.
pub fn read_key_values(path: &Path) -> Result<Vec<(String, String)>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_error(path, lineno + 1, "expected `key = value`"));
        };
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}
