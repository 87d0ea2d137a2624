//! Local-vs-nonlocal benchmark over seeded synthetic sequences.
//!
//! Each sequence is segmented under both modes and scored with the
//! best-F sweep; the report carries one row per sequence plus the means,
//! so the table reads like the usual L / NL / Diff comparison.

use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::{best_f_over_cuts, default_max_segments, EvalReport};
use crate::pipeline::config::{Mode, PipelineConfig};
use crate::pipeline::io::{read_key_values, render_record};
use crate::pipeline::rng::stream_seed;
use crate::pipeline::synth::{generate_piecewise, SyntheticSpec};
use crate::pipeline::run_pipeline;

/// Scores of one sequence under both modes.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub sequence_id: String,
    pub local: EvalReport,
    pub nonlocal: EvalReport,
}

impl BenchRow {
    pub fn diff(&self) -> f64 {
        self.nonlocal.f_measure - self.local.f_measure
    }
}

/// Benchmark outcome: per-sequence rows in input order.
#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn mean_local_f(&self) -> f64 {
        self.rows.iter().map(|r| r.local.f_measure).sum::<f64>() / self.rows.len() as f64
    }

    pub fn mean_nonlocal_f(&self) -> f64 {
        self.rows.iter().map(|r| r.nonlocal.f_measure).sum::<f64>() / self.rows.len() as f64
    }

    /// Sequences where the nonlocal mode scores at least as high.
    pub fn nonlocal_wins(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.nonlocal.f_measure >= r.local.f_measure)
            .count()
    }

    /// Fixed-width table: one row per sequence plus a mean row.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<12} {:>8} {:>8} {:>8}\n",
            "sequence", "L", "NL", "diff"
        ));
        for row in &self.rows {
            out.push_str(&format!(
                "{:<12} {:>8.4} {:>8.4} {:>+8.4}\n",
                row.sequence_id,
                row.local.f_measure,
                row.nonlocal.f_measure,
                row.diff()
            ));
        }
        out.push_str(&format!(
            "{:<12} {:>8.4} {:>8.4} {:>+8.4}\n",
            "mean",
            self.mean_local_f(),
            self.mean_nonlocal_f(),
            self.mean_nonlocal_f() - self.mean_local_f()
        ));
        out
    }

    /// Line-delimited record set, two records per sequence (one per mode).
    pub fn render_records(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            for (mode, report) in [("local", &row.local), ("nonlocal", &row.nonlocal)] {
                out.push_str(&render_record(
                    &row.sequence_id,
                    mode,
                    report.n_segments,
                    report.precision,
                    report.recall,
                    report.f_measure,
                ));
            }
        }
        out
    }
}

/// Segment every spec under both configs and score each mode with the
/// best-F sweep (`max_segments = None` applies the default ceiling).
pub fn run_benchmark(
    specs: &[SyntheticSpec],
    local: &PipelineConfig,
    nonlocal: &PipelineConfig,
    max_segments: Option<usize>,
) -> Result<BenchReport> {
    if specs.is_empty() {
        return Err(Error::EmptyInput("benchmark needs at least one spec"));
    }
    if local.mode != Mode::Local || nonlocal.mode != Mode::Nonlocal {
        return Err(Error::InvalidParameter(
            "benchmark config pair must be (local, nonlocal)".into(),
        ));
    }
    let mut rows = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let (seq, truth) = generate_piecewise(spec)?;
        let budget = max_segments
            .unwrap_or_else(|| default_max_segments(seq.n_frames(), truth.boundaries().len()));
        let score = |config: &PipelineConfig| -> Result<EvalReport> {
            let run = run_pipeline(&seq, config)?;
            best_f_over_cuts(&run.tree, &truth, config.tolerance, budget)
        };
        rows.push(BenchRow {
            sequence_id: format!("seq{i}"),
            local: score(local)?,
            nonlocal: score(nonlocal)?,
        });
    }
    Ok(BenchReport { rows })
}

/// A parsed benchmark spec file: synthetic-sequence keys plus pipeline
/// keys in one flat `key = value` file.
#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub n_sequences: usize,
    pub sequence: SyntheticSpec,
    pub config: PipelineConfig,
    pub max_segments: Option<usize>,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            n_sequences: 20,
            sequence: SyntheticSpec::default(),
            config: PipelineConfig::default(),
            max_segments: None,
        }
    }
}

impl BenchSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut spec = BenchSpec::default();
        for (key, value) in read_key_values(path)? {
            spec.apply(&key, &value)?;
        }
        Ok(spec)
    }

    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let parse_usize = |v: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse {v:?}")))
        };
        let parse_f64 = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse {v:?}")))
        };
        match key {
            "sequences" => self.n_sequences = parse_usize(value)?,
            "frames" => self.sequence.n_frames = parse_usize(value)?,
            "dims" => self.sequence.n_features = parse_usize(value)?,
            "events" => self.sequence.n_events = parse_usize(value)?,
            "noise_sigma" => self.sequence.noise_sigma = parse_f64(value)?,
            "outlier_rate" => self.sequence.outlier_rate = parse_f64(value)?,
            "outlier_scale" => self.sequence.outlier_scale = parse_f64(value)?,
            "min_segment_len" => self.sequence.min_segment_len = parse_usize(value)?,
            "seed" => {
                self.sequence.seed = value.parse().map_err(|_| {
                    Error::InvalidParameter(format!("seed: cannot parse {value:?}"))
                })?;
                self.config.seed = self.sequence.seed;
            }
            "max_segments" => {
                self.max_segments = if value == "auto" {
                    None
                } else {
                    Some(parse_usize(value)?)
                }
            }
            // Everything else is a pipeline knob shared by both modes.
            other => self.config.apply(other, value)?,
        }
        Ok(())
    }

    /// Per-sequence synthetic specs: sequence `i` runs on stream `i` of
    /// the base seed.
    pub fn sequence_specs(&self) -> Vec<SyntheticSpec> {
        (0..self.n_sequences)
            .map(|i| SyntheticSpec {
                seed: stream_seed(self.sequence.seed, i as u64),
                ..self.sequence.clone()
            })
            .collect()
    }

    /// The `(local, nonlocal)` config pair sharing every other knob.
    pub fn config_pair(&self) -> (PipelineConfig, PipelineConfig) {
        let mut local = self.config.clone();
        local.mode = Mode::Local;
        let mut nonlocal = self.config.clone();
        nonlocal.mode = Mode::Nonlocal;
        (local, nonlocal)
    }
}
