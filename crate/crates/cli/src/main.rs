//! `nlseg`: temporal segmentation of feature-vector sequences via
//! nonlocal self-similarity.
//!
//! Subcommands: `segment` (cut a sequence into a fixed number of
//! segments), `eval` (score a fixed cut against ground truth), `sweep`
//! (pick the segment count maximizing the F-measure), `synth` (generate a
//! seeded synthetic sequence) and `bench` (the local-vs-nonlocal
//! comparison over seeded synthetic sequences).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use nlseg::eval::{best_f_over_cuts, default_max_segments, f_measure};
use nlseg::pipeline::io;
use nlseg::pipeline::{
    generate_piecewise, run_benchmark, run_pipeline, write_dumps, BenchSpec, PipelineConfig,
    PipelineRun, SegmentCount,
};
use nlseg::{FeatureSequence, Segmentation};

#[derive(Parser)]
#[command(name = "nlseg", version, about = "Temporal segmentation via nonlocal self-similarity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a feature sequence into a fixed number of segments
    Segment(SegmentArgs),
    /// Score a fixed-count segmentation against ground truth
    Eval(EvalArgs),
    /// Sweep segment counts and report the cut with maximal F-measure
    Sweep(SweepArgs),
    /// Generate a seeded synthetic sequence and its ground truth
    Synth(SynthArgs),
    /// Compare local vs nonlocal features over seeded synthetic sequences
    Bench(BenchArgs),
}

/// Pipeline knobs; precedence is CLI flag over config file over defaults.
#[derive(Args)]
struct PipelineArgs {
    /// Flat `key = value` config file
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Feature representation: local | nonlocal
    #[arg(long)]
    mode: Option<String>,
    /// Temporal patch radius M
    #[arg(long, value_name = "M")]
    patch_radius: Option<usize>,
    /// Kernel bandwidth: auto | positive number
    #[arg(long, value_name = "auto|H")]
    bandwidth: Option<String>,
    /// Include the diagonal in similarity rows and normalization
    #[arg(long, value_name = "BOOL")]
    include_self: Option<String>,
    /// Number of principal components
    #[arg(long, value_name = "C")]
    components: Option<usize>,
    /// Segment count: sweep | positive number
    #[arg(long, value_name = "sweep|N")]
    segments: Option<String>,
    /// Boundary matching tolerance in frames
    #[arg(long, value_name = "T")]
    tolerance: Option<usize>,
    /// Base seed for seeded stages
    #[arg(long)]
    seed: Option<u64>,
    /// Standardize features before the similarity kernel
    #[arg(long, value_name = "BOOL")]
    standardize_first: Option<String>,
    /// Write stage dumps (similarity matrix, components, adjacent-distance
    /// profile) into this directory
    #[arg(long, value_name = "DIR")]
    dump_dir: Option<PathBuf>,
}

impl PipelineArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        let mut apply = |key: &str, value: Option<String>| -> Result<()> {
            if let Some(v) = value {
                config.apply(key, &v)?;
            }
            Ok(())
        };
        apply("mode", self.mode.clone())?;
        apply("patch_radius", self.patch_radius.map(|v| v.to_string()))?;
        apply("bandwidth", self.bandwidth.clone())?;
        apply("include_self", self.include_self.clone())?;
        apply("n_components", self.components.map(|v| v.to_string()))?;
        apply("n_segments", self.segments.clone())?;
        apply("tolerance", self.tolerance.map(|v| v.to_string()))?;
        apply("seed", self.seed.map(|v| v.to_string()))?;
        apply("standardize_first", self.standardize_first.clone())?;
        if self.dump_dir.is_some() {
            config.dump_stages = true;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct InputArgs {
    /// Features CSV: one row per frame, columns = feature dimensions
    features: PathBuf,
    /// Skip one header line in the features CSV
    #[arg(long)]
    header: bool,
    /// Identifier used in records and dump filenames (default: file stem)
    #[arg(long, value_name = "ID")]
    sequence_id: Option<String>,
}

impl InputArgs {
    fn read(&self) -> Result<FeatureSequence> {
        Ok(io::read_features_csv(&self.features, self.header)?)
    }

    fn id(&self) -> String {
        self.sequence_id.clone().unwrap_or_else(|| {
            self.features
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "sequence".into())
        })
    }
}

#[derive(Args)]
struct SegmentArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Output boundary file (stdout if omitted)
    #[arg(short, long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Ground truth: one ascending boundary index per line
    truth: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Write the record line to this file as well
    #[arg(short, long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Ground truth: one ascending boundary index per line
    truth: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Largest segment count to try (default: min(K, 2 * truth + 20))
    #[arg(long, value_name = "N")]
    max_segments: Option<usize>,
    /// Write the record line to this file as well
    #[arg(short, long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Flat `key = value` spec file (flags below take precedence)
    spec: Option<PathBuf>,
    #[arg(long, value_name = "K")]
    frames: Option<usize>,
    #[arg(long, value_name = "P")]
    dims: Option<usize>,
    #[arg(long)]
    events: Option<usize>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    outlier_rate: Option<f64>,
    #[arg(long)]
    outlier_scale: Option<f64>,
    #[arg(long)]
    min_segment_len: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the features CSV
    #[arg(long, value_name = "FILE")]
    features: PathBuf,
    /// Where to write the ground-truth boundaries
    #[arg(long, value_name = "FILE")]
    truth: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Flat `key = value` benchmark spec file
    spec: PathBuf,
    /// Write the per-sequence evaluation records here
    #[arg(long, value_name = "FILE")]
    records: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Segment(args) => segment(args),
        Command::Eval(args) => eval(args),
        Command::Sweep(args) => sweep(args),
        Command::Synth(args) => synth(args),
        Command::Bench(args) => bench(args),
    }
}

fn run_with_dumps(
    seq: &FeatureSequence,
    config: &PipelineConfig,
    dump_dir: Option<&Path>,
    id: &str,
) -> Result<PipelineRun> {
    let run = run_pipeline(seq, config)?;
    if let Some(stages) = &run.stages {
        let dir = dump_dir.unwrap_or_else(|| Path::new("."));
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating dump directory {}", dir.display()))?;
        write_dumps(stages, dir, id)?;
    }
    Ok(run)
}

fn require_fixed_count(config: &PipelineConfig, what: &str) -> Result<usize> {
    match config.n_segments {
        SegmentCount::Fixed(n) => Ok(n),
        SegmentCount::Sweep => bail!(
            "{what} needs a fixed segment count; pass --segments N \
             (or n_segments in the config file), or use `sweep`"
        ),
    }
}

fn read_truth(path: &Path, n_frames: usize) -> Result<Segmentation> {
    Ok(io::read_boundaries(path, n_frames)?)
}

fn emit(line: &str, out: Option<&Path>) -> Result<()> {
    print!("{line}");
    if let Some(path) = out {
        std::fs::write(path, line).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn segment(args: SegmentArgs) -> Result<()> {
    let config = args.pipeline.resolve()?;
    require_fixed_count(&config, "segment")?;
    let seq = args.input.read()?;
    let run = run_with_dumps(&seq, &config, args.pipeline.dump_dir.as_deref(), &args.input.id())?;
    let segmentation = run.segmentation.expect("fixed count always cuts");
    emit(&io::render_boundaries(&segmentation), args.out.as_deref())
}

fn eval(args: EvalArgs) -> Result<()> {
    let config = args.pipeline.resolve()?;
    require_fixed_count(&config, "eval")?;
    let seq = args.input.read()?;
    let truth = read_truth(&args.truth, seq.n_frames())?;
    let run = run_with_dumps(&seq, &config, args.pipeline.dump_dir.as_deref(), &args.input.id())?;
    let report = f_measure(&run.segmentation.expect("fixed count"), &truth, config.tolerance)?;
    let line = io::render_record(
        &args.input.id(),
        config.mode.as_str(),
        report.n_segments,
        report.precision,
        report.recall,
        report.f_measure,
    );
    emit(&line, args.out.as_deref())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut config = args.pipeline.resolve()?;
    // The sweep picks the count itself.
    config.n_segments = SegmentCount::Sweep;
    let seq = args.input.read()?;
    let truth = read_truth(&args.truth, seq.n_frames())?;
    let run = run_with_dumps(&seq, &config, args.pipeline.dump_dir.as_deref(), &args.input.id())?;
    let budget = args
        .max_segments
        .unwrap_or_else(|| default_max_segments(seq.n_frames(), truth.boundaries().len()));
    let report = best_f_over_cuts(&run.tree, &truth, config.tolerance, budget)?;
    let line = io::render_record(
        &args.input.id(),
        config.mode.as_str(),
        report.n_segments,
        report.precision,
        report.recall,
        report.f_measure,
    );
    emit(&line, args.out.as_deref())
}

fn synth(args: SynthArgs) -> Result<()> {
    let mut base = match &args.spec {
        Some(path) => BenchSpec::from_file(path)?,
        None => BenchSpec::default(),
    };
    let mut apply = |key: &str, value: Option<String>| -> Result<()> {
        if let Some(v) = value {
            base.apply(key, &v)?;
        }
        Ok(())
    };
    apply("frames", args.frames.map(|v| v.to_string()))?;
    apply("dims", args.dims.map(|v| v.to_string()))?;
    apply("events", args.events.map(|v| v.to_string()))?;
    apply("noise_sigma", args.noise_sigma.map(|v| v.to_string()))?;
    apply("outlier_rate", args.outlier_rate.map(|v| v.to_string()))?;
    apply("outlier_scale", args.outlier_scale.map(|v| v.to_string()))?;
    apply("min_segment_len", args.min_segment_len.map(|v| v.to_string()))?;
    apply("seed", args.seed.map(|v| v.to_string()))?;

    let (seq, truth) = generate_piecewise(&base.sequence)?;
    io::write_features_csv(&args.features, &seq)?;
    io::write_boundaries(&args.truth, &truth)?;
    println!(
        "wrote {} frames x {} dims to {} and {} boundaries to {}",
        seq.n_frames(),
        seq.n_features(),
        args.features.display(),
        truth.boundaries().len(),
        args.truth.display()
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let spec = BenchSpec::from_file(&args.spec)?;
    let (local, nonlocal) = spec.config_pair();
    let report = run_benchmark(&spec.sequence_specs(), &local, &nonlocal, spec.max_segments)?;
    print!("{}", report.render_table());
    if let Some(path) = &args.records {
        std::fs::write(path, report.render_records())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
