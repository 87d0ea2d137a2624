//! Pipeline configuration: defaults, flat-file parsing and layered
//! overrides (CLI over file over defaults).

use std::path::Path;

use crate::error::{Error, Result};
use crate::nonlocal::Bandwidth;
use crate::pipeline::io::read_key_values;

/// Which feature representation the segmentation tree is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Standardized local features.
    Local,
    /// Nonlocal self-similarity rows of the (standardized) local features.
    Nonlocal,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Local => "local",
            Mode::Nonlocal => "nonlocal",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" | "L" => Ok(Mode::Local),
            "nonlocal" | "NL" => Ok(Mode::Nonlocal),
            other => Err(Error::InvalidParameter(format!(
                "mode must be `local` or `nonlocal`, got {other:?}"
            ))),
        }
    }
}

/// Requested segment count: a fixed value, or a sweep that picks the count
/// maximizing the F-measure against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentCount {
    Sweep,
    Fixed(usize),
}

/// Everything the end-to-end pipeline needs. Defaults reproduce the
/// reference settings: patch radius 2, auto bandwidth, 6 principal
/// components, tolerance 5, full nonlocal range.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub patch_radius: usize,
    pub bandwidth: Bandwidth,
    pub include_self: bool,
    pub n_components: usize,
    pub n_segments: SegmentCount,
    pub tolerance: usize,
    pub seed: u64,
    pub dump_stages: bool,
    /// Standardize local features before the similarity kernel (the
    /// alternative feeds raw features to the kernel).
    pub standardize_first: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: Mode::Nonlocal,
            patch_radius: 2,
            bandwidth: Bandwidth::Auto,
            include_self: true,
            n_components: 6,
            n_segments: SegmentCount::Sweep,
            tolerance: 5,
            seed: 0,
            dump_stages: false,
            standardize_first: true,
        }
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::InvalidParameter(format!(
            "{key} must be a boolean, got {value:?}"
        ))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse {value:?}")))
}

pub(crate) fn parse_bandwidth(value: &str) -> Result<Bandwidth> {
    if value == "auto" {
        return Ok(Bandwidth::Auto);
    }
    let h: f64 = parse_num("bandwidth", value)?;
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be positive, got {value}"
        )));
    }
    Ok(Bandwidth::Fixed(h))
}

pub(crate) fn parse_segment_count(value: &str) -> Result<SegmentCount> {
    if value == "sweep" {
        return Ok(SegmentCount::Sweep);
    }
    let n: usize = parse_num("n_segments", value)?;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "n_segments must be >= 1 or `sweep`".into(),
        ));
    }
    Ok(SegmentCount::Fixed(n))
}

impl PipelineConfig {
    /// Apply one `key = value` pair on top of the current config.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "mode" => self.mode = value.parse()?,
            "patch_radius" => {
                self.patch_radius = parse_num(key, value)?;
                if self.patch_radius == 0 {
                    return Err(Error::InvalidParameter("patch_radius must be >= 1".into()));
                }
            }
            "bandwidth" => self.bandwidth = parse_bandwidth(value)?,
            "include_self" => self.include_self = parse_bool(key, value)?,
            "n_components" => {
                self.n_components = parse_num(key, value)?;
                if self.n_components == 0 {
                    return Err(Error::InvalidParameter("n_components must be >= 1".into()));
                }
            }
            "n_segments" => self.n_segments = parse_segment_count(value)?,
            "tolerance" => self.tolerance = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "dump_stages" => self.dump_stages = parse_bool(key, value)?,
            "standardize_first" => self.standardize_first = parse_bool(key, value)?,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown config key {other:?}"
                )))
            }
        }
        Ok(())
    }

    /// Defaults overlaid with a flat config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut config = PipelineConfig::default();
        for (key, value) in read_key_values(path)? {
            config.apply(&key, &value)?;
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_reference_settings() {
        let c = PipelineConfig::default();
        assert_eq!(c.patch_radius, 2);
        assert_eq!(c.n_components, 6);
        assert_eq!(c.tolerance, 5);
        assert_eq!(c.bandwidth, Bandwidth::Auto);
        assert!(c.include_self);
    }

    #[test]
    fn file_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg");
        std::fs::write(
            &path,
            "mode = local\npatch_radius = 3\nbandwidth = 1.5\nn_segments = 12\nseed = 9\n",
        )
        .unwrap();
        let c = PipelineConfig::from_file(&path).unwrap();
        assert_eq!(c.mode, Mode::Local);
        assert_eq!(c.patch_radius, 3);
        assert_eq!(c.bandwidth, Bandwidth::Fixed(1.5));
        assert_eq!(c.n_segments, SegmentCount::Fixed(12));
        assert_eq!(c.seed, 9);
        assert_eq!(c.tolerance, 5);
    }

    #[test]
    fn later_application_wins() {
        let mut c = PipelineConfig::default();
        c.apply("mode", "local").unwrap();
        c.apply("mode", "nonlocal").unwrap();
        assert_eq!(c.mode, Mode::Nonlocal);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut c = PipelineConfig::default();
        assert!(c.apply("mode", "global").is_err());
        assert!(c.apply("patch_radius", "0").is_err());
        assert!(c.apply("bandwidth", "-1").is_err());
        assert!(c.apply("bandwidth", "nan").is_err());
        assert!(c.apply("n_segments", "0").is_err());
        assert!(c.apply("n_components", "0").is_err());
        assert!(c.apply("unknown_key", "1").is_err());
        assert!(c.apply("include_self", "maybe").is_err());
    }

    #[test]
    fn segment_count_parsing() {
        assert_eq!(parse_segment_count("sweep").unwrap(), SegmentCount::Sweep);
        assert_eq!(
            parse_segment_count("8").unwrap(),
            SegmentCount::Fixed(8)
        );
        assert!(parse_segment_count("-2").is_err());
    }
}
