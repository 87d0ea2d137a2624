//! Seeded piecewise-stationary sequence generator.
//!
//! A desk-scale stand-in for real photostream features: each event has a
//! latent mean vector, frames scatter around it with Gaussian noise, and a
//! configurable fraction of frames is replaced by large-amplitude outliers
//! to mimic sporadic abrupt appearance changes within an event.
//!
//! Draw order (fixed, so streams are reproducible from the documented
//! generator): event means row-major (`n_events * dims` normals), then the
//! boundary composition (Floyd's subset sampling), then per frame one
//! uniform for the outlier Bernoulli followed by `dims` normals.

use crate::error::{Error, Result};
use crate::features::FeatureSequence;
use crate::pipeline::rng::Rng64;
use crate::segtree::Segmentation;

/// Parameters of one synthetic sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// Sequence length `K`.
    pub n_frames: usize,
    /// Feature dimensions `P`.
    pub n_features: usize,
    pub n_events: usize,
    /// Within-event noise standard deviation.
    pub noise_sigma: f64,
    /// Probability that a frame is replaced by an outlier.
    pub outlier_rate: f64,
    /// Outlier noise amplitude, as a multiple of `noise_sigma`.
    pub outlier_scale: f64,
    pub min_segment_len: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_frames: 300,
            n_features: 20,
            n_events: 8,
            noise_sigma: 0.5,
            outlier_rate: 0.1,
            outlier_scale: 4.0,
            min_segment_len: 15,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.n_frames == 0 || self.n_features == 0 {
            return Err(Error::InfeasibleSpec("need frames >= 1 and dims >= 1".into()));
        }
        if self.n_events == 0 || self.min_segment_len == 0 {
            return Err(Error::InfeasibleSpec(
                "need events >= 1 and min_segment_len >= 1".into(),
            ));
        }
        if self.n_events * self.min_segment_len > self.n_frames {
            return Err(Error::InfeasibleSpec(format!(
                "{} events of at least {} frames do not fit in {} frames",
                self.n_events, self.min_segment_len, self.n_frames
            )));
        }
        if self.noise_sigma <= 0.0 || !self.noise_sigma.is_finite() {
            return Err(Error::InfeasibleSpec("noise_sigma must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.outlier_rate) {
            return Err(Error::InfeasibleSpec("outlier_rate must be in [0, 1)".into()));
        }
        if self.outlier_scale <= 0.0 || !self.outlier_scale.is_finite() {
            return Err(Error::InfeasibleSpec("outlier_scale must be positive".into()));
        }
        Ok(())
    }
}

/// Sample `count` distinct values from `1..=pool` (Floyd's algorithm),
/// returned sorted. Uses exactly `count` draws.
fn sample_distinct_sorted(rng: &mut Rng64, count: usize, pool: usize) -> Vec<usize> {
    debug_assert!(count <= pool);
    let mut picked = Vec::with_capacity(count);
    for j in (pool - count + 1)..=pool {
        let t = 1 + rng.below(j as u64) as usize;
        if picked.contains(&t) {
            picked.push(j);
        } else {
            picked.push(t);
        }
    }
    picked.sort_unstable();
    picked
}

/// Generate one sequence and its ground-truth segmentation.
///
/// Segment lengths are `min_segment_len` plus a uniformly random
/// composition of the leftover frames (stars and bars via distinct-subset
/// sampling), so every achievable length profile is equally likely.
pub fn generate_piecewise(spec: &SyntheticSpec) -> Result<(FeatureSequence, Segmentation)> {
    spec.validate()?;
    let k = spec.n_frames;
    let p = spec.n_features;
    let ne = spec.n_events;
    let mut rng = Rng64::new(spec.seed);

    let means: Vec<Vec<f64>> = (0..ne)
        .map(|_| (0..p).map(|_| rng.normal()).collect())
        .collect();

    // Composition of the spare frames over the events.
    let extra = k - ne * spec.min_segment_len;
    let lengths: Vec<usize> = if ne == 1 {
        vec![k]
    } else {
        let picks = sample_distinct_sorted(&mut rng, ne - 1, extra + ne - 1);
        let mut lens = Vec::with_capacity(ne);
        let mut prev = 0;
        for &c in &picks {
            lens.push(spec.min_segment_len + (c - prev - 1));
            prev = c;
        }
        lens.push(spec.min_segment_len + (extra + ne - 1 - prev));
        lens
    };
    debug_assert_eq!(lengths.iter().sum::<usize>(), k);

    let mut boundaries = Vec::with_capacity(ne - 1);
    let mut acc = 0;
    for &len in lengths.iter().take(ne - 1) {
        acc += len;
        boundaries.push(acc);
    }
    let truth = Segmentation::new(boundaries, k)?;

    let mut data = Vec::with_capacity(k * p);
    for frame in 0..k {
        let event = truth.segment_of(frame);
        let is_outlier = rng.uniform() < spec.outlier_rate;
        let sigma = if is_outlier {
            spec.outlier_scale * spec.noise_sigma
        } else {
            spec.noise_sigma
        };
        for &mu in &means[event] {
            data.push(mu + sigma * rng.normal());
        }
    }
    let seq = FeatureSequence::from_flat(k, p, data)?;
    Ok((seq, truth))
}
