//! Nonlocal self-similarity: temporal patch distances, bandwidth
//! calibration, the row-stochastic similarity matrix and the nonlocal
//! feature vectors derived from its rows.
//!
//! Frame `k` is compared to frame `j` through its temporal neighborhood
//! `N_k = {k-M, ..., k-1, k+1, ..., k+M}` (center excluded, indices clamped
//! at the sequence edges). The patch distance is the sum of squared
//! Euclidean distances between corresponding neighbors, and similarity is
//! an exponential kernel normalized per row so each row reads as a
//! conditional probability over frames.

use crate::error::{Error, Result};
use crate::features::{squared_distance, FeatureSequence};

/// Kernel bandwidth: a fixed positive decay, or calibrated from the data
/// so the median unnormalized kernel value over frame couples is 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Auto,
    Fixed(f64),
}

/// Parameters of the self-similarity computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlocalParams {
    /// Temporal patch radius `M`: each neighborhood holds `2M` frames.
    pub patch_radius: usize,
    pub bandwidth: Bandwidth,
    /// Whether the diagonal `j = k` participates in rows and in the
    /// normalizer `Z(k)`. With `false` the diagonal is stored as zero and
    /// excluded from normalization (the strict N = K-1 variant).
    pub include_self: bool,
}

impl Default for NonlocalParams {
    fn default() -> Self {
        NonlocalParams {
            patch_radius: 2,
            bandwidth: Bandwidth::Auto,
            include_self: true,
        }
    }
}

impl NonlocalParams {
    fn validate(&self, n_frames: usize) -> Result<()> {
        if self.patch_radius == 0 {
            return Err(Error::InvalidParameter("patch radius must be >= 1".into()));
        }
        if 2 * self.patch_radius + 1 > n_frames {
            return Err(Error::SequenceTooShort {
                min: 2 * self.patch_radius + 1,
                got: n_frames,
            });
        }
        if let Bandwidth::Fixed(h) = self.bandwidth {
            if h <= 0.0 || !h.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "bandwidth must be positive and finite, got {h}"
                )));
            }
        }
        Ok(())
    }
}

/// Row-stochastic K x K self-similarity matrix.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    values: Vec<f64>,
    n_frames: usize,
    params: NonlocalParams,
    calibrated_h: f64,
}

impl SimilarityMatrix {
    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.n_frames + j]
    }

    /// Similarity row of frame `k`.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.n_frames..(k + 1) * self.n_frames]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_frames)
    }

    pub fn params(&self) -> &NonlocalParams {
        &self.params
    }

    /// The bandwidth actually used (the calibrated value under
    /// [`Bandwidth::Auto`], the fixed value otherwise).
    pub fn calibrated_h(&self) -> f64 {
        self.calibrated_h
    }
}

#[inline]
fn clamp_index(i: isize, n_frames: usize) -> usize {
    i.clamp(0, n_frames as isize - 1) as usize
}

/// Temporal patch distance between frames `k` and `j`:
/// the sum over the `2M` neighborhood offsets of the squared Euclidean
/// distance between the corresponding neighbor frames. Out-of-range
/// neighbors are clamped to the nearest valid frame, which keeps the
/// distance symmetric and every neighborhood exactly `2M` wide.
pub fn neighborhood_distance(
    seq: &FeatureSequence,
    k: usize,
    j: usize,
    patch_radius: usize,
) -> Result<f64> {
    let n = seq.n_frames();
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, len: n });
    }
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, len: n });
    }
    Ok(patch_distance(seq, k, j, patch_radius))
}

#[inline]
fn patch_distance(seq: &FeatureSequence, k: usize, j: usize, patch_radius: usize) -> f64 {
    let n = seq.n_frames();
    let m = patch_radius as isize;
    let (ki, ji) = (k as isize, j as isize);
    let mut d = 0.0;
    let mut offset = -m;
    while offset <= m {
        if offset != 0 {
            let a = seq.row(clamp_index(ki + offset, n));
            let b = seq.row(clamp_index(ji + offset, n));
            d += squared_distance(a, b);
        }
        offset += 1;
    }
    d
}

/// Bandwidth from the median heuristic: `h = median(distances) / ln 2`,
/// which makes the median of `exp(-d / h)` exactly 1/2. An even count
/// takes the mean of the two middle values. A zero median (degenerate
/// all-equal-neighborhood input) falls back to `h = 1`.
pub fn calibrate_h(distances: &[f64]) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::EmptyInput("bandwidth calibration needs distances"));
    }
    let mut sorted = distances.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    if median == 0.0 {
        return Ok(1.0);
    }
    Ok(median / std::f64::consts::LN_2)
}

/// Build the self-similarity matrix of `seq`:
/// `S(k, j) = exp(-d(k, j) / h) / Z(k)` with `Z(k)` summing the kernel over
/// the row (diagonal included iff `include_self`). Under [`Bandwidth::Auto`]
/// `h` is calibrated from the median patch distance over all ordered
/// couples with `k != j`.
pub fn self_similarity_matrix(
    seq: &FeatureSequence,
    params: &NonlocalParams,
) -> Result<SimilarityMatrix> {
    let n = seq.n_frames();
    params.validate(n)?;

    // d is symmetric; compute the upper triangle once and mirror.
    let mut dist = vec![0.0; n * n];
    for k in 0..n {
        for j in (k + 1)..n {
            let d = patch_distance(seq, k, j, params.patch_radius);
            dist[k * n + j] = d;
            dist[j * n + k] = d;
        }
    }

    let h = match params.bandwidth {
        Bandwidth::Fixed(h) => h,
        Bandwidth::Auto => {
            // All ordered couples (k, j), k != j: every off-diagonal entry.
            let mut couples = Vec::with_capacity(n * (n - 1));
            for k in 0..n {
                for j in 0..n {
                    if j != k {
                        couples.push(dist[k * n + j]);
                    }
                }
            }
            calibrate_h(&couples)?
        }
    };

    let mut values = vec![0.0; n * n];
    for k in 0..n {
        let row_d = &dist[k * n..(k + 1) * n];
        let row_v = &mut values[k * n..(k + 1) * n];
        let mut z = 0.0;
        for j in 0..n {
            if j == k && !params.include_self {
                continue;
            }
            let w = (-row_d[j] / h).exp();
            row_v[j] = w;
            z += w;
        }
        for v in row_v.iter_mut() {
            *v /= z;
        }
    }

    Ok(SimilarityMatrix {
        values,
        n_frames: n,
        params: *params,
        calibrated_h: h,
    })
}

/// Replace each frame by its similarity row: the K x K sequence whose row
/// `k` is `S(k, .)` indexed by absolute time, so all rows share one
/// coordinate system. Rows stay in temporal order and inherit the
/// row-stochastic normalization.
pub fn nonlocal_features(sim: &SimilarityMatrix) -> FeatureSequence {
    let n = sim.n_frames();
    let mut data = Vec::with_capacity(n * n);
    for row in sim.rows() {
        data.extend_from_slice(row);
    }
    FeatureSequence::from_flat(n, n, data).expect("similarity rows are finite and non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(rows: &[&[f64]]) -> FeatureSequence {
        FeatureSequence::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn seq_1d(values: &[f64]) -> FeatureSequence {
        FeatureSequence::from_rows(values.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    /// Brute-force evaluation of the patch distance with explicit loops,
    /// kept independent of the implementation path.
    fn oracle_distance(seq: &FeatureSequence, k: usize, j: usize, m: usize) -> f64 {
        let n = seq.n_frames() as isize;
        let clamp = |i: isize| -> usize { i.max(0).min(n - 1) as usize };
        let mut offsets = Vec::new();
        for o in -(m as isize)..=(m as isize) {
            if o != 0 {
                offsets.push(o);
            }
        }
        let mut total = 0.0;
        for &o in &offsets {
            let a = seq.row(clamp(k as isize + o));
            let b = seq.row(clamp(j as isize + o));
            let mut s = 0.0;
            for i in 0..a.len() {
                s += (a[i] - b[i]) * (a[i] - b[i]);
            }
            total += s;
        }
        total
    }

    /// Brute-force evaluation of the full similarity matrix with nested
    /// loops, used as the oracle for the fast path.
    fn oracle_matrix(seq: &FeatureSequence, params: &NonlocalParams) -> Vec<Vec<f64>> {
        let n = seq.n_frames();
        let h = match params.bandwidth {
            Bandwidth::Fixed(h) => h,
            Bandwidth::Auto => {
                let mut ds = Vec::new();
                for k in 0..n {
                    for j in 0..n {
                        if j != k {
                            ds.push(oracle_distance(seq, k, j, params.patch_radius));
                        }
                    }
                }
                ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let med = if ds.len() % 2 == 1 {
                    ds[ds.len() / 2]
                } else {
                    0.5 * (ds[ds.len() / 2 - 1] + ds[ds.len() / 2])
                };
                if med == 0.0 {
                    1.0
                } else {
                    med / std::f64::consts::LN_2
                }
            }
        };
        let mut out = vec![vec![0.0; n]; n];
        for k in 0..n {
            let mut z = 0.0;
            for j in 0..n {
                if j == k && !params.include_self {
                    continue;
                }
                z += (-oracle_distance(seq, k, j, params.patch_radius) / h).exp();
            }
            for j in 0..n {
                if j == k && !params.include_self {
                    continue;
                }
                out[k][j] = (-oracle_distance(seq, k, j, params.patch_radius) / h).exp() / z;
            }
        }
        out
    }

    #[test]
    fn distance_is_zero_for_constant_sequence() {
        let s = seq_1d(&[2.5; 7]);
        for k in 0..7 {
            for j in 0..7 {
                assert_eq!(neighborhood_distance(&s, k, j, 2).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn distance_hand_example() {
        // u = [0,1,2,3,4,5], M = 1: d(2,4) = |1-3|^2 + |3-5|^2 = 8.
        let s = seq_1d(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let d = neighborhood_distance(&s, 2, 4, 1).unwrap();
        assert_eq!(d, 8.0);
        assert_eq!(d, oracle_distance(&s, 2, 4, 1));
    }

    #[test]
    fn distance_self_is_zero() {
        let s = seq(&[&[1.0, 2.0], &[3.0, -1.0], &[0.5, 0.0], &[2.0, 2.0]]);
        for k in 0..4 {
            assert_eq!(neighborhood_distance(&s, k, k, 1).unwrap(), 0.0);
        }
    }

    #[test]
    fn distance_is_symmetric_with_edge_clamping() {
        let s = seq_1d(&[0.3, -1.0, 2.0, 5.0, 4.0, 0.0, 1.5]);
        for m in 1..=3 {
            for k in 0..7 {
                for j in 0..7 {
                    let dkj = neighborhood_distance(&s, k, j, m).unwrap();
                    let djk = neighborhood_distance(&s, j, k, m).unwrap();
                    assert_eq!(dkj, djk);
                    assert_eq!(dkj, oracle_distance(&s, k, j, m));
                }
            }
        }
    }

    #[test]
    fn distance_rejects_out_of_range() {
        let s = seq_1d(&[1.0, 2.0, 3.0]);
        assert!(neighborhood_distance(&s, 3, 0, 1).is_err());
        assert!(neighborhood_distance(&s, 0, 5, 1).is_err());
    }

    #[test]
    fn calibrate_h_closed_form() {
        // median {1,2,3} = 2, h = 2 / ln 2.
        let h = calibrate_h(&[1.0, 2.0, 3.0]).unwrap();
        assert!((h - 2.885390081777927).abs() < 1e-12);
        assert!(((-2.0 / h).exp() - 0.5).abs() < 1e-12);

        let h1 = calibrate_h(&[4.0]).unwrap();
        assert!((h1 - 5.770780163555854).abs() < 1e-12);
        assert!(((-4.0 / h1).exp() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn calibrate_h_even_count_uses_middle_mean() {
        let h = calibrate_h(&[1.0, 2.0, 4.0, 10.0]).unwrap();
        assert!(((-3.0 / h).exp() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn calibrate_h_degenerate_and_empty() {
        assert_eq!(calibrate_h(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!(calibrate_h(&[]).is_err());
    }

    #[test]
    fn constant_sequence_gives_uniform_matrix() {
        let s = seq_1d(&[1.0, 1.0, 1.0, 1.0]);
        let params = NonlocalParams {
            patch_radius: 1,
            ..NonlocalParams::default()
        };
        let sim = self_similarity_matrix(&s, &params).unwrap();
        assert_eq!(sim.calibrated_h(), 1.0);
        for k in 0..4 {
            for j in 0..4 {
                assert!((sim.get(k, j) - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rows_sum_to_one() {
        let s = seq(&[
            &[1.0, 0.0],
            &[0.9, 0.2],
            &[5.0, 4.0],
            &[4.8, 4.1],
            &[1.1, 0.1],
            &[0.0, 0.0],
            &[5.2, 3.9],
        ]);
        for include_self in [true, false] {
            let params = NonlocalParams {
                patch_radius: 1,
                bandwidth: Bandwidth::Auto,
                include_self,
            };
            let sim = self_similarity_matrix(&s, &params).unwrap();
            for k in 0..7 {
                let sum: f64 = sim.row(k).iter().sum();
                assert!((sum - 1.0).abs() < 1e-9);
            }
            if !include_self {
                for k in 0..7 {
                    assert_eq!(sim.get(k, k), 0.0);
                }
            }
        }
    }

    #[test]
    fn matches_brute_force_oracle_on_seeded_sequence() {
        let mut rng = crate::pipeline::rng::Rng64::new(42);
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..3).map(|_| rng.normal()).collect())
            .collect();
        let s = FeatureSequence::from_rows(rows).unwrap();
        let params = NonlocalParams::default();
        let sim = self_similarity_matrix(&s, &params).unwrap();
        let oracle = oracle_matrix(&s, &params);
        for k in 0..12 {
            for j in 0..12 {
                assert!(
                    (sim.get(k, j) - oracle[k][j]).abs() < 1e-9,
                    "mismatch at ({k}, {j})"
                );
            }
        }
    }

    #[test]
    fn fixed_bandwidth_is_used_verbatim() {
        let s = seq_1d(&[0.0, 1.0, 0.0, 1.0, 0.0]);
        let params = NonlocalParams {
            patch_radius: 1,
            bandwidth: Bandwidth::Fixed(3.0),
            include_self: true,
        };
        let sim = self_similarity_matrix(&s, &params).unwrap();
        assert_eq!(sim.calibrated_h(), 3.0);
        let oracle = oracle_matrix(&s, &params);
        for k in 0..5 {
            for j in 0..5 {
                assert!((sim.get(k, j) - oracle[k][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn closer_patches_score_higher_within_a_row() {
        let s = seq_1d(&[0.0, 0.1, 0.2, 3.0, 3.1, 3.2, 9.0, 9.1]);
        let sim = self_similarity_matrix(
            &s,
            &NonlocalParams {
                patch_radius: 1,
                ..NonlocalParams::default()
            },
        )
        .unwrap();
        for k in 0..8 {
            for a in 0..8 {
                for b in 0..8 {
                    let da = neighborhood_distance(&s, k, a, 1).unwrap();
                    let db = neighborhood_distance(&s, k, b, 1).unwrap();
                    if da < db {
                        assert!(sim.get(k, a) > sim.get(k, b));
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_sequence_too_short_for_radius() {
        let s = seq_1d(&[1.0, 2.0, 3.0, 4.0]);
        let params = NonlocalParams {
            patch_radius: 2,
            ..NonlocalParams::default()
        };
        assert!(matches!(
            self_similarity_matrix(&s, &params),
            Err(Error::SequenceTooShort { .. })
        ));
        assert!(self_similarity_matrix(
            &s,
            &NonlocalParams {
                patch_radius: 0,
                ..NonlocalParams::default()
            }
        )
        .is_err());
    }

    #[test]
    fn nonlocal_features_are_the_matrix_rows() {
        let s = seq_1d(&[0.0, 0.5, 4.0, 4.5, 0.2, 0.6]);
        let sim = self_similarity_matrix(
            &s,
            &NonlocalParams {
                patch_radius: 1,
                ..NonlocalParams::default()
            },
        )
        .unwrap();
        let nl = nonlocal_features(&sim);
        assert_eq!(nl.n_frames(), 6);
        assert_eq!(nl.n_features(), 6);
        for k in 0..6 {
            assert_eq!(nl.row(k), sim.row(k));
            let sum: f64 = nl.row(k).iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_sequence_has_identical_nonlocal_rows() {
        let s = seq_1d(&[7.0; 5]);
        let sim = self_similarity_matrix(
            &s,
            &NonlocalParams {
                patch_radius: 1,
                ..NonlocalParams::default()
            },
        )
        .unwrap();
        let nl = nonlocal_features(&sim);
        for k in 1..5 {
            assert_eq!(nl.row(k), nl.row(0));
        }
    }
}
