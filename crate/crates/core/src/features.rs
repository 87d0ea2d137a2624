//! Feature sequences and the preprocessing applied before segmentation:
//! per-dimension standardization over the whole sequence, and projection
//! onto the main principal components.

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, SquareMat};

/// A time-ordered sequence of `K` frames, each a `P`-dimensional feature
/// vector. Row order is temporal order and is never rearranged.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    data: Vec<f64>,
    n_frames: usize,
    n_features: usize,
}

impl FeatureSequence {
    /// Build a sequence from row vectors. Rejects empty input, ragged rows
    /// and non-finite entries.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("feature sequence has no frames"));
        }
        let n_features = rows[0].len();
        if n_features == 0 {
            return Err(Error::EmptyInput("feature sequence has no columns"));
        }
        let mut data = Vec::with_capacity(rows.len() * n_features);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n_features {
                return Err(Error::RaggedRows {
                    row,
                    got: r.len(),
                    expected: n_features,
                });
            }
            for (col, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
                data.push(v);
            }
        }
        Ok(FeatureSequence {
            data,
            n_frames: rows.len(),
            n_features,
        })
    }

    /// Build a sequence from a flat row-major buffer of `n_frames * n_features`
    /// values.
    pub fn from_flat(n_frames: usize, n_features: usize, data: Vec<f64>) -> Result<Self> {
        if n_frames == 0 || n_features == 0 {
            return Err(Error::EmptyInput("feature sequence must be K >= 1, P >= 1"));
        }
        if data.len() != n_frames * n_features {
            return Err(Error::DimensionMismatch {
                context: "flat buffer length",
                got: data.len(),
                expected: n_frames * n_features,
            });
        }
        for (idx, &v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / n_features,
                    col: idx % n_features,
                });
            }
        }
        Ok(FeatureSequence {
            data,
            n_frames,
            n_features,
        })
    }

    /// Number of frames `K`.
    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    /// Number of feature dimensions `P`.
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Feature vector of frame `k`.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.n_features..(k + 1) * self.n_features]
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.data[k * self.n_features + j]
    }

    /// Iterate over frames in temporal order.
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_features)
    }
}

/// Squared Euclidean distance between two equal-length vectors.
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    s
}

/// Euclidean distance between two equal-length vectors.
pub(crate) fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

// Columns whose population std is below this (relative) threshold are
// treated as constant; they carry no signal and would otherwise blow up
// under division by a rounding-noise std.
const CONSTANT_COLUMN_EPS: f64 = 1e-12;

/// Map every column to zero mean and unit population standard deviation
/// (divide by `K`, not `K - 1`). Constant columns become all zeros.
pub fn standardize(seq: &FeatureSequence) -> FeatureSequence {
    let k = seq.n_frames();
    let p = seq.n_features();
    let kf = k as f64;

    let mut mean = vec![0.0; p];
    for row in seq.rows() {
        for (j, &v) in row.iter().enumerate() {
            mean[j] += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= kf;
    }

    let mut var = vec![0.0; p];
    for row in seq.rows() {
        for (j, &v) in row.iter().enumerate() {
            let d = v - mean[j];
            var[j] += d * d;
        }
    }
    let std: Vec<f64> = var.iter().map(|v| (v / kf).sqrt()).collect();

    let mut out = Vec::with_capacity(k * p);
    for row in seq.rows() {
        for j in 0..p {
            if std[j] <= CONSTANT_COLUMN_EPS * (1.0 + mean[j].abs()) {
                out.push(0.0);
            } else {
                out.push((row[j] - mean[j]) / std[j]);
            }
        }
    }
    FeatureSequence {
        data: out,
        n_frames: k,
        n_features: p,
    }
}

/// A fitted principal-component model.
///
/// `components` has one orthonormal row per retained component (C x P),
/// ordered by decreasing `explained_variance`. `mean` and `scale` are the
/// per-column preprocessing applied before projection; `fit_pca` centers
/// only, so it stores unit scales.
#[derive(Debug, Clone)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    components: Vec<f64>,
    n_components: usize,
    n_features: usize,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Component `c` as a length-P row vector.
    pub fn component(&self, c: usize) -> &[f64] {
        &self.components[c * self.n_features..(c + 1) * self.n_features]
    }
}

/// Fit a PCA model on the rows of `seq`, retaining
/// `C = min(n_components, P, K)` components: the top eigenvectors of the
/// sample covariance (divide by `K - 1`), ordered by decreasing eigenvalue.
///
/// Sign convention: within each component the coordinate of largest
/// absolute value is positive, ties resolved toward the lowest index.
/// When `P > K` the decomposition goes through the `K x K` Gram matrix to
/// avoid the quadratic blowup in the long dimension.
pub fn fit_pca(seq: &FeatureSequence, n_components: usize) -> Result<PcaModel> {
    if n_components == 0 {
        return Err(Error::InvalidParameter(
            "n_components must be at least 1".into(),
        ));
    }
    let k = seq.n_frames();
    let p = seq.n_features();
    if k < 2 {
        return Err(Error::SequenceTooShort { min: 2, got: k });
    }
    let c = n_components.min(p).min(k);

    let kf = k as f64;
    let mut mean = vec![0.0; p];
    for row in seq.rows() {
        for (j, &v) in row.iter().enumerate() {
            mean[j] += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= kf;
    }
    let mut centered = Vec::with_capacity(k * p);
    for row in seq.rows() {
        for j in 0..p {
            centered.push(row[j] - mean[j]);
        }
    }

    let (eigvals, comps) = if p <= k {
        eigen_via_covariance(&centered, k, p, c)
    } else {
        eigen_via_gram(&centered, k, p, c)
    };

    let mut components = comps;
    for ci in 0..c {
        fix_sign(&mut components[ci * p..(ci + 1) * p]);
    }

    Ok(PcaModel {
        mean,
        scale: vec![1.0; p],
        components,
        n_components: c,
        n_features: p,
        explained_variance: eigvals,
    })
}

/// Eigendecomposition of the P x P sample covariance.
fn eigen_via_covariance(centered: &[f64], k: usize, p: usize, c: usize) -> (Vec<f64>, Vec<f64>) {
    let denom = (k - 1) as f64;
    let mut cov = SquareMat::zeros(p);
    for row in centered.chunks_exact(p) {
        for i in 0..p {
            for j in i..p {
                cov.data[i * p + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        for j in i..p {
            let v = cov.data[i * p + j] / denom;
            cov.data[i * p + j] = v;
            cov.data[j * p + i] = v;
        }
    }
    let (vals, vecs) = sym_eigen(cov);
    let order = sort_descending(&vals);

    let mut eigvals = Vec::with_capacity(c);
    let mut comps = vec![0.0; c * p];
    for (ci, &idx) in order.iter().take(c).enumerate() {
        eigvals.push(vals[idx].max(0.0));
        for j in 0..p {
            comps[ci * p + j] = vecs.get(idx, j);
        }
    }
    (eigvals, comps)
}

/// Eigendecomposition through the K x K Gram matrix (for P > K): an
/// eigenvector `v` of `X Xt / (K-1)` with eigenvalue `l > 0` maps to the
/// covariance eigenvector `Xt v / |Xt v|` with the same eigenvalue. Zero
/// eigenvalues (the centered data has rank at most K-1) get deterministic
/// null-space completions so the model always carries C orthonormal rows.
fn eigen_via_gram(centered: &[f64], k: usize, p: usize, c: usize) -> (Vec<f64>, Vec<f64>) {
    let denom = (k - 1) as f64;
    let mut gram = SquareMat::zeros(k);
    for i in 0..k {
        for j in i..k {
            let v = squared_dot(&centered[i * p..(i + 1) * p], &centered[j * p..(j + 1) * p])
                / denom;
            gram.data[i * k + j] = v;
            gram.data[j * k + i] = v;
        }
    }
    let (vals, vecs) = sym_eigen(gram);
    let order = sort_descending(&vals);

    let rank_tol = 1e-12 * vals.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
    let mut eigvals = Vec::with_capacity(c);
    let mut comps: Vec<Vec<f64>> = Vec::with_capacity(c);
    for &idx in order.iter() {
        if comps.len() == c {
            break;
        }
        if vals[idx] <= rank_tol {
            break;
        }
        let mut w = vec![0.0; p];
        for i in 0..k {
            let vi = vecs.get(idx, i);
            for j in 0..p {
                w[j] += vi * centered[i * p + j];
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in w.iter_mut() {
            *x /= norm;
        }
        eigvals.push(vals[idx].max(0.0));
        comps.push(w);
    }
    // Pad rank-deficient cases with unit vectors orthogonalized against
    // what we already have (explained variance exactly zero).
    let mut axis = 0;
    while comps.len() < c && axis < p {
        let mut w = vec![0.0; p];
        w[axis] = 1.0;
        axis += 1;
        for prev in &comps {
            let dot = squared_dot(&w, prev);
            for j in 0..p {
                w[j] -= dot * prev[j];
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        for x in w.iter_mut() {
            *x /= norm;
        }
        eigvals.push(0.0);
        comps.push(w);
    }

    let mut flat = Vec::with_capacity(c * p);
    for w in comps {
        flat.extend_from_slice(&w);
    }
    (eigvals, flat)
}

fn squared_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Indices of `vals` sorted by decreasing value, ties by lower index.
fn sort_descending(vals: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap().then(a.cmp(&b)));
    order
}

fn fix_sign(component: &mut [f64]) {
    let mut best = 0;
    for (j, &v) in component.iter().enumerate() {
        if v.abs() > component[best].abs() {
            best = j;
        }
    }
    if component[best] < 0.0 {
        for v in component.iter_mut() {
            *v = -*v;
        }
    }
}

/// Project each frame onto the model's components:
/// `row_k -> components . ((row_k - mean) / scale)`, yielding a K x C
/// sequence.
pub fn project(seq: &FeatureSequence, model: &PcaModel) -> Result<FeatureSequence> {
    let p = seq.n_features();
    if p != model.n_features {
        return Err(Error::DimensionMismatch {
            context: "projection input columns",
            got: p,
            expected: model.n_features,
        });
    }
    let k = seq.n_frames();
    let c = model.n_components;
    let mut out = Vec::with_capacity(k * c);
    let mut work = vec![0.0; p];
    for row in seq.rows() {
        for j in 0..p {
            work[j] = (row[j] - model.mean[j]) / model.scale[j];
        }
        for ci in 0..c {
            out.push(squared_dot(model.component(ci), &work));
        }
    }
    FeatureSequence::from_flat(k, c, out)
}
