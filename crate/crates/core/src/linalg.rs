//! Dense symmetric eigendecomposition via cyclic Jacobi rotations.
//!
//! Self-contained and deterministic: fixed sweep order, no pivot search,
//! so repeated runs on identical input produce identical output bits.
//! Adequate for the covariance/Gram matrices this crate builds (n up to
//! a few hundred). Rotations read rows contiguously and mirror the writes
//! into the columns, which keeps the inner loops cache-friendly.

/// Row-major square matrix of `f64`.
#[derive(Debug, Clone)]
pub(crate) struct SquareMat {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SquareMat {
    pub fn zeros(n: usize) -> Self {
        SquareMat {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SquareMat::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Mutable views of two distinct rows.
    #[inline]
    fn two_rows_mut(&mut self, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
        debug_assert!(p < q);
        let (head, tail) = self.data.split_at_mut(q * self.n);
        (
            &mut head[p * self.n..(p + 1) * self.n],
            &mut tail[..self.n],
        )
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self.get(i, j);
                s += v * v;
            }
        }
        (2.0 * s).sqrt()
    }

    fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a symmetric matrix.
///
/// Returns `(eigenvalues, eigenvectors)` where `eigenvectors` holds one
/// eigenvector per *row*, row `i` paired with `eigenvalues[i]`. Order is
/// unspecified; callers sort. The eigenvector matrix is orthogonal to
/// machine precision since it is a product of plane rotations.
pub(crate) fn sym_eigen(mut a: SquareMat) -> (Vec<f64>, SquareMat) {
    let n = a.n;
    let mut vt = SquareMat::identity(n);
    if n <= 1 {
        return ((0..n).map(|i| a.get(i, i)).collect(), vt);
    }

    let scale = a.frobenius_norm();
    let tol = 1e-14 * scale.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        if a.off_diagonal_norm() <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                // Rotation angle per Golub & Van Loan (8.4).
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Symmetric two-sided update: rows p and q carry all the
                // information, columns are mirrored afterwards.
                {
                    let (row_p, row_q) = a.two_rows_mut(p, q);
                    for k in 0..n {
                        let akp = row_p[k];
                        let akq = row_q[k];
                        row_p[k] = c * akp - s * akq;
                        row_q[k] = s * akp + c * akq;
                    }
                }
                // Closed forms for the 2x2 block; the pivot vanishes by
                // construction.
                a.set(p, p, c * c * app - 2.0 * s * c * apq + s * s * aqq);
                a.set(q, q, s * s * app + 2.0 * s * c * apq + c * c * aqq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..n {
                    if k != p && k != q {
                        let v = a.get(p, k);
                        a.set(k, p, v);
                        let w = a.get(q, k);
                        a.set(k, q, w);
                    }
                }

                // Accumulate the same rotation into the eigenvector rows.
                let (vp, vq) = vt.two_rows_mut(p, q);
                for k in 0..n {
                    let xp = vp[k];
                    let xq = vq[k];
                    vp[k] = c * xp - s * xq;
                    vq[k] = s * xp + c * xq;
                }
            }
        }
    }

    ((0..n).map(|i| a.get(i, i)).collect(), vt)
}
