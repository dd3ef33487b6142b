//! Minimal dense linear algebra: LU with partial pivoting (the stationarity
//! systems are dense and nonsymmetric in general) and a full-pivot rank
//! estimate for the classical-contrast demonstration.

use crate::error::{Error, Result};

/// Packed LU factors of a square matrix, with a cheap conditioning
/// indicator (ratio of extreme pivot magnitudes).
#[derive(Debug)]
pub(crate) struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
    pub condition_estimate: f64,
}

/// Factor `a` (row-major, `n x n`) in place. Fails with the condition
/// estimate attached when a pivot falls below round-off scale.
pub(crate) fn lu_factor(mut a: Vec<f64>, n: usize) -> Result<DenseLu> {
    assert_eq!(a.len(), n * n);
    let anorm = a.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let tiny = anorm * n as f64 * f64::EPSILON;
    let mut piv = vec![0usize; n];
    let mut max_d = 0.0f64;
    let mut min_d = f64::INFINITY;

    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for i in (k + 1)..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        piv[k] = p;
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
        }
        let pivot = a[k * n + k];
        max_d = max_d.max(pivot.abs());
        min_d = min_d.min(pivot.abs());
        if pivot.abs() <= tiny {
            return Err(Error::SingularSystem {
                condition_estimate: if min_d > 0.0 {
                    max_d / min_d
                } else {
                    f64::INFINITY
                },
            });
        }
        let inv = 1.0 / pivot;
        // split rows: row k is read-only, rows below are updated
        let (top, bottom) = a.split_at_mut((k + 1) * n);
        let row_k = &top[k * n..k * n + n];
        for (ri, row) in bottom.chunks_exact_mut(n).enumerate() {
            let _ = ri;
            let l = row[k] * inv;
            row[k] = l;
            if l != 0.0 {
                for j in (k + 1)..n {
                    row[j] -= l * row_k[j];
                }
            }
        }
    }

    Ok(DenseLu {
        n,
        lu: a,
        piv,
        condition_estimate: max_d / min_d,
    })
}

impl DenseLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        // factorization swapped full rows, so permute first, then eliminate
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for k in 0..n {
            let bk = b[k];
            if bk != 0.0 {
                for i in (k + 1)..n {
                    b[i] -= self.lu[i * n + k] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in (k + 1)..n {
                acc -= self.lu[k * n + j] * b[j];
            }
            b[k] = acc / self.lu[k * n + k];
        }
    }
}

/// Numerical rank by Gaussian elimination with full pivoting.
pub(crate) fn rank(a: &[f64], rows: usize, cols: usize, rel_tol: f64) -> usize {
    assert_eq!(a.len(), rows * cols);
    let mut m = a.to_vec();
    let scale = m.iter().fold(0.0f64, |mx, &v| mx.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = scale * rel_tol;
    let steps = rows.min(cols);
    let mut row_perm: Vec<usize> = (0..rows).collect();
    let mut col_perm: Vec<usize> = (0..cols).collect();
    for k in 0..steps {
        let mut best = 0.0;
        let (mut pi, mut pj) = (k, k);
        for i in k..rows {
            for j in k..cols {
                let v = m[row_perm[i] * cols + col_perm[j]].abs();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= tol {
            return k;
        }
        row_perm.swap(k, pi);
        col_perm.swap(k, pj);
        let pivot = m[row_perm[k] * cols + col_perm[k]];
        for i in (k + 1)..rows {
            let factor = m[row_perm[i] * cols + col_perm[k]] / pivot;
            if factor != 0.0 {
                for j in k..cols {
                    let idx = row_perm[i] * cols + col_perm[j];
                    m[idx] -= factor * m[row_perm[k] * cols + col_perm[j]];
                }
            }
        }
    }
    steps
}
