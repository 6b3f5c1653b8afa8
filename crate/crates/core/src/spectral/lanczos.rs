//! Symmetric eigensolvers: dense for small operators, Lanczos with full
//! reorthogonalization for large sparse ones.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Eigenpairs in ascending order of eigenvalue.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = libm::sqrt(dot(v, v));
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// `‖A v − λ v‖` for each pair.
pub fn residuals(op: &impl Fn(&[f64], &mut [f64]), values: &[f64], vectors: &[Vec<f64>]) -> Vec<f64> {
    let mut buf = vec![0.0; vectors.first().map_or(0, |v| v.len())];
    values
        .iter()
        .zip(vectors)
        .map(|(&l, v)| {
            op(v, &mut buf);
            libm::sqrt(buf.iter().zip(v).map(|(a, b)| (a - l * b) * (a - l * b)).sum())
        })
        .collect()
}

/// The `k` smallest eigenpairs of a dense symmetric matrix given row-major.
pub fn dense_smallest(n: usize, entries: &[f64], k: usize) -> Eigenpairs {
    let m = DMatrix::from_row_slice(n, n, entries);
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let k = k.min(n);
    let values: Vec<f64> = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors: Vec<Vec<f64>> = order[..k]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    let op = |x: &[f64], y: &mut [f64]| {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(&entries[i * n..(i + 1) * n], x);
        }
    };
    let residuals = residuals(&op, &values, &vectors);
    Eigenpairs { values, vectors, residuals }
}

/// Number of eigenvalues of the tridiagonal matrix `(a, b)` below `x`.
fn sturm_count(a: &[f64], b: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..a.len() {
        let off = if i == 0 { 0.0 } else { b[i - 1] * b[i - 1] };
        q = a[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (1.0 + x.abs());
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `j`-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix.
fn tridiagonal_eigenvalue(a: &[f64], b: &[f64], j: usize) -> f64 {
    let mut radius = 0.0f64;
    for i in 0..a.len() {
        let r = a[i].abs() + if i > 0 { b[i - 1].abs() } else { 0.0 } + b.get(i).map_or(0.0, |x| x.abs());
        radius = radius.max(r);
    }
    let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(a, b, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Unit eigenvector of the tridiagonal matrix for eigenvalue `lambda`, by
/// inverse iteration with a pivoted LU factorization.
fn tridiagonal_eigenvector(a: &[f64], b: &[f64], lambda: f64, seed: usize) -> Vec<f64> {
    let m = a.len();
    let shift = lambda + 1e-13 * (1.0 + lambda.abs());
    let tiny = 1e-300;
    let mut d: Vec<f64> = a.iter().map(|x| x - shift).collect();
    let mut dl: Vec<f64> = b.to_vec();
    let mut du: Vec<f64> = b.to_vec();
    let mut du2 = vec![0.0; m.saturating_sub(2)];
    let mut swapped = vec![false; m.saturating_sub(1)];
    for i in 0..m.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let f = dl[i] / d[i];
            dl[i] = f;
            d[i + 1] -= f * du[i];
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = f;
            let tmp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = tmp - f * d[i + 1];
            if i + 2 < m {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            swapped[i] = true;
        }
    }
    if d[m - 1] == 0.0 {
        d[m - 1] = tiny;
    }
    let mut z: Vec<f64> = (0..m).map(|i| 1.0 + ((i * 7 + seed * 13) % 11) as f64 * 0.01).collect();
    for _ in 0..3 {
        for i in 0..m.saturating_sub(1) {
            if swapped[i] {
                let tmp = z[i];
                z[i] = z[i + 1];
                z[i + 1] = tmp - dl[i] * z[i];
            } else {
                z[i + 1] -= dl[i] * z[i];
            }
        }
        for i in (0..m).rev() {
            let mut s = z[i];
            if i + 1 < m {
                s -= du[i] * z[i + 1];
            }
            if i + 2 < m {
                s -= du2[i] * z[i + 2];
            }
            z[i] = s / d[i];
        }
        normalize(&mut z);
    }
    z
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub tol: f64,
    pub max_dim: usize,
    pub check_every: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: 1e-8,
            max_dim: 1500,
            check_every: 10,
            seed: 0x5eed,
        }
    }
}

/// The `k` smallest eigenpairs of a symmetric operator on the orthogonal
/// complement of the orthonormal vectors `deflate`.
///
/// A Ritz pair counts as converged when its residual bound `|β_m z_m|` is at
/// most `tol`. The returned residuals are recomputed from the operator.
pub fn lanczos_smallest(
    n: usize,
    op: impl Fn(&[f64], &mut [f64]),
    deflate: &[Vec<f64>],
    k: usize,
    opts: &LanczosOptions,
) -> Result<Eigenpairs> {
    let avail = n.saturating_sub(deflate.len());
    let k = k.min(avail);
    if k == 0 {
        return Ok(Eigenpairs {
            values: Vec::new(),
            vectors: Vec::new(),
            residuals: Vec::new(),
        });
    }
    let project = |v: &mut [f64]| {
        for d in deflate {
            let c = dot(v, d);
            axpy(-c, d, v);
        }
    };
    let mut state = opts.seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut q: Vec<f64> = (0..n)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
        .collect();
    project(&mut q);
    normalize(&mut q);

    let max_dim = opts.max_dim.min(avail).max(k);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_dim);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    loop {
        op(&q, &mut w);
        let a = dot(&w, &q);
        axpy(-a, &q, &mut w);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            axpy(-b, prev, &mut w);
        }
        basis.push(q.clone());
        alpha.push(a);
        // Full reorthogonalization, twice.
        for _ in 0..2 {
            project(&mut w);
            for v in &basis {
                let c = dot(&w, v);
                axpy(-c, v, &mut w);
            }
        }
        let b = libm::sqrt(dot(&w, &w));
        let m = basis.len();
        let invariant = b <= 1e-12 * (1.0 + a.abs());
        let full = m >= max_dim;
        if m >= k && (m % opts.check_every == 0 || invariant || full) {
            let values: Vec<f64> = (0..k).map(|j| tridiagonal_eigenvalue(&alpha, &beta, j)).collect();
            let zs: Vec<Vec<f64>> = values
                .iter()
                .enumerate()
                .map(|(j, &l)| tridiagonal_eigenvector(&alpha, &beta, l, j))
                .collect();
            let bounds: Vec<f64> = zs.iter().map(|z| (b * z[m - 1]).abs()).collect();
            let converged = invariant || bounds.iter().all(|&r| r <= opts.tol);
            if converged || full {
                let mut vectors: Vec<Vec<f64>> = zs
                    .iter()
                    .map(|z| {
                        let mut v = vec![0.0; n];
                        for (zi, bi) in z.iter().zip(&basis) {
                            axpy(*zi, bi, &mut v);
                        }
                        normalize(&mut v);
                        v
                    })
                    .collect();
                for v in &mut vectors {
                    project(v);
                    normalize(v);
                }
                let residuals = residuals(&op, &values, &vectors);
                if !converged {
                    return Err(Error::NotConverged {
                        iterations: m,
                        residuals: bounds,
                    });
                }
                return Ok(Eigenpairs {
                    values,
                    vectors,
                    residuals,
                });
            }
        }
        beta.push(b);
        q.copy_from_slice(&w);
        q.iter_mut().for_each(|x| *x /= b);
    }
}
