use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::lanczos::{dense_smallest, lanczos_smallest, LanczosOptions};
use super::DENSE_LIMIT;
use crate::error::{Error, Result};
use crate::net::Partition;
use crate::warped::ActionSpec;

/// Sparse row-stochastic matrix: `rows[R]` lists `(R', fraction of the
/// samples of R that the generator moves into R')`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    pub fn identity(n: usize) -> Self {
        TransitionMatrix {
            rows: (0..n).map(|i| vec![(i, 1.0)]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(&self.rows) {
            *yi = row.iter().map(|&(j, a)| a * x[j]).sum();
        }
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                y[j] += a * x[i];
            }
        }
    }
}

/// Sampled transition matrices of each generator on the partition regions.
pub fn transition_matrices(action: &ActionSpec, partition: &Partition) -> Vec<TransitionMatrix> {
    let n = partition.len();
    (0..action.gens.len())
        .map(|s| {
            let mut counts: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); n];
            for i in 0..partition.n_samples {
                let from = partition.sample_region(i);
                let to = partition.region_of(&action.apply_generator(s, partition.sample(i)));
                *counts[from].entry(to).or_insert(0) += 1;
            }
            TransitionMatrix {
                rows: counts
                    .into_iter()
                    .enumerate()
                    .map(|(r, row)| {
                        let total = partition.sample_counts[r] as f64;
                        row.into_iter().map(|(j, c)| (j, c as f64 / total)).collect()
                    })
                    .collect(),
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct GapReport {
    /// Square root of the smallest eigenvalue of the averaged form on
    /// zero-mean functions: an avg-form lower bound for the max-form gap.
    pub epsilon_avg: f64,
    pub label: &'static str,
    /// `epsilon_avg` never exceeds the max-over-generators constant.
    pub bounds_max_form: bool,
    pub regions: usize,
    pub n_samples: usize,
    pub generators: Vec<String>,
}

pub const GAP_LABEL: &str = "avg-form lower bound";

/// Averaged spectral gap of the action on a partition.
pub fn action_gap(action: &ActionSpec, partition: &Partition) -> Result<GapReport> {
    let mats = transition_matrices(action, partition);
    let eps = averaged_gap(&mats, &partition.measures)?;
    Ok(GapReport {
        epsilon_avg: eps,
        label: GAP_LABEL,
        bounds_max_form: true,
        regions: partition.len(),
        n_samples: partition.n_samples,
        generators: action.gens.labels(),
    })
}

/// `sqrt(min f^T B f / f^T W f)` over `f ≠ 0` with `Σ w_i f_i = 0`, where
/// `B = (1/|S|) Σ_s (I − A_s)^T W (I − A_s)` and `W = diag(measures)`.
pub fn averaged_gap(mats: &[TransitionMatrix], measures: &[f64]) -> Result<f64> {
    let n = measures.len();
    if let Some(region) = measures.iter().position(|&m| !(m > 0.0)) {
        return Err(Error::EmptyRegion { region });
    }
    if n < 2 {
        return Err(Error::Input("a single region carries no zero-mean functions".into()));
    }
    if mats.is_empty() {
        return Ok(0.0);
    }
    if mats.iter().any(|m| m.len() != n) {
        return Err(Error::Input("transition matrix size differs from the region count".into()));
    }
    let sqrt_w: Vec<f64> = measures.iter().map(|&m| libm::sqrt(m)).collect();
    let total: f64 = measures.iter().sum();
    let u: Vec<f64> = sqrt_w.iter().map(|s| s / libm::sqrt(total)).collect();
    let inv = 1.0 / mats.len() as f64;

    // g ↦ W^{-1/2} B W^{-1/2} g, a congruent form whose zero-mean subspace is u^⊥.
    let op = |g: &[f64], y: &mut [f64]| {
        let f: Vec<f64> = g.iter().zip(&sqrt_w).map(|(a, s)| a / s).collect();
        let mut af = vec![0.0; n];
        let mut back = vec![0.0; n];
        y.iter_mut().for_each(|v| *v = 0.0);
        for m in mats {
            m.apply(&f, &mut af);
            let d: Vec<f64> = (0..n).map(|i| measures[i] * (f[i] - af[i])).collect();
            m.apply_transpose(&d, &mut back);
            for i in 0..n {
                y[i] += inv * (d[i] - back[i]);
            }
        }
        for i in 0..n {
            y[i] /= sqrt_w[i];
        }
    };

    let lambda = if n <= DENSE_LIMIT {
        let mut dense = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            op(&e, &mut col);
            for i in 0..n {
                dense[i * n + j] = col[i];
            }
        }
        // Symmetrize, project onto u^⊥ and lift the mean direction above the spectrum.
        for i in 0..n {
            for j in 0..i {
                let a = 0.5 * (dense[i * n + j] + dense[j * n + i]);
                dense[i * n + j] = a;
                dense[j * n + i] = a;
            }
        }
        let trace: f64 = (0..n).map(|i| dense[i * n + i]).sum();
        let mu: Vec<f64> = (0..n).map(|i| (0..n).map(|j| dense[i * n + j] * u[j]).sum()).collect();
        let umu: f64 = u.iter().zip(&mu).map(|(a, b)| a * b).sum();
        let lift = trace + 1.0;
        for i in 0..n {
            for j in 0..n {
                dense[i * n + j] += -u[i] * mu[j] - mu[i] * u[j] + (umu + lift) * u[i] * u[j];
            }
        }
        dense_smallest(n, &dense, 1).values[0]
    } else {
        lanczos_smallest(n, op, &[u], 1, &LanczosOptions::default())?.values[0]
    };
    Ok(libm::sqrt(lambda.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn shift(n: usize, k: usize) -> TransitionMatrix {
        TransitionMatrix {
            rows: (0..n).map(|i| vec![((i + k) % n, 1.0)]).collect(),
        }
    }

    #[test]
    fn cyclic_shift_gap() {
        for n in [3usize, 4, 7, 12] {
            let w = vec![1.0 / n as f64; n];
            let eps = averaged_gap(&[shift(n, 1), shift(n, n - 1)], &w).unwrap();
            assert!((eps - 2.0 * libm::sin(PI / n as f64)).abs() < 1e-9, "{n}: {eps}");
        }
    }

    #[test]
    fn identity_gives_zero() {
        let w = vec![0.25; 4];
        assert_eq!(averaged_gap(&[TransitionMatrix::identity(4)], &w).unwrap(), 0.0);
        assert_eq!(averaged_gap(&[], &w).unwrap(), 0.0);
        assert!(averaged_gap(&[TransitionMatrix::identity(1)], &[1.0]).is_err());
        assert!(matches!(
            averaged_gap(&[TransitionMatrix::identity(2)], &[1.0, 0.0]),
            Err(Error::EmptyRegion { region: 1 })
        ));
    }
}
