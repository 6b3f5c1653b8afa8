//! Normalized Laplacian spectra, Cheeger constants, the averaged spectral gap
//! of an action, and the obstruction certificate.

mod certificate;
mod cheeger;
mod gap;
pub mod lanczos;

pub use certificate::{embedding_obstruction, Control, ControlFunctions, ObstructionCertificate, Verdict};
pub use cheeger::{
    cheeger_bounds, cheeger_bounds_from, cheeger_exact, conductance_exact, edge_boundary, CheegerReport, CHEEGER_EXACT_LIMIT,
};
pub use gap::{action_gap, averaged_gap, transition_matrices, GapReport, TransitionMatrix, GAP_LABEL};

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::graph::ApproxGraph;
use lanczos::{dense_smallest, lanczos_smallest, Eigenpairs, LanczosOptions};

/// Largest operator handled by the dense solver.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    Dense,
    Iterative,
}

impl Solver {
    pub fn name(&self) -> &'static str {
        match self {
            Solver::Dense => "dense",
            Solver::Iterative => "iterative",
        }
    }
}

/// The `k` smallest eigenvalues of `I − D^{-1/2} A D^{-1/2}` with unit
/// eigenvectors. Isolated vertices contribute a zero row and column.
#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub solver: Solver,
    pub connected: bool,
}

impl SpectrumReport {
    /// `λ₂`, zero for disconnected graphs.
    pub fn lambda2(&self) -> f64 {
        if !self.connected {
            return 0.0;
        }
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }
}

/// Applies the normalized Laplacian.
fn laplacian_op<'a>(off: &'a [usize], tgt: &'a [u32], inv_sqrt_deg: &'a [f64]) -> impl Fn(&[f64], &mut [f64]) + 'a {
    move |x: &[f64], y: &mut [f64]| {
        for u in 0..inv_sqrt_deg.len() {
            let du = inv_sqrt_deg[u];
            if du == 0.0 {
                y[u] = 0.0;
                continue;
            }
            let mut s = 0.0;
            for &v in &tgt[off[u]..off[u + 1]] {
                s += inv_sqrt_deg[v as usize] * x[v as usize];
            }
            y[u] = x[u] - du * s;
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    /// Graphs with at most this many vertices use the dense solver.
    pub dense_limit: usize,
    pub lanczos: LanczosOptions,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            dense_limit: DENSE_LIMIT,
            lanczos: LanczosOptions::default(),
        }
    }
}

pub fn laplacian_spectrum(g: &ApproxGraph, k: usize) -> Result<SpectrumReport> {
    laplacian_spectrum_with(g, k, &SpectrumOptions::default())
}

pub fn laplacian_spectrum_with(g: &ApproxGraph, k: usize, opts: &SpectrumOptions) -> Result<SpectrumReport> {
    let n = g.vertex_count();
    let k = k.min(n);
    let (off, tgt) = g.csr();
    let deg: Vec<usize> = (0..n).map(|u| off[u + 1] - off[u]).collect();
    let inv_sqrt: Vec<f64> = deg
        .iter()
        .map(|&d| if d == 0 { 0.0 } else { 1.0 / libm::sqrt(d as f64) })
        .collect();
    let labels = g.components();
    let ncomp = labels.iter().copied().max().map_or(0, |m| m + 1);
    let connected = ncomp == 1;
    let op = laplacian_op(&off, &tgt, &inv_sqrt);

    if n <= opts.dense_limit {
        let mut m = vec![0.0; n * n];
        for u in 0..n {
            if deg[u] > 0 {
                m[u * n + u] = 1.0;
            }
            for &v in &tgt[off[u]..off[u + 1]] {
                m[u * n + v as usize] = -inv_sqrt[u] * inv_sqrt[v as usize];
            }
        }
        let Eigenpairs {
            values,
            vectors,
            residuals,
        } = dense_smallest(n, &m, k);
        return Ok(SpectrumReport {
            eigenvalues: values,
            eigenvectors: vectors,
            residuals,
            solver: Solver::Dense,
            connected,
        });
    }

    // The kernel is known exactly: D^{1/2}·1 on each component.
    let mut kernel: Vec<Vec<f64>> = vec![vec![0.0; n]; ncomp];
    for u in 0..n {
        kernel[labels[u]][u] = if deg[u] == 0 { 1.0 } else { libm::sqrt(deg[u] as f64) };
    }
    for v in &mut kernel {
        let s = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        v.iter_mut().for_each(|x| *x /= s);
    }
    let nk = kernel.len().min(k);
    let rest = lanczos_smallest(n, &op, &kernel, k - nk, &opts.lanczos)?;
    let mut eigenvalues = vec![0.0; nk];
    let mut eigenvectors: Vec<Vec<f64>> = kernel[..nk].to_vec();
    let mut residuals = lanczos::residuals(&op, &eigenvalues, &eigenvectors);
    eigenvalues.extend(rest.values);
    eigenvectors.extend(rest.vectors);
    residuals.extend(rest.residuals);
    Ok(SpectrumReport {
        eigenvalues,
        eigenvectors,
        residuals,
        solver: Solver::Iterative,
        connected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;

    #[test]
    fn small_closed_forms() {
        let s = laplacian_spectrum(&cycle(4), 4).unwrap();
        for (a, b) in s.eigenvalues.iter().zip([0.0, 1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((s.lambda2() - 1.0).abs() < 1e-10);
        assert!((laplacian_spectrum(&complete(4), 2).unwrap().lambda2() - 4.0 / 3.0).abs() < 1e-10);
        let two = ApproxGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let s = laplacian_spectrum(&two, 3).unwrap();
        assert!(!s.connected);
        assert!(s.eigenvalues[1].abs() < 1e-10);
        assert_eq!(s.lambda2(), 0.0);
    }

    fn iterative() -> SpectrumOptions {
        SpectrumOptions {
            dense_limit: 0,
            ..SpectrumOptions::default()
        }
    }

    #[test]
    fn iterative_matches_closed_form_on_a_path() {
        let n = 120;
        let s = laplacian_spectrum_with(&path(n), 4, &iterative()).unwrap();
        assert_eq!(s.solver, Solver::Iterative);
        let exact = |j: usize| 1.0 - libm::cos(core::f64::consts::PI * j as f64 / (n - 1) as f64);
        for j in 0..4 {
            assert!((s.eigenvalues[j] - exact(j)).abs() < 1e-8, "{j}: {}", s.eigenvalues[j]);
        }
    }

    #[test]
    fn iterative_matches_dense_on_a_random_graph() {
        use rand::{Rng, SeedableRng};
        let n = 600;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        for _ in 0..2 * n {
            edges.push((rng.random_range(0..n), rng.random_range(0..n)));
        }
        let g = ApproxGraph::from_edges(n, &edges).unwrap();
        let d = laplacian_spectrum(&g, 5).unwrap();
        let i = laplacian_spectrum_with(&g, 5, &iterative()).unwrap();
        assert_eq!(d.solver, Solver::Dense);
        for j in 0..5 {
            assert!((d.eigenvalues[j] - i.eigenvalues[j]).abs() < 1e-8, "{j}");
            assert!(i.residuals[j] < 1e-6);
        }
    }

    #[test]
    fn iterative_handles_disconnected_graphs() {
        let n = 210;
        let mut edges: Vec<(usize, usize)> = (0..100).map(|i| (i, (i + 1) % 100)).collect();
        edges.extend((100..n - 1).map(|i| (i, i + 1)));
        let g = ApproxGraph::from_edges(n + 1, &edges).unwrap();
        let s = laplacian_spectrum_with(&g, 4, &iterative()).unwrap();
        assert!(!s.connected);
        assert_eq!(&s.eigenvalues[..3], &[0.0, 0.0, 0.0]);
        assert!(s.eigenvalues[3] > 0.0);
        let d = laplacian_spectrum(&g, 4).unwrap();
        assert!((d.eigenvalues[3] - s.eigenvalues[3]).abs() < 1e-8);
    }
}
