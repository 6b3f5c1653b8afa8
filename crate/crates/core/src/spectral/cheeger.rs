use alloc::vec;
use alloc::vec::Vec;

use super::{laplacian_spectrum, SpectrumReport};
use crate::error::{Error, Result};
use crate::graph::ApproxGraph;

/// Largest graph accepted by [`cheeger_exact`].
pub const CHEEGER_EXACT_LIMIT: usize = 24;

/// Number of edges leaving `set`.
pub fn edge_boundary(g: &ApproxGraph, set: &[usize]) -> usize {
    let mut inside = vec![false; g.vertex_count()];
    for &v in set {
        inside[v] = true;
    }
    g.edges().filter(|&(u, v)| inside[u] != inside[v]).count()
}

fn adjacency_masks(g: &ApproxGraph) -> Vec<u32> {
    let mut adj = vec![0u32; g.vertex_count()];
    for (u, v) in g.edges() {
        adj[u] |= 1 << v;
        adj[v] |= 1 << u;
    }
    adj
}

/// Walks every subset in Gray-code order, calling `f(mask, size, boundary)`.
fn for_each_subset(g: &ApproxGraph, mut f: impl FnMut(u32, usize, usize)) {
    let n = g.vertex_count();
    let adj = adjacency_masks(g);
    let mut mask = 0u32;
    let mut boundary: i64 = 0;
    for i in 1u64..(1u64 << n) {
        let v = i.trailing_zeros() as usize;
        let inside = (adj[v] & mask).count_ones() as i64;
        let deg = adj[v].count_ones() as i64;
        if mask & (1 << v) == 0 {
            mask |= 1 << v;
            boundary += deg - 2 * inside;
        } else {
            mask &= !(1 << v);
            boundary -= deg - 2 * inside;
        }
        f(mask, mask.count_ones() as usize, boundary as usize);
    }
}

fn mask_to_set(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask & (1 << i) != 0).collect()
}

fn check_size(g: &ApproxGraph) -> Result<()> {
    let n = g.vertex_count();
    if n > CHEEGER_EXACT_LIMIT {
        return Err(Error::TooLarge {
            vertices: n,
            limit: CHEEGER_EXACT_LIMIT,
        });
    }
    if n < 2 {
        return Err(Error::Input("Cheeger constant needs at least two vertices".into()));
    }
    Ok(())
}

/// `h(G) = min |∂A| / |A|` over nonempty `A` with `|A| <= |V|/2`, by
/// enumeration, with a minimizing set (the first in Gray-code order).
pub fn cheeger_exact(g: &ApproxGraph) -> Result<(f64, Vec<usize>)> {
    check_size(g)?;
    let n = g.vertex_count();
    let mut best = (f64::INFINITY, 0u32);
    for_each_subset(g, |mask, size, boundary| {
        if 2 * size <= n {
            let h = boundary as f64 / size as f64;
            if h < best.0 {
                best = (h, mask);
            }
        }
    });
    Ok((best.0, mask_to_set(best.1)))
}

/// Conductance `φ(G) = min |∂A| / vol(A)` over nonempty `A` with
/// `vol(A) <= vol(V)/2`, by enumeration.
pub fn conductance_exact(g: &ApproxGraph) -> Result<(f64, Vec<usize>)> {
    check_size(g)?;
    let deg = g.degrees();
    let total: usize = deg.iter().sum();
    if total == 0 {
        return Err(Error::Input("conductance of an edgeless graph is undefined".into()));
    }
    let mut best = (f64::INFINITY, 0u32);
    for_each_subset(g, |mask, _, boundary| {
        let vol: usize = (0..deg.len()).filter(|&i| mask & (1 << i) != 0).map(|i| deg[i]).sum();
        if vol > 0 && 2 * vol <= total {
            let phi = boundary as f64 / vol as f64;
            if phi < best.0 {
                best = (phi, mask);
            }
        }
    });
    Ok((best.0, mask_to_set(best.1)))
}

#[derive(Clone, Debug)]
pub struct CheegerReport {
    pub lambda2: f64,
    pub h_exact: Option<f64>,
    /// Best sweep cut of the second eigenvector, under `|∂A| / |A|`.
    pub h_upper: f64,
    /// `λ₂ / 2`, via `h >= φ >= λ₂ / 2`.
    pub h_lower: f64,
    /// The smaller side of the best sweep cut.
    pub witness_set: Vec<usize>,
}

/// Cheeger bounds from the spectrum; the exact value is added for graphs
/// with at most `exact_limit` vertices.
pub fn cheeger_bounds(g: &ApproxGraph, exact_limit: usize) -> Result<CheegerReport> {
    let spec = laplacian_spectrum(g, 2)?;
    cheeger_bounds_from(g, &spec, exact_limit)
}

pub fn cheeger_bounds_from(g: &ApproxGraph, spec: &SpectrumReport, exact_limit: usize) -> Result<CheegerReport> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(Error::Input("Cheeger bounds need at least two vertices".into()));
    }
    if !spec.connected {
        return Err(Error::Disconnected);
    }
    let lambda2 = spec.lambda2();
    let deg = g.degrees();
    let fiedler = &spec.eigenvectors[1];
    let score: Vec<f64> = (0..n).map(|u| fiedler[u] / libm::sqrt(deg[u] as f64)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(a.cmp(&b)));

    let adj = g.adjacency();
    let mut inside = vec![false; n];
    let mut boundary: i64 = 0;
    let mut best = (f64::INFINITY, 0usize);
    for (k, &v) in order.iter().enumerate().take(n - 1) {
        let into = adj[v].iter().filter(|&&w| inside[w]).count() as i64;
        boundary += adj[v].len() as i64 - 2 * into;
        inside[v] = true;
        let size = k + 1;
        let h = boundary as f64 / size.min(n - size) as f64;
        if h < best.0 {
            best = (h, size);
        }
    }
    let (h_upper, size) = best;
    let mut witness_set: Vec<usize> = if 2 * size <= n {
        order[..size].to_vec()
    } else {
        order[size..].to_vec()
    };
    witness_set.sort_unstable();
    let h_exact = if n <= exact_limit.min(CHEEGER_EXACT_LIMIT) {
        Some(cheeger_exact(g)?.0)
    } else {
        None
    };
    Ok(CheegerReport {
        lambda2,
        h_exact,
        h_upper,
        h_lower: lambda2 / 2.0,
        witness_set,
    })
}
