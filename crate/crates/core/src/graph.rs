//! Approximating graphs of an action on a partition, and their statistics.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::net::Partition;
use crate::warped::ActionSpec;

/// Where an approximating graph came from.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub regions: usize,
    pub n_samples: usize,
    pub sample_seed: u64,
    pub net_seed: u64,
    pub q: f64,
    pub mesh: f64,
    pub generators: Vec<String>,
    pub t: Option<f64>,
    pub threshold: usize,
}

/// A simple undirected graph. Each edge `(u, v)` has `u < v` and carries the
/// number of samples witnessing it (0 for graphs not built from samples).
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxGraph {
    vertex_count: usize,
    edges: BTreeMap<(u32, u32), usize>,
    pub provenance: Provenance,
}

impl ApproxGraph {
    pub fn new(vertex_count: usize) -> Self {
        ApproxGraph {
            vertex_count,
            edges: BTreeMap::new(),
            provenance: Provenance::default(),
        }
    }

    /// Graph with the given edges; self-loops are dropped and duplicates merged.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = ApproxGraph::new(vertex_count);
        for &(u, v) in edges {
            g.add_edge(u, v, 0)?;
        }
        Ok(g)
    }

    /// Adds `count` witnesses to the edge `{u, v}`; a self-loop is ignored.
    pub fn add_edge(&mut self, u: usize, v: usize, count: usize) -> Result<()> {
        if u >= self.vertex_count || v >= self.vertex_count {
            return Err(Error::Input(format!(
                "edge ({u}, {v}) out of range for {} vertices",
                self.vertex_count
            )));
        }
        if u != v {
            let key = if u < v { (u as u32, v as u32) } else { (v as u32, u as u32) };
            *self.edges.entry(key).or_insert(0) += count;
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = if u < v { (u as u32, v as u32) } else { (v as u32, u as u32) };
        self.edges.contains_key(&key)
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.keys().map(|&(u, v)| (u as usize, v as usize))
    }

    /// Edges with their witness counts, in lexicographic order.
    pub fn edges_with_counts(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.edges.iter().map(|(&(u, v), &c)| (u as usize, v as usize, c))
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.vertex_count];
        for (u, v) in self.edges() {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    /// Sorted adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (u, v) in self.edges() {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Compressed adjacency: `(offsets, targets)`.
    pub fn csr(&self) -> (Vec<usize>, Vec<u32>) {
        let deg = self.degrees();
        let mut offsets = vec![0; self.vertex_count + 1];
        for i in 0..self.vertex_count {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[self.vertex_count]];
        for (u, v) in self.edges() {
            targets[fill[u]] = v as u32;
            fill[u] += 1;
            targets[fill[v]] = u as u32;
            fill[v] += 1;
        }
        (offsets, targets)
    }

    /// Component label of each vertex, numbered in order of first vertex.
    pub fn components(&self) -> Vec<usize> {
        let (off, tgt) = self.csr();
        let mut label = vec![usize::MAX; self.vertex_count];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..self.vertex_count {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in &tgt[off[u]..off[u + 1]] {
                    let v = v as usize;
                    if label[v] == usize::MAX {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count > 0 && self.components().iter().all(|&c| c == 0)
    }

    /// The same graph keeping only edges with at least `k` witnesses.
    pub fn thresholded(&self, k: usize) -> Self {
        let mut g = self.clone();
        g.edges.retain(|_, c| *c >= k);
        g.provenance.threshold = k;
        g
    }
}

/// The approximating graph: regions are vertices, and `{R, R'}` is an edge
/// when at least `threshold` retained samples `x ∈ R` have `s·x ∈ R'` for
/// some generator `s`.
pub fn approx_graph(action: &ActionSpec, partition: &Partition, threshold: usize) -> Result<ApproxGraph> {
    if partition.net.model != action.model {
        return Err(Error::Input(format!(
            "partition lives on {} but the action is on {}",
            partition.net.model, action.model
        )));
    }
    let mut g = ApproxGraph::new(partition.len());
    let mut counts: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    let mut hits: Vec<(u32, u32)> = Vec::new();
    for i in 0..partition.n_samples {
        let x = partition.sample(i);
        let from = partition.sample_region(i);
        for s in 0..action.gens.len() {
            let to = partition.region_of(&action.apply_generator(s, x));
            if to != from {
                hits.push(if from < to { (from as u32, to as u32) } else { (to as u32, from as u32) });
            }
        }
    }
    hits.sort_unstable();
    for h in hits {
        *counts.entry(h).or_insert(0) += 1;
    }
    counts.retain(|_, c| *c >= threshold.max(1));
    g.edges = counts;
    g.provenance = Provenance {
        regions: partition.len(),
        n_samples: partition.n_samples,
        sample_seed: partition.seed,
        net_seed: partition.net.seed,
        q: partition.q,
        mesh: partition.mesh,
        generators: action.gens.labels(),
        t: None,
        threshold: threshold.max(1),
    };
    Ok(g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub max_degree: usize,
    pub min_degree: usize,
    pub mean_degree: f64,
    pub component_count: usize,
    /// Component sizes, largest first.
    pub component_sizes: Vec<usize>,
}

pub fn graph_report(g: &ApproxGraph) -> GraphReport {
    let deg = g.degrees();
    let labels = g.components();
    let ncomp = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0; ncomp];
    for &c in &labels {
        sizes[c] += 1;
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    GraphReport {
        vertex_count: g.vertex_count(),
        edge_count: g.edge_count(),
        max_degree: deg.iter().copied().max().unwrap_or(0),
        min_degree: deg.iter().copied().min().unwrap_or(0),
        mean_degree: if deg.is_empty() {
            0.0
        } else {
            deg.iter().sum::<usize>() as f64 / deg.len() as f64
        },
        component_count: ncomp,
        component_sizes: sizes,
    }
}

/// Small named graphs.
pub mod named {
    use super::*;

    pub fn cycle(n: usize) -> ApproxGraph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        ApproxGraph::from_edges(n, &e).expect("in range")
    }

    pub fn complete(n: usize) -> ApproxGraph {
        let e: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        ApproxGraph::from_edges(n, &e).expect("in range")
    }

    pub fn path(n: usize) -> ApproxGraph {
        let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        ApproxGraph::from_edges(n, &e).expect("in range")
    }
}
