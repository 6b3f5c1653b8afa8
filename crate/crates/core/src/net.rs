//! Separated nets, their Voronoi partitions, and intermediate nets.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::manifold::{HaarSampler, ManifoldModel, Point};
use crate::spatial::SpatialIndex;

/// Slack used when comparing distances against separation radii.
pub const DIST_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct NetOptions {
    /// Candidate pool size as a multiple of the expected net size.
    pub pool_factor: f64,
    pub min_pool: usize,
}

impl Default for NetOptions {
    fn default() -> Self {
        NetOptions {
            pool_factor: 50.0,
            min_pool: 200,
        }
    }
}

/// An `r`-separated subset of a model manifold, produced by farthest-point
/// insertion over a candidate pool.
///
/// Points are stored in insertion order. `insertion_radii[k]` is the distance
/// from point `k` to the points before it (infinite for the first), a
/// non-increasing sequence; every prefix of length `k + 1` is therefore
/// `insertion_radii[k]`-separated.
#[derive(Clone, Debug)]
pub struct Net {
    pub model: ManifoldModel,
    pub points: Vec<Point>,
    pub separation: f64,
    pub density_radius: f64,
    pub seed: u64,
    pub pool_size: usize,
    pub insertion_radii: Vec<f64>,
    /// Largest distance from a pool candidate to the net when insertion stopped.
    pub fill_radius: f64,
    /// Set when `r` was at least the diameter and the net collapsed to one point.
    pub degenerate: bool,
}

impl Net {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Flattened coordinates.
    pub fn coords(&self) -> Vec<f64> {
        self.points.iter().flat_map(|p| p.0.iter().copied()).collect()
    }

    pub fn index(&self) -> SpatialIndex {
        SpatialIndex::from_points(self.model, &self.points, self.separation.min(self.model.diameter()))
    }

    /// Smallest pairwise distance, by exhaustive comparison.
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in 0..i {
                best = best.min(self.model.dist(&self.points[i].0, &self.points[j].0));
            }
        }
        best
    }
}

/// Net size predicted by the volume upper bound `1 / v_M(r/2)`.
pub fn expected_net_size(model: &ManifoldModel, r: f64) -> usize {
    let v = model.ball_volume(r / 2.0);
    if v <= 0.0 {
        usize::MAX
    } else {
        libm::ceil(1.0 / v) as usize
    }
}

/// The candidate pool used by [`build_net`]: a rotated regular grid on the
/// circle and on the torus, Haar samples elsewhere.
pub fn candidate_pool(model: &ManifoldModel, r: f64, seed: u64, opts: &NetOptions) -> Vec<Point> {
    let expected = expected_net_size(model, r.min(model.diameter())).max(1) as f64;
    let n = ((opts.pool_factor * expected) as usize).max(opts.min_pool);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    match *model {
        ManifoldModel::Sphere(2) => {
            let n = n.next_multiple_of(4);
            let offset = rng.random::<f64>() * 2.0 * PI;
            (0..n)
                .map(|k| {
                    let a = offset + 2.0 * PI * k as f64 / n as f64;
                    Point(vec![libm::cos(a), libm::sin(a)])
                })
                .collect()
        }
        ManifoldModel::Torus(d) => {
            let side = (libm::ceil(libm::pow(n as f64, 1.0 / d as f64)) as usize).next_multiple_of(4);
            let offsets: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 * PI / side as f64).collect();
            let total = side.pow(d as u32);
            (0..total)
                .map(|mut k| {
                    Point(
                        (0..d)
                            .map(|i| {
                                let c = k % side;
                                k /= side;
                                offsets[i] + 2.0 * PI * c as f64 / side as f64
                            })
                            .collect(),
                    )
                })
                .collect()
        }
        _ => {
            let mut s = HaarSampler::new(*model, seed);
            (0..n).map(|_| s.sample()).collect()
        }
    }
}

/// Greedy farthest-point insertion over `pool`, starting from `seeds`, until
/// no candidate is at distance `>= r` from the net.
fn farthest_point_insertion(model: &ManifoldModel, pool: &[Point], seeds: &[Point], r: f64, seed: u64) -> Net {
    let n = pool.len();
    let index = SpatialIndex::from_points(*model, pool, r.min(model.diameter()));
    let mut dist = vec![f64::INFINITY; n];
    let mut heap: BinaryHeap<(u64, Reverse<u32>)> = BinaryHeap::new();
    let mut points: Vec<Point> = Vec::new();
    let mut radii: Vec<f64> = Vec::new();

    let insert = |p: &[f64], reach: f64, dist: &mut [f64], heap: &mut BinaryHeap<(u64, Reverse<u32>)>| {
        index.within(p, reach, |i, d| {
            if d < dist[i] {
                dist[i] = d;
                heap.push((d.to_bits(), Reverse(i as u32)));
            }
        });
    };

    for s in seeds {
        let reach = points
            .iter()
            .map(|q: &Point| model.dist(&q.0, &s.0))
            .fold(f64::INFINITY, f64::min);
        insert(&s.0, f64::INFINITY, &mut dist, &mut heap);
        radii.push(reach);
        points.push(s.clone());
    }
    if points.is_empty() && n > 0 {
        insert(&pool[0].0, f64::INFINITY, &mut dist, &mut heap);
        radii.push(f64::INFINITY);
        points.push(pool[0].clone());
    }
    let mut fill = 0.0;
    while let Some((bits, Reverse(i))) = heap.pop() {
        let d = f64::from_bits(bits);
        let i = i as usize;
        if d != dist[i] {
            continue;
        }
        if d < r - 1e-12 {
            fill = d;
            break;
        }
        insert(&pool[i].0, d, &mut dist, &mut heap);
        radii.push(d);
        points.push(pool[i].clone());
    }
    Net {
        model: *model,
        points,
        separation: r,
        density_radius: r,
        seed,
        pool_size: n,
        insertion_radii: radii,
        fill_radius: fill,
        degenerate: false,
    }
}

/// Builds an `r`-separated, `r`-dense (up to pool resolution) net.
pub fn build_net(model: &ManifoldModel, r: f64, seed: u64) -> Result<Net> {
    build_net_with(model, r, seed, &NetOptions::default())
}

pub fn build_net_with(model: &ManifoldModel, r: f64, seed: u64, opts: &NetOptions) -> Result<Net> {
    if !(r > 0.0) {
        return Err(Error::Input(format!("net radius must be positive, got {r}")));
    }
    if r >= model.diameter() {
        let pool = candidate_pool(model, model.diameter(), seed, &NetOptions { min_pool: 1, ..opts.clone() });
        return Ok(Net {
            model: *model,
            points: vec![pool[0].clone()],
            separation: r,
            density_radius: model.diameter(),
            seed,
            pool_size: 1,
            insertion_radii: vec![f64::INFINITY],
            fill_radius: model.diameter(),
            degenerate: true,
        });
    }
    let pool = candidate_pool(model, r, seed, opts);
    Ok(farthest_point_insertion(model, &pool, &[], r, seed))
}

/// Extends `coarse` to an `r_fine`-separated net whose first `coarse.len()`
/// points are exactly `coarse`.
pub fn extend_net(coarse: &Net, r_fine: f64, seed: u64, opts: &NetOptions) -> Result<Net> {
    if !(r_fine > 0.0) || r_fine > coarse.separation {
        return Err(Error::Input(format!(
            "fine radius {r_fine} must be positive and at most the coarse radius {}",
            coarse.separation
        )));
    }
    let pool = candidate_pool(&coarse.model, r_fine, seed, opts);
    let mut net = farthest_point_insertion(&coarse.model, &pool, &coarse.points, r_fine, seed);
    net.insertion_radii[..coarse.len()].copy_from_slice(&coarse.insertion_radii);
    Ok(net)
}

/// A net with exactly `target` points, containing `coarse` and contained in
/// `fine`. Points of `fine` outside `coarse` are added in `fine`'s order.
pub fn interpolate_net(coarse: &Net, fine: &Net, target: usize) -> Result<Net> {
    if target < coarse.len() || target > fine.len() {
        return Err(Error::Input(format!(
            "target {target} outside [{}, {}]",
            coarse.len(),
            fine.len()
        )));
    }
    let mut in_coarse = vec![false; fine.len()];
    for p in &coarse.points {
        let k = fine
            .points
            .iter()
            .position(|q| q == p)
            .ok_or_else(|| Error::Input("coarse net is not contained in the fine net".into()))?;
        in_coarse[k] = true;
    }
    if target == coarse.len() {
        return Ok(coarse.clone());
    }
    if target == fine.len() {
        return Ok(fine.clone());
    }
    let mut points = coarse.points.clone();
    let mut radii = coarse.insertion_radii.clone();
    for (k, p) in fine.points.iter().enumerate() {
        if points.len() == target {
            break;
        }
        if !in_coarse[k] {
            points.push(p.clone());
            radii.push(fine.insertion_radii[k]);
        }
    }
    Ok(Net {
        model: fine.model,
        points,
        separation: fine.separation,
        density_radius: coarse.density_radius,
        seed: fine.seed,
        pool_size: fine.pool_size,
        insertion_radii: radii,
        fill_radius: coarse.fill_radius,
        degenerate: false,
    })
}

/// A Voronoi partition of the manifold by a net, with region measures
/// estimated from Haar samples. The samples and their regions are retained.
#[derive(Clone, Debug)]
pub struct Partition {
    pub net: Net,
    pub n_samples: usize,
    pub seed: u64,
    pub sample_counts: Vec<usize>,
    pub measures: Vec<f64>,
    pub mesh: f64,
    /// `max measure / min measure`.
    pub q: f64,
    samples: Vec<f64>,
    regions: Vec<u32>,
    index: SpatialIndex,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measures.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        let s = self.net.model.coord_len();
        &self.samples[i * s..(i + 1) * s]
    }

    pub fn sample_region(&self, i: usize) -> usize {
        self.regions[i] as usize
    }

    /// Region (nearest net point, lowest index on ties) containing `p`.
    pub fn region_of(&self, p: &[f64]) -> usize {
        self.index.nearest(p).map(|(i, _)| i).unwrap_or(0)
    }

    pub fn index(&self) -> &SpatialIndex {
        &self.index
    }
}

/// Assigns `n_samples` Haar samples to their nearest net point.
pub fn voronoi_partition(net: &Net, n_samples: usize, seed: u64) -> Result<Partition> {
    if net.is_empty() {
        return Err(Error::Input("cannot partition by an empty net".into()));
    }
    if n_samples < 100 * net.len() {
        return Err(Error::Input(format!(
            "need at least {} samples for a {}-point net, got {n_samples}",
            100 * net.len(),
            net.len()
        )));
    }
    let model = net.model;
    let index = net.index();
    let stride = model.coord_len();
    let mut sampler = HaarSampler::new(model, seed);
    let mut samples = Vec::with_capacity(n_samples * stride);
    let mut regions = Vec::with_capacity(n_samples);
    let mut counts = vec![0usize; net.len()];
    let mut far = vec![(0.0f64, usize::MAX); net.len()];
    for i in 0..n_samples {
        let p = sampler.sample();
        let (reg, d) = index.nearest(&p.0).expect("nonempty net");
        counts[reg] += 1;
        if d > far[reg].0 || far[reg].1 == usize::MAX {
            far[reg] = (d, i);
        }
        regions.push(reg as u32);
        samples.extend_from_slice(&p.0);
    }
    if let Some(region) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyRegion { region });
    }
    let measures: Vec<f64> = counts.iter().map(|&c| c as f64 / n_samples as f64).collect();
    let max = measures.iter().copied().fold(0.0, f64::max);
    let min = measures.iter().copied().fold(f64::INFINITY, f64::min);

    let mesh = estimate_mesh(&model, &samples, &regions, &far, net.len());
    Ok(Partition {
        net: net.clone(),
        n_samples,
        seed,
        sample_counts: counts,
        measures,
        mesh,
        q: max / min,
        samples,
        regions,
        index,
    })
}

/// Largest region diameter seen among the samples: for each region, a double
/// sweep starting from the sample farthest from the net point.
fn estimate_mesh(model: &ManifoldModel, samples: &[f64], regions: &[u32], far: &[(f64, usize)], nregions: usize) -> f64 {
    let stride = model.coord_len();
    let pt = |i: usize| &samples[i * stride..(i + 1) * stride];
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); nregions];
    for (i, &r) in regions.iter().enumerate() {
        members[r as usize].push(i as u32);
    }
    let mut mesh = 0.0f64;
    for (reg, m) in members.iter().enumerate() {
        let mut a = far[reg].1;
        let mut best = 0.0;
        for _ in 0..3 {
            let (b, d) = m
                .iter()
                .map(|&j| (j as usize, model.dist(pt(a), pt(j as usize))))
                .fold((a, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if d <= best {
                break;
            }
            best = d;
            a = b;
        }
        mesh = mesh.max(best);
    }
    mesh
}
