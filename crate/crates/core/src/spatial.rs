//! Uniform-grid range and nearest-neighbour queries on the model manifolds.
//!
//! Points are embedded in Euclidean space (the sphere and quaternion models
//! as they are, the torus through `θ ↦ (cos θ, sin θ)` per angle). In every
//! embedding the chord is at most the geodesic distance, so an embedded
//! query of radius `ρ` sees every point within geodesic distance `ρ`; the
//! candidates are then filtered with the exact metric.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::manifold::{ManifoldModel, Point};

fn embed_into(model: &ManifoldModel, p: &[f64], out: &mut Vec<f64>) {
    match model {
        ManifoldModel::Torus(_) => {
            for &a in p {
                out.push(libm::cos(a));
                out.push(libm::sin(a));
            }
        }
        _ => out.extend_from_slice(p),
    }
}

fn embed_len(model: &ManifoldModel) -> usize {
    match *model {
        ManifoldModel::Torus(d) => 2 * d,
        _ => model.coord_len(),
    }
}

#[derive(Clone, Debug)]
pub struct SpatialIndex {
    model: ManifoldModel,
    stride: usize,
    edim: usize,
    cell: f64,
    coords: Vec<f64>,
    /// Sorted distinct cell keys, `edim` integers each.
    keys: Vec<i32>,
    /// CSR offsets into `items` per key.
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl SpatialIndex {
    /// Indexes flattened coordinates (`model.coord_len()` values per point).
    pub fn from_coords(model: ManifoldModel, coords: Vec<f64>, cell: f64) -> Self {
        let stride = model.coord_len();
        let edim = embed_len(&model);
        let n = coords.len() / stride;
        let cell = cell.max(1e-6);
        let mut keyed: Vec<(Vec<i32>, u32)> = Vec::with_capacity(n);
        let mut buf = Vec::with_capacity(edim);
        for i in 0..n {
            buf.clear();
            embed_into(&model, &coords[i * stride..(i + 1) * stride], &mut buf);
            keyed.push((buf.iter().map(|&x| libm::floor(x / cell) as i32).collect(), i as u32));
        }
        keyed.sort_unstable();
        let mut keys = Vec::new();
        let mut starts = Vec::new();
        let mut items = Vec::with_capacity(n);
        for (k, (key, i)) in keyed.iter().enumerate() {
            if k == 0 || keyed[k - 1].0 != *key {
                keys.extend_from_slice(key);
                starts.push(items.len() as u32);
            }
            items.push(*i);
        }
        starts.push(items.len() as u32);
        SpatialIndex {
            model,
            stride,
            edim,
            cell,
            coords,
            keys,
            starts,
            items,
        }
    }

    pub fn from_points(model: ManifoldModel, points: &[Point], cell: f64) -> Self {
        let coords = points.iter().flat_map(|p| p.0.iter().copied()).collect();
        Self::from_coords(model, coords, cell)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.stride
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.stride..(i + 1) * self.stride]
    }

    pub fn model(&self) -> &ManifoldModel {
        &self.model
    }

    fn find_cell(&self, key: &[i32]) -> Option<usize> {
        let ncells = self.starts.len() - 1;
        let (mut lo, mut hi) = (0usize, ncells);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.keys[mid * self.edim..(mid + 1) * self.edim].cmp(key) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Calls `f(index, distance)` for every indexed point within geodesic
    /// distance `radius` of `center`, each exactly once, in no particular order.
    pub fn within(&self, center: &[f64], radius: f64, mut f: impl FnMut(usize, f64)) {
        let n = self.len();
        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(2);
        let mut e = Vec::with_capacity(self.edim);
        embed_into(&self.model, center, &mut e);
        if self.model == ManifoldModel::RotationGroup {
            centers.push(e.iter().map(|x| -x).collect());
        }
        centers.push(e);
        let mut cells = 1f64;
        for c in &centers {
            let mut per = 1f64;
            for x in c {
                let lo = libm::floor((x - radius) / self.cell);
                let hi = libm::floor((x + radius) / self.cell);
                per *= hi - lo + 1.0;
            }
            cells += per;
        }
        if cells >= n as f64 || cells > 1e7 {
            for i in 0..n {
                let d = self.model.dist(center, self.point(i));
                if d <= radius {
                    f(i, d);
                }
            }
            return;
        }
        let mut seen_twice: Vec<u32> = Vec::new();
        for (ci, c) in centers.iter().enumerate() {
            if ci == 1 {
                seen_twice.sort_unstable();
            }
            let lo: Vec<i32> = c.iter().map(|x| libm::floor((x - radius) / self.cell) as i32).collect();
            let hi: Vec<i32> = c.iter().map(|x| libm::floor((x + radius) / self.cell) as i32).collect();
            let mut key = lo.clone();
            loop {
                if let Some(cell) = self.find_cell(&key) {
                    for &i in &self.items[self.starts[cell] as usize..self.starts[cell + 1] as usize] {
                        let d = self.model.dist(center, self.point(i as usize));
                        if d <= radius {
                            if centers.len() > 1 {
                                // Antipodal quaternion cells can both hold a point only
                                // when the radius is huge; dedup in that case.
                                if ci == 0 {
                                    seen_twice.push(i);
                                } else if seen_twice.binary_search(&i).is_ok() {
                                    continue;
                                }
                            }
                            f(i as usize, d);
                        }
                    }
                }
                let mut k = 0;
                loop {
                    if k == key.len() {
                        break;
                    }
                    if key[k] < hi[k] {
                        key[k] += 1;
                        break;
                    }
                    key[k] = lo[k];
                    k += 1;
                }
                if k == key.len() {
                    break;
                }
            }
        }
    }

    /// Nearest indexed point, ties broken by lowest index.
    pub fn nearest(&self, p: &[f64]) -> Option<(usize, f64)> {
        if self.is_empty() {
            return None;
        }
        let mut radius = self.cell;
        loop {
            let mut best: Option<(usize, f64)> = None;
            self.within(p, radius, |i, d| match best {
                Some((bi, bd)) if d > bd || (d == bd && i > bi) => {}
                _ => best = Some((i, d)),
            });
            if best.is_some() {
                return best;
            }
            radius *= 2.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::haar_sample;

    fn brute_within(model: &ManifoldModel, pts: &[Point], c: &[f64], r: f64) -> Vec<usize> {
        (0..pts.len()).filter(|&i| model.dist(c, &pts[i].0) <= r).collect()
    }

    #[test]
    fn range_and_nearest_match_brute_force() {
        for model in [
            ManifoldModel::Sphere(3),
            ManifoldModel::Sphere(2),
            ManifoldModel::Torus(2),
            ManifoldModel::RotationGroup,
        ] {
            let pts = haar_sample(&model, 2000, 11);
            let idx = SpatialIndex::from_points(model, &pts, 0.1);
            for (qi, q) in haar_sample(&model, 50, 12).iter().enumerate() {
                for r in [0.05, 0.3, 1.5] {
                    let mut got = Vec::new();
                    idx.within(&q.0, r, |i, _| got.push(i));
                    got.sort_unstable();
                    assert_eq!(got, brute_within(&model, &pts, &q.0, r), "{model} query {qi} r {r}");
                }
                let (ni, nd) = idx.nearest(&q.0).unwrap();
                let (bi, bd) = (0..pts.len())
                    .map(|i| (i, model.dist(&q.0, &pts[i].0)))
                    .fold((usize::MAX, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
                assert_eq!((ni, nd), (bi, bd), "{model}");
            }
        }
    }
}
