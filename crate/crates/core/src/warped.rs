//! The warped metric `ρ_t(x, y) = min_γ [t·d(x, γ·y) + |γ|]` on a level set.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::algebra::{group_ball_within, GeneratorSet, GroupBall, DEFAULT_BALL_CAP};
use crate::error::{Error, Result};
use crate::manifold::{haar_sample, ManifoldModel, Point};
use crate::net::Net;

/// A finitely generated group acting isometrically on a model manifold.
#[derive(Clone, Debug)]
pub struct ActionSpec {
    pub model: ManifoldModel,
    pub gens: GeneratorSet,
    ops: Vec<Vec<f64>>,
}

impl ActionSpec {
    /// Checks that every generator is an exact isometry of `model`.
    pub fn new(model: ManifoldModel, gens: GeneratorSet) -> Result<Self> {
        if gens.dim() != model.action_dim() {
            return Err(Error::Input(format!(
                "generators are {0}×{0} matrices but {model} needs {1}×{1}",
                gens.dim(),
                model.action_dim()
            )));
        }
        for (i, g) in gens.generators().iter().enumerate() {
            if !model.acts_isometrically(&g.matrix) {
                return Err(Error::Input(format!(
                    "generator {:?} is not an isometry of {model}",
                    gens.label(i)
                )));
            }
        }
        let ops = (0..gens.len()).map(|i| model.isometry_op(gens.matrix_f64(i))).collect();
        Ok(ActionSpec { model, gens, ops })
    }

    /// Image of `p` under generator `s`.
    pub fn apply_generator(&self, s: usize, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.model.coord_len()];
        self.model.apply_op(&self.ops[s], p, &mut out);
        out
    }

    /// Image of `p` under a word, applying its last letter first.
    pub fn apply_word(&self, word: &[usize], p: &[f64]) -> Vec<f64> {
        let mut cur = p.to_vec();
        for &s in word.iter().rev() {
            cur = self.apply_generator(s, &cur);
        }
        cur
    }
}

/// The `t`-level set of the warped cone over an action.
#[derive(Clone, Debug)]
pub struct WarpedLevel {
    pub action: ActionSpec,
    pub t: f64,
}

impl WarpedLevel {
    pub fn new(action: ActionSpec, t: f64) -> Result<Self> {
        if !(t >= 1.0) || !t.is_finite() {
            return Err(Error::Input(format!("warped level needs t >= 1, got {t}")));
        }
        Ok(WarpedLevel { action, t })
    }

    pub fn model(&self) -> &ManifoldModel {
        &self.action.model
    }

    /// The rescaled metric `t·d`.
    pub fn scaled_dist(&self, p: &[f64], q: &[f64]) -> f64 {
        self.t * self.action.model.dist(p, q)
    }
}

/// A warped distance together with a minimizing group element.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpedDistance {
    pub value: f64,
    /// Minimal word (generator indices) for `γ` with `ρ_t(x, y) = t·d(x, γ·y) + |γ|`.
    pub witness: Vec<usize>,
    /// The metric part `t·d(x, γ·y)`.
    pub metric_part: f64,
}

/// Exact warped distances over a precomputed group ball.
///
/// A query scans the ball in order of word length, keeping the best value,
/// and stops at the first element whose length alone reaches it. When the
/// ball runs out first, every missing element is at least `radius + 1` long,
/// so the answer is still exact if the best value does not exceed that.
#[derive(Clone, Debug)]
pub struct WarpedOracle {
    level: WarpedLevel,
    ball: GroupBall,
    ops: Vec<f64>,
    stride: usize,
}

impl WarpedOracle {
    /// Enumerates the largest ball of radius at most `max_radius` within `cap`.
    pub fn new(level: WarpedLevel, max_radius: usize, cap: usize) -> Self {
        let ball = group_ball_within(&level.action.gens, max_radius, cap);
        Self::with_ball(level, ball)
    }

    /// Radius large enough to answer every query exactly: `⌈t·diam⌉`.
    pub fn full_radius(level: &WarpedLevel) -> usize {
        libm::ceil(level.t * level.model().diameter()) as usize
    }

    pub fn with_ball(level: WarpedLevel, ball: GroupBall) -> Self {
        let model = level.action.model;
        let stride = model.coord_len().pow(if model == ManifoldModel::RotationGroup { 1 } else { 2 });
        let mut ops = Vec::with_capacity(ball.len() * stride);
        for i in 0..ball.len() {
            ops.extend(model.isometry_op(ball.matrix_f64(i)));
        }
        WarpedOracle { level, ball, ops, stride }
    }

    pub fn level(&self) -> &WarpedLevel {
        &self.level
    }

    pub fn ball(&self) -> &GroupBall {
        &self.ball
    }

    /// Applies ball element `i` to `p`.
    pub fn act(&self, i: usize, p: &[f64], out: &mut [f64]) {
        self.level
            .action
            .model
            .apply_op(&self.ops[i * self.stride..(i + 1) * self.stride], p, out);
    }

    /// Minimizing ball index and value, or a resource error with the best
    /// upper bound when the ball is too small to certify it.
    pub fn dist_indexed(&self, x: &[f64], y: &[f64]) -> Result<(usize, f64, f64)> {
        let model = self.level.action.model;
        let t = self.level.t;
        let mut buf = [0.0f64; 8];
        let out = &mut buf[..model.coord_len()];
        let mut best = (0usize, t * model.dist(x, y), t * model.dist(x, y));
        for i in 1..self.ball.len() {
            let len = self.ball.length(i) as f64;
            if len >= best.1 {
                return Ok(best);
            }
            self.act(i, y, out);
            let m = t * model.dist(x, out);
            if m + len < best.1 {
                best = (i, m + len, m);
            }
        }
        if best.1 <= (self.ball.radius() + 1) as f64 {
            Ok(best)
        } else {
            Err(Error::Resource {
                what: "group ball for warped distance",
                partial: self.ball.len(),
                cap: self.ball.len(),
                upper_bound: Some(best.1),
            })
        }
    }

    /// Whether `ρ_t(x, y) <= bound`, decided exactly when the ball radius is
    /// at least `⌊bound⌋`.
    pub fn within(&self, x: &[f64], y: &[f64], bound: f64) -> bool {
        let model = self.level.action.model;
        let t = self.level.t;
        let mut buf = [0.0f64; 8];
        let out = &mut buf[..model.coord_len()];
        for i in 0..self.ball.len() {
            let len = self.ball.length(i) as f64;
            if len > bound {
                break;
            }
            self.act(i, y, out);
            if t * model.dist(x, out) + len <= bound {
                return true;
            }
        }
        false
    }

    pub fn dist(&self, x: &Point, y: &Point) -> Result<WarpedDistance> {
        self.level.action.model.check_point(x)?;
        self.level.action.model.check_point(y)?;
        let (i, value, metric_part) = self.dist_indexed(&x.0, &y.0)?;
        Ok(WarpedDistance {
            value,
            witness: self.ball.word(i),
            metric_part,
        })
    }
}

/// Exact `ρ_t(x, y)` by iterative deepening: the group ball grows (doubling
/// its radius, never past `⌈t·d(x, y)⌉ − 1`) until it certifies the minimum.
pub fn warped_dist_exact(level: &WarpedLevel, x: &Point, y: &Point) -> Result<WarpedDistance> {
    warped_dist_exact_capped(level, x, y, DEFAULT_BALL_CAP)
}

pub fn warped_dist_exact_capped(level: &WarpedLevel, x: &Point, y: &Point, cap: usize) -> Result<WarpedDistance> {
    let model = level.action.model;
    model.check_point(x)?;
    model.check_point(y)?;
    let need = (libm::ceil(level.t * model.dist(&x.0, &y.0)) as usize).saturating_sub(1);
    let mut radius = need.min(4);
    loop {
        let oracle = WarpedOracle::new(level.clone(), radius, cap);
        match oracle.dist(x, y) {
            Err(Error::Resource { .. }) if oracle.ball().radius() == radius && radius < need => {
                radius = (2 * radius).max(1).min(need);
            }
            r => return r,
        }
    }
}

/// Kind of edge in the auxiliary graph of [`WarpedGraph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Metric,
    Warp,
}

/// Weighted graph on net points approximating `(M, ρ_t)`: metric edges of
/// weight `t·d(p, q)` between points within `3R`, and a warp edge of weight 1
/// from each `p` to the net point nearest `s·p`, for every generator `s`.
/// Edges are undirected.
#[derive(Clone, Debug)]
pub struct WarpedGraph {
    pub t: f64,
    pub net_radius: f64,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    edges: Vec<(u32, u32, f64, EdgeKind)>,
}

pub fn warped_graph_metric(level: &WarpedLevel, net: &Net) -> Result<WarpedGraph> {
    let model = level.action.model;
    if net.model != model {
        return Err(Error::Input(format!("net lives on {} but the action is on {model}", net.model)));
    }
    let n = net.len();
    let big_r = net.density_radius;
    let index = net.index();
    let mut edges: Vec<(u32, u32, f64, EdgeKind)> = Vec::new();
    for (i, p) in net.points.iter().enumerate() {
        index.within(&p.0, 3.0 * big_r, |j, d| {
            if j > i {
                edges.push((i as u32, j as u32, level.t * d, EdgeKind::Metric));
            }
        });
    }
    for (i, p) in net.points.iter().enumerate() {
        for s in 0..level.action.gens.len() {
            let img = level.action.apply_generator(s, &p.0);
            let (j, _) = index.nearest(&img).expect("nonempty net");
            if j != i {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                edges.push((a as u32, b as u32, 1.0, EdgeKind::Warp));
            }
        }
    }
    edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
    edges.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

    let mut degree = vec![0usize; n + 1];
    for &(a, b, _, _) in &edges {
        degree[a as usize] += 1;
        degree[b as usize] += 1;
    }
    let mut offsets = vec![0usize; n + 1];
    for i in 0..n {
        offsets[i + 1] = offsets[i] + degree[i];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0u32; offsets[n]];
    let mut weights = vec![0.0; offsets[n]];
    for &(a, b, w, _) in &edges {
        for (u, v) in [(a, b), (b, a)] {
            let k = fill[u as usize];
            targets[k] = v;
            weights[k] = w;
            fill[u as usize] += 1;
        }
    }
    Ok(WarpedGraph {
        t: level.t,
        net_radius: big_r,
        offsets,
        targets,
        weights,
        edges,
    })
}

impl WarpedGraph {
    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Deduplicated edges `(u, v, weight, kind)` with `u < v`, sorted; when a
    /// pair carries both kinds the lighter edge is kept.
    pub fn edges(&self) -> &[(u32, u32, f64, EdgeKind)] {
        &self.edges
    }

    /// Additive error allowed against the exact metric: `5·t·R`.
    pub fn tolerance(&self) -> f64 {
        5.0 * self.t * self.net_radius
    }

    /// Dijkstra distances from `source`; unreachable vertices are infinite.
    pub fn shortest_paths(&self, source: usize) -> Vec<f64> {
        let n = self.vertex_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Reverse((0u64, source as u32)));
        while let Some(Reverse((bits, u))) = heap.pop() {
            let d = f64::from_bits(bits);
            let u = u as usize;
            if d > dist[u] {
                continue;
            }
            for k in self.offsets[u]..self.offsets[u + 1] {
                let v = self.targets[k] as usize;
                let nd = d + self.weights[k];
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse((nd.to_bits(), v as u32)));
                }
            }
        }
        dist
    }
}

/// Outcome of [`neighborhood_cover`].
#[derive(Clone, Debug)]
pub struct CoverReport {
    /// Radius of the group ball `B_Γ(r)` in the cover.
    pub group_radius: usize,
    pub group_ball_size: usize,
    /// Radius `r/t` of the metric neighbourhood.
    pub metric_radius: f64,
    /// Sampled points found inside the warped neighbourhood.
    pub sampled: usize,
    /// How many of those lie in `B_Γ(r)·N_d(Y, r/t)`.
    pub verified: usize,
}

/// Checks `N_ρ(Y, r) ⊆ B_Γ(r)·N_d(Y, r/t)` on Haar samples that the exact
/// oracle places within warped distance `r` of `Y`, stopping after `want`
/// such samples or `budget` draws.
pub fn neighborhood_cover(
    level: &WarpedLevel,
    ys: &[Point],
    r: f64,
    want: usize,
    budget: usize,
    seed: u64,
    cap: usize,
) -> Result<CoverReport> {
    if !(r >= 0.0) {
        return Err(Error::Input(format!("neighbourhood radius must be non-negative, got {r}")));
    }
    let model = level.action.model;
    let k = libm::floor(r) as usize;
    let oracle = WarpedOracle::new(level.clone(), k, cap);
    if oracle.ball().radius() < k {
        return Err(Error::Resource {
            what: "group ball for neighbourhood cover",
            partial: oracle.ball().len(),
            cap,
            upper_bound: None,
        });
    }
    let metric_radius = r / level.t;
    let mut report = CoverReport {
        group_radius: k,
        group_ball_size: oracle.ball().len(),
        metric_radius,
        sampled: 0,
        verified: 0,
    };
    if ys.is_empty() {
        return Ok(report);
    }
    let mut buf = vec![0.0; model.coord_len()];
    for z in haar_sample(&model, budget, seed) {
        if report.sampled >= want {
            break;
        }
        if !ys.iter().any(|y| oracle.within(&y.0, &z.0, r + 1e-12)) {
            continue;
        }
        report.sampled += 1;
        let covered = (0..oracle.ball().len()).any(|i| {
            oracle.act(i, &z.0, &mut buf);
            ys.iter().any(|y| model.dist(&y.0, &buf) <= metric_radius + 1e-12)
        });
        if covered {
            report.verified += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::library;
    use crate::manifold::HaarSampler;
    use core::f64::consts::PI;

    fn lps(t: f64) -> WarpedLevel {
        WarpedLevel::new(ActionSpec::new(ManifoldModel::Sphere(3), library::lps_s2()).unwrap(), t).unwrap()
    }

    fn angle(a: f64) -> Point {
        Point(vec![libm::cos(a), libm::sin(a)])
    }

    #[test]
    fn rejects_bad_actions_and_levels() {
        assert!(ActionSpec::new(ManifoldModel::Sphere(2), library::lps_s2()).is_err());
        assert!(ActionSpec::new(ManifoldModel::Torus(3), library::lps_s2()).is_err());
        assert!(ActionSpec::new(ManifoldModel::Torus(2), library::quarter_turn_s1()).is_ok());
        let a = ActionSpec::new(ManifoldModel::Sphere(3), library::lps_s2()).unwrap();
        assert!(WarpedLevel::new(a, 0.5).is_err());
    }

    #[test]
    fn trivial_group_is_scaled_metric() {
        let a = ActionSpec::new(ManifoldModel::Sphere(3), GeneratorSet::trivial(3)).unwrap();
        let level = WarpedLevel::new(a, 7.0).unwrap();
        let pts = haar_sample(&ManifoldModel::Sphere(3), 10, 1);
        for p in &pts {
            for q in &pts {
                let w = warped_dist_exact(&level, p, q).unwrap();
                assert!((w.value - 7.0 * ManifoldModel::Sphere(3).dist(&p.0, &q.0)).abs() < 1e-12);
                assert!(w.witness.is_empty());
            }
        }
    }

    #[test]
    fn generator_step_costs_one() {
        let level = lps(10.0);
        let mut s = HaarSampler::new(ManifoldModel::Sphere(3), 4);
        for _ in 0..20 {
            let x = s.sample();
            for g in 0..4 {
                let y = Point(level.action.apply_generator(g, &x.0));
                let w = warped_dist_exact(&level, &x, &y).unwrap();
                assert!(w.value <= 1.0 + 1e-12);
                if level.scaled_dist(&x.0, &y.0) > 1.0 {
                    assert!((w.value - 1.0).abs() < 1e-9, "{}", w.value);
                    assert_eq!(w.witness, vec![level.action.gens.inverse(g)]);
                }
            }
        }
    }

    #[test]
    fn circle_rotation_shortcut() {
        let gens = library::rational_rotation_s1();
        let theta = libm::acos(3.0 / 5.0);
        let level = WarpedLevel::new(ActionSpec::new(ManifoldModel::Sphere(2), gens).unwrap(), 10.0).unwrap();
        let w = warped_dist_exact(&level, &angle(0.0), &angle(theta)).unwrap();
        assert!((w.value - 1.0).abs() < 1e-9);
        assert!(w.metric_part < 1e-9);
        assert_eq!(w.witness.len(), 1);
    }

    #[test]
    fn resource_error_carries_upper_bound() {
        let level = lps(50.0);
        let x = angle3(0.0);
        let y = angle3(3.0);
        match warped_dist_exact_capped(&level, &x, &y, 100) {
            Err(Error::Resource { upper_bound: Some(b), .. }) => assert!(b <= 150.0),
            other => panic!("{other:?}"),
        }
    }

    fn angle3(a: f64) -> Point {
        Point(vec![libm::cos(a), 0.0, libm::sin(a)])
    }

    #[test]
    fn graph_metric_edges() {
        let level = lps(8.0);
        let net = crate::net::build_net(&ManifoldModel::Sphere(3), 0.25, 2).unwrap();
        let g = warped_graph_metric(&level, &net).unwrap();
        let idx = net.index();
        let d0 = g.shortest_paths(0);
        for s in 0..4 {
            let img = level.action.apply_generator(s, &net.points[0].0);
            let (j, _) = idx.nearest(&img).unwrap();
            assert!(d0[j] <= 1.0 + level.t * net.density_radius);
        }
        assert!(d0.iter().all(|d| d.is_finite()));
        let trivial = WarpedLevel::new(ActionSpec::new(ManifoldModel::Sphere(3), GeneratorSet::trivial(3)).unwrap(), 8.0)
            .unwrap();
        let g = warped_graph_metric(&trivial, &net).unwrap();
        let d0 = g.shortest_paths(0);
        for j in 1..net.len() {
            let d = ManifoldModel::Sphere(3).dist(&net.points[0].0, &net.points[j].0);
            if d <= 2.0 * net.density_radius {
                assert!((d0[j] - 8.0 * d).abs() <= 2.0 * 8.0 * net.density_radius);
            }
        }
        let _ = PI;
    }

    #[test]
    fn cover_contains_warped_ball() {
        let level = lps(16.0);
        let y = vec![angle3(0.3)];
        let rep = neighborhood_cover(&level, &y, 2.0, 500, 200_000, 5, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(rep.group_radius, 2);
        assert_eq!(rep.group_ball_size, 17);
        assert_eq!(rep.sampled, 500);
        assert_eq!(rep.verified, rep.sampled);
        let zero = neighborhood_cover(&level, &y, 0.0, 10, 1000, 5, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(zero.group_ball_size, 1);
        assert_eq!(zero.metric_radius, 0.0);
    }
}
