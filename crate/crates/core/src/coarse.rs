//! Coarse-geometry probes: nearly fixed points, local product structure,
//! growth profiles, cardinality scheduling and subsequence separation.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{group_ball, GroupBall};
use crate::error::{Error, Result};
use crate::manifold::ManifoldModel;
use crate::net::{build_net, extend_net, interpolate_net, Net, NetOptions};
use crate::warped::{WarpedLevel, WarpedOracle};

/// Slack added to cap queries so that float error cannot drop a member.
const QUERY_SLACK: f64 = 1e-9;

/// Net points `x` with `d(x, γ·x) <= 6r/t` for a nontrivial `γ` of length at
/// most `6r`.
///
/// A nontrivial word of length at most `6r` that evaluates to the identity
/// (a relator) fixes every point, so then every point is a member with that
/// word as witness and displacement 0.
#[derive(Clone, Debug)]
pub struct ChiSet {
    pub t: f64,
    pub r: f64,
    pub threshold: f64,
    pub members: Vec<usize>,
    pub fraction: f64,
    /// Per member: witness word and displacement `d(x, γ·x)`.
    pub witnesses: Vec<(Vec<usize>, f64)>,
    pub relator: Option<Vec<usize>>,
}

impl ChiSet {
    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }
}

/// Word-length radius `⌊6r⌋` of the group ball probed by [`chi_set`].
pub fn chi_radius(r: f64) -> usize {
    libm::floor(6.0 * r + 1e-12) as usize
}

pub fn chi_set(level: &WarpedLevel, net: &Net, r: f64, cap: usize) -> Result<ChiSet> {
    if !(r >= 0.0) {
        return Err(Error::Input(format!("chi radius must be non-negative, got {r}")));
    }
    let ball = group_ball(&level.action.gens, chi_radius(r), cap)?;
    chi_set_in(level, net, r, &ball)
}

/// [`chi_set`] over a precomputed ball of radius at least `⌊6r⌋`.
pub fn chi_set_in(level: &WarpedLevel, net: &Net, r: f64, ball: &GroupBall) -> Result<ChiSet> {
    let model = level.action.model;
    if net.model != model {
        return Err(Error::Input(format!("net lives on {} but the action is on {model}", net.model)));
    }
    let k = chi_radius(r);
    if ball.radius() < k {
        return Err(Error::Input(format!("ball radius {} is below {k}", ball.radius())));
    }
    let threshold = 6.0 * r / level.t;
    let n = net.len();
    let relator = ball.shortest_relator().filter(|w| w.len() <= k).map(|w| w.to_vec());
    let mut first: Vec<Option<(usize, f64)>> = vec![None; n];
    if relator.is_none() {
        let count = ball.count_within(k);
        let mut img = vec![0.0; model.coord_len()];
        // Elements are scanned in ball order, so a point's first witness is final.
        let mut remaining = n;
        let mut test = |first: &mut [Option<(usize, f64)>], g: usize, x: usize| {
            if first[x].is_some() {
                return remaining;
            }
            let p = &net.points[x].0;
            img.copy_from_slice(&model.apply_f64(ball.matrix_f64(g), p));
            let d = model.dist(p, &img);
            if d <= threshold {
                first[x] = Some((g, d));
                remaining -= 1;
            }
            remaining
        };
        if model == ManifoldModel::Sphere(3) {
            let index = net.index();
            let mut hits = Vec::new();
            for g in 1..count {
                hits.clear();
                let m = ball.matrix_f64(g);
                match rotation_axis(m) {
                    Some((axis, angle)) if libm::sin(threshold / 2.0) < libm::sin(angle / 2.0) => {
                        let reach = libm::asin(libm::sin(threshold / 2.0) / libm::sin(angle / 2.0)) + QUERY_SLACK;
                        let anti = [-axis[0], -axis[1], -axis[2]];
                        index.within(&axis, reach, |x, _| hits.push(x));
                        index.within(&anti, reach, |x, _| hits.push(x));
                    }
                    _ => hits.extend(0..n),
                }
                let mut left = n;
                for &x in &hits {
                    left = test(&mut first, g, x);
                }
                if left == 0 {
                    break;
                }
            }
        } else {
            'scan: for g in 1..count {
                for x in 0..n {
                    if test(&mut first, g, x) == 0 {
                        break 'scan;
                    }
                }
            }
        }
    }
    let mut members = Vec::new();
    let mut witnesses = Vec::new();
    for (x, f) in first.iter().enumerate() {
        match (&relator, f) {
            (Some(w), _) => {
                members.push(x);
                witnesses.push((w.clone(), 0.0));
            }
            (None, Some((g, d))) => {
                members.push(x);
                witnesses.push((ball.word(*g), *d));
            }
            (None, None) => {}
        }
    }
    Ok(ChiSet {
        t: level.t,
        r,
        threshold,
        fraction: if n == 0 { 0.0 } else { members.len() as f64 / n as f64 },
        members,
        witnesses,
        relator,
    })
}

/// Unit axis and angle of a 3×3 rotation; `None` when the angle is too small
/// to determine the axis.
fn rotation_axis(m: &[f64]) -> Option<([f64; 3], f64)> {
    let skew = [m[7] - m[5], m[2] - m[6], m[3] - m[1]];
    let s = libm::sqrt(skew.iter().map(|x| x * x).sum::<f64>()) / 2.0;
    let c = (m[0] + m[4] + m[8] - 1.0) / 2.0;
    let angle = libm::atan2(s, c);
    if angle < 1e-6 {
        return None;
    }
    let axis = if s > 1e-3 {
        let n = 2.0 * s;
        [skew[0] / n, skew[1] / n, skew[2] / n]
    } else {
        // Near a half turn R + I has rank one, spanned by the axis.
        let cols = [[m[0] + 1.0, m[3], m[6]], [m[1], m[4] + 1.0, m[7]], [m[2], m[5], m[8] + 1.0]];
        let best = cols
            .iter()
            .max_by(|a, b| {
                let na: f64 = a.iter().map(|x| x * x).sum();
                let nb: f64 = b.iter().map(|x| x * x).sum();
                na.total_cmp(&nb)
            })
            .expect("three columns");
        let n = libm::sqrt(best.iter().map(|x| x * x).sum::<f64>());
        [best[0] / n, best[1] / n, best[2] / n]
    };
    Some((axis, angle))
}

/// A base point outside `χ`, with its margin `min_γ d(x, γ·x) − 6r/t`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasePoint {
    pub index: usize,
    pub margin: f64,
    pub candidates: usize,
}

/// Among the first `max_candidates` net points outside `χ`, the one whose
/// smallest displacement by a nontrivial `γ ∈ B_Γ(6r)` is largest.
pub fn select_base_point(level: &WarpedLevel, net: &Net, chi: &ChiSet, ball: &GroupBall, max_candidates: usize) -> Result<BasePoint> {
    let model = level.action.model;
    let outside: Vec<usize> = (0..net.len()).filter(|&i| !chi.contains(i)).take(max_candidates).collect();
    if outside.is_empty() {
        let (w, d) = chi.witnesses.first().cloned().unwrap_or_default();
        return Err(Error::Singular {
            witness: level.action.gens.labels_of(&w),
            displacement: d,
        });
    }
    let count = ball.count_within(chi_radius(chi.r));
    let mut best = BasePoint {
        index: outside[0],
        margin: f64::NEG_INFINITY,
        candidates: outside.len(),
    };
    for &x in &outside {
        let p = &net.points[x].0;
        let mut least = f64::INFINITY;
        for g in 1..count {
            least = least.min(model.dist(p, &model.apply_f64(ball.matrix_f64(g), p)));
        }
        let margin = least - chi.threshold;
        if margin > best.margin {
            best.index = x;
            best.margin = margin;
        }
    }
    Ok(best)
}

/// Fails with the witness when net point `x0` lies in `χ_Γ^t(r)`.
fn require_outside(level: &WarpedLevel, net: &Net, x0: usize, r: f64, cap: usize) -> Result<()> {
    let single = Net {
        points: vec![net.points[x0].clone()],
        insertion_radii: vec![f64::INFINITY],
        ..net.clone()
    };
    let chi = chi_set(level, &single, r, cap)?;
    if let Some((w, d)) = chi.witnesses.first() {
        return Err(Error::Singular {
            witness: level.action.gens.labels_of(w),
            displacement: *d,
        });
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct BallCheckConfig {
    pub r: f64,
    /// Quasi-isometry constants for the comparison report.
    pub l: f64,
    pub a: f64,
    pub epsilon: f64,
    /// Pairs sampled from the warped ball (all pairs when fewer exist).
    pub max_pairs: usize,
    pub seed: u64,
    pub cap: usize,
}

impl BallCheckConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l >= 1.0) || !(self.a >= 0.0) || !(self.epsilon > 0.0) || !(self.r >= 0.0) {
            return Err(Error::Input("ball check needs r >= 0, L >= 1, A >= 0 and epsilon > 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BallCheckReport {
    pub x0: usize,
    /// Net points in the warped ball `B(x0, r)`.
    pub ball_size: usize,
    pub pairs: usize,
    /// Max over pairs of `|ρ_t(x, y) − (t·d(u_x, u_y) + |γ_x⁻¹ γ_y|)|`.
    pub distortion: f64,
    /// Pairs violating the `(L, A)` quasi-isometry inequalities.
    pub qi_violations: usize,
    pub within_epsilon: bool,
}

/// Compares the warped ball around net point `x0` with a ball in the ℓ¹
/// product of `(M, t·d)` and the word metric.
///
/// Each ball point `x` is sent to `(u_x, γ_x)` where `γ_x` is the minimizing
/// element of `ρ_t(x0, x) = t·d(x0, γ_x·x) + |γ_x|` and `u_x = γ_x·x`.
pub fn ball_product_check(level: &WarpedLevel, net: &Net, x0: usize, cfg: &BallCheckConfig) -> Result<BallCheckReport> {
    cfg.validate()?;
    require_outside(level, net, x0, cfg.r, cfg.cap)?;
    let model = level.action.model;
    let reach = libm::floor(2.0 * cfg.r + 1e-12) as usize;
    let oracle = WarpedOracle::new(level.clone(), reach, cfg.cap);
    if oracle.ball().radius() < reach {
        return Err(Error::Resource {
            what: "group ball for ball check",
            partial: oracle.ball().len(),
            cap: cfg.cap,
            upper_bound: None,
        });
    }
    let ball = oracle.ball();
    let p0 = &net.points[x0].0;
    let mut members: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    let mut img = vec![0.0; model.coord_len()];
    for (x, p) in net.points.iter().enumerate() {
        if !oracle.within(p0, &p.0, cfg.r + 1e-12) {
            continue;
        }
        let (g, _, _) = oracle.dist_indexed(p0, &p.0)?;
        if g == 0 {
            img.copy_from_slice(&p.0);
        } else {
            oracle.act(g, &p.0, &mut img);
        }
        members.push((x, g, img.clone()));
    }
    let m = members.len();
    let total = m * m.saturating_sub(1) / 2;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if total <= cfg.max_pairs {
        for i in 0..m {
            for j in i + 1..m {
                pairs.push((i, j));
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        while pairs.len() < cfg.max_pairs {
            let i = rng.random_range(0..m);
            let j = rng.random_range(0..m);
            if i != j {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    let mut distortion: f64 = 0.0;
    let mut violations = 0;
    for &(i, j) in &pairs {
        let (x, gx, ux) = &members[i];
        let (y, gy, uy) = &members[j];
        let rho = oracle.dist_indexed(&net.points[*x].0, &net.points[*y].0)?.1;
        let word = {
            let inv = level.action.gens.inverse_word(&ball.word(*gx));
            let mut w = inv;
            w.extend(ball.word(*gy));
            let prod = crate::algebra::word_eval_indices(&w, &level.action.gens);
            ball.index_of(&prod).map(|k| ball.length(k)).ok_or_else(|| {
                Error::Input("product of ball elements left the enumerated ball".into())
            })?
        };
        let product = level.t * model.dist(ux, uy) + word as f64;
        distortion = distortion.max((rho - product).abs());
        if rho > cfg.l * product + cfg.a + 1e-9 || product > cfg.l * rho + cfg.a + 1e-9 {
            violations += 1;
        }
    }
    Ok(BallCheckReport {
        x0,
        ball_size: m,
        pairs: pairs.len(),
        distortion,
        qi_violations: violations,
        within_epsilon: distortion <= cfg.epsilon,
    })
}

/// `|B_{Z^m}(ρ)|` in the ℓ¹ metric: `Σ_k 2^k·C(m, k)·C(ρ, k)`.
pub fn lattice_ball_size(m: usize, rho: usize) -> u128 {
    (0..=m.min(rho))
        .map(|k| (1u128 << k) * binomial(m, k) * binomial(rho, k))
        .sum()
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        c = c * (n as u128 - i) / (i + 1);
    }
    c
}

/// `|B_{Γ×Z^m}(r)|` for the ℓ¹ product, from the cumulative ball sizes of `Γ`.
pub fn product_ball_size(gamma_ball_sizes: &[usize], m: usize, r: usize) -> Result<u128> {
    if gamma_ball_sizes.len() <= r {
        return Err(Error::Input(format!(
            "group ball sizes known up to radius {}, need {r}",
            gamma_ball_sizes.len() as isize - 1
        )));
    }
    let mut total = 0u128;
    for j in 0..=r {
        let sphere = gamma_ball_sizes[j] - if j == 0 { 0 } else { gamma_ball_sizes[j - 1] };
        total += sphere as u128 * lattice_ball_size(m, r - j);
    }
    Ok(total)
}

/// Volume of the unit ball in `R^m`.
fn unit_ball_volume(m: usize) -> f64 {
    let h = m as f64 / 2.0;
    libm::pow(core::f64::consts::PI, h) / libm::tgamma(h + 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthProfile {
    pub radii: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Fingerprint {
    /// Warped-ball net counts per radius.
    pub counts: Vec<usize>,
    /// Counts rescaled to `t`-scaled volume by the net density.
    pub warped: GrowthProfile,
    /// Volume of balls in `Γ × R^m` with the ℓ¹ product metric.
    pub product: GrowthProfile,
    pub deviation: f64,
}

/// Largest relative gap between two profiles over radii `>= 1`.
pub fn profile_deviation(a: &GrowthProfile, b: &GrowthProfile) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .skip(1)
        .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Warped-ball growth at net point `x0` against the product `Γ × R^m`.
///
/// A net point stands for `vol(M)/|net|` of volume, so the count at radius
/// `k` rescales to `t^m·vol(M)·count/|net|`; the product ball of radius `k`
/// has volume `Σ_j |S_Γ(j)|·ω_m·(k − j)^m`. Both profiles are 1 at radius 0.
pub fn growth_fingerprint(level: &WarpedLevel, net: &Net, x0: usize, r_max: usize, cap: usize) -> Result<Fingerprint> {
    require_outside(level, net, x0, r_max as f64, cap)?;
    let model = level.action.model;
    let m = model.dim();
    let oracle = WarpedOracle::new(level.clone(), r_max, cap);
    if oracle.ball().radius() < r_max {
        return Err(Error::Resource {
            what: "group ball for growth profile",
            partial: oracle.ball().len(),
            cap,
            upper_bound: None,
        });
    }
    let p0 = &net.points[x0].0;
    let mut counts = vec![0usize; r_max + 1];
    for p in &net.points {
        for (k, c) in counts.iter_mut().enumerate() {
            if oracle.within(p0, &p.0, k as f64 + 1e-12) {
                *c += 1;
            }
        }
    }
    let cell = libm::pow(level.t, m as f64) * model.riemannian_volume() / net.len() as f64;
    let spheres = oracle.ball().sphere_sizes();
    let omega = unit_ball_volume(m);
    let radii: Vec<usize> = (0..=r_max).collect();
    let warped = GrowthProfile {
        radii: radii.clone(),
        values: counts
            .iter()
            .enumerate()
            .map(|(k, &c)| if k == 0 { 1.0 } else { c as f64 * cell })
            .collect(),
    };
    let product = GrowthProfile {
        radii: radii.clone(),
        values: radii
            .iter()
            .map(|&k| {
                if k == 0 {
                    1.0
                } else {
                    (0..=k).map(|j| spheres[j] as f64 * omega * libm::pow((k - j) as f64, m as f64)).sum()
                }
            })
            .collect(),
    };
    let deviation = profile_deviation(&warped, &product);
    Ok(Fingerprint {
        counts,
        warped,
        product,
        deviation,
    })
}

#[derive(Clone, Debug)]
pub struct ScheduleEntry {
    pub target: usize,
    pub t: f64,
    /// Size of the `1/t` net before interpolation.
    pub pre_size: usize,
    /// Volume bounds `1/v(1/t) <= pre_size <= 1/v(1/2t)` for that net.
    pub volume_bounds: (f64, f64),
    pub coarse_size: usize,
    pub fine_size: usize,
    pub net: Net,
}

/// Nets of exactly the requested sizes: for each `N`, `t = N^{1/m}`, the
/// `1/t` net is coarsened or refined until it brackets `N`, and the nested
/// pair is interpolated.
pub fn cardinality_schedule(model: &ManifoldModel, targets: &[usize], seed: u64, opts: &NetOptions) -> Result<Vec<ScheduleEntry>> {
    if targets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("schedule targets must be strictly increasing".into()));
    }
    let m = model.dim() as f64;
    let mut out = Vec::new();
    for &target in targets {
        if target == 0 {
            return Err(Error::Input("schedule target must be at least 1".into()));
        }
        let t = libm::pow(target as f64, 1.0 / m).max(1.0);
        let r = 1.0 / t;
        let pre = build_net(model, r, seed)?;
        let volume_bounds = (1.0 / model.ball_volume(r), 1.0 / model.ball_volume(r / 2.0));
        let mut coarse = pre.clone();
        let mut rc = r;
        while coarse.len() > target {
            rc *= 2.0;
            coarse = build_net(model, rc, seed)?;
        }
        let mut fine = coarse.clone();
        let mut rf = rc;
        let mut step = 0u64;
        while fine.len() < target {
            rf /= 2.0;
            step += 1;
            if rf < 1e-6 {
                return Err(Error::Input(format!("target {target} is beyond the feasible net size")));
            }
            fine = extend_net(&coarse, rf, seed.wrapping_add(step), opts)?;
        }
        let net = interpolate_net(&coarse, &fine, target)?;
        out.push(ScheduleEntry {
            target,
            t,
            pre_size: pre.len(),
            volume_bounds,
            coarse_size: coarse.len(),
            fine_size: fine.len(),
            net,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairVerdict {
    /// 1-based positions in the thinned sequence.
    pub m: usize,
    pub n: usize,
    /// Whether `m·|G_m| < |G_n| <= D^{r+1}·|G_m|` holds.
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationCertificate {
    pub d: u64,
    pub r: u32,
    /// `n₀ = D^{r+1}`.
    pub n0: BigUint,
    /// Indices (0-based, into the input) of the thinned subsequence.
    pub selected: Vec<usize>,
    /// Verdicts for pairs of selected positions `m < n` with `m >= n₀`.
    pub pairs: Vec<PairVerdict>,
}

/// Thins `sizes` greedily so that `|H_{k+1}| > k·|H_k|` and checks the
/// coarse-equivalence inequality on the selected pairs past `n₀ = D^{r+1}`.
pub fn subsequence_separation(sizes: &[BigUint], d: u64, r: u32) -> Result<SeparationCertificate> {
    if sizes.len() < 2 {
        return Err(Error::Input("separation needs at least two sizes".into()));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("sizes must be strictly increasing".into()));
    }
    let n0 = BigUint::from(d).pow(r + 1);
    let mut selected = vec![0usize];
    for (i, s) in sizes.iter().enumerate().skip(1) {
        let k = selected.len();
        if *s > BigUint::from(k) * &sizes[selected[k - 1]] {
            selected.push(i);
        }
    }
    let mut pairs = Vec::new();
    let start = n0.to_usize().unwrap_or(usize::MAX);
    for m in start.max(1)..=selected.len() {
        for n in m + 1..=selected.len() {
            let gm = &sizes[selected[m - 1]];
            let gn = &sizes[selected[n - 1]];
            let holds = BigUint::from(m) * gm < *gn && *gn <= &n0 * gm;
            pairs.push(PairVerdict { m, n, holds });
        }
    }
    Ok(SeparationCertificate {
        d,
        r,
        n0,
        selected,
        pairs,
    })
}

/// `1, 2, 2·2, 3·(2·2), …`: a sequence just fast enough to survive thinning.
pub fn factorial_sizes(count: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(count);
    let mut cur = BigUint::one();
    for k in 0..count {
        if k > 0 {
            cur = cur * BigUint::from(k) + BigUint::one();
        }
        out.push(cur.clone());
    }
    if out.first().is_some_and(|x| x.is_zero()) {
        out[0] = BigUint::one();
    }
    out
}

/// Labels of a witness word, for diagnostics.
pub fn witness_labels(level: &WarpedLevel, w: &[usize]) -> Vec<String> {
    level.action.gens.labels_of(w)
}
