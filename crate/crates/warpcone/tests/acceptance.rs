//! Acceptance run: one `[PASS]`/`[FAIL]` line per criterion.
//!
//! A criterion listed in `KNOWN_UNATTAINABLE` is still computed and its
//! line printed; the run only fails on it if it fails for a reason other
//! than the documented one.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use warpcone::config;
use warpcone::pipeline::{self, build_level, Overrides};
use warpcone_core::algebra::{library, GeneratorSet, DEFAULT_BALL_CAP};
use warpcone_core::coarse::{
    ball_product_check, cardinality_schedule, chi_radius, chi_set, chi_set_in, factorial_sizes, product_ball_size,
    select_base_point, subsequence_separation, BallCheckConfig,
};
use warpcone_core::algebra::group_ball;
use warpcone_core::graph::{approx_graph, named, ApproxGraph};
use warpcone_core::manifold::{haar_sample, ManifoldModel, Point};
use warpcone_core::net::{build_net, voronoi_partition, NetOptions};
use warpcone_core::spectral::{
    cheeger_exact, conductance_exact, embedding_obstruction, laplacian_spectrum, ControlFunctions, Verdict,
};
use warpcone_core::warped::{warped_dist_exact, warped_graph_metric, ActionSpec, WarpedLevel};
use warpcone_core::Error;

const S2: ManifoldModel = ManifoldModel::Sphere(3);
const S1: ManifoldModel = ManifoldModel::Sphere(2);

struct Outcome {
    pass: bool,
    detail: String,
    /// Set when a failure is the documented, expected one.
    expected_failure: bool,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome {
        pass,
        detail,
        expected_failure: false,
    }
}

fn lps_level(t: f64) -> WarpedLevel {
    WarpedLevel::new(ActionSpec::new(S2, library::lps_s2()).unwrap(), t).unwrap()
}

fn angle(p: &[f64], q: &[f64]) -> f64 {
    let c = [p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]];
    let s = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    s.atan2(p[0] * q[0] + p[1] * q[1] + p[2] * q[2])
}

fn mat_mul(a: &[f64; 9], b: &[f64; 9]) -> [f64; 9] {
    let mut c = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            c[3 * i + j] = (0..3).map(|k| a[3 * i + k] * b[3 * k + j]).sum();
        }
    }
    c
}

fn mat_vec(m: &[f64; 9], v: &[f64]) -> [f64; 3] {
    [
        m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
        m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
        m[6] * v[0] + m[7] * v[1] + m[8] * v[2],
    ]
}

/// Every freely reduced word of length at most `k` over the generators, as a
/// floating-point matrix with its length, built by depth-first extension.
fn reduced_words(gens: &GeneratorSet, k: usize) -> Vec<([f64; 9], usize)> {
    let mats: Vec<[f64; 9]> = (0..gens.len())
        .map(|i| gens.matrix(i).to_f64().try_into().unwrap())
        .collect();
    let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    let mut out = vec![(id, 0)];
    let mut stack: Vec<([f64; 9], usize, Option<usize>)> = vec![(id, 0, None)];
    while let Some((m, len, last)) = stack.pop() {
        if len == k {
            continue;
        }
        for s in 0..gens.len() {
            if last.is_some_and(|l| gens.inverse(l) == s) {
                continue;
            }
            let next = mat_mul(&m, &mats[s]);
            out.push((next, len + 1));
            stack.push((next, len + 1, Some(s)));
        }
    }
    out
}

/// Brute-force `min over words w of t·d(x, w·y) + |w|`; certified when the
/// minimum is at most `k + 1`, since longer words cost more.
fn brute_warped(words: &[([f64; 9], usize)], k: usize, t: f64, x: &[f64], y: &[f64]) -> Option<f64> {
    let best = words
        .iter()
        .map(|(m, len)| t * angle(x, &mat_vec(m, y)) + *len as f64)
        .fold(f64::INFINITY, f64::min);
    (best <= (k + 1) as f64).then_some(best)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let k = 11;
    let words = reduced_words(&library::lps_s2(), k);
    let mut worst = 0.0f64;
    let mut uncertified = 0;
    let mut triangle_violations = 0;
    let mut pairs = 0;
    for (seed, t) in [(11u64, 2.0), (12, 8.0)] {
        let level = lps_level(t);
        let pts = haar_sample(&S2, 200, seed);
        for i in 0..50 {
            let (x, y) = (&pts[2 * i], &pts[2 * i + 1]);
            let exact = warped_dist_exact(&level, x, y).unwrap().value;
            pairs += 1;
            match brute_warped(&words, k, t, &x.0, &y.0) {
                Some(b) => worst = worst.max((exact - b).abs()),
                None => uncertified += 1,
            }
        }
        let tri = haar_sample(&S2, 300, seed + 100);
        for i in 0..100 {
            let (x, y, z) = (&tri[3 * i], &tri[3 * i + 1], &tri[3 * i + 2]);
            let d = |a: &Point, b: &Point| warped_dist_exact(&level, a, b).unwrap().value;
            if d(x, z) > d(x, y) + d(y, z) + 1e-9 {
                triangle_violations += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && uncertified == 0 && triangle_violations == 0 && secs < 120.0,
        format!(
            "{pairs} pairs, max |exact - brute| = {worst:.2e}, uncertified {uncertified}, \
             triangle violations {triangle_violations}/200, {secs:.1}s"
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut violations = 0;
    let mut checked = 0;
    for (seed, t) in [(21u64, 2.0), (22, 8.0)] {
        let level = lps_level(t);
        let pts = haar_sample(&S2, 100, seed);
        for pair in pts.chunks(2) {
            let rho = warped_dist_exact(&level, &pair[0], &pair[1]).unwrap().value;
            checked += 1;
            if rho > t * angle(&pair[0].0, &pair[1].0) + 1e-9 {
                violations += 1;
            }
        }
        for x in &pts {
            for s in 0..level.action.gens.len() {
                let sx = Point(level.action.apply_generator(s, &x.0));
                let rho = warped_dist_exact(&level, x, &sx).unwrap().value;
                checked += 1;
                if rho > 1.0 + 1e-9 {
                    violations += 1;
                }
            }
        }
    }
    outcome(violations == 0, format!("{checked} checks, {violations} violations"))
}

fn criterion_3() -> Outcome {
    let t = 8.0;
    let level = lps_level(t);
    let net = build_net(&S2, 1.0 / t, 31).unwrap();
    let graph = warped_graph_metric(&level, &net).unwrap();
    let tol = graph.tolerance();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let a = rng.random_range(0..net.len());
        let dist = graph.shortest_paths(a);
        for _ in 0..5 {
            let b = rng.random_range(0..net.len());
            let exact = warped_dist_exact(&level, &net.points[a], &net.points[b]).unwrap().value;
            worst = worst.max((dist[b] - exact).abs());
        }
    }
    outcome(
        worst <= tol,
        format!("50 pairs on a {}-point net, worst error {worst:.3} vs allowance 5tR = {tol:.3}", net.len()),
    )
}

fn random_connected(rng: &mut ChaCha8Rng) -> ApproxGraph {
    loop {
        let n = rng.random_range(2..=10);
        let p = rng.random_range(0.2..0.8);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        let g = ApproxGraph::from_edges(n, &edges).unwrap();
        if g.is_connected() {
            return g;
        }
    }
}

/// `min |∂A| / |A|` and `min |∂A| / vol(A)` over nonempty proper subsets,
/// with the smaller side in the denominator.
fn brute_isoperimetry(g: &ApproxGraph) -> (f64, f64) {
    let n = g.vertex_count();
    let deg = g.degrees();
    let total: usize = deg.iter().sum();
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let (mut h, mut phi) = (f64::INFINITY, f64::INFINITY);
    for mask in 1u32..(1 << n) - 1 {
        let inside = |v: usize| mask >> v & 1 == 1;
        let cut = edges.iter().filter(|&&(u, v)| inside(u) != inside(v)).count() as f64;
        let size = mask.count_ones() as usize;
        let vol: usize = (0..n).filter(|&v| inside(v)).map(|v| deg[v]).sum();
        h = h.min(cut / size.min(n - size) as f64);
        phi = phi.min(cut / vol.min(total - vol) as f64);
    }
    (h, phi)
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut graphs: Vec<(String, ApproxGraph)> = (0..50).map(|i| (format!("random {i}"), random_connected(&mut rng))).collect();
    graphs.push(("C4".into(), named::cycle(4)));
    graphs.push(("K4".into(), named::complete(4)));
    graphs.push(("K2".into(), named::complete(2)));
    graphs.push(("P5".into(), named::path(5)));
    let hand = [("C4", 1.0), ("K4", 2.0), ("K2", 1.0)];
    let mut sandwich = 0;
    for (name, g) in &graphs {
        let (h, _) = cheeger_exact(g).unwrap();
        let (phi, _) = conductance_exact(g).unwrap();
        let (bh, bphi) = brute_isoperimetry(g);
        if (h - bh).abs() > 1e-12 || (phi - bphi).abs() > 1e-12 {
            failures.push(format!("{name}: exact search disagrees with brute force"));
        }
        if let Some(&(_, v)) = hand.iter().find(|(n, _)| n == name) {
            if (h - v).abs() > 1e-12 {
                failures.push(format!("{name}: h = {h}, expected {v}"));
            }
        }
        let l2 = laplacian_spectrum(g, 2).unwrap().lambda2();
        let dmax = *g.degrees().iter().max().unwrap() as f64;
        let tol = 1e-9;
        if !(l2 / 2.0 <= phi + tol && phi <= (2.0 * l2).sqrt() + tol && phi <= h + tol && h <= dmax * phi + tol) {
            sandwich += 1;
        }
    }
    let l2 = |g: &ApproxGraph| laplacian_spectrum(g, 2).unwrap().lambda2();
    let c4 = l2(&named::cycle(4));
    let k4 = l2(&named::complete(4));
    if (c4 - 1.0).abs() > 1e-8 {
        failures.push(format!("lambda2(C4) = {c4}"));
    }
    if (k4 - 4.0 / 3.0).abs() > 1e-8 {
        failures.push(format!("lambda2(K4) = {k4}"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && sandwich == 0 && secs < 60.0,
        format!(
            "{} graphs, sandwich violations {sandwich}, lambda2(C4) = {c4:.10}, lambda2(K4) = {k4:.10}, {secs:.1}s{}",
            graphs.len(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn level_config(model: &str, library: &str, threshold: usize) -> config::ExperimentConfig {
    let text = format!(
        "name = \"acceptance\"\nmodel = \"{model}\"\n[generators]\nlibrary = \"{library}\"\n\
         [samples]\nper_region = 100\nedge_threshold = {threshold}\n[seeds]\nnet = 1\nsamples = 2\n"
    );
    config::parse(&text).unwrap().config
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let cfg = level_config("sphere:3", "lps-s2", 2);
    let action = cfg.action().unwrap();
    let mut lambdas = Vec::new();
    let mut degrees = Vec::new();
    let mut connected = true;
    let mut parts = Vec::new();
    for (i, t) in [4.0, 8.0, 16.0, 32.0].into_iter().enumerate() {
        let level = build_level(&cfg, &action, t, pipeline::sample_seed(&cfg, i)).unwrap();
        let spec = laplacian_spectrum(&level.graph, 2).unwrap();
        let dmax = *level.graph.degrees().iter().max().unwrap();
        connected &= level.graph.is_connected();
        lambdas.push(spec.lambda2());
        degrees.push(dmax);
        parts.push(format!("t={t}: |V|={} D={dmax} l2={:.4}", level.graph.vertex_count(), spec.lambda2()));
    }
    let lo = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = lambdas.iter().cloned().fold(0.0, f64::max);
    let dspread = degrees.iter().max().unwrap() - degrees.iter().min().unwrap();

    let ctl = level_config("sphere:2", "rotation-s1", 1);
    let ctl_action = ctl.action().unwrap();
    let l2_at = |t: f64, i: usize| {
        let level = build_level(&ctl, &ctl_action, t, pipeline::sample_seed(&ctl, i)).unwrap();
        laplacian_spectrum(&level.graph, 2).unwrap().lambda2()
    };
    let (c8, c256) = (l2_at(8.0, 0), l2_at(256.0, 1));
    let secs = start.elapsed().as_secs_f64();
    let pass = connected && dspread <= 2 && lo >= 0.01 && hi / lo <= 3.0 && c256 <= c8 / 4.0 && secs < 900.0;
    outcome(
        pass,
        format!(
            "{}; connected {connected}, degree spread {dspread}, max/min l2 = {:.3}; \
             control l2(t=256) = {c256:.5} vs l2(t=8)/4 = {:.5}; {secs:.0}s",
            parts.join(", "),
            hi / lo,
            c8 / 4.0
        ),
    )
}

fn criterion_6() -> Outcome {
    let id = ControlFunctions::identity();
    let a = embedding_obstruction(2048, 2.0, 4, 1.0, &id).unwrap();
    let b = embedding_obstruction(2048, 2.0, 4, 2.0, &id).unwrap();
    let c = embedding_obstruction(4, 2.0, 4, 1.0, &id).unwrap();
    let pass = a.lower_bound == Some(0.875) && b.verdict == Verdict::Contradiction && c.verdict == Verdict::Undefined;
    outcome(
        pass,
        format!(
            "L = {:?}, verdict at epsilon 2: {}, |P| = 2Q: {}",
            a.lower_bound,
            b.verdict.name(),
            c.verdict.name()
        ),
    )
}

fn criterion_7() -> Outcome {
    let f8 = {
        let net = build_net(&S2, 1.0 / 8.0, 71).unwrap();
        chi_set(&lps_level(8.0), &net, 1.0, DEFAULT_BALL_CAP).unwrap().fraction
    };
    let f64_ = {
        let net = build_net(&S2, 1.0 / 64.0, 71).unwrap();
        chi_set(&lps_level(64.0), &net, 1.0, DEFAULT_BALL_CAP).unwrap().fraction
    };
    let mut finite = Vec::new();
    for (name, model, gens, order) in [
        ("quarter turn", S1, library::quarter_turn_s1(), 4.0),
        ("cyclic 5", ManifoldModel::Sphere(5), library::cyclic_permutation(5).unwrap(), 5.0),
    ] {
        let level = WarpedLevel::new(ActionSpec::new(model, gens).unwrap(), 16.0).unwrap();
        let net = build_net(&model, 1.0 / 4.0, 72).unwrap();
        let r = order / 6.0;
        let below = chi_set(&level, &net, (order - 1.0) / 6.0, DEFAULT_BALL_CAP).unwrap().fraction;
        let at = chi_set(&level, &net, r, DEFAULT_BALL_CAP).unwrap().fraction;
        finite.push((name, below, at));
    }
    // Inclusions on one net: growing r or shrinking t only adds members.
    let net = build_net(&S2, 1.0 / 16.0, 73).unwrap();
    let ball = group_ball(&library::lps_s2(), chi_radius(1.0), DEFAULT_BALL_CAP).unwrap();
    let sets: Vec<(f64, f64, BTreeSet<usize>)> = [(16.0, 0.5), (16.0, 1.0), (32.0, 0.5), (32.0, 1.0), (8.0, 1.0)]
        .into_iter()
        .map(|(t, r)| (t, r, chi_set_in(&lps_level(t), &net, r, &ball).unwrap().members.into_iter().collect()))
        .collect();
    let mut inclusion_failures = 0;
    let mut inclusion_checks = 0;
    for (t1, r1, a) in &sets {
        for (t2, r2, b) in &sets {
            if (t1, r1) != (t2, r2) && t1 >= t2 && r1 <= r2 {
                inclusion_checks += 1;
                if !a.is_subset(b) {
                    inclusion_failures += 1;
                }
            }
        }
    }
    let finite_ok = finite.iter().all(|&(_, _, at)| at == 1.0);
    outcome(
        f64_ < f8 && finite_ok && inclusion_failures == 0,
        format!(
            "LPS fraction t=8: {f8:.4}, t=64: {f64_:.4}; finite order {}; {inclusion_checks} inclusions, {inclusion_failures} failed",
            finite
                .iter()
                .map(|(n, b, a)| format!("{n} below order {b:.3} at order {a:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn criterion_8() -> Outcome {
    let t = 64.0;
    let r = 2.0;
    let net = build_net(&S2, 1.0 / t, 81).unwrap();
    let allowance = 5.0 * t * net.density_radius;
    let cfg = |seed| BallCheckConfig {
        r,
        l: 1.0,
        a: allowance,
        epsilon: 0.05 + allowance,
        max_pairs: 2000,
        seed,
        cap: DEFAULT_BALL_CAP,
    };

    let trivial = WarpedLevel::new(ActionSpec::new(S2, GeneratorSet::trivial(3)).unwrap(), t).unwrap();
    let control = ball_product_check(&trivial, &net, 0, &cfg(82)).unwrap();
    let control_ok = control.distortion == 0.0;

    let level = lps_level(t);
    let ball = group_ball(&library::lps_s2(), chi_radius(r), DEFAULT_BALL_CAP).unwrap();
    let chi = chi_set_in(&level, &net, r, &ball).unwrap();
    match select_base_point(&level, &net, &chi, &ball, 64) {
        Ok(base) => {
            let rep = ball_product_check(&level, &net, base.index, &cfg(83)).unwrap();
            outcome(
                rep.distortion <= 0.05 + allowance && control_ok,
                format!(
                    "x0 = {} (margin {:.4}), ball {} points, distortion {:.4} vs {:.4}; trivial control distortion {}",
                    base.index,
                    base.margin,
                    rep.ball_size,
                    rep.distortion,
                    0.05 + allowance,
                    control.distortion
                ),
            )
        }
        Err(Error::Singular { witness, displacement }) => Outcome {
            pass: false,
            detail: format!(
                "no base point: chi covers {:.4} of the {}-point net (|B(12)| = {}; e.g. word {} moves a point by {displacement:.3e} <= 6r/t = {:.4}); \
                 trivial control distortion {}",
                chi.fraction,
                net.len(),
                ball.len(),
                witness.concat(),
                chi.threshold,
                control.distortion
            ),
            expected_failure: control_ok && chi.fraction == 1.0,
        },
        Err(e) => outcome(false, format!("unexpected error: {e}")),
    }
}

/// Ball sizes of the free group on `k` generators, by listing reduced words.
fn free_ball_sizes(k: usize, r: usize) -> Vec<usize> {
    let mut sizes = vec![1usize];
    let mut layer: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..r {
        let mut next = Vec::new();
        for w in &layer {
            for s in 0..2 * k {
                if w.last().is_some_and(|&l| l ^ 1 == s) {
                    continue;
                }
                let mut v = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        sizes.push(sizes.last().unwrap() + next.len());
        layer = next;
    }
    sizes
}

/// `|{(γ, v) : |γ| + |v|₁ <= r}|` by listing lattice points in a box.
fn brute_product(gamma_lengths: &[usize], m: usize, r: usize) -> u128 {
    let side = 2 * r + 1;
    let mut count = 0u128;
    for &len in gamma_lengths {
        if len > r {
            continue;
        }
        for code in 0..side.pow(m as u32) {
            let mut c = code;
            let mut norm = 0;
            for _ in 0..m {
                norm += (c % side).abs_diff(r);
                c /= side;
            }
            if len + norm <= r {
                count += 1;
            }
        }
    }
    count
}

fn criterion_9() -> Outcome {
    let r_max = 5;
    let lengths_of = |sizes: &[usize]| -> Vec<usize> {
        let mut out = Vec::new();
        let mut prev = 0;
        for (k, &s) in sizes.iter().enumerate() {
            out.extend(std::iter::repeat_n(k, s - prev));
            prev = s;
        }
        out
    };
    let groups: Vec<(&str, Vec<usize>)> = vec![
        ("trivial", vec![1; r_max + 1]),
        ("Z", (0..=r_max).map(|k| 2 * k + 1).collect()),
        ("free-2", free_ball_sizes(2, r_max)),
    ];
    let mut checks = 0;
    let mut mismatches = Vec::new();
    for (name, sizes) in &groups {
        let lengths = lengths_of(sizes);
        for m in 0..=2 {
            for r in 0..=r_max {
                let got = product_ball_size(&sizes[..=r], m, r).unwrap();
                let want = brute_product(&lengths, m, r);
                checks += 1;
                if got != want {
                    mismatches.push(format!("{name} x Z^{m} r={r}: {got} vs {want}"));
                }
            }
        }
    }
    let z2 = product_ball_size(&[1, 1, 1], 2, 2).unwrap();
    let f2z = product_ball_size(&free_ball_sizes(2, 2), 1, 2).unwrap();
    outcome(
        mismatches.is_empty() && z2 == 13 && f2z == 29,
        format!("{checks} sizes, {} mismatches; |B_Z2(2)| = {z2}, free-2 x Z at r=2: {f2z}", mismatches.len()),
    )
}

fn criterion_10() -> Outcome {
    let targets = [100, 500, 1000];
    let entries = cardinality_schedule(&S2, &targets, 101, &NetOptions::default()).unwrap();
    let action = ActionSpec::new(S2, library::lps_s2()).unwrap();
    let mut counts = Vec::new();
    for e in &entries {
        let part = voronoi_partition(&e.net, 100 * e.net.len(), 102).unwrap();
        counts.push(approx_graph(&action, &part, 1).unwrap().vertex_count());
    }
    let sizes: Vec<BigUint> = factorial_sizes(32);
    let cert = subsequence_separation(&sizes, 3, 2).unwrap();
    let holding = cert.pairs.iter().filter(|p| p.holds).count();
    outcome(
        counts == targets && cert.n0 == BigUint::from(27u32) && !cert.pairs.is_empty(),
        format!(
            "graph sizes {counts:?}; n0 = {}, {} selected, {} pair verdicts ({holding} hold)",
            cert.n0,
            cert.selected.len(),
            cert.pairs.len()
        ),
    )
}

fn demo_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/demo-s1.toml")
}

fn criterion_11() -> Outcome {
    let loaded = config::load(&demo_config()).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut trees = Vec::new();
    for d in &dirs {
        let o = Overrides {
            out_dir: Some(d.path().to_path_buf()),
            ..Overrides::default()
        };
        pipeline::run(&loaded, &o).unwrap();
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(d.path())
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        trees.push(files);
    }
    let differing = trees[0].iter().zip(&trees[1]).filter(|(a, b)| a != b).count();
    outcome(
        trees[0].len() == trees[1].len() && differing == 0,
        format!("{} files per run, {differing} differ", trees[0].len()),
    )
}

/// Criteria whose failure is analysed and expected; see the project notes.
const KNOWN_UNATTAINABLE: &[u32] = &[8];

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "warped-metric exactness", criterion_1),
        (2, "defining constraints", criterion_2),
        (3, "discretization bound", criterion_3),
        (4, "spectral and Cheeger oracles", criterion_4),
        (5, "expander run", criterion_5),
        (6, "obstruction certificate arithmetic", criterion_6),
        (7, "singular-set behaviour", criterion_7),
        (8, "ball-product structure", criterion_8),
        (9, "product-ball convolution", criterion_9),
        (10, "cardinality scheduling", criterion_10),
        (11, "determinism", criterion_11),
    ];
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name}: {}", o.detail);
        if !o.pass && !(KNOWN_UNATTAINABLE.contains(&id) && o.expected_failure) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
