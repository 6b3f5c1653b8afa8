use std::collections::BTreeSet;
use std::sync::OnceLock;

use proptest::prelude::*;
use warpcone_core::algebra::{group_ball, library, DEFAULT_BALL_CAP};
use warpcone_core::coarse::{chi_radius, chi_set_in};
use warpcone_core::graph::ApproxGraph;
use warpcone_core::manifold::{ManifoldModel, Point};
use warpcone_core::net::{build_net, Net};
use warpcone_core::spectral::{
    averaged_gap, cheeger_exact, conductance_exact, embedding_obstruction, laplacian_spectrum, Control,
    ControlFunctions, TransitionMatrix, Verdict,
};
use warpcone_core::warped::{warped_dist_exact, ActionSpec, WarpedLevel};

const S2: ManifoldModel = ManifoldModel::Sphere(3);

fn unit3() -> impl Strategy<Value = Point> {
    (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, a)| {
        let s = (1.0 - z * z).sqrt();
        Point(vec![s * a.cos(), s * a.sin(), z])
    })
}

fn lps(t: f64) -> WarpedLevel {
    WarpedLevel::new(ActionSpec::new(S2, library::lps_s2()).unwrap(), t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn warped_metric_axioms(x in unit3(), y in unit3(), z in unit3(), t in 1.0f64..4.0) {
        let level = lps(t);
        let d = |a: &Point, b: &Point| warped_dist_exact(&level, a, b).unwrap().value;
        let (xy, yx, xz, yz) = (d(&x, &y), d(&y, &x), d(&x, &z), d(&y, &z));
        prop_assert!(d(&x, &x).abs() < 1e-12);
        prop_assert!((xy - yx).abs() < 1e-9);
        prop_assert!(xz <= xy + yz + 1e-9);
        prop_assert!(xy <= t * S2.dist(&x.0, &y.0) + 1e-12);
        prop_assert!(xy >= 0.0);
    }
}

fn graph_strategy() -> impl Strategy<Value = ApproxGraph> {
    (3usize..=9)
        .prop_flat_map(|n| (Just(n), proptest::collection::vec(any::<bool>(), n * (n - 1) / 2)))
        .prop_filter_map("connected", |(n, bits)| {
            let mut edges = Vec::new();
            let mut k = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[k] {
                        edges.push((u, v));
                    }
                    k += 1;
                }
            }
            let g = ApproxGraph::from_edges(n, &edges).unwrap();
            g.is_connected().then_some(g)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cheeger_sandwich(g in graph_strategy()) {
        let l2 = laplacian_spectrum(&g, 2).unwrap().lambda2();
        let (h, _) = cheeger_exact(&g).unwrap();
        let (phi, _) = conductance_exact(&g).unwrap();
        let dmax = *g.degrees().iter().max().unwrap() as f64;
        prop_assert!(l2 / 2.0 <= phi + 1e-9);
        prop_assert!(phi <= (2.0 * l2).sqrt() + 1e-9);
        prop_assert!(phi <= h + 1e-12);
        prop_assert!(h <= dmax * phi + 1e-9);
    }
}

/// Random row-stochastic matrices on `n` regions with random positive measures.
fn chain_strategy() -> impl Strategy<Value = (Vec<TransitionMatrix>, Vec<f64>, Vec<usize>)> {
    (2usize..=7).prop_flat_map(|n| {
        let mat = proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, n), n).prop_map(move |w| TransitionMatrix {
            rows: w
                .into_iter()
                .map(|row| {
                    let s: f64 = row.iter().sum::<f64>() + 1e-3;
                    row.into_iter().enumerate().map(|(j, a)| (j, (a + 1e-3 / n as f64) / s)).collect()
                })
                .collect(),
        });
        (
            proptest::collection::vec(mat, 1..=3),
            proptest::collection::vec(0.1f64..1.0, n),
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gap_is_invariant_under_relabelling((mats, measures, perm) in chain_strategy()) {
        let total: f64 = measures.iter().sum();
        let measures: Vec<f64> = measures.iter().map(|m| m / total).collect();
        let base = averaged_gap(&mats, &measures).unwrap();
        let n = measures.len();
        let mut inv = vec![0; n];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let relabelled: Vec<TransitionMatrix> = mats
            .iter()
            .map(|m| TransitionMatrix {
                rows: (0..n)
                    .map(|i| m.rows[perm[i]].iter().map(|&(j, a)| (inv[j], a)).collect())
                    .collect(),
            })
            .collect();
        let pm: Vec<f64> = (0..n).map(|i| measures[perm[i]]).collect();
        let other = averaged_gap(&relabelled, &pm).unwrap();
        prop_assert!((base - other).abs() < 1e-7, "{base} vs {other}");
    }
}

fn chi_net() -> &'static Net {
    static NET: OnceLock<Net> = OnceLock::new();
    NET.get_or_init(|| build_net(&S2, 0.2, 5).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn chi_grows_with_r_and_shrinks_with_t(
        t1 in 1.0f64..40.0,
        dt in 0.0f64..40.0,
        r1 in 0.0f64..0.5,
        dr in 0.0f64..0.5,
    ) {
        let net = chi_net();
        let ball = group_ball(&library::lps_s2(), chi_radius(r1 + dr), DEFAULT_BALL_CAP).unwrap();
        let members = |t: f64, r: f64| -> BTreeSet<usize> {
            chi_set_in(&lps(t), net, r, &ball).unwrap().members.into_iter().collect()
        };
        let small = members(t1 + dt, r1);
        prop_assert!(small.is_subset(&members(t1, r1)));
        prop_assert!(small.is_subset(&members(t1 + dt, r1 + dr)));
    }

    #[test]
    fn certificate_is_monotone(
        exp in 2u32..40,
        extra in 0u32..10,
        q in 1.0f64..8.0,
        d in 2u64..12,
        eps in 0.01f64..4.0,
        grow in 1.0f64..4.0,
        slope in 0.1f64..3.0,
    ) {
        let controls = ControlFunctions {
            rho_minus: Control::Affine { slope, intercept: 0.0 },
            rho_plus: Control::Identity,
        };
        let small = embedding_obstruction(1u64 << exp, q, d, eps, &controls).unwrap();
        let big = embedding_obstruction(1u64 << (exp + extra), q, d, eps, &controls).unwrap();
        prop_assert!(big.argument >= small.argument);
        if let (Some(a), Some(b)) = (small.lower_bound, big.lower_bound) {
            prop_assert!(b >= a);
        }
        let wider = embedding_obstruction(1u64 << exp, q, d, eps * grow, &controls).unwrap();
        prop_assert!(wider.upper_bound <= small.upper_bound);
        if small.verdict == Verdict::Contradiction {
            prop_assert_eq!(wider.verdict, Verdict::Contradiction);
        }
    }
}
