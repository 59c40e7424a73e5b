//! Property tests for the structural invariants: metric validity of derived
//! spaces, product projections, nerve monotonicity, and homology sanity.

use ballcurv::generators::{gen_cycle, gen_weighted_tree};
use ballcurv::metric::{
    kuratowski_embed, lp_distance_matrix, product_l1, product_linf, validate_metric,
    DistanceMatrix, MetricExponent, PointCloud,
};
use ballcurv::nerve::{betti_mod2, NerveComplex};
use ballcurv::numeric::within_ulps;
use proptest::prelude::*;

fn cloud_strategy(max_n: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, MetricExponent)> {
    let p = prop_oneof![
        Just(MetricExponent::One),
        Just(MetricExponent::Two),
        Just(MetricExponent::Infinity),
        (1.0f64..4.0).prop_map(MetricExponent::Other),
    ];
    (
        proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 1..4), 2..max_n)
            .prop_map(|rows| {
                // Pad rows to a common dimension.
                let dim = rows.iter().map(Vec::len).max().unwrap();
                rows.into_iter()
                    .map(|mut r| {
                        r.resize(dim, 0.0);
                        r
                    })
                    .collect::<Vec<_>>()
            }),
        p,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_matrices_validate_at_roundoff((rows, p) in cloud_strategy(12)) {
        let cloud = PointCloud::new(rows, p).unwrap();
        let m = lp_distance_matrix(&cloud);
        // tau_rel = 0 up to per-entry round-off of at most 8 ulps.
        let res = validate_metric(m.to_rows(), None, 8.0 * f64::EPSILON);
        prop_assert!(res.is_ok(), "violations: {:?}", res.err().map(|r| r.total));
    }

    #[test]
    fn kuratowski_is_isometric((rows, _p) in cloud_strategy(10), base_pick in 0usize..64) {
        let cloud = PointCloud::new(rows, MetricExponent::Two).unwrap();
        let m = lp_distance_matrix(&cloud);
        // Duplicate points make the matrix a pseudometric; skip those draws.
        let strict = (0..m.n()).all(|i| ((i + 1)..m.n()).all(|j| m.dist(i, j) > 0.0));
        prop_assume!(strict);
        let base = base_pick % m.n();
        let back = lp_distance_matrix(&kuratowski_embed(&m, base).unwrap());
        // Each recomputed entry threads three subtractions at diameter scale,
        // so the round-off budget is absolute in the diameter: 4 ulps of the
        // largest entry, not of each (possibly tiny) entry.
        let slack = 2.0 * f64::EPSILON * m.diameter();
        for i in 0..m.n() {
            for j in 0..m.n() {
                prop_assert!(
                    (m.dist(i, j) - back.dist(i, j)).abs() <= slack,
                    "entry ({i},{j}): {} vs {}",
                    m.dist(i, j),
                    back.dist(i, j)
                );
            }
        }
    }

    #[test]
    fn products_validate_and_project_lipschitz(
        seed_a in 0u64..1000,
        seed_b in 0u64..1000,
        na in 2usize..7,
        nb in 2usize..7,
    ) {
        let a = gen_weighted_tree(na, seed_a, (0.5, 1.5), false).unwrap();
        let b = gen_weighted_tree(nb, seed_b, (0.5, 1.5), false).unwrap();
        for (prod, name) in [
            (product_l1(&a, &b, 64).unwrap(), "l1"),
            (product_linf(&a, &b, 64).unwrap(), "linf"),
        ] {
            prop_assert!(
                validate_metric(prod.to_rows(), None, 1e-9).is_ok(),
                "{name} product failed validation"
            );
            // Projections onto either factor contract distances.
            for i in 0..na {
                for j in 0..nb {
                    for k in 0..na {
                        for l in 0..nb {
                            let dp = prod.dist(i * nb + j, k * nb + l);
                            prop_assert!(a.dist(i, k) <= dp + 1e-12);
                            prop_assert!(b.dist(j, l) <= dp + 1e-12);
                        }
                    }
                }
            }
            // Diameter of the sup-product is the max of the diameters.
            if name == "linf" {
                prop_assert!(within_ulps(prod.diameter(), a.diameter().max(b.diameter()), 0));
            }
        }
    }

    #[test]
    fn nerve_is_monotone_in_radii(nodes in 4usize..9, seed in 0u64..500, bump in 0.05f64..1.0) {
        let c = gen_cycle(nodes, nodes as f64).unwrap();
        let mut rng_radii: Vec<f64> = (0..nodes)
            .map(|i| 0.3 + 0.7 * ((seed as usize + i) % 5) as f64 / 4.0)
            .collect();
        let small = NerveComplex::build_cover(&c, &rng_radii, 3, 1e-9).unwrap();
        for r in &mut rng_radii {
            *r += bump;
        }
        let large = NerveComplex::build_cover(&c, &rng_radii, 3, 1e-9).unwrap();
        for dim in 0..=small.top_dimension() {
            for s in small.simplices(dim) {
                prop_assert!(large.contains(s), "lost {s:?} after inflating radii");
            }
        }
    }

    #[test]
    fn betti_zero_counts_components(nodes in 4usize..10, radius in 0.4f64..3.0) {
        let c = gen_cycle(nodes, nodes as f64).unwrap();
        let nerve = NerveComplex::build_cover(&c, &vec![radius; nodes], 3, 1e-9).unwrap();
        let betti = betti_mod2(&nerve, 1).unwrap();

        // Independent union-find over the 1-skeleton.
        let mut parent: Vec<usize> = (0..nodes).collect();
        fn root(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for e in nerve.simplices(1) {
            let (a, b) = (root(&mut parent, e[0]), root(&mut parent, e[1]));
            if a != b {
                parent[a] = b;
            }
        }
        let components = (0..nodes)
            .filter(|&i| root(&mut parent, i) == i)
            .count();
        prop_assert_eq!(betti[0], components);
    }

    #[test]
    fn euler_characteristic_equals_betti_alternation(nodes in 4usize..9, radius in 0.4f64..2.6) {
        let c = gen_cycle(nodes, nodes as f64).unwrap();
        // dim_cap above any possible simplex dimension so nothing is capped.
        let nerve = NerveComplex::build_cover(&c, &vec![radius; nodes], nodes, 1e-9).unwrap();
        let top = nerve.top_dimension();
        let betti = betti_mod2(&nerve, top).unwrap();
        let chi: i64 = betti
            .iter()
            .enumerate()
            .map(|(q, &b)| if q % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum();
        prop_assert_eq!(chi, nerve.euler_characteristic());
    }
}

#[test]
fn pseudometric_quotient_is_a_strict_metric() {
    // Two copies of each corner of a triangle.
    let base = [[0.0, 3.0, 4.0], [3.0, 0.0, 5.0], [4.0, 5.0, 0.0]];
    let mut rows = vec![vec![0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            rows[i][j] = base[i / 2][j / 2];
        }
    }
    let (m, quotient) = ballcurv::metric::validate_pseudometric(rows, None, 1e-9).unwrap();
    assert_eq!(m.n(), 3);
    assert_eq!(quotient, vec![0, 0, 1, 1, 2, 2]);
    assert!(validate_metric(m.to_rows(), None, 0.0).is_ok());
}

#[test]
fn restriction_and_scaling_compose() {
    let t = gen_weighted_tree(9, 2, (0.5, 1.5), true).unwrap();
    let sub: DistanceMatrix = t.restriction(&[0, 2, 5, 7]);
    assert_eq!(sub.n(), 4);
    assert_eq!(sub.dist(1, 3), t.dist(2, 7));
    let scaled = sub.scaled(4.0);
    assert_eq!(scaled.dist(1, 3), 4.0 * sub.dist(1, 3));
}
