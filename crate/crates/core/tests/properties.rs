use num_complex::Complex64;
use num_rational::Ratio;
use proptest::prelude::*;

use pluripot::basis::a_limit;
use pluripot::geometry::Facet;
use pluripot::measure::{bm_constant, bm_constant_on};
use pluripot::{dims, fekete_search, make_grid, ConvexBody, GramSystem, GridSpec, IntervalRule, MultiIndexBasis, WeightSpec};

fn r(n: i128) -> Ratio<i128> {
    Ratio::from_integer(n)
}

fn body_strategy() -> impl Strategy<Value = ConvexBody> {
    prop_oneof![
        (1usize..=3).prop_map(|d| ConvexBody::simplex(d).unwrap()),
        (1usize..=3).prop_map(|d| ConvexBody::unit_box(d).unwrap()),
        (0i128..3, 1i128..4).prop_map(|(a, w)| ConvexBody::interval(r(a), r(a + w)).unwrap()),
        // the pentagon conv{0, 2e1, (2,1), (1,2), 2e2}
        Just(
            ConvexBody::new(
                2,
                vec![vec![r(0), r(0)], vec![r(2), r(0)], vec![r(2), r(1)], vec![r(1), r(2)], vec![r(0), r(2)]],
                Some(vec![
                    Facet::new(vec![r(-1), r(0)], r(0)),
                    Facet::new(vec![r(0), r(-1)], r(0)),
                    Facet::new(vec![r(1), r(0)], r(2)),
                    Facet::new(vec![r(0), r(1)], r(2)),
                    Facet::new(vec![r(1), r(1)], r(3)),
                ]),
            )
            .unwrap()
        ),
    ]
}

fn point_strategy(d: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((0.05f64..6.0, 0.0f64..std::f64::consts::TAU), d)
        .prop_map(|v| v.into_iter().map(|(r, t)| Complex64::from_polar(r, t)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lattice_counts_grow(body in body_strategy(), n in 1u64..12) {
        let a = body.lattice_points(n).unwrap().len();
        let b = body.lattice_points(n + 1).unwrap().len();
        prop_assert!(b > a);
    }

    #[test]
    fn box_ehrhart(d in 1usize..=3, n in 0u64..15) {
        let di = dims(&ConvexBody::unit_box(d).unwrap(), n.max(1)).unwrap();
        let m = n.max(1);
        prop_assert_eq!(di.d_n, (m + 1).pow(d as u32));
        prop_assert_eq!(2 * di.l_n, d as u64 * m * di.d_n);
    }

    #[test]
    fn h_p_phase_invariant(body in body_strategy(), z in point_strategy(3), phases in prop::collection::vec(0.0f64..std::f64::consts::TAU, 3)) {
        let z = &z[..body.dim()];
        let rotated: Vec<Complex64> = z.iter().zip(&phases).map(|(w, t)| w * Complex64::from_polar(1.0, *t)).collect();
        prop_assert!((body.h_p(z) - body.h_p(&rotated)).abs() < 1e-12);
    }

    #[test]
    fn h_p_dominates_log_plus(body in body_strategy(), z in point_strategy(3)) {
        let d = body.dim();
        let z = &z[..d];
        if let Some(k) = body.simplex_inclusion().k {
            let lp = z.iter().map(|w| w.norm().ln().max(0.0)).fold(0.0, f64::max);
            prop_assert!(body.h_p(z) >= lp / k as f64 - 1e-12);
            prop_assert!(body.h_p(z) >= -1e-12);
        }
    }

    #[test]
    fn volume_independent_of_apex(body in body_strategy()) {
        let v0 = body.volume_and_cp_from(0).unwrap();
        for apex in 1..body.vertices().len() {
            prop_assert_eq!(&body.volume_and_cp_from(apex).unwrap(), &v0);
        }
    }

    #[test]
    fn poly_np_inside_scaled_simplex(body in body_strategy(), n in 1u64..10) {
        let a = body.simplex_inclusion().a;
        for alpha in body.lattice_points(n).unwrap() {
            prop_assert!(alpha.iter().map(|&x| x as u64).sum::<u64>() <= a * n);
        }
    }

    #[test]
    fn gram_monotone_in_weight(qs in prop::collection::vec((-1.0f64..1.0, 0.0f64..0.5), 24)) {
        let basis = MultiIndexBasis::new(&ConvexBody::interval(r(0), r(1)).unwrap(), 4).unwrap();
        let grid = make_grid(&GridSpec::Circle { n: 24 }).unwrap();
        let q1: Vec<f64> = qs.iter().map(|p| p.0).collect();
        let q2: Vec<f64> = qs.iter().map(|p| p.0 + p.1).collect();
        let g1 = GramSystem::build(&basis, &grid, &WeightSpec::table(grid.points().to_vec(), q1).unwrap()).unwrap();
        let g2 = GramSystem::build(&basis, &grid, &WeightSpec::table(grid.points().to_vec(), q2).unwrap()).unwrap();
        prop_assert!(g1.logdet() >= g2.logdet() - 1e-12);
    }

    #[test]
    fn bergman_basis_independent(perm_seed in any::<u64>(), z in point_strategy(2)) {
        let body = ConvexBody::simplex(2).unwrap();
        let basis = MultiIndexBasis::new(&body, 3).unwrap();
        let mut perm: Vec<usize> = (0..basis.len()).collect();
        let mut s = perm_seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let grid = make_grid(&GridSpec::Disk { r: 1.2, n_r: 6, n_theta: 9 }).unwrap();
        let grid = pluripot::DiscreteMeasure::new(
            grid.points().iter().flat_map(|p| [vec![p[0], p[0] * 0.7], vec![p[0] * 0.5, p[0].conj()]]).collect(),
            grid.masses().iter().flat_map(|m| [*m, *m]).collect(),
            "disk pairs",
        ).unwrap();
        let w = WeightSpec::Quadratic(0.2);
        let g = GramSystem::build(&basis, &grid, &w).unwrap();
        let gp = GramSystem::build(&basis.reordered(&perm).unwrap(), &grid, &w).unwrap();
        let (a, b) = (g.bergman_eval(&z, true).unwrap(), gp.bergman_eval(&z, true).unwrap());
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-300), "{} vs {}", a, b);
        prop_assert!((g.logdet() - gp.logdet()).abs() < 1e-9);
    }
}

#[test]
fn normalized_ratio_near_limit() {
    for body in [ConvexBody::simplex(2).unwrap(), ConvexBody::unit_box(2).unwrap(), ConvexBody::simplex(3).unwrap()] {
        let f = dims(&body, 50).unwrap().f_n;
        let a = a_limit(&body).unwrap();
        let (f, a) = (*f.numer() as f64 / *f.denom() as f64, *a.numer() as f64 / *a.denom() as f64);
        assert!((f - a).abs() <= 0.02 * a, "f_50 = {f}, limit {a}");
    }
}

#[test]
fn bernstein_markov_constants() {
    let body = ConvexBody::interval(r(0), r(1)).unwrap();
    // the monomial basis loses digits at the endpoints as n grows
    for (n, tol) in [(5u64, 1e-10), (20, 1e-7), (40, 1e-3)] {
        let basis = MultiIndexBasis::new(&body, n).unwrap();
        let circle = make_grid(&GridSpec::Circle { n: 2 * n as usize + 7 }).unwrap();
        let m = bm_constant(&circle, &WeightSpec::Zero, &basis).unwrap();
        assert!((m.m_n - ((n + 1) as f64).sqrt()).abs() < 1e-10);
        assert!(m.m_n.powf(1.0 / n as f64) <= 1.05 || n < 40);

        // arcsine: the maximum over [-1,1] sits at the endpoints
        let arcsine = make_grid(&GridSpec::Interval { a: -1.0, b: 1.0, rule: IntervalRule::Chebyshev, n: 200 }).unwrap();
        let g = GramSystem::build(&basis, &arcsine, &WeightSpec::Zero).unwrap();
        let ends = vec![vec![Complex64::new(-1.0, 0.0)], vec![Complex64::new(1.0, 0.0)]];
        let m = bm_constant_on(&g, &ends).unwrap();
        let exact = ((2 * n + 1) as f64).sqrt();
        assert!((m.m_n - exact).abs() < tol * exact, "n={n}: {} vs {exact}", m.m_n);
        let on_grid = bm_constant(&arcsine, &WeightSpec::Zero, &basis).unwrap();
        assert!(on_grid.m_n <= m.m_n * (1.0 + tol) && on_grid.m_n >= on_grid.lower_bound);
    }
}

#[test]
fn results_independent_of_thread_count() {
    let body = ConvexBody::simplex(2).unwrap();
    let basis = MultiIndexBasis::new(&body, 4).unwrap();
    let grid = make_grid(&GridSpec::Torus { d: 2, n: 11 }).unwrap();
    let w = WeightSpec::Quadratic(0.1);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            let g = GramSystem::build(&basis, &grid, &w).unwrap();
            let f = fekete_search(&grid, &w, &basis, 10).unwrap();
            (g.logdet().to_bits(), g.bergman_on_support().unwrap().iter().map(|b| b.to_bits()).collect::<Vec<_>>(), f.indices, f.log_wvdm.to_bits())
        })
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}
