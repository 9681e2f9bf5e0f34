use fiber_core::bodies::{sphere_sample, BodySpec, ProjectionSplit, SphereSampling};
use fiber_core::linalg::dot;
use fiber_core::puffed::{elliptope_fiber_closed, puffed_eval, puffed_radial, FacetSystem};
use fiber_core::slicer::{fiber_support_numeric, QuadratureRule};
use proptest::prelude::*;

fn octagon_sextic(x: f64, y: f64) -> f64 {
    2.0 * x.powi(6) + 7.0 * x.powi(4) * y * y + 7.0 * x * x * y.powi(4) + 2.0 * y.powi(6)
        - 88.0 * x.powi(4)
        - 193.0 * x * x * y * y
        - 88.0 * y.powi(4)
        + 918.0 * x * x
        + 918.0 * y * y
        - 2592.0
}

fn polytope_radial(fs: &FacetSystem, d: &[f64]) -> f64 {
    fs.facets
        .iter()
        .filter_map(|f| {
            let s = dot(&f.normal, d);
            (s > 0.0).then(|| f.offset / s)
        })
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn order_zero_is_the_facet_product(p in prop::collection::vec(-3.0f64..3.0, 3)) {
        let fs = FacetSystem::tetrahedron(0);
        let direct: f64 = fs.facets.iter().map(|f| dot(&f.normal, &p) - f.offset).product();
        let v = puffed_eval(&fs, &p);
        prop_assert!((v - direct).abs() <= 1e-12 * direct.abs().max(1e-300), "{v} vs {direct}");
        let sq = FacetSystem::octagon(0);
        let direct: f64 = sq.facets.iter().map(|f| dot(&f.normal, &p[..2]) - f.offset).product();
        prop_assert!((puffed_eval(&sq, &p[..2]) - direct).abs() <= 1e-12 * direct.abs().max(1e-300));
    }

    #[test]
    fn octagon_derivative_is_the_sextic(x in -4.0f64..4.0, y in -4.0f64..4.0) {
        let want = -4.0 * octagon_sextic(x, y);
        let v = puffed_eval(&FacetSystem::octagon(1), &[x, y]);
        prop_assert!((v - want).abs() <= 1e-9 * want.abs().max(1.0), "{v} vs {want}");
    }
}

#[test]
fn puffed_tetrahedron_is_the_elliptope() {
    let fs = FacetSystem::tetrahedron(1);
    for d in sphere_sample(3, 64, SphereSampling::SeededRandom(12)) {
        let r = puffed_radial(&fs, &d).unwrap();
        let q = |t: f64| {
            let [x, y, z] = [t * d[0], t * d[1], t * d[2]];
            x * x + y * y + z * z - 2.0 * x * y * z - 1.0
        };
        assert!(q(r).abs() < 1e-9, "{d:?}: q = {}", q(r));
        assert!(q(r * (1.0 - 1e-6)) < 0.0);
    }
}

#[test]
fn slicer_matches_elliptope_closed_form() {
    let split = ProjectionSplit::coordinate(1, 2).unwrap();
    let rule = QuadratureRule::gauss(64);
    for u in sphere_sample(2, 32, SphereSampling::UniformGrid) {
        let h = fiber_support_numeric(&BodySpec::Elliptope {}, &split, &u, &rule).unwrap();
        let c = elliptope_fiber_closed(&u).unwrap();
        assert!((h - c).abs() <= 1e-3 * (1.0 + c.abs()), "{u:?}: {h} vs {c}");
    }
}

#[test]
fn puffed_contains_the_polytope() {
    let systems = [
        FacetSystem::square(1.0, 1),
        FacetSystem::octagon(1),
        FacetSystem::tetrahedron(1),
        FacetSystem::cube(1.0, 3, 1),
        FacetSystem::cube(1.0, 3, 2),
    ];
    for fs in &systems {
        for d in sphere_sample(fs.dim(), 64, SphereSampling::SeededRandom(1)) {
            let r = puffed_radial(fs, &d).unwrap();
            assert!(r >= polytope_radial(fs, &d) - 1e-12, "{d:?}");
        }
    }
}

#[test]
fn puffing_is_not_additive() {
    let fs = FacetSystem::octagon(1);
    let target = 1.0 + 2f64.sqrt();
    let worst = sphere_sample(2, 64, SphereSampling::UniformGrid)
        .iter()
        .map(|d| (puffed_radial(&fs, d).unwrap() - target).abs())
        .fold(0.0, f64::max);
    assert!(worst > 0.01, "{worst}");
}
