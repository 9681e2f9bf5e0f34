use fiber_core::bodies::{sphere_sample, BodySpec, ProjectionSplit, SphereSampling};
use fiber_core::zonoids::{
    f_pi, fiber_zonoid_mc, fiber_zonotope, mixed_fiber_mc, mixed_fiber_mc_batch,
    shadow_fiber_support, zonotope_support, RandomVectorModel,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_generators(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

fn points(n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, d), n + 1)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn f_pi_is_multilinear(
        n in 1usize..=2,
        pts in points(2, 5),
        q in prop::collection::vec(-2.0f64..2.0, 5),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        slot in 0usize..3,
    ) {
        let split = ProjectionSplit::coordinate(n, 2).unwrap();
        let d = n + 2;
        let pts: Vec<Vec<f64>> = pts.into_iter().take(n + 1).map(|p| p[..d].to_vec()).collect();
        let q = &q[..d];
        let slot = slot % (n + 1);
        let eval = |p: &[Vec<f64>]| f_pi(&split, &p.iter().map(Vec::as_slice).collect::<Vec<_>>()).unwrap();
        let mut mixed = pts.clone();
        mixed[slot] = pts[slot].iter().zip(q).map(|(x, y)| a * x + b * y).collect();
        let mut with_q = pts.clone();
        with_q[slot] = q.to_vec();
        let (fp, fq) = (eval(&pts), eval(&with_q));
        let want: Vec<f64> = fp.iter().zip(&fq).map(|(x, y)| a * x + b * y).collect();
        prop_assert!(close(&eval(&mixed), &want, 1e-12));
    }

    #[test]
    fn f_pi_is_skew(n in 1usize..=2, pts in points(2, 4), i in 0usize..3, j in 0usize..3) {
        let split = ProjectionSplit::coordinate(n, 2).unwrap();
        let d = n + 2;
        let pts: Vec<Vec<f64>> = pts.into_iter().take(n + 1).map(|p| p.into_iter().chain([0.5]).take(d).collect()).collect();
        let (i, j) = (i % (n + 1), j % (n + 1));
        prop_assume!(i != j);
        let eval = |p: &[Vec<f64>]| f_pi(&split, &p.iter().map(Vec::as_slice).collect::<Vec<_>>()).unwrap();
        let mut swapped = pts.clone();
        swapped.swap(i, j);
        let neg: Vec<f64> = eval(&pts).iter().map(|x| -x).collect();
        prop_assert!(close(&eval(&swapped), &neg, 1e-12));
    }
}

#[test]
fn shadow_volume_equals_fiber_zonotope() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (n, m) in [(1, 2), (2, 1), (2, 2)] {
        let split = ProjectionSplit::coordinate(n, m).unwrap();
        for count in [n + 1, 4, 6] {
            let gens = random_generators(&mut rng, count, n + m);
            let fz = fiber_zonotope(&gens, &split).unwrap();
            for u in sphere_sample(m, 16, SphereSampling::SeededRandom(count as u64)) {
                let h = zonotope_support(&fz, &u);
                let s = shadow_fiber_support(&gens, &split, &u).unwrap();
                assert!((h - s).abs() <= 1e-9 * (1.0 + h.abs()), "{h} vs {s}");
            }
        }
    }
}

#[test]
fn monte_carlo_agrees_with_exact_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let split = ProjectionSplit::coordinate(1, 2).unwrap();
    let dirs = sphere_sample(2, 16, SphereSampling::UniformGrid);
    for k in 0..5 {
        let gens = random_generators(&mut rng, 2 + k % 5, 3);
        let exact = fiber_zonotope(&gens, &split).unwrap();
        let model = RandomVectorModel::from_body(&BodySpec::Zonotope { generators: gens }).unwrap();
        let models = vec![model; 2];
        let est = mixed_fiber_mc_batch(&models, &split, &dirs, 1_000_000, 100 + k as u64).unwrap();
        for (u, e) in dirs.iter().zip(&est) {
            let h = zonotope_support(&exact, u);
            assert!(
                (e.mean - h).abs() <= 3.0 * e.stderr + 1e-12,
                "body {k} {u:?}: {e:?} vs {h}"
            );
        }
    }
}

#[test]
fn polarization_of_the_mixed_fiber() {
    let split = ProjectionSplit::coordinate(1, 2).unwrap();
    let model = RandomVectorModel::dice();
    for u in sphere_sample(2, 4, SphereSampling::SeededRandom(1)) {
        let mixed =
            mixed_fiber_mc(&[model.clone(), model.clone()], &split, &u, 200_000, 1).unwrap();
        let single = fiber_zonoid_mc(&model, &split, &u, 200_000, 2).unwrap();
        let se = mixed.stderr.hypot(single.stderr);
        assert!(
            (mixed.mean - single.mean).abs() <= 3.0 * se,
            "{mixed:?} vs {single:?}"
        );
    }
}

#[test]
fn monte_carlo_supports_are_even() {
    let split = ProjectionSplit::coordinate(1, 2).unwrap();
    let model = RandomVectorModel::dice();
    for u in sphere_sample(2, 6, SphereSampling::SeededRandom(4)) {
        let neg: Vec<f64> = u.iter().map(|c| -c).collect();
        let a = fiber_zonoid_mc(&model, &split, &u, 1000, 9).unwrap();
        let b = fiber_zonoid_mc(&model, &split, &neg, 1000, 9).unwrap();
        assert_eq!(a, b);
    }
}
