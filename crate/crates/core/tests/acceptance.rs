//! Acceptance criteria, one line each.
//!
//! Runs without the libtest harness so the lines show up in `cargo test`
//! output. Criteria listed with a `conflict` are implemented as stated and
//! expected to fail; they do not fail the run unless `--strict` is passed, and
//! an unexpected pass does. Positional arguments filter by id (`ac4`).

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use fiber_core::bodies::{sphere_sample, BodySpec, ProjectionSplit, SphereSampling};
use fiber_core::curved::{curved_fiber_support, schneider_report, CurvedIntegrand};
use fiber_core::fiber::{compute_fiber, FiberOptions, Method};
use fiber_core::puffed::{
    elliptope_fiber_closed, puffed_eval, puffed_radial, puffed_strict_convexity, FacetSystem,
    Strictness,
};
use fiber_core::slicer::{fiber_support_numeric, strict_convexity_direction, QuadratureRule};
use fiber_core::verify::{verify, Suite, VerifyOptions};
use fiber_core::zonoids::{
    dice_fiber_closed, dice_fiber_exact, elliptic_e, f_pi, fiber_zonotope, lambda_support,
    mixed_fiber_mc_batch, shadow_fiber_support, zonotope_support, RandomVectorModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

struct Criterion {
    id: &'static str,
    budget_s: Option<f64>,
    conflict: Option<&'static str>,
    run: fn() -> Outcome,
}

const CRITERIA: [Criterion; 11] = [
    Criterion {
        id: "AC1",
        budget_s: Some(10.0),
        conflict: None,
        run: ac1_elliptope_slicer,
    },
    Criterion {
        id: "AC2",
        budget_s: None,
        conflict: None,
        run: ac2_fiber_cube,
    },
    Criterion {
        id: "AC3",
        budget_s: Some(30.0),
        conflict: None,
        run: ac3_sandwich,
    },
    Criterion {
        id: "AC4",
        budget_s: Some(60.0),
        conflict: Some(
            "the stated dice closed form is 1/4 of the fiber body; MC and slicer agree on 4x",
        ),
        run: ac4_dice_routes,
    },
    Criterion {
        id: "AC5",
        budget_s: None,
        conflict: Some(
            "the mixed fibers of two coordinate discs are D1 and Lambda, not a quarter of them",
        ),
        run: ac5_mixed_fibers,
    },
    Criterion {
        id: "AC6",
        budget_s: None,
        conflict: None,
        run: ac6_shadow_volume,
    },
    Criterion {
        id: "AC7",
        budget_s: None,
        conflict: None,
        run: ac7_invariance_suites,
    },
    Criterion {
        id: "AC8",
        budget_s: Some(60.0),
        conflict: None,
        run: ac8_schneider,
    },
    Criterion {
        id: "AC9",
        budget_s: None,
        conflict: Some("the derivative of the tetrahedron's facet product is -4(x²+y²+z²-2xyz-1)"),
        run: ac9_puffed_polynomials,
    },
    Criterion {
        id: "AC10",
        budget_s: None,
        conflict: None,
        run: ac10_strict_convexity,
    },
    Criterion {
        id: "AC11",
        budget_s: None,
        conflict: None,
        run: ac11_algebra,
    },
];

fn split12() -> ProjectionSplit {
    ProjectionSplit::coordinate(1, 2).unwrap()
}

fn circle(n: usize) -> Vec<Vec<f64>> {
    sphere_sample(2, n, SphereSampling::UniformGrid)
}

fn ac1_elliptope_slicer() -> Outcome {
    let rule = QuadratureRule::gauss(64);
    let e = BodySpec::Elliptope {};
    let h = |u: &[f64]| fiber_support_numeric(&e, &split12(), u, &rule).unwrap();
    let mut worst: f64 = 0.0;
    let mut formula_gap: f64 = 0.0;
    for u in circle(64) {
        let c = elliptope_fiber_closed(&u).unwrap();
        worst = worst.max((h(&u) - c).abs() / c);
        let (a, b) = (u[0], u[1]);
        if a * b != 0.0 {
            let f = ((a + b).abs().powi(3) - (a - b).abs().powi(3)) / (3.0 * a * b);
            formula_gap = formula_gap.max((f - c).abs());
        }
    }
    let h11 = h(&[1.0, 1.0]);
    let h01 = h(&[0.0, 1.0]);
    let r11 = (h11 - 8.0 / 3.0).abs() / (8.0 / 3.0);
    let r01 = (h01 - 2.0).abs() / 2.0;
    Outcome {
        pass: worst <= 1e-3 && r11 <= 1e-3 && r01 <= 1e-3 && formula_gap <= 1e-12,
        summary: format!("elliptope slicer vs closed form, max rel err {worst:.2e}; h(1,1) = {h11:.7}, h(0,1) = {h01:.7}"),
        details: vec![format!("closed form vs (|u+v|³-|u-v|³)/(3uv): {formula_gap:.1e}")],
    }
}

fn ac2_fiber_cube() -> Outcome {
    let gens = vec![
        vec![2.0, 0.0, 0.0],
        vec![0.0, 2.0, 0.0],
        vec![0.0, 0.0, 2.0],
    ];
    let mut fz = fiber_zonotope(&gens, &split12()).unwrap();
    for g in &mut fz {
        if g.iter().find(|c| **c != 0.0).is_some_and(|c| *c < 0.0) {
            g.iter_mut().for_each(|c| *c = -*c);
        }
    }
    fz.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let gens_ok = fz == vec![vec![4.0, 0.0], vec![0.0, 4.0]];
    let cube = BodySpec::Zonotope { generators: gens };
    let opts = FiberOptions {
        method: Method::ZonoidExact,
        ..FiberOptions::default()
    };
    let s = compute_fiber(&cube, &split12(), &circle(64), &opts).unwrap();
    let worst = s
        .directions
        .iter()
        .zip(&s.values)
        .map(|(u, h)| (h - 2.0 * (u[0].abs() + u[1].abs())).abs())
        .fold(0.0, f64::max);
    Outcome {
        pass: gens_ok && worst <= 1e-12,
        summary: format!("fiber cube generators {fz:?}, max deviation from [-2,2]² {worst:.1e}"),
        details: vec![],
    }
}

fn ac3_sandwich() -> Outcome {
    let dirs = circle(64);
    let opts = FiberOptions::default();
    let chain = [
        BodySpec::tetrahedron(),
        BodySpec::Elliptope {},
        BodySpec::cube(1.0, 3),
    ];
    let fibers: Vec<_> = chain
        .iter()
        .map(|b| compute_fiber(b, &split12(), &dirs, &opts).unwrap())
        .collect();
    let slack = |a: usize, b: usize| {
        fibers[b]
            .values
            .iter()
            .zip(&fibers[a].values)
            .map(|(hi, lo)| hi - lo)
            .fold(f64::INFINITY, f64::min)
    };
    let (s1, s2) = (slack(0, 1), slack(1, 2));
    Outcome {
        pass: s1 >= -1e-3 && s2 >= -1e-3,
        summary: format!(
            "tetrahedron <= elliptope slack {s1:.3e}, elliptope <= cube slack {s2:.3e}"
        ),
        details: vec![format!(
            "routes: {}, {}, {}",
            fibers[0].meta.method, fibers[1].meta.method, fibers[2].meta.method
        )],
    }
}

fn ac4_dice_routes() -> Outcome {
    let dirs = circle(16);
    let model = RandomVectorModel::dice();
    let mc =
        mixed_fiber_mc_batch(&[model.clone(), model], &split12(), &dirs, 1_000_000, 2024).unwrap();
    let rule = QuadratureRule::gauss(64);
    let dice = BodySpec::dice();
    let slicer: Vec<f64> = dirs
        .iter()
        .map(|u| fiber_support_numeric(&dice, &split12(), u, &rule).unwrap())
        .collect();
    let check = |closed: &dyn Fn(&[f64]) -> f64| {
        let mut worst_se: f64 = 0.0;
        let mut worst_slicer: f64 = 0.0;
        for ((u, e), s) in dirs.iter().zip(&mc).zip(&slicer) {
            let c = closed(u);
            worst_se = worst_se.max((e.mean - c).abs() / e.stderr);
            worst_slicer = worst_slicer.max((s - c).abs());
        }
        (worst_se, worst_slicer)
    };
    let (se, sl) = check(&|u| dice_fiber_closed(u).unwrap());
    let h10 = dice_fiber_closed(&[1.0, 0.0]).unwrap();
    let target = 1.0 + PI / 8.0 + 0.5;
    let (se4, sl4) = check(&|u| dice_fiber_exact(u).unwrap());
    let max_se = mc.iter().map(|e| e.stderr).fold(0.0, f64::max);
    Outcome {
        pass: se <= 3.0 && sl <= 1e-2 && (h10 - target).abs() <= 1e-5,
        summary: format!(
            "closed form h(1,0) = {h10:.5}; vs MC {se:.1} SE (limit 3), vs slicer {sl:.3e} (limit 1e-2)"
        ),
        details: vec![
            format!("MC h(1,0) = {:.5} ± {:.1e}, slicer h(1,0) = {:.5}", mc[0].mean, mc[0].stderr, slicer[0]),
            format!("4 x closed form: vs MC {se4:.2} SE, vs slicer {sl4:.2e}; largest SE {max_se:.2e}"),
        ],
    }
}

fn ac5_mixed_fibers() -> Outcome {
    let dirs = sphere_sample(2, 8, SphereSampling::UniformGrid);
    let d1 = RandomVectorModel::disc(vec![1.0, 0.0, 0.0]);
    let d2 = RandomVectorModel::disc(vec![0.0, 1.0, 0.0]);
    let d3 = RandomVectorModel::disc(vec![0.0, 0.0, 1.0]);
    let m12 = mixed_fiber_mc_batch(&[d1, d2.clone()], &split12(), &dirs, 1_000_000, 5).unwrap();
    let m23 = mixed_fiber_mc_batch(&[d2, d3], &split12(), &dirs, 1_000_000, 6).unwrap();
    let worst = |est: &[fiber_core::zonoids::Estimate], f: &dyn Fn(&[f64]) -> f64| {
        dirs.iter()
            .zip(est)
            .map(|(u, e)| (e.mean - f(u)).abs() / e.stderr)
            .fold(0.0, f64::max)
    };
    let disc1 = |u: &[f64]| u[0].hypot(u[1]);
    let lam = |u: &[f64]| lambda_support(u[0], u[1]);
    let q12 = worst(&m12, &|u| 0.25 * disc1(u));
    let q23 = worst(&m23, &|u| 0.25 * lam(u));
    let f12 = worst(&m12, &disc1);
    let f23 = worst(&m23, &lam);

    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let gens: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let exact = fiber_zonotope(&gens, &split12()).unwrap();
    let k = RandomVectorModel::from_body(&BodySpec::Zonotope { generators: gens }).unwrap();
    let kk = mixed_fiber_mc_batch(&[k.clone(), k], &split12(), &dirs, 1_000_000, 7).unwrap();
    let pol = worst(&kk, &|u| zonotope_support(&exact, u));
    Outcome {
        pass: q12 <= 3.0 && q23 <= 3.0 && pol <= 3.0,
        summary: format!(
            "M(D1,D2) vs D1/4 {q12:.1} SE, M(D2,D3) vs Lambda/4 {q23:.1} SE, M(K,K) vs exact fiber {pol:.2} SE"
        ),
        details: vec![
            format!("M(D1,D2)(1,0) = {:.5} ± {:.1e}", m12[0].mean, m12[0].stderr),
            format!("M(D1,D2) vs D1: {f12:.2} SE; M(D2,D3) vs Lambda: {f23:.2} SE"),
        ],
    }
}

fn ac6_shadow_volume() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let dirs = sphere_sample(2, 16, SphereSampling::SeededRandom(6));
    let mut worst: f64 = 0.0;
    for k in 0..5 {
        let gens: Vec<Vec<f64>> = (0..3 + k)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let fz = fiber_zonotope(&gens, &split12()).unwrap();
        for u in &dirs {
            let a = shadow_fiber_support(&gens, &split12(), u).unwrap();
            worst = worst.max((a - zonotope_support(&fz, u)).abs());
        }
    }
    Outcome {
        pass: worst <= 1e-9,
        summary: format!("shadow volume vs exact fiber zonotope on 5 x 16, max gap {worst:.1e}"),
        details: vec![],
    }
}

fn ac7_invariance_suites() -> Outcome {
    let bodies = [
        BodySpec::Elliptope {},
        BodySpec::dice(),
        BodySpec::cube(1.0, 3),
        BodySpec::Schneider { alpha: -0.3 },
    ];
    let suites = [Suite::Homogeneity, Suite::Symmetry, Suite::Equivariance];
    let mut pass = true;
    let mut details = Vec::new();
    let mut checks = 0;
    for b in &bodies {
        let r = verify(b, &split12(), &suites, &VerifyOptions::default()).unwrap();
        checks += r.checks.len();
        pass &= r.all_passed();
        let worst = r
            .checks
            .iter()
            .map(|c| c.residual / c.tolerance)
            .fold(0.0, f64::max);
        details.push(format!(
            "{} ({}): {} checks, {} failed, worst residual/tolerance {worst:.2}",
            b.kind(),
            r.method,
            r.checks.len(),
            r.checks.iter().filter(|c| !c.passed).count()
        ));
    }
    Outcome {
        pass,
        summary: format!("homogeneity, symmetry and equivariance on 4 bodies, {checks} checks"),
        details,
    }
}

fn ac8_schneider() -> Outcome {
    let rule = QuadratureRule::gauss(64);
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    let mut fit_ok = true;
    let mut flagged = true;
    for alpha in [-0.4, -0.3, -0.25] {
        let body = BodySpec::Schneider { alpha };
        for u in circle(16) {
            let ci = CurvedIntegrand::new_unchecked(body.clone(), split12(), u.clone()).unwrap();
            let c = curved_fiber_support(&ci, 64).unwrap();
            let s = fiber_support_numeric(&body, &split12(), &u, &rule).unwrap();
            worst = worst.max((c - s).abs());
        }
        let r = schneider_report(alpha, 32, 64, 64).unwrap();
        fit_ok &= r.fit_residual <= 1e-6;
        flagged &= r.diagnosis.iter().any(|d| d.starts_with("u2^4"));
        details.push(format!(
            "alpha = {alpha}: fit residual {:.1e}",
            r.fit_residual
        ));
        details.extend(r.diagnosis.iter().map(|d| format!("  {d}")));
    }
    Outcome {
        pass: worst <= 1e-3 && fit_ok && flagged,
        summary: format!("curved vs slicer max gap {worst:.2e} on 3 x 16; quartic fit and coefficient report generated"),
        details,
    }
}

fn ac9_puffed_polynomials() -> Outcome {
    let square = FacetSystem::square(1.0, 1);
    let radial = circle(16)
        .iter()
        .map(|d| (puffed_radial(&square, d).unwrap() - SQRT_2).abs())
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let sextic = |x: f64, y: f64| {
        2.0 * x.powi(6) + 7.0 * x.powi(4) * y * y + 7.0 * x * x * y.powi(4) + 2.0 * y.powi(6)
            - 88.0 * x.powi(4)
            - 193.0 * x * x * y * y
            - 88.0 * y.powi(4)
            + 918.0 * x * x
            + 918.0 * y * y
            - 2592.0
    };
    let oct = FacetSystem::octagon(1);
    let mut oct_rel: f64 = 0.0;
    for _ in 0..20 {
        let (x, y) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let want = -4.0 * sextic(x, y);
        oct_rel = oct_rel.max((puffed_eval(&oct, &[x, y]) - want).abs() / want.abs());
    }
    let tet = FacetSystem::tetrahedron(1);
    let (mut plus, mut minus): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let p: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
        let q = p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 2.0 * p[0] * p[1] * p[2] - 1.0;
        let v = puffed_eval(&tet, &p);
        plus = plus.max((v - 4.0 * q).abs());
        minus = minus.max((v + 4.0 * q).abs());
    }
    Outcome {
        pass: radial <= 1e-9 && oct_rel <= 1e-9 && plus <= 1e-9,
        summary: format!(
            "square radial - √2 {radial:.1e}; octagon vs -4·sextic rel {oct_rel:.1e}; tetrahedron vs 4(q) {plus:.2e}"
        ),
        details: vec![format!("tetrahedron vs -4(q): {minus:.1e}")],
    }
}

fn ac10_strict_convexity() -> Outcome {
    use Strictness::*;
    let table = [
        (1, 2, true, Strict),
        (1, 3, false, NotStrict),
        (1, 4, true, NotStrict),
        (2, 2, false, Strict),
        (2, 3, true, Strict),
        (2, 4, false, NotStrict),
        (3, 4, true, Strict),
        (3, 5, true, NotStrict),
        (3, 4, false, Unknown),
    ];
    let table_ok = table
        .iter()
        .all(|&(i, m, simple, want)| puffed_strict_convexity(i, m, simple).unwrap() == want);
    let mut ell_width: f64 = 0.0;
    for u in [[1.0, 0.0], [0.6, 0.8], [0.0, -1.0]] {
        let v = strict_convexity_direction(elliptope_fiber_closed, &u, 16, 1e-4, 1e-5).unwrap();
        ell_width = ell_width.max(v.face_width);
    }
    let fz = fiber_zonotope(
        &[
            vec![2.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ],
        &split12(),
    )
    .unwrap();
    let cube = strict_convexity_direction(
        |u| Ok(zonotope_support(&fz, u)),
        &[1.0, 0.0],
        16,
        1e-4,
        1e-5,
    )
    .unwrap();
    Outcome {
        pass: table_ok && ell_width < 1e-4 && !cube.strict && (cube.face_width - 4.0).abs() <= 0.05,
        summary: format!(
            "9-case table {}; fiber elliptope face width {ell_width:.1e}; fiber cube at (1,0) strict = {}, width {:.4}",
            if table_ok { "matches" } else { "differs" },
            cube.strict,
            cube.face_width
        ),
        details: vec![],
    }
}

fn ac11_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let mut worst: f64 = 0.0;
    for n in [1usize, 2] {
        let split = ProjectionSplit::coordinate(n, 2).unwrap();
        let d = n + 2;
        for _ in 0..100 {
            let mut pts: Vec<Vec<f64>> = (0..=n)
                .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let q: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let eval = |p: &[Vec<f64>]| {
                f_pi(&split, &p.iter().map(Vec::as_slice).collect::<Vec<_>>()).unwrap()
            };
            let base = eval(&pts);
            let slot = rng.random_range(0..=n);
            let mut with_q = pts.clone();
            with_q[slot] = q.clone();
            let fq = eval(&with_q);
            let mut mixed = pts.clone();
            mixed[slot] = pts[slot]
                .iter()
                .zip(&q)
                .map(|(x, y)| a * x + b * y)
                .collect();
            let fm = eval(&mixed);
            for i in 0..base.len() {
                let want = a * base[i] + b * fq[i];
                worst = worst.max((fm[i] - want).abs() / (1.0 + want.abs()));
            }
            pts.swap(0, n);
            let fs = eval(&pts);
            for i in 0..base.len() {
                worst = worst.max((fs[i] + base[i]).abs() / (1.0 + base[i].abs()));
            }
        }
    }
    let e0 = elliptic_e(0.0).unwrap();
    let e1 = elliptic_e(1.0).unwrap();
    // the integrand has period π, so the trapezoid rule over a period converges geometrically
    let k: f64 = 0.5;
    let n = 256;
    let oracle = (0..n)
        .map(|j| (1.0 - (k * (PI * j as f64 / n as f64).sin()).powi(2)).sqrt())
        .sum::<f64>()
        * PI
        / n as f64
        / 2.0;
    let e5 = elliptic_e(k).unwrap();
    Outcome {
        pass: worst <= 1e-12 && e0 == FRAC_PI_2 && e1 == 1.0 && (e5 - oracle).abs() <= 1e-10,
        summary: format!(
            "F_pi skew/multilinear max err {worst:.1e}; E(0) = π/2 {}, E(1) = {e1}, E(0.5) = {e5:.10} (oracle gap {:.1e})",
            e0 == FRAC_PI_2,
            (e5 - oracle).abs()
        ),
        details: vec![],
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for c in &CRITERIA {
            println!("{}: test", c.id);
        }
        return ExitCode::SUCCESS;
    }
    let strict = args.iter().any(|a| a == "--strict");
    let filters: Vec<String> = args
        .iter()
        .filter(|a| !a.starts_with('-'))
        .map(|a| a.to_uppercase())
        .collect();
    let selected: Vec<&Criterion> = CRITERIA
        .iter()
        .filter(|c| filters.is_empty() || filters.iter().any(|f| c.id == f.as_str()))
        .collect();
    let mut bad = 0;
    let mut known = 0;
    println!("\nrunning {} acceptance criteria", selected.len());
    for c in selected {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| Outcome {
            pass: false,
            summary: format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ),
            details: vec![],
        });
        let secs = start.elapsed().as_secs_f64();
        let in_time = c.budget_s.is_none_or(|b| secs < b);
        let pass = outcome.pass && in_time;
        let budget = c.budget_s.map(|b| format!(" of {b} s")).unwrap_or_default();
        println!(
            "{:<5} {}  {} ({secs:.1} s{budget})",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            outcome.summary
        );
        for d in &outcome.details {
            println!("        {d}");
        }
        match (pass, c.conflict) {
            (true, None) => {}
            (false, None) => bad += 1,
            (false, Some(why)) => {
                known += 1;
                println!("        known conflict: {why}");
                if strict {
                    bad += 1;
                }
            }
            (true, Some(_)) => {
                println!("        unexpected pass of a criterion listed as a conflict");
                bad += 1;
            }
        }
    }
    println!("\nacceptance: {bad} unexpected failures, {known} known conflicts\n");
    if bad == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
