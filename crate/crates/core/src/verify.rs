//! Invariant checks on computed fiber bodies.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bodies::{sphere_sample, BodySpec, ProjectionSplit, SphereSampling};
use crate::error::{FiberError, Result};
use crate::fiber::{applicable_methods, resolve_method, route_support, FiberOptions, Method};
use crate::linalg::{add, mat_t_vec, scale, unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Homogeneity,
    Symmetry,
    Equivariance,
    Subadditivity,
    Sandwich,
    RouteAgreement,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Homogeneity,
        Suite::Symmetry,
        Suite::Equivariance,
        Suite::Subadditivity,
        Suite::Sandwich,
        Suite::RouteAgreement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Homogeneity => "homogeneity",
            Suite::Symmetry => "symmetry",
            Suite::Equivariance => "equivariance",
            Suite::Subadditivity => "subadditivity",
            Suite::Sandwich => "sandwich",
            Suite::RouteAgreement => "route-agreement",
        }
    }
}

impl FromStr for Suite {
    type Err = FiberError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| FiberError::Input(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub fiber: FiberOptions,
    pub directions: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            fiber: FiberOptions {
                samples: 200_000,
                ..FiberOptions::default()
            },
            directions: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(suite: Suite, name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            suite: suite.name().into(),
            name: name.into(),
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub body: String,
    pub method: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "body: {}  route: {}", self.body, self.method)?;
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<16} {:<40} residual {:.3e}  tolerance {:.3e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite,
                c.name,
                c.residual,
                c.tolerance
            )?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

/// Per-direction tolerance of a route, relative to the value `h`.
fn route_tol(method: Method, h: f64, se: Option<f64>) -> f64 {
    let scale_ref = 1.0 + h.abs();
    match method {
        Method::ClosedForm | Method::ZonoidExact => 1e-9 * scale_ref,
        Method::Curved => 1e-6 * scale_ref,
        Method::Slicer => 1e-3 * scale_ref,
        Method::ZonoidMc => 3.0 * se.unwrap_or(0.0) + 1e-9 * scale_ref,
        Method::Auto => unreachable!("resolved before use"),
    }
}

struct Ctx<'a> {
    body: &'a BodySpec,
    split: &'a ProjectionSplit,
    method: Method,
    opts: &'a VerifyOptions,
    dirs: Vec<Vec<f64>>,
}

impl Ctx<'_> {
    fn eval(&self, body: &BodySpec, u: &[f64]) -> Result<(f64, Option<f64>)> {
        route_support(
            body,
            self.split,
            u,
            self.method_for(body)?,
            &self.opts.fiber,
        )
    }

    fn method_for(&self, body: &BodySpec) -> Result<Method> {
        if std::ptr::eq(body, self.body) {
            return Ok(self.method);
        }
        if applicable_methods(body, self.split)?.contains(&self.method) {
            Ok(self.method)
        } else {
            resolve_method(body, self.split, Method::Auto)
        }
    }
}

/// Runs the requested suites with one route (the requested method, or the
/// automatic choice).
pub fn verify(
    body: &BodySpec,
    split: &ProjectionSplit,
    suites: &[Suite],
    opts: &VerifyOptions,
) -> Result<Report> {
    body.validate()?;
    let method = resolve_method(body, split, opts.fiber.method)?;
    let dirs = sphere_sample(
        split.m(),
        opts.directions.max(2),
        SphereSampling::UniformGrid,
    );
    let ctx = Ctx {
        body,
        split,
        method,
        opts,
        dirs,
    };
    let mut checks = Vec::new();
    for &s in suites {
        checks.extend(match s {
            Suite::Homogeneity => homogeneity(&ctx)?,
            Suite::Symmetry => symmetry(&ctx)?,
            Suite::Equivariance => equivariance(&ctx)?,
            Suite::Subadditivity => subadditivity(&ctx)?,
            Suite::Sandwich => sandwich(&ctx)?,
            Suite::RouteAgreement => route_agreement(&ctx)?,
        });
    }
    Ok(Report {
        body: body.kind().into(),
        method: method.name().into(),
        checks,
    })
}

fn homogeneity(ctx: &Ctx) -> Result<Vec<Check>> {
    let n = ctx.split.n() as i32;
    let mut out = Vec::new();
    for lambda in [0.5, 2.0] {
        let scaled = BodySpec::scaled(lambda, ctx.body.clone());
        let factor = lambda * f64::abs(lambda).powi(n);
        let (mut res, mut tol) = (0.0f64, f64::INFINITY);
        for u in &ctx.dirs {
            let (a, sa) = ctx.eval(&scaled, u)?;
            let (b, sb) = ctx.eval(ctx.body, u)?;
            res = res.max((a - factor * b).abs());
            let se = match (sa, sb) {
                (Some(x), Some(y)) => Some(x + factor * y),
                _ => None,
            };
            tol = tol.min(3.0 * route_tol(ctx.method, factor * b, se));
        }
        out.push(Check::new(
            Suite::Homogeneity,
            format!("lambda = {lambda}: factor {factor}"),
            res,
            tol,
        ));
    }
    Ok(out)
}

fn symmetry(ctx: &Ctx) -> Result<Vec<Check>> {
    let (mut res, mut tol) = (0.0f64, f64::INFINITY);
    for u in &ctx.dirs {
        let (a, _) = ctx.eval(ctx.body, u)?;
        let (b, _) = ctx.eval(ctx.body, &scale(u, -1.0))?;
        res = res.max((a - b).abs());
        let t = match ctx.method {
            // the estimator is even in u sample by sample
            Method::ZonoidMc | Method::ClosedForm | Method::ZonoidExact => 1e-12 * (1.0 + a.abs()),
            _ => 1e-6 * (1.0 + a.abs()),
        };
        tol = tol.min(t);
    }
    Ok(vec![Check::new(Suite::Symmetry, "h(u) = h(-u)", res, tol)])
}

fn random_matrix(rng: &mut ChaCha8Rng, k: usize) -> (Vec<Vec<f64>>, f64) {
    loop {
        let g: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..k).map(|_| rng.random_range(-1.5..1.5)).collect())
            .collect();
        let cols: Vec<Vec<f64>> = (0..k).map(|j| (0..k).map(|i| g[i][j]).collect()).collect();
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        let det = crate::linalg::det_columns(&refs);
        if det.abs() >= 0.25 {
            return (g, det);
        }
    }
}

fn equivariance(ctx: &Ctx) -> Result<Vec<Check>> {
    let (n, m) = (ctx.split.n(), ctx.split.m());
    let d = n + m;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.opts.fiber.seed ^ 0xe9_1a);
    let mut out = Vec::new();
    for trial in 0..2 {
        let (gn, det_n) = random_matrix(&mut rng, n);
        let (gm, _) = random_matrix(&mut rng, m);
        // T = B (g_n ⊕ g_m) Bᵀ with B = [basis_V | basis_W]
        let bv = ctx.split.basis_v();
        let bw = ctx.split.basis_w();
        let t: Vec<Vec<f64>> = (0..d)
            .map(|r| {
                (0..d)
                    .map(|c| {
                        let mut s = 0.0;
                        for i in 0..n {
                            for j in 0..n {
                                s += bv[i][r] * gn[i][j] * bv[j][c];
                            }
                        }
                        for i in 0..m {
                            for j in 0..m {
                                s += bw[i][r] * gm[i][j] * bw[j][c];
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        let image = BodySpec::linear_image(t, ctx.body.clone());
        let (mut res, mut tol) = (0.0f64, f64::INFINITY);
        for u in &ctx.dirs {
            let (a, sa) = ctx.eval(&image, u)?;
            let (b, sb) = ctx.eval(ctx.body, &mat_t_vec(&gm, u))?;
            let expect = det_n.abs() * b;
            res = res.max((a - expect).abs());
            let se = match (sa, sb) {
                (Some(x), Some(y)) => 3.0 * (x + det_n.abs() * y),
                _ => 0.0,
            };
            tol = tol.min(1e-2 * (1.0 + expect.abs()) + se);
        }
        out.push(Check::new(
            Suite::Equivariance,
            format!("trial {trial}: |det g_n| = {:.4}", det_n.abs()),
            res,
            tol,
        ));
    }
    Ok(out)
}

fn subadditivity(ctx: &Ctx) -> Result<Vec<Check>> {
    let m = ctx.split.m();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.opts.fiber.seed ^ 0x5ab);
    let (mut res, mut tol) = (f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..32 {
        let u: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let (hu, _) = ctx.eval(ctx.body, &u)?;
        let (hv, _) = ctx.eval(ctx.body, &v)?;
        let (huv, _) = ctx.eval(ctx.body, &add(&u, &v))?;
        res = res.max(huv - hu - hv);
        let t = match ctx.method {
            // the estimator is a finite sum of segments for a fixed seed
            Method::ZonoidMc | Method::ZonoidExact | Method::ClosedForm => {
                1e-9 * (1.0 + hu.abs() + hv.abs())
            }
            _ => 1e-6 * (1.0 + hu.abs() + hv.abs()),
        };
        tol = tol.min(t);
    }
    Ok(vec![Check::new(
        Suite::Subadditivity,
        "h(u+v) - h(u) - h(v)",
        res.max(0.0),
        tol,
    )])
}

fn sandwich(ctx: &Ctx) -> Result<Vec<Check>> {
    let d = ctx.body.dim();
    let mut vertices = Vec::new();
    for w in sphere_sample(d, 6 * d, SphereSampling::Fibonacci) {
        let g = match ctx.body.gradient(&w) {
            Some(g) => g,
            None => crate::bodies::support_gradient(ctx.body, &w, crate::bodies::GRADIENT_STEP)?,
        };
        vertices.push(g);
    }
    let inner = BodySpec::Polytope { vertices };
    let mut gens = Vec::new();
    for i in 0..d {
        let e = unit(d, i);
        let r = ctx
            .body
            .support(&e)?
            .max(ctx.body.support(&scale(&e, -1.0))?);
        gens.push(scale(&e, 2.0 * r));
    }
    let outer = BodySpec::Zonotope { generators: gens };
    let mut lo = (f64::NEG_INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::INFINITY);
    let mi = resolve_method(&inner, ctx.split, Method::Auto)?;
    let mo = resolve_method(&outer, ctx.split, Method::Auto)?;
    for u in &ctx.dirs {
        let (h, se) = ctx.eval(ctx.body, u)?;
        let (hi_in, _) = route_support(&inner, ctx.split, u, mi, &ctx.opts.fiber)?;
        let (h_out, _) = route_support(&outer, ctx.split, u, mo, &ctx.opts.fiber)?;
        let t = route_tol(ctx.method, h, se);
        lo.0 = lo.0.max(hi_in - h);
        lo.1 = lo.1.min(t + route_tol(mi, hi_in, None));
        hi.0 = hi.0.max(h - h_out);
        hi.1 = hi.1.min(t + route_tol(mo, h_out, None));
    }
    Ok(vec![
        Check::new(
            Suite::Sandwich,
            "inscribed polytope <= body",
            lo.0.max(0.0),
            lo.1,
        ),
        Check::new(Suite::Sandwich, "body <= bounding box", hi.0.max(0.0), hi.1),
    ])
}

fn route_agreement(ctx: &Ctx) -> Result<Vec<Check>> {
    let routes = applicable_methods(ctx.body, ctx.split)?;
    let reference = [
        Method::ClosedForm,
        Method::ZonoidExact,
        Method::Curved,
        Method::Slicer,
    ]
    .into_iter()
    .find(|m| routes.contains(m))
    .ok_or_else(|| FiberError::Method {
        method: "route-agreement".into(),
        applicable: routes.iter().map(|m| m.name().to_string()).collect(),
    })?;
    let refs = ctx
        .dirs
        .iter()
        .map(|u| route_support(ctx.body, ctx.split, u, reference, &ctx.opts.fiber))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for &r in routes.iter().filter(|&&r| r != reference) {
        let (mut res, mut tol) = (0.0f64, f64::INFINITY);
        let mut in_se = 0.0f64;
        for (u, (href, _)) in ctx.dirs.iter().zip(&refs) {
            let (h, se) = route_support(ctx.body, ctx.split, u, r, &ctx.opts.fiber)?;
            let gap = (h - href).abs();
            res = res.max(gap);
            let t = match r {
                Method::ZonoidMc => route_tol(r, *href, se),
                Method::Slicer => 1e-2 * (1.0 + href.abs()),
                _ => 1e-3 * (1.0 + href.abs()),
            };
            tol = tol.min(t);
            if let Some(se) = se.filter(|&s| s > 0.0) {
                in_se = in_se.max(gap / se);
            }
        }
        let name = format!("{} vs {}", r.name(), reference.name());
        if r == Method::ZonoidMc {
            out.push(Check::new(
                Suite::RouteAgreement,
                format!("{name} (standard errors)"),
                in_se,
                3.0,
            ));
        } else {
            out.push(Check::new(Suite::RouteAgreement, name, res, tol));
        }
    }
    if out.is_empty() {
        out.push(Check::new(
            Suite::RouteAgreement,
            format!("only {} applies", reference.name()),
            0.0,
            0.0,
        ));
    }
    Ok(out)
}
