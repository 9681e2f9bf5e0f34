//! Fiber bodies by integrating slice support functions over `π(K)`.
//!
//! Slices are never built explicitly: `h_{K_x}(u) = inf_v [h_K(v ⊕ u) - <v, x>]`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{
    one_sided_derivative_with, project_support, sphere_sample, BodySpec, ProjectionSplit,
    SampleMeta, SampledSupport, SphereSampling,
};
use crate::error::{check_dim, FiberError, Result};
use crate::linalg::{axpy, dot, norm, normalized, scale};
use crate::quadrature::{minimize_convex, GaussLegendre};

pub const DEFAULT_SHRINK: f64 = 1.0 - 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    GaussLegendre,
    TensorGauss,
    MonteCarlo,
}

/// Discretization of `∫_{π(K)} … dx`.
///
/// Gauss kinds use `nodes_per_axis` nodes per axis (radius and angle when
/// `n = 2`); Monte Carlo draws `nodes_per_axis` points in total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub nodes_per_axis: usize,
    pub shrink: f64,
    pub seed: u64,
}

impl QuadratureRule {
    pub fn gauss(nodes: usize) -> Self {
        Self {
            kind: QuadratureKind::GaussLegendre,
            nodes_per_axis: nodes,
            shrink: DEFAULT_SHRINK,
            seed: 0,
        }
    }

    pub fn tensor(nodes: usize) -> Self {
        Self {
            kind: QuadratureKind::TensorGauss,
            ..Self::gauss(nodes)
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Self {
            kind: QuadratureKind::MonteCarlo,
            nodes_per_axis: samples,
            shrink: DEFAULT_SHRINK,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < 2 {
            return Err(FiberError::Validation(format!(
                "quadrature needs at least 2 nodes, got {}",
                self.nodes_per_axis
            )));
        }
        if !(self.shrink > 0.0 && self.shrink <= 1.0) {
            return Err(FiberError::Validation(format!(
                "shrink {} outside (0, 1]",
                self.shrink
            )));
        }
        Ok(())
    }
}

/// A point `x` in V and a direction `u` in W, both in split coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceQuery {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub max_iter: usize,
    pub tol: f64,
}

impl SliceQuery {
    pub fn new(x: Vec<f64>, u: Vec<f64>) -> Self {
        Self {
            x,
            u,
            max_iter: 500,
            tol: 1e-10,
        }
    }
}

/// A slice support value; `converged` is false when the solver budget ran out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceValue {
    pub value: f64,
    pub converged: bool,
}

/// Radial function of `π(K)` about the origin, in V-coordinates (`n = 2`).
///
/// `ρ(e) = inf { h(w) : <w, e> = 1 }`, a convex problem along a line.
fn projection_radial(body: &BodySpec, split: &ProjectionSplit, e: &[f64]) -> Result<f64> {
    let perp = [-e[1], e[0]];
    let mut err = None;
    let m = minimize_convex(
        |s| match project_support(body, split, &axpy(e, s, &perp)) {
            Ok(v) => v,
            Err(x) => {
                err.get_or_insert(x);
                f64::INFINITY
            }
        },
        0.0,
        1.0,
        1e-12,
        500,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(m.value)
}

// Projection interval (n = 1).
fn projection_interval(body: &BodySpec, split: &ProjectionSplit) -> Result<(f64, f64)> {
    Ok((
        -project_support(body, split, &[-1.0])?,
        project_support(body, split, &[1.0])?,
    ))
}

fn check_inside(body: &BodySpec, split: &ProjectionSplit, x: &[f64]) -> Result<()> {
    let inside = match split.n() {
        1 => {
            let (lo, hi) = projection_interval(body, split)?;
            let margin = 1e-12 * (hi - lo).abs().max(f64::MIN_POSITIVE);
            x[0] > lo + margin && x[0] < hi - margin
        }
        2 => {
            let r = norm(x);
            r == 0.0 && projection_radial(body, split, &[1.0, 0.0])? > 0.0
                || r > 0.0
                    && r < projection_radial(body, split, &scale(x, 1.0 / r))? * (1.0 - 1e-12)
        }
        n => return Err(FiberError::UnsupportedDimension(n)),
    };
    if inside {
        Ok(())
    } else {
        Err(FiberError::EmptySlice { x: x.to_vec() })
    }
}

/// `h_{K_x}(u)` by infimal projection.
///
/// `n = 1`: expanding bracket plus golden section. `n = 2`: nested line
/// minimizations (the inner minimum is convex in the outer variable).
pub fn slice_support(
    body: &BodySpec,
    split: &ProjectionSplit,
    q: &SliceQuery,
) -> Result<SliceValue> {
    check_dim(split.ambient_dim(), body.dim())?;
    check_dim(split.n(), q.x.len())?;
    check_dim(split.m(), q.u.len())?;
    if !(q.tol > 0.0) {
        return Err(FiberError::Validation(
            "solver tolerance must be positive".into(),
        ));
    }
    check_inside(body, split, &q.x)?;
    slice_support_unchecked(body, split, &q.x, &q.u, q.tol, q.max_iter)
}

fn slice_support_unchecked(
    body: &BodySpec,
    split: &ProjectionSplit,
    x: &[f64],
    u: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<SliceValue> {
    let step = norm(u).max(1e-3);
    let mut err = None;
    let mut phi = |v: &[f64]| match body.h(&split.embed(v, u)) {
        Ok(h) => h - dot(v, x),
        Err(e) => {
            err.get_or_insert(e);
            f64::INFINITY
        }
    };
    let out = match split.n() {
        1 => {
            let m = minimize_convex(|v| phi(&[v]), 0.0, step, tol, max_iter);
            SliceValue {
                value: m.value,
                converged: m.converged,
            }
        }
        2 => {
            let mut converged = true;
            let m = minimize_convex(
                |v1| {
                    let inner = minimize_convex(|v2| phi(&[v1, v2]), 0.0, step, tol, max_iter);
                    converged &= inner.converged;
                    inner.value
                },
                0.0,
                step,
                tol,
                max_iter,
            );
            SliceValue {
                value: m.value,
                converged: converged && m.converged,
            }
        }
        n => return Err(FiberError::UnsupportedDimension(n)),
    };
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Quadrature nodes in V with weights, including the boundary strips that
/// take the value of the outermost node.
fn integration_nodes(
    body: &BodySpec,
    split: &ProjectionSplit,
    rule: &QuadratureRule,
) -> Result<Vec<(Vec<f64>, f64)>> {
    rule.validate()?;
    let s = rule.shrink;
    let k = rule.nodes_per_axis;
    match split.n() {
        1 => {
            let (lo, hi) = projection_interval(body, split)?;
            if hi - lo <= 0.0 {
                return Ok(Vec::new());
            }
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo) * s;
            let (a, b) = (mid - half, mid + half);
            let strip = 0.5 * (hi - lo) * (1.0 - s);
            let mut nodes: Vec<(f64, f64)> = match rule.kind {
                QuadratureKind::MonteCarlo => {
                    let mut rng = ChaCha8Rng::seed_from_u64(rule.seed);
                    let mut xs: Vec<f64> = (0..k).map(|_| rng.random_range(a..b)).collect();
                    xs.sort_by(f64::total_cmp);
                    xs.into_iter().map(|x| (x, (b - a) / k as f64)).collect()
                }
                _ => GaussLegendre::new(k).mapped(a, b),
            };
            if strip > 0.0 {
                nodes.push((a, strip));
                nodes.push((b, strip));
            }
            Ok(nodes.into_iter().map(|(x, w)| (vec![x], w)).collect())
        }
        2 => {
            let mut out = Vec::new();
            let angles: Vec<(f64, f64)> = match rule.kind {
                QuadratureKind::MonteCarlo => Vec::new(),
                _ => GaussLegendre::new(k).mapped(0.0, TAU),
            };
            if rule.kind == QuadratureKind::MonteCarlo {
                let mut rng = ChaCha8Rng::seed_from_u64(rule.seed);
                for _ in 0..k {
                    let phi = rng.random_range(0.0..TAU);
                    let e = [phi.cos(), phi.sin()];
                    let rho = projection_radial(body, split, &e)?;
                    let r = s * rho * rng.random::<f64>().sqrt();
                    // uniform in the shrunken sector: weight = area / count
                    out.push((scale(&e, r), TAU * (s * rho).powi(2) / 2.0 / k as f64));
                    let strip_area = TAU * rho * rho * (1.0 - s * s) / 2.0 / k as f64;
                    if strip_area > 0.0 {
                        out.push((scale(&e, s * rho), strip_area));
                    }
                }
                return Ok(out);
            }
            let radial = GaussLegendre::new(k);
            for (phi, wphi) in angles {
                let e = [phi.cos(), phi.sin()];
                let rho = projection_radial(body, split, &e)?;
                if rho <= 0.0 {
                    continue;
                }
                for (r, wr) in radial.mapped(0.0, s * rho) {
                    out.push((scale(&e, r), wphi * wr * r));
                }
                let strip = rho * rho * (1.0 - s * s) / 2.0;
                if strip > 0.0 {
                    out.push((scale(&e, s * rho), wphi * strip));
                }
            }
            Ok(out)
        }
        n => Err(FiberError::UnsupportedDimension(n)),
    }
}

/// Value of a slice integral with convergence bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceIntegral {
    pub value: f64,
    /// Nodes whose minimization ran out of budget.
    pub unconverged: usize,
    /// Nodes on an empty slice, replaced by the previous node's value.
    pub skipped: usize,
}

fn integrate_nodes<F>(nodes: &[(Vec<f64>, f64)], f: F) -> Result<SliceIntegral>
where
    F: Fn(&[f64]) -> Result<SliceValue> + Sync,
{
    let vals: Vec<Result<SliceValue>> = nodes.par_iter().map(|(x, _)| f(x)).collect();
    let mut total = 0.0;
    let mut unconverged = 0;
    let mut skipped = 0;
    let mut last: Option<f64> = None;
    for (v, (_, w)) in vals.into_iter().zip(nodes) {
        let y = match v {
            Ok(sv) => {
                unconverged += usize::from(!sv.converged);
                sv.value
            }
            Err(FiberError::EmptySlice { .. }) => {
                skipped += 1;
                last.unwrap_or(0.0)
            }
            Err(e) => return Err(e),
        };
        last = Some(y);
        total += w * y;
    }
    Ok(SliceIntegral {
        value: total,
        unconverged,
        skipped,
    })
}

/// `∫_{π(K)} h_{K_x}(u) dx` with bookkeeping.
pub fn fiber_support_report(
    body: &BodySpec,
    split: &ProjectionSplit,
    u: &[f64],
    rule: &QuadratureRule,
) -> Result<SliceIntegral> {
    check_dim(split.ambient_dim(), body.dim())?;
    check_dim(split.m(), u.len())?;
    if !(1..=2).contains(&split.n()) {
        return Err(FiberError::UnsupportedDimension(split.n()));
    }
    if u.iter().all(|&c| c == 0.0) {
        return Ok(SliceIntegral {
            value: 0.0,
            unconverged: 0,
            skipped: 0,
        });
    }
    let nodes = integration_nodes(body, split, rule)?;
    integrate_nodes(&nodes, |x| {
        slice_support_unchecked(body, split, x, u, 1e-10, 500)
    })
}

/// `h_{Σπ K}(u)` by quadrature of slice supports.
pub fn fiber_support_numeric(
    body: &BodySpec,
    split: &ProjectionSplit,
    u: &[f64],
    rule: &QuadratureRule,
) -> Result<f64> {
    Ok(fiber_support_report(body, split, u, rule)?.value)
}

pub fn fiber_body_sampled(
    body: &BodySpec,
    split: &ProjectionSplit,
    directions: &[Vec<f64>],
    rule: &QuadratureRule,
) -> Result<SampledSupport> {
    let meta = SampleMeta {
        method: "slicer".into(),
        nodes: Some(rule.nodes_per_axis),
        samples: None,
        seed: (rule.kind == QuadratureKind::MonteCarlo).then_some(rule.seed),
    };
    let values = directions
        .par_iter()
        .map(|u| fiber_support_numeric(body, split, u, rule))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SampledSupport {
        dim: split.m(),
        directions: directions.to_vec(),
        values,
        stderr: None,
        meta,
    })
}

/// Step for one-sided derivatives of numerically minimized slice supports.
pub const SLICE_DERIVATIVE_STEP: f64 = 1e-4;

/// `h_{(Σπ K)^u}(v) = ∫ h_{(K_x)^u}(v) dx`.
pub fn face_fiber_support(
    body: &BodySpec,
    split: &ProjectionSplit,
    u: &[f64],
    v: &[f64],
    rule: &QuadratureRule,
) -> Result<f64> {
    check_dim(split.ambient_dim(), body.dim())?;
    check_dim(split.m(), u.len())?;
    check_dim(split.m(), v.len())?;
    if norm(u) == 0.0 {
        return Err(FiberError::Domain("face direction must be nonzero".into()));
    }
    let t = SLICE_DERIVATIVE_STEP * norm(u) / norm(v).max(f64::MIN_POSITIVE);
    let nodes = integration_nodes(body, split, rule)?;
    let r = integrate_nodes(&nodes, |x| {
        let d = one_sided_derivative_with(
            |w| Ok(slice_support_unchecked(body, split, x, w, 1e-13, 800)?.value),
            u,
            v,
            t,
        )?;
        Ok(SliceValue {
            value: d,
            converged: true,
        })
    })?;
    Ok(r.value)
}

/// Verdict of the directional strict-convexity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrictVerdict {
    pub strict: bool,
    pub face_width: f64,
}

/// Face width `max_w D⁺h(u; w) + D⁺h(u; -w)` over sampled unit `w ⊥ u`;
/// strict iff the width is below `tol`.
pub fn strict_convexity_direction<F>(
    mut h: F,
    u: &[f64],
    w_samples: usize,
    tol: f64,
    step: f64,
) -> Result<StrictVerdict>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let m = u.len();
    if norm(u) == 0.0 {
        return Err(FiberError::Domain("direction must be nonzero".into()));
    }
    let un = normalized(u);
    let t = step * norm(u);
    let mut width: f64 = 0.0;
    let ws: Vec<Vec<f64>> = if m == 2 {
        vec![vec![-un[1], un[0]]]
    } else {
        sphere_sample(m, w_samples.max(2 * m), SphereSampling::Fibonacci)
            .into_iter()
            .filter_map(|w| {
                let p = axpy(&w, -dot(&w, &un), &un);
                (norm(&p) > 1e-3).then(|| normalized(&p))
            })
            .collect()
    };
    for w in ws {
        let plus = one_sided_derivative_with(&mut h, u, &w, t)?;
        let minus = one_sided_derivative_with(&mut h, u, &scale(&w, -1.0), t)?;
        width = width.max(plus + minus);
    }
    Ok(StrictVerdict {
        strict: width < tol,
        face_width: width,
    })
}

/// Tolerance on slice face widths in [`fiber_strict_convexity`].
pub const SLICE_STRICT_TOL: f64 = 1e-3;

/// Fraction of slices `K_x`, over evenly spaced `x` in the shrunken
/// projection, that are strictly convex in direction `u` (`n = 1`).
pub fn fiber_strict_convexity(
    body: &BodySpec,
    split: &ProjectionSplit,
    u: &[f64],
    x_samples: usize,
) -> Result<f64> {
    check_dim(split.ambient_dim(), body.dim())?;
    check_dim(split.m(), u.len())?;
    if split.n() != 1 {
        return Err(FiberError::UnsupportedDimension(split.n()));
    }
    if x_samples == 0 {
        return Err(FiberError::Validation("need at least one x sample".into()));
    }
    let (lo, hi) = projection_interval(body, split)?;
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo) * DEFAULT_SHRINK;
    let xs: Vec<f64> = (0..x_samples)
        .map(|k| mid - half + 2.0 * half * (k as f64 + 0.5) / x_samples as f64)
        .collect();
    let verdicts = xs
        .par_iter()
        .map(|&x| {
            strict_convexity_direction(
                |w| Ok(slice_support_unchecked(body, split, &[x], w, 1e-13, 800)?.value),
                u,
                16,
                SLICE_STRICT_TOL,
                SLICE_DERIVATIVE_STEP,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(verdicts.iter().filter(|v| v.strict).count() as f64 / x_samples as f64)
}
