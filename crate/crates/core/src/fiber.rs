//! Route selection: one entry point for every way of computing `h_{Σπ K}`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{BodySpec, ProjectionSplit, SampleMeta, SampledSupport};
use crate::curved::{curvature_validate, curved_fiber_support_extended, CURVATURE_SAMPLES};
use crate::error::{check_dim, FiberError, Result};
use crate::linalg::{mat_vec, scale, unit};
use crate::puffed::elliptope_fiber_closed;
use crate::slicer::{fiber_support_numeric, QuadratureRule};
use crate::zonoids::{
    dice_fiber_exact, fiber_zonoid_mc, fiber_zonotope, mixed_fiber_mc_batch, zonotope_support,
    RandomVectorModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Auto,
    Slicer,
    Curved,
    ZonoidExact,
    ZonoidMc,
    ClosedForm,
}

impl Method {
    pub const ROUTES: [Method; 5] = [
        Method::ClosedForm,
        Method::ZonoidExact,
        Method::ZonoidMc,
        Method::Curved,
        Method::Slicer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Slicer => "slicer",
            Method::Curved => "curved",
            Method::ZonoidExact => "zonoid-exact",
            Method::ZonoidMc => "zonoid-mc",
            Method::ClosedForm => "closed-form",
        }
    }

    pub fn is_stochastic(self) -> bool {
        self == Method::ZonoidMc
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = FiberError;

    fn from_str(s: &str) -> Result<Self> {
        [Method::Auto]
            .into_iter()
            .chain(Method::ROUTES)
            .find(|m| m.name() == s)
            .ok_or_else(|| FiberError::Input(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberOptions {
    pub method: Method,
    /// Quadrature nodes for the slicer and curved routes.
    pub nodes: usize,
    /// Monte-Carlo sample count.
    pub samples: usize,
    pub seed: u64,
}

impl Default for FiberOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            nodes: 64,
            samples: 1_000_000,
            seed: 0,
        }
    }
}

/// Generators of a body that is a zonotope up to sums, scalings and linear maps.
pub fn zonotope_generators(body: &BodySpec) -> Option<Vec<Vec<f64>>> {
    match body {
        BodySpec::Zonotope { generators } => Some(generators.clone()),
        BodySpec::Sum { bodies } => {
            let mut out = Vec::new();
            for b in bodies {
                out.extend(zonotope_generators(b)?);
            }
            Some(out)
        }
        BodySpec::Scaled { lambda, inner } => Some(
            zonotope_generators(inner)?
                .iter()
                .map(|g| scale(g, *lambda))
                .collect(),
        ),
        BodySpec::LinearImage { matrix, inner } => Some(
            zonotope_generators(inner)?
                .iter()
                .map(|g| mat_vec(matrix, g))
                .collect(),
        ),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Closed {
    Elliptope {},
    Dice,
}

fn closed_form_kind(body: &BodySpec, split: &ProjectionSplit) -> Option<Closed> {
    if !(split.n() == 1 && split.m() == 2 && split.is_coordinate()) {
        return None;
    }
    match body {
        BodySpec::Elliptope {} => Some(Closed::Elliptope {}),
        BodySpec::Discotope { axes }
            if axes.len() == 3 && (0..3).all(|i| axes[i] == unit(3, i)) =>
        {
            Some(Closed::Dice)
        }
        _ => None,
    }
}

fn is_curved(body: &BodySpec) -> Result<bool> {
    fn has_puffed(b: &BodySpec) -> bool {
        match b {
            BodySpec::Puffed(_) => true,
            BodySpec::Sum { bodies } => bodies.iter().any(has_puffed),
            BodySpec::Scaled { inner, .. } | BodySpec::LinearImage { inner, .. } => {
                has_puffed(inner)
            }
            _ => false,
        }
    }
    // puffed bodies keep the vertices of their polytope
    if has_puffed(body) {
        return Ok(false);
    }
    Ok(curvature_validate(body, CURVATURE_SAMPLES)?.curved)
}

/// Routes that can evaluate this body and split, in order of preference.
pub fn applicable_methods(body: &BodySpec, split: &ProjectionSplit) -> Result<Vec<Method>> {
    check_dim(split.ambient_dim(), body.dim())?;
    let mut out = Vec::new();
    if closed_form_kind(body, split).is_some() {
        out.push(Method::ClosedForm);
    }
    if zonotope_generators(body).is_some() {
        out.push(Method::ZonoidExact);
    }
    if RandomVectorModel::from_body(body).is_ok() {
        out.push(Method::ZonoidMc);
    }
    let engine = (1..=2).contains(&split.n());
    if engine && is_curved(body)? {
        out.push(Method::Curved);
    }
    if engine {
        out.push(Method::Slicer);
    }
    Ok(out)
}

/// `auto` picks the exact zonotope route, then Monte Carlo for other zonoids,
/// then the curved route, then the slicer.
pub fn resolve_method(body: &BodySpec, split: &ProjectionSplit, method: Method) -> Result<Method> {
    let applicable = applicable_methods(body, split)?;
    let chosen = match method {
        Method::Auto => [
            Method::ZonoidExact,
            Method::ZonoidMc,
            Method::Curved,
            Method::Slicer,
        ]
        .into_iter()
        .find(|m| applicable.contains(m)),
        m => applicable.contains(&m).then_some(m),
    };
    chosen.ok_or_else(|| FiberError::Method {
        method: method.name().into(),
        applicable: applicable.iter().map(|m| m.name().to_string()).collect(),
    })
}

/// Value and, for Monte Carlo, standard error at one direction with an
/// already resolved route.
pub fn route_support(
    body: &BodySpec,
    split: &ProjectionSplit,
    u: &[f64],
    method: Method,
    opts: &FiberOptions,
) -> Result<(f64, Option<f64>)> {
    check_dim(split.m(), u.len())?;
    Ok(match method {
        Method::ClosedForm => {
            let v = match closed_form_kind(body, split) {
                Some(Closed::Elliptope {}) if u.iter().all(|&c| c == 0.0) => 0.0,
                Some(Closed::Elliptope {}) => elliptope_fiber_closed(u)?,
                Some(Closed::Dice) => dice_fiber_exact(u)?,
                None => return Err(not_applicable(body, split, method)),
            };
            (v, None)
        }
        Method::ZonoidExact => {
            let gens =
                zonotope_generators(body).ok_or_else(|| not_applicable(body, split, method))?;
            (zonotope_support(&fiber_zonotope(&gens, split)?, u), None)
        }
        Method::ZonoidMc => {
            let model = RandomVectorModel::from_body(body)?;
            let e = fiber_zonoid_mc(&model, split, u, opts.samples, opts.seed)?;
            (e.mean, Some(e.stderr))
        }
        Method::Curved => (
            curved_fiber_support_extended(body, split, u, opts.nodes)?,
            None,
        ),
        Method::Slicer => {
            let rule = if split.n() == 1 {
                QuadratureRule::gauss(opts.nodes)
            } else {
                QuadratureRule::tensor(opts.nodes)
            };
            (fiber_support_numeric(body, split, u, &rule)?, None)
        }
        Method::Auto => {
            let m = resolve_method(body, split, Method::Auto)?;
            return route_support(body, split, u, m, opts);
        }
    })
}

fn not_applicable(body: &BodySpec, split: &ProjectionSplit, method: Method) -> FiberError {
    FiberError::Method {
        method: method.name().into(),
        applicable: applicable_methods(body, split)
            .unwrap_or_default()
            .iter()
            .map(|m| m.name().to_string())
            .collect(),
    }
}

/// The fiber body on a direction set through the requested route.
pub fn compute_fiber(
    body: &BodySpec,
    split: &ProjectionSplit,
    directions: &[Vec<f64>],
    opts: &FiberOptions,
) -> Result<SampledSupport> {
    body.validate()?;
    let method = resolve_method(body, split, opts.method)?;
    let rows = if method == Method::ZonoidMc {
        let model = RandomVectorModel::from_body(body)?;
        let models = vec![model; split.n() + 1];
        mixed_fiber_mc_batch(&models, split, directions, opts.samples, opts.seed)?
            .into_iter()
            .map(|e| (e.mean, Some(e.stderr)))
            .collect()
    } else {
        directions
            .par_iter()
            .map(|u| route_support(body, split, u, method, opts))
            .collect::<Result<Vec<_>>>()?
    };
    let stochastic = method.is_stochastic();
    Ok(SampledSupport {
        dim: split.m(),
        directions: directions.to_vec(),
        values: rows.iter().map(|r| r.0).collect(),
        stderr: stochastic.then(|| rows.iter().map(|r| r.1.unwrap_or(0.0)).collect()),
        meta: SampleMeta {
            method: method.name().into(),
            nodes: matches!(method, Method::Slicer | Method::Curved).then_some(opts.nodes),
            samples: stochastic.then_some(opts.samples),
            seed: stochastic.then_some(opts.seed),
        },
    })
}
