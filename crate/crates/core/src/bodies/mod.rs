//! Convex bodies described by algebraic trees and evaluated through their
//! support functions `h_K(u) = max { <u, x> : x in K }`.

mod sampling;
mod split;

pub use sampling::{sphere_sample, SampleMeta, SampledSupport, SphereSampling};
pub use split::ProjectionSplit;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, FiberError, Result};
use crate::linalg::{add, axpy, dot, mat_t_vec, mat_vec, norm, normalized, scale, unit};
use crate::puffed::{puffed_support, FacetSystem};

/// Boundary samples used when a puffed polytope appears inside a body tree.
pub const PUFFED_BOUNDARY_SAMPLES: usize = 2000;

/// Relative step of the central-difference support gradient.
pub const GRADIENT_STEP: f64 = 1e-6;

/// Description tree of a centered convex body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    /// Convex hull of the listed points.
    Polytope {
        vertices: Vec<Vec<f64>>,
    },
    /// Sum of centered segments `½[-z, z]`.
    Zonotope {
        generators: Vec<Vec<f64>>,
    },
    /// Disc of radius `‖axis‖` in the plane orthogonal to `axis` (R³ only).
    Disc {
        axis: Vec<f64>,
    },
    /// Minkowski sum of discs with pairwise non-parallel axes.
    Discotope {
        axes: Vec<Vec<f64>>,
    },
    /// Schneider's polynomial body, `alpha` in [-0.4, -0.25].
    Schneider {
        alpha: f64,
    },
    /// `{x in [-1,1]³ : x² + y² + z² - 2xyz <= 1}`.
    Elliptope {},
    /// The `order`-th puffed polytope of a facet system.
    Puffed(FacetSystem),
    Ball {
        radius: f64,
        #[serde(default = "default_ball_dim")]
        dim: usize,
    },
    Sum {
        bodies: Vec<BodySpec>,
    },
    /// The set `lambda * K` (a reflection when `lambda < 0`).
    Scaled {
        lambda: f64,
        inner: Box<BodySpec>,
    },
    /// `T K` for a `k × d` matrix `T` given by rows.
    LinearImage {
        matrix: Vec<Vec<f64>>,
        inner: Box<BodySpec>,
    },
}

fn default_ball_dim() -> usize {
    3
}

impl BodySpec {
    pub fn cube(half_side: f64, dim: usize) -> Self {
        BodySpec::Zonotope {
            generators: (0..dim)
                .map(|i| scale(&unit(dim, i), 2.0 * half_side))
                .collect(),
        }
    }

    /// The discotope `D_{e1} + D_{e2} + D_{e3}`.
    pub fn dice() -> Self {
        BodySpec::Discotope {
            axes: (0..3).map(|i| unit(3, i)).collect(),
        }
    }

    /// `conv{(1,1,1), (1,-1,-1), (-1,1,-1), (-1,-1,1)}`.
    pub fn tetrahedron() -> Self {
        BodySpec::Polytope {
            vertices: vec![
                vec![1.0, 1.0, 1.0],
                vec![1.0, -1.0, -1.0],
                vec![-1.0, 1.0, -1.0],
                vec![-1.0, -1.0, 1.0],
            ],
        }
    }

    pub fn scaled(lambda: f64, inner: BodySpec) -> Self {
        BodySpec::Scaled {
            lambda,
            inner: Box::new(inner),
        }
    }

    pub fn linear_image(matrix: Vec<Vec<f64>>, inner: BodySpec) -> Self {
        BodySpec::LinearImage {
            matrix,
            inner: Box::new(inner),
        }
    }

    /// Ambient dimension of the body.
    pub fn dim(&self) -> usize {
        match self {
            BodySpec::Polytope { vertices } => vertices.first().map_or(0, Vec::len),
            BodySpec::Zonotope { generators } => generators.first().map_or(0, Vec::len),
            BodySpec::Disc { .. }
            | BodySpec::Discotope { .. }
            | BodySpec::Schneider { .. }
            | BodySpec::Elliptope {} => 3,
            BodySpec::Puffed(fs) => fs.dim(),
            BodySpec::Ball { dim, .. } => *dim,
            BodySpec::Sum { bodies } => bodies.first().map_or(0, BodySpec::dim),
            BodySpec::Scaled { inner, .. } => inner.dim(),
            BodySpec::LinearImage { matrix, .. } => matrix.len(),
        }
    }

    /// Short class name used in reports and method dispatch.
    pub fn kind(&self) -> &'static str {
        match self {
            BodySpec::Polytope { .. } => "polytope",
            BodySpec::Zonotope { .. } => "zonotope",
            BodySpec::Disc { .. } => "disc",
            BodySpec::Discotope { .. } => "discotope",
            BodySpec::Schneider { .. } => "schneider",
            BodySpec::Elliptope {} => "elliptope",
            BodySpec::Puffed(_) => "puffed",
            BodySpec::Ball { .. } => "ball",
            BodySpec::Sum { .. } => "sum",
            BodySpec::Scaled { .. } => "scaled",
            BodySpec::LinearImage { .. } => "linear_image",
        }
    }

    /// Check the structural invariants of the whole tree.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FiberError::Validation(msg));
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            BodySpec::Polytope { vertices } => {
                if vertices.is_empty() {
                    return bad("polytope needs at least one vertex".into());
                }
                uniform_len(vertices, "polytope vertex")?;
                if !vertices.iter().all(|v| finite(v)) {
                    return bad("polytope vertex is not finite".into());
                }
            }
            BodySpec::Zonotope { generators } => {
                if generators.is_empty() {
                    return bad("zonotope needs at least one generator".into());
                }
                uniform_len(generators, "zonotope generator")?;
                if generators.iter().any(|g| !finite(g) || norm(g) == 0.0) {
                    return bad("zonotope generators must be finite and nonzero".into());
                }
            }
            BodySpec::Disc { axis } => check_axis(axis)?,
            BodySpec::Discotope { axes } => {
                if axes.is_empty() {
                    return bad("discotope needs at least one axis".into());
                }
                for a in axes {
                    check_axis(a)?;
                }
                if let Some((i, j)) = parallel_pair(axes) {
                    return bad(format!("discotope axes {i} and {j} are parallel"));
                }
            }
            BodySpec::Schneider { alpha } => {
                if !(-0.4 - 1e-12..=-0.25 + 1e-12).contains(alpha) {
                    return bad(format!("schneider alpha {alpha} outside [-0.4, -0.25]"));
                }
            }
            BodySpec::Elliptope {} => {}
            BodySpec::Puffed(fs) => fs.validate()?,
            BodySpec::Ball { radius, dim } => {
                if !(radius.is_finite() && *radius >= 0.0) || *dim == 0 {
                    return bad(format!(
                        "ball needs radius >= 0 and dim >= 1, got {radius}, {dim}"
                    ));
                }
            }
            BodySpec::Sum { bodies } => {
                if bodies.is_empty() {
                    return bad("sum needs at least one body".into());
                }
                let d = bodies[0].dim();
                for b in bodies {
                    b.validate()?;
                    if b.dim() != d {
                        return bad(format!(
                            "summands live in different dimensions ({d} vs {})",
                            b.dim()
                        ));
                    }
                }
            }
            BodySpec::Scaled { lambda, inner } => {
                if !lambda.is_finite() {
                    return bad("scale factor must be finite".into());
                }
                inner.validate()?;
            }
            BodySpec::LinearImage { matrix, inner } => {
                inner.validate()?;
                if matrix.is_empty() {
                    return bad("linear image needs a nonempty matrix".into());
                }
                for row in matrix {
                    if row.len() != inner.dim() || !finite(row) {
                        return bad(format!(
                            "matrix rows must have {} finite entries",
                            inner.dim()
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// `h_K(u)`, checking the dimension of `u`.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        check_dim(self.dim(), u.len())?;
        self.h(u)
    }

    /// Support function without the top-level dimension check.
    pub(crate) fn h(&self, u: &[f64]) -> Result<f64> {
        Ok(match self {
            BodySpec::Polytope { vertices } => vertices
                .iter()
                .map(|v| dot(u, v))
                .fold(f64::NEG_INFINITY, f64::max),
            BodySpec::Zonotope { generators } => {
                0.5 * generators.iter().map(|z| dot(u, z).abs()).sum::<f64>()
            }
            BodySpec::Disc { axis } => disc_support(axis, u),
            BodySpec::Discotope { axes } => axes.iter().map(|a| disc_support(a, u)).sum(),
            BodySpec::Schneider { alpha } => schneider_support(*alpha, u),
            BodySpec::Elliptope {} => elliptope_maximizer(u).0,
            BodySpec::Puffed(fs) => {
                if norm(u) == 0.0 {
                    0.0
                } else {
                    puffed_support(fs, u, PUFFED_BOUNDARY_SAMPLES)?
                }
            }
            BodySpec::Ball { radius, .. } => radius * norm(u),
            BodySpec::Sum { bodies } => {
                let mut s = 0.0;
                for b in bodies {
                    s += b.h(u)?;
                }
                s
            }
            BodySpec::Scaled { lambda, inner } => inner.h(&scale(u, *lambda))?,
            BodySpec::LinearImage { matrix, inner } => inner.h(&mat_t_vec(matrix, u))?,
        })
    }

    /// A point of the face `K^u`, computed in closed form.
    ///
    /// Equals `∇h_K(u)` wherever the support function is differentiable; at
    /// kinks it returns the centroid-like representative of the face that
    /// each body class picks (sign 0 for zonotopes, disc centers, averaged
    /// polytope vertices). `None` for puffed polytopes.
    pub fn gradient(&self, u: &[f64]) -> Option<Vec<f64>> {
        let d = u.len();
        Some(match self {
            BodySpec::Polytope { vertices } => {
                let h = self.h(u).ok()?;
                let tol = 1e-12 * (1.0 + h.abs());
                let best: Vec<&Vec<f64>> =
                    vertices.iter().filter(|v| dot(u, v) >= h - tol).collect();
                let mut c = vec![0.0; d];
                for v in &best {
                    c = add(&c, v);
                }
                scale(&c, 1.0 / best.len() as f64)
            }
            BodySpec::Zonotope { generators } => {
                let mut g = vec![0.0; d];
                for z in generators {
                    let s = dot(u, z);
                    if s != 0.0 {
                        g = axpy(&g, 0.5 * s.signum(), z);
                    }
                }
                g
            }
            BodySpec::Disc { axis } => disc_gradient(axis, u),
            BodySpec::Discotope { axes } => axes
                .iter()
                .fold(vec![0.0; d], |acc, a| add(&acc, &disc_gradient(a, u))),
            BodySpec::Schneider { alpha } => schneider_gradient(*alpha, u),
            BodySpec::Elliptope {} => elliptope_maximizer(u).1,
            BodySpec::Puffed(_) => return None,
            BodySpec::Ball { radius, .. } => {
                let n = norm(u);
                if n == 0.0 {
                    vec![0.0; d]
                } else {
                    scale(u, radius / n)
                }
            }
            BodySpec::Sum { bodies } => {
                let mut g = vec![0.0; d];
                for b in bodies {
                    g = add(&g, &b.gradient(u)?);
                }
                g
            }
            BodySpec::Scaled { lambda, inner } => {
                scale(&inner.gradient(&scale(u, *lambda))?, *lambda)
            }
            BodySpec::LinearImage { matrix, inner } => {
                mat_vec(matrix, &inner.gradient(&mat_t_vec(matrix, u))?)
            }
        })
    }

    /// Whether `-K = K` follows from the body class alone.
    pub fn is_centrally_symmetric(&self) -> bool {
        match self {
            BodySpec::Zonotope { .. }
            | BodySpec::Disc { .. }
            | BodySpec::Discotope { .. }
            | BodySpec::Schneider { .. }
            | BodySpec::Ball { .. } => true,
            BodySpec::Sum { bodies } => bodies.iter().all(BodySpec::is_centrally_symmetric),
            BodySpec::Scaled { inner, .. } | BodySpec::LinearImage { inner, .. } => {
                inner.is_centrally_symmetric()
            }
            _ => false,
        }
    }
}

fn uniform_len(vs: &[Vec<f64>], what: &str) -> Result<()> {
    let d = vs[0].len();
    if d == 0 {
        return Err(FiberError::Validation(format!("{what} is empty")));
    }
    if let Some(v) = vs.iter().find(|v| v.len() != d) {
        return Err(FiberError::Validation(format!(
            "{what} has length {}, expected {d}",
            v.len()
        )));
    }
    Ok(())
}

pub(crate) fn check_axis(axis: &[f64]) -> Result<()> {
    if axis.len() != 3 {
        return Err(FiberError::Validation(format!(
            "disc axis must be a 3-vector, got length {}",
            axis.len()
        )));
    }
    if !axis.iter().all(|x| x.is_finite()) || norm(axis) == 0.0 {
        return Err(FiberError::Validation(
            "disc axis must be finite and nonzero".into(),
        ));
    }
    Ok(())
}

/// First pair `(i, j)` of axes with `v_i/‖v_i‖ = ±v_j/‖v_j‖`.
pub(crate) fn parallel_pair(axes: &[Vec<f64>]) -> Option<(usize, usize)> {
    for i in 0..axes.len() {
        for j in i + 1..axes.len() {
            let c = dot(&axes[i], &axes[j]) / (norm(&axes[i]) * norm(&axes[j]));
            if (c.abs() - 1.0).abs() < 1e-12 {
                return Some((i, j));
            }
        }
    }
    None
}

/// Orthonormal frame `(a, b)` of `axis^⊥`.
///
/// Pivot on the coordinate where the axis is smallest (first one on ties),
/// orthogonalize it against the axis, and complete with the cross product.
pub fn disc_frame(axis: &[f64]) -> ([f64; 3], [f64; 3]) {
    let v = normalized(axis);
    let k = (0..3)
        .min_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs()))
        .unwrap_or(0);
    let e = unit(3, k);
    let a = normalized(&axpy(&e, -dot(&e, &v), &v));
    let b = [
        v[1] * a[2] - v[2] * a[1],
        v[2] * a[0] - v[0] * a[2],
        v[0] * a[1] - v[1] * a[0],
    ];
    ([a[0], a[1], a[2]], b)
}

/// `‖v‖ · sqrt(<u,a>² + <u,b>²)`.
pub fn disc_support(axis: &[f64], u: &[f64]) -> f64 {
    let (a, b) = disc_frame(axis);
    let ua = dot(u, &a);
    let ub = dot(u, &b);
    norm(axis) * ua.hypot(ub)
}

/// Exposed point of `D_v` in direction `u`; the center when `u ∥ v`.
pub fn disc_gradient(axis: &[f64], u: &[f64]) -> Vec<f64> {
    let (a, b) = disc_frame(axis);
    let ua = dot(u, &a);
    let ub = dot(u, &b);
    let r = ua.hypot(ub);
    if r == 0.0 {
        return vec![0.0; 3];
    }
    let s = norm(axis) / r;
    (0..3).map(|i| s * (ua * a[i] + ub * b[i])).collect()
}

pub fn schneider_support(alpha: f64, u: &[f64]) -> f64 {
    let n = norm(u);
    if n == 0.0 {
        return 0.0;
    }
    n * (1.0 + 0.5 * alpha * (3.0 * u[2] * u[2] / (n * n) - 1.0))
}

pub fn schneider_gradient(alpha: f64, u: &[f64]) -> Vec<f64> {
    let n = norm(u);
    if n == 0.0 {
        return vec![0.0; 3];
    }
    let c = 1.0 - 0.5 * alpha;
    let q = 1.5 * alpha;
    let u3 = u[2];
    let mut g: Vec<f64> = u
        .iter()
        .map(|&x| c * x / n - q * u3 * u3 * x / (n * n * n))
        .collect();
    g[2] += q * 2.0 * u3 / n;
    g
}

/// Support value and maximizer of the elliptope.
///
/// Slicing at `x = c` gives ellipses with support `sqrt(A + B c)`,
/// `A = u2² + u3²`, `B = 2 u2 u3`; the objective `u1 c + sqrt(A + B c)` is
/// concave in `c`, so its maximum over `[-1, 1]` is attained at an endpoint
/// or at the stationary point.
pub(crate) fn elliptope_maximizer(u: &[f64]) -> (f64, Vec<f64>) {
    let (u1, u2, u3) = (u[0], u[1], u[2]);
    let a = u2 * u2 + u3 * u3;
    let b = 2.0 * u2 * u3;
    let obj = |c: f64| u1 * c + (a + b * c).max(0.0).sqrt();
    let mut best_c = -1.0;
    let mut best = obj(-1.0);
    let mut consider = |c: f64| {
        let v = obj(c);
        if v > best {
            best = v;
            best_c = c;
        }
    };
    consider(1.0);
    if b != 0.0 && u1 != 0.0 && -b / u1 > 0.0 {
        let r = b / (2.0 * u1);
        let c = (r * r - a) / b;
        if (-1.0..=1.0).contains(&c) {
            consider(c);
        }
    }
    let s = (a + b * best_c).max(0.0).sqrt();
    let point = if s > 0.0 {
        vec![best_c, (u2 + best_c * u3) / s, (u3 + best_c * u2) / s]
    } else {
        vec![best_c, 0.0, 0.0]
    };
    (best, point)
}

/// Central-difference gradient of `h_K` with step `step * ‖u‖`.
pub fn support_gradient(body: &BodySpec, u: &[f64], step: f64) -> Result<Vec<f64>> {
    check_dim(body.dim(), u.len())?;
    let eps = step * norm(u).max(f64::MIN_POSITIVE);
    let mut g = Vec::with_capacity(u.len());
    for i in 0..u.len() {
        let mut up = u.to_vec();
        let mut dn = u.to_vec();
        up[i] += eps;
        dn[i] -= eps;
        g.push((body.h(&up)? - body.h(&dn)?) / (2.0 * eps));
    }
    Ok(g)
}

/// Richardson-extrapolated one-sided derivative of `f` at `u` along `w`.
///
/// Combines forward quotients with steps `t` and `t/2`; exact for functions
/// that are linear along the segment, `O(t²)` for smooth ones.
pub fn one_sided_derivative_with<F>(mut f: F, u: &[f64], w: &[f64], t: f64) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if w.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let f0 = f(u)?;
    let d_full = (f(&axpy(u, t, w))? - f0) / t;
    let d_half = (f(&axpy(u, 0.5 * t, w))? - f0) / (0.5 * t);
    Ok(2.0 * d_half - d_full)
}

/// Default relative step for one-sided derivatives of exact support functions.
pub const ONE_SIDED_STEP: f64 = 1e-5;

/// `D⁺h_K(u; w) = h_{K^u}(w)`.
pub fn one_sided_derivative(body: &BodySpec, u: &[f64], w: &[f64]) -> Result<f64> {
    check_dim(body.dim(), u.len())?;
    check_dim(body.dim(), w.len())?;
    let wn = norm(w);
    if wn == 0.0 {
        return Ok(0.0);
    }
    let t = ONE_SIDED_STEP * norm(u).max(f64::MIN_POSITIVE) / wn;
    one_sided_derivative_with(|p| body.h(p), u, w, t)
}

/// `h_{π(K)}(w)` for `w` in V-coordinates.
pub fn project_support(body: &BodySpec, split: &ProjectionSplit, w: &[f64]) -> Result<f64> {
    check_dim(split.n(), w.len())?;
    check_dim(split.ambient_dim(), body.dim())?;
    body.h(&split.embed_v(w))
}
