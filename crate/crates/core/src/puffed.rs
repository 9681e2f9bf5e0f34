//! Puffed polytopes: the origin's component of the complement of the zero set
//! of `∂ʷ^i ∏_j (l_j(x) - a_j w)` at `w = 1`.

use serde::{Deserialize, Serialize};

use crate::bodies::{sphere_sample, SphereSampling};
use crate::error::{FiberError, Result};
use crate::linalg::{axpy, dot, norm, normalized, orthonormal_complement, scale, sub};

/// Affine facet `{x : <normal, x> = offset}` of a polytope containing the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Facet forms of a polytope plus the derivative order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetSystem {
    pub facets: Vec<Facet>,
    pub order: usize,
}

impl FacetSystem {
    pub fn new(facets: Vec<(Vec<f64>, f64)>, order: usize) -> Result<Self> {
        let fs = Self {
            facets: facets
                .into_iter()
                .map(|(normal, offset)| Facet { normal, offset })
                .collect(),
            order,
        };
        fs.validate()?;
        Ok(fs)
    }

    /// Square with facets `x = ±h`, `y = ±h`.
    pub fn square(h: f64, order: usize) -> Self {
        Self::new(
            vec![
                (vec![1.0, 0.0], h),
                (vec![-1.0, 0.0], h),
                (vec![0.0, 1.0], h),
                (vec![0.0, -1.0], h),
            ],
            order,
        )
        .expect("valid square")
    }

    /// Octagon `x ± y = ±3`, `x = ±2`, `y = ±2` (sum of two squares).
    pub fn octagon(order: usize) -> Self {
        Self::new(
            vec![
                (vec![1.0, 1.0], 3.0),
                (vec![-1.0, -1.0], 3.0),
                (vec![1.0, -1.0], 3.0),
                (vec![-1.0, 1.0], 3.0),
                (vec![1.0, 0.0], 2.0),
                (vec![-1.0, 0.0], 2.0),
                (vec![0.0, 1.0], 2.0),
                (vec![0.0, -1.0], 2.0),
            ],
            order,
        )
        .expect("valid octagon")
    }

    /// Tetrahedron `conv{(1,1,1), (1,-1,-1), (-1,1,-1), (-1,-1,1)}`.
    pub fn tetrahedron(order: usize) -> Self {
        Self::new(
            vec![
                (vec![1.0, 1.0, -1.0], 1.0),
                (vec![1.0, -1.0, 1.0], 1.0),
                (vec![-1.0, 1.0, 1.0], 1.0),
                (vec![-1.0, -1.0, -1.0], 1.0),
            ],
            order,
        )
        .expect("valid tetrahedron")
    }

    /// Cube `[-h, h]^dim`.
    pub fn cube(h: f64, dim: usize, order: usize) -> Self {
        let mut facets = Vec::new();
        for i in 0..dim {
            for s in [1.0, -1.0] {
                let mut n = vec![0.0; dim];
                n[i] = s;
                facets.push((n, h));
            }
        }
        Self::new(facets, order).expect("valid cube")
    }

    pub fn dim(&self) -> usize {
        self.facets.first().map_or(0, |f| f.normal.len())
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(FiberError::Validation("facet system is empty".into()));
        }
        for f in &self.facets {
            if f.normal.len() != d || norm(&f.normal) == 0.0 {
                return Err(FiberError::Validation(
                    "facet normals must be nonzero and share one dimension".into(),
                ));
            }
            if !(f.offset > 0.0) {
                return Err(FiberError::Validation(format!(
                    "facet offset {} must be positive (origin strictly inside)",
                    f.offset
                )));
            }
        }
        if self.order >= self.facets.len() {
            return Err(FiberError::Validation(format!(
                "derivative order {} must be below the facet count {}",
                self.order,
                self.facets.len()
            )));
        }
        Ok(())
    }

    pub fn with_order(&self, order: usize) -> Result<Self> {
        let fs = Self {
            facets: self.facets.clone(),
            order,
        };
        fs.validate()?;
        Ok(fs)
    }
}

/// `∂ʷ^i ∏_j (l_j(x) - a_j w)` at `w = 1`.
///
/// Equals `i! (-1)^i Σ_{|S|=i} ∏_{j∈S} a_j ∏_{j∉S} (l_j(x) - a_j)`; the
/// subset sum is accumulated degree by degree instead of enumerated.
pub fn puffed_eval(fs: &FacetSystem, point: &[f64]) -> f64 {
    let i = fs.order;
    let mut e = vec![0.0; i + 1];
    e[0] = 1.0;
    for f in &fs.facets {
        let b = dot(&f.normal, point) - f.offset;
        for k in (0..=i).rev() {
            e[k] = e[k] * b + if k > 0 { e[k - 1] * f.offset } else { 0.0 };
        }
    }
    let fact: f64 = (1..=i).map(|k| k as f64).product();
    let sign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
    fact * sign * e[i]
}

const RADIAL_SCAN_STEPS: usize = 1024;

/// Radial function of `puff_i(P)`: the first zero of the derivative
/// polynomial along the ray `t * direction`, `t > 0`.
///
/// Both sign changes and even-multiplicity touches count as crossings.
pub fn puffed_radial(fs: &FacetSystem, direction: &[f64]) -> Result<f64> {
    let d = normalized(direction);
    let p = |t: f64| puffed_eval(fs, &scale(&d, t));
    let min_normal = fs
        .facets
        .iter()
        .map(|f| norm(&f.normal))
        .fold(f64::INFINITY, f64::min);
    let bound = 2.0 * fs.facets.iter().map(|f| f.offset).sum::<f64>() / min_normal;
    let h = bound / RADIAL_SCAN_STEPS as f64;
    let p0 = p(0.0);
    if p0 == 0.0 {
        return Err(FiberError::Validation(
            "origin lies on the puffed boundary".into(),
        ));
    }
    let s0 = p0.signum();
    let mut vals = vec![p0];
    for k in 1..=RADIAL_SCAN_STEPS {
        let t = k as f64 * h;
        let pk = p(t);
        vals.push(pk);
        if k >= 2 {
            let (a, b, c) = (vals[k - 2], vals[k - 1], pk);
            if a.signum() == s0
                && b.signum() == s0
                && c.signum() == s0
                && b.abs() < a.abs()
                && b.abs() <= c.abs()
            {
                if let Some(t_touch) = touch_point(&p, (k - 2) as f64 * h, t, a.abs().max(c.abs()))
                {
                    return Ok(t_touch);
                }
            }
        }
        if pk == 0.0 {
            return Ok(t);
        }
        if pk.signum() != s0 {
            return Ok(bisect_root(&p, (k - 1) as f64 * h, t, s0));
        }
    }
    Err(FiberError::UnboundedRay { bound })
}

fn bisect_root<F: Fn(f64) -> f64>(p: &F, mut lo: f64, mut hi: f64, s_lo: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let pm = p(mid);
        if pm == 0.0 {
            return mid;
        }
        if pm.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn touch_point<F: Fn(f64) -> f64>(p: &F, lo: f64, hi: f64, scale_ref: f64) -> Option<f64> {
    let m = crate::quadrature::golden_section(|t| p(t).abs(), lo, hi, 1e-15, 300);
    (m.value <= 1e-8 * scale_ref).then_some(m.x)
}

/// `h_{puff_i(P)}(u)` as the maximum of `<u, r(d) d>` over boundary samples,
/// refined by compass search on the sphere around the best sample.
pub fn puffed_support(fs: &FacetSystem, u: &[f64], boundary_samples: usize) -> Result<f64> {
    let dim = fs.dim();
    if u.len() != dim {
        return Err(FiberError::Dimension {
            expected: dim,
            got: u.len(),
        });
    }
    if norm(u) == 0.0 {
        return Err(FiberError::Domain(
            "support direction must be nonzero".into(),
        ));
    }
    let value = |d: &[f64]| -> Result<f64> { Ok(dot(u, d) * puffed_radial(fs, d)?) };
    let mode = if dim == 3 {
        SphereSampling::Fibonacci
    } else {
        SphereSampling::UniformGrid
    };
    let samples = sphere_sample(dim, boundary_samples.max(2 * dim), mode);
    // the maximizer of <u, ·> on the boundary lies in the half-space <u, d> > 0
    let mut ranked = Vec::new();
    for d in samples.iter().filter(|d| dot(d, u) > 0.0) {
        ranked.push((value(d)?, d.clone()));
    }
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    let spacing = match dim {
        2 => std::f64::consts::TAU / samples.len() as f64,
        3 => (4.0 * std::f64::consts::PI / samples.len() as f64).sqrt(),
        _ => 0.5,
    };
    let mut best = f64::NEG_INFINITY;
    for (v0, d0) in ranked.into_iter().take(3) {
        best = best.max(compass_refine(&value, d0, v0, 2.0 * spacing)?);
    }
    Ok(best)
}

fn compass_refine<F>(value: &F, mut d: Vec<f64>, mut v: f64, mut step: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut round = 0usize;
    while step > 1e-10 {
        let tangent = orthonormal_complement(&d);
        let mut probes: Vec<Vec<f64>> = Vec::new();
        for (i, ti) in tangent.iter().enumerate() {
            probes.push(ti.clone());
            probes.push(scale(ti, -1.0));
            for tj in tangent.iter().skip(i + 1) {
                let (s, c) = (0.4 * round as f64).sin_cos();
                // rotate the diagonal probes a little every round to avoid stalling on ridges
                let a = axpy(&scale(ti, c), s, tj);
                let b = axpy(&scale(tj, c), -s, ti);
                for dir in [&a, &b] {
                    probes.push(dir.clone());
                    probes.push(scale(dir, -1.0));
                }
                let diag = normalized(&axpy(ti, 1.0, tj));
                let anti = normalized(&sub(ti, tj));
                probes.extend([
                    diag.clone(),
                    scale(&diag, -1.0),
                    anti.clone(),
                    scale(&anti, -1.0),
                ]);
            }
        }
        let mut improved = false;
        for t in &probes {
            let cand = normalized(&axpy(&d, step, t));
            let cv = value(&cand)?;
            if cv > v {
                v = cv;
                d = cand;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
        round += 1;
        if round > 20_000 {
            break;
        }
    }
    Ok(v)
}

/// Facets of the convex hull of points in dimension 2 or 3, with unit normals.
pub fn facets_from_vertices(vertices: &[Vec<f64>]) -> Result<Vec<Facet>> {
    let d = vertices.first().map_or(0, Vec::len);
    if !(2..=3).contains(&d) {
        return Err(FiberError::InvalidPolytope(format!(
            "vertex to facet conversion supports dimension 2 or 3, got {d}"
        )));
    }
    let scale_ref = vertices.iter().map(|v| norm(v)).fold(1.0, f64::max);
    let tol = 1e-9 * scale_ref;
    let mut out: Vec<Facet> = Vec::new();
    let mut consider = |normal: Vec<f64>, p: &[f64]| {
        let nn = norm(&normal);
        if nn < 1e-12 * scale_ref * scale_ref {
            return;
        }
        let n = scale(&normal, 1.0 / nn);
        let a = dot(&n, p);
        let (above, below) = vertices.iter().fold((false, false), |(ab, be), v| {
            let s = dot(&n, v) - a;
            (ab || s > tol, be || s < -tol)
        });
        let (n, a) = match (above, below) {
            (false, _) => (n, a),
            (true, false) => (scale(&n, -1.0), -a),
            (true, true) => return,
        };
        if !out.iter().any(|f| {
            (f.offset - a).abs() < tol && f.normal.iter().zip(&n).all(|(x, y)| (x - y).abs() < 1e-9)
        }) {
            out.push(Facet {
                normal: n,
                offset: a,
            });
        }
    };
    let k = vertices.len();
    if d == 2 {
        for i in 0..k {
            for j in i + 1..k {
                let e = sub(&vertices[j], &vertices[i]);
                consider(vec![e[1], -e[0]], &vertices[i]);
            }
        }
    } else {
        for i in 0..k {
            for j in i + 1..k {
                for l in j + 1..k {
                    let a = sub(&vertices[j], &vertices[i]);
                    let b = sub(&vertices[l], &vertices[i]);
                    let n = vec![
                        a[1] * b[2] - a[2] * b[1],
                        a[2] * b[0] - a[0] * b[2],
                        a[0] * b[1] - a[1] * b[0],
                    ];
                    consider(n, &vertices[i]);
                }
            }
        }
    }
    if out.len() < d + 1 {
        return Err(FiberError::InvalidPolytope(
            "points are not full-dimensional".into(),
        ));
    }
    Ok(out)
}

/// Whether every vertex lies on exactly `dim` facets.
pub fn is_simple(vertices: &[Vec<f64>], facets: &FacetSystem) -> Result<bool> {
    let dim = facets.dim();
    let mut simple = true;
    for (k, v) in vertices.iter().enumerate() {
        if v.len() != dim {
            return Err(FiberError::InvalidPolytope(format!(
                "vertex {k} has dimension {}, expected {dim}",
                v.len()
            )));
        }
        let mut on = 0;
        for f in &facets.facets {
            let gap = dot(&f.normal, v) - f.offset;
            let tol = 1e-9 * norm(&f.normal).max(1.0);
            if gap > tol {
                return Err(FiberError::InvalidPolytope(format!(
                    "vertex {k} violates a facet inequality by {gap}"
                )));
            }
            if gap.abs() <= tol {
                on += 1;
            }
        }
        if on < dim {
            return Err(FiberError::InvalidPolytope(format!(
                "vertex {k} lies on only {on} facets"
            )));
        }
        simple &= on == dim;
    }
    Ok(simple)
}

/// Strict convexity verdict for a fiber puffed polytope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strictness {
    Strict,
    NotStrict,
    Unknown,
}

/// Whether `Σ_π puff_i(P)` is strictly convex for fibers of dimension `m`.
///
/// Order 1: iff `m = 2`. Order 2: iff `m <= 3`. Order `i >= 3`: iff
/// `m <= i + 1` for simple polytopes, unknown otherwise.
pub fn puffed_strict_convexity(order: usize, m: usize, simple: bool) -> Result<Strictness> {
    if order < 1 || m < 2 {
        return Err(FiberError::Domain(format!(
            "need order >= 1 and m >= 2, got order {order}, m {m}"
        )));
    }
    let verdict = |strict: bool| {
        if strict {
            Strictness::Strict
        } else {
            Strictness::NotStrict
        }
    };
    Ok(match order {
        1 => verdict(m == 2),
        2 => verdict(m <= 3),
        i if simple => verdict(m <= i + 1),
        _ => Strictness::Unknown,
    })
}

/// Support function `sqrt(u² + v² + 2xuv)` of the elliptope's slice at `x`.
pub fn elliptope_slice_support(x: f64, u: &[f64]) -> Result<f64> {
    if u.len() != 2 {
        return Err(FiberError::Dimension {
            expected: 2,
            got: u.len(),
        });
    }
    if x.abs() >= 1.0 || !x.is_finite() {
        return Err(FiberError::Domain(format!(
            "slice position |x| = {} must be < 1",
            x.abs()
        )));
    }
    Ok((u[0] * u[0] + u[1] * u[1] + 2.0 * x * u[0] * u[1])
        .max(0.0)
        .sqrt())
}

/// Fiber body of the elliptope under `(x, y, z) ↦ x`:
/// `(|u+v|³ - |u-v|³) / (3uv)`.
///
/// Evaluated as `2M + 2m²/(3M)` with `M = max(|u|,|v|)`, `m = min(|u|,|v|)`,
/// which is the same expression with the removable singularity at `uv = 0`
/// filled and no cancellation.
pub fn elliptope_fiber_closed(u: &[f64]) -> Result<f64> {
    if u.len() != 2 {
        return Err(FiberError::Dimension {
            expected: 2,
            got: u.len(),
        });
    }
    let a = u[0].abs();
    let b = u[1].abs();
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if big == 0.0 {
        return Err(FiberError::Domain("direction must be nonzero".into()));
    }
    Ok(2.0 * big + 2.0 * small * small / (3.0 * big))
}
