//! Fiber bodies of curved bodies as Jacobian-weighted integrals over V:
//! `h_{Σπ K}(u) = ∫_V <u, ∇h_K(u + ξ)> J_ψ(ξ) dξ` with `ψ(ξ) = π ∇h_K(u + ξ)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{
    sphere_sample, support_gradient, BodySpec, ProjectionSplit, SphereSampling, GRADIENT_STEP,
};
use crate::error::{check_dim, FiberError, Result};
use crate::linalg::{add, axpy, dot, norm, normalized, orthonormal_complement, scale};
use crate::quadrature::GaussLegendre;
use crate::slicer::{fiber_support_numeric, QuadratureRule};

pub const CURVATURE_TOL: f64 = 1e-4;
pub const MAX_CURVATURE_RADIUS: f64 = 1e2;
pub const CURVATURE_SAMPLES: usize = 200;
pub const JACOBIAN_STEP: f64 = 1e-5;
const HESSIAN_STEP: f64 = 1e-4;

fn gradient_of(body: &BodySpec, u: &[f64]) -> Result<Vec<f64>> {
    match body.gradient(u) {
        Some(g) => Ok(g),
        None => support_gradient(body, u, GRADIENT_STEP),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Curvature {
    pub curved: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// Extreme eigenvalues of the tangential Hessian of `h_K` over sampled unit
/// directions.
///
/// Curved iff the smallest exceeds [`CURVATURE_TOL`] times the mean support
/// value and the largest stays below [`MAX_CURVATURE_RADIUS`] times it; a
/// jump of `∇h` across a flat face shows up as an eigenvalue of order
/// `1 / step`.
pub fn curvature_validate(body: &BodySpec, samples: usize) -> Result<Curvature> {
    body.validate()?;
    let d = body.dim();
    let dirs = sphere_sample(d, samples.max(2 * d), SphereSampling::Fibonacci);
    let mut scale_ref: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut max_eig = f64::NEG_INFINITY;
    for v in &dirs {
        scale_ref += body.h(v)?;
        let basis = orthonormal_complement(v);
        let cols: Vec<Vec<f64>> = basis
            .iter()
            .map(|b| {
                let gp = gradient_of(body, &axpy(v, HESSIAN_STEP, b))?;
                let gm = gradient_of(body, &axpy(v, -HESSIAN_STEP, b))?;
                Ok(scale(&axpy(&gp, -1.0, &gm), 0.5 / HESSIAN_STEP))
            })
            .collect::<Result<_>>()?;
        let k = basis.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            0.5 * (dot(&basis[i], &cols[j]) + dot(&basis[j], &cols[i]))
        });
        let e = SymmetricEigen::new(t).eigenvalues;
        min_eig = min_eig.min(e.min());
        max_eig = max_eig.max(e.max());
    }
    scale_ref /= dirs.len() as f64;
    let s = scale_ref.max(f64::MIN_POSITIVE);
    Ok(Curvature {
        curved: min_eig > CURVATURE_TOL * s && max_eig < MAX_CURVATURE_RADIUS * s,
        min_eigenvalue: min_eig,
        max_eigenvalue: max_eig,
    })
}

/// Integrand data of the curved-body formula for one unit direction `u` in W.
#[derive(Debug, Clone)]
pub struct CurvedIntegrand {
    body: BodySpec,
    split: ProjectionSplit,
    u: Vec<f64>,
    u_ambient: Vec<f64>,
    pub fd_step: f64,
}

impl CurvedIntegrand {
    /// Checks curvedness and `‖u‖ = 1`.
    pub fn new(body: BodySpec, split: ProjectionSplit, u: Vec<f64>) -> Result<Self> {
        let c = curvature_validate(&body, CURVATURE_SAMPLES)?;
        if !c.curved {
            return Err(FiberError::NotCurved {
                min_eigenvalue: c.min_eigenvalue,
            });
        }
        Self::new_unchecked(body, split, u)
    }

    /// Skips the curvature check (for bodies already validated).
    pub fn new_unchecked(body: BodySpec, split: ProjectionSplit, u: Vec<f64>) -> Result<Self> {
        check_dim(split.ambient_dim(), body.dim())?;
        check_dim(split.m(), u.len())?;
        if !(1..=2).contains(&split.n()) {
            return Err(FiberError::UnsupportedDimension(split.n()));
        }
        if (norm(&u) - 1.0).abs() > 1e-12 {
            return Err(FiberError::Domain(format!(
                "direction must be a unit vector, norm {}",
                norm(&u)
            )));
        }
        let u_ambient = split.embed_w(&u);
        Ok(Self {
            body,
            split,
            u,
            u_ambient,
            fd_step: JACOBIAN_STEP,
        })
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    fn grad_at(&self, xi: &[f64]) -> Result<Vec<f64>> {
        gradient_of(&self.body, &add(&self.u_ambient, &self.split.embed_v(xi)))
    }

    /// Central-difference Jacobian determinant of `ψ` at `ξ`.
    fn jacobian(&self, xi: &[f64]) -> Result<f64> {
        let n = xi.len();
        let h = self.fd_step * (1.0 + norm(xi));
        let mut cols = Vec::with_capacity(n);
        for i in 0..n {
            let mut p = xi.to_vec();
            let mut m = xi.to_vec();
            p[i] += h;
            m[i] -= h;
            let dp = psi(self, &p)?;
            let dm = psi(self, &m)?;
            cols.push(scale(&axpy(&dp, -1.0, &dm), 0.5 / h));
        }
        Ok(match n {
            1 => cols[0][0],
            _ => cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1],
        })
    }
}

/// `ψ_u(ξ) = π ∇h_K(u + ξ)` in V-coordinates.
pub fn psi(ci: &CurvedIntegrand, xi: &[f64]) -> Result<Vec<f64>> {
    check_dim(ci.split.n(), xi.len())?;
    Ok(ci.split.v_coords(&ci.grad_at(xi)?))
}

/// Integrated support value and gradient of the fiber body at `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvedResult {
    pub support: f64,
    /// W-coordinates of `∫ ∇h_K(u + ξ) J(ξ) dξ`.
    pub gradient: Vec<f64>,
    /// The Jacobian changed sign between nodes.
    pub ill_conditioned: bool,
}

/// Both integrals after `ξ_i = tan θ_i` with Gauss–Legendre nodes in `θ`.
pub fn curved_fiber(ci: &CurvedIntegrand, quad_nodes: usize) -> Result<CurvedResult> {
    let gl = GaussLegendre::new(quad_nodes.max(2));
    let one = gl.mapped(-FRAC_PI_2, FRAC_PI_2);
    let n = ci.split.n();
    let nodes: Vec<(Vec<f64>, f64)> = match n {
        1 => one
            .iter()
            .map(|&(t, w)| (vec![t.tan()], w / t.cos().powi(2)))
            .collect(),
        _ => one
            .iter()
            .flat_map(|&(t1, w1)| {
                one.iter().map(move |&(t2, w2)| {
                    (
                        vec![t1.tan(), t2.tan()],
                        w1 * w2 / (t1.cos() * t2.cos()).powi(2),
                    )
                })
            })
            .collect(),
    };
    let terms: Vec<(Vec<f64>, f64)> = nodes
        .par_iter()
        .map(|(xi, w)| {
            let g = ci.grad_at(xi)?;
            let j = ci.jacobian(xi)?;
            Ok((g, w * j))
        })
        .collect::<Result<_>>()?;
    let d = ci.split.ambient_dim();
    let mut total = vec![0.0; d];
    let (mut pos, mut neg) = (false, false);
    for (g, wj) in &terms {
        total = axpy(&total, *wj, g);
        let scale_ref = 1e-9 * wj.abs().max(1e-300);
        pos |= *wj > scale_ref;
        neg |= *wj < -scale_ref;
    }
    Ok(CurvedResult {
        support: dot(&ci.u_ambient, &total),
        gradient: ci.split.w_coords(&total),
        ill_conditioned: pos && neg,
    })
}

pub fn curved_fiber_support(ci: &CurvedIntegrand, quad_nodes: usize) -> Result<f64> {
    Ok(curved_fiber(ci, quad_nodes)?.support)
}

/// The W-part of the integrated gradient; checks that `<u, ∇>` reproduces the
/// support value.
pub fn curved_fiber_gradient(ci: &CurvedIntegrand, quad_nodes: usize) -> Result<Vec<f64>> {
    let r = curved_fiber(ci, quad_nodes)?;
    let euler = dot(&ci.u, &r.gradient);
    if (euler - r.support).abs() > 1e-9 * (1.0 + r.support.abs()) {
        return Err(FiberError::Validation(format!(
            "integrated gradient gives <u, ∇h> = {euler}, support {}",
            r.support
        )));
    }
    Ok(r.gradient)
}

/// The curved-route support at any nonzero `u`, extended with degree 1.
pub fn curved_fiber_support_extended(
    body: &BodySpec,
    split: &ProjectionSplit,
    u: &[f64],
    quad_nodes: usize,
) -> Result<f64> {
    let n = norm(u);
    if n == 0.0 {
        return Ok(0.0);
    }
    let ci = CurvedIntegrand::new_unchecked(body.clone(), split.clone(), normalized(u))?;
    Ok(n * curved_fiber_support(&ci, quad_nodes)?)
}

/// Schneider's fiber body as printed:
/// `π/(64‖u‖³) (8(α-2) u₂⁴ - 8(α²+2α-8) u₂²u₃² + (-25α²+16α+32) u₃⁴)`.
pub fn schneider_fiber_closed(alpha: f64, u: &[f64]) -> Result<f64> {
    check_dim(2, u.len())?;
    let n = norm(u);
    if n == 0.0 {
        return Err(FiberError::Domain("direction must be nonzero".into()));
    }
    let c = schneider_printed_coefficients(alpha);
    Ok(quartic(&c, u) / n.powi(3))
}

/// Coefficients of `u₂⁴, u₂³u₃, u₂²u₃², u₂u₃³, u₃⁴` in the printed formula.
pub fn schneider_printed_coefficients(alpha: f64) -> [f64; 5] {
    let k = PI / 64.0;
    [
        k * 8.0 * (alpha - 2.0),
        0.0,
        -k * 8.0 * (alpha * alpha + 2.0 * alpha - 8.0),
        0.0,
        k * (-25.0 * alpha * alpha + 16.0 * alpha + 32.0),
    ]
}

fn quartic(c: &[f64; 5], u: &[f64]) -> f64 {
    let (a, b) = (u[0], u[1]);
    c[0] * a.powi(4)
        + c[1] * a.powi(3) * b
        + c[2] * a * a * b * b
        + c[3] * a * b.powi(3)
        + c[4] * b.powi(4)
}

const MONOMIALS: [&str; 5] = ["u2^4", "u2^3 u3", "u2^2 u3^2", "u2 u3^3", "u3^4"];

/// Curved route against the slicer route and against the printed closed form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchneiderReport {
    pub alpha: f64,
    pub directions: usize,
    /// Largest `|curved - slicer| / (1 + |h|)`.
    pub route_gap: f64,
    pub fitted: [f64; 5],
    pub printed: [f64; 5],
    /// Largest residual of the quartic fit on the unit circle.
    pub fit_residual: f64,
    /// Largest `|curved - printed|` on the sample.
    pub printed_gap: f64,
    pub diagnosis: Vec<String>,
}

/// Least-squares quartic through the curved-route values on the unit circle.
pub fn schneider_report(
    alpha: f64,
    directions: usize,
    quad_nodes: usize,
    slicer_nodes: usize,
) -> Result<SchneiderReport> {
    let body = BodySpec::Schneider { alpha };
    body.validate()?;
    let split = ProjectionSplit::coordinate(1, 2)?;
    let dirs = sphere_sample(2, directions.max(8), SphereSampling::UniformGrid);
    let rule = QuadratureRule::gauss(slicer_nodes);
    let rows: Vec<(f64, f64)> = dirs
        .par_iter()
        .map(|u| {
            let ci = CurvedIntegrand::new_unchecked(body.clone(), split.clone(), u.clone())?;
            Ok((
                curved_fiber_support(&ci, quad_nodes)?,
                fiber_support_numeric(&body, &split, u, &rule)?,
            ))
        })
        .collect::<Result<_>>()?;
    let route_gap = rows
        .iter()
        .map(|(c, s)| (c - s).abs() / (1.0 + c.abs()))
        .fold(0.0, f64::max);
    let a = DMatrix::from_fn(dirs.len(), 5, |i, j| {
        let (x, y) = (dirs[i][0], dirs[i][1]);
        x.powi(4 - j as i32) * y.powi(j as i32)
    });
    let b = DVector::from_iterator(dirs.len(), rows.iter().map(|r| r.0));
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| FiberError::Validation(e.to_string()))?;
    let fitted = [sol[0], sol[1], sol[2], sol[3], sol[4]];
    let fit_residual = (a * &sol - &b).amax();
    let printed = schneider_printed_coefficients(alpha);
    let printed_gap = dirs
        .iter()
        .zip(&rows)
        .map(|(u, r)| (quartic(&printed, u) - r.0).abs())
        .fold(0.0, f64::max);
    let k = PI / 64.0;
    let candidates = [
        ("8(α-2)²", k * 8.0 * (alpha - 2.0).powi(2)),
        ("-8(α-2)", -k * 8.0 * (alpha - 2.0)),
        ("8(α-2)", k * 8.0 * (alpha - 2.0)),
    ];
    let mut diagnosis = Vec::new();
    for i in 0..5 {
        let tol = 1e-6 * (1.0 + printed[i].abs());
        if (fitted[i] - printed[i]).abs() <= tol {
            continue;
        }
        let mut line = format!(
            "{}: fitted {:.9}, printed {:.9} (π/64 · {:.6} vs π/64 · {:.6})",
            MONOMIALS[i],
            fitted[i],
            printed[i],
            fitted[i] / k,
            printed[i] / k
        );
        if i == 0 {
            if let Some((name, _)) = candidates
                .iter()
                .find(|(_, v)| (v - fitted[i]).abs() <= tol)
            {
                line.push_str(&format!("; matches π/64 · {name}"));
            }
        }
        diagnosis.push(line);
    }
    if printed_gap > 0.0 && quartic(&printed, &[1.0, 0.0]) < 0.0 {
        diagnosis.push(format!(
            "printed formula is negative at u = (1, 0): {:.6}",
            quartic(&printed, &[1.0, 0.0])
        ));
    }
    Ok(SchneiderReport {
        alpha,
        directions: dirs.len(),
        route_gap,
        fitted,
        printed,
        fit_residual,
        printed_gap,
        diagnosis,
    })
}

impl fmt::Display for SchneiderReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Schneider body alpha = {}", self.alpha)?;
        writeln!(f, "  directions: {}", self.directions)?;
        writeln!(f, "  curved vs slicer (relative): {:.3e}", self.route_gap)?;
        writeln!(f, "  quartic fit residual: {:.3e}", self.fit_residual)?;
        writeln!(f, "  curved vs printed formula: {:.3e}", self.printed_gap)?;
        writeln!(f, "  {:<12} {:>16} {:>16}", "monomial", "fitted", "printed")?;
        for i in 0..5 {
            writeln!(
                f,
                "  {:<12} {:>16.9} {:>16.9}",
                MONOMIALS[i], self.fitted[i], self.printed[i]
            )?;
        }
        for d in &self.diagnosis {
            writeln!(f, "  - {d}")?;
        }
        Ok(())
    }
}
