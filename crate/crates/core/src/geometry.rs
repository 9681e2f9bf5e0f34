//! Comparison and export of sampled bodies: Hausdorff distance, polygons and
//! SVG for planar bodies, OBJ/PLY point clouds for bodies in R³.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::bodies::{
    sphere_sample, support_gradient, BodySpec, SampledSupport, SphereSampling, GRADIENT_STEP,
};
use crate::error::{FiberError, Result};
use crate::io::RunManifest;
use crate::linalg::scale;
use crate::puffed::puffed_radial;

/// `max_k |h_a(u_k) - h_b(u_k)|` over a shared direction list.
///
/// For convex bodies this is a lower bound on the Hausdorff distance, exact up
/// to the sampling resolution.
pub fn hausdorff_distance(a: &SampledSupport, b: &SampledSupport) -> Result<f64> {
    if a.dim != b.dim || a.directions.len() != b.directions.len() {
        return Err(FiberError::Input(format!(
            "direction lists differ: {} directions in R^{} vs {} in R^{}",
            a.len(),
            a.dim,
            b.len(),
            b.dim
        )));
    }
    for (k, (u, v)) in a.directions.iter().zip(&b.directions).enumerate() {
        if u.iter().zip(v).any(|(x, y)| (x - y).abs() > 1e-12) {
            return Err(FiberError::Input(format!(
                "direction {k} differs: {u:?} vs {v:?}"
            )));
        }
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Vertices (counter-clockwise) of `{y : <u_k, y> <= h_k for all k}`.
///
/// Bodies of zero width come back as a segment (two vertices) or a point.
pub fn polygon_from_support(s: &SampledSupport) -> Result<Vec<[f64; 2]>> {
    if s.dim != 2 {
        return Err(FiberError::Geometry(format!(
            "polygons need planar data, got R^{}",
            s.dim
        )));
    }
    if s.len() < 3 {
        return Err(FiberError::Geometry(format!(
            "need at least 3 directions, got {}",
            s.len()
        )));
    }
    let mut angles: Vec<f64> = s.directions.iter().map(|d| d[1].atan2(d[0])).collect();
    angles.sort_by(f64::total_cmp);
    let wrap = angles[0] + 2.0 * PI - angles[angles.len() - 1];
    let gap = angles.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max);
    if gap >= PI - 1e-12 {
        return Err(FiberError::Geometry(
            "directions do not span the circle; the polygon is unbounded".into(),
        ));
    }
    let scale_h = s
        .values
        .iter()
        .fold(0.0f64, |m, h| m.max(h.abs()))
        .max(1e-300);
    let big = scale_h * 1e6 / (0.5 * (PI - gap)).sin().max(1e-6);
    let mut poly = vec![[-big, -big], [big, -big], [big, big], [-big, big]];
    let slack = 1e-12 * scale_h;
    for (d, &h) in s.directions.iter().zip(&s.values) {
        let n = d[0].hypot(d[1]);
        poly = clip(&poly, [d[0] / n, d[1] / n], h / n + slack);
        if poly.is_empty() {
            return Err(FiberError::Geometry(format!(
                "half-planes have empty intersection (at u = {d:?}, h = {h}); not support data"
            )));
        }
    }
    let tol = 1e-9 * scale_h;
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(poly.len());
    for p in poly {
        if out.last().is_none_or(|q| dist(*q, p) > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && dist(out[0], out[out.len() - 1]) <= tol {
        out.pop();
    }
    if out.len() >= 3 && area(&out).abs() <= tol * perimeter(&out) {
        let (i, j) = farthest_pair(&out);
        out = vec![out[i], out[j]];
    }
    Ok(out)
}

fn clip(poly: &[[f64; 2]], u: [f64; 2], h: f64) -> Vec<[f64; 2]> {
    let side = |p: [f64; 2]| u[0] * p[0] + u[1] * p[1] - h;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for (i, &p) in poly.iter().enumerate() {
        let q = poly[(i + 1) % poly.len()];
        let (sp, sq) = (side(p), side(q));
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn area(p: &[[f64; 2]]) -> f64 {
    0.5 * (0..p.len())
        .map(|i| {
            let (a, b) = (p[i], p[(i + 1) % p.len()]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

fn perimeter(p: &[[f64; 2]]) -> f64 {
    (0..p.len()).map(|i| dist(p[i], p[(i + 1) % p.len()])).sum()
}

fn farthest_pair(p: &[[f64; 2]]) -> (usize, usize) {
    let mut best = (0, 0, -1.0);
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let d = dist(p[i], p[j]);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    (best.0, best.1)
}

/// One `<path>` per polygon, coordinate axes, and the manifest as a comment.
/// The y axis points up; the view box is the bounding box plus a 5% margin.
pub fn polygons_svg(manifest: &RunManifest, polygons: &[(String, Vec<[f64; 2]>)]) -> String {
    let pts = polygons.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in pts {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let margin = 0.05 * span;
    let (vx, vy) = (x0 - margin, -y1 - margin);
    let (vw, vh) = (x1 - x0 + 2.0 * margin, y1 - y0 + 2.0 * margin);
    let stroke = span / 400.0;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!--\n");
    for l in manifest.lines("") {
        let _ = writeln!(out, "{}", l.replace("--", "- -"));
    }
    out.push_str("-->\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{vx} {vy} {vw} {vh}\">"
    );
    let _ = writeln!(
        out,
        "  <g stroke=\"#888\" stroke-width=\"{}\"><line x1=\"{vx}\" y1=\"0\" x2=\"{}\" y2=\"0\"/><line x1=\"0\" y1=\"{vy}\" x2=\"0\" y2=\"{}\"/></g>",
        stroke / 2.0,
        vx + vw,
        vy + vh
    );
    const COLORS: [&str; 4] = ["#7a3db8", "#1f6fb2", "#c0392b", "#2e8b57"];
    for (k, (label, p)) in polygons.iter().enumerate() {
        let mut d = String::new();
        for (i, v) in p.iter().enumerate() {
            let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, v[0], -v[1]);
        }
        if p.len() > 2 {
            d.push('Z');
        }
        let _ = writeln!(
            out,
            "  <path id=\"{}\" d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{stroke}\"/>",
            xml_escape(label),
            d.trim_end(),
            COLORS[k % COLORS.len()]
        );
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Boundary points of a body in R³: exposed points `∇h(u)` on Fibonacci
/// directions, radial boundary points for puffed polytopes.
pub fn boundary_points(body: &BodySpec, samples: usize) -> Result<Vec<[f64; 3]>> {
    if body.dim() != 3 {
        return Err(FiberError::Dimension {
            expected: 3,
            got: body.dim(),
        });
    }
    body.validate()?;
    sphere_sample(3, samples, SphereSampling::Fibonacci)
        .iter()
        .map(|u| {
            let p = match body {
                BodySpec::Puffed(fs) => scale(u, puffed_radial(fs, u)?),
                _ => match body.gradient(u) {
                    Some(g) => g,
                    None => support_gradient(body, u, GRADIENT_STEP)?,
                },
            };
            Ok([p[0], p[1], p[2]])
        })
        .collect()
}

/// Header note describing how [`boundary_points`] sampled `body`.
pub fn boundary_note(body: &BodySpec) -> &'static str {
    match body {
        BodySpec::Puffed(_) => "radial boundary points r(d) d on Fibonacci directions d",
        _ => "exposed points grad h(u) on Fibonacci directions; subgradients at nonsmooth u",
    }
}

pub fn write_obj(manifest: &RunManifest, points: &[[f64; 3]]) -> String {
    let mut out = String::new();
    for l in manifest.lines("# ") {
        let _ = writeln!(out, "{l}");
    }
    for p in points {
        let _ = writeln!(out, "v {} {} {}", p[0], p[1], p[2]);
    }
    out
}

pub fn write_ply(manifest: &RunManifest, points: &[[f64; 3]]) -> String {
    let mut out = String::from("ply\nformat ascii 1.0\n");
    for l in manifest.lines("comment ") {
        let _ = writeln!(out, "{l}");
    }
    let _ = writeln!(out, "element vertex {}", points.len());
    out.push_str("property double x\nproperty double y\nproperty double z\nend_header\n");
    for p in points {
        let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
    }
    out
}
