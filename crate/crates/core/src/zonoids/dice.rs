use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::bodies::{check_axis, disc_gradient, parallel_pair};
use crate::error::{check_dim, FiberError, Result};
use crate::linalg::{add, norm, rank, scale};
use crate::quadrature::adaptive_integrate;

/// Complete elliptic integral of the second kind `E(k) = ∫₀^{π/2} sqrt(1 - k² sin²θ) dθ`,
/// by the arithmetic-geometric mean.
pub fn elliptic_e(k: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&k) {
        return Err(FiberError::Domain(format!("modulus {k} outside [0, 1]")));
    }
    if k == 1.0 {
        return Ok(1.0);
    }
    let mut a = 1.0;
    let mut b = (1.0 - k * k).sqrt();
    let mut c = k;
    let mut pow = 0.5;
    let mut sum = pow * c * c;
    for _ in 0..64 {
        if c.abs() < 1e-17 {
            break;
        }
        let an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
    }
    Ok(FRAC_PI_2 / a * (1.0 - sum))
}

/// `h_Λ(u₂, u₃) = ½ ∫₀^π sqrt(cos²θ u₂² + sin²θ u₃²) dθ`.
pub fn lambda_support(u2: f64, u3: f64) -> f64 {
    let tol = 1e-14 * (1.0 + u2.abs().max(u3.abs()));
    0.5 * adaptive_integrate(
        |t| {
            let (s, c) = t.sin_cos();
            (c * c * u2 * u2 + s * s * u3 * u3).sqrt()
        },
        0.0,
        PI,
        tol,
    )
}

/// `h_Λ` through `max(|u₂|,|u₃|) E(sqrt(1 - min²/max²))`.
pub fn lambda_support_elliptic(u2: f64, u3: f64) -> f64 {
    let (a, b) = (u2.abs(), u3.abs());
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if big == 0.0 {
        return 0.0;
    }
    let r = small / big;
    big * elliptic_e((1.0 - r * r).sqrt()).expect("modulus in [0, 1]")
}

/// The dice's fiber body as printed: `‖u‖ + π/8 (|u₂| + |u₃|) + ½ h_Λ(u)`.
pub fn dice_fiber_closed(u: &[f64]) -> Result<f64> {
    check_dim(2, u.len())?;
    Ok(norm(u) + PI / 8.0 * (u[0].abs() + u[1].abs()) + 0.5 * lambda_support(u[0], u[1]))
}

/// The dice's fiber body `4D₁ + π(e₂ + e₃) + 2Λ` recomputed from the slices.
pub fn dice_fiber_exact(u: &[f64]) -> Result<f64> {
    Ok(4.0 * dice_fiber_closed(u)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDisc {
    pub axis: Vec<f64>,
    pub center_plus: Vec<f64>,
    pub center_minus: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscotopeBoundary {
    pub discs: Vec<BoundaryDisc>,
    pub component_count: usize,
    /// Single disc: the body is flat and both faces coincide.
    pub flat: bool,
}

/// Translated copies `q_i^± + D_{v_i}` in the boundary of `Σ D_{v_j}`, with
/// `q_i^± = ± Σ_{j≠i} ∇h_{D_{v_j}}(v_i)`, and the number of components of the
/// union of their relative interiors' complement in the boundary.
pub fn discotope_boundary(axes: &[Vec<f64>]) -> Result<DiscotopeBoundary> {
    if axes.is_empty() {
        return Err(FiberError::InvalidDiscotope("no axes".into()));
    }
    for a in axes {
        check_axis(a).map_err(|e| FiberError::InvalidDiscotope(e.to_string()))?;
    }
    if let Some((i, j)) = parallel_pair(axes) {
        return Err(FiberError::InvalidDiscotope(format!(
            "axes {i} and {j} are parallel"
        )));
    }
    let discs = axes
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let q = axes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(vec![0.0; 3], |acc, (_, w)| add(&acc, &disc_gradient(w, v)));
            BoundaryDisc {
                axis: v.clone(),
                center_minus: scale(&q, -1.0),
                center_plus: q,
            }
        })
        .collect();
    let component_count = if rank(axes, 1e-12) <= 2 { 2 } else { 1 };
    Ok(DiscotopeBoundary {
        discs,
        component_count,
        flat: axes.len() == 1,
    })
}
