//! Zonotopes, Vitale zonoids and their fiber bodies.

mod dice;
mod vitale;

pub use dice::{
    dice_fiber_closed, dice_fiber_exact, discotope_boundary, elliptic_e, lambda_support,
    lambda_support_elliptic, BoundaryDisc, DiscotopeBoundary,
};
pub use vitale::{
    fiber_zonoid_mc, mixed_fiber_mc, mixed_fiber_mc_batch, Estimate, RandomVectorModel,
    MC_MIN_SAMPLES, MC_WORKERS,
};

use itertools::Itertools;

use crate::bodies::ProjectionSplit;
use crate::error::{check_dim, FiberError, Result};
use crate::linalg::{det_columns, dot, norm};

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `F_π(p_1, …, p_{n+1}) = 1/(n+1)! Σ_i (-1)^{n+1-i} det(x_1, …, x̂_i, …, x_{n+1}) y_i`
/// in W-coordinates, where `p_i = (x_i, y_i)`.
pub fn f_pi(split: &ProjectionSplit, points: &[&[f64]]) -> Result<Vec<f64>> {
    let n = split.n();
    if points.len() != n + 1 {
        return Err(FiberError::Arity {
            expected: n + 1,
            got: points.len(),
        });
    }
    for p in points {
        check_dim(split.ambient_dim(), p.len())?;
    }
    let xs: Vec<Vec<f64>> = points.iter().map(|p| split.v_coords(p)).collect();
    let ys: Vec<Vec<f64>> = points.iter().map(|p| split.w_coords(p)).collect();
    Ok(f_pi_split(&xs, &ys))
}

// `xs` and `ys` already in V- and W-coordinates.
pub(crate) fn f_pi_split(xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Vec<f64> {
    let k = xs.len();
    let m = ys[0].len();
    let mut out = vec![0.0; m];
    for i in 0..k {
        let cols: Vec<&[f64]> = (0..k)
            .filter(|&j| j != i)
            .map(|j| xs[j].as_slice())
            .collect();
        let det = det_columns(&cols);
        if det == 0.0 {
            continue;
        }
        let sign = if (k - 1 - i).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        for (o, y) in out.iter_mut().zip(&ys[i]) {
            *o += sign * det * y;
        }
    }
    let f = factorial(k);
    out.iter_mut().for_each(|o| *o /= f);
    out
}

/// Generators in W of the fiber body of `Σ ½[-z_i, z_i]`: one
/// `(n+1)! F_π(z_{i_1}, …, z_{i_{n+1}})` per `(n+1)`-subset, zeros dropped.
pub fn fiber_zonotope(generators: &[Vec<f64>], split: &ProjectionSplit) -> Result<Vec<Vec<f64>>> {
    for g in generators {
        check_dim(split.ambient_dim(), g.len())?;
    }
    let n = split.n();
    let xs: Vec<Vec<f64>> = generators.iter().map(|g| split.v_coords(g)).collect();
    let ys: Vec<Vec<f64>> = generators.iter().map(|g| split.w_coords(g)).collect();
    let f = factorial(n + 1);
    let mut out = Vec::new();
    for subset in (0..generators.len()).combinations(n + 1) {
        let sx: Vec<Vec<f64>> = subset.iter().map(|&i| xs[i].clone()).collect();
        let sy: Vec<Vec<f64>> = subset.iter().map(|&i| ys[i].clone()).collect();
        let g: Vec<f64> = f_pi_split(&sx, &sy).into_iter().map(|c| c * f).collect();
        let size: f64 = subset.iter().map(|&i| norm(&generators[i])).product();
        if norm(&g) > 1e-14 * size {
            out.push(g);
        }
    }
    Ok(out)
}

/// `h(u) = Σ ½|<z_i, u>|`.
pub fn zonotope_support(generators: &[Vec<f64>], u: &[f64]) -> f64 {
    generators.iter().map(|z| 0.5 * dot(z, u).abs()).sum()
}

/// Volume of `Σ ½[-z_i, z_i]` in `R^d`: the sum of `|det|` over `d`-subsets.
pub fn zonotope_volume(generators: &[Vec<f64>]) -> f64 {
    let Some(d) = generators.first().map(Vec::len) else {
        return 0.0;
    };
    generators
        .iter()
        .combinations(d)
        .map(|s| {
            let cols: Vec<&[f64]> = s.iter().map(|g| g.as_slice()).collect();
            det_columns(&cols).abs()
        })
        .sum()
}

/// `½ Vol_{n+1}(T_u K)` with `T_u = Id_V ⊕ <u, ·>`.
pub fn shadow_fiber_support(
    generators: &[Vec<f64>],
    split: &ProjectionSplit,
    u: &[f64],
) -> Result<f64> {
    check_dim(split.m(), u.len())?;
    if u.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    let mut mapped = Vec::with_capacity(generators.len());
    for g in generators {
        check_dim(split.ambient_dim(), g.len())?;
        let mut t = split.v_coords(g);
        t.push(dot(u, &split.w_coords(g)));
        mapped.push(t);
    }
    Ok(0.5 * zonotope_volume(&mapped))
}
