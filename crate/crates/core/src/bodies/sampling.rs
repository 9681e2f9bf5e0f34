use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, normalized, unit};

/// How to place directions on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "seed")]
pub enum SphereSampling {
    UniformGrid,
    Fibonacci,
    SeededRandom(u64),
}

/// Unit vectors in `R^dim`.
///
/// When `count >= 2 * dim` the output contains every signed coordinate axis.
/// Grid and Fibonacci modes are deterministic; the random mode is a pure
/// function of its seed.
pub fn sphere_sample(dim: usize, count: usize, mode: SphereSampling) -> Vec<Vec<f64>> {
    assert!(dim >= 1, "sphere dimension must be positive");
    if count == 0 {
        return Vec::new();
    }
    if dim == 1 {
        return (0..count)
            .map(|k| vec![if k % 2 == 0 { 1.0 } else { -1.0 }])
            .collect();
    }
    if dim == 2 && !matches!(mode, SphereSampling::SeededRandom(_)) {
        return circle_grid(count);
    }
    let with_axes = count >= 2 * dim;
    let mut out = Vec::with_capacity(count);
    if with_axes {
        for i in 0..dim {
            out.push(unit(dim, i));
            let mut neg = unit(dim, i);
            neg[i] = -1.0;
            out.push(neg);
        }
    }
    let rest = count - out.len();
    match mode {
        SphereSampling::Fibonacci | SphereSampling::UniformGrid if dim == 3 => {
            out.extend(fibonacci_sphere(rest));
        }
        SphereSampling::Fibonacci | SphereSampling::UniformGrid => {
            out.extend(gaussian_directions(dim, rest, 0x5eed_f1be));
        }
        SphereSampling::SeededRandom(seed) => {
            out.extend(gaussian_directions(dim, rest, seed));
        }
    }
    out
}

fn circle_grid(count: usize) -> Vec<Vec<f64>> {
    let angle = |t: f64| {
        let (s, c) = t.sin_cos();
        vec![snap(c), snap(s)]
    };
    if count.is_multiple_of(4) || count < 4 {
        (0..count)
            .map(|k| angle(2.0 * PI * k as f64 / count as f64))
            .collect()
    } else {
        let mut out = circle_grid(4);
        let rest = count - 4;
        out.extend((0..rest).map(|k| angle(2.0 * PI * (k as f64 + 0.5) / rest as f64)));
        out
    }
}

// Exact zeros and ones for the axis directions of the grid.
fn snap(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        0.0
    } else if (x.abs() - 1.0).abs() < 1e-15 {
        x.signum()
    } else {
        x
    }
}

fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let (s, c) = (golden * k as f64).sin_cos();
            normalized(&[r * c, r * s, z])
        })
        .collect()
}

fn gaussian_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        if dot(&g, &g) > 1e-12 {
            out.push(normalized(&g));
        }
    }
    out
}

/// Support values of a body (typically a fiber body) on a set of directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSupport {
    pub dim: usize,
    pub directions: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// Standard errors, present for stochastic routes.
    pub stderr: Option<Vec<f64>>,
    pub meta: SampleMeta,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub method: String,
    pub nodes: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

impl SampledSupport {
    pub fn empty(dim: usize, meta: SampleMeta) -> Self {
        Self {
            dim,
            directions: Vec::new(),
            values: Vec::new(),
            stderr: None,
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Unit-norm directions and nonnegative width on every antipodal pair.
    pub fn check_invariants(&self, tol: f64) -> Result<(), String> {
        for (k, d) in self.directions.iter().enumerate() {
            if d.len() != self.dim {
                return Err(format!("direction {k} has dimension {}", d.len()));
            }
            let n = dot(d, d).sqrt();
            if (n - 1.0).abs() > 1e-12 {
                return Err(format!("direction {k} has norm {n}"));
            }
        }
        for (i, a) in self.directions.iter().enumerate() {
            for (j, b) in self.directions.iter().enumerate().skip(i + 1) {
                if a.iter().zip(b).all(|(x, y)| (x + y).abs() < 1e-12) {
                    let w = self.values[i] + self.values[j];
                    if w < -tol {
                        return Err(format!("negative width {w} on directions {i}/{j}"));
                    }
                }
            }
        }
        Ok(())
    }
}
