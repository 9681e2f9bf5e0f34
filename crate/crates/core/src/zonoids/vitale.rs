use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::f_pi_split;
use crate::bodies::{disc_frame, disc_support, BodySpec, ProjectionSplit};
use crate::error::{check_dim, FiberError, Result};
use crate::linalg::{dot, mat_t_vec, mat_vec, scale};

/// Parallel Monte-Carlo runs always split the budget over this many streams,
/// so results depend on the seed only.
pub const MC_WORKERS: usize = 8;
pub const MC_MIN_SAMPLES: usize = 100;

/// A bounded random vector `X`, standing for the zonoid `K₀(X)` with
/// `h(u) = ½ E|<u, X>|`.
#[derive(Debug, Clone, PartialEq)]
pub enum RandomVectorModel {
    Discrete {
        atoms: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
    /// `‖v‖ (cos θ a + sin θ b)` with `θ` uniform and `(a, b)` the disc frame of `v`.
    DiscUniform { axis: Vec<f64> },
    Mixture {
        models: Vec<RandomVectorModel>,
        weights: Vec<f64>,
    },
    Scaled {
        factor: f64,
        model: Box<RandomVectorModel>,
    },
    /// `T X` for a matrix `T` given by rows.
    Linear {
        matrix: Vec<Vec<f64>>,
        model: Box<RandomVectorModel>,
    },
}

fn check_weights(weights: &[f64], len: usize) -> Result<()> {
    if weights.len() != len || len == 0 {
        return Err(FiberError::Validation(format!(
            "need one weight per component, got {} weights for {len}",
            weights.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|&w| !(w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
        return Err(FiberError::Validation(format!(
            "weights must be nonnegative and sum to 1 (sum {total})"
        )));
    }
    Ok(())
}

fn pick(weights: &[f64], r: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if r < acc {
            return i;
        }
    }
    weights.len() - 1
}

impl RandomVectorModel {
    /// Uniform mixture of `N` models scaled by `N`: the sum of their zonoids.
    pub fn sum(models: Vec<RandomVectorModel>) -> Self {
        let k = models.len();
        Self::Scaled {
            factor: k as f64,
            model: Box::new(Self::Mixture {
                weights: vec![1.0 / k as f64; k],
                models,
            }),
        }
    }

    /// `D_v = π K₀(σ)`.
    pub fn disc(axis: Vec<f64>) -> Self {
        Self::Scaled {
            factor: PI,
            model: Box::new(Self::DiscUniform { axis }),
        }
    }

    pub fn dice() -> Self {
        Self::sum(
            (0..3)
                .map(|i| Self::disc(crate::linalg::unit(3, i)))
                .collect(),
        )
    }

    /// Vitale model of a zonoid body, when one is available.
    pub fn from_body(body: &BodySpec) -> Result<Self> {
        let model = match body {
            BodySpec::Zonotope { generators } => {
                let k = generators.len() as f64;
                Self::Discrete {
                    atoms: generators.iter().map(|g| scale(g, k)).collect(),
                    weights: vec![1.0 / k; generators.len()],
                }
            }
            BodySpec::Disc { axis } => Self::disc(axis.clone()),
            BodySpec::Discotope { axes } => {
                Self::sum(axes.iter().cloned().map(Self::disc).collect())
            }
            BodySpec::Sum { bodies } => {
                Self::sum(bodies.iter().map(Self::from_body).collect::<Result<_>>()?)
            }
            BodySpec::Scaled { lambda, inner } => Self::Scaled {
                factor: lambda.abs(),
                model: Box::new(Self::from_body(inner)?),
            },
            BodySpec::LinearImage { matrix, inner } => Self::Linear {
                matrix: matrix.clone(),
                model: Box::new(Self::from_body(inner)?),
            },
            other => {
                return Err(FiberError::Validation(format!(
                    "no random-vector model for a {} body",
                    other.kind()
                )))
            }
        };
        model.validate()?;
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Discrete { atoms, .. } => atoms.first().map_or(0, Vec::len),
            Self::DiscUniform { .. } => 3,
            Self::Mixture { models, .. } => models.first().map_or(0, Self::dim),
            Self::Scaled { model, .. } => model.dim(),
            Self::Linear { matrix, .. } => matrix.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Discrete { atoms, weights } => {
                check_weights(weights, atoms.len())?;
                let d = self.dim();
                if atoms
                    .iter()
                    .any(|a| a.len() != d || a.iter().any(|x| !x.is_finite()))
                {
                    return Err(FiberError::Validation(
                        "atoms must be finite and share one dimension".into(),
                    ));
                }
            }
            Self::DiscUniform { axis } => crate::bodies::check_axis(axis)?,
            Self::Mixture { models, weights } => {
                check_weights(weights, models.len())?;
                let d = self.dim();
                for m in models {
                    m.validate()?;
                    check_dim(d, m.dim())?;
                }
            }
            Self::Scaled { factor, model } => {
                if !factor.is_finite() {
                    return Err(FiberError::Validation("scale factor must be finite".into()));
                }
                model.validate()?;
            }
            Self::Linear { matrix, model } => {
                model.validate()?;
                if matrix.is_empty()
                    || matrix
                        .iter()
                        .any(|r| r.len() != model.dim() || r.iter().any(|x| !x.is_finite()))
                {
                    return Err(FiberError::Validation(format!(
                        "linear map must be finite with {} columns",
                        model.dim()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Self::Discrete { atoms, weights } => atoms[pick(weights, rng.random::<f64>())].clone(),
            Self::DiscUniform { axis } => {
                let (a, b) = disc_frame(axis);
                let r = crate::linalg::norm(axis);
                let (s, c) = rng.random_range(0.0..TAU).sin_cos();
                (0..3).map(|i| r * (c * a[i] + s * b[i])).collect()
            }
            Self::Mixture { models, weights } => {
                models[pick(weights, rng.random::<f64>())].sample(rng)
            }
            Self::Scaled { factor, model } => scale(&model.sample(rng), *factor),
            Self::Linear { matrix, model } => mat_vec(matrix, &model.sample(rng)),
        }
    }

    /// Exact `½ E|<u, X>|`.
    pub fn support(&self, u: &[f64]) -> f64 {
        match self {
            Self::Discrete { atoms, weights } => atoms
                .iter()
                .zip(weights)
                .map(|(a, w)| 0.5 * w * dot(a, u).abs())
                .sum(),
            // ½ E|r cos(θ - φ)| = r / π
            Self::DiscUniform { axis } => disc_support(axis, u) / PI,
            Self::Mixture { models, weights } => models
                .iter()
                .zip(weights)
                .map(|(m, w)| w * m.support(u))
                .sum(),
            Self::Scaled { factor, model } => factor.abs() * model.support(u),
            Self::Linear { matrix, model } => model.support(&mat_t_vec(matrix, u)),
        }
    }
}

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

#[derive(Clone, Copy, Default)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Welford) -> Welford {
        if o.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Welford {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }
}

/// `h_{MΣπ(K₀(X_1), …, K₀(X_{n+1}))}(u) = ½ E|<u, F_π(X_1, …, X_{n+1})>|`.
pub fn mixed_fiber_mc(
    models: &[RandomVectorModel],
    split: &ProjectionSplit,
    u: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    Ok(mixed_fiber_mc_batch(models, split, &[u.to_vec()], samples, seed)?[0])
}

/// [`mixed_fiber_mc`] on several directions from one sample stream; each
/// entry equals the single-direction estimate with the same seed.
pub fn mixed_fiber_mc_batch(
    models: &[RandomVectorModel],
    split: &ProjectionSplit,
    directions: &[Vec<f64>],
    samples: usize,
    seed: u64,
) -> Result<Vec<Estimate>> {
    let n = split.n();
    if models.len() != n + 1 {
        return Err(FiberError::Arity {
            expected: n + 1,
            got: models.len(),
        });
    }
    if samples < MC_MIN_SAMPLES {
        return Err(FiberError::TooFewSamples {
            got: samples,
            min: MC_MIN_SAMPLES,
        });
    }
    for u in directions {
        check_dim(split.m(), u.len())?;
    }
    for m in models {
        check_dim(split.ambient_dim(), m.dim())?;
    }
    let k = directions.len();
    let parts: Vec<Vec<Welford>> = (0..MC_WORKERS)
        .into_par_iter()
        .map(|w| {
            let count = samples / MC_WORKERS + usize::from(w < samples % MC_WORKERS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(w as u64);
            let mut acc = vec![Welford::default(); k];
            let mut xs = vec![Vec::new(); n + 1];
            let mut ys = vec![Vec::new(); n + 1];
            for _ in 0..count {
                for (j, m) in models.iter().enumerate() {
                    let p = m.sample(&mut rng);
                    xs[j] = split.v_coords(&p);
                    ys[j] = split.w_coords(&p);
                }
                let f = f_pi_split(&xs, &ys);
                for (a, u) in acc.iter_mut().zip(directions) {
                    a.push(0.5 * dot(u, &f).abs());
                }
            }
            acc
        })
        .collect();
    Ok((0..k)
        .map(|i| {
            if directions[i].iter().all(|&c| c == 0.0) {
                return Estimate {
                    mean: 0.0,
                    stderr: 0.0,
                    samples,
                };
            }
            let total = parts
                .iter()
                .fold(Welford::default(), |acc, p| acc.merge(p[i]));
            let var = total.m2 / (total.n - 1.0);
            Estimate {
                mean: total.mean,
                stderr: (var / total.n).sqrt(),
                samples,
            }
        })
        .collect())
}

/// `h_{Σπ K₀(X)}(u)` from `n + 1` independent copies of `X`.
pub fn fiber_zonoid_mc(
    model: &RandomVectorModel,
    split: &ProjectionSplit,
    u: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    mixed_fiber_mc(&vec![model.clone(); split.n() + 1], split, u, samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split() -> ProjectionSplit {
        ProjectionSplit::coordinate(1, 2).unwrap()
    }

    #[test]
    fn cube_model_matches_exact_route() {
        let cube = RandomVectorModel::from_body(&BodySpec::cube(1.0, 3)).unwrap();
        let e = fiber_zonoid_mc(&cube, &split(), &[1.0, 0.0], 200_000, 11).unwrap();
        assert!((e.mean - 2.0).abs() < 4.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn model_support_matches_body() {
        let u = [0.3, -0.5, 0.8];
        for body in [
            BodySpec::dice(),
            BodySpec::cube(1.0, 3),
            BodySpec::Disc {
                axis: vec![1.0, 2.0, -1.0],
            },
        ] {
            let m = RandomVectorModel::from_body(&body).unwrap();
            assert!(
                (m.support(&u) - body.support(&u).unwrap()).abs() < 1e-12,
                "{}",
                body.kind()
            );
        }
    }

    #[test]
    fn deterministic_and_guarded() {
        let d = RandomVectorModel::dice();
        let a = fiber_zonoid_mc(&d, &split(), &[0.6, 0.8], 5000, 3).unwrap();
        let b = fiber_zonoid_mc(&d, &split(), &[0.6, 0.8], 5000, 3).unwrap();
        assert_eq!(a, b);
        let dirs = vec![vec![1.0, 0.0], vec![0.6, 0.8]];
        let batch =
            mixed_fiber_mc_batch(&[d.clone(), d.clone()], &split(), &dirs, 5000, 3).unwrap();
        assert_eq!(batch[1], a);
        assert_eq!(
            fiber_zonoid_mc(&d, &split(), &[0.0, 0.0], 5000, 3)
                .unwrap()
                .mean,
            0.0
        );
        assert!(matches!(
            fiber_zonoid_mc(&d, &split(), &[1.0, 0.0], 99, 3),
            Err(FiberError::TooFewSamples { .. })
        ));
        assert!(matches!(
            mixed_fiber_mc(&[d], &split(), &[1.0, 0.0], 1000, 3),
            Err(FiberError::Arity { .. })
        ));
    }

    #[test]
    fn weights_validated() {
        let m = RandomVectorModel::Discrete {
            atoms: vec![vec![1.0], vec![2.0]],
            weights: vec![0.5, 0.6],
        };
        assert!(m.validate().is_err());
    }
}
