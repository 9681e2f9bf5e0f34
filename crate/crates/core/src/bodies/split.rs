use serde::{Deserialize, Serialize};

use crate::error::{FiberError, Result};
use crate::linalg::{dot, unit};

/// Orthogonal decomposition `R^{n+m} = V ⊕ W` with the projection onto `V`.
///
/// Coordinates "in V" and "in W" always refer to the stored orthonormal bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSplit {
    n: usize,
    m: usize,
    basis_v: Vec<Vec<f64>>,
    basis_w: Vec<Vec<f64>>,
}

impl ProjectionSplit {
    /// `V` spanned by the first `n` coordinate axes, `W` by the remaining `m`.
    pub fn coordinate(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(FiberError::Validation(format!(
                "split needs n >= 1 and m >= 1, got n = {n}, m = {m}"
            )));
        }
        let d = n + m;
        Ok(Self {
            n,
            m,
            basis_v: (0..n).map(|i| unit(d, i)).collect(),
            basis_w: (n..d).map(|i| unit(d, i)).collect(),
        })
    }

    /// Split from explicit bases; their union must be orthonormal to 1e-12.
    pub fn from_bases(basis_v: Vec<Vec<f64>>, basis_w: Vec<Vec<f64>>) -> Result<Self> {
        let n = basis_v.len();
        let m = basis_w.len();
        if n == 0 || m == 0 {
            return Err(FiberError::Validation(
                "split needs at least one V and one W basis vector".into(),
            ));
        }
        let d = n + m;
        let all: Vec<&Vec<f64>> = basis_v.iter().chain(&basis_w).collect();
        if let Some(bad) = all.iter().find(|b| b.len() != d) {
            return Err(FiberError::Validation(format!(
                "basis vector has length {}, expected {d}",
                bad.len()
            )));
        }
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let g = dot(a, b);
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - target).abs() > 1e-12 {
                    return Err(FiberError::Validation(format!(
                        "split bases are not orthonormal (Gram[{i}][{j}] = {g})"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            m,
            basis_v,
            basis_w,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + self.m
    }

    pub fn basis_v(&self) -> &[Vec<f64>] {
        &self.basis_v
    }

    pub fn basis_w(&self) -> &[Vec<f64>] {
        &self.basis_w
    }

    /// Ambient vector `Σ x_i b^V_i + Σ y_j b^W_j`.
    pub fn embed(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim()];
        for (c, b) in x
            .iter()
            .zip(&self.basis_v)
            .chain(y.iter().zip(&self.basis_w))
        {
            for (o, bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    }

    pub fn embed_v(&self, x: &[f64]) -> Vec<f64> {
        self.embed(x, &vec![0.0; self.m])
    }

    pub fn embed_w(&self, y: &[f64]) -> Vec<f64> {
        self.embed(&vec![0.0; self.n], y)
    }

    /// Coordinates of `π(p)` in the V basis.
    pub fn v_coords(&self, p: &[f64]) -> Vec<f64> {
        self.basis_v.iter().map(|b| dot(b, p)).collect()
    }

    /// Coordinates of the W-part of `p` in the W basis.
    pub fn w_coords(&self, p: &[f64]) -> Vec<f64> {
        self.basis_w.iter().map(|b| dot(b, p)).collect()
    }

    pub fn is_coordinate(&self) -> bool {
        *self == Self::coordinate(self.n, self.m).expect("n, m >= 1")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_split_roundtrip() {
        let s = ProjectionSplit::coordinate(1, 2).unwrap();
        let p = s.embed(&[0.5], &[1.0, -2.0]);
        assert_eq!(p, vec![0.5, 1.0, -2.0]);
        assert_eq!(s.v_coords(&p), vec![0.5]);
        assert_eq!(s.w_coords(&p), vec![1.0, -2.0]);
    }

    #[test]
    fn rejects_non_orthonormal() {
        let r = ProjectionSplit::from_bases(vec![vec![1.0, 0.1]], vec![vec![0.0, 1.0]]);
        assert!(matches!(r, Err(FiberError::Validation(_))));
        assert!(ProjectionSplit::coordinate(0, 2).is_err());
    }

    #[test]
    fn rotated_split() {
        let c = 0.6;
        let s = 0.8;
        let split = ProjectionSplit::from_bases(
            vec![vec![c, s, 0.0]],
            vec![vec![-s, c, 0.0], vec![0.0, 0.0, 1.0]],
        )
        .unwrap();
        let p = split.embed(&[2.0], &[1.0, 3.0]);
        let x = split.v_coords(&p);
        let y = split.w_coords(&p);
        assert!((x[0] - 2.0).abs() < 1e-15);
        assert!((y[0] - 1.0).abs() < 1e-15 && (y[1] - 3.0).abs() < 1e-15);
    }
}
