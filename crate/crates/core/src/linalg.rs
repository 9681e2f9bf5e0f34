//! Small dense-vector helpers on `&[f64]`.

use nalgebra::DMatrix;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn normalized(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    scale(a, 1.0 / n)
}

pub fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}

/// Matrix (rows) times vector.
pub fn mat_vec(rows: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    rows.iter().map(|r| dot(r, v)).collect()
}

/// Transpose of a row-major matrix times a vector.
pub fn mat_t_vec(rows: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut out = vec![0.0; cols];
    for (r, &vi) in rows.iter().zip(v) {
        for (o, a) in out.iter_mut().zip(r) {
            *o += a * vi;
        }
    }
    out
}

/// Determinant of a square matrix given by its columns.
pub fn det_columns(cols: &[&[f64]]) -> f64 {
    let k = cols.len();
    match k {
        0 => 1.0,
        1 => cols[0][0],
        2 => cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1],
        3 => {
            let (a, b, c) = (cols[0], cols[1], cols[2]);
            a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1])
                + c[0] * (a[1] * b[2] - a[2] * b[1])
        }
        _ => DMatrix::from_fn(k, k, |i, j| cols[j][i]).determinant(),
    }
}

/// Numerical rank of a set of vectors (relative tolerance on singular values).
pub fn rank(vectors: &[Vec<f64>], rel_tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let d = vectors[0].len();
    let m = DMatrix::from_fn(d, vectors.len(), |i, j| vectors[j][i]);
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Orthonormal basis of the orthogonal complement of `v` (which need not be unit).
///
/// Deterministic: starts from the coordinate axes, skipping the one where `v`
/// has its largest component, and runs Gram–Schmidt.
pub fn orthonormal_complement(v: &[f64]) -> Vec<Vec<f64>> {
    let d = v.len();
    let vn = normalized(v);
    let pivot = (0..d)
        .max_by(|&i, &j| vn[i].abs().total_cmp(&vn[j].abs()))
        .unwrap_or(0);
    let mut basis: Vec<Vec<f64>> = vec![vn];
    for i in (0..d).filter(|&i| i != pivot) {
        let mut w = unit(d, i);
        for b in &basis {
            let c = dot(&w, b);
            w = axpy(&w, -c, b);
        }
        let n = norm(&w);
        basis.push(scale(&w, 1.0 / n));
    }
    basis.remove(0);
    basis
}
