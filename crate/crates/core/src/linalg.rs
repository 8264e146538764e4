//! Small dense linear algebra on coordinate slices.
//!
//! Everything here works in ambient dimension at most a handful, so plain
//! `Vec<f64>` vectors and `nalgebra` dynamic matrices are used throughout.

use nalgebra::{DMatrix, DVector};

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn centroid<P: AsRef<[f64]>>(points: &[P]) -> Vec<f64> {
    let n = points[0].as_ref().len();
    let mut c = vec![0.0; n];
    for p in points {
        for (ci, x) in c.iter_mut().zip(p.as_ref()) {
            *ci += x;
        }
    }
    let m = points.len() as f64;
    c.iter_mut().for_each(|x| *x /= m);
    c
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Matrix whose columns are the given vectors.
pub fn columns(vectors: &[Vec<f64>], rows: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, vectors.len(), |r, c| vectors[c][r])
}

/// `k`-volume of the parallelotope spanned by `vectors`, the product of the
/// diagonal of a Householder QR factor.
pub fn parallelotope_volume(vectors: &[Vec<f64>]) -> f64 {
    if vectors.is_empty() {
        return 1.0;
    }
    let rows = vectors[0].len();
    if vectors.len() > rows {
        return 0.0;
    }
    let r = columns(vectors, rows).qr().r();
    r.diagonal().iter().map(|x| x.abs()).product()
}

/// Solves the square system `a x = b`, `None` when singular.
pub fn solve(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    a.lu().solve(&b)
}

/// Singular values (descending) of the matrix whose columns are `vectors`.
pub fn singular_values(vectors: &[Vec<f64>], rows: usize) -> Vec<f64> {
    if vectors.is_empty() || rows == 0 {
        return Vec::new();
    }
    let m = columns(vectors, rows);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Orthonormal basis of the span of `vectors` by modified Gram-Schmidt
/// with column pivoting, stopping once every residual norm is at or below
/// `tol`. The SVD is avoided here since its singular vectors lose accuracy
/// on nearly rank-deficient input.
pub fn orthonormal_basis(vectors: &[Vec<f64>], rows: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut residual: Vec<Vec<f64>> = vectors.iter().filter(|v| v.len() == rows).cloned().collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < rows {
        let Some((k, len)) = residual
            .iter()
            .map(|r| norm(r))
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
        else {
            break;
        };
        if !(len > tol) || len == 0.0 {
            break;
        }
        let mut q = scale(&residual[k], 1.0 / len);
        for b in &basis {
            let c = dot(&q, b);
            q = axpy(&q, -c, b);
        }
        let l = norm(&q);
        if l == 0.0 {
            break;
        }
        q = scale(&q, 1.0 / l);
        residual.swap_remove(k);
        for r in residual.iter_mut() {
            let c = dot(r, &q);
            *r = axpy(r, -c, &q);
        }
        basis.push(q);
    }
    basis
}

/// An affine subspace `origin + span(basis)` with orthonormal basis vectors.
#[derive(Clone, Debug)]
pub struct AffineFrame {
    pub origin: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

impl AffineFrame {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.origin.len()
    }

    pub fn to_local(&self, x: &[f64]) -> Vec<f64> {
        let d = sub(x, &self.origin);
        self.basis.iter().map(|b| dot(b, &d)).collect()
    }

    pub fn to_ambient(&self, s: &[f64]) -> Vec<f64> {
        let mut x = self.origin.clone();
        for (b, si) in self.basis.iter().zip(s) {
            for (xj, bj) in x.iter_mut().zip(b) {
                *xj += si * bj;
            }
        }
        x
    }

    /// Component of `v` lying in the frame's direction space, in local coordinates.
    pub fn project_direction(&self, v: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| dot(b, v)).collect()
    }

    /// Affine hull of `points`; directions with residual at most `tol` are dropped.
    pub fn through<P: AsRef<[f64]>>(points: &[P], tol: f64) -> AffineFrame {
        let origin = points[0].as_ref().to_vec();
        let n = origin.len();
        let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p.as_ref(), &origin)).collect();
        let basis = orthonormal_basis(&edges, n, tol);
        AffineFrame { origin, basis }
    }
}

/// Barycentric coordinate functionals of a (possibly lower-dimensional)
/// simplex, extended to the ambient space by orthogonal projection onto its
/// affine hull.
#[derive(Clone, Debug)]
pub struct Barycentric {
    /// `lambda_i(x) = grads[i] . x + offsets[i]`
    pub grads: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

impl Barycentric {
    /// `None` when the points are affinely dependent.
    pub fn new<P: AsRef<[f64]>>(points: &[P]) -> Option<Barycentric> {
        let v0 = points[0].as_ref();
        let n = v0.len();
        let k = points.len() - 1;
        if k == 0 {
            return Some(Barycentric {
                grads: vec![vec![0.0; n]],
                offsets: vec![1.0],
            });
        }
        let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p.as_ref(), v0)).collect();
        let e = columns(&edges, n);
        let gram = e.transpose() * &e;
        let scale = edges.iter().map(|v| dot(v, v)).fold(0.0, f64::max);
        if gram.determinant() <= 1e-26 * scale.powi(k as i32) {
            return None;
        }
        let inv = gram.try_inverse()?;
        if inv.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let pinv = inv * e.transpose(); // k x n
        let mut grads = Vec::with_capacity(k + 1);
        let mut offsets = Vec::with_capacity(k + 1);
        let mut g0 = vec![0.0; n];
        let mut h0 = 1.0;
        for i in 0..k {
            let g: Vec<f64> = (0..n).map(|j| pinv[(i, j)]).collect();
            let h = -dot(&g, v0);
            for (a, b) in g0.iter_mut().zip(&g) {
                *a -= b;
            }
            h0 -= h;
            grads.push(g);
            offsets.push(h);
        }
        grads.insert(0, g0);
        offsets.insert(0, h0);
        Some(Barycentric { grads, offsets })
    }

    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        self.grads
            .iter()
            .zip(&self.offsets)
            .map(|(g, h)| dot(g, x) + h)
            .collect()
    }
}

/// Determinant of the square matrix whose columns are `vectors`.
pub fn determinant(vectors: &[Vec<f64>]) -> f64 {
    let n = vectors.len();
    columns(vectors, n).determinant()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barycentric_of_vertices_is_unit() {
        let pts = vec![vec![0.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], vec![0.0, 3.0, 0.0]];
        let b = Barycentric::new(&pts).unwrap();
        for (i, p) in pts.iter().enumerate() {
            let l = b.coords(p);
            for (j, v) in l.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
        // off-hull points project onto the hull
        let l = b.coords(&[0.5, 0.5, 7.0]);
        assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frame_round_trip() {
        let pts = vec![vec![1.0, 1.0, 1.0], vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 2.0]];
        let f = AffineFrame::through(&pts, 1e-12);
        assert_eq!(f.dim(), 2);
        let s = f.to_local(&pts[2]);
        let back = f.to_ambient(&s);
        assert!(dist(&back, &pts[2]) < 1e-12);
    }

    #[test]
    fn dependent_points_have_no_barycentric_frame() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]];
        assert!(Barycentric::new(&pts).is_none());
    }
}
