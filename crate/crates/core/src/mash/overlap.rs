//! Selection of the overlap subcomplexes around the ball `B_ε(v0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Barycentric};
use crate::simplex::{self, SimplicialComplex};
use crate::transversal::simplex_distance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapRegion {
    /// Simplices of K1 within `d2` of `l2`.
    pub l1: Vec<usize>,
    /// Simplices of K2 inside the ball whose distance to the sphere lies in `[d1, d1 + d2]`.
    pub l2: Vec<usize>,
    /// Simplices of K1 inside the ball sharing a vertex with `l1`.
    pub m1: Vec<usize>,
    /// Simplices of K2 inside the ball sharing a vertex with `l2`.
    pub m2: Vec<usize>,
    pub center_vertex: usize,
    pub center: Vec<f64>,
    pub epsilon: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Largest distance from `center` to a vertex of simplex `id`.
pub fn max_radius(c: &SimplicialComplex, id: usize, center: &[f64]) -> f64 {
    c.simplex(id)
        .vertices()
        .iter()
        .map(|&v| linalg::dist(c.vertex(v), center))
        .fold(0.0, f64::max)
}

/// Distance from `center` to the closed simplex `id`.
pub fn min_radius(c: &SimplicialComplex, id: usize, center: &[f64]) -> f64 {
    simplex_distance(&[center], &c.simplex_points(id))
}

/// Whether `x` lies in the closed simplex `pts` (full-dimensional), with a
/// barycentric slack of `tol`.
pub fn contains_point<P: AsRef<[f64]>>(pts: &[P], x: &[f64], tol: f64) -> bool {
    match Barycentric::new(pts) {
        Some(b) => b.coords(x).iter().all(|&l| l >= -tol),
        None => false,
    }
}

/// Mesh sizes `(d1, d2)`: the smaller and larger of the two complexes' maximal diameters.
pub fn mesh_sizes(k1: &SimplicialComplex, k2: &SimplicialComplex) -> (f64, f64) {
    let (a, b) = (k1.mesh_size(), k2.mesh_size());
    (a.min(b), a.max(b))
}

fn share_vertex(c: &SimplicialComplex, a: usize, b: usize) -> bool {
    c.simplex(a).vertices().iter().any(|v| c.simplex(b).vertices().contains(v))
}

fn boxes_within(c1: &SimplicialComplex, a: usize, c2: &SimplicialComplex, b: usize, slack: f64) -> bool {
    let (lo1, hi1) = c1.bbox(a);
    let (lo2, hi2) = c2.bbox(b);
    (0..lo1.len()).all(|j| lo1[j] <= hi2[j] + slack && lo2[j] <= hi1[j] + slack)
}

pub fn select_overlap(k1: &SimplicialComplex, k2: &SimplicialComplex, v0: usize, eps: f64) -> Result<OverlapRegion> {
    if v0 >= k1.num_vertices() {
        return Err(Error::Input(format!("center vertex {v0} out of range")));
    }
    if k1.ambient_dim() != k2.ambient_dim() {
        return Err(Error::Input("complexes live in different ambient dimensions".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Input(format!("ball radius must be positive, got {eps}")));
    }
    let center = k1.vertex(v0).0.clone();
    let (d1, d2) = mesh_sizes(k1, k2);
    let rmax2: Vec<f64> = (0..k2.num_simplices()).map(|i| max_radius(k2, i, &center)).collect();

    let l2: Vec<usize> = (0..k2.num_simplices())
        .filter(|&i| rmax2[i] <= eps && eps - rmax2[i] >= d1 && eps - rmax2[i] <= d1 + d2)
        .collect();
    if l2.is_empty() {
        let min_viable_eps = rmax2.iter().copied().fold(f64::INFINITY, f64::min) + d1;
        return Err(Error::OverlapTooThin { min_viable_eps });
    }
    let m2: Vec<usize> = (0..k2.num_simplices())
        .filter(|&i| rmax2[i] <= eps && l2.iter().any(|&j| share_vertex(k2, i, j)))
        .collect();
    let l1: Vec<usize> = (0..k1.num_simplices())
        .filter(|&i| {
            l2.iter().any(|&j| {
                boxes_within(k1, i, k2, j, d2)
                    && simplex_distance(&k1.simplex_points(i), &k2.simplex_points(j)) <= d2
            })
        })
        .collect();
    let m1: Vec<usize> = (0..k1.num_simplices())
        .filter(|&i| max_radius(k1, i, &center) <= eps && l1.iter().any(|&j| share_vertex(k1, i, j)))
        .collect();
    Ok(OverlapRegion {
        l1,
        l2,
        m1,
        m2,
        center_vertex: v0,
        center,
        epsilon: eps,
        d1,
        d2,
    })
}

/// Whether any simplex of `a` meets any simplex of `b`.
pub fn carriers_meet(a: &SimplicialComplex, b: &SimplicialComplex) -> bool {
    let tol = simplex::EPS_GEOM * a.mesh_size().max(b.mesh_size());
    (0..a.num_simplices()).any(|i| {
        (0..b.num_simplices()).any(|j| {
            boxes_within(a, i, b, j, tol)
                && simplex_distance(&a.simplex_points(i), &b.simplex_points(j)) <= tol
        })
    })
}
