//! δ-transversality of simplex pairs, principal angles and simplex distances.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cell::{self, ConvexCell};
use crate::error::{Error, Result};
use crate::linalg::{self, AffineFrame};
use crate::simplex::{self, faces_of};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransversalityCertificate {
    pub holds: bool,
    /// Intersection has the generic dimension (empty when `k1 + k2 < n`).
    pub dim_check: bool,
    /// Smallest principal angle between the affine hulls outside the shared
    /// directions; π/2 when the condition is vacuous.
    pub angle_margin: f64,
    /// Minimum over non-intersecting low-dimensional face pairs of
    /// `dist / diam(s1)`; infinite when there is no such pair.
    pub distance_margin: f64,
    pub witnessed_delta: f64,
    pub delta: f64,
    /// The inputs were exchanged so that `diam(s1) <= diam(s2)`.
    pub swapped: bool,
    /// Dimension of the intersection, `None` when empty or ambiguous.
    pub intersection_dim: Option<usize>,
    /// Local vertex indices (after reordering) of the face pair realizing the
    /// distance margin.
    pub witness_faces: Option<(Vec<usize>, Vec<usize>)>,
}

/// Principal angles (ascending, radians) between the spans of two
/// orthonormal bases.
pub fn principal_angles(u1: &[Vec<f64>], u2: &[Vec<f64>]) -> Vec<f64> {
    if u1.is_empty() || u2.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(u1.len(), u2.len(), |i, j| linalg::dot(&u1[i], &u2[j]));
    let mut angles: Vec<f64> = m
        .singular_values()
        .iter()
        .map(|s| s.clamp(-1.0, 1.0).acos())
        .collect();
    angles.sort_by(f64::total_cmp);
    angles
}

/// Closest points between the closed simplices `a` and `b`, with their distance.
pub fn closest_points<P: AsRef<[f64]>, Q: AsRef<[f64]>>(a: &[P], b: &[Q]) -> (Vec<f64>, Vec<f64>, f64) {
    let ia: Vec<usize> = (0..a.len()).collect();
    let ib: Vec<usize> = (0..b.len()).collect();
    let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    for fa in faces_of(&ia) {
        for fb in faces_of(&ib) {
            let pa: Vec<&[f64]> = fa.iter().map(|&i| a[i].as_ref()).collect();
            let pb: Vec<&[f64]> = fb.iter().map(|&i| b[i].as_ref()).collect();
            let Some((x, y)) = hull_closest(&pa, &pb) else { continue };
            let d = linalg::dist(&x, &y);
            if best.as_ref().map_or(true, |(_, _, bd)| d < *bd) {
                best = Some((x, y, d));
            }
        }
    }
    best.expect("vertex pairs always yield a candidate")
}

pub fn simplex_distance<P: AsRef<[f64]>, Q: AsRef<[f64]>>(a: &[P], b: &[Q]) -> f64 {
    closest_points(a, b).2
}

/// Closest pair of the affine hulls, kept only if both points lie in the
/// closed simplices.
fn hull_closest(a: &[&[f64]], b: &[&[f64]]) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = a[0].len();
    let ka = a.len() - 1;
    let kb = b.len() - 1;
    if ka + kb == 0 {
        return Some((a[0].to_vec(), b[0].to_vec()));
    }
    let mut cols: Vec<Vec<f64>> = a[1..].iter().map(|p| linalg::sub(p, a[0])).collect();
    cols.extend(b[1..].iter().map(|p| linalg::sub(b[0], p)));
    let m = linalg::columns(&cols, n);
    let rhs = DVector::from_vec(linalg::sub(b[0], a[0]));
    let svd = m.svd(true, true);
    let smax = svd.singular_values.max();
    let z = svd.solve(&rhs, 1e-12 * smax.max(1e-300)).ok()?;
    let alpha = &z.as_slice()[..ka];
    let beta = &z.as_slice()[ka..];
    let bary_ok = |c: &[f64]| c.iter().all(|&x| x >= -1e-12) && c.iter().sum::<f64>() <= 1.0 + 1e-12;
    if !bary_ok(alpha) || !bary_ok(beta) {
        return None;
    }
    let mut x = a[0].to_vec();
    for (i, al) in alpha.iter().enumerate() {
        x = linalg::axpy(&x, *al, &cols[i]);
    }
    let mut y = b[0].to_vec();
    for (i, be) in beta.iter().enumerate() {
        y = linalg::axpy(&y, -be, &cols[ka + i]);
    }
    Some((x, y))
}

fn hull_basis<P: AsRef<[f64]>>(points: &[P], tol: f64) -> Vec<Vec<f64>> {
    AffineFrame::through(points, tol).basis
}

/// Evaluates the three transversality conditions for the pair at `delta`.
pub fn transversality<P: AsRef<[f64]>, Q: AsRef<[f64]>>(
    s1: &[P],
    s2: &[Q],
    delta: f64,
    tol: f64,
) -> Result<TransversalityCertificate> {
    let a: Vec<&[f64]> = s1.iter().map(|p| p.as_ref()).collect();
    let b: Vec<&[f64]> = s2.iter().map(|p| p.as_ref()).collect();
    if a.is_empty() || b.is_empty() || a[0].len() != b[0].len() {
        return Err(Error::Input("simplices must be non-empty and share an ambient dimension".into()));
    }
    let swapped = simplex::diameter(&a) > simplex::diameter(&b);
    let (a, b) = if swapped { (b, a) } else { (a, b) };
    let n = a[0].len();
    let (k1, k2) = (a.len() - 1, b.len() - 1);
    let d1 = simplex::diameter(&a);
    let scale = simplex::diameter(&b).max(f64::MIN_POSITIVE);

    let cell: std::result::Result<Option<ConvexCell>, Error> = cell::intersect_points(&a, &b, tol);
    let (dim_check, intersection_dim, angle) = match cell {
        Err(Error::ToleranceAmbiguity { .. }) => (false, None, 0.0),
        Err(e) => return Err(e),
        Ok(None) => (true, None, FRAC_PI_2),
        Ok(Some(c)) => {
            let q = c.dim();
            let ok = k1 + k2 >= n && q == k1 + k2 - n;
            let angles = principal_angles(&hull_basis(&a, tol * scale), &hull_basis(&b, tol * scale));
            let angle = angles.get(q).copied().unwrap_or(FRAC_PI_2);
            (ok, Some(q), angle)
        }
    };

    let mut distance_margin = f64::INFINITY;
    let mut witness = None;
    let ia: Vec<usize> = (0..a.len()).collect();
    let ib: Vec<usize> = (0..b.len()).collect();
    let faces_b = faces_of(&ib);
    for fa in faces_of(&ia) {
        for fb in &faces_b {
            if (fa.len() - 1) + (fb.len() - 1) >= n {
                continue;
            }
            let pa: Vec<&[f64]> = fa.iter().map(|&i| a[i]).collect();
            let pb: Vec<&[f64]> = fb.iter().map(|&i| b[i]).collect();
            let d = simplex_distance(&pa, &pb);
            if d <= tol * scale {
                continue;
            }
            let m = if d1 > 0.0 { d / d1 } else { f64::INFINITY };
            if m < distance_margin {
                distance_margin = m;
                witness = Some((fa.clone(), fb.clone()));
            }
        }
    }

    let witnessed_delta = if dim_check { angle.min(distance_margin) } else { 0.0 };
    Ok(TransversalityCertificate {
        holds: dim_check && delta > 0.0 && delta < witnessed_delta,
        dim_check,
        angle_margin: angle,
        distance_margin,
        witnessed_delta,
        delta,
        swapped,
        intersection_dim,
        witness_faces: witness,
    })
}
