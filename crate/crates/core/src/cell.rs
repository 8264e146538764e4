//! Convex polytopal cells arising as intersections of two simplices, their
//! Chebyshev centers, and the inductive center-join subdivision.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dist, dot, AffineFrame, Barycentric};
use crate::simplex::{self, Point, Simplex, SimplicialComplex, EPS_GEOM};

/// Singular values between `eps * diam` and `AMBIGUITY_FACTOR * eps * diam`
/// make the affine dimension of a vertex set ambiguous.
pub const AMBIGUITY_FACTOR: f64 = 100.0;

/// Smallest singular value of unit constraint normals accepted as a vertex system.
const DEPENDENT_NORMALS: f64 = 1e-7;

/// An affine inequality `grad . x + offset >= 0` in ambient coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Functional {
    pub grad: Vec<f64>,
    pub offset: f64,
}

impl Functional {
    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.grad, x) + self.offset
    }
}

/// `normal . x <= offset`, with `normal` a unit vector inside the cell's
/// affine hull.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellFace {
    /// Indices into the cell's vertex list, ascending.
    pub vertices: Vec<usize>,
    pub dim: usize,
}

/// A bounded convex polytope with both representations and its proper faces.
#[derive(Clone, Debug)]
pub struct ConvexCell {
    frame: AffineFrame,
    functionals: Vec<Functional>,
    hrep: Vec<Halfspace>,
    vrep: Vec<Point>,
    faces: Vec<CellFace>,
    tol: f64,
}

impl ConvexCell {
    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.ambient_dim()
    }

    pub fn hrep(&self) -> &[Halfspace] {
        &self.hrep
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vrep
    }

    /// Proper faces of every dimension, ordered by dimension then vertex set.
    pub fn faces(&self) -> &[CellFace] {
        &self.faces
    }

    pub fn frame(&self) -> &AffineFrame {
        &self.frame
    }

    pub fn diameter(&self) -> f64 {
        simplex::diameter(&self.vrep)
    }

    /// The cell of a simplex given by its vertex coordinates.
    pub fn from_simplex<P: AsRef<[f64]>>(points: &[P], tol: f64) -> Result<ConvexCell> {
        let scale = simplex::diameter(points).max(f64::MIN_POSITIVE);
        let frame = AffineFrame::through(points, tol * scale);
        if frame.dim() + 1 != points.len() {
            return Err(Error::DegenerateGeometry("simplex is affinely dependent".into()));
        }
        let functionals = functionals_of(points)?;
        build_cell(frame, functionals, tol, scale)?
            .ok_or_else(|| Error::DegenerateGeometry("empty simplex cell".into()))
    }

    /// Convex hull of a point set (brute-force facet enumeration; meant for the
    /// handful of points a desk-scale cell has).
    pub fn from_vertices<P: AsRef<[f64]>>(points: &[P], tol: f64) -> Result<ConvexCell> {
        if points.is_empty() {
            return Err(Error::Input("no points".into()));
        }
        let scale = simplex::diameter(points).max(f64::MIN_POSITIVE);
        let frame = AffineFrame::through(points, tol * scale);
        let q = frame.dim();
        let local: Vec<Vec<f64>> = points.iter().map(|p| frame.to_local(p.as_ref())).collect();
        let mut functionals: Vec<Functional> = Vec::new();
        if q > 0 {
            for subset in combinations(local.len(), q) {
                let pts: Vec<&Vec<f64>> = subset.iter().map(|&i| &local[i]).collect();
                let Some(normal) = hyperplane_normal(&pts, q) else { continue };
                let c = dot(&normal, pts[0]);
                let side: Vec<f64> = local.iter().map(|p| dot(&normal, p) - c).collect();
                let tl = tol * scale;
                let (normal, c) = if side.iter().all(|&s| s <= tl) {
                    (normal, c)
                } else if side.iter().all(|&s| s >= -tl) {
                    (linalg::scale(&normal, -1.0), -c)
                } else {
                    continue;
                };
                // normal . s <= c  <=>  -(U^T normal) . (x - o) + c >= 0
                let amb: Vec<f64> = (0..frame.ambient_dim())
                    .map(|j| frame.basis.iter().zip(&normal).map(|(b, n)| b[j] * n).sum())
                    .collect();
                let f = Functional {
                    grad: linalg::scale(&amb, -1.0),
                    offset: c + dot(&amb, &frame.origin),
                };
                if !functionals
                    .iter()
                    .any(|g| dist(&g.grad, &f.grad) < 1e-12 && (g.offset - f.offset).abs() < tl)
                {
                    functionals.push(f);
                }
            }
        }
        build_cell(frame, functionals, tol, scale)?
            .ok_or_else(|| Error::DegenerateGeometry("empty hull".into()))
    }

    /// The sub-cell spanned by one of this cell's faces.
    pub fn face_cell(&self, face: &CellFace) -> Result<ConvexCell> {
        let pts: Vec<&Point> = face.vertices.iter().map(|&i| &self.vrep[i]).collect();
        let scale = simplex::diameter(&pts).max(f64::MIN_POSITIVE);
        let frame = AffineFrame::through(&pts, self.tol * scale);
        build_cell(frame, self.functionals.clone(), self.tol, scale)?
            .ok_or_else(|| Error::DegenerateGeometry("empty face".into()))
    }

    /// Facets of the face with the given vertex set (or of the whole cell).
    fn facets_of(&self, verts: &[usize], dim: usize) -> Vec<&CellFace> {
        self.faces
            .iter()
            .filter(|f| f.dim + 1 == dim && f.vertices.iter().all(|v| verts.contains(v)))
            .collect()
    }

    fn all_vertex_ids(&self) -> Vec<usize> {
        (0..self.vrep.len()).collect()
    }

    /// q-dimensional volume by pyramid decomposition from a vertex.
    pub fn volume(&self) -> f64 {
        self.face_volume(&self.all_vertex_ids(), self.dim())
    }

    fn face_volume(&self, verts: &[usize], dim: usize) -> f64 {
        match dim {
            0 => 1.0,
            1 => dist(&self.vrep[verts[0]], &self.vrep[verts[verts.len() - 1]]),
            _ => {
                let apex = &self.vrep[verts[0]];
                self.facets_of(verts, dim)
                    .into_iter()
                    .filter(|f| !f.vertices.contains(&verts[0]))
                    .map(|f| {
                        let pts: Vec<&Point> = f.vertices.iter().map(|&i| &self.vrep[i]).collect();
                        let frame = AffineFrame::through(&pts, self.tol * simplex::diameter(&pts));
                        let foot = frame.to_ambient(&frame.to_local(apex));
                        dist(apex, &foot) * self.face_volume(&f.vertices, dim - 1) / dim as f64
                    })
                    .sum()
            }
        }
    }

    /// Point of the cell farthest from its relative boundary, with that
    /// distance. Solved as a linear program by enumerating bases, keeping the
    /// lexicographically smallest optimum.
    pub fn chebyshev_center(&self) -> (Point, f64) {
        let q = self.dim();
        if q == 0 {
            return (self.vrep[0].clone(), 0.0);
        }
        let scale = self.diameter().max(f64::MIN_POSITIVE);
        let tl = self.tol * scale;
        // rows: [a_local, 1] (s, r) <= b ; plus -r <= 0
        let mut rows: Vec<(Vec<f64>, f64)> = self
            .hrep
            .iter()
            .map(|h| {
                let mut a = self.frame.project_direction(&h.normal);
                a.push(1.0);
                (a, h.offset - dot(&h.normal, &self.frame.origin))
            })
            .collect();
        let mut nonneg = vec![0.0; q];
        nonneg.push(-1.0);
        rows.push((nonneg, 0.0));

        let mut best: Option<(Vec<f64>, f64, Vec<f64>)> = None;
        for basis in combinations(rows.len(), q + 1) {
            let a = DMatrix::from_fn(q + 1, q + 1, |i, j| rows[basis[i]].0[j]);
            let b = DVector::from_fn(q + 1, |i, _| rows[basis[i]].1);
            let Some(z) = linalg::solve(a, b) else { continue };
            if z.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let z: Vec<f64> = z.iter().copied().collect();
            if rows.iter().any(|(a, b)| dot(a, &z) > b + tl) {
                continue;
            }
            let r = z[q];
            let x = self.frame.to_ambient(&z[..q]);
            let better = match &best {
                None => true,
                Some((_, br, bx)) => {
                    if r > br + tl {
                        true
                    } else if r < br - tl {
                        false
                    } else {
                        lex_less(&x, bx, tl)
                    }
                }
            };
            if better {
                best = Some((z, r, x));
            }
        }
        match best {
            Some((_, r, x)) => (Point(x), r.max(0.0)),
            None => (Point(linalg::centroid(&self.vrep)), 0.0),
        }
    }

    /// Serializable summary for reports.
    pub fn report(&self) -> CellReport {
        let (center, radius) = self.chebyshev_center();
        CellReport {
            dim: self.dim(),
            vertices: self.vrep.iter().map(|p| p.0.clone()).collect(),
            halfspaces: self.hrep.clone(),
            faces: self.faces.iter().map(|f| (f.dim, f.vertices.clone())).collect(),
            chebyshev_center: center.0,
            chebyshev_radius: radius,
            volume: self.volume(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellReport {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub halfspaces: Vec<Halfspace>,
    /// `(dim, vertex indices)` for each proper face.
    pub faces: Vec<(usize, Vec<usize>)>,
    pub chebyshev_center: Vec<f64>,
    pub chebyshev_radius: f64,
    pub volume: f64,
}

fn lex_less(a: &[f64], b: &[f64], tol: f64) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < &(y - tol) {
            return true;
        }
        if x > &(y + tol) {
            return false;
        }
    }
    false
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 && idx[0] == n - k {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Unit normal of the hyperplane through `q` points in R^q.
fn hyperplane_normal(pts: &[&Vec<f64>], q: usize) -> Option<Vec<f64>> {
    if q == 1 {
        return Some(vec![1.0]);
    }
    let diffs: Vec<Vec<f64>> = pts[1..].iter().map(|p| linalg::sub(p, pts[0])).collect();
    let scale = diffs.iter().map(|d| linalg::norm(d)).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let d = linalg::columns(&diffs, q);
    let eig = SymmetricEigen::new(&d * d.transpose());
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    // the second-smallest eigenvalue must be clearly non-zero
    if eig.eigenvalues[order[1]] <= 1e-20 * scale * scale {
        return None;
    }
    let n: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    let len = linalg::norm(&n);
    Some(linalg::scale(&n, 1.0 / len))
}

/// Barycentric coordinate functionals of a non-degenerate simplex.
pub fn functionals_of<P: AsRef<[f64]>>(points: &[P]) -> Result<Vec<Functional>> {
    let b = Barycentric::new(points)
        .ok_or_else(|| Error::DegenerateGeometry("simplex is affinely dependent".into()))?;
    Ok(b.grads
        .into_iter()
        .zip(b.offsets)
        .map(|(grad, offset)| Functional { grad, offset })
        .collect())
}

/// Affine rank of a point set, or an ambiguity error when a singular value
/// sits inside the tolerance band.
pub fn affine_rank<P: AsRef<[f64]>>(points: &[P], tol: f64) -> Result<usize> {
    if points.len() <= 1 {
        return Ok(0);
    }
    let c = linalg::centroid(points);
    let n = c.len();
    let diffs: Vec<Vec<f64>> = points.iter().map(|p| linalg::sub(p.as_ref(), &c)).collect();
    let d = simplex::diameter(points);
    if d == 0.0 {
        return Ok(0);
    }
    let sv = linalg::singular_values(&diffs, n);
    let mut rank = 0;
    for s in sv {
        let rel = s / d;
        if rel > AMBIGUITY_FACTOR * tol {
            rank += 1;
        } else if rel > tol {
            return Err(Error::ToleranceAmbiguity {
                low: rank,
                high: rank + 1,
            });
        }
    }
    Ok(rank)
}

/// Builds the cell `{x in frame : f(x) >= 0 for all f}`, shrinking the frame
/// to the affine hull of the vertices when the cell is lower-dimensional.
fn build_cell(
    frame: AffineFrame,
    functionals: Vec<Functional>,
    tol: f64,
    scale: f64,
) -> Result<Option<ConvexCell>> {
    build_cell_within(frame, functionals, tol, scale, &[])
}

/// `span` holds points spanning `frame` after a rank drop; a functional
/// that varies by less than the tolerance over them counts as constant.
fn build_cell_within(
    frame: AffineFrame,
    functionals: Vec<Functional>,
    tol: f64,
    scale: f64,
    span: &[Vec<f64>],
) -> Result<Option<ConvexCell>> {
    let tl = tol * scale;
    let q = frame.dim();
    // local constraints a . s <= b with |a| = 1; constant ones are checked now
    let mut local: Vec<(Vec<f64>, f64, usize)> = Vec::new();
    for (idx, f) in functionals.iter().enumerate() {
        let g = frame.project_direction(&f.grad);
        let gn = linalg::norm(&g);
        let value_at_origin = f.eval(&frame.origin);
        let gscale = linalg::norm(&f.grad).max(f64::MIN_POSITIVE);
        if gn <= 1e-12 * gscale {
            if value_at_origin < -tol * gscale * scale {
                return Ok(None);
            }
            continue;
        }
        if !span.is_empty() {
            let values: Vec<f64> = span.iter().map(|p| f.eval(p)).collect();
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi - lo <= tol * gscale * scale {
                if lo < -tol * gscale * scale {
                    return Ok(None);
                }
                continue;
            }
        }
        local.push((linalg::scale(&g, -1.0 / gn), value_at_origin / gn, idx));
    }

    let mut verts: Vec<Vec<f64>> = Vec::new();
    if q == 0 {
        verts.push(Vec::new());
    } else {
        for subset in combinations(local.len(), q) {
            let rows: Vec<Vec<f64>> = subset.iter().map(|&i| local[i].0.clone()).collect();
            // nearly dependent normals give an arbitrary point on a shared face
            if linalg::singular_values(&rows, q).last().map_or(true, |&s| s < DEPENDENT_NORMALS) {
                continue;
            }
            let a = DMatrix::from_fn(q, q, |i, j| local[subset[i]].0[j]);
            let b = DVector::from_fn(q, |i, _| local[subset[i]].1);
            let Some(s) = linalg::solve(a, b) else { continue };
            let s: Vec<f64> = s.iter().copied().collect();
            if s.iter().any(|x| !x.is_finite()) {
                continue;
            }
            if local.iter().any(|(a, b, _)| dot(a, &s) > b + tl) {
                continue;
            }
            // candidates closer than the ambiguity radius are one vertex
            if !verts.iter().any(|v| dist(v, &s) <= AMBIGUITY_FACTOR * tl) {
                verts.push(s);
            }
        }
    }
    // constraints whose rows are empty in local coordinates still need the check above
    if verts.is_empty() {
        return Ok(None);
    }
    let ambient: Vec<Vec<f64>> = verts.iter().map(|s| frame.to_ambient(s)).collect();
    let rank = affine_rank(&ambient, tol)?;
    if rank < q {
        let d = simplex::diameter(&ambient);
        let reduced = AffineFrame::through(&ambient, tol * d.max(f64::MIN_POSITIVE));
        if reduced.dim() != rank {
            return Err(Error::ToleranceAmbiguity {
                low: rank,
                high: reduced.dim(),
            });
        }
        return build_cell_within(reduced, functionals, tol, scale, &ambient);
    }

    // drop constraints tight on every vertex; normalize the rest in ambient form
    let mut hrep = Vec::new();
    let mut tight_rows: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
    for (a, b, _) in &local {
        let slack: Vec<f64> = verts.iter().map(|s| b - dot(a, s)).collect();
        if slack.iter().all(|s| s.abs() <= tl) {
            continue;
        }
        let row = hrep.len();
        for (vi, s) in slack.iter().enumerate() {
            if s.abs() <= tl {
                tight_rows[vi].push(row);
            }
        }
        let normal: Vec<f64> = (0..frame.ambient_dim())
            .map(|j| frame.basis.iter().zip(a).map(|(u, ai)| u[j] * ai).sum())
            .collect();
        let offset = b + dot(&normal, &frame.origin);
        hrep.push(Halfspace { normal, offset });
    }

    // canonical vertex order: lexicographic on ambient coordinates
    let mut order: Vec<usize> = (0..ambient.len()).collect();
    order.sort_by(|&i, &j| {
        ambient[i]
            .iter()
            .zip(&ambient[j])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vrep: Vec<Point> = order.iter().map(|&i| Point(ambient[i].clone())).collect();
    let tight: Vec<Vec<usize>> = order.iter().map(|&i| tight_rows[i].clone()).collect();

    let faces = face_lattice(&vrep, &tight, hrep.len(), q, tol)?;
    Ok(Some(ConvexCell {
        frame,
        functionals,
        hrep,
        vrep,
        faces,
        tol,
    }))
}

fn face_lattice(
    vrep: &[Point],
    tight: &[Vec<usize>],
    rows: usize,
    q: usize,
    tol: f64,
) -> Result<Vec<CellFace>> {
    if q == 0 {
        return Ok(Vec::new());
    }
    let mut seen: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut facets: Vec<Vec<usize>> = Vec::new();
    for r in 0..rows {
        let vs: Vec<usize> = (0..vrep.len()).filter(|&v| tight[v].contains(&r)).collect();
        if vs.is_empty() || seen.contains_key(&vs) {
            continue;
        }
        let pts: Vec<&Point> = vs.iter().map(|&i| &vrep[i]).collect();
        let d = affine_rank(&pts, tol)?;
        if d + 1 == q {
            seen.insert(vs.clone(), d);
            facets.push(vs);
        }
    }
    let mut queue = facets.clone();
    while let Some(f) = queue.pop() {
        for g in &facets {
            let inter: Vec<usize> = f.iter().copied().filter(|v| g.contains(v)).collect();
            if inter.is_empty() || seen.contains_key(&inter) {
                continue;
            }
            let pts: Vec<&Point> = inter.iter().map(|&i| &vrep[i]).collect();
            let d = affine_rank(&pts, tol)?;
            seen.insert(inter.clone(), d);
            queue.push(inter);
        }
    }
    let mut faces: Vec<CellFace> = seen
        .into_iter()
        .map(|(vertices, dim)| CellFace { vertices, dim })
        .collect();
    faces.sort_by(|a, b| a.dim.cmp(&b.dim).then_with(|| a.vertices.cmp(&b.vertices)));
    Ok(faces)
}

/// Intersection of the affine hulls `p1 + span(U1)` and `p2 + span(U2)`, with
/// `U1`, `U2` orthonormal; `None` when they miss each other by more than
/// `tol_len`.
fn affine_hull_intersection(
    p1: &[f64],
    u1: &[Vec<f64>],
    p2: &[f64],
    u2: &[Vec<f64>],
    tol_len: f64,
) -> Option<AffineFrame> {
    let n = p1.len();
    let frame = |o: &[f64], b: &[Vec<f64>]| AffineFrame { origin: o.to_vec(), basis: b.to_vec() };
    if u2.len() == n {
        return Some(frame(p1, u1));
    }
    if u1.len() == n {
        return Some(frame(p2, u2));
    }
    let r1 = u1.len();
    // everything is measured in the orthogonal complement of span(U2)
    let w: Vec<Vec<f64>> = u1.iter().map(|u| reject(u, u2)).collect();
    let rhs = reject(&linalg::sub(p2, p1), u2);
    if r1 == 0 {
        return (linalg::norm(&rhs) <= tol_len).then(|| frame(p1, &[]));
    }
    // coefficient space R^r1 splits into the row space of W and its kernel
    let rows: Vec<Vec<f64>> = (0..n).map(|j| w.iter().map(|wi| wi[j]).collect()).collect();
    let row_space = linalg::orthonormal_basis(&rows, r1, 1e-7);
    let unit: Vec<Vec<f64>> = (0..r1)
        .map(|i| {
            let mut e = vec![0.0; r1];
            e[i] = 1.0;
            reject(&e, &row_space)
        })
        .collect();
    let kernel = linalg::orthonormal_basis(&unit, r1, 1e-7);
    let combine = |coef: &[f64], vs: &[Vec<f64>]| {
        let mut out = vec![0.0; vs.first().map_or(0, |v| v.len())];
        for (c, v) in coef.iter().zip(vs) {
            out = linalg::axpy(&out, *c, v);
        }
        out
    };
    let mut a = vec![0.0; r1];
    if !row_space.is_empty() {
        let g: Vec<Vec<f64>> = row_space.iter().map(|r| combine(r, &w)).collect();
        let qr = linalg::columns(&g, n).qr();
        let qt_rhs = qr.q().transpose() * DVector::from_vec(rhs.clone());
        let c = qr.r().solve_upper_triangular(&qt_rhs)?;
        a = combine(c.as_slice(), &row_space);
    }
    let residual = linalg::sub(&combine(&a, &w), &rhs);
    if linalg::norm(&residual) > tol_len {
        return None;
    }
    let origin = linalg::axpy(p1, 1.0, &combine(&a, u1));
    let dirs: Vec<Vec<f64>> = kernel.iter().map(|k| combine(k, u1)).collect();
    let basis = linalg::orthonormal_basis(&dirs, n, 1e-7);
    Some(AffineFrame { origin, basis })
}

/// `v` minus its projection onto the span of the orthonormal `basis`,
/// applied twice to keep the result orthogonal in floating point.
fn reject(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut out = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            out = linalg::axpy(&out, -linalg::dot(b, &out), b);
        }
    }
    out
}

/// Intersection of two closed simplices (given by vertex coordinates) as a
/// convex cell; `None` when they are disjoint.
pub fn intersect_points<P: AsRef<[f64]>, Q: AsRef<[f64]>>(
    s1: &[P],
    s2: &[Q],
    tol: f64,
) -> Result<Option<ConvexCell>> {
    let n = s1[0].as_ref().len();
    if s2[0].as_ref().len() != n {
        return Err(Error::Input("simplices live in different ambient dimensions".into()));
    }
    let d1 = simplex::diameter(s1);
    let d2 = simplex::diameter(s2);
    let scale = d1.max(d2).max(f64::MIN_POSITIVE);
    // quick reject on bounding boxes
    let (lo1, hi1) = simplex::bbox(s1);
    let (lo2, hi2) = simplex::bbox(s2);
    if (0..n).any(|j| lo1[j] > hi2[j] + tol * scale || lo2[j] > hi1[j] + tol * scale) {
        return Ok(None);
    }
    let f1 = functionals_of(s1)?;
    let f2 = functionals_of(s2)?;
    let frame1 = AffineFrame::through(s1, tol * scale);
    let frame2 = AffineFrame::through(s2, tol * scale);
    let Some(frame) = affine_hull_intersection(
        &frame1.origin,
        &frame1.basis,
        &frame2.origin,
        &frame2.basis,
        tol * scale,
    ) else {
        return Ok(None);
    };
    let mut functionals = f1;
    functionals.extend(f2);
    build_cell(frame, functionals, tol, scale)
}

/// Intersection of two simplices of a complex (or of two complexes).
pub fn intersect_simplices(
    c1: &SimplicialComplex,
    s1: &Simplex,
    c2: &SimplicialComplex,
    s2: &Simplex,
    tol: f64,
) -> Result<Option<ConvexCell>> {
    intersect_points(&c1.points_of(s1)?, &c2.points_of(s2)?, tol)
}

/// Center-join subdivision: faces of dimension at most one are kept, every
/// higher face is coned from its Chebyshev center over its subdivided
/// boundary. Shared subfaces reuse the same center.
pub fn subdivide_cell(cell: &ConvexCell) -> Result<SimplicialComplex> {
    let mut points: Vec<Point> = cell.vrep.clone();
    let mut memo: BTreeMap<Vec<usize>, Vec<Vec<usize>>> = BTreeMap::new();
    let all = cell.all_vertex_ids();
    let simplices = subdivide_face(cell, &all, cell.dim(), &mut points, &mut memo)?;
    SimplicialComplex::from_raw(
        cell.ambient_dim(),
        points.into_iter().map(|p| p.0).collect(),
        simplices,
    )
}

fn subdivide_face(
    cell: &ConvexCell,
    verts: &[usize],
    dim: usize,
    points: &mut Vec<Point>,
    memo: &mut BTreeMap<Vec<usize>, Vec<Vec<usize>>>,
) -> Result<Vec<Vec<usize>>> {
    if let Some(done) = memo.get(verts) {
        return Ok(done.clone());
    }
    let out = if dim <= 1 {
        vec![verts.to_vec()]
    } else {
        let center = if verts.len() == cell.vrep.len() {
            cell.chebyshev_center().0
        } else {
            let face = CellFace {
                vertices: verts.to_vec(),
                dim,
            };
            cell.face_cell(&face)?.chebyshev_center().0
        };
        let apex = points.len();
        points.push(center);
        let facets: Vec<CellFace> = cell.facets_of(verts, dim).into_iter().cloned().collect();
        let mut out = Vec::new();
        for f in facets {
            for s in subdivide_face(cell, &f.vertices, f.dim, points, memo)? {
                let mut t = Vec::with_capacity(s.len() + 1);
                t.push(apex);
                t.extend(s);
                out.push(t);
            }
        }
        out
    };
    memo.insert(verts.to_vec(), out.clone());
    Ok(out)
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CellFatness {
    pub min_fatness: f64,
    /// Minimum of `Vol(τ) / d1^l` over the subdivision's top simplices.
    pub min_normalized_volume: f64,
    /// Chebyshev radius over `d1`.
    pub chebyshev_ratio: f64,
    pub simplex_count: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SubdivisionFatnessReport {
    pub cells: Vec<CellFatness>,
    pub min_fatness: Option<f64>,
    pub min_normalized_volume: Option<f64>,
    pub min_chebyshev_ratio: Option<f64>,
    pub all_positive: bool,
}

/// Subdivides each cell and records the fatness constants realized across the family.
pub fn cell_subdivision_fatness_bound(cells: &[ConvexCell], d1: f64) -> Result<SubdivisionFatnessReport> {
    let mut report = SubdivisionFatnessReport {
        all_positive: true,
        ..Default::default()
    };
    for cell in cells {
        let sub = subdivide_cell(cell)?;
        let l = cell.dim() as i32;
        let mut min_f = f64::INFINITY;
        let mut min_v = f64::INFINITY;
        for i in 0..sub.num_simplices() {
            let pts = sub.simplex_points(i);
            min_f = min_f.min(simplex::fatness(&pts));
            min_v = min_v.min(simplex::volume(&pts) / d1.powi(l));
        }
        let (_, rho) = cell.chebyshev_center();
        let entry = CellFatness {
            min_fatness: min_f,
            min_normalized_volume: min_v,
            chebyshev_ratio: rho / d1,
            simplex_count: sub.num_simplices(),
        };
        if !(entry.min_fatness > 0.0 && entry.min_normalized_volume > 0.0) {
            report.all_positive = false;
        }
        let upd = |slot: &mut Option<f64>, v: f64| *slot = Some(slot.map_or(v, |s: f64| s.min(v)));
        upd(&mut report.min_fatness, entry.min_fatness);
        upd(&mut report.min_normalized_volume, entry.min_normalized_volume);
        upd(&mut report.min_chebyshev_ratio, entry.chebyshev_ratio);
        report.cells.push(entry);
    }
    Ok(report)
}

/// Convenience: the cell of a single simplex with the default tolerance.
pub fn simplex_cell<P: AsRef<[f64]>>(points: &[P]) -> Result<ConvexCell> {
    ConvexCell::from_simplex(points, EPS_GEOM)
}
