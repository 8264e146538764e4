//! Points, simplices and simplicial complexes, together with the metric
//! quantities used everywhere else: volume, diameter, fatness, dihedral
//! angles and orientation.

use std::collections::BTreeMap;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dist, factorial, sub};

/// Default relative tolerance for degeneracy and coincidence tests.
pub const EPS_GEOM: f64 = 1e-9;

/// Normalized volumes below this are treated as exact zeros (rounding noise).
const VOLUME_NOISE: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Point> {
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input(format!("non-finite coordinate in {coords:?}")));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Point {
        Point(v)
    }
}

/// A simplex given by vertex ids into some vertex table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Simplex(pub Vec<usize>);

impl Simplex {
    pub fn new(ids: Vec<usize>) -> Result<Simplex> {
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Input(format!("repeated vertex id in simplex {ids:?}")));
        }
        if ids.is_empty() {
            return Err(Error::Input("empty simplex".into()));
        }
        Ok(Simplex(ids))
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// Sorted vertex ids; the key under which faces are indexed.
    pub fn key(&self) -> Vec<usize> {
        let mut k = self.0.clone();
        k.sort_unstable();
        k
    }
}

/// All non-empty proper and improper faces of a vertex list, as sorted keys.
pub fn faces_of(ids: &[usize]) -> Vec<Vec<usize>> {
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    let m = sorted.len();
    (1u32..(1 << m))
        .map(|mask| {
            (0..m)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| sorted[i])
                .collect()
        })
        .collect()
}

/// Immutable simplicial complex: vertex table, top simplices and an index
/// from every proper face to the top simplices containing it.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialComplex {
    ambient_dim: usize,
    vertices: Vec<Point>,
    simplices: Vec<Simplex>,
    face_index: BTreeMap<Vec<usize>, Vec<usize>>,
}

impl SimplicialComplex {
    pub fn new(ambient_dim: usize, vertices: Vec<Point>, simplices: Vec<Simplex>) -> Result<Self> {
        for (i, p) in vertices.iter().enumerate() {
            if p.dim() != ambient_dim {
                return Err(Error::Input(format!(
                    "vertex {i} has {} coordinates, expected {ambient_dim}",
                    p.dim()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Input(format!("vertex {i} has a non-finite coordinate")));
            }
        }
        let top = simplices.first().map(|s| s.0.len());
        for (i, s) in simplices.iter().enumerate() {
            Simplex::new(s.0.clone())?;
            if Some(s.0.len()) != top {
                return Err(Error::Input(format!("simplex {i} has a different dimension")));
            }
            if s.dim() > ambient_dim {
                return Err(Error::Input(format!("simplex {i} exceeds the ambient dimension")));
            }
            if let Some(&bad) = s.0.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Input(format!("simplex {i} references missing vertex {bad}")));
            }
        }
        let face_index = build_face_index(&simplices);
        Ok(SimplicialComplex {
            ambient_dim,
            vertices,
            simplices,
            face_index,
        })
    }

    /// Convenience constructor from raw coordinate and index lists.
    pub fn from_raw(ambient_dim: usize, coords: Vec<Vec<f64>>, simplices: Vec<Vec<usize>>) -> Result<Self> {
        let vertices = coords.into_iter().map(Point::new).collect::<Result<Vec<_>>>()?;
        let simplices = simplices.into_iter().map(Simplex::new).collect::<Result<Vec<_>>>()?;
        Self::new(ambient_dim, vertices, simplices)
    }

    pub fn empty(ambient_dim: usize) -> Self {
        SimplicialComplex {
            ambient_dim,
            vertices: Vec::new(),
            simplices: Vec::new(),
            face_index: BTreeMap::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension of the top simplices (the ambient dimension for an empty complex).
    pub fn top_dim(&self) -> usize {
        self.simplices.first().map_or(self.ambient_dim, Simplex::dim)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, id: usize) -> &Point {
        &self.vertices[id]
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn simplex(&self, id: usize) -> &Simplex {
        &self.simplices[id]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn face_index(&self) -> &BTreeMap<Vec<usize>, Vec<usize>> {
        &self.face_index
    }

    /// Top simplices containing the face with the given sorted key.
    pub fn incident(&self, face: &[usize]) -> &[usize] {
        self.face_index.get(face).map_or(&[], Vec::as_slice)
    }

    /// Sorted keys of every indexed face of dimension `d`.
    pub fn faces_of_dim(&self, d: usize) -> impl Iterator<Item = &Vec<usize>> {
        self.face_index.keys().filter(move |k| k.len() == d + 1)
    }

    /// True when the stored face index equals a fresh rebuild.
    pub fn face_index_consistent(&self) -> bool {
        build_face_index(&self.simplices) == self.face_index
    }

    pub fn points_of(&self, s: &Simplex) -> Result<Vec<&[f64]>> {
        s.0.iter()
            .map(|&v| {
                self.vertices
                    .get(v)
                    .map(|p| p.as_ref())
                    .ok_or_else(|| Error::Input(format!("vertex id {v} out of range")))
            })
            .collect()
    }

    pub fn simplex_points(&self, id: usize) -> Vec<&[f64]> {
        self.simplices[id].0.iter().map(|&v| self.vertices[v].as_ref()).collect()
    }

    pub fn volume(&self, s: &Simplex) -> Result<f64> {
        Ok(volume(&self.points_of(s)?))
    }

    pub fn diameter(&self, s: &Simplex) -> Result<f64> {
        Ok(diameter(&self.points_of(s)?))
    }

    pub fn fatness(&self, s: &Simplex) -> Result<f64> {
        Ok(fatness(&self.points_of(s)?))
    }

    pub fn min_dihedral_angle(&self, s: &Simplex) -> Result<f64> {
        min_dihedral_angle(&self.points_of(s)?)
    }

    pub fn orientation_sign(&self, s: &Simplex) -> Result<i8> {
        Ok(orientation_sign(&self.points_of(s)?))
    }

    /// Largest simplex diameter (the mesh size).
    pub fn mesh_size(&self) -> f64 {
        (0..self.simplices.len())
            .map(|i| diameter(&self.simplex_points(i)))
            .fold(0.0, f64::max)
    }

    /// Axis-aligned bounding box of simplex `id`.
    pub fn bbox(&self, id: usize) -> (Vec<f64>, Vec<f64>) {
        bbox(&self.simplex_points(id))
    }

    /// Total volume of all top simplices.
    pub fn total_volume(&self) -> f64 {
        (0..self.simplices.len()).map(|i| volume(&self.simplex_points(i))).sum()
    }
}

fn build_face_index(simplices: &[Simplex]) -> BTreeMap<Vec<usize>, Vec<usize>> {
    let mut index: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (i, s) in simplices.iter().enumerate() {
        let k = s.0.len();
        for f in faces_of(&s.0) {
            if f.len() < k {
                index.entry(f).or_default().push(i);
            }
        }
    }
    index
}

pub fn bbox<P: AsRef<[f64]>>(points: &[P]) -> (Vec<f64>, Vec<f64>) {
    let n = points[0].as_ref().len();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in points {
        for (j, &x) in p.as_ref().iter().enumerate() {
            lo[j] = lo[j].min(x);
            hi[j] = hi[j].max(x);
        }
    }
    (lo, hi)
}

/// k-dimensional volume from the Gram determinant of the edge vectors.
/// A single point has volume 1 by convention; degenerate simplices give 0.
pub fn volume<P: AsRef<[f64]>>(points: &[P]) -> f64 {
    let k = points.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let v0 = points[0].as_ref();
    let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p.as_ref(), v0)).collect();
    let vol = linalg::parallelotope_volume(&edges) / factorial(k);
    if vol == 0.0 {
        return 0.0;
    }
    let d = diameter(points);
    if d == 0.0 || vol / d.powi(k as i32) < VOLUME_NOISE {
        0.0
    } else {
        vol
    }
}

/// Largest pairwise vertex distance; 0 for a single vertex.
pub fn diameter<P: AsRef<[f64]>>(points: &[P]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d = d.max(dist(points[i].as_ref(), points[j].as_ref()));
        }
    }
    d
}

/// The ratio `Vol(σ) / diam(σ)^l` for one face, with ratio 1 for vertices.
pub fn face_ratio<P: AsRef<[f64]>>(points: &[P]) -> f64 {
    let l = points.len() - 1;
    if l == 0 {
        return 1.0;
    }
    let d = diameter(points);
    if d == 0.0 {
        return 0.0;
    }
    volume(points) / d.powi(l as i32)
}

/// Fatness: the minimum of `Vol(σ)/diam(σ)^l` over every face σ of the simplex,
/// the simplex itself included.
pub fn fatness<P: AsRef<[f64]>>(points: &[P]) -> f64 {
    let m = points.len();
    let mut best: f64 = 1.0;
    let mut face: Vec<&[f64]> = Vec::with_capacity(m);
    for mask in 1u32..(1 << m) {
        if mask.count_ones() < 2 {
            continue;
        }
        face.clear();
        face.extend((0..m).filter(|i| mask & (1 << i) != 0).map(|i| points[i].as_ref()));
        best = best.min(face_ratio(&face));
        if best == 0.0 {
            break;
        }
    }
    best
}

/// Internal dihedral angle at the codimension-2 face opposite vertices `i`
/// and `j`: the angle between the components of `v_i - p` and `v_j - p`
/// orthogonal to the face.
pub fn dihedral_angle<P: AsRef<[f64]>>(points: &[P], i: usize, j: usize) -> Result<f64> {
    let k = points.len() - 1;
    if k < 2 {
        return Err(Error::Input("dihedral angles need dimension at least 2".into()));
    }
    let face: Vec<&[f64]> = (0..=k)
        .filter(|&m| m != i && m != j)
        .map(|m| points[m].as_ref())
        .collect();
    let base = face[0];
    let n = base.len();
    let dirs: Vec<Vec<f64>> = face[1..].iter().map(|p| sub(p, base)).collect();
    let basis = linalg::orthonormal_basis(&dirs, n, 0.0);
    let reject = |v: Vec<f64>| -> Vec<f64> {
        let mut r = v;
        for b in &basis {
            let c = linalg::dot(&r, b);
            r = linalg::axpy(&r, -c, b);
        }
        r
    };
    let a = reject(sub(points[i].as_ref(), base));
    let b = reject(sub(points[j].as_ref(), base));
    let (na, nb) = (linalg::norm(&a), linalg::norm(&b));
    let d = diameter(points);
    if na <= EPS_GEOM * d || nb <= EPS_GEOM * d {
        return Err(Error::DegenerateGeometry("simplex is degenerate".into()));
    }
    let c = (linalg::dot(&a, &b) / (na * nb)).clamp(-1.0, 1.0);
    Ok(c.acos())
}

/// Minimum internal dihedral angle over all codimension-2 faces.
pub fn min_dihedral_angle<P: AsRef<[f64]>>(points: &[P]) -> Result<f64> {
    let k = points.len() - 1;
    if k < 2 {
        return Err(Error::Input("dihedral angles need dimension at least 2".into()));
    }
    if volume(points) == 0.0 {
        return Err(Error::DegenerateGeometry("simplex is degenerate".into()));
    }
    let mut best = f64::INFINITY;
    for i in 0..=k {
        for j in i + 1..=k {
            best = best.min(dihedral_angle(points, i, j)?);
        }
    }
    Ok(best)
}

/// Sign of `det(v_1 - v_0, ..., v_n - v_0)` for a full-dimensional simplex.
pub fn orientation_sign<P: AsRef<[f64]>>(points: &[P]) -> i8 {
    let n = points[0].as_ref().len();
    if points.len() != n + 1 {
        return 0;
    }
    let v0 = points[0].as_ref();
    let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p.as_ref(), v0)).collect();
    let det = linalg::determinant(&edges);
    let d = diameter(points);
    if d == 0.0 || (det.abs() / d.powi(n as i32)) < VOLUME_NOISE {
        0
    } else if det > 0.0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FatnessReport {
    pub per_simplex_fatness: Vec<f64>,
    pub min_fatness: f64,
    /// Counts over 20 equal buckets of [0, 1].
    pub histogram: Vec<usize>,
    pub diameter_range: (f64, f64),
}

pub const HISTOGRAM_BUCKETS: usize = 20;

pub fn fatness_report(c: &SimplicialComplex) -> FatnessReport {
    let per: Vec<f64> = (0..c.num_simplices()).map(|i| fatness(&c.simplex_points(i))).collect();
    let mut histogram = vec![0; HISTOGRAM_BUCKETS];
    for &f in &per {
        let b = ((f * HISTOGRAM_BUCKETS as f64) as usize).min(HISTOGRAM_BUCKETS - 1);
        histogram[b] += 1;
    }
    let diams: Vec<f64> = (0..c.num_simplices()).map(|i| diameter(&c.simplex_points(i))).collect();
    let dmin = diams.iter().copied().fold(f64::INFINITY, f64::min);
    let dmax = diams.iter().copied().fold(0.0, f64::max);
    let min_fatness = per.iter().copied().fold(f64::INFINITY, f64::min);
    FatnessReport {
        min_fatness: if per.is_empty() { 0.0 } else { min_fatness },
        per_simplex_fatness: per,
        histogram,
        diameter_range: if diams.is_empty() { (0.0, 0.0) } else { (dmin, dmax) },
    }
}
