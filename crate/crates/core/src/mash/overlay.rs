//! Common refinement of two complexes over the band: cells `σ1 ∩ σ2`,
//! triangulated by center joins, stitched to the kept simplices of either
//! side by coning their split faces.

use std::collections::{BTreeMap, BTreeSet};

use crate::cell::{self, ConvexCell};
use crate::error::{Error, Result};
use crate::linalg::{self, Barycentric};
use crate::simplex::{self, faces_of, SimplicialComplex, EPS_GEOM};

use super::overlap::contains_point;

/// Barycentric coordinates at or below this count as zero when locating
/// cell vertices on faces of the input simplices.
const SUPPORT_TOL: f64 = 1e-9;

/// Relative tolerance of the volume bookkeeping checks.
const VOLUME_TOL: f64 = 1e-7;

/// Extension simplices below `SLIVER_FACTOR·φ0` trigger the recentering pass.
pub const SLIVER_FACTOR: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum PointKey {
    K1(usize),
    K2(usize),
    /// The transverse intersection point of a K1 face and a K2 face.
    Cross(Vec<usize>, Vec<usize>),
    CrossCenter(Vec<usize>, Vec<usize>),
    Center1(Vec<usize>),
    Center2(Vec<usize>),
}

/// `(K1 face, K2 face)` whose relative interiors meet in an overlay face.
type FaceKey = (Vec<usize>, Vec<usize>);

#[derive(Clone, Debug)]
struct FaceInfo {
    dim: usize,
    vertices: Vec<PointKey>,
    facets: Vec<FaceKey>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Side {
    One,
    Two,
}

pub struct OverlayInput<'a> {
    pub k1: &'a SimplicialComplex,
    /// Perturbed coordinates of K1's vertices.
    pub pos1: &'a [Vec<f64>],
    pub k2: &'a SimplicialComplex,
    /// K1 simplices kept whole (up to coning of split faces).
    pub kept1: &'a [usize],
    /// K1 simplices replaced by the refinement.
    pub band1: &'a [usize],
    pub kept2: &'a [usize],
    pub band2: &'a [usize],
    pub phi0: f64,
}

#[derive(Clone, Debug)]
pub struct OverlayOutput {
    pub complex: SimplicialComplex,
    /// Kept simplices emitted with the same vertices in the same order.
    pub verbatim1: Vec<usize>,
    pub verbatim2: Vec<usize>,
    pub cells: usize,
    pub repairs: usize,
}

struct Builder<'a> {
    input: &'a OverlayInput<'a>,
    n: usize,
    faces: BTreeMap<FaceKey, FaceInfo>,
    pieces1: BTreeMap<Vec<usize>, BTreeSet<FaceKey>>,
    pieces2: BTreeMap<Vec<usize>, BTreeSet<FaceKey>>,
    touched1: BTreeSet<Vec<usize>>,
    touched2: BTreeSet<Vec<usize>>,
    points: BTreeMap<PointKey, Vec<f64>>,
    cross_memo: BTreeMap<FaceKey, Vec<Vec<PointKey>>>,
    kept_memo: BTreeMap<(Side, Vec<usize>), Vec<Vec<PointKey>>>,
    repairs: usize,
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

impl<'a> Builder<'a> {
    fn coords1(&self, ids: &[usize]) -> Vec<Vec<f64>> {
        ids.iter().map(|&i| self.input.pos1[i].clone()).collect()
    }

    fn coords2(&self, ids: &[usize]) -> Vec<Vec<f64>> {
        ids.iter().map(|&i| self.input.k2.vertex(i).0.clone()).collect()
    }

    fn coords(&self, side: Side, ids: &[usize]) -> Vec<Vec<f64>> {
        match side {
            Side::One => self.coords1(ids),
            Side::Two => self.coords2(ids),
        }
    }

    fn cross_cell(&self, a: &[usize], b: &[usize]) -> Result<ConvexCell> {
        cell::intersect_points(&self.coords1(a), &self.coords2(b), EPS_GEOM)?.ok_or_else(|| {
            Error::DegenerateGeometry(format!("faces {a:?} and {b:?} were expected to meet"))
        })
    }

    fn point(&mut self, key: &PointKey) -> Result<Vec<f64>> {
        if let Some(p) = self.points.get(key) {
            return Ok(p.clone());
        }
        let p = match key {
            PointKey::K1(i) => self.input.pos1[*i].clone(),
            PointKey::K2(j) => self.input.k2.vertex(*j).0.clone(),
            PointKey::Cross(a, b) => {
                let c = self.cross_cell(a, b)?;
                if c.dim() != 0 {
                    return Err(Error::DegenerateGeometry(format!(
                        "faces {a:?} and {b:?} meet in a {}-cell instead of a point",
                        c.dim()
                    )));
                }
                c.vertices()[0].0.clone()
            }
            PointKey::CrossCenter(a, b) => self.cross_cell(a, b)?.chebyshev_center().0 .0,
            PointKey::Center1(_) | PointKey::Center2(_) => {
                unreachable!("kept-face centers are inserted when chosen")
            }
        };
        self.points.insert(key.clone(), p.clone());
        Ok(p)
    }

    /// Registers the faces of the cell `σ1 ∩ σ2`.
    fn register_cell(&mut self, s1: &[usize], s2: &[usize], c: &ConvexCell) -> Result<FaceKey> {
        let b1 = Barycentric::new(&self.coords1(s1))
            .ok_or_else(|| Error::DegenerateGeometry(format!("K1 simplex {s1:?} is degenerate")))?;
        let b2 = Barycentric::new(&self.coords2(s2))
            .ok_or_else(|| Error::DegenerateGeometry(format!("K2 simplex {s2:?} is degenerate")))?;
        let supports: Vec<(Vec<usize>, Vec<usize>)> = c
            .vertices()
            .iter()
            .map(|x| {
                let a = b1.coords(x).iter().zip(s1).filter(|(l, _)| **l > SUPPORT_TOL).map(|(_, &i)| i).collect();
                let b = b2.coords(x).iter().zip(s2).filter(|(l, _)| **l > SUPPORT_TOL).map(|(_, &i)| i).collect();
                (sorted(a), sorted(b))
            })
            .collect();
        let vertex_keys: Vec<PointKey> = supports
            .iter()
            .map(|(a, b)| match (a.len(), b.len()) {
                (1, 1) => Err(Error::DegenerateGeometry(format!(
                    "vertex {} of K1 coincides with vertex {} of K2",
                    a[0], b[0]
                ))),
                (1, _) => Ok(PointKey::K1(a[0])),
                (_, 1) => Ok(PointKey::K2(b[0])),
                _ => Ok(PointKey::Cross(a.clone(), b.clone())),
            })
            .collect::<Result<_>>()?;

        let mut all: Vec<cell::CellFace> = c.faces().to_vec();
        all.push(cell::CellFace {
            vertices: (0..c.vertices().len()).collect(),
            dim: c.dim(),
        });
        let key_of = |f: &cell::CellFace| -> FaceKey {
            let mut a = Vec::new();
            let mut b = Vec::new();
            for &v in &f.vertices {
                a.extend(&supports[v].0);
                b.extend(&supports[v].1);
            }
            (sorted(a), sorted(b))
        };
        let n = self.n;
        let mut top = None;
        for f in &all {
            let key = key_of(f);
            let expected = (key.0.len() - 1 + key.1.len() - 1).checked_sub(n);
            if expected != Some(f.dim) {
                return Err(Error::DegenerateGeometry(format!(
                    "overlay face {key:?} has dimension {} instead of the generic one",
                    f.dim
                )));
            }
            if f.dim == c.dim() {
                top = Some(key.clone());
            }
            if self.faces.contains_key(&key) {
                continue;
            }
            let facets = all
                .iter()
                .filter(|g| g.dim + 1 == f.dim && g.vertices.iter().all(|v| f.vertices.contains(v)))
                .map(&key_of)
                .collect();
            let mut vertices: Vec<PointKey> = f.vertices.iter().map(|&v| vertex_keys[v].clone()).collect();
            vertices.sort();
            if f.dim == key.0.len() - 1 {
                self.pieces1.entry(key.0.clone()).or_default().insert(key.clone());
            }
            if f.dim == key.1.len() - 1 {
                self.pieces2.entry(key.1.clone()).or_default().insert(key.clone());
            }
            self.faces.insert(
                key,
                FaceInfo {
                    dim: f.dim,
                    vertices,
                    facets,
                },
            );
        }
        Ok(top.expect("the cell itself is registered"))
    }

    /// Center-join triangulation of an overlay face.
    fn tri_cross(&mut self, key: &FaceKey) -> Result<Vec<Vec<PointKey>>> {
        if let Some(t) = self.cross_memo.get(key) {
            return Ok(t.clone());
        }
        let info = self.faces[key].clone();
        let out = if info.dim <= 1 {
            vec![info.vertices.clone()]
        } else {
            let apex = PointKey::CrossCenter(key.0.clone(), key.1.clone());
            self.point(&apex)?;
            let mut out = Vec::new();
            for f in &info.facets {
                for s in self.tri_cross(f)? {
                    let mut t = vec![apex.clone()];
                    t.extend(s);
                    out.push(t);
                }
            }
            out
        };
        self.cross_memo.insert(key.clone(), out.clone());
        Ok(out)
    }

    fn vertex_key(side: Side, v: usize) -> PointKey {
        match side {
            Side::One => PointKey::K1(v),
            Side::Two => PointKey::K2(v),
        }
    }

    fn volume_of(&mut self, simplices: &[Vec<PointKey>]) -> Result<f64> {
        let mut total = 0.0;
        for s in simplices {
            let pts = s.iter().map(|k| self.point(k)).collect::<Result<Vec<_>>>()?;
            total += simplex::volume(&pts);
        }
        Ok(total)
    }

    fn min_fatness(&mut self, simplices: &[Vec<PointKey>]) -> Result<f64> {
        let mut m = f64::INFINITY;
        for s in simplices {
            let pts = s.iter().map(|k| self.point(k)).collect::<Result<Vec<_>>>()?;
            m = m.min(simplex::fatness(&pts));
        }
        Ok(m)
    }

    /// Triangulation of a face `g` of a kept simplex, compatible with the
    /// refinement on the other side. Returns `None` when `g` stays whole.
    fn tri_kept(&mut self, side: Side, g: &[usize]) -> Result<Option<Vec<Vec<PointKey>>>> {
        let g = &sorted(g.to_vec())[..];
        let memo_key = (side, g.to_vec());
        if let Some(t) = self.kept_memo.get(&memo_key) {
            return Ok(if t.is_empty() { None } else { Some(t.clone()) });
        }
        let dim = g.len() - 1;
        let touched = match side {
            Side::One => self.touched1.contains(g),
            Side::Two => self.touched2.contains(g),
        };
        let result = if dim == 0 {
            None
        } else if touched {
            let pieces = match side {
                Side::One => self.pieces1.get(g).cloned(),
                Side::Two => self.pieces2.get(g).cloned(),
            }
            .unwrap_or_default();
            let mut out = Vec::new();
            for p in &pieces {
                out.extend(self.tri_cross(p)?);
            }
            let pts = self.coords(side, g);
            let want = simplex::volume(&pts);
            let got = self.volume_of(&out)?;
            if (got - want).abs() > VOLUME_TOL * want.max(f64::MIN_POSITIVE) {
                return Err(Error::CarrierMismatch {
                    witnesses: vec![linalg::centroid(&pts)],
                });
            }
            if out.len() == 1 && sorted_keys(&out[0]) == self.whole(side, g) {
                None
            } else {
                Some(out)
            }
        } else if dim == 1 {
            None
        } else {
            let mut boundary = Vec::new();
            let mut split = false;
            for skip in 0..g.len() {
                let facet: Vec<usize> = g.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &v)| v).collect();
                match self.tri_kept(side, &facet)? {
                    Some(t) => {
                        split = true;
                        boundary.extend(t);
                    }
                    None => boundary.push(facet.iter().map(|&v| Self::vertex_key(side, v)).collect()),
                }
            }
            if split {
                Some(self.cone_kept(side, g, boundary)?)
            } else {
                None
            }
        };
        self.kept_memo.insert(memo_key, result.clone().unwrap_or_default());
        Ok(result)
    }

    fn whole(&self, side: Side, g: &[usize]) -> Vec<PointKey> {
        let mut v: Vec<PointKey> = g.iter().map(|&i| Self::vertex_key(side, i)).collect();
        v.sort();
        v
    }

    /// Cones the split boundary of `g` from its Chebyshev center, trying the
    /// barycenter and the boundary-vertex average when that leaves a sliver.
    fn cone_kept(&mut self, side: Side, g: &[usize], boundary: Vec<Vec<PointKey>>) -> Result<Vec<Vec<PointKey>>> {
        let pts = self.coords(side, g);
        let apex = match side {
            Side::One => PointKey::Center1(g.to_vec()),
            Side::Two => PointKey::Center2(g.to_vec()),
        };
        let cone = |b: &[Vec<PointKey>]| -> Vec<Vec<PointKey>> {
            b.iter()
                .map(|s| {
                    let mut t = vec![apex.clone()];
                    t.extend(s.iter().cloned());
                    t
                })
                .collect()
        };
        let simplices = cone(&boundary);
        let mut candidates = vec![ConvexCell::from_simplex(&pts, EPS_GEOM)?.chebyshev_center().0 .0];
        candidates.push(linalg::centroid(&pts));
        let mut bverts: BTreeSet<PointKey> = BTreeSet::new();
        for s in &boundary {
            bverts.extend(s.iter().cloned());
        }
        let mut bpts = Vec::new();
        for k in &bverts {
            bpts.push(self.point(k)?);
        }
        candidates.push(linalg::centroid(&bpts));

        let mut best: Option<(f64, Vec<f64>)> = None;
        for (i, c) in candidates.into_iter().enumerate() {
            self.points.insert(apex.clone(), c.clone());
            let f = self.min_fatness(&simplices)?;
            if best.as_ref().map_or(true, |(bf, _)| f > *bf) {
                best = Some((f, c));
            }
            if i == 0 && f >= SLIVER_FACTOR * self.input.phi0 {
                break;
            }
            if i == 0 {
                self.repairs += 1;
            }
        }
        let (_, c) = best.expect("at least one candidate");
        self.points.insert(apex, c);
        Ok(simplices)
    }
}

fn sorted_keys(v: &[PointKey]) -> Vec<PointKey> {
    let mut v = v.to_vec();
    v.sort();
    v
}

fn boxes_overlap(a: &(Vec<f64>, Vec<f64>), b: &(Vec<f64>, Vec<f64>), slack: f64) -> bool {
    (0..a.0.len()).all(|j| a.0[j] <= b.1[j] + slack && b.0[j] <= a.1[j] + slack)
}

pub fn build_overlay(input: &OverlayInput<'_>) -> Result<OverlayOutput> {
    let n = input.k1.ambient_dim();
    let mut b = Builder {
        input,
        n,
        faces: BTreeMap::new(),
        pieces1: BTreeMap::new(),
        pieces2: BTreeMap::new(),
        touched1: BTreeSet::new(),
        touched2: BTreeSet::new(),
        points: BTreeMap::new(),
        cross_memo: BTreeMap::new(),
        kept_memo: BTreeMap::new(),
        repairs: 0,
    };
    let box1 = |i: usize| simplex::bbox(&b.coords1(input.k1.simplex(i).vertices()));
    let boxes1: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = input.band1.iter().chain(input.kept1).map(|&i| (i, box1(i))).collect();
    let boxes2: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = input.band2.iter().map(|&j| (j, input.k2.bbox(j))).collect();
    let slack = EPS_GEOM * input.k1.mesh_size().max(input.k2.mesh_size());

    // the refinement cells, with per-K2-simplex covered volume
    let mut cells: Vec<FaceKey> = Vec::new();
    let mut covered2: BTreeMap<usize, f64> = BTreeMap::new();
    for &i in input.band1 {
        let s1 = input.k1.simplex(i).vertices().to_vec();
        let p1 = b.coords1(&s1);
        for &j in input.band2 {
            if !boxes_overlap(&boxes1[&i], &boxes2[&j], slack) {
                continue;
            }
            let s2 = input.k2.simplex(j).vertices().to_vec();
            let Some(c) = cell::intersect_points(&p1, &b.coords2(&s2), EPS_GEOM)? else { continue };
            if c.dim() < n {
                continue;
            }
            *covered2.entry(j).or_default() += c.volume();
            let key = b.register_cell(&s1, &s2, &c)?;
            cells.push(key);
        }
    }
    for &i in input.band1 {
        for f in faces_of(input.k1.simplex(i).vertices()) {
            b.touched1.insert(f);
        }
    }
    for &j in input.band2 {
        for f in faces_of(input.k2.simplex(j).vertices()) {
            b.touched2.insert(f);
        }
    }

    // every replaced K2 simplex must be covered by the band cells plus kept K1 simplices
    let mut witnesses = Vec::new();
    for &j in input.band2 {
        let p2 = input.k2.simplex_points(j);
        let want = simplex::volume(&p2);
        let mut got = covered2.get(&j).copied().unwrap_or(0.0);
        if (got - want).abs() > VOLUME_TOL * want {
            for &i in input.kept1 {
                if !boxes_overlap(&boxes1[&i], &boxes2[&j], slack) {
                    continue;
                }
                let p1 = b.coords1(input.k1.simplex(i).vertices());
                if let Some(c) = cell::intersect_points(&p1, &p2, EPS_GEOM)? {
                    if c.dim() == n {
                        got += c.volume();
                    }
                }
            }
        }
        if (got - want).abs() > VOLUME_TOL * want {
            witnesses.push(uncovered_witness(&b, input, &p2));
        }
    }
    if !witnesses.is_empty() {
        return Err(Error::CarrierMismatch { witnesses });
    }

    // assemble: kept K1, refinement, kept K2
    let mut out: Vec<Vec<PointKey>> = Vec::new();
    let mut verbatim1 = Vec::new();
    let mut verbatim2 = Vec::new();
    for &i in input.kept1 {
        let s = input.k1.simplex(i).vertices().to_vec();
        match b.tri_kept(Side::One, &s)? {
            None => {
                verbatim1.push(i);
                out.push(s.iter().map(|&v| PointKey::K1(v)).collect());
            }
            Some(t) => out.extend(t),
        }
    }
    for key in &cells {
        out.extend(b.tri_cross(key)?);
    }
    for &j in input.kept2 {
        let s = input.k2.simplex(j).vertices().to_vec();
        match b.tri_kept(Side::Two, &s)? {
            None => {
                verbatim2.push(j);
                out.push(s.iter().map(|&v| PointKey::K2(v)).collect());
            }
            Some(t) => out.extend(t),
        }
    }

    let mut ids: BTreeMap<PointKey, usize> = BTreeMap::new();
    let mut coords: Vec<Vec<f64>> = Vec::new();
    let mut simplices = Vec::with_capacity(out.len());
    for s in &out {
        let mut t = Vec::with_capacity(s.len());
        for k in s {
            let id = match ids.get(k) {
                Some(&id) => id,
                None => {
                    let id = coords.len();
                    coords.push(b.point(k)?);
                    ids.insert(k.clone(), id);
                    id
                }
            };
            t.push(id);
        }
        simplices.push(t);
    }
    let complex = SimplicialComplex::from_raw(n, coords, simplices)?;
    Ok(OverlayOutput {
        complex,
        verbatim1,
        verbatim2,
        cells: cells.len(),
        repairs: b.repairs,
    })
}

/// A sample point of `p2` covered by no K1 simplex of the band or kept set.
fn uncovered_witness(b: &Builder<'_>, input: &OverlayInput<'_>, p2: &[&[f64]]) -> Vec<f64> {
    let c = linalg::centroid(p2);
    let mut samples = vec![c.clone()];
    for p in p2 {
        samples.push(linalg::add(&linalg::scale(&c, 0.5), &linalg::scale(p, 0.5)));
    }
    for x in samples {
        let inside = input.band1.iter().chain(input.kept1).any(|&i| {
            let p1 = b.coords1(input.k1.simplex(i).vertices());
            contains_point(&p1, &x, 1e-12)
        });
        if !inside {
            return x;
        }
    }
    c
}
