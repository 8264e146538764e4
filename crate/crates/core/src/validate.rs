//! Checks that a complex is a geometric simplicial complex: any two
//! simplices meet in a common face or not at all.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::cell;
use crate::error::Error;
use crate::linalg::{self, dist, Barycentric};
use crate::simplex::{self, SimplicialComplex, EPS_GEOM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// The stored face index differs from the one rebuilt from the simplices.
    FaceIndex,
    DuplicateSimplex,
    DegenerateSimplex,
    /// The two simplices overlap beyond their shared face.
    ImproperIntersection,
    /// Intersection dimension could not be decided within tolerance.
    Ambiguous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub pair: (usize, usize),
    pub detail: String,
}

pub fn validate_complex(c: &SimplicialComplex) -> Vec<Violation> {
    validate_with_tolerance(c, EPS_GEOM)
}

pub fn validate_with_tolerance(c: &SimplicialComplex, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    if !c.face_index_consistent() {
        out.push(Violation {
            kind: ViolationKind::FaceIndex,
            pair: (0, 0),
            detail: "face index does not match the simplices".into(),
        });
    }
    let mut keys: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for (i, s) in c.simplices().iter().enumerate() {
        if let Some(&j) = keys.get(&s.key()) {
            out.push(Violation {
                kind: ViolationKind::DuplicateSimplex,
                pair: (j, i),
                detail: format!("vertices {:?}", s.key()),
            });
        } else {
            keys.insert(s.key(), i);
        }
        let pts = c.simplex_points(i);
        if simplex::volume(&pts) == 0.0 {
            out.push(Violation {
                kind: ViolationKind::DegenerateSimplex,
                pair: (i, i),
                detail: "zero volume".into(),
            });
        }
    }
    let degenerate: Vec<usize> = out
        .iter()
        .filter(|v| v.kind == ViolationKind::DegenerateSimplex)
        .map(|v| v.pair.0)
        .collect();

    let boxes: Vec<(Vec<f64>, Vec<f64>)> = (0..c.num_simplices()).map(|i| c.bbox(i)).collect();
    let scale = c.mesh_size().max(f64::MIN_POSITIVE);
    let slack = tol * scale;
    let frames: Vec<Option<Barycentric>> = (0..c.num_simplices())
        .map(|i| {
            if c.simplex(i).dim() == c.ambient_dim() {
                Barycentric::new(&c.simplex_points(i))
            } else {
                None
            }
        })
        .collect();
    for (a, b) in candidate_pairs(&boxes, scale, slack) {
        if degenerate.contains(&a) || degenerate.contains(&b) {
            continue;
        }
        if separated(c, (a, &frames[a]), (b, &frames[b]), 100.0 * tol * scale)
            || separated(c, (b, &frames[b]), (a, &frames[a]), 100.0 * tol * scale)
        {
            continue;
        }
        if let Some(v) = check_pair(c, a, b, tol) {
            out.push(v);
        }
    }
    out.sort_by(|x, y| x.pair.cmp(&y.pair));
    out
}

/// Pairs `(a, b)`, `a < b`, whose bounding boxes overlap, via a uniform grid
/// with cells of the mesh size.
fn candidate_pairs(boxes: &[(Vec<f64>, Vec<f64>)], cell: f64, slack: f64) -> Vec<(usize, usize)> {
    if boxes.is_empty() {
        return Vec::new();
    }
    let dim = boxes[0].0.len();
    let index = |x: f64| (x / cell).floor() as i64;
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, (lo, hi)) in boxes.iter().enumerate() {
        let lo: Vec<i64> = lo.iter().map(|&x| index(x - slack)).collect();
        let hi: Vec<i64> = hi.iter().map(|&x| index(x + slack)).collect();
        let mut cur = lo.clone();
        loop {
            grid.entry(cur.clone()).or_default().push(i);
            let mut d = 0;
            while d < dim {
                cur[d] += 1;
                if cur[d] <= hi[d] {
                    break;
                }
                cur[d] = lo[d];
                d += 1;
            }
            if d == dim {
                break;
            }
        }
    }
    let mut pairs = BTreeSet::new();
    for members in grid.values() {
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                let (a, b) = (i.min(j), i.max(j));
                let overlap = (0..dim)
                    .all(|d| boxes[a].0[d] <= boxes[b].1[d] + slack && boxes[b].0[d] <= boxes[a].1[d] + slack);
                if overlap {
                    pairs.insert((a, b));
                }
            }
        }
    }
    pairs.into_iter().collect()
}

/// Whether a facet hyperplane of the full-dimensional simplex `a` separates
/// it from `b` so that they meet exactly in their shared face: the vertices
/// of `b` on the hyperplane are the shared ones and the rest lie strictly
/// beyond it.
fn separated(
    c: &SimplicialComplex,
    (a, fa): (usize, &Option<Barycentric>),
    (b, _): (usize, &Option<Barycentric>),
    margin: f64,
) -> bool {
    let Some(fa) = fa else { return false };
    let va = c.simplex(a).vertices();
    let vb = c.simplex(b).vertices();
    'facets: for (k, &opposite) in va.iter().enumerate() {
        if vb.contains(&opposite) {
            continue;
        }
        let g = &fa.grads[k];
        let gn = linalg::norm(g);
        for &v in vb {
            if va.contains(&v) {
                continue;
            }
            let x = c.vertex(v).as_ref();
            // signed distance into the simplex side of facet k
            if (linalg::dot(g, x) + fa.offsets[k]) / gn > -margin {
                continue 'facets;
            }
        }
        return true;
    }
    false
}

fn check_pair(c: &SimplicialComplex, a: usize, b: usize, tol: f64) -> Option<Violation> {
    let sa = c.simplex(a);
    let sb = c.simplex(b);
    let shared: Vec<usize> = sa.key().into_iter().filter(|v| sb.vertices().contains(v)).collect();
    let pa = c.simplex_points(a);
    let pb = c.simplex_points(b);
    let violation = |kind, detail: String| Some(Violation { kind, pair: (a, b), detail });
    let cell = match cell::intersect_points(&pa, &pb, tol) {
        Ok(cell) => cell,
        Err(Error::ToleranceAmbiguity { low, high }) => {
            return violation(ViolationKind::Ambiguous, format!("dimension {low} or {high}"))
        }
        Err(e) => return violation(ViolationKind::ImproperIntersection, e.to_string()),
    };
    let scale = simplex::diameter(&pa).max(simplex::diameter(&pb));
    let close = 100.0 * tol * scale;
    match (cell, shared.is_empty()) {
        (None, true) => None,
        (None, false) => violation(
            ViolationKind::ImproperIntersection,
            "simplices share vertices but do not meet".into(),
        ),
        (Some(cell), true) => violation(
            ViolationKind::ImproperIntersection,
            format!("disjoint vertex sets meet in a {}-cell", cell.dim()),
        ),
        (Some(cell), false) => {
            let sp: Vec<&[f64]> = shared.iter().map(|&v| c.vertex(v).as_ref()).collect();
            let cv = cell.vertices();
            let same = cell.dim() + 1 == shared.len()
                && cv.len() == sp.len()
                && cv.iter().all(|p| sp.iter().any(|q| dist(p, q) <= close))
                && sp.iter().all(|q| cv.iter().any(|p| dist(p, q) <= close));
            if same {
                None
            } else {
                violation(
                    ViolationKind::ImproperIntersection,
                    format!(
                        "intersection is a {}-cell with {} vertices, shared face {:?}",
                        cell.dim(),
                        cv.len(),
                        shared
                    ),
                )
            }
        }
    }
}
