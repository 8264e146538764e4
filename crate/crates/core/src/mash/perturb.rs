//! Vertex perturbation towards transversality with the other complex,
//! by rejection sampling inside shrinking balls.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cell;
use crate::error::{Error, Result};
use crate::linalg::{self, AffineFrame};
use crate::seed;
use crate::simplex::{self, faces_of, SimplicialComplex, EPS_GEOM};
use crate::transversal::{principal_angles, simplex_distance};

use super::schedule::PerturbationSchedule;

pub const RETRY_LIMIT: usize = 256;
pub const SHRINK_EVERY: usize = 32;

/// A face of the fixed complex, by coordinates, with its bounding box.
#[derive(Clone, Debug)]
pub struct FixedFace {
    pub points: Vec<Vec<f64>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl FixedFace {
    pub fn new(points: Vec<Vec<f64>>) -> FixedFace {
        let (lo, hi) = simplex::bbox(&points);
        FixedFace { points, lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.points.len() - 1
    }
}

/// All faces of dimension below `n` of the given simplices, deduplicated.
pub fn fixed_faces(c: &SimplicialComplex, simplices: &[usize]) -> Vec<FixedFace> {
    let n = c.ambient_dim();
    let mut keys = BTreeSet::new();
    for &s in simplices {
        for f in faces_of(c.simplex(s).vertices()) {
            if f.len() <= n {
                keys.insert(f);
            }
        }
    }
    keys.into_iter()
        .map(|f| FixedFace::new(f.iter().map(|&v| c.vertex(v).0.clone()).collect()))
        .collect()
}

fn box_gap(lo1: &[f64], hi1: &[f64], lo2: &[f64], hi2: &[f64]) -> f64 {
    let mut g2 = 0.0;
    for j in 0..lo1.len() {
        let g = (lo1[j] - hi2[j]).max(lo2[j] - hi1[j]).max(0.0);
        g2 += g * g;
    }
    g2.sqrt()
}

/// Transversality margin of a face pair: normalized distance when the
/// dimensions sum below `n`, otherwise the principal angle at the
/// intersection (infinite when they do not meet, zero when the intersection
/// has the wrong dimension).
pub fn pair_margin<P: AsRef<[f64]>, Q: AsRef<[f64]>>(a: &[P], b: &[Q], n: usize, d1: f64) -> f64 {
    let (ka, kb) = (a.len() - 1, b.len() - 1);
    if ka + kb < n {
        return simplex_distance(a, b) / d1;
    }
    match cell::intersect_points(a, b, EPS_GEOM) {
        Ok(None) => f64::INFINITY,
        Err(_) => 0.0,
        Ok(Some(c)) => {
            let q = c.dim();
            if q != ka + kb - n {
                return 0.0;
            }
            let scale = simplex::diameter(a).max(simplex::diameter(b));
            let ua = AffineFrame::through(a, EPS_GEOM * scale).basis;
            let ub = AffineFrame::through(b, EPS_GEOM * scale).basis;
            principal_angles(&ua, &ub).get(q).copied().unwrap_or(FRAC_PI_2)
        }
    }
}

/// One vertex's placement problem.
struct Placement<'a> {
    vertex: usize,
    /// Faces containing the vertex, with the margin each must exceed.
    faces: Vec<(Vec<usize>, f64)>,
    /// Faces whose margin is improved when possible but not required.
    soft: Vec<(Vec<usize>, f64)>,
    /// Top simplices containing the vertex.
    star: Vec<Vec<usize>>,
    fixed: Vec<&'a FixedFace>,
    min_star_fatness: f64,
    n: usize,
    d1: f64,
}

#[derive(Clone, Copy, Debug)]
struct Score {
    /// Smallest margin/target ratio; acceptance needs > 1.
    ratio: f64,
    /// Smallest raw margin.
    margin: f64,
    /// Smallest margin/target ratio over the soft faces.
    soft: f64,
}

impl Placement<'_> {
    fn coords<'p>(&self, positions: &'p [Vec<f64>], ids: &[usize], x: &'p [f64]) -> Vec<&'p [f64]> {
        ids.iter()
            .map(|&i| if i == self.vertex { x } else { positions[i].as_slice() })
            .collect()
    }

    fn star_ok(&self, positions: &[Vec<f64>], x: &[f64]) -> bool {
        self.star
            .iter()
            .all(|s| simplex::fatness(&self.coords(positions, s, x)) >= self.min_star_fatness)
    }

    fn score(&self, positions: &[Vec<f64>], x: &[f64]) -> Score {
        let (ratio, margin) = self.ratio_of(&self.faces, positions, x);
        let soft = if ratio > 1.0 && !self.soft.is_empty() {
            self.ratio_of(&self.soft, positions, x).0
        } else {
            f64::INFINITY
        };
        Score { ratio, margin, soft }
    }

    /// Smallest `(margin/target, margin)` over `faces` against the fixed faces.
    fn ratio_of(&self, faces: &[(Vec<usize>, f64)], positions: &[Vec<f64>], x: &[f64]) -> (f64, f64) {
        let mut ratio = f64::INFINITY;
        let mut margin = f64::INFINITY;
        for (face, target) in faces {
            let pa = self.coords(positions, face, x);
            let (lo, hi) = simplex::bbox(&pa);
            let ka = face.len() - 1;
            for b in &self.fixed {
                let gap = box_gap(&lo, &hi, &b.lo, &b.hi);
                if ka + b.dim() < self.n {
                    // margins are capped at one, so far pairs never bind
                    if gap > self.d1 {
                        continue;
                    }
                } else if gap > EPS_GEOM * self.d1 {
                    continue;
                }
                let m = pair_margin(&pa, &b.points, self.n, self.d1);
                margin = margin.min(m);
                ratio = ratio.min(m / target);
                if ratio == 0.0 {
                    return (ratio, margin);
                }
            }
        }
        (ratio, margin)
    }

    /// Keeps the current position if it already qualifies, otherwise samples
    /// in `B(current, radius) ∩ B(origin, budget)`. A sample meeting the
    /// required margins but not the soft ones is remembered, and the best
    /// such sample is used when no sample meets both.
    fn place(
        &self,
        positions: &[Vec<f64>],
        origin: &[f64],
        radius: f64,
        budget: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<f64>, Score)> {
        let current = positions[self.vertex].clone();
        let s = self.score(positions, &current);
        if s.ratio > 1.0 && s.soft > 1.0 {
            return Ok((current.clone(), s));
        }
        let mut fallback = (s.ratio > 1.0).then(|| (current.clone(), s));
        let mut best = s.margin;
        let mut r = radius;
        for attempt in 0..RETRY_LIMIT {
            if attempt > 0 && attempt % SHRINK_EVERY == 0 {
                r /= 2.0;
            }
            let x = linalg::axpy(&current, r, &unit_ball_sample(rng, self.n));
            if linalg::dist(&x, origin) > budget || !self.star_ok(positions, &x) {
                continue;
            }
            let s = self.score(positions, &x);
            if s.ratio > 1.0 {
                if s.soft > 1.0 {
                    return Ok((x, s));
                }
                if fallback.as_ref().map_or(true, |(_, f)| s.soft > f.soft) {
                    fallback = Some((x, s));
                }
            }
            best = best.max(s.margin);
        }
        fallback.ok_or(Error::PerturbationFailure {
            vertex: self.vertex,
            best_margin: best,
        })
    }
}

fn unit_ball_sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if linalg::norm(&v) <= 1.0 {
            return v;
        }
    }
}

fn star_of(c: &SimplicialComplex, v: usize) -> Vec<usize> {
    c.incident(&[v]).to_vec()
}

/// Faces through `v` of the star simplices, by dimension.
fn faces_through(c: &SimplicialComplex, star: &[usize], v: usize, max_dim: usize) -> Vec<Vec<usize>> {
    let mut out = BTreeSet::new();
    for &s in star {
        for f in faces_of(c.simplex(s).vertices()) {
            if f.contains(&v) && f.len() <= max_dim + 1 {
                out.insert(f);
            }
        }
    }
    out.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbedVertex {
    pub position: Vec<f64>,
    /// Smallest margin over the star's faces against the fixed faces.
    pub margin: f64,
    pub moved: bool,
}

/// Moves vertex `v` of `k1` by less than `eps_budget` so that every face of
/// its star through `v` has margin above `delta` against every face of the
/// `local_k2` simplices, keeping star fatness at least half its current value.
pub fn perturb_vertex_transversal(
    k1: &SimplicialComplex,
    v: usize,
    local_k2: &[Vec<Vec<f64>>],
    delta: f64,
    eps_budget: f64,
    seed: u64,
) -> Result<PerturbedVertex> {
    if v >= k1.num_vertices() {
        return Err(Error::Input(format!("vertex {v} out of range")));
    }
    if !(eps_budget > 0.0) {
        return Err(Error::Input("displacement budget must be positive".into()));
    }
    let origin = k1.vertex(v).0.clone();
    if local_k2.is_empty() {
        return Ok(PerturbedVertex {
            position: origin,
            margin: f64::INFINITY,
            moved: false,
        });
    }
    let n = k1.ambient_dim();
    let star_ids = star_of(k1, v);
    let star: Vec<Vec<usize>> = star_ids.iter().map(|&s| k1.simplex(s).vertices().to_vec()).collect();
    let positions: Vec<Vec<f64>> = k1.vertices().iter().map(|p| p.0.clone()).collect();
    let phi0 = star
        .iter()
        .map(|s| simplex::fatness(&s.iter().map(|&i| &positions[i]).collect::<Vec<_>>()))
        .fold(1.0, f64::min);
    let mut fixed_keys = Vec::new();
    for s in local_k2 {
        let ids: Vec<usize> = (0..s.len()).collect();
        for f in faces_of(&ids) {
            if f.len() <= n {
                fixed_keys.push(FixedFace::new(f.iter().map(|&i| s[i].clone()).collect()));
            }
        }
    }
    let d1 = k1.mesh_size().max(f64::MIN_POSITIVE);
    let target = delta.max(0.0);
    let faces: Vec<(Vec<usize>, f64)> = faces_through(k1, &star_ids, v, n - 1)
        .into_iter()
        .map(|f| (f, target))
        .collect();
    let placement = Placement {
        vertex: v,
        faces,
        soft: Vec::new(),
        star,
        fixed: fixed_keys.iter().collect(),
        min_star_fatness: phi0 / 2.0,
        n,
        d1,
    };
    let mut rng = seed::rng(seed::derive_indexed(seed, "perturb-vertex", v as u64));
    // strict budget: sample slightly inside it
    let (position, s) = placement.place(&positions, &origin, eps_budget, eps_budget * (1.0 - 1e-12), &mut rng)?;
    let moved = position != origin;
    Ok(PerturbedVertex {
        position,
        margin: s.margin,
        moved,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepLog {
    /// Final displacement per perturbed vertex (K1 ids).
    pub displacement: BTreeMap<usize, f64>,
    /// Largest single move made during each sweep.
    pub sweep_max_move: Vec<f64>,
    /// Smallest margin of the faces of dimension `i` right after sweep `i`.
    pub margin_after_own_sweep: Vec<f64>,
    /// Number of vertices moved in each sweep.
    pub moved_per_sweep: Vec<usize>,
}

/// Runs sweeps `i = 0..n-1` over `vertices`: in sweep `i` each vertex is
/// placed so that its faces of dimension `i` clear `δ*_i` and its lower
/// faces of dimension `j` clear `δ*_j / 2`, moving at most `t_i` per sweep
/// and `t_0` in total.
pub fn sweep(
    k1: &SimplicialComplex,
    vertices: &[usize],
    fixed: &[FixedFace],
    schedule: &PerturbationSchedule,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, SweepLog)> {
    let n = k1.ambient_dim();
    let original: Vec<Vec<f64>> = k1.vertices().iter().map(|p| p.0.clone()).collect();
    let mut positions = original.clone();
    let mut order: Vec<usize> = vertices.to_vec();
    order.sort_by(|&a, &b| {
        original[a]
            .iter()
            .zip(&original[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.dedup();

    // fixed faces near each vertex, found once from original positions
    let reach = k1.mesh_size() + schedule.budgets[0] + schedule.d1;
    let near: BTreeMap<usize, Vec<&FixedFace>> = order
        .iter()
        .map(|&v| {
            let p = &original[v];
            let list = fixed
                .iter()
                .filter(|f| box_gap(p, p, &f.lo, &f.hi) <= reach)
                .collect();
            (v, list)
        })
        .collect();

    let mut log = SweepLog::default();
    for i in 0..n {
        let mut max_move: f64 = 0.0;
        let mut moved = 0;
        for &v in &order {
            let star_ids = star_of(k1, v);
            let mut faces = Vec::new();
            let mut soft = Vec::new();
            for f in faces_through(k1, &star_ids, v, n - 1) {
                let j = f.len() - 1;
                if j == i {
                    faces.push((f, schedule.margins[i]));
                } else if j < i {
                    faces.push((f, schedule.margins[j] / 2.0));
                } else if i == 0 {
                    // the first sweep has by far the largest budget; use it
                    // to clear the higher faces early as well
                    soft.push((f, schedule.margins[0]));
                }
            }
            let placement = Placement {
                vertex: v,
                faces,
                soft,
                star: star_ids.iter().map(|&s| k1.simplex(s).vertices().to_vec()).collect(),
                fixed: near[&v].clone(),
                min_star_fatness: schedule.phi0 / 2.0,
                n,
                d1: schedule.d1,
            };
            let mut rng = seed::rng(seed::derive_indexed(seed, &format!("sweep-{i}"), v as u64));
            let (x, _) = placement.place(&positions, &original[v], schedule.budgets[i], schedule.budgets[0], &mut rng)?;
            let step = linalg::dist(&x, &positions[v]);
            if step > 0.0 {
                moved += 1;
                max_move = max_move.max(step);
            }
            positions[v] = x;
        }
        log.sweep_max_move.push(max_move);
        log.moved_per_sweep.push(moved);
        log.margin_after_own_sweep
            .push(min_margin_of_dim(k1, &positions, &order, &near, i, n, schedule.d1));
    }
    for &v in &order {
        log.displacement.insert(v, linalg::dist(&positions[v], &original[v]));
    }
    Ok((positions, log))
}

/// Smallest margin between faces of dimension `dim` through the given
/// vertices and their nearby fixed faces.
fn min_margin_of_dim(
    k1: &SimplicialComplex,
    positions: &[Vec<f64>],
    vertices: &[usize],
    near: &BTreeMap<usize, Vec<&FixedFace>>,
    dim: usize,
    n: usize,
    d1: f64,
) -> f64 {
    let mut out = f64::INFINITY;
    for &v in vertices {
        let star_ids = star_of(k1, v);
        let faces: Vec<(Vec<usize>, f64)> = faces_through(k1, &star_ids, v, dim)
            .into_iter()
            .filter(|f| f.len() == dim + 1)
            .map(|f| (f, 1.0))
            .collect();
        let p = Placement {
            vertex: v,
            faces,
            soft: Vec::new(),
            star: Vec::new(),
            fixed: near[&v].clone(),
            min_star_fatness: 0.0,
            n,
            d1,
        };
        out = out.min(p.score(positions, &positions[v]).margin);
    }
    out
}

/// Post-hoc margins per face dimension for a perturbed complex.
pub fn margins_by_dimension(
    k1: &SimplicialComplex,
    positions: &[Vec<f64>],
    vertices: &[usize],
    fixed: &[FixedFace],
    d1: f64,
) -> Vec<f64> {
    let n = k1.ambient_dim();
    let reach = k1.mesh_size() + d1;
    let near: BTreeMap<usize, Vec<&FixedFace>> = vertices
        .iter()
        .map(|&v| {
            let p = &positions[v];
            (v, fixed.iter().filter(|f| box_gap(p, p, &f.lo, &f.hi) <= reach).collect())
        })
        .collect();
    (0..n)
        .map(|i| min_margin_of_dim(k1, positions, vertices, &near, i, n, d1))
        .collect()
}
