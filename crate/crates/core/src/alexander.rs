//! Piecewise maps of a colored complex onto the extended space: positive
//! simplices go affinely onto a reference simplex, negative ones onto its
//! exterior through a radial stretch and the inversion in the unit sphere.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chessboard::{alternation_violations, facet_adjacency, ChessboardColoring};
use crate::error::{Error, Result};
use crate::linalg::{self, Barycentric};
use crate::seed;
use crate::simplex::{self, SimplicialComplex};

/// Barycentric slack accepted by the domain checks.
const DOMAIN_TOL: f64 = 1e-9;
/// Samples closer than this fraction of the diameter to a codimension-two
/// face are skipped.
const BRANCH_SKIP: f64 = 1e-4;
/// Finite-difference step as a fraction of the local diameter.
const FD_STEP: f64 = 1e-6;
/// Default number of points compared on each shared facet.
pub const TRACE_SAMPLES: usize = 100;
/// Allowed disagreement of the two traces on a shared facet.
pub const TRACE_TOL: f64 = 1e-9;

/// A point of `R^n` or the point at infinity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExtPoint {
    Finite(Vec<f64>),
    Infinity,
}

impl ExtPoint {
    pub fn finite(&self) -> Option<&[f64]> {
        match self {
            ExtPoint::Finite(x) => Some(x),
            ExtPoint::Infinity => None,
        }
    }
}

/// `x -> x / |x|^2`, exchanging the origin and infinity.
pub fn sphere_inversion(x: &ExtPoint) -> ExtPoint {
    match x {
        ExtPoint::Infinity => ExtPoint::Finite(vec![0.0; 0]),
        ExtPoint::Finite(v) => {
            let r2 = linalg::dot(v, v);
            if r2 == 0.0 {
                ExtPoint::Infinity
            } else {
                ExtPoint::Finite(linalg::scale(v, 1.0 / r2))
            }
        }
    }
}

/// Like [`sphere_inversion`] but knows the dimension of the origin it returns
/// for infinity.
pub fn sphere_inversion_n(x: &ExtPoint, n: usize) -> ExtPoint {
    match x {
        ExtPoint::Infinity => ExtPoint::Finite(vec![0.0; n]),
        _ => sphere_inversion(x),
    }
}

/// Equilateral `n`-simplex inscribed in the unit sphere, centered at the
/// origin and positively oriented.
pub fn reference_simplex(n: usize) -> Vec<Vec<f64>> {
    let m = n + 1;
    let centered: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 } - 1.0 / m as f64).collect())
        .collect();
    let basis = linalg::orthonormal_basis(&centered, m, 1e-12);
    let mut q: Vec<Vec<f64>> = centered
        .iter()
        .map(|p| {
            let v: Vec<f64> = basis.iter().map(|b| linalg::dot(b, p)).collect();
            linalg::scale(&v, 1.0 / linalg::norm(&v))
        })
        .collect();
    if n >= 1 && simplex::orientation_sign(&q) < 0 {
        q.swap(0, 1);
    }
    q
}

/// Radial stretch of a full-dimensional simplex about its barycenter: each
/// ray from the barycenter is scaled linearly so the boundary lands on the
/// unit sphere. Defined on all of `R^n`.
#[derive(Clone, Debug)]
pub struct RadialStretch {
    center: Vec<f64>,
    bary: Barycentric,
    center_coords: Vec<f64>,
}

impl RadialStretch {
    pub fn new<P: AsRef<[f64]>>(tau: &[P]) -> Result<RadialStretch> {
        let n = tau[0].as_ref().len();
        if tau.len() != n + 1 {
            return Err(Error::Input(format!("{} vertices do not span a simplex in R^{n}", tau.len())));
        }
        let bary = Barycentric::new(tau).ok_or_else(|| Error::DegenerateGeometry("degenerate simplex".into()))?;
        let center = linalg::centroid(tau);
        let center_coords = bary.coords(&center);
        Ok(RadialStretch { center, bary, center_coords })
    }

    /// Parameter `t` at which `center + t u` leaves the simplex.
    fn exit(&self, u: &[f64]) -> f64 {
        let mut t = f64::INFINITY;
        for (g, &c) in self.bary.grads.iter().zip(&self.center_coords) {
            let rate = linalg::dot(g, u);
            if rate < 0.0 {
                t = t.min(c / -rate);
            }
        }
        t
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let u = linalg::sub(x, &self.center);
        let len = linalg::norm(&u);
        if len == 0.0 {
            return vec![0.0; x.len()];
        }
        // |u| / boundary distance along u
        let s = 1.0 / self.exit(&u);
        linalg::scale(&u, s / len)
    }

    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        let r = linalg::norm(y);
        if r == 0.0 {
            return self.center.clone();
        }
        let w = linalg::scale(y, 1.0 / r);
        linalg::axpy(&self.center, r * self.exit(&w), &w)
    }

    fn check_simplex(&self, x: &[f64]) -> Result<()> {
        let b = self.bary.coords(x);
        if b.iter().any(|&l| l < -DOMAIN_TOL) {
            return Err(Error::Domain { barycentric: b });
        }
        Ok(())
    }

    fn check_ball(&self, y: &[f64]) -> Result<()> {
        if linalg::norm(y) > 1.0 + DOMAIN_TOL {
            return Err(Error::Domain { barycentric: self.bary.coords(&self.inverse(y)) });
        }
        Ok(())
    }
}

/// Radial stretch of `tau` onto the closed unit ball.
pub fn radial_stretch<P: AsRef<[f64]>>(tau: &[P], x: &[f64]) -> Result<Vec<f64>> {
    let r = RadialStretch::new(tau)?;
    r.check_simplex(x)?;
    Ok(r.forward(x))
}

/// Inverse of [`radial_stretch`] on the closed unit ball.
pub fn radial_stretch_inverse<P: AsRef<[f64]>>(tau: &[P], y: &[f64]) -> Result<Vec<f64>> {
    let r = RadialStretch::new(tau)?;
    r.check_ball(y)?;
    Ok(r.inverse(y))
}

/// `x -> a x + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    /// Row-major `n x n` matrix.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl AffineMap {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(row, bi)| linalg::dot(row, x) + bi).collect()
    }

    pub fn determinant(&self) -> f64 {
        // rows and columns share a determinant
        linalg::determinant(&self.a)
    }
}

/// The affine map sending vertex `i` of `tau` to vertex `i` of `sigma`.
/// `orientation_reversing` must agree with the sign of its determinant.
pub fn pl_vertex_map<P: AsRef<[f64]>, Q: AsRef<[f64]>>(
    tau: &[P],
    sigma: &[Q],
    orientation_reversing: bool,
) -> Result<AffineMap> {
    let map = vertex_map(tau, sigma)?;
    if (map.determinant() < 0.0) != orientation_reversing {
        return Err(Error::Input(format!(
            "vertex order gives determinant {:e}, orientation_reversing = {orientation_reversing}",
            map.determinant()
        )));
    }
    Ok(map)
}

fn vertex_map<P: AsRef<[f64]>, Q: AsRef<[f64]>>(tau: &[P], sigma: &[Q]) -> Result<AffineMap> {
    let n = tau[0].as_ref().len();
    if tau.len() != n + 1 || sigma.len() != n + 1 || sigma[0].as_ref().len() != n {
        return Err(Error::Input("vertex map needs two n-simplices in R^n".into()));
    }
    let bt = Barycentric::new(tau).ok_or_else(|| Error::DegenerateGeometry("degenerate source simplex".into()))?;
    if simplex::orientation_sign(sigma) == 0 {
        return Err(Error::DegenerateGeometry("degenerate target simplex".into()));
    }
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for (i, q) in sigma.iter().enumerate() {
        let q = q.as_ref();
        for r in 0..n {
            for c in 0..n {
                a[r][c] += q[r] * bt.grads[i][c];
            }
            b[r] += q[r] * bt.offsets[i];
        }
    }
    Ok(AffineMap { a, b })
}

/// One simplex's map: the vertex map onto the reference simplex, followed for
/// negative pieces by `phi^-1 . J . phi` with `phi` the reference's radial
/// stretch.
#[derive(Clone, Debug)]
pub struct MapPiece {
    pub source_simplex: usize,
    /// Source vertex ids ordered by their reference label.
    pub labeled_vertices: Vec<usize>,
    pub pl_map: AffineMap,
    pub invert: bool,
    source: Vec<Vec<f64>>,
    stretch: RadialStretch,
}

impl MapPiece {
    pub fn color(&self) -> i8 {
        if self.invert {
            -1
        } else {
            1
        }
    }

    pub fn source_points(&self) -> &[Vec<f64>] {
        &self.source
    }

    /// Evaluates the piece without a domain check.
    pub fn eval_unchecked(&self, x: &[f64]) -> ExtPoint {
        let y = self.pl_map.apply(x);
        if !self.invert {
            return ExtPoint::Finite(y);
        }
        let z = self.stretch.forward(&y);
        // the reference lives at unit scale, so this is roundoff at the center
        if linalg::norm(&z) <= f64::EPSILON {
            return ExtPoint::Infinity;
        }
        match sphere_inversion(&ExtPoint::Finite(z)) {
            ExtPoint::Finite(z) => ExtPoint::Finite(self.stretch.inverse(&z)),
            ExtPoint::Infinity => ExtPoint::Infinity,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<ExtPoint> {
        let b = Barycentric::new(&self.source).expect("piece source is non-degenerate");
        let coords = b.coords(x);
        if coords.iter().any(|&l| l < -DOMAIN_TOL) {
            return Err(Error::Domain { barycentric: coords });
        }
        Ok(self.eval_unchecked(x))
    }
}

/// Builds a single piece for a source simplex whose vertices are already in
/// label order.
pub fn alexander_piece<P: AsRef<[f64]>>(tau: &[P], color: i8, reference: &[Vec<f64>]) -> Result<MapPiece> {
    let source: Vec<Vec<f64>> = tau.iter().map(|p| p.as_ref().to_vec()).collect();
    let pl_map = vertex_map(&source, reference)?;
    Ok(MapPiece {
        source_simplex: 0,
        labeled_vertices: (0..source.len()).collect(),
        pl_map,
        invert: color < 0,
        source,
        stretch: RadialStretch::new(reference)?,
    })
}

/// Pieces for every top simplex, the coloring, the reference simplex and the
/// branch set (codimension-two faces).
#[derive(Clone, Debug)]
pub struct PiecewiseMap {
    pub pieces: BTreeMap<usize, MapPiece>,
    pub coloring: ChessboardColoring,
    pub reference: Vec<Vec<f64>>,
    pub branch_set: Vec<Vec<usize>>,
    /// Reference label of each vertex.
    pub labels: Vec<Option<usize>>,
}

/// Assigns each vertex a label in `0..=n` with distinct labels on every top
/// simplex, propagating across facets; each component's first simplex is
/// labeled so that its vertex map has the orientation of its color.
fn global_labels(c: &SimplicialComplex, coloring: &ChessboardColoring, reference: &[Vec<f64>]) -> Result<Vec<Option<usize>>> {
    let n = c.top_dim();
    let m = c.num_simplices();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (a, b) in facet_adjacency(c) {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut labels: Vec<Option<usize>> = vec![None; c.num_vertices()];
    let mut seen = vec![false; m];
    let conflict = |s: usize, why: &str| Error::Assembly { face: c.simplex(s).key(), reason: why.into() };
    for root in 0..m {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        let mut first = true;
        while let Some(s) = queue.pop_front() {
            let vs = c.simplex(s).vertices();
            let mut used = vec![false; n + 1];
            for &v in vs {
                if let Some(l) = labels[v] {
                    if used[l] {
                        return Err(conflict(s, "vertex labels repeat on a simplex"));
                    }
                    used[l] = true;
                }
            }
            let fresh: Vec<usize> = vs.iter().copied().filter(|&v| labels[v].is_none()).collect();
            let mut free = (0..=n).filter(|&l| !used[l]);
            for &v in &fresh {
                labels[v] = free.next();
            }
            if first {
                first = false;
                let want = coloring.color(s).unwrap_or(1);
                let ordered = ordered_points(c, s, &labels);
                let sign = vertex_map(&ordered, reference)?.determinant().signum() as i8;
                if sign != want {
                    if fresh.len() < 2 {
                        return Err(conflict(s, "labels fixed elsewhere contradict the color"));
                    }
                    labels.swap(fresh[0], fresh[1]);
                }
            }
            for &t in &adj[s] {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
    }
    Ok(labels)
}

fn ordered_vertices(c: &SimplicialComplex, s: usize, labels: &[Option<usize>]) -> Vec<usize> {
    let mut vs = c.simplex(s).vertices().to_vec();
    vs.sort_by_key(|&v| labels[v]);
    vs
}

fn ordered_points(c: &SimplicialComplex, s: usize, labels: &[Option<usize>]) -> Vec<Vec<f64>> {
    ordered_vertices(c, s, labels).iter().map(|&v| c.vertex(v).to_vec()).collect()
}

/// Assembles the piecewise map and checks that adjacent pieces agree on
/// `TRACE_SAMPLES` points of every shared facet.
pub fn assemble_global_map(c: &SimplicialComplex, coloring: &ChessboardColoring) -> Result<PiecewiseMap> {
    assemble_with(c, coloring, TRACE_SAMPLES)
}

pub fn assemble_with(c: &SimplicialComplex, coloring: &ChessboardColoring, trace_samples: usize) -> Result<PiecewiseMap> {
    let n = c.ambient_dim();
    if c.top_dim() != n || c.is_empty() {
        return Err(Error::Input("map assembly needs a non-empty complex of full-dimensional simplices".into()));
    }
    if let Some(&(a, b)) = alternation_violations(c, coloring).first() {
        let fa = c.simplex(a).key();
        let face: Vec<usize> = fa.into_iter().filter(|v| c.simplex(b).vertices().contains(v)).collect();
        return Err(Error::Assembly { face, reason: format!("simplices {a} and {b} do not alternate") });
    }
    let reference = reference_simplex(n);
    let labels = global_labels(c, coloring, &reference)?;
    let stretch = RadialStretch::new(&reference)?;
    let mut pieces = BTreeMap::new();
    for s in 0..c.num_simplices() {
        let labeled_vertices = ordered_vertices(c, s, &labels);
        let source: Vec<Vec<f64>> = labeled_vertices.iter().map(|&v| c.vertex(v).to_vec()).collect();
        let pl_map = vertex_map(&source, &reference)?;
        let color = coloring.color(s).unwrap_or(0);
        if pl_map.determinant().signum() as i8 != color {
            return Err(Error::Assembly {
                face: c.simplex(s).key(),
                reason: format!("vertex map orientation disagrees with color {color}"),
            });
        }
        pieces.insert(
            s,
            MapPiece { source_simplex: s, labeled_vertices, pl_map, invert: color < 0, source, stretch: stretch.clone() },
        );
    }
    let map = PiecewiseMap {
        pieces,
        coloring: coloring.clone(),
        reference,
        branch_set: c.faces_of_dim(n.saturating_sub(2)).cloned().collect(),
        labels,
    };
    check_traces(c, &map, trace_samples)?;
    Ok(map)
}

/// Points on a facet: its barycenter and pseudo-random convex combinations.
fn facet_samples(points: &[&[f64]], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seed::rng(seed);
    (0..count)
        .map(|i| {
            let w: Vec<f64> = if i == 0 {
                vec![1.0; points.len()]
            } else {
                (0..points.len()).map(|_| -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln()).collect()
            };
            convex(points, &w)
        })
        .collect()
}

fn convex(points: &[&[f64]], w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    let mut x = vec![0.0; points[0].len()];
    for (p, wi) in points.iter().zip(w) {
        x = linalg::axpy(&x, wi / total, p);
    }
    x
}

fn check_traces(c: &SimplicialComplex, map: &PiecewiseMap, samples: usize) -> Result<()> {
    let n = c.top_dim();
    for (i, (face, inc)) in c.face_index().iter().filter(|(k, _)| k.len() == n).enumerate() {
        let [a, b] = inc[..] else { continue };
        let pts: Vec<&[f64]> = face.iter().map(|&v| c.vertex(v).as_ref()).collect();
        for x in facet_samples(&pts, samples, seed::derive_indexed(0, "trace", i as u64)) {
            let ya = map.pieces[&a].eval_unchecked(&x);
            let yb = map.pieces[&b].eval_unchecked(&x);
            let gap = match (&ya, &yb) {
                (ExtPoint::Finite(p), ExtPoint::Finite(q)) => linalg::dist(p, q) / linalg::norm(p).max(1.0),
                (ExtPoint::Infinity, ExtPoint::Infinity) => 0.0,
                _ => f64::INFINITY,
            };
            if gap > TRACE_TOL {
                return Err(Error::Assembly {
                    face: face.clone(),
                    reason: format!("traces of simplices {a} and {b} differ by {gap:e}"),
                });
            }
        }
    }
    Ok(())
}

/// Central-difference Jacobian of `f` at `x`, with `f` post-composed with the
/// inversion when its value is far from the origin (a conformal change that
/// leaves the dilatation alone).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pointwise {
    /// `|f'(x)|^n / |J_f(x)|`.
    pub k: f64,
    /// Sign of the Jacobian determinant of `f` itself.
    pub sign: i8,
}

pub fn pointwise_dilatation(f: &dyn Fn(&[f64]) -> ExtPoint, x: &[f64], step: f64) -> Option<Pointwise> {
    let n = x.len();
    let center = f(x);
    let far = center.finite().is_none_or(|y| linalg::norm(y) > 1.0);
    let g = |p: &[f64]| -> Option<Vec<f64>> {
        let y = f(p);
        let y = if far { sphere_inversion_n(&y, n) } else { y };
        y.finite().map(<[f64]>::to_vec)
    };
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += step;
        xm[j] -= step;
        let d = linalg::scale(&linalg::sub(&g(&xp)?, &g(&xm)?), 0.5 / step);
        cols.push(d);
    }
    let det = linalg::determinant(&cols);
    let smax = linalg::singular_values(&cols, n).into_iter().fold(0.0, f64::max);
    let k = smax.powi(n as i32) / det.abs();
    if !k.is_finite() || det == 0.0 {
        return None;
    }
    let sign = if far { -det.signum() } else { det.signum() } as i8;
    Some(Pointwise { k, sign })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilatationEstimate {
    pub per_piece_k: BTreeMap<usize, f64>,
    pub global_k: f64,
    pub sample_count: usize,
    pub jacobian_failures: usize,
    /// Samples dropped for lying near the branch set.
    pub skipped_near_branch: usize,
    /// Samples where the vertex map's Jacobian sign differs from the color.
    pub sign_mismatches: usize,
    /// Samples where the full piece reverses orientation.
    pub orientation_reversals: usize,
}

/// Samples each piece at `samples_per_simplex` interior points away from the
/// branch set and reports the largest pointwise dilatation.
pub fn estimate_dilatation(m: &PiecewiseMap, samples_per_simplex: usize, seed: u64) -> Result<DilatationEstimate> {
    estimate_with_samples(m, samples_per_simplex, seed).map(|(e, _)| e)
}

/// [`estimate_dilatation`] plus every pointwise `K(x)` in sampling order.
pub fn estimate_with_samples(
    m: &PiecewiseMap,
    samples_per_simplex: usize,
    seed: u64,
) -> Result<(DilatationEstimate, Vec<f64>)> {
    let mut trace = Vec::new();
    if samples_per_simplex == 0 {
        return Err(Error::Input("samples_per_simplex must be at least 1".into()));
    }
    let mut est = DilatationEstimate {
        per_piece_k: BTreeMap::new(),
        global_k: 0.0,
        sample_count: 0,
        jacobian_failures: 0,
        skipped_near_branch: 0,
        sign_mismatches: 0,
        orientation_reversals: 0,
    };
    for (&id, piece) in &m.pieces {
        let mut rng = seed::rng(seed::derive_indexed(seed, "dilatation", id as u64));
        let pts: Vec<&[f64]> = piece.source.iter().map(Vec::as_slice).collect();
        let diam = simplex::diameter(&pts);
        let bary = Barycentric::new(&pts).expect("piece source is non-degenerate");
        let altitude: Vec<f64> = bary.grads.iter().map(|g| 1.0 / linalg::norm(g)).collect();
        let step = FD_STEP * diam;
        let f = |x: &[f64]| piece.eval_unchecked(x);
        let h0 = |x: &[f64]| ExtPoint::Finite(piece.pl_map.apply(x));
        let mut k_max: Option<f64> = None;
        let (mut taken, mut attempts) = (0, 0);
        while taken < samples_per_simplex && attempts < 20 * samples_per_simplex {
            attempts += 1;
            let w: Vec<f64> = (0..pts.len()).map(|_| -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
            let x = convex(&pts, &w);
            let mut d: Vec<f64> = bary.coords(&x).iter().zip(&altitude).map(|(l, h)| l * h).collect();
            d.sort_by(f64::total_cmp);
            if d.len() >= 2 && d[1] < BRANCH_SKIP * diam {
                est.skipped_near_branch += 1;
                continue;
            }
            taken += 1;
            est.sample_count += 1;
            match pointwise_dilatation(&f, &x, step) {
                Some(p) => {
                    trace.push(p.k);
                    k_max = Some(k_max.map_or(p.k, |k: f64| k.max(p.k)));
                    if p.sign <= 0 {
                        est.orientation_reversals += 1;
                    }
                }
                None => est.jacobian_failures += 1,
            }
            let pl_sign = pointwise_dilatation(&h0, &x, step).map_or(0, |p| p.sign);
            if pl_sign != piece.color() {
                est.sign_mismatches += 1;
            }
        }
        let k = k_max.ok_or(Error::Estimation { simplex: id })?;
        est.per_piece_k.insert(id, k);
        est.global_k = est.global_k.max(k);
    }
    Ok((est, trace))
}
