//! Independent oracles for the integration suites. Nothing here calls the
//! library's geometry; only plain arithmetic and Gaussian elimination.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Pt = Vec<f64>;

pub fn sub(a: &[f64], b: &[f64]) -> Pt {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dot(&sub(a, b), &sub(a, b)).sqrt()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    d
}

/// Solves `a x = b` by Gaussian elimination; `None` when singular.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = a.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(p, c);
        b.swap(p, c);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// k-volume of a k-simplex from its pairwise distances (Cayley–Menger).
pub fn cm_volume(pts: &[Pt]) -> f64 {
    let k = pts.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let m = k + 2;
    let mut cm = vec![vec![0.0; m]; m];
    for i in 1..m {
        cm[0][i] = 1.0;
        cm[i][0] = 1.0;
    }
    for i in 0..=k {
        for j in 0..=k {
            let d = dist(&pts[i], &pts[j]);
            cm[i + 1][j + 1] = d * d;
        }
    }
    let sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let v2 = sign * det(cm) / (2f64.powi(k as i32) * factorial(k).powi(2));
    v2.max(0.0).sqrt()
}

/// k-volume of a k-simplex as the product of successive heights, each edge
/// orthogonalized twice against the previous ones.
pub fn height_volume(pts: &[Pt]) -> f64 {
    let k = pts.len() - 1;
    let mut basis: Vec<Pt> = Vec::new();
    let mut vol = 1.0;
    for p in &pts[1..] {
        let mut e = sub(p, &pts[0]);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&e, q);
                e.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let h = dot(&e, &e).sqrt();
        if h == 0.0 {
            return 0.0;
        }
        vol *= h;
        basis.push(e.iter().map(|x| x / h).collect());
    }
    vol / factorial(k)
}

pub fn diameter(pts: &[Pt]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in 0..i {
            d = d.max(dist(&pts[i], &pts[j]));
        }
    }
    d
}

/// Minimum over all faces of `vol(face) / diam(face)^dim`, vertices counting 1.
pub fn brute_fatness(pts: &[Pt]) -> f64 {
    let m = pts.len();
    let mut best: f64 = 1.0;
    for mask in 1u32..(1 << m) {
        let face: Vec<Pt> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| pts[i].clone()).collect();
        if face.len() < 2 {
            continue;
        }
        let l = face.len() - 1;
        best = best.min(height_volume(&face) / diameter(&face).powi(l as i32));
    }
    best
}

/// Barycentric coordinates of `x` in a full-dimensional simplex.
pub fn barycentric(pts: &[Pt], x: &[f64]) -> Option<Vec<f64>> {
    let n = x.len();
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    let mut b = vec![0.0; n + 1];
    for (j, p) in pts.iter().enumerate() {
        for i in 0..n {
            a[i][j] = p[i];
        }
        a[n][j] = 1.0;
    }
    b[..n].copy_from_slice(x);
    b[n] = 1.0;
    solve(a, b)
}

pub fn in_simplex(pts: &[Pt], x: &[f64], tol: f64) -> bool {
    barycentric(pts, x).is_some_and(|l| l.iter().all(|&v| v >= -tol))
}

/// Polygon area by the shoelace formula.
pub fn shoelace(poly: &[Pt]) -> f64 {
    let m = poly.len();
    let mut s = 0.0;
    for i in 0..m {
        let (p, q) = (&poly[i], &poly[(i + 1) % m]);
        s += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * s.abs()
}

/// Clips a polygon to the half-plane `n . x <= c`.
fn clip_halfplane(poly: &[Pt], n: &[f64], c: f64) -> Vec<Pt> {
    let mut out = Vec::new();
    let m = poly.len();
    for i in 0..m {
        let (p, q) = (&poly[i], &poly[(i + 1) % m]);
        let (fp, fq) = (dot(n, p) - c, dot(n, q) - c);
        if fp <= 0.0 {
            out.push(p.clone());
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push(p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect());
        }
    }
    out
}

/// Inward-facing half-spaces `n . x <= c` of a full-dimensional simplex.
fn halfspaces(pts: &[Pt]) -> Vec<(Pt, f64)> {
    let n = pts[0].len();
    let centroid: Pt = (0..n).map(|j| pts.iter().map(|p| p[j]).sum::<f64>() / pts.len() as f64).collect();
    (0..pts.len())
        .map(|skip| {
            let face: Vec<&Pt> = pts.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, p)| p).collect();
            let normal: Pt = if n == 2 {
                let e = sub(face[1], face[0]);
                vec![-e[1], e[0]]
            } else {
                let (a, b) = (sub(face[1], face[0]), sub(face[2], face[0]));
                vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
            };
            let c = dot(&normal, face[0]);
            if dot(&normal, &centroid) > c {
                (normal.iter().map(|x| -x).collect(), -c)
            } else {
                (normal, c)
            }
        })
        .collect()
}

/// Area of the intersection of two triangles by polygon clipping.
pub fn triangle_overlap_area(a: &[Pt], b: &[Pt]) -> f64 {
    let mut poly: Vec<Pt> = a.to_vec();
    for (n, c) in halfspaces(b) {
        poly = clip_halfplane(&poly, &n, c);
        if poly.len() < 3 {
            return 0.0;
        }
    }
    shoelace(&poly)
}

/// Volume of the intersection of two tetrahedra by clipping a face list.
pub fn tet_overlap_volume(a: &[Pt], b: &[Pt]) -> f64 {
    let mut faces: Vec<Vec<Pt>> = (0..4)
        .map(|skip| (0..4).filter(|&i| i != skip).map(|i| a[i].clone()).collect())
        .collect();
    for (n, c) in halfspaces(b) {
        let mut next = Vec::new();
        let mut cap: Vec<Pt> = Vec::new();
        for f in &faces {
            let clipped = clip_halfplane(f, &n, c);
            for p in &clipped {
                if (dot(&n, p) - c).abs() <= 1e-12 * (1.0 + c.abs()) {
                    cap.push(p.clone());
                }
            }
            if clipped.len() >= 3 {
                next.push(clipped);
            }
        }
        if cap.len() >= 3 {
            next.push(order_planar(&cap, &n));
        }
        faces = next;
        if faces.len() < 4 {
            return 0.0;
        }
    }
    let all: Vec<&Pt> = faces.iter().flatten().collect();
    let r: Pt = (0..3).map(|j| all.iter().map(|p| p[j]).sum::<f64>() / all.len() as f64).collect();
    let mut vol = 0.0;
    for f in &faces {
        for i in 1..f.len() - 1 {
            let rows = vec![sub(&f[0], &r), sub(&f[i], &r), sub(&f[i + 1], &r)];
            vol += det(rows).abs() / 6.0;
        }
    }
    vol
}

/// Orders coplanar points by angle about their mean, in the plane normal to `n`.
fn order_planar(pts: &[Pt], n: &[f64]) -> Vec<Pt> {
    let m: Pt = (0..3).map(|j| pts.iter().map(|p| p[j]).sum::<f64>() / pts.len() as f64).collect();
    let helper = if n[0].abs() < 0.9 { vec![1.0, 0.0, 0.0] } else { vec![0.0, 1.0, 0.0] };
    let u = {
        let t = dot(&helper, n) / dot(n, n);
        let v: Pt = helper.iter().zip(n).map(|(h, x)| h - t * x).collect();
        let l = dot(&v, &v).sqrt();
        v.iter().map(|x| x / l).collect::<Pt>()
    };
    let w: Pt = vec![n[1] * u[2] - n[2] * u[1], n[2] * u[0] - n[0] * u[2], n[0] * u[1] - n[1] * u[0]];
    let mut keyed: Vec<(f64, Pt)> = pts
        .iter()
        .map(|p| {
            let d = sub(p, &m);
            (dot(&d, &w).atan2(dot(&d, &u)), p.clone())
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    keyed.into_iter().map(|(_, p)| p).collect()
}

/// Random simplex with `k + 1` vertices in `[-1, 1]^n` whose brute-force
/// fatness is at least `fraction` of the regular `k`-simplex's.
pub fn random_fat_simplex(rng: &mut ChaCha8Rng, k: usize, n: usize, fraction: f64) -> Vec<Pt> {
    // regular simplex of unit edge: fatness equals its volume
    let regular = ((k + 1) as f64).sqrt() / (factorial(k) * 2f64.powf(k as f64 / 2.0));
    let min_fatness = fraction * regular;
    loop {
        let s: Vec<Pt> = (0..=k).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        if brute_fatness(&s) >= min_fatness {
            return s;
        }
    }
}

/// Facet (sorted key) -> incident top simplices, built directly from the
/// simplex lists.
pub fn facet_map(simplices: &[Vec<usize>]) -> BTreeMap<Vec<usize>, Vec<usize>> {
    let mut out: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (id, s) in simplices.iter().enumerate() {
        for skip in 0..s.len() {
            let mut f: Vec<usize> = s.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &v)| v).collect();
            f.sort_unstable();
            out.entry(f).or_default().push(id);
        }
    }
    out
}

/// Interior codimension-two faces with an odd number of incident simplices.
pub fn odd_interior_ridges(simplices: &[Vec<usize>]) -> usize {
    let facets = facet_map(simplices);
    let mut boundary = std::collections::BTreeSet::new();
    for (f, inc) in &facets {
        if inc.len() == 1 {
            for skip in 0..f.len() {
                let r: Vec<usize> = f.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &v)| v).collect();
                boundary.insert(r);
            }
        }
    }
    let mut count: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for s in simplices {
        let mut s = s.clone();
        s.sort_unstable();
        for a in 0..s.len() {
            for b in a + 1..s.len() {
                let r: Vec<usize> = s.iter().enumerate().filter(|(i, _)| *i != a && *i != b).map(|(_, &v)| v).collect();
                *count.entry(r).or_default() += 1;
            }
        }
    }
    count.iter().filter(|(r, c)| !boundary.contains(*r) && *c % 2 == 1).count()
}

/// Facet-adjacent pairs with equal or missing colors.
pub fn coloring_conflicts(simplices: &[Vec<usize>], color: impl Fn(usize) -> Option<i8>) -> usize {
    facet_map(simplices)
        .values()
        .filter(|inc| inc.len() == 2)
        .filter(|inc| match (color(inc[0]), color(inc[1])) {
            (Some(a), Some(b)) => a == b || a.abs() != 1 || b.abs() != 1,
            _ => true,
        })
        .count()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}
