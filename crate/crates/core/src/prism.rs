//! Staircase triangulations of prisms `base x [0, h]` and of tubes built from
//! a subdivided core simplex stacked in slabs.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{self, FatnessReport, Point, Simplex, SimplicialComplex};

/// Staircase triangulation of `base x [0, height]` for a full-dimensional
/// `k`-simplex `base` in `R^k`: simplices `[a_0..a_j, b_j..b_k]` with `a_i`
/// the bottom and `b_i` the top copy of vertex `i`.
pub fn prism_triangulate<P: AsRef<[f64]>>(base: &[P], height: f64) -> Result<SimplicialComplex> {
    check_base(base)?;
    if !(height > 0.0) {
        return Err(Error::Input(format!("prism height must be positive, got {height}")));
    }
    let k = base.len() - 1;
    let mut coords = Vec::with_capacity(2 * (k + 1));
    for z in [0.0, height] {
        for p in base {
            let mut v = p.as_ref().to_vec();
            v.push(z);
            coords.push(v);
        }
    }
    let order: Vec<usize> = (0..=k).collect();
    let simplices = staircase(&order, |i| i, |i| k + 1 + i);
    SimplicialComplex::from_raw(k + 1, coords, simplices)
}

fn check_base<P: AsRef<[f64]>>(base: &[P]) -> Result<()> {
    let Some(first) = base.first() else {
        return Err(Error::Input("empty base".into()));
    };
    let k = first.as_ref().len();
    if base.len() != k + 1 {
        return Err(Error::Input(format!("base needs {} vertices in R^{k}, got {}", k + 1, base.len())));
    }
    if k > 0 && simplex::volume(base) == 0.0 {
        return Err(Error::DegenerateGeometry("prism base is degenerate".into()));
    }
    Ok(())
}

/// The `k + 1` staircase simplices over base vertices listed in `order`.
fn staircase(order: &[usize], bottom: impl Fn(usize) -> usize, top: impl Fn(usize) -> usize) -> Vec<Vec<usize>> {
    (0..order.len())
        .map(|j| {
            let mut s: Vec<usize> = order[..=j].iter().map(|&i| bottom(i)).collect();
            s.extend(order[j..].iter().map(|&i| top(i)));
            s
        })
        .collect()
}

/// Tube over a core simplex: the core is rescaled about its first vertex to
/// diameter `strata_count * strata_width`, split by the edgewise subdivision
/// of factor `strata_count`, and extruded through `slab_count` slabs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSpec {
    pub core: Vec<Vec<f64>>,
    pub strata_count: usize,
    pub strata_width: f64,
    pub slab_count: usize,
    pub slab_height: f64,
}

impl TubeSpec {
    pub fn radius(&self) -> f64 {
        self.strata_count as f64 * self.strata_width
    }

    pub fn axis_length(&self) -> f64 {
        self.slab_count as f64 * self.slab_height
    }

    fn validate(&self) -> Result<()> {
        check_base(&self.core)?;
        if self.strata_count == 0 || self.slab_count == 0 {
            return Err(Error::Input("strata and slab counts must be at least 1".into()));
        }
        if !(self.strata_width > 0.0) || !(self.slab_height > 0.0) {
            return Err(Error::Input("strata width and slab height must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TubeMesh {
    pub complex: SimplicialComplex,
    pub fatness: FatnessReport,
    pub radius: f64,
    pub axis_length: f64,
}

/// Edgewise subdivision of the Kuhn simplex `m >= x_1 >= ... >= x_k >= 0`
/// into `m^k` simplices, as lattice points and index lists.
fn kuhn_subdivision(k: usize, m: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let inside = |x: &[usize]| x.iter().all(|&c| c <= m) && x.windows(2).all(|w| w[0] >= w[1]);
    let mut ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut points = Vec::new();
    let mut simplices = Vec::new();
    let corners = (0..k).map(|_| 0..m).multi_cartesian_product();
    let corners: Vec<Vec<usize>> = if k == 0 { vec![Vec::new()] } else { corners.collect() };
    for z in corners {
        for perm in (0..k).permutations(k) {
            let mut chain = vec![z.clone()];
            let mut cur = z.clone();
            for &axis in &perm {
                cur[axis] += 1;
                chain.push(cur.clone());
            }
            if !chain.iter().all(|p| inside(p)) {
                continue;
            }
            let s = chain
                .into_iter()
                .map(|p| {
                    *ids.entry(p.clone()).or_insert_with(|| {
                        points.push(p);
                        points.len() - 1
                    })
                })
                .collect();
            simplices.push(s);
        }
    }
    (points, simplices)
}

pub fn tube_triangulate(spec: &TubeSpec) -> Result<TubeMesh> {
    spec.validate()?;
    let k = spec.core.len() - 1;
    let m = spec.strata_count;
    let scale = spec.radius() / simplex::diameter(&spec.core);
    let v0 = &spec.core[0];
    let core: Vec<Vec<f64>> = spec
        .core
        .iter()
        .map(|p| p.iter().zip(v0).map(|(x, o)| o + scale * (x - o)).collect())
        .collect();
    let (lattice, cells) = kuhn_subdivision(k, m);
    // lattice point x maps to v_0 + sum_i (x_i - x_{i+1}) / m * (v_i - v_0)
    // with x_0 = m and x_{k+1} = 0
    let embed = |x: &[usize]| -> Vec<f64> {
        let mut ext = vec![m];
        ext.extend_from_slice(x);
        ext.push(0);
        let mut p = vec![0.0; k];
        for (i, w) in ext.windows(2).enumerate() {
            let lam = (w[0] - w[1]) as f64 / m as f64;
            for (pj, cj) in p.iter_mut().zip(&core[i]) {
                *pj += lam * cj;
            }
        }
        p
    };
    let layer = lattice.len();
    let mut vertices = Vec::with_capacity(layer * (spec.slab_count + 1));
    for level in 0..=spec.slab_count {
        let z = level as f64 * spec.slab_height;
        for x in &lattice {
            let mut p = embed(x);
            p.push(z);
            vertices.push(Point(p));
        }
    }
    let mut simplices = Vec::new();
    for slab in 0..spec.slab_count {
        for cell in &cells {
            // global vertex order decides the staircase, so shared faces agree
            let order: Vec<usize> = cell.iter().copied().sorted().collect();
            for s in staircase(&order, |i| slab * layer + i, |i| (slab + 1) * layer + i) {
                simplices.push(Simplex(s));
            }
        }
    }
    let complex = SimplicialComplex::new(k + 1, vertices, simplices)?;
    if let Some(bad) = complex.face_index().iter().find(|(f, inc)| f.len() == k + 1 && inc.len() > 2) {
        return Err(Error::Structural(format!("prism faces disagree at {:?}", bad.0)));
    }
    Ok(TubeMesh {
        fatness: simplex::fatness_report(&complex),
        radius: spec.radius(),
        axis_length: spec.axis_length(),
        complex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::validate_complex;

    fn triangle() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]]
    }

    #[test]
    fn segment_prism_is_two_triangles() {
        let c = prism_triangulate(&[vec![0.0], vec![1.0]], 2.0).unwrap();
        assert_eq!(c.num_simplices(), 2);
        assert!((c.total_volume() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_prism_is_three_tetrahedra() {
        let base = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.3, 1.7]];
        let c = prism_triangulate(&base, 0.8).unwrap();
        assert_eq!(c.num_simplices(), 3);
        let area = 0.5 * 2.0 * 1.7;
        assert!((c.total_volume() - area * 0.8).abs() < 1e-9);
        assert!(validate_complex(&c).is_empty());
    }

    #[test]
    fn degenerate_base_is_rejected() {
        let base = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(prism_triangulate(&base, 1.0).is_err());
    }

    #[test]
    fn kuhn_counts() {
        for k in 1..=3 {
            for m in 1..=3 {
                assert_eq!(kuhn_subdivision(k, m).1.len(), m.pow(k as u32));
            }
        }
    }

    #[test]
    fn single_cell_tube_matches_prism() {
        let spec = TubeSpec { core: triangle(), strata_count: 1, strata_width: 1.0, slab_count: 1, slab_height: 0.5 };
        let t = tube_triangulate(&spec).unwrap();
        let p = prism_triangulate(&triangle(), 0.5).unwrap();
        assert_eq!(t.complex.num_simplices(), p.num_simplices());
        assert!((t.complex.total_volume() - p.total_volume()).abs() < 1e-12);
    }

    #[test]
    fn segment_tube_counts_and_validity() {
        let spec =
            TubeSpec { core: vec![vec![0.0], vec![1.0]], strata_count: 2, strata_width: 0.5, slab_count: 4, slab_height: 0.5 };
        let t = tube_triangulate(&spec).unwrap();
        assert_eq!(t.complex.num_simplices(), 16);
        assert!(validate_complex(&t.complex).is_empty());
        assert!((t.complex.total_volume() - 1.0 * 2.0).abs() < 1e-9);
    }

    #[test]
    fn tube_volume_and_validity_in_3d() {
        let spec = TubeSpec { core: triangle(), strata_count: 3, strata_width: 0.4, slab_count: 2, slab_height: 0.4 };
        let t = tube_triangulate(&spec).unwrap();
        assert_eq!(t.complex.num_simplices(), 9 * 2 * 3);
        assert!(validate_complex(&t.complex).is_empty());
        let side: f64 = 1.2;
        let area = 3f64.sqrt() / 4.0 * side * side;
        assert!((t.complex.total_volume() - area * 0.8).abs() < 1e-9 * area);
    }

    #[test]
    fn unit_aspect_is_fattest() {
        let fat = |ratio: f64| {
            let spec = TubeSpec { core: triangle(), strata_count: 2, strata_width: ratio, slab_count: 2, slab_height: 1.0 };
            tube_triangulate(&spec).unwrap().fatness.min_fatness
        };
        let (a, b, c) = (fat(0.1), fat(1.0), fat(10.0));
        assert!(b > a && b > c, "{a} {b} {c}");
    }
}
