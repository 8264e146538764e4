//! Even incidence on codimension-two faces and alternating two-colorings of
//! the top simplices.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{faces_of, Point, Simplex, SimplicialComplex};

/// Barycentric passes tried before giving up on parity.
pub const MAX_PASSES: usize = 2;

/// Sign per top simplex; `violations` lists facet-adjacent pairs with equal
/// colors (empty for a valid coloring).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChessboardColoring {
    pub colors: BTreeMap<usize, i8>,
    pub violations: Vec<(usize, usize)>,
}

impl ChessboardColoring {
    pub fn color(&self, simplex: usize) -> Option<i8> {
        self.colors.get(&simplex).copied()
    }
}

/// Facet keys (sorted) with their incident top simplices.
fn facets(c: &SimplicialComplex) -> impl Iterator<Item = (&Vec<usize>, &Vec<usize>)> {
    let n = c.top_dim();
    c.face_index().iter().filter(move |(k, _)| n >= 1 && k.len() == n)
}

/// Codimension-two faces lying in a facet with a single incident simplex.
fn boundary_ridges(c: &SimplicialComplex) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    for (f, inc) in facets(c) {
        if inc.len() == 1 {
            for i in 0..f.len() {
                let mut r = f.clone();
                r.remove(i);
                out.insert(r);
            }
        }
    }
    out
}

/// Interior codimension-two faces incident to an odd number of top simplices.
pub fn even_incidence_violations(c: &SimplicialComplex) -> Vec<Vec<usize>> {
    let n = c.top_dim();
    if n < 2 || c.is_empty() {
        return Vec::new();
    }
    let boundary = boundary_ridges(c);
    c.faces_of_dim(n - 2)
        .filter(|r| !boundary.contains(*r) && c.incident(r).len() % 2 == 1)
        .cloned()
        .collect()
}

/// Facets shared by more than two top simplices.
pub fn non_manifold_facets(c: &SimplicialComplex) -> Vec<Vec<usize>> {
    facets(c).filter(|(_, inc)| inc.len() > 2).map(|(f, _)| f.clone()).collect()
}

/// Full barycentric subdivision. Original vertices keep their ids; face
/// barycenters follow in key order. Each top simplex `[v_0..v_n]` becomes the
/// chains `b(v_p0), b(v_p0 v_p1), ...` over all permutations `p`, in
/// lexicographic order.
pub fn barycentric_subdivision(c: &SimplicialComplex) -> SimplicialComplex {
    let mut vertices: Vec<Point> = c.vertices().to_vec();
    let mut ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let all_faces: BTreeSet<Vec<usize>> = c.simplices().iter().flat_map(|s| faces_of(s.vertices())).collect();
    for f in all_faces {
        if f.len() == 1 {
            ids.insert(f.clone(), f[0]);
            continue;
        }
        let mut b = vec![0.0; c.ambient_dim()];
        for &v in &f {
            for (x, y) in b.iter_mut().zip(c.vertex(v).iter()) {
                *x += y;
            }
        }
        b.iter_mut().for_each(|x| *x /= f.len() as f64);
        ids.insert(f, vertices.len());
        vertices.push(Point(b));
    }
    let mut simplices = Vec::new();
    for s in c.simplices() {
        for perm in s.vertices().iter().copied().permutations(s.vertices().len()) {
            let chain = (1..=perm.len())
                .map(|k| {
                    let mut f = perm[..k].to_vec();
                    f.sort_unstable();
                    ids[&f]
                })
                .collect();
            simplices.push(Simplex(chain));
        }
    }
    SimplicialComplex::new(c.ambient_dim(), vertices, simplices).expect("subdivision of a valid complex is valid")
}

/// Refines until every interior codimension-two face has even incidence.
/// Already-even input is returned unchanged.
pub fn enforce_even_incidence(c: &SimplicialComplex) -> Result<SimplicialComplex> {
    enforce_counting_passes(c).map(|(out, _)| out)
}

/// [`enforce_even_incidence`] plus the number of subdivision passes applied.
pub fn enforce_counting_passes(c: &SimplicialComplex) -> Result<(SimplicialComplex, usize)> {
    let bad = non_manifold_facets(c);
    if !bad.is_empty() {
        return Err(Error::Structural(format!(
            "{} facet(s) shared by more than two simplices, first {:?}",
            bad.len(),
            bad[0]
        )));
    }
    let mut cur = c.clone();
    for pass in 0..=MAX_PASSES {
        if even_incidence_violations(&cur).is_empty() {
            return Ok((cur, pass));
        }
        if pass < MAX_PASSES {
            cur = barycentric_subdivision(&cur);
        }
    }
    Err(Error::Structural(format!(
        "odd incidence persists after {MAX_PASSES} barycentric passes"
    )))
}

/// Top simplices adjacent across each facet, as `(a, b)` with `a < b`.
pub fn facet_adjacency(c: &SimplicialComplex) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (_, inc) in facets(c) {
        for (x, &a) in inc.iter().enumerate() {
            for &b in &inc[x + 1..] {
                out.push((a.min(b), a.max(b)));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Breadth-first alternating coloring of each facet-connected component,
/// anchored at its lowest simplex id with that simplex's orientation sign
/// (+1 when the simplex is not full-dimensional).
pub fn two_color(c: &SimplicialComplex) -> Result<ChessboardColoring> {
    let m = c.num_simplices();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (a, b) in facet_adjacency(c) {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut color: Vec<i8> = vec![0; m];
    let mut parent: Vec<Option<usize>> = vec![None; m];
    for root in 0..m {
        if color[root] != 0 {
            continue;
        }
        color[root] = match c.orientation_sign(c.simplex(root)) {
            Ok(-1) => -1,
            _ => 1,
        };
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            for &b in &adj[a] {
                if color[b] == 0 {
                    color[b] = -color[a];
                    parent[b] = Some(a);
                    queue.push_back(b);
                } else if color[b] == color[a] {
                    return Err(Error::ColoringObstruction { cycle: odd_cycle(&parent, a, b) });
                }
            }
        }
    }
    let coloring = ChessboardColoring {
        colors: color.into_iter().enumerate().collect(),
        violations: Vec::new(),
    };
    Ok(coloring)
}

/// Closes the tree paths from `a` and `b` to their common ancestor.
fn odd_cycle(parent: &[Option<usize>], a: usize, b: usize) -> Vec<usize> {
    let path = |mut x: usize| {
        let mut p = vec![x];
        while let Some(q) = parent[x] {
            p.push(q);
            x = q;
        }
        p
    };
    let (pa, pb) = (path(a), path(b));
    let on_b: BTreeSet<usize> = pb.iter().copied().collect();
    let lca_pos = pa.iter().position(|x| on_b.contains(x)).unwrap_or(pa.len() - 1);
    let lca = pa[lca_pos];
    let mut cycle: Vec<usize> = pa[..=lca_pos].to_vec();
    let back: Vec<usize> = pb.iter().copied().take_while(|&x| x != lca).collect();
    cycle.extend(back.into_iter().rev());
    cycle
}

/// Facet-adjacent pairs whose colors are missing or equal.
pub fn alternation_violations(c: &SimplicialComplex, coloring: &ChessboardColoring) -> Vec<(usize, usize)> {
    facet_adjacency(c)
        .into_iter()
        .filter(|&(a, b)| match (coloring.color(a), coloring.color(b)) {
            (Some(x), Some(y)) => x == y || x == 0,
            _ => true,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;

    fn fan(k: usize) -> SimplicialComplex {
        let mut coords = vec![vec![0.0, 0.0]];
        for i in 0..k {
            let t = std::f64::consts::TAU * i as f64 / k as f64;
            coords.push(vec![t.cos(), t.sin()]);
        }
        let tris = (0..k).map(|i| vec![0, 1 + i, 1 + (i + 1) % k]).collect();
        SimplicialComplex::from_raw(2, coords, tris).unwrap()
    }

    #[test]
    fn tetrahedron_boundary_has_four_odd_vertices() {
        let c = generate::tetrahedron_boundary();
        assert_eq!(even_incidence_violations(&c), vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn centered_square_and_grid_are_even() {
        assert!(even_incidence_violations(&fan(4)).is_empty());
        assert!(even_incidence_violations(&generate::square_grid(5, 4, 1.0, [0.0, 0.0])).is_empty());
    }

    #[test]
    fn subdivision_fixes_tetrahedron_boundary() {
        let c = generate::tetrahedron_boundary();
        let e = enforce_even_incidence(&c).unwrap();
        assert_eq!(e.num_simplices(), 4 * 6);
        assert!(even_incidence_violations(&e).is_empty());
        for v in e.faces_of_dim(0) {
            assert_eq!(e.incident(v).len() % 2, 0);
        }
    }

    #[test]
    fn even_input_is_returned_unchanged() {
        let c = fan(6);
        assert_eq!(enforce_even_incidence(&c).unwrap(), c);
    }

    #[test]
    fn book_is_structural_error() {
        let c = SimplicialComplex::from_raw(
            3,
            vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, -1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 1, 4]],
        )
        .unwrap();
        assert!(matches!(enforce_even_incidence(&c), Err(Error::Structural(_))));
    }

    #[test]
    fn square_two_triangles_alternate() {
        let c = SimplicialComplex::from_raw(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
            vec![vec![0, 1, 2], vec![1, 3, 2]],
        )
        .unwrap();
        let col = two_color(&c).unwrap();
        assert_eq!(col.color(0), Some(1));
        assert_eq!(col.color(1), Some(-1));
    }

    #[test]
    fn even_fan_alternates_and_odd_fan_is_obstructed() {
        let col = two_color(&fan(4)).unwrap();
        let seq: Vec<i8> = (0..4).map(|i| col.color(i).unwrap()).collect();
        assert_eq!(seq, vec![1, -1, 1, -1]);
        assert!(alternation_violations(&fan(4), &col).is_empty());
        match two_color(&fan(5)) {
            Err(Error::ColoringObstruction { cycle }) => {
                assert_eq!(cycle.len() % 2, 1);
                assert!(cycle.len() >= 3);
            }
            other => panic!("expected obstruction, got {other:?}"),
        }
    }

    #[test]
    fn subdivision_multiplies_count_and_keeps_volume() {
        let c = generate::cube_grid(2, 1.0, [0.0, 0.0, 0.0]);
        let b = barycentric_subdivision(&c);
        assert_eq!(b.num_simplices(), c.num_simplices() * 24);
        assert!((b.total_volume() - c.total_volume()).abs() < 1e-9 * c.total_volume());
    }
}
