//! Structured meshes used as inputs: square grids, rotated copies, cube
//! grids with the Kuhn triangulation and small closed surfaces.

use crate::linalg;
use crate::simplex::SimplicialComplex;

/// `nx` by `ny` squares of side `h` starting at `origin`, each cut along the
/// diagonal from its lower-left corner.
pub fn square_grid(nx: usize, ny: usize, h: f64, origin: [f64; 2]) -> SimplicialComplex {
    let mut coords = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            coords.push(vec![origin[0] + i as f64 * h, origin[1] + j as f64 * h]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut simplices = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            simplices.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            simplices.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    SimplicialComplex::from_raw(2, coords, simplices).expect("grid is well formed")
}

/// Copy of a planar complex rotated by `angle` radians about `center`.
pub fn rotated(c: &SimplicialComplex, angle: f64, center: [f64; 2]) -> SimplicialComplex {
    let (s, co) = angle.sin_cos();
    let coords = c
        .vertices()
        .iter()
        .map(|p| {
            let (x, y) = (p[0] - center[0], p[1] - center[1]);
            vec![center[0] + co * x - s * y, center[1] + s * x + co * y]
        })
        .collect();
    let simplices = c.simplices().iter().map(|s| s.vertices().to_vec()).collect();
    SimplicialComplex::from_raw(2, coords, simplices).expect("rotation keeps the complex well formed")
}

/// Copy of a complex translated by `offset`.
pub fn translated(c: &SimplicialComplex, offset: &[f64]) -> SimplicialComplex {
    let coords = c.vertices().iter().map(|p| linalg::add(p, offset)).collect();
    let simplices = c.simplices().iter().map(|s| s.vertices().to_vec()).collect();
    SimplicialComplex::from_raw(c.ambient_dim(), coords, simplices).expect("translation keeps the complex well formed")
}

/// `m^3` cubes of side `h` at `origin`, each split into the 6 Kuhn tetrahedra.
pub fn cube_grid(m: usize, h: f64, origin: [f64; 3]) -> SimplicialComplex {
    let id = |i: usize, j: usize, k: usize| (k * (m + 1) + j) * (m + 1) + i;
    let mut coords = Vec::new();
    for k in 0..=m {
        for j in 0..=m {
            for i in 0..=m {
                coords.push(vec![
                    origin[0] + i as f64 * h,
                    origin[1] + j as f64 * h,
                    origin[2] + k as f64 * h,
                ]);
            }
        }
    }
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut simplices = Vec::new();
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                for p in perms {
                    let mut cur = [i, j, k];
                    let mut s = vec![id(cur[0], cur[1], cur[2])];
                    for axis in p {
                        cur[axis] += 1;
                        s.push(id(cur[0], cur[1], cur[2]));
                    }
                    simplices.push(s);
                }
            }
        }
    }
    SimplicialComplex::from_raw(3, coords, simplices).expect("cube grid is well formed")
}

/// The four triangles bounding a regular tetrahedron, as a surface in `R^3`.
pub fn tetrahedron_boundary() -> SimplicialComplex {
    let coords = vec![
        vec![1.0, 1.0, 1.0],
        vec![1.0, -1.0, -1.0],
        vec![-1.0, 1.0, -1.0],
        vec![-1.0, -1.0, 1.0],
    ];
    SimplicialComplex::from_raw(3, coords, vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]])
        .expect("tetrahedron boundary is well formed")
}

/// Vertex closest to `x` (lowest id on ties).
pub fn nearest_vertex(c: &SimplicialComplex, x: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, p) in c.vertices().iter().enumerate() {
        let d = linalg::dist(p, x);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}
