//! Merging two overlapping triangulations into one: K1 is kept inside the
//! ball `B_ε(v0)`, K2 outside it, and the band between them is replaced by a
//! fat refinement of the two after perturbing K1 into general position.

pub mod overlap;
pub mod overlay;
pub mod perturb;
pub mod schedule;

use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{self, SimplicialComplex};

pub use overlap::{select_overlap, OverlapRegion};
pub use perturb::{perturb_vertex_transversal, PerturbedVertex, SweepLog};
pub use schedule::{compute_schedule, self_test_constants, ConstantChoices, PerturbationSchedule, SelfTestReport};

/// Seed of the constant self-tests; fixed so their outcome is a property of
/// the dimension alone and can be cached.
pub const SELF_TEST_SEED: u64 = 0x5eed;
pub const SELF_TEST_INSTANCES: usize = 1000;

#[derive(Clone, Debug)]
pub struct MashOptions {
    pub eps: f64,
    pub center_vertex: usize,
    pub seed: u64,
    pub self_test_instances: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginEntry {
    pub dim: usize,
    pub target: f64,
    pub after_own_sweep: f64,
    pub final_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Band {
    /// K1 simplices with every vertex within this radius are kept.
    pub keep_inner_radius: f64,
    /// K2 simplices at least this far from the center are kept.
    pub keep_outer_radius: f64,
    /// Radii of the annulus containing every modified simplex.
    pub inner: f64,
    pub outer: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Unchanged {
    pub k1: Vec<usize>,
    pub k2: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MashResult {
    #[serde(skip)]
    pub merged: SimplicialComplex,
    /// `(φ0 of K1, φ0 of K2)`.
    pub fatness_before: (f64, f64),
    pub fatness_after: f64,
    /// Final displacement of each perturbed K1 vertex.
    pub displacement_log: BTreeMap<usize, f64>,
    pub max_displacement: f64,
    pub transversality_log: Vec<MarginEntry>,
    pub unchanged_regions: Unchanged,
    /// True when K2 does not reach the ball and K1 is returned as is.
    pub identity: bool,
    pub overlap: Option<OverlapRegion>,
    pub schedule: Option<PerturbationSchedule>,
    pub self_test: Option<SelfTestReport>,
    pub band: Option<Band>,
    pub sweep: Option<SweepLog>,
    pub cells: usize,
    pub repairs: usize,
    pub merged_simplices: usize,
    pub merged_vertices: usize,
}

static SELF_TESTS: Mutex<BTreeMap<(usize, usize), SelfTestReport>> = Mutex::new(BTreeMap::new());

/// Self-test report for dimension `n`, computed once per process.
pub fn cached_self_test(n: usize, instances: usize) -> Result<SelfTestReport> {
    if let Some(r) = SELF_TESTS.lock().expect("self-test cache poisoned").get(&(n, instances)) {
        return Ok(r.clone());
    }
    let r = self_test_constants(n, instances, SELF_TEST_SEED)?;
    SELF_TESTS
        .lock()
        .expect("self-test cache poisoned")
        .insert((n, instances), r.clone());
    Ok(r)
}

fn complex_fatness(c: &SimplicialComplex) -> f64 {
    (0..c.num_simplices())
        .map(|i| simplex::fatness(&c.simplex_points(i)))
        .fold(f64::INFINITY, f64::min)
}

pub fn mash(k1: &SimplicialComplex, k2: &SimplicialComplex, v0: usize, eps: f64, seed: u64) -> Result<MashResult> {
    mash_with(
        k1,
        k2,
        &MashOptions {
            eps,
            center_vertex: v0,
            seed,
            self_test_instances: SELF_TEST_INSTANCES,
        },
    )
}

pub fn mash_with(k1: &SimplicialComplex, k2: &SimplicialComplex, opts: &MashOptions) -> Result<MashResult> {
    let n = k1.ambient_dim();
    if k2.ambient_dim() != n {
        return Err(Error::Input("complexes live in different ambient dimensions".into()));
    }
    if k1.is_empty() {
        return Err(Error::Input("K1 is empty".into()));
    }
    if k1.top_dim() != n || (!k2.is_empty() && k2.top_dim() != n) {
        return Err(Error::Input("mashing needs full-dimensional complexes".into()));
    }
    let v0 = opts.center_vertex;
    if v0 >= k1.num_vertices() {
        return Err(Error::Input(format!("center vertex {v0} out of range")));
    }
    let eps = opts.eps;
    let center = k1.vertex(v0).0.clone();
    let phi1 = complex_fatness(k1);
    let phi2 = if k2.is_empty() { 1.0 } else { complex_fatness(k2) };

    let reaches_ball = (0..k2.num_simplices()).any(|j| overlap::min_radius(k2, j, &center) < eps);
    if !reaches_ball {
        if !k2.is_empty() && !overlap::carriers_meet(k1, k2) {
            return Err(Error::OverlapTooThin {
                min_viable_eps: f64::INFINITY,
            });
        }
        return Ok(identity_result(k1, (phi1, phi2)));
    }

    let region = select_overlap(k1, k2, v0, eps)?;
    let (d1, d2) = (region.d1, region.d2);
    let phi0 = phi1.min(phi2);
    if !(phi0 > 0.0) {
        return Err(Error::DegenerateGeometry("an input complex has a degenerate simplex".into()));
    }
    let self_test = cached_self_test(n, opts.self_test_instances)?;
    let schedule = compute_schedule(phi0, d1, n, self_test.constants)?;
    let t0 = schedule.budgets[0];

    let rho_in = eps - 2.0 * d2;
    let rho_out = eps - d1;
    let mut kept1 = Vec::new();
    let mut band1 = Vec::new();
    for i in 0..k1.num_simplices() {
        if overlap::max_radius(k1, i, &center) <= rho_in {
            kept1.push(i);
        } else if overlap::min_radius(k1, i, &center) < rho_out + d2 + t0 {
            band1.push(i);
        }
    }
    let mut kept2 = Vec::new();
    let mut band2 = Vec::new();
    for j in 0..k2.num_simplices() {
        if overlap::min_radius(k2, j, &center) >= rho_out {
            kept2.push(j);
        } else {
            band2.push(j);
        }
    }

    let mut movable: Vec<usize> = band1.iter().flat_map(|&i| k1.simplex(i).vertices().to_vec()).collect();
    movable.sort_unstable();
    movable.dedup();
    let fixed = perturb::fixed_faces(k2, &band2);
    let (positions, sweep) = perturb::sweep(k1, &movable, &fixed, &schedule, crate::seed::derive(opts.seed, "sweep"))?;
    let finals = perturb::margins_by_dimension(k1, &positions, &movable, &fixed, d1);
    let transversality_log = (0..n)
        .map(|i| MarginEntry {
            dim: i,
            target: schedule.margins[i],
            after_own_sweep: sweep.margin_after_own_sweep[i],
            final_margin: finals[i],
        })
        .collect();

    let built = overlay::build_overlay(&overlay::OverlayInput {
        k1,
        pos1: &positions,
        k2,
        kept1: &kept1,
        band1: &band1,
        kept2: &kept2,
        band2: &band2,
        phi0,
    })?;
    let merged = built.complex;
    let unchanged1: Vec<usize> = built
        .verbatim1
        .iter()
        .copied()
        .filter(|&i| k1.simplex(i).vertices().iter().all(|&v| positions[v] == k1.vertex(v).0))
        .collect();
    let max_displacement = sweep.displacement.values().copied().fold(0.0, f64::max);
    let mesh1 = k1.mesh_size();
    let mesh2 = k2.mesh_size();
    Ok(MashResult {
        fatness_before: (phi1, phi2),
        fatness_after: complex_fatness(&merged),
        displacement_log: sweep.displacement.clone(),
        max_displacement,
        transversality_log,
        unchanged_regions: Unchanged {
            k1: unchanged1,
            k2: built.verbatim2,
        },
        identity: false,
        overlap: Some(region),
        schedule: Some(schedule),
        self_test: Some(self_test),
        band: Some(Band {
            keep_inner_radius: rho_in,
            keep_outer_radius: rho_out,
            inner: (rho_in - mesh1 - t0).max(0.0),
            outer: rho_out + mesh2,
        }),
        sweep: Some(sweep),
        cells: built.cells,
        repairs: built.repairs,
        merged_simplices: merged.num_simplices(),
        merged_vertices: merged.num_vertices(),
        merged,
    })
}

fn identity_result(k1: &SimplicialComplex, before: (f64, f64)) -> MashResult {
    MashResult {
        merged: k1.clone(),
        fatness_before: before,
        fatness_after: before.0,
        displacement_log: BTreeMap::new(),
        max_displacement: 0.0,
        transversality_log: Vec::new(),
        unchanged_regions: Unchanged {
            k1: (0..k1.num_simplices()).collect(),
            k2: Vec::new(),
        },
        identity: true,
        overlap: None,
        schedule: None,
        self_test: None,
        band: None,
        sweep: None,
        cells: 0,
        repairs: 0,
        merged_simplices: k1.num_simplices(),
        merged_vertices: k1.num_vertices(),
    }
}
