//! End-to-end run: mash two meshes, enforce even incidence, color, assemble
//! the piecewise map and estimate its dilatation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::alexander::{self, DilatationEstimate};
use crate::chessboard::{self, ChessboardColoring};
use crate::error::{Error, Result};
use crate::mash::{self, MarginEntry, MashOptions, SELF_TEST_INSTANCES};
use crate::seed;
use crate::simplex::{self, SimplicialComplex};
use crate::{fmesh, generate};

pub const MERGED_FILE: &str = "merged.fmesh";
pub const COLORING_FILE: &str = "coloring.json";
pub const DILATATION_FILE: &str = "dilatation.json";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub t1: PathBuf,
    pub t2: PathBuf,
    pub out_dir: PathBuf,
    pub eps: f64,
    /// Ball center as a vertex of `t1`; `None` picks the vertex nearest the
    /// middle of the two meshes' common bounding box.
    pub center_vertex: Option<usize>,
    pub seed: u64,
    pub samples_per_simplex: usize,
    pub self_test_instances: usize,
}

impl PipelineConfig {
    pub fn new(t1: impl Into<PathBuf>, t2: impl Into<PathBuf>, out_dir: impl Into<PathBuf>, eps: f64, seed: u64) -> Self {
        PipelineConfig {
            t1: t1.into(),
            t2: t2.into(),
            out_dir: out_dir.into(),
            eps,
            center_vertex: None,
            seed,
            samples_per_simplex: 8,
            self_test_instances: SELF_TEST_INSTANCES,
        }
    }
}

/// A failure tagged with the stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("stage {stage} failed: {source}")]
pub struct StageError {
    pub stage: &'static str,
    #[source]
    pub source: Error,
}

impl StageError {
    pub fn exit_code(&self) -> i32 {
        self.source.exit_code()
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> std::result::Result<T, StageError> {
    r.map_err(|source| StageError { stage: name, source })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MashStage {
    pub center_vertex: usize,
    pub identity: bool,
    pub fatness_after: f64,
    pub max_displacement: f64,
    pub margins: Vec<MarginEntry>,
    pub simplices: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChessboardStage {
    pub odd_faces_before: usize,
    pub passes: usize,
    pub simplices: usize,
    pub min_fatness: f64,
    pub positive: usize,
    pub negative: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapStage {
    pub pieces: usize,
    pub branch_faces: usize,
    pub global_k: f64,
    pub sample_count: usize,
    pub jacobian_failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub seed: u64,
    pub eps: f64,
    pub input_fatness: (f64, f64),
    pub mash: MashStage,
    pub chessboard: ChessboardStage,
    pub map: MapStage,
}

/// Everything a run produces, before it is written out.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub merged: SimplicialComplex,
    pub coloring: ChessboardColoring,
    pub dilatation: DilatationEstimate,
    pub summary: PipelineSummary,
}

fn auto_center(t1: &SimplicialComplex, t2: &SimplicialComplex) -> usize {
    let n = t1.ambient_dim();
    let bounds = |c: &SimplicialComplex| {
        let pts: Vec<&[f64]> = c.vertices().iter().map(|p| p.as_ref()).collect();
        simplex::bbox(&pts)
    };
    let (lo1, hi1) = bounds(t1);
    let (lo2, hi2) = bounds(t2);
    let mid: Vec<f64> = (0..n).map(|j| 0.5 * (lo1[j].max(lo2[j]) + hi1[j].min(hi2[j]))).collect();
    generate::nearest_vertex(t1, &mid)
}

/// Runs every stage in memory.
pub fn run(t1: &SimplicialComplex, t2: &SimplicialComplex, cfg: &PipelineConfig) -> std::result::Result<PipelineOutput, StageError> {
    if t1.is_empty() || t2.is_empty() {
        return Err(StageError { stage: "input", source: Error::Input("input meshes must be non-empty".into()) });
    }
    let v0 = cfg.center_vertex.unwrap_or_else(|| auto_center(t1, t2));
    let opts = MashOptions {
        eps: cfg.eps,
        center_vertex: v0,
        seed: seed::derive(cfg.seed, "mash"),
        self_test_instances: cfg.self_test_instances,
    };
    let m = stage("mash", mash::mash_with(t1, t2, &opts))?;
    let odd_before = chessboard::even_incidence_violations(&m.merged).len();
    let (even, passes) = stage("chessboard", chessboard::enforce_counting_passes(&m.merged))?;
    let coloring = stage("coloring", chessboard::two_color(&even))?;
    let map = stage("assemble", alexander::assemble_global_map(&even, &coloring))?;
    let dilatation = stage(
        "dilatation",
        alexander::estimate_dilatation(&map, cfg.samples_per_simplex, seed::derive(cfg.seed, "dilatation")),
    )?;
    let positive = coloring.colors.values().filter(|&&c| c > 0).count();
    let summary = PipelineSummary {
        seed: cfg.seed,
        eps: cfg.eps,
        input_fatness: m.fatness_before,
        mash: MashStage {
            center_vertex: v0,
            identity: m.identity,
            fatness_after: m.fatness_after,
            max_displacement: m.max_displacement,
            margins: m.transversality_log.clone(),
            simplices: m.merged.num_simplices(),
        },
        chessboard: ChessboardStage {
            odd_faces_before: odd_before,
            passes,
            simplices: even.num_simplices(),
            min_fatness: simplex::fatness_report(&even).min_fatness,
            positive,
            negative: coloring.colors.len() - positive,
        },
        map: MapStage {
            pieces: map.pieces.len(),
            branch_faces: map.branch_set.len(),
            global_k: dilatation.global_k,
            sample_count: dilatation.sample_count,
            jacobian_failures: dilatation.jacobian_failures,
        },
    };
    Ok(PipelineOutput { merged: even, coloring, dilatation, summary })
}

/// Coloring as a JSON object `{ "simplexId": +-1 }`.
pub fn coloring_json(c: &ChessboardColoring) -> String {
    serde_json::to_string_pretty(&c.colors).expect("color maps serialize")
}

/// Reads a coloring written by [`coloring_json`].
pub fn parse_coloring(text: &str) -> Result<ChessboardColoring> {
    let colors = serde_json::from_str(text)?;
    Ok(ChessboardColoring { colors, violations: Vec::new() })
}

/// Reads both inputs, runs, and writes the four artifacts into `out_dir`.
/// Nothing is written unless every stage succeeds.
pub fn run_files(cfg: &PipelineConfig) -> std::result::Result<PipelineOutput, StageError> {
    let t1 = stage("read", fmesh::read_file(&cfg.t1))?;
    let t2 = stage("read", fmesh::read_file(&cfg.t2))?;
    let out = run(&t1, &t2, cfg)?;
    stage("write", write_artifacts(&cfg.out_dir, &out))?;
    Ok(out)
}

pub fn write_artifacts(dir: &Path, out: &PipelineOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    fmesh::write_file(dir.join(MERGED_FILE), &out.merged)?;
    std::fs::write(dir.join(COLORING_FILE), coloring_json(&out.coloring))?;
    std::fs::write(dir.join(DILATATION_FILE), serde_json::to_string_pretty(&out.dilatation)?)?;
    std::fs::write(dir.join(SUMMARY_FILE), serde_json::to_string_pretty(&out.summary)?)?;
    Ok(())
}
