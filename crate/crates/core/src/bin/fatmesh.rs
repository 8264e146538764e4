use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use fatmesh::alexander;
use fatmesh::cell;
use fatmesh::chessboard;
use fatmesh::fmesh;
use fatmesh::mash::{self, MashOptions, SELF_TEST_INSTANCES};
use fatmesh::pipeline::{self, PipelineConfig};
use fatmesh::prism::{self, TubeSpec};
use fatmesh::simplex;
use fatmesh::validate;
use fatmesh::{Error, Result, EPS_GEOM};

const EXIT_CODES: &str = "Exit codes:
  0  success
  2  parse or input error
  3  geometric failure (degenerate input, empty overlap, ambiguity, estimation)
  4  perturbation failure
  5  structural failure (invalid complex, parity, coloring, map assembly)
  6  i/o error";

#[derive(Parser)]
#[command(name = "fatmesh", version, about = "Fat triangulation toolkit", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-simplex fatness report of an FMESH file.
    Fatness {
        #[arg(long = "in")]
        input: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that a mesh is a geometric simplicial complex.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = EPS_GEOM)]
        tol: f64,
    },
    /// Intersect simplex `sa` of mesh `a` with simplex `sb` of mesh `b`.
    Intersect {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        sa: usize,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        sb: usize,
        #[arg(long, default_value_t = EPS_GEOM)]
        tol: f64,
        /// Also write the center-join subdivision of the cell as FMESH.
        #[arg(long)]
        subdivision: Option<PathBuf>,
    },
    /// Merge two meshes over a ball around a vertex of the first.
    Mash {
        #[arg(long)]
        k1: PathBuf,
        #[arg(long)]
        k2: PathBuf,
        /// JSON with any of `eps`, `v0`, `seed`, `self_test_instances`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        v0: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        log: PathBuf,
    },
    /// Enforce even incidence and write an alternating coloring.
    Chessboard {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        coloring: PathBuf,
    },
    /// Assemble the piecewise map of a colored mesh and estimate its dilatation.
    QmEval {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        coloring: PathBuf,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Optional CSV of `sample,k` rows.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Triangulate a tube described by a JSON spec.
    Prism {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Mash, enforce parity, color, assemble and estimate in one run.
    Pipeline {
        #[arg(long)]
        t1: PathBuf,
        #[arg(long)]
        t2: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        v0: Option<usize>,
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MashConfig {
    eps: Option<f64>,
    v0: Option<usize>,
    seed: Option<u64>,
    self_test_instances: Option<usize>,
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    seed: Option<u64>,
    #[serde(flatten)]
    body: T,
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn run(cli: Cli) -> std::result::Result<(), (Option<&'static str>, Error)> {
    let plain = |e: Error| (None, e);
    match cli.command {
        Command::Fatness { input, out } => {
            let c = fmesh::read_file(&input).map_err(plain)?;
            let r = simplex::fatness_report(&c);
            emit(&json(&r).map_err(plain)?, out.as_deref()).map_err(plain)
        }
        Command::Validate { input, tol } => {
            let c = fmesh::read_file(&input).map_err(plain)?;
            let v = validate::validate_with_tolerance(&c, tol);
            emit(&json(&v).map_err(plain)?, None).map_err(plain)?;
            if v.is_empty() {
                Ok(())
            } else {
                Err(plain(Error::Structural(format!("{} violation(s)", v.len()))))
            }
        }
        Command::Intersect { a, sa, b, sb, tol, subdivision } => {
            let ca = fmesh::read_file(&a).map_err(plain)?;
            let cb = fmesh::read_file(&b).map_err(plain)?;
            for (c, s, name) in [(&ca, sa, "sa"), (&cb, sb, "sb")] {
                if s >= c.num_simplices() {
                    return Err(plain(Error::Input(format!("{name} = {s} is out of range"))));
                }
            }
            let cell = cell::intersect_simplices(&ca, ca.simplex(sa), &cb, cb.simplex(sb), tol).map_err(plain)?;
            let report = cell.as_ref().map(|c| c.report());
            emit(&json(&report).map_err(plain)?, None).map_err(plain)?;
            if let (Some(path), Some(c)) = (subdivision, cell) {
                let sub = cell::subdivide_cell(&c).map_err(plain)?;
                fmesh::write_file(path, &sub).map_err(plain)?;
            }
            Ok(())
        }
        Command::Mash { k1, k2, config, eps, v0, seed, out, log } => {
            let cfg: MashConfig = match config {
                Some(p) => read_json(&p).map_err(plain)?,
                None => MashConfig::default(),
            };
            let c1 = fmesh::read_file(&k1).map_err(plain)?;
            let c2 = fmesh::read_file(&k2).map_err(plain)?;
            let eps = eps
                .or(cfg.eps)
                .ok_or_else(|| plain(Error::Input("eps is required (flag or config)".into())))?;
            let seed = seed.or(cfg.seed).unwrap_or(0);
            let center = v0.or(cfg.v0).unwrap_or_else(|| {
                let pts: Vec<&[f64]> = c2.vertices().iter().map(|p| p.as_ref()).collect();
                fatmesh::generate::nearest_vertex(&c1, &fatmesh::linalg::centroid(&pts))
            });
            let opts = MashOptions {
                eps,
                center_vertex: center,
                seed,
                self_test_instances: cfg.self_test_instances.unwrap_or(SELF_TEST_INSTANCES),
            };
            let r = mash::mash_with(&c1, &c2, &opts).map_err(|e| (Some("mash"), e))?;
            fmesh::write_file(&out, &r.merged).map_err(plain)?;
            let text = json(&Report { seed: Some(seed), body: &r }).map_err(plain)?;
            emit(&text, Some(&log)).map_err(plain)
        }
        Command::Chessboard { input, out, coloring } => {
            let c = fmesh::read_file(&input).map_err(plain)?;
            let even = chessboard::enforce_even_incidence(&c).map_err(|e| (Some("chessboard"), e))?;
            let col = chessboard::two_color(&even).map_err(|e| (Some("coloring"), e))?;
            fmesh::write_file(&out, &even).map_err(plain)?;
            emit(&pipeline::coloring_json(&col), Some(&coloring)).map_err(plain)
        }
        Command::QmEval { input, coloring, samples, seed, out, csv } => {
            let c = fmesh::read_file(&input).map_err(plain)?;
            let text = std::fs::read_to_string(&coloring).map_err(|e| plain(e.into()))?;
            let col = pipeline::parse_coloring(&text).map_err(plain)?;
            let map = alexander::assemble_global_map(&c, &col).map_err(|e| (Some("assemble"), e))?;
            let (est, trace) =
                alexander::estimate_with_samples(&map, samples, seed).map_err(|e| (Some("dilatation"), e))?;
            let text = json(&Report { seed: Some(seed), body: &est }).map_err(plain)?;
            emit(&text, Some(&out)).map_err(plain)?;
            if let Some(path) = csv {
                let mut rows = String::from("sample,k\n");
                for (i, k) in trace.iter().enumerate() {
                    rows.push_str(&format!("{i},{k}\n"));
                }
                emit(&rows, Some(&path)).map_err(plain)?;
            }
            Ok(())
        }
        Command::Prism { spec, out, report } => {
            let spec: TubeSpec = read_json(&spec).map_err(plain)?;
            let t = prism::tube_triangulate(&spec).map_err(|e| (Some("prism"), e))?;
            fmesh::write_file(&out, &t.complex).map_err(plain)?;
            emit(&json(&t.fatness).map_err(plain)?, Some(&report)).map_err(plain)
        }
        Command::Pipeline { t1, t2, eps, seed, v0, samples, out_dir } => {
            let mut cfg = PipelineConfig::new(t1, t2, out_dir, eps, seed);
            cfg.center_vertex = v0;
            cfg.samples_per_simplex = samples;
            let out = pipeline::run_files(&cfg).map_err(|e| (Some(e.stage), e.source))?;
            emit(&json(&out.summary).map_err(plain)?, None).map_err(plain)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((stage, e)) => {
            let body = serde_json::json!({
                "stage": stage,
                "error": e.to_string(),
                "exit_code": e.exit_code(),
            });
            eprintln!("{body}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
