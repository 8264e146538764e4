//! Fat triangulations: fatness measures, transverse simplex intersection,
//! mashing of overlapping triangulations, chessboard coloring, Alexander maps
//! and prism/tube constructions.

pub mod alexander;
pub mod cell;
pub mod chessboard;
pub mod error;
pub mod fmesh;
pub mod generate;
pub mod linalg;
pub mod mash;
pub mod pipeline;
pub mod prism;
pub mod seed;
pub mod simplex;
pub mod transversal;
pub mod validate;

pub use error::{Error, Result};
pub use simplex::{Point, Simplex, SimplicialComplex, EPS_GEOM};
