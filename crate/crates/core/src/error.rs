use thiserror::Error;

/// Errors raised by the geometry, mashing, coloring and map-assembly stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("dimension ambiguous within tolerance: candidates {low} and {high}")]
    ToleranceAmbiguity { low: usize, high: usize },

    #[error("point outside simplex (barycentric coordinates {barycentric:?})")]
    Domain { barycentric: Vec<f64> },

    #[error("overlap band is empty; minimal viable eps is {min_viable_eps}")]
    OverlapTooThin { min_viable_eps: f64 },

    #[error("perturbation of vertex {vertex} failed; best margin {best_margin}")]
    PerturbationFailure { vertex: usize, best_margin: f64 },

    #[error("merged carrier has gaps in the band; uncovered witnesses {witnesses:?}")]
    CarrierMismatch { witnesses: Vec<Vec<f64>> },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("facet adjacency has an odd cycle through simplices {cycle:?}")]
    ColoringObstruction { cycle: Vec<usize> },

    #[error("map assembly failed on face {face:?}: {reason}")]
    Assembly { face: Vec<usize>, reason: String },

    #[error("dilatation estimation failed for simplex {simplex}: every sample was singular")]
    Estimation { simplex: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Parse { .. } | Error::Json(_) => 2,
            Error::DegenerateGeometry(_)
            | Error::ToleranceAmbiguity { .. }
            | Error::Domain { .. }
            | Error::OverlapTooThin { .. }
            | Error::CarrierMismatch { .. }
            | Error::Estimation { .. } => 3,
            Error::PerturbationFailure { .. } => 4,
            Error::Structural(_) | Error::ColoringObstruction { .. } | Error::Assembly { .. } => 5,
            Error::Io(_) => 6,
        }
    }
}
