use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("grids do not match: {0}")]
    GridMismatch(String),
    #[error("source not exact: {0}")]
    SourceNotExact(String),
    #[error("face source not 2π-quantized (face {face}, value {value})")]
    NotQuantized { face: usize, value: f64 },
    #[error("no global field on the torus (nonzero total index {0})")]
    IndexObstruction(i64),
    #[error("curve not exact in homology (axis-plane crossing totals {0:?})")]
    NonExactHomology([i64; 3]),
    #[error("degenerate zero: plaquette winding {winding} at face {face}")]
    DegenerateZero { face: usize, winding: i64 },
    #[error("unmatched punctures: cell {cell} pierced by {count} faces")]
    UnmatchedPunctures { cell: usize, count: usize },
    #[error("near-critical phase s = {0}")]
    NearCriticalPhase(f64),
    #[error("degree mismatch: form degree {form} vs current dimension {current}")]
    DegreeMismatch { form: usize, current: usize },
    #[error("non-manifold edge ({0}, {1}) with 3+ incident triangles")]
    NonManifoldEdge(usize, usize),
    #[error("requires exact volume form (ambient must be Euclidean, not a torus)")]
    RequiresExactVolumeForm,
    #[error("supplied primitive is not a primitive of the volume form (dν ≠ μ at {0:?})")]
    NotAPrimitive([f64; 3]),
    #[error("degenerate vertex {0}: zero tangent")]
    DegenerateVertex(usize),
    #[error("self-intersection detected between segments {0} and {1}; reconnection out of scope")]
    SelfIntersection(usize, usize),
    #[error("invalid time step: {0}")]
    InvalidTimeStep(f64),
    #[error("lift left the chart at step {step}: {reason}")]
    LiftLeftChart { step: usize, reason: String },
    #[error("branch-ambiguous holonomy: {frac:.3} of the volume within {margin:.1e} of the cut; subdivide loop")]
    BranchAmbiguous { frac: f64, margin: f64 },
    #[error("singular normal differential at zero sample {0}")]
    SingularNormalDifferential(usize),
    #[error("too few regular phase values: found {found}, need {need}")]
    TooFewRegularPhases { found: usize, need: usize },
    #[error("invalid parameter family: {0}")]
    InvalidFamily(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;
