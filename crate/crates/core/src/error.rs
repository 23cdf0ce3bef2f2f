use std::path::PathBuf;

use crate::dpp::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("mesh spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),
    #[error("invalid mesh geometry: {0}")]
    InvalidGeometry(String),
    #[error("stencil radius {eps} must be strictly smaller than the collar width {collar}")]
    RadiusExceedsCollar { eps: f64, collar: f64 },
    #[error("stencil radius {eps} is not a positive integer multiple of the spacing {h}")]
    NonIntegerRadius { eps: f64, h: f64 },
    #[error("node {0} is not an interior node")]
    NotInterior(usize),
    #[error("node index {0} is out of range")]
    NodeOutOfRange(usize),

    #[error("expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("field `{field}` evaluates to a non-finite value at ({x}, {y})")]
    EvalDomain { field: String, x: f64, y: f64 },
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("exponent p = {0} is outside [2, inf)")]
    ExponentOutOfRange(f64),
    #[error("psi1 > psi2 at {} node(s), first at index {}", .nodes.len(), .nodes[0])]
    ObstacleOrderViolation { nodes: Vec<usize> },
    #[error("f outside [psi1, psi2] at {} collar node(s), first at index {}", .nodes.len(), .nodes[0])]
    BoundaryOrderViolation { nodes: Vec<usize> },

    #[error("grid function has {got} values but the mesh has {expected} nodes")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("bracket gap {} still >= tolerance after {} iterations", .0.final_gap, .0.iterations)]
    MaxIterationsExceeded(Box<SolveReport>),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("game run exceeded the step cap of {cap}")]
    StepCapExceeded { cap: u64 },
    #[error("input is not a solved grid function: residual {residual} > {limit}")]
    NonSolvedInput { residual: f64, limit: f64 },
    #[error("at least one run is required")]
    NoRuns,

    #[error("gradient magnitude {grad:e} at ({x}, {y}) is too small for the normalized residual")]
    DegenerateGradient { grad: f64, x: f64, y: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {msg}")]
    ConfigType { key: String, msg: String },
    #[error("missing required setting: {0}")]
    MissingRequired(String),
    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed solution file: {msg}")]
    SolutionFormat { path: PathBuf, msg: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
