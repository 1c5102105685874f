use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("axis {axis}: degenerate interval [{lo}, {hi}]")]
    DegenerateInterval { axis: usize, lo: f64, hi: f64 },

    #[error("axis {axis}: resolution {got} is below the floor of 2")]
    ResolutionTooSmall { axis: usize, got: usize },

    #[error("non-finite sample at lattice index {index:?}, component {component}")]
    NonFinite { index: Vec<usize>, component: usize },

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("axis {axis}: {got} valid samples, stencil needs {need}")]
    GridTooSmall { axis: usize, need: usize, got: usize },

    #[error("integration region is empty")]
    EmptyRegion,

    #[error("lattice index {0:?} lies outside the valid region")]
    OutsideValidRegion(Vec<usize>),

    #[error("epsilon {epsilon} is under-resolved (floor is 4 cells = {floor})")]
    UnderResolved { epsilon: f64, floor: f64 },

    #[error("Lorentzian signature lost at {point:?}")]
    SignatureLoss { point: Vec<f64> },

    #[error("no cone margin below the cap {cap} achieves nesting")]
    NoNesting { cap: f64 },

    #[error("near-singular matrix (|det| = {det:e})")]
    NearSingular { det: f64 },

    #[error("zero vector has no causal character")]
    ZeroVector,

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("inadmissible slab: {0}")]
    Inadmissible(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    #[error("model `{0}` carries no certified distributional Ricci decomposition")]
    MissingDecomposition(String),

    #[error("degenerate witness path: {0}")]
    DegenerateWitness(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
