use thiserror::Error;

/// Errors raised by the library. The CLI maps every variant to exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("divergent kernel: {0}")]
    DivergentKernel(String),

    #[error("quadrature failed to converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("site {0:?} lies outside the lattice")]
    SiteOutOfLattice(Vec<usize>),

    #[error("spectral density is negative ({value:e}) at omega = {omega}: not a valid vacuum-bath kernel")]
    NegativeSpectralDensity { omega: f64, value: f64 },

    #[error("measure exhausted after {max_valid} recurrence steps (requested {requested} modes)")]
    RankDeficient { requested: usize, max_valid: usize },

    #[error("composite dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: u128, cap: usize },

    #[error("light-cone restriction l = {l}: composite dimension {dim} exceeds the cap {cap}")]
    LightconeCap { l: usize, dim: u128, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("step size fell below {min_step:e} at t = {t}: problem too stiff")]
    Stiffness { t: f64, min_step: f64 },

    #[error("Fock cutoff too small: top-level population {population:e} exceeds {threshold:e}")]
    CutoffLeakage { population: f64, threshold: f64 },

    #[error("no solution: target {target} is not below the saturation value {saturation}")]
    NoSolution { target: f64, saturation: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("postcondition violated: {0}")]
    Postcondition(String),

    #[error("block {block} left entangled (purity {purity}); the product simulation does not apply")]
    BlockEntangled { block: String, purity: f64 },

    #[error("test function has a discontinuity at {0}, which is not among the breakpoints")]
    StrayDiscontinuity(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
