use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-convex input: {0}")]
    NonConvex(String),

    #[error("degenerate domain: {0}")]
    Degenerate(String),

    #[error("point ({x}, {y}) is not strictly interior to the domain")]
    NotInterior { x: f64, y: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ellipticity violated at r = {r}: {detail}")]
    Ellipticity { r: f64, detail: String },

    #[error("lower-order coefficient must satisfy F(0) > 0, got F(0) = {0}")]
    SingularTermVanishes(f64),

    #[error("tail integral of exp(-G) b'/F does not converge (ratio {ratio:.3} over [{r}, {}])", 2.0 * r)]
    TailDivergence { r: f64, ratio: f64 },

    #[error("argument {value} is outside the table range; rebuild with r_max >= {required_r_max:e}")]
    OutOfRange { value: f64, required_r_max: f64 },

    #[error("value {value} outside admissible range ({lo}, {hi})")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("boundary value eps = {eps} too large: must stay below {limit}")]
    EpsilonTooLarge { eps: f64, limit: f64 },

    #[error("no convergence{}: {detail} after {iterations} iterations", stage.map(|s| format!(" in continuation stage {s}")).unwrap_or_default())]
    NonConvergence {
        stage: Option<usize>,
        iterations: usize,
        detail: String,
        iterate: Option<Vec<f64>>,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonConvex(_) => "non-convex",
            Error::Degenerate(_) => "degenerate",
            Error::NotInterior { .. } => "not-interior",
            Error::Domain(_) => "domain",
            Error::Ellipticity { .. } => "ellipticity",
            Error::SingularTermVanishes(_) => "singular-term",
            Error::TailDivergence { .. } => "tail-divergence",
            Error::OutOfRange { .. } => "out-of-range",
            Error::Range { .. } => "range",
            Error::EpsilonTooLarge { .. } => "eps-too-large",
            Error::NonConvergence { .. } => "nonconvergence",
            Error::LinearSolve(_) => "linear-solve",
            Error::Mesh(_) => "mesh",
            Error::Sampling(_) => "sampling",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
