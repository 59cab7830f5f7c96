use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("alpha = {alpha} <= 1/2: translating solitons are entire graphs, no slab-bound translator exists")]
    EntireGraphRegime { alpha: f64 },

    #[error("integral diverges: endpoint exponent {exponent} <= -1")]
    Divergence { exponent: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (last estimate {estimate}, error {error:e})")]
    QuadratureStalled { estimate: f64, error: f64, tol: f64 },

    #[error("positivity lost at t = {t} after {halvings} step halvings")]
    PositivityLoss { t: f64, halvings: u32 },

    #[error("invalid initial data: {0}")]
    InvalidRecipe(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("reconstruction inconsistency: {0}")]
    Reconstruction(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("malformed trace: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
