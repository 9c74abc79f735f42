use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A configuration value failed validation. `key` names the offending field.
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("failed to parse config: {0}")]
    ConfigParse(String),

    /// The Liouvillian has more than one stationary state.
    #[error("steady state is not unique (null space dimension {})", .null_dim.map_or_else(|| "unknown".to_string(), |d| d.to_string()))]
    DegenerateSteadyState { null_dim: Option<usize> },

    #[error("steady-state solve did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("density matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace drifted by {drift:e} during integration; use a smaller dt")]
    TraceDrift { drift: f64 },

    #[error("no truncation in {levels:?} converged; retry with larger n_max")]
    NotConverged { levels: Vec<usize> },

    #[error("unknown observable `{0}` (expected one of mean_n, g2, g3, purity)")]
    UnknownObservable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
