use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error(
        "steady state is not unique: smallest singular values {smallest:.3e} and {second:.3e}"
    )]
    MultipleSteadyStates { smallest: f64, second: f64 },

    #[error("steady-state residual {residual:.3e} exceeds bound {bound:.3e}")]
    Residual { residual: f64, bound: f64 },

    #[error("integration did not converge: {reason} (|drho/dt| = {derivative_norm:.3e})")]
    NotConverged { reason: String, derivative_norm: f64 },

    #[error("generator has no dissipation (all eigenvalues have zero real part)")]
    NoDissipation,

    #[error("eigenvalue decomposition failed")]
    Eigen,

    #[error("derivative undefined: laser flow change {delta:.3e} too small")]
    UndefinedDerivative { delta: f64 },

    #[error("current routes disagree for {quantity}: {trace:.17e} vs {closed:.17e}")]
    RouteMismatch {
        quantity: &'static str,
        trace: f64,
        closed: f64,
    },

    #[error("engine metrics inconsistent: positive power {power:.3e} with no heat drawn")]
    EngineInconsistent { power: f64 },

    #[error("unknown field '{0}'")]
    UnknownField(String),

    #[error("unknown observable '{0}'")]
    UnknownObservable(String),

    #[error("unknown figure preset '{0}' (expected fig2, fig3, fig4 or fig5)")]
    UnknownPreset(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("all {points} sweep points failed; first failure: {first}")]
    AllPointsFailed { points: usize, first: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;
