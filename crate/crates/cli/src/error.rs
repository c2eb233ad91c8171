use std::path::PathBuf;

use thiserror::Error;
use wgheat_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    /// Validation found fatal problems; the report has already been printed.
    #[error("configuration has fatal validation errors")]
    Rejected(Vec<String>),
}

impl CliError {
    /// 1 for anything wrong with the input, 2 when the numerics fail.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                CoreError::Domain(_)
                | CoreError::InvalidConfig(_)
                | CoreError::UnknownField(_)
                | CoreError::UnknownObservable(_)
                | CoreError::UnknownPreset(_)
                | CoreError::InvalidSweep(_) => 1,
                CoreError::InvalidState(_)
                | CoreError::MultipleSteadyStates { .. }
                | CoreError::Residual { .. }
                | CoreError::NotConverged { .. }
                | CoreError::NoDissipation
                | CoreError::Eigen
                | CoreError::UndefinedDerivative { .. }
                | CoreError::RouteMismatch { .. }
                | CoreError::EngineInconsistent { .. }
                | CoreError::AllPointsFailed { .. } => 2,
            },
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Usage(_) | CliError::Rejected(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e {
                CoreError::Domain(_) => "domain",
                CoreError::InvalidConfig(_) => "invalid_config",
                CoreError::InvalidState(_) => "invalid_state",
                CoreError::MultipleSteadyStates { .. } => "multiple_steady_states",
                CoreError::Residual { .. } => "residual",
                CoreError::NotConverged { .. } => "not_converged",
                CoreError::NoDissipation => "no_dissipation",
                CoreError::Eigen => "eigen",
                CoreError::UndefinedDerivative { .. } => "undefined_derivative",
                CoreError::RouteMismatch { .. } => "route_mismatch",
                CoreError::EngineInconsistent { .. } => "engine_inconsistent",
                CoreError::UnknownField(_) => "unknown_field",
                CoreError::UnknownObservable(_) => "unknown_observable",
                CoreError::UnknownPreset(_) => "unknown_preset",
                CoreError::InvalidSweep(_) => "invalid_sweep",
                CoreError::AllPointsFailed { .. } => "all_points_failed",
            },
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Usage(_) => "usage",
            CliError::Rejected(_) => "invalid_config",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
            }
        });
        if let CliError::Core(CoreError::InvalidConfig(problems)) | CliError::Rejected(problems) = self {
            v["error"]["problems"] = serde_json::json!(problems);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_problems_exit_one_and_numerics_exit_two() {
        assert_eq!(CliError::from(CoreError::UnknownPreset("x".into())).exit_code(), 1);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::from(CoreError::NoDissipation).exit_code(), 2);
        let e = CliError::from(CoreError::Residual { residual: 1.0, bound: 0.5 });
        assert_eq!(e.exit_code(), 2);
        assert_eq!(e.to_json()["error"]["kind"], "residual");
    }

    #[test]
    fn json_error_lists_config_problems() {
        let e = CliError::from(CoreError::InvalidConfig(vec!["a".into(), "b".into()]));
        assert_eq!(e.to_json()["error"]["problems"], serde_json::json!(["a", "b"]));
    }
}
