use thiserror::Error;

/// Errors raised by the simulation and analysis kernels.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type the
/// failing computation ran in.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("zero distance between antenna {antenna} and user {user} with no distance guard")]
    SingularDistance { antenna: usize, user: usize },

    #[error("ill-conditioned Gram matrix (condition {condition:e}){}", trial_suffix(*.trial))]
    IllConditioned { condition: f64, trial: Option<u64> },

    #[error("{rejected} of {total} small-scale trials rejected as ill-conditioned")]
    ConditioningAlarm { rejected: u64, total: u64 },

    #[error("degenerate Gamma fit for user {user}: shape {shape} must exceed 1")]
    DegenerateGammaFit { user: usize, shape: f64 },

    #[error("user {0} has no retained antennas")]
    EmptyRetainedSet(usize),

    #[error("index {index} out of range for {what} (size {size})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("argument outside domain of {what}: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("quadrature did not converge: partial {partial:e}, error estimate {error:e}")]
    Quadrature { partial: f64, error: f64 },

    #[error("{0}")]
    Format(String),
}

fn trial_suffix(trial: Option<u64>) -> String {
    match trial {
        Some(t) => format!(" in trial {t}"),
        None => String::new(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ill_conditioned_names_trial() {
        let e = Error::IllConditioned {
            condition: 1e13,
            trial: Some(42),
        };
        assert!(e.to_string().ends_with("in trial 42"));
        let e = Error::IllConditioned {
            condition: 1e13,
            trial: None,
        };
        assert!(!e.to_string().contains("trial"));
    }
}
