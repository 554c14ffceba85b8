use thiserror::Error;

/// Errors produced by the physics engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown species `{name}`; available: {}", available.join(", "))]
    UnknownSpecies {
        name: String,
        available: Vec<&'static str>,
    },

    #[error("magnetic field gradient is zero; position selection is undefined")]
    ZeroGradient,

    #[error(
        "no sign change of the detuning on [{lo:e}, {hi:e}] m; target frequency is out of range"
    )]
    NoBracket { lo: f64, hi: f64 },

    #[error("root finder stalled after {iterations} iterations (last bracket width {width:e} m)")]
    RootNotConverged { iterations: usize, width: f64 },

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("operation requires the {expected} hyperfine level")]
    LevelMismatch { expected: &'static str },

    #[error("phase-space bands do not intersect")]
    EmptyIntersection,

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
