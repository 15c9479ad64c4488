use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite input `{0}`")]
    NonFinite(&'static str),

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("no sign change of the intensity equation on the bracketing grid (input intensity {input_intensity})")]
    NoBracket { input_intensity: f64 },

    #[error("degenerate steady state: the single-atom generator has a {dim}-dimensional kernel")]
    DegenerateSteadyState { dim: usize },

    #[error("steady-state residual {residual:e} exceeds tolerance")]
    SteadyStateResidual { residual: f64 },

    #[error("operating point is unstable (max Re eig = {max_real:e})")]
    Unstable { max_real: f64 },

    #[error("singular linear system in {context} (condition estimate {condition:e})")]
    Singular { context: &'static str, condition: f64 },

    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("optimizer did not converge after {iterations} iterations (spread {spread:e})")]
    NoConvergence { iterations: usize, spread: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite<T: num_traits::Float>(name: &'static str, x: T) -> Result<T> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(name))
    }
}
