//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter violates its domain (negative energy, delta outside
    /// [0, 1], inconsistent quasispin, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Two objects that must refer to the same model instance do not.
    #[error("inconsistent inputs: {0}")]
    Mismatch(String),

    /// The requested operation is only defined in a restricted regime
    /// (e.g. the single-M construction requires delta = 0).
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// The operation needs the fully symmetric subspace j = N/2.
    #[error("unsupported subspace: {0}")]
    UnsupportedSubspace(String),

    /// An input value lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed or missed its accuracy target.
    #[error("numerical failure: {message} (residual {residual:.3e})")]
    Numerical { message: String, residual: f64 },

    /// The Fock-truncation growth loop hit its ceiling before convergence.
    #[error(
        "truncation failure: n_max ceiling {n_max} reached, last energy shift {last_shift:.3e}"
    )]
    TruncationFailure { n_max: u32, last_shift: f64 },

    /// A reference basis does not capture enough of the analyzed state.
    #[error("coverage error: captured overlap {captured} below threshold")]
    Coverage { captured: f64 },

    /// A convergence error tagged with the parameter point that produced it.
    #[error("at lambda = {lambda}: {source}")]
    AtLambda {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },
}
