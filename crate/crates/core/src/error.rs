//! Error taxonomy shared by all numeric routines.
//!
//! Routines that can fail return [`Result`]; everything else is total on its
//! documented domain. The variants are grouped by what the caller can do
//! about them: fix the inputs ([`Error::InvalidParameter`]), move the
//! evaluation point ([`Error::Domain`], [`Error::Degenerate`]), reduce the
//! problem size ([`Error::Conditioning`], [`Error::Singular`]), or retry with
//! different iteration controls ([`Error::Convergence`]).

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the numeric routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A constructor or routine was handed structurally invalid input
    /// (wrong sizes, non-positive off-diagonals, empty data, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The evaluation point lies outside the mathematical domain of the
    /// formula (e.g. |x0| <= 1 where a hyperbolic rate is required).
    #[error("domain error: {0}")]
    Domain(String),

    /// The inputs are so close to a removable singularity that the result
    /// would be dominated by cancellation (e.g. x == y in a divided
    /// difference).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A linear solve lost too much precision to be trusted.
    #[error("ill-conditioned: {0}")]
    Conditioning(String),

    /// A linear solve hit a (numerically) singular pivot or failed its
    /// residual check.
    #[error("singular solve: {0}")]
    Singular(String),

    /// An iterative process did not reach its tolerance.
    #[error("convergence failure at index {index}: {message}")]
    Convergence { index: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

/// Free-function form of [`Error::invalid`] for terser call sites.
pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::invalid(msg)
}

/// Free-function form of [`Error::domain`] for terser call sites.
pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::domain(msg)
}
