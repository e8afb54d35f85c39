//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes of the numeric core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error in {op}: {detail}")]
    Domain {
        /// Operation that rejected the input.
        op: &'static str,
        /// Human-readable description of the violated precondition.
        detail: String,
    },

    /// Adaptive integration exhausted its panel budget before reaching the
    /// requested tolerance.
    #[error(
        "quadrature did not converge after {panels} panels \
         (error estimate {error_estimate:.3e}, required {required:.3e})"
    )]
    QuadratureNonConvergence {
        /// Panels in play when the budget ran out.
        panels: usize,
        /// Total error estimate at that point.
        error_estimate: f64,
        /// Tolerance that had to be met.
        required: f64,
    },

    /// A truncated series carried more tail mass than the oracle allows.
    #[error(
        "series truncated at n_max={n_max} with tail mass {tail_mass:.3e} above {tolerance:.3e}"
    )]
    TruncationWarning {
        /// Truncation index of the series.
        n_max: usize,
        /// Geometric upper bound on the neglected probability mass.
        tail_mass: f64,
        /// Maximum tail mass the oracle tolerates.
        tolerance: f64,
    },

    /// The half-maximum search found no crossing inside the scan domain.
    #[error("information curve never crosses half-maximum in (0, {s_max}]")]
    NoCrossing {
        /// Upper end of the scanned separation range (length units).
        s_max: f64,
    },

    /// A tabulated profile failed structural validation or parsing.
    #[error("invalid tabulated profile: {0}")]
    Table(String),

    /// Reading a profile table from disk failed.
    #[error("table io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }
}
