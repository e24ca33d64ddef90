//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Caller-supplied data violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The quintic bracketing sweep found no sign change below 2^40,
    /// which signals a degenerate mass triple.
    #[error("no sign change while bracketing the quintic on [0, 2^40]")]
    QuinticBracket,

    /// The adaptive integrator could not advance: the accepted step size
    /// collapsed below machine resolution at the reported time.
    #[error("integration step underflow at t = {achieved_t:.6e}")]
    StepUnderflow { achieved_t: f64 },

    /// The Galerkin index pair failed to stabilize before the truncation cap.
    /// Carries the last two (index, nullity) readings for diagnosis.
    #[error(
        "index not converged by N = {n_cap}: (i, nu) = ({i_prev}, {nu_prev}) at N = {n_prev}, \
         ({i_last}, {nu_last}) at N = {n_last}"
    )]
    Unconverged {
        n_cap: usize,
        n_prev: usize,
        i_prev: i64,
        nu_prev: usize,
        n_last: usize,
        i_last: i64,
        nu_last: usize,
    },

    /// A degeneracy scan at one eccentricity kept changing its root set
    /// when the truncation was doubled.
    #[error("slice at e = {e:.6} did not confirm its roots: {detail}")]
    SliceUnconfirmed { e: f64, detail: String },

    /// Spectral data sits too close to a decision boundary to commit to a
    /// normal form or an eigenvalue ordering.
    #[error("ambiguous classification: {0}")]
    Ambiguous(String),

    /// A computed classification disagrees with the region prediction.
    #[error("classification conflict: {0}")]
    Conflict(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to.
    #[must_use]
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::QuinticBracket => 2,
            Error::StepUnderflow { .. }
            | Error::Unconverged { .. }
            | Error::SliceUnconfirmed { .. } => 3,
            Error::Ambiguous(_) | Error::Conflict(_) => 4,
        }
    }
}
