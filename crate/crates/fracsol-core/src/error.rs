//! Error type shared across the crate.

use alloc::string::String;

/// Errors reported by simulator operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter failed validation. The message names the parameter and the
    /// violated constraint.
    InvalidParameter(String),
    /// Two arguments have inconsistent shapes (lengths, dimensions).
    ShapeMismatch(String),
    /// An iterative routine failed to converge within its budget.
    NoConvergence(String),
    /// The requested operation needs a spontaneously broken vacuum
    /// (`m0_sq < 0`, `lam > 0`) but the model is in the symmetric phase.
    SymmetricPhase(String),
    /// Wigner sampling hit a dynamically unstable mode that was not frozen.
    UnstableMode {
        /// Index of the offending mode in the ascending spectrum.
        mode: usize,
        /// Its squared frequency.
        omega_sq: f64,
    },
    /// A trajectory aborted; the ensemble reports the lowest failing index.
    TrajectoryFailed {
        /// Trajectory index within the ensemble.
        index: u64,
        /// Description of the failure.
        message: String,
    },
    /// The ion-trap parameters produce a non-physical lattice coupling.
    IonMapping(String),
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            Error::ShapeMismatch(m) => write!(f, "shape mismatch: {m}"),
            Error::NoConvergence(m) => write!(f, "no convergence: {m}"),
            Error::SymmetricPhase(m) => write!(f, "symmetric phase: {m}"),
            Error::UnstableMode { mode, omega_sq } => write!(
                f,
                "mode {mode} is dynamically unstable (omega_sq = {omega_sq:e}) and not frozen"
            ),
            Error::TrajectoryFailed { index, message } => {
                write!(f, "trajectory {index} failed: {message}")
            }
            Error::IonMapping(m) => write!(f, "ion mapping: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
