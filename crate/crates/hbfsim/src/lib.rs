//! Link-level Monte Carlo simulator for multi-cell millimeter-wave MIMO
//! downlinks with hybrid analog/digital beamforming.
//!
//! The crate models a three-sector site serving multiple users per sector
//! over clustered wideband-averaged channels, designs transmit and receive
//! weights under four schemes (eigenmode baseline, leakage-steered analog
//! selection, leakage-regularized digital precoding, and a matched-reverse
//! precoder that needs no inter-user coordination), and reports per-user
//! spectral efficiency together with signal and interference power splits.
//!
//! Module map:
//! - [`linalg`]: dense complex matrices and the decompositions every other
//!   module leans on (SVD, Hermitian and generalized eigensolvers, Cholesky).
//! - [`geometry`]: uniform rectangular arrays, sector layout, user drops.
//! - [`channel`]: clustered channel realizations, path loss, line-of-sight.
//! - [`beamforming`]: codebooks, analog selection, digital precoder schemes.
//! - [`metrics`]: link budget, interference covariance, spectral efficiency.
//! - [`harness`]: campaign configuration and the Monte Carlo runner.
//! - [`report`]: CDF tables and file emission.

pub mod beamforming;
pub mod channel;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod report;
pub mod seed;

use thiserror::Error;

/// Crate-wide error type. Variants group into configuration problems,
/// numeric failures, and i/o failures so the CLI can map them to distinct
/// process exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration detected before any computation starts.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the model's physical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A dense linear-algebra kernel failed.
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),

    /// The transmit-baseband fixed point stopped without meeting its
    /// tolerance. Carries the power-scalar iterates for diagnosis.
    #[error("leakage-regularized precoder fixed point did not converge after {iterations} iterations (eta iterates: {eta_iterates:?})")]
    FixedPointDiverged {
        iterations: usize,
        eta_iterates: Vec<f64>,
    },

    /// Reading or writing campaign artifacts failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Report serialization failed.
    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration and domain
    /// errors, 3 for i/o, 4 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) => 2,
            Error::Io(_) | Error::Serialize(_) => 3,
            Error::Linalg(_) | Error::FixedPointDiverged { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
