//! Monte Carlo and limit-law toolkit for the zeros of repeated derivatives of
//! random polynomials.
//!
//! The crate has two halves that are meant to be compared against each other:
//!
//! * an empirical pipeline — build deterministic coefficient sequences for an
//!   ensemble ([`ensembles`]), differentiate and rescale them in log space
//!   ([`calculus`]), draw random coefficient signs and find all complex zeros
//!   ([`rootfind`]), and summarize the zeros as radial/angular statistics
//!   ([`measures`]);
//! * a theoretical pipeline — evaluate the limiting radial distributions,
//!   either from closed forms or by a numerical Legendre–Fenchel transform of
//!   the coefficient profile ([`limits`]).
//!
//! [`experiments`] drives both halves from a seeded, reproducible
//! configuration and persists CSV/JSON reports; the `dzeros` binary exposes it
//! on the command line.

use std::path::PathBuf;

pub mod calculus;
pub mod companion;
pub mod ensembles;
pub mod experiments;
pub mod limits;
pub mod measures;
pub mod rootfind;
pub mod special;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degree mismatch: expected {expected}, got {actual}")]
    DegreeMismatch { expected: usize, actual: usize },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("polynomial of degree zero has no roots")]
    DegreeZero,

    #[error("root finding did not converge: {failed} of {total} roots flagged")]
    NonConvergence {
        failed: usize,
        total: usize,
        /// `true` for roots that met the convergence criterion.
        converged: Vec<bool>,
    },

    #[error("eigenvalue iteration failed: {0}")]
    Numeric(String),

    #[error("empty root set")]
    EmptyRootSet,

    #[error("profile has empty finite support")]
    EmptySupport,

    #[error("nothing to write: report contains no successful trial")]
    EmptyReport,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
