//! Direct state tomography via weak-value pointer readout, simulated end to end.
//!
//! The crate models a qudit coupled to a qubit pointer through a finite-strength
//! interaction, reads weak values back out of coupling-deformed pointer
//! observables, and turns those into three tomography estimators (full
//! density-matrix rows, single-observable pure-state readout, and a two-step
//! hybrid of both) plus conventional mutually-unbiased-bases baselines. A
//! Monte Carlo harness reproduces the efficiency comparisons between them as
//! CSV/JSON sweep data.
//!
//! Start with the runnable examples, one per capability:
//!
//! * `weak_values` — exact weak values from deformed pointer observables, and
//!   the identities they satisfy.
//! * `original_dst` — row-by-row density-matrix reconstruction.
//! * `revised_dst` — pure-state readout from a single system observable.
//! * `hybrid_dst` — the two-step pipeline with inverse-error weighting.
//! * `calibrate_table` — building and persisting estimator error tables.
//! * `fig1_sweep`, `fig2_sweep`, `fig3_dims` — the harness experiments behind
//!   the shipped sweep configurations.
//! * `mub_baseline` — simulated vs analytic baseline efficiency.
//!
//! The one binary, `dst-sim`, exposes the same experiments behind a flag-based
//! command line; see the crate README.

pub mod bases;
pub mod baselines;
pub mod cli;
pub mod coupling;
pub mod dst;
pub mod harness;
pub mod metrics;
pub mod qmath;
pub mod sampler;

/// Numeric tolerances shared across the crate.
///
/// Double precision with dimensions up to a few dozen keeps roundoff orders of
/// magnitude below these; they are validation thresholds, not error budgets.
pub mod tol {
    /// Hermiticity / unit-trace / unit-norm validation.
    pub const VALIDATE: f64 = 1e-12;
    /// Slack on density-matrix positive semidefiniteness.
    pub const PSD_SLACK: f64 = 1e-10;
    /// Orthonormality of constructed bases.
    pub const BASIS: f64 = 1e-10;
    /// Postselection probabilities below this leave the pointer undefined.
    pub const POSTSELECT_CUTOFF: f64 = 1e-14;
    /// Probe overlaps below this make the pure-state readout ill-posed.
    pub const PROBE_OVERLAP: f64 = 1e-10;
    /// Denominators below this are skipped in the pure-state collapse sum.
    pub const COLLAPSE_SKIP: f64 = 1e-8;
    /// Overlaps below this disable phase alignment in the hybrid combination.
    pub const PHASE_ALIGN: f64 = 1e-6;
}

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix not Hermitian: max |m - m^dag| entry {0:.3e}")]
    NotHermitian(f64),
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },
    #[error("coupling strength {0} outside (0, pi)")]
    InvalidCoupling(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("complete MUB set needs a prime dimension, got {0}")]
    NonPrimeDimension(usize),
    #[error("copy budget {budget} too small, need at least {min}")]
    BudgetTooSmall { budget: usize, min: usize },
    #[error("invalid probe: |<psi_{index}|a>| = {overlap:.3e} is below threshold")]
    InvalidProbe { index: usize, overlap: f64 },
    #[error("estimation failure: {0}")]
    EstimationFailure(String),
    #[error("missing calibration entry: {0}")]
    MissingCalibration(String),
    #[error("missing calibration file: {0}")]
    MissingCalibrationFile(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
