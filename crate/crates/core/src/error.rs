//! Error types for every numerical module.

use thiserror::Error;

/// Grid construction and grid-function I/O failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    /// `L ≤ 0` or `N` not a power of two ≥ 8.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    /// Sample array length differs from the grid size.
    #[error("expected {expected} samples, found {found}")]
    LengthMismatch {
        /// Grid size.
        expected: usize,
        /// Supplied length.
        found: usize,
    },
    /// NaN or infinite sample.
    #[error("non-finite sample value")]
    NonFinite,
    /// Malformed JSON or CSV.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Symbolic hierarchy failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HierarchyError {
    /// The right-hand side of the `r`-equation is not a total derivative.
    #[error("right-hand side at step {step} is not a total derivative")]
    NonIntegrableRhs {
        /// Index of the `r` being computed.
        step: usize,
    },
    /// Requested index beyond the configured cap.
    #[error("index {k} exceeds the cap {cap}")]
    IndexTooLarge {
        /// Requested index.
        k: usize,
        /// Cap.
        cap: usize,
    },
    /// Calibration ratio is not one rational constant.
    #[error("calibration for k = {k} is not a single rational constant")]
    Calibration {
        /// Hamiltonian index.
        k: usize,
    },
    /// Index below the minimum for the requested homogeneity, or too large.
    #[error("index {j} out of range for this term: {reason}")]
    Domain {
        /// Requested index.
        j: i64,
        /// Explanation.
        reason: &'static str,
    },
    /// Complex data where real data is required.
    #[error("real-valued data required")]
    ComplexInput,
}

/// Scattering failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatteringError {
    /// Solution magnitude above the configured guard.
    #[error("overflow guard tripped: |solution| = {magnitude:e} exceeds {bound:e}")]
    OverflowGuard {
        /// Observed magnitude.
        magnitude: f64,
        /// Configured bound.
        bound: f64,
    },
    /// The ε-fit of homogeneous components did not close.
    #[error("homogeneous-component fit residual {residual:e} exceeds {tolerance:e}")]
    IllConditionedFit {
        /// Observed residual.
        residual: f64,
        /// Tolerance.
        tolerance: f64,
    },
    /// `|T⁻¹|` too small on the argument-principle contour.
    #[error("|T⁻¹| = {value:e} on the contour near z = {at}")]
    ContourZero {
        /// Observed modulus.
        value: f64,
        /// Location.
        at: String,
    },
    /// Newton refinement of a zero failed.
    #[error("Newton iteration for a zero near {start} did not converge")]
    NonConvergedNewton {
        /// Starting point.
        start: String,
    },
    /// Invalid argument such as a non-positive τ.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Energy and momentum failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    /// A zero of `T⁻¹` sits on the integration ray.
    #[error("pole of T on the integration ray at τ ≈ {tau}")]
    PoleOnRay {
        /// Location on the ray.
        tau: f64,
    },
    /// The requested `s` needs expansion coefficients that are not available.
    #[error("s = {s} outside the supported range {range}")]
    UnsupportedRange {
        /// Requested order.
        s: f64,
        /// Supported interval.
        range: &'static str,
    },
    /// Quadrature error estimate above tolerance.
    #[error("quadrature did not converge: estimate {estimate:e} > tolerance {tolerance:e}")]
    QuadratureNotConverged {
        /// Error estimate.
        estimate: f64,
        /// Tolerance.
        tolerance: f64,
    },
    /// `Ξ_s` evaluated at an invalid point.
    #[error("Ξ_s undefined at {0}")]
    BranchCut(String),
    /// Scattering failure underneath.
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    /// Hierarchy failure underneath.
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

/// Time-stepping failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolveError {
    /// `sup |u|` exceeded the blow-up bound.
    #[error("blow-up detected at t = {t}: sup|u| = {sup:e}")]
    BlowupDetected {
        /// Time of detection.
        t: f64,
        /// Observed sup norm.
        sup: f64,
    },
    /// Invalid configuration.
    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),
}
