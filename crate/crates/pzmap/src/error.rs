use thiserror::Error;

/// Errors reported by the analysis routines.
///
/// Numerical cross-check failures (count mismatches, certificate
/// disagreements) are surfaced as errors rather than silently
/// reconciled, so callers can tell a degenerate parameter point from
/// a bug.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("fixed-point count mismatch: predicted {predicted} ({branch}), found {found}")]
    CountMismatch {
        predicted: usize,
        found: usize,
        branch: String,
    },
    #[error("stability certificate disagrees with eigenvalue moduli at u = {u}: {detail}")]
    CertificateMismatch { u: f64, detail: String },
    #[error("eigenvalues at u = {u} are real; not in the Neimark-Sacker regime")]
    NotNsApplicable { u: f64 },
    #[error("singular normal-form transformation at u = {u}: |2u + gamma - 1| < {tol}")]
    SingularTransformation { u: f64, tol: f64 },
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),
    #[error("no admissible control target: {0}")]
    NoTarget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
