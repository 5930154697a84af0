use thiserror::Error;

/// Errors produced by tunnelkit operations.
///
/// The split mirrors how callers are expected to react: `Domain` means the
/// request itself was malformed (bad parameter, wrong regime), while the other
/// variants are runtime guards tripped by an otherwise valid request.
#[derive(Debug, Error)]
pub enum TunnelError {
    /// A physical parameter violates a precondition (non-positive energy,
    /// index below one, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A simulation guard was violated; `guard` names which one.
    #[error("{guard} guard violated: {detail}")]
    Guard {
        guard: &'static str,
        detail: String,
    },

    /// Transmission is below numerical resolution; the phase (and any arrival
    /// time built on it) is untrackable.
    #[error("opaque barrier: {0}")]
    OpaqueBarrier(String),

    /// A numerical procedure broke down (zero pivot, degenerate fit, ...).
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, TunnelError>;
