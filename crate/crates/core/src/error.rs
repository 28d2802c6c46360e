use thiserror::Error;

/// Errors raised by the cone dynamics library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConeError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unbounded motion: {0}")]
    Unbounded(String),

    #[error("classically forbidden level: E = {energy} lies below the effective-potential minimum {minimum}")]
    Forbidden { energy: f64, minimum: f64 },

    /// Circular orbits have no apsidal angle or radial quadrature; use the
    /// small-oscillation limit instead.
    #[error("degenerate (circular) orbit: {0}")]
    Degenerate(String),

    #[error("tip collision at step {step}: r would become {r:.3e}; reduce dt")]
    TipCollision { step: usize, r: f64 },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("effective potential has {count} local minima; a unique minimum is required")]
    NonUniqueMinimum { count: usize },

    #[error("irrational s: only local C available (no rational form k/n was supplied)")]
    IrrationalScale,

    #[error("quadrature did not converge after {refinements} refinements (last relative change {change:.3e})")]
    QuadratureNotConverged { refinements: usize, change: f64 },

    #[error("root finder failed: {0}")]
    RootNotFound(String),
}

pub type Result<T> = std::result::Result<T, ConeError>;
