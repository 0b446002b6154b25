use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {0} out of range")]
    IndexOutOfRange(i32),

    #[error("external field must be along the z axis with positive strength, got ({0}, {1}, {2})")]
    NonCanonicalField(f64, f64, f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: estimated error {error:.3e} above tolerance {tolerance:.3e} after {evaluations} evaluations")]
    QuadratureNonConvergence {
        error: f64,
        tolerance: f64,
        evaluations: usize,
    },

    #[error("principal value did not stabilize: last change {change:.3e}, tolerance {tolerance:.3e}")]
    PrincipalValueFailure { change: f64, tolerance: f64 },

    #[error("extrapolation residual {residual:.3e} above tolerance {tolerance:.3e}")]
    ExtrapolationResidual { residual: f64, tolerance: f64 },

    #[error("relaxation coefficient Re d1 = {0:.6e} is negative")]
    NegativeRate(f64),

    #[error("generator is not diagonalizable (eigenvector condition {0:.3e})")]
    Defective(f64),

    #[error("bath tail mass {tail:.3e} beyond omega_max exceeds tolerance {tolerance:.3e}")]
    TailMass { tail: f64, tolerance: f64 },

    #[error("window {window} too long for frequency spacing {spacing} (recurrence at {recurrence:.4})")]
    RecurrenceGuard {
        window: f64,
        spacing: f64,
        recurrence: f64,
    },

    #[error("Hilbert space dimension {dimension} exceeds budget {budget}")]
    DimensionBudget { dimension: usize, budget: usize },

    #[error("Krylov propagation did not converge: residual {residual:.3e}")]
    KrylovNonConvergence { residual: f64 },

    #[error("expected a unit vector, norm is {0}")]
    NotNormalized(f64),

    #[error("imaginary part {0:.3e} of an expectation value exceeds 1e-10")]
    ComplexExpectation(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
