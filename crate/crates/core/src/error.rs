use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// The variants are grouped so that callers can map them onto coarse
/// failure classes, see [`Error::class`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {point:?} lies outside the chart domain (radius {radius})")]
    OutsideDomain { point: Vec<f64>, radius: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(
        "stencil needs {needed} grid nodes of margin along axis {axis}, only {available} available"
    )]
    StencilMargin {
        axis: usize,
        needed: usize,
        available: usize,
    },

    #[error("rank decision unstable: gap ratio {ratio:.3e} below {required}")]
    RankUnstable { ratio: f64, required: f64 },

    #[error("ill-conditioned subspace intersection, singular values near threshold: {singular_values:?}")]
    IllConditioned { singular_values: Vec<f64> },

    #[error("integrator step {step:e} underflows for segment of length {length:e}")]
    StepUnderflow { step: f64, length: f64 },

    #[error("scalar field too small for rescaling: f = {value:e} at {point:?} (threshold {threshold:e})")]
    RescalingDegenerate {
        point: Vec<f64>,
        value: f64,
        threshold: f64,
    },
}

/// Coarse classification used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: arguments, domains, configuration.
    Input,
    /// An algebraic or geometric identity failed to hold.
    Invariant,
    /// A numerical decision could not be made reliably.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidArgument(_)
            | Error::OutsideDomain { .. }
            | Error::StencilMargin { .. } => ErrorClass::Input,
            Error::Invariant(_) => ErrorClass::Invariant,
            Error::RankUnstable { .. }
            | Error::IllConditioned { .. }
            | Error::StepUnderflow { .. }
            | Error::RescalingDegenerate { .. } => ErrorClass::Numerical,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
