//! Error types shared across the crate.

use thiserror::Error;

/// All failure modes of the library.
///
/// Variants split into three classes, reflected by [`Error::exit_code`]:
/// validation of user input (exit 2), numerical failures (exit 3) and the
/// point-spectrum gate of the scattering layer (exit 4).
#[derive(Debug, Error)]
pub enum Error {
    #[error("eigenvalues {i} and {j} coincide within tolerance (gap {gap:.3e})")]
    DuplicateEigenvalue { i: usize, j: usize, gap: f64 },

    #[error("coupling vanishes at indices {indices:?}; the oscillator block decouples; drop those indices (see ModelSpec::project_out) or fix the model")]
    ZeroCoupling { indices: Vec<usize> },

    #[error("metric weight at index {index} is not strictly positive ({value})")]
    InvalidMetric { index: usize, value: f64 },

    #[error("model data is inconsistent: {0}")]
    InvalidModel(String),

    #[error("initial data invalid: {0}")]
    InvalidData(String),

    #[error("z = {z} lies within {tol:.1e} of a pole or of the branch cut")]
    PoleAtZ { z: num_complex::Complex64, tol: f64 },

    #[error("chain eigenvalues degenerate (gap {gap:.3e}); the eigensolver failed")]
    DegenerateChain { gap: f64 },

    #[error("linear solve ill-conditioned (pivot ratio {ratio:.3e})")]
    IllConditioned { ratio: f64 },

    #[error("singular linear system")]
    SingularSystem,

    #[error("root finder did not converge after {iterations} iterations (best residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("polynomial root at {root} sits on the imaginary axis; the model is invalid (det L ~ 0) or the root finder failed")]
    ImaginaryAxisRoot { root: num_complex::Complex64 },

    #[error("eigenvalue scan incomplete: {0}")]
    ScanIncomplete(String),

    #[error("lift matrix M = VW is singular; the model violates the simple-spectrum/nonzero-coupling hypothesis")]
    SingularM,

    #[error("quadrature did not reach tolerance {tol:.1e} on [{lo}, {hi}]")]
    QuadratureFailure { lo: f64, hi: f64, tol: f64 },

    #[error("state became non-finite at t = {t}; for nonlinear potentials check the growth condition V(y) >= c1*|y|^2 - c2")]
    NonFiniteState { t: f64 },

    #[error("point spectrum is non-empty (eigenvalues {eigenvalues:?}); the scattering layer requires an empty point spectrum")]
    PointSpectrumPresent { eigenvalues: Vec<f64> },

    #[error("truncation mass {mass:.3e} exceeds {bound:.3e} at window half-width {x_max}; increase the window")]
    InsufficientDecay { mass: f64, bound: f64, x_max: f64 },

    #[error("root {root} has non-positive real part; the Lax-Phillips semigroup needs all roots in the right half-plane")]
    RootInLeftHalfPlane { root: num_complex::Complex64 },

    #[error("gram matrix is not positive definite")]
    GramNotPositiveDefinite,

    #[error("query out of range: {0}")]
    OutOfRange(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("potential expression error: {0}")]
    Potential(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-parsable tag, used on stderr as `error[Tag]: ...`.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::DuplicateEigenvalue { .. } => "DuplicateEigenvalue",
            Error::ZeroCoupling { .. } => "ZeroCoupling",
            Error::InvalidMetric { .. } => "InvalidMetric",
            Error::InvalidModel(_) => "InvalidModel",
            Error::InvalidData(_) => "InvalidData",
            Error::PoleAtZ { .. } => "PoleAtZ",
            Error::DegenerateChain { .. } => "DegenerateChain",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::SingularSystem => "SingularSystem",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::ImaginaryAxisRoot { .. } => "ImaginaryAxisRoot",
            Error::ScanIncomplete(_) => "ScanIncomplete",
            Error::SingularM => "SingularM",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::NonFiniteState { .. } => "NonFiniteState",
            Error::PointSpectrumPresent { .. } => "PointSpectrumPresent",
            Error::InsufficientDecay { .. } => "InsufficientDecay",
            Error::RootInLeftHalfPlane { .. } => "RootInLeftHalfPlane",
            Error::GramNotPositiveDefinite => "GramNotPositiveDefinite",
            Error::OutOfRange(_) => "OutOfRange",
            Error::Config(_) => "Config",
            Error::Potential(_) => "Potential",
            Error::Io(_) => "Io",
        }
    }

    /// Process exit code for the CLI: 2 validation, 3 numerical, 4 point spectrum.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DuplicateEigenvalue { .. }
            | Error::ZeroCoupling { .. }
            | Error::InvalidMetric { .. }
            | Error::InvalidModel(_)
            | Error::InvalidData(_)
            | Error::OutOfRange(_)
            | Error::Config(_)
            | Error::Potential(_)
            | Error::Io(_) => 2,
            Error::PointSpectrumPresent { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
