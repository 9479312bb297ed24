use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature extent {extent} too small: estimated tail {tail:.3e} exceeds {tol:.1e}")]
    ExtentTooSmall { extent: f64, tail: f64, tol: f64 },

    #[error("no decay envelope supplied; amalgam tail cannot be certified")]
    EnvelopeMissing,

    #[error("envelope tail did not converge after {terms} terms")]
    TailNotCertified { terms: usize },

    #[error("lattice radius {rho} below required {required:.4} for dimension {dim}")]
    RadiusTooSmall { rho: f64, required: f64, dim: usize },

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("planar integrand still increasing at outer radius {r_out}")]
    Divergence { r_out: f64 },

    #[error("integrand at rim r={r_out} is {ratio:.3e} of its peak")]
    RimNotNegligible { r_out: f64, ratio: f64 },

    #[error("a = {a} outside the supported regime {regime}")]
    OutOfRegime { a: f64, regime: &'static str },

    #[error("no integer zero count in ({lo:.6}, {hi:.6})")]
    NoIntegerInRange { lo: f64, hi: f64 },

    #[error("annulus area {got:.9} differs from target {want:.9}")]
    AreaMismatch { got: f64, want: f64 },

    #[error("zero set is not rotation symmetric (|sum 1/z| = {first:.3e}, |sum 1/z^2| = {second:.3e})")]
    AsymmetricZeroSet { first: f64, second: f64 },

    #[error("|z| = {modulus} outside the truncation regime |z| <= {limit}")]
    OutsideTruncation { modulus: f64, limit: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics themselves (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        !matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::OutOfRegime { .. }
                | Error::RadiusTooSmall { .. }
                | Error::OutsideTruncation { .. }
                | Error::AsymmetricZeroSet { .. }
        )
    }
}
