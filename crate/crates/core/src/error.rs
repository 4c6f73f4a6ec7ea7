use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero quaternion has no inverse")]
    ZeroQuaternion,

    #[error("automorphism quaternion is not unit norm (|u| = {norm})")]
    NonUnitQuaternion { norm: f64 },

    #[error("eigenvalue quaternion has nonzero scalar part {scalar}")]
    NotPureImaginary { scalar: f64 },

    #[error("energy {energy} lies within the excluded neighbourhood of the threshold {threshold}")]
    DegenerateEnergy { energy: f64, threshold: f64 },

    #[error("energy {energy} is above the well top {top}; the continuum is not quantized")]
    UnsupportedRegime { energy: f64, top: f64 },

    #[error("radius {r} outside the region [{lo}, {hi}]")]
    OutOfRange { r: f64, lo: f64, hi: f64 },

    #[error("energy {energy} is not a bound-state root (residual {residual:e})")]
    NotARoot { energy: f64, residual: f64 },

    #[error("quantization function has a pole at x = {x}")]
    PoleOfF { x: f64 },

    #[error("below-threshold window is empty (kappa_q = 0)")]
    EmptyWindow,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
