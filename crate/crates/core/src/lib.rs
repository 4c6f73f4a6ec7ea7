//! Bound states of a particle in a quaternionic spherical square well.
//!
//! The well is `0` inside `r < a` and `i V1 + j V2 + k V3` outside. Units
//! are fixed by `hbar^2 / 2m = 1`, so `epsilon = sqrt(E)` and the
//! dimensionless well strengths are `kappa_c = a sqrt(V1)` and
//! `kappa_q = a (V2^2 + V3^2)^(1/4)`.
//!
//! * [`quaternion`]: Hamilton algebra and the `c1 + j c2` complex-pair view.
//! * [`spectral`]: reduction of an imaginary quaternionic eigenvalue to `i E`.
//! * [`radial`]: exterior exponents, symplectic factors, wavefunctions.
//! * [`quantization`]: the real quantization function, root isolation and
//!   comparison spectra.

pub mod error;
pub mod quantization;
pub mod quaternion;
pub mod radial;
pub mod spectral;

pub use error::{Error, Result};
pub use quantization::{BoundState, BoundStateSet, QuantizationProblem};
pub use quaternion::{Complex, Quaternion};
pub use radial::{CharacteristicData, PotentialSpec, RadialState, Regime};
pub use spectral::{CanonicalForm, ImaginaryEigenvalue};
