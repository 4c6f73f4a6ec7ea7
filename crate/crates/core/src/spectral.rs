//! Canonical representatives of imaginary quaternionic eigenvalues.
//!
//! Eigenvalues of an anti-self-adjoint quaternionic operator are pure
//! imaginary quaternions, defined only up to the automorphism
//! `conj(u) q u` with `|u| = 1`. Each such class contains the complex value
//! `i |q|`; [`canonicalize`] returns the energy `|q|` together with a unit
//! `u` that rotates `q` onto it.

use crate::error::{Error, Result};
use crate::quaternion::{Complex, Quaternion};

const UNIT_TOL: f64 = 1e-12;

/// Eigenvalue `lambda = -(i e1 + j e2 + k e3)` of the stationary equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImaginaryEigenvalue {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

impl ImaginaryEigenvalue {
    pub fn new(e1: f64, e2: f64, e3: f64) -> Self {
        Self { e1, e2, e3 }
    }

    /// The right factor `i e1 + j e2 + k e3`; the eigenvalue is its negative.
    pub fn energy_quaternion(&self) -> Quaternion {
        Quaternion::imaginary(self.e1, self.e2, self.e3)
    }

    pub fn lambda(&self) -> Quaternion {
        -self.energy_quaternion()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalForm {
    pub energy: f64,
    pub u: Quaternion,
}

/// `conj(u) * lambda * u`.
pub fn apply_automorphism(lambda: &Quaternion, u: &Quaternion) -> Result<Quaternion> {
    let norm = u.norm();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitQuaternion { norm });
    }
    if lambda.w != 0.0 {
        return Err(Error::NotPureImaginary { scalar: lambda.w });
    }
    Ok(u.conjugate() * *lambda * *u)
}

/// Finds `(E, u)` with `conj(u) (i e1 + j e2 + k e3) u = i E`, `E >= 0`.
///
/// The same `u` maps the eigenvalue `lambda = -(i e1 + j e2 + k e3)` to
/// `-i E`.
pub fn canonicalize(lambda: &ImaginaryEigenvalue) -> CanonicalForm {
    let (l1, l2, l3) = (lambda.e1, lambda.e2, lambda.e3);
    let transverse = l2 * l2 + l3 * l3;
    let energy = l1.hypot(l2.hypot(l3));
    if energy == 0.0 {
        return CanonicalForm { energy: 0.0, u: Quaternion::ONE };
    }

    // l1 + |l| without cancellation when l points along -i.
    let shifted = if l1 >= 0.0 {
        l1 + energy
    } else {
        transverse / (energy - l1)
    };
    // With the cancellation-free form above, only an exactly antiparallel
    // eigenvalue (or an underflowed transverse part) needs the fallback.
    if !(shifted > 0.0) {
        // conj(j) (-i) j = i
        return CanonicalForm { energy, u: Quaternion::J };
    }

    // u = sqrt(shifted / 2|l|) [1 + j (l2 - i l3) / (i shifted)]
    let prefactor = (shifted / (2.0 * energy)).sqrt();
    let m = Complex::new(l2, -l3) / Complex::new(0.0, shifted);
    let u = Quaternion::symplectic_join(Complex::new(prefactor, 0.0), m * prefactor);
    // Renormalise away the last ulp so the result is unit to rounding.
    let u = u.scale(1.0 / u.norm());
    CanonicalForm { energy, u }
}
