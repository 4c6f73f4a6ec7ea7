//! Real quaternions and their symplectic complex-pair view.
//!
//! A quaternion `w + x i + y j + z k` is stored by components. Every
//! quaternion also has a unique decomposition `q = c1 + j c2` with complex
//! `c1 = w + i x` and `c2 = y - i z`. Under this embedding `j c = conj(c) j`,
//! which is the rule that makes the left-acting `j` factors of the radial
//! solutions behave as expected.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub use num_complex::Complex64 as Complex;

use crate::error::{Error, Result};

/// Quaternion with components along `1, i, j, k`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub const fn real(w: f64) -> Self {
        Self::new(w, 0.0, 0.0, 0.0)
    }

    /// Pure imaginary quaternion `i a + j b + k c`.
    pub const fn imaginary(a: f64, b: f64, c: f64) -> Self {
        Self::new(0.0, a, b, c)
    }

    /// Embeds a complex number as `re + i im`.
    pub fn from_complex(c: Complex) -> Self {
        Self::new(c.re, c.im, 0.0, 0.0)
    }

    pub fn components(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn scalar(&self) -> f64 {
        self.w
    }

    /// Hamilton product `self * rhs`.
    pub fn multiply(&self, rhs: &Quaternion) -> Quaternion {
        let (a1, b1, c1, d1) = (self.w, self.x, self.y, self.z);
        let (a2, b2, c2, d2) = (rhs.w, rhs.x, rhs.y, rhs.z);
        Quaternion::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }

    pub fn conjugate(&self) -> Quaternion {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// Euclidean norm of the 4-tuple, computed without intermediate overflow.
    pub fn norm(&self) -> f64 {
        self.w.hypot(self.x).hypot(self.y.hypot(self.z))
    }

    pub fn inverse(&self) -> Result<Quaternion> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 || !n2.is_finite() {
            return Err(Error::ZeroQuaternion);
        }
        Ok(self.conjugate().scale(1.0 / n2))
    }

    pub fn scale(&self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// Right multiplication by a complex number, `self * c`.
    pub fn mul_complex(&self, c: Complex) -> Quaternion {
        self.multiply(&Quaternion::from_complex(c))
    }

    /// Splits `q` into `(c1, c2)` with `q = c1 + j c2`.
    pub fn symplectic_split(&self) -> (Complex, Complex) {
        (Complex::new(self.w, self.x), Complex::new(self.y, -self.z))
    }

    /// Builds `c1 + j c2`.
    pub fn symplectic_join(c1: Complex, c2: Complex) -> Quaternion {
        Quaternion::new(c1.re, c1.im, c2.re, -c2.im)
    }

    /// Product evaluated on complex pairs:
    /// `(c1 + j c2)(d1 + j d2) = (c1 d1 - conj(c2) d2) + j (conj(c1) d2 + c2 d1)`.
    pub fn symplectic_multiply(&self, rhs: &Quaternion) -> Quaternion {
        let (c1, c2) = self.symplectic_split();
        let (d1, d2) = rhs.symplectic_split();
        Quaternion::symplectic_join(c1 * d1 - c2.conj() * d2, c1.conj() * d2 + c2 * d1)
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.w + rhs.w, self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.w - rhs.w, self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        self.multiply(&rhs)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: f64) -> Quaternion {
        self.scale(rhs)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}i {:+}j {:+}k", self.w, self.x, self.y, self.z)
    }
}
