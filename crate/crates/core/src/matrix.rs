//! Dense 2x2 complex matrices.
//!
//! Every matrix object of the Riemann-Hilbert machinery (`Y_n`, `T_n`,
//! `M_n`, the closed-form structure matrices) is a [`Matrix2C`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{OpucError, Result};

/// Below this modulus a determinant is treated as zero.
pub const SINGULAR_DET: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Matrix2C {
    pub a11: Complex64,
    pub a12: Complex64,
    pub a21: Complex64,
    pub a22: Complex64,
}

impl Matrix2C {
    pub const fn new(a11: Complex64, a12: Complex64, a21: Complex64, a22: Complex64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::diag(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn diag(d1: Complex64, d2: Complex64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self::new(d1, z, z, d2)
    }

    pub fn det(&self) -> Complex64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> Complex64 {
        self.a11 + self.a22
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if !(d.norm() >= SINGULAR_DET) {
            return Err(OpucError::SingularMatrix { det: d.norm() });
        }
        let r = d.inv();
        Ok(Self::new(self.a22 * r, -self.a12 * r, -self.a21 * r, self.a11 * r))
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.a11.norm_sqr() + self.a12.norm_sqr() + self.a21.norm_sqr() + self.a22.norm_sqr()).sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn is_finite(&self) -> bool {
        [self.a11, self.a12, self.a21, self.a22].iter().all(|c| c.is_finite())
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }
}

impl Add for Matrix2C {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl Sub for Matrix2C {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

impl Neg for Matrix2C {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a11, -self.a12, -self.a21, -self.a22)
    }
}

impl Mul for Matrix2C {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl Mul<Complex64> for Matrix2C {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        self.scale(s)
    }
}

impl Mul<f64> for Matrix2C {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }
}

impl fmt::Display for Matrix2C {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a11, self.a12, self.a21, self.a22)
    }
}
