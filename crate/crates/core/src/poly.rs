//! Complex polynomials in the monomial basis, lowest degree first.
//!
//! Used for exact coefficient algebra when checking polynomial
//! identities, so no sampling noise enters those checks.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Poly(coeffs)
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Complex64) -> Self {
        Poly(vec![c])
    }

    /// `c0 + c1 z`.
    pub fn linear(c0: Complex64, c1: Complex64) -> Self {
        Poly(vec![c0, c1])
    }

    pub fn monomial(k: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); k + 1];
        v[k] = Complex64::new(1.0, 0.0);
        Poly(v)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.0.get(k).copied().unwrap_or_default()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by a single Horner sweep.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.0.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect())
    }

    /// Multiplication by `z`.
    pub fn shift(&self) -> Poly {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(Complex64::new(0.0, 0.0));
        v.extend_from_slice(&self.0);
        Poly(v)
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly(self.0.iter().map(|&c| c * s).collect())
    }

    /// Largest coefficient modulus; the coefficientwise residual of an identity.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.0.is_empty() || o.0.is_empty() {
            return Poly::zero();
        }
        let mut v = vec![Complex64::new(0.0, 0.0); self.0.len() + o.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in o.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly(v)
    }
}
