//! Szegő recursion: Verblunsky coefficients and monic orthogonal polynomials.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{OpucError, Result};
use crate::moments::MomentTable;
use crate::poly::Poly;

/// Recursion stops once `|alpha_n|` reaches this bound.
pub const DEGENERACY_BOUND: f64 = 1.0 - 1e-12;
/// Largest tolerated `|c_{-j} - conj(c_j)|`, relative to `c_0`.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct VerblunskyTable {
    /// `alpha_0 .. alpha_{nmax-1}`.
    pub alphas: Vec<Complex64>,
    /// `kappa_0^2 .. kappa_nmax^2`.
    pub kappa2: Vec<f64>,
    /// `b_n = 2 pi kappa_n^2`.
    pub b: Vec<f64>,
    /// Subleading coefficients of `Phi_n`, with `Phi_1^0 = 0`.
    pub phi1: Vec<Complex64>,
}

impl VerblunskyTable {
    /// Builds the table from coefficients and `kappa_0^2`.
    pub fn from_alphas(alphas: Vec<Complex64>, kappa0_sq: f64) -> Result<Self> {
        if !(kappa0_sq > 0.0) {
            return Err(OpucError::InvalidParameter(format!("kappa_0^2 must be positive, got {kappa0_sq}")));
        }
        let mut kappa2 = vec![kappa0_sq];
        let mut phi1 = vec![Complex64::new(0.0, 0.0)];
        let mut prev = Complex64::new(-1.0, 0.0);
        for (n, &a) in alphas.iter().enumerate() {
            if !(a.norm() < DEGENERACY_BOUND) {
                return Err(OpucError::Degenerate { n, modulus: a.norm() });
            }
            kappa2.push(kappa2[n] / (1.0 - a.norm_sqr()));
            phi1.push(phi1[n] + a.conj() * prev);
            prev = a;
        }
        let b = kappa2.iter().map(|k| 2.0 * PI * k).collect();
        Ok(VerblunskyTable { alphas, kappa2, b, phi1 })
    }

    pub fn nmax(&self) -> usize {
        self.alphas.len()
    }

    /// `alpha_n` with the convention `alpha_{-1} = -1`.
    pub fn alpha(&self, n: i64) -> Result<Complex64> {
        if n == -1 {
            return Ok(Complex64::new(-1.0, 0.0));
        }
        usize::try_from(n)
            .ok()
            .and_then(|k| self.alphas.get(k).copied())
            .ok_or_else(|| OpucError::OutOfRange { index: n, available: format!("-1..{}", self.alphas.len()) })
    }

    pub fn b_at(&self, n: usize) -> Result<f64> {
        self.b.get(n).copied().ok_or_else(|| OpucError::OutOfRange { index: n as i64, available: format!("0..={}", self.nmax()) })
    }

    /// Copy with `alpha_n` shifted by `eps`; `kappa`, `b`, `Phi_1` are rebuilt.
    pub fn perturbed(&self, n: usize, eps: Complex64) -> Result<Self> {
        let mut alphas = self.alphas.clone();
        let a = alphas.get_mut(n).ok_or_else(|| OpucError::OutOfRange { index: n as i64, available: format!("0..{}", self.nmax()) })?;
        *a += eps;
        Self::from_alphas(alphas, self.kappa2[0])
    }

    /// Largest `|Im alpha_n|`.
    pub fn max_imag(&self) -> f64 {
        self.alphas.iter().map(|a| a.im.abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyPair {
    pub n: usize,
    pub phi: Poly,
    pub phistar: Poly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Phi,
    PhiStar,
}

/// Runs the recursion on moments `c_{-1} .. c_{-nmax}` (or their mirrors).
pub fn verblunsky_from_moments(c: &MomentTable, nmax: usize) -> Result<VerblunskyTable> {
    let c0 = c.c0();
    if c.hermitian_defect() > HERMITIAN_TOL * c0 {
        return Err(OpucError::Moments(format!(
            "moments are not Hermitian (defect {:.3e}); the measure is not positive",
            c.hermitian_defect()
        )));
    }
    let neg: Vec<Complex64> = (1..=nmax as i64).map(|j| c.get_hermitian(-j)).collect::<Result<_>>()?;
    let one = Complex64::new(1.0, 0.0);
    let mut phi = vec![one];
    let mut phis = vec![one];
    let mut k2 = 1.0 / c0;
    let mut alphas = Vec::with_capacity(nmax);
    for n in 0..nmax {
        // conj(alpha_n) = kappa_n^2 * int z Phi_n dmu
        let ab: Complex64 = phi.iter().zip(&neg).map(|(p, m)| p * m).sum::<Complex64>() * k2;
        let a = ab.conj();
        if !(a.norm() < DEGENERACY_BOUND) {
            return Err(OpucError::Degenerate { n, modulus: a.norm() });
        }
        alphas.push(a);
        let mut next = vec![Complex64::new(0.0, 0.0); n + 2];
        let mut nexts = vec![Complex64::new(0.0, 0.0); n + 2];
        for k in 0..=n {
            next[k + 1] += phi[k];
            next[k] -= ab * phis[k];
            nexts[k] += phis[k];
            nexts[k + 1] -= a * phi[k];
        }
        phi = next;
        phis = nexts;
        k2 /= 1.0 - a.norm_sqr();
    }
    VerblunskyTable::from_alphas(alphas, 1.0 / c0)
}

/// `Phi_n` and `Phi_n^*` regenerated from the coefficients alone.
pub fn phi_pair(v: &VerblunskyTable, n: usize) -> Result<PolyPair> {
    Ok(phi_pairs(v, n)?.pop().expect("nonempty"))
}

/// All pairs `0..=n`.
pub fn phi_pairs(v: &VerblunskyTable, n: usize) -> Result<Vec<PolyPair>> {
    if n > v.nmax() {
        return Err(OpucError::OutOfRange { index: n as i64, available: format!("0..={}", v.nmax()) });
    }
    let one = Complex64::new(1.0, 0.0);
    let mut out = vec![PolyPair { n: 0, phi: Poly::constant(one), phistar: Poly::constant(one) }];
    for k in 0..n {
        let a = v.alphas[k];
        let last = &out[k];
        let zphi = last.phi.shift();
        let phi = &zphi - &last.phistar.scale(a.conj());
        let phistar = &last.phistar - &zphi.scale(a);
        out.push(PolyPair { n: k + 1, phi, phistar });
    }
    Ok(out)
}

/// Value and derivative of `Phi_n` or `Phi_n^*`.
pub fn eval_poly(p: &PolyPair, which: Which, z: Complex64) -> (Complex64, Complex64) {
    match which {
        Which::Phi => p.phi.eval_with_derivative(z),
        Which::PhiStar => p.phistar.eval_with_derivative(z),
    }
}

/// `|Phi_1^n - (conj b - (conj b + n)|alpha_{n-1}|^2)|` for Jacobi tables.
pub fn phi1_closed_jacobi(v: &VerblunskyTable, b: Complex64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(OpucError::InvalidParameter("the closed form for Phi_1^n starts at n = 1".into()));
    }
    let a = v.alpha(n as i64 - 1)?;
    let stored = *v.phi1.get(n).ok_or_else(|| OpucError::OutOfRange { index: n as i64, available: format!("0..={}", v.nmax()) })?;
    Ok((stored - (b.conj() - (b.conj() + n as f64) * a.norm_sqr())).norm())
}

/// `|alpha_n - (b + n)/(conj b + n + 1) alpha_{n-1}|` for Jacobi tables.
pub fn alpha_ratio_jacobi(v: &VerblunskyTable, b: Complex64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(OpucError::InvalidParameter("the ratio identity starts at n = 1".into()));
    }
    let nf = n as f64;
    Ok((v.alpha(n as i64)? - (b + nf) / (b.conj() + nf + 1.0) * v.alpha(n as i64 - 1)?).norm())
}
