//! Closed-form structure matrices for the Bessel and Jacobi weights,
//! zero-curvature residuals and the differential identities they imply.
//!
//! For the Bessel weight `M~_n = z^2 M_n` is a quadratic matrix polynomial,
//! for the Jacobi weight `M~_n = z(1-z) M_n` is linear. Identities between
//! polynomials are checked on coefficients; identities involving `G_n`,
//! `G*_{n-1}` are checked pointwise off the circle.

use num_complex::Complex64;

use crate::cauchy::{cauchy_eval, EvalOptions};
use crate::error::{OpucError, Result};
use crate::matrix::Matrix2C;
use crate::poly::Poly;
use crate::rh::{d_entry, structure_matrix_numeric, structure_matrix_with, transfer_matrix, transfer_matrix_prime, YJet};
use crate::system::OpucSystem;
use crate::szego::{phi_pair, VerblunskyTable};
use crate::weights::{WeightKind, WeightSpec};

/// Largest `|Im alpha|` accepted by the Bessel closed forms.
pub const BESSEL_REAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Bessel { ell: f64 },
    Jacobi { b: Complex64 },
}

impl Family {
    /// The family of a Bessel or Jacobi weight with `H = 1`.
    pub fn of_weight(w: &WeightSpec) -> Result<Self> {
        if !w.h_is_trivial() {
            return Err(OpucError::Unsupported { op: "closed-form structure matrices", what: "weights with H != 1".into() });
        }
        match w.kind() {
            WeightKind::Bessel { ell } => Ok(Family::Bessel { ell: *ell }),
            WeightKind::Jacobi { b } => Ok(Family::Jacobi { b: *b }),
            _ => Err(OpucError::Unsupported { op: "closed-form structure matrices", what: w.describe() }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Bessel { .. } => "bessel",
            Family::Jacobi { .. } => "jacobi",
        }
    }

    /// `z^2` or `z(1-z)`.
    pub fn multiplier(&self, z: Complex64) -> Complex64 {
        match self {
            Family::Bessel { .. } => z * z,
            Family::Jacobi { .. } => z * (1.0 - z),
        }
    }

    /// Smallest degree for which the closed forms are defined.
    pub fn min_degree(&self) -> usize {
        match self {
            Family::Bessel { .. } => 2,
            Family::Jacobi { .. } => 1,
        }
    }
}

/// A matrix polynomial `sum_k F^k z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MtildeSpec {
    pub family: Family,
    pub n: usize,
    /// `F^0, F^1, ...`
    pub coefficients: Vec<Matrix2C>,
}

impl MtildeSpec {
    pub fn eval(&self, z: Complex64) -> Matrix2C {
        self.coefficients.iter().rev().fold(Matrix2C::zero(), |acc, f| acc * z + *f)
    }

    /// `M_n(z)` recovered by dividing out the multiplier.
    pub fn structure_matrix(&self, z: Complex64) -> Result<Matrix2C> {
        let m = self.family.multiplier(z);
        if m.norm() == 0.0 {
            return Err(OpucError::Pole { point: z, what: "the structure matrix" });
        }
        Ok(self.eval(z) * m.inv())
    }

    /// Largest coefficientwise distance to another spec, per degree.
    pub fn distance_by_degree(&self, other: &MtildeSpec) -> Vec<f64> {
        let len = self.coefficients.len().max(other.coefficients.len());
        let get = |s: &MtildeSpec, k: usize| s.coefficients.get(k).copied().unwrap_or_else(Matrix2C::zero);
        (0..len).map(|k| (get(self, k) - get(other, k)).frobenius_norm()).collect()
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn alpha(v: &VerblunskyTable, n: i64) -> Result<Complex64> {
    v.alpha(n)
}

fn require_degree(family: Family, n: usize) -> Result<()> {
    if n < family.min_degree() {
        return Err(OpucError::InvalidParameter(format!("{} closed forms need n >= {}, got {n}", family.name(), family.min_degree())));
    }
    Ok(())
}

fn require_real(v: &VerblunskyTable, lo: i64, hi: i64) -> Result<()> {
    for k in lo..=hi {
        if alpha(v, k)?.im.abs() >= BESSEL_REAL_TOL {
            return Err(OpucError::Unsupported { op: "Bessel closed forms", what: format!("complex Verblunsky coefficient alpha_{k}") });
        }
    }
    Ok(())
}

pub fn mtilde(v: &VerblunskyTable, family: Family, n: usize) -> Result<MtildeSpec> {
    match family {
        Family::Bessel { ell } => mtilde_bessel(v, ell, n),
        Family::Jacobi { b } => mtilde_jacobi(v, b, n),
    }
}

/// `z^2 M_n` for the Bessel weight (`n >= 2`, real coefficients).
pub fn mtilde_bessel(v: &VerblunskyTable, ell: f64, n: usize) -> Result<MtildeSpec> {
    let family = Family::Bessel { ell };
    require_degree(family, n)?;
    let ni = n as i64;
    require_real(v, ni - 2, ni)?;
    let (a2, a1, a0) = (alpha(v, ni - 2)?, alpha(v, ni - 1)?, alpha(v, ni)?);
    let (bm, b) = (v.b_at(n - 1)?, v.b_at(n)?);
    let h = ell / 2.0;
    let e0 = (ell / 4.0) * (bm / b - a1 * a1);
    let f0 = Matrix2C::new(e0, -h * a1 / b, -h * bm * a1, -e0);
    let f1 = Matrix2C::new(c(n as f64 / 2.0), h * a0 / b, h * bm * a2, c(-(n as f64) / 2.0));
    let f2 = Matrix2C::diag(c(ell / 4.0), c(-ell / 4.0));
    Ok(MtildeSpec { family, n, coefficients: vec![f0, f1, f2] })
}

/// `z(1-z) M_n` for the Jacobi weight (`n >= 1`).
pub fn mtilde_jacobi(v: &VerblunskyTable, b: Complex64, n: usize) -> Result<MtildeSpec> {
    let family = Family::Jacobi { b };
    require_degree(family, n)?;
    let a = alpha(v, n as i64 - 1)?;
    let (bm, bn) = (v.b_at(n - 1)?, v.b_at(n)?);
    let nf = n as f64;
    let s = b.conj() + nf;
    let e0 = -s * (2.0 * a.norm_sqr() - 1.0) / 2.0;
    let f0 = Matrix2C::new(e0, -s * a.conj() / bn, -s * bm * a, -e0);
    let f1 = Matrix2C::diag(-(b + nf) / 2.0, (b + nf) / 2.0);
    Ok(MtildeSpec { family, n, coefficients: vec![f0, f1] })
}

/// The residue of `M_n` at `z = 1` in the displayed Jacobi form.
pub fn jacobi_residue_display(v: &VerblunskyTable, b: Complex64, n: usize) -> Result<Matrix2C> {
    require_degree(Family::Jacobi { b }, n)?;
    let a = alpha(v, n as i64 - 1)?;
    let (bm, bn) = (v.b_at(n - 1)?, v.b_at(n)?);
    let nf = n as f64;
    let s = b.conj() + nf;
    let e = ((b + nf) + s * (2.0 * a.norm_sqr() - 1.0)) / 2.0;
    Ok(Matrix2C::new(e, s * a.conj() / bn, bm * s * a, -e))
}

/// The Bessel form obtained before the limit `z -> 0`, with `Phi_1^n`,
/// `alpha_n alpha_{n-2}` and the coefficient of `z` in `Phi_{n-1}`.
pub fn bessel_pre_liouville(v: &VerblunskyTable, ell: f64, n: usize) -> Result<MtildeSpec> {
    let family = Family::Bessel { ell };
    require_degree(family, n)?;
    let ni = n as i64;
    require_real(v, ni - 2, ni)?;
    let (a2, a1, a0) = (alpha(v, ni - 2)?, alpha(v, ni - 1)?, alpha(v, ni)?);
    let (bm, b, bp) = (v.b_at(n - 1)?, v.b_at(n)?, v.b_at(n + 1)?);
    let p1 = v.phi1[n];
    let q1 = phi_pair(v, n - 1)?.phi.coeff(1).conj();
    let (nf, h) = (n as f64, ell / 2.0);
    let ratio = bm / b * a0 * a2;
    let f0 = Matrix2C::new(
        -(ratio + ell + 4.0 * p1) / 4.0,
        a0 / b * (nf + 1.0 + h * (p1 - 1.0)) + h * a1 / bp,
        bm * (bm * (nf - 1.0 - h * p1) * a2 + q1),
        -(ratio - ell - 4.0 * p1) / 4.0,
    );
    let f1 = Matrix2C::new(c(nf / 2.0), h * a0 / b, bm * h * a2, c(-nf / 2.0));
    let f2 = Matrix2C::diag(c(ell / 4.0), c(-ell / 4.0));
    Ok(MtildeSpec { family, n, coefficients: vec![f0, f1, f2] })
}

/// The Jacobi form obtained before comparing with the value at `z = 0`.
pub fn jacobi_pre_liouville(v: &VerblunskyTable, b: Complex64, n: usize) -> Result<MtildeSpec> {
    let family = Family::Jacobi { b };
    require_degree(family, n)?;
    let ni = n as i64;
    let (a2, a0) = (alpha(v, ni - 2)?, alpha(v, ni)?);
    let (bm, bn) = (v.b_at(n - 1)?, v.b_at(n)?);
    let nf = n as f64;
    let e0 = -(b.conj() - nf) / 2.0 + v.phi1[n];
    let f0 = Matrix2C::new(e0, -(b + nf + 1.0) * a0.conj() / bn, -(b + nf - 1.0) * bm * a2, -e0);
    let f1 = Matrix2C::diag(-(b + nf) / 2.0, (b + nf) / 2.0);
    Ok(MtildeSpec { family, n, coefficients: vec![f0, f1] })
}

/// Per-degree distance between the pre-Liouville form and the closed form.
pub fn pre_liouville_discrepancy(v: &VerblunskyTable, family: Family, n: usize) -> Result<Vec<f64>> {
    let (pre, closed) = match family {
        Family::Bessel { ell } => (bessel_pre_liouville(v, ell, n)?, mtilde_bessel(v, ell, n)?),
        Family::Jacobi { b } => (jacobi_pre_liouville(v, b, n)?, mtilde_jacobi(v, b, n)?),
    };
    Ok(pre.distance_by_degree(&closed))
}

/// `||M~_n(z) - m(z) M_n(z)||` with `M_n` from quadrature.
pub fn mtilde_numeric_residual(sys: &OpucSystem, family: Family, n: usize, z: Complex64) -> Result<f64> {
    let closed = mtilde(sys.table(), family, n)?.eval(z);
    let numeric = structure_matrix_numeric(sys, n, z)?;
    Ok((closed - numeric * family.multiplier(z)).frobenius_norm())
}

/// `||T_n' - T_n/(2z) - M_{n+1} T_n + T_n M_n||` with numeric `M`.
pub fn curvature_residual_generic(sys: &OpucSystem, n: usize, z: Complex64) -> Result<f64> {
    let t = transfer_matrix(sys.table(), n, z)?;
    let m0 = structure_matrix_numeric(sys, n, z)?;
    let m1 = structure_matrix_numeric(sys, n + 1, z)?;
    let r = transfer_matrix_prime() - t * (0.5 / z) - m1 * t + t * m0;
    Ok(r.frobenius_norm())
}

/// Closed-form zero-curvature residual, free of quadrature:
/// `||m T_n' + T_n M~_n - s T_n - M~_{n+1} T_n||` with the family's
/// multiplier `m` and `s = z/2` (Bessel) or `s = (1-z)/2` (Jacobi).
pub fn curvature_residual_closed(v: &VerblunskyTable, family: Family, n: usize, z: Complex64) -> Result<f64> {
    let t = transfer_matrix(v, n, z)?;
    let m0 = mtilde(v, family, n)?.eval(z);
    let m1 = mtilde(v, family, n + 1)?.eval(z);
    let half = match family {
        Family::Bessel { .. } => z / 2.0,
        Family::Jacobi { .. } => (1.0 - z) / 2.0,
    };
    let r = transfer_matrix_prime() * family.multiplier(z) + t * m0 - t * half - m1 * t;
    Ok(r.frobenius_norm())
}

pub fn curvature_residual_bessel(v: &VerblunskyTable, ell: f64, n: usize, z: Complex64) -> Result<f64> {
    curvature_residual_closed(v, Family::Bessel { ell }, n, z)
}

pub fn curvature_residual_jacobi(v: &VerblunskyTable, b: Complex64, n: usize, z: Complex64) -> Result<f64> {
    curvature_residual_closed(v, Family::Jacobi { b }, n, z)
}

/// `||M_{n+1} S + S M_n - M_{n+1}^2 T_n + T_n M_n^2||`, `S = T_n' - T_n/(2z)`.
pub fn second_curvature_residual(sys: &OpucSystem, n: usize, z: Complex64) -> Result<f64> {
    let t = transfer_matrix(sys.table(), n, z)?;
    let m0 = structure_matrix_numeric(sys, n, z)?;
    let m1 = structure_matrix_numeric(sys, n + 1, z)?;
    let s = transfer_matrix_prime() - t * (0.5 / z);
    let r = m1 * s + s * m0 - m1 * m1 * t + t * m0 * m0;
    Ok(r.frobenius_norm())
}

// Coefficients shared by the first- and second-order systems. Each row
// reads `m(z) u' = p(z) u + q(z) v` for the pairs (Phi_n, Phi*_{n-1}) and
// (G_n, G*_{n-1}).
struct FirstOrder {
    // rows for (Phi_n, G_n): p, q
    top: [(Poly, Poly); 2],
    // rows for (Phi*_{n-1}, G*_{n-1}): coefficient of the partner, own coefficient
    bottom: [(Poly, Poly); 2],
    m: Poly,
}

fn first_order_coefficients(v: &VerblunskyTable, family: Family, n: usize) -> Result<FirstOrder> {
    require_degree(family, n)?;
    let ni = n as i64;
    let nf = n as f64;
    let z0 = c(0.0);
    match family {
        Family::Bessel { ell } => {
            require_real(v, ni - 2, ni)?;
            let (d, a, cc) = (alpha(v, ni - 2)?, alpha(v, ni - 1)?, alpha(v, ni)?);
            let (bm, b) = (v.b_at(n - 1)?, v.b_at(n)?);
            let h = ell / 2.0;
            let cross_top = Poly::linear(h * bm / b * a, -h * bm / b * cc);
            let cross_bot = Poly::linear(h * a, -h * d);
            Ok(FirstOrder {
                top: [(Poly::linear(h - h * a * a, c(nf)), cross_top.clone()), (Poly::new(vec![-h * a * a, z0, c(h)]), cross_top)],
                bottom: [(cross_bot.clone(), Poly::new(vec![h * a * a, z0, c(-h)])), (cross_bot, Poly::linear(-h + h * a * a, c(-nf)))],
                m: Poly::monomial(2),
            })
        }
        Family::Jacobi { b } => {
            let a = alpha(v, ni - 1)?;
            let s = b.conj() + nf;
            let a2 = a.norm_sqr();
            let cross_top = Poly::constant(s * (1.0 - a2) * a.conj());
            let cross_bot = Poly::constant(s * a);
            Ok(FirstOrder {
                top: [(Poly::linear(s * (1.0 - a2), c(-nf)), cross_top.clone()), (Poly::linear(-s * a2, -b), cross_top)],
                bottom: [(cross_bot.clone(), Poly::linear(s * a2, b)), (cross_bot, Poly::linear(-s * (1.0 - a2), c(nf)))],
                m: Poly::new(vec![z0, c(1.0), c(-1.0)]),
            })
        }
    }
}

fn pw(p: &Poly, z: Complex64) -> Complex64 {
    p.eval(z)
}

/// Coefficientwise residuals of the first-order relations for
/// `Phi_n` and `Phi*_{n-1}`.
pub fn first_order_poly_residuals(v: &VerblunskyTable, family: Family, n: usize) -> Result<[f64; 2]> {
    let f = first_order_coefficients(v, family, n)?;
    let u = phi_pair(v, n)?.phi;
    let w = phi_pair(v, n - 1)?.phistar;
    let (p, q) = &f.top[0];
    let (r, s) = &f.bottom[0];
    let e1 = &(&f.m * &u.derivative()) - &(&(p * &u) + &(q * &w));
    let e2 = &(&f.m * &w.derivative()) - &(&(r * &u) + &(s * &w));
    Ok([e1.max_abs(), e2.max_abs()])
}

/// Pointwise residuals of the first-order relations for `G_n` and `G*_{n-1}`.
pub fn first_order_g_residuals(sys: &OpucSystem, family: Family, n: usize, z: Complex64) -> Result<[f64; 2]> {
    let f = first_order_coefficients(sys.table(), family, n)?;
    let e = cauchy_eval(sys, n, z, EvalOptions::standard(sys.rtol()))?;
    let m = pw(&f.m, z);
    let (p, q) = &f.top[1];
    let (r, s) = &f.bottom[1];
    let e1 = m * e.dg - pw(p, z) * e.g - pw(q, z) * e.gstar;
    let e2 = m * e.dgstar - pw(r, z) * e.g - pw(s, z) * e.gstar;
    Ok([e1.norm(), e2.norm()])
}

fn four(poly: [f64; 2], g: [f64; 2]) -> [f64; 4] {
    [poly[0], g[0], poly[1], g[1]]
}

/// First-order Bessel relations for `Phi_n, G_n, Phi*_{n-1}, G*_{n-1}`;
/// the polynomial ones coefficientwise, the others at `z`.
pub fn first_order_residuals_bessel(sys: &OpucSystem, ell: f64, n: usize, z: Complex64) -> Result<[f64; 4]> {
    let family = Family::Bessel { ell };
    Ok(four(first_order_poly_residuals(sys.table(), family, n)?, first_order_g_residuals(sys, family, n, z)?))
}

pub fn first_order_residuals_jacobi(sys: &OpucSystem, b: Complex64, n: usize, z: Complex64) -> Result<[f64; 4]> {
    let family = Family::Jacobi { b };
    Ok(four(first_order_poly_residuals(sys.table(), family, n)?, first_order_g_residuals(sys, family, n, z)?))
}

/// Structure relations as coefficientwise residuals.
/// Bessel: `Phi_n' = n Phi_{n-1} + (ell k_{n-2}^2 / (2 k_n^2)) Phi_{n-2}` and
/// `z Phi_n' = n Phi_n + (ell/2)(k_{n-1}^2/k_n^2)(Phi_{n-1} - conj(alpha_n) Phi*_{n-1})`.
/// Jacobi: `(z-1) Phi_n' = n Phi_n - (conj(b)+n)(1-|alpha_{n-1}|^2) Phi_{n-1}`.
pub fn structure_relation_residuals(v: &VerblunskyTable, family: Family, n: usize) -> Result<Vec<f64>> {
    require_degree(family, n)?;
    let nf = n as f64;
    let pn = phi_pair(v, n)?;
    let pm = phi_pair(v, n - 1)?;
    let dp = pn.phi.derivative();
    match family {
        Family::Bessel { ell } => {
            require_real(v, n as i64 - 2, n as i64)?;
            let pmm = phi_pair(v, n - 2)?;
            let k = &v.kappa2;
            let r1 = &dp - &(&pm.phi.scale(c(nf)) + &pmm.phi.scale(c(ell * k[n - 2] / (2.0 * k[n]))));
            let an = alpha(v, n as i64)?;
            let inner = &pm.phi - &pm.phistar.scale(an.conj());
            let r2 = &dp.shift() - &(&pn.phi.scale(c(nf)) + &inner.scale(c(ell / 2.0 * k[n - 1] / k[n])));
            Ok(vec![r1.max_abs(), r2.max_abs()])
        }
        Family::Jacobi { b } => {
            let a = alpha(v, n as i64 - 1)?;
            let lhs = &dp.shift() - &dp;
            let rhs = &pn.phi.scale(c(nf)) - &pm.phi.scale((b.conj() + nf) * (1.0 - a.norm_sqr()));
            Ok(vec![(&lhs - &rhs).max_abs()])
        }
    }
}

// Second-order equations `m u'' + p u' + q u + r w = 0` for the four
// functions, in the order Phi_n, G_n, Phi*_{n-1}, G*_{n-1}; `w` is the partner.
struct SecondOrder {
    m: Poly,
    rows: [(Poly, Poly, Complex64); 4],
}

fn second_order_coefficients(v: &VerblunskyTable, family: Family, n: usize) -> Result<SecondOrder> {
    require_degree(family, n)?;
    let ni = n as i64;
    let nf = n as f64;
    let z0 = c(0.0);
    match family {
        Family::Bessel { ell } => {
            require_real(v, ni - 2, ni)?;
            let (d, a, cc) = (alpha(v, ni - 2)?, alpha(v, ni - 1)?, alpha(v, ni)?);
            let h = ell / 2.0;
            let sq = ell * ell / 4.0;
            let k = (1.0 - a * a) * cc * d - a * a;
            let base = sq + sq * k;
            let p_phi = Poly::new(vec![c(-h), c(2.0 - nf), c(h)]);
            let p_g = Poly::new(vec![c(h), c(nf + 2.0), c(-h)]);
            let top = h * (1.0 - a * a) * cc;
            let bot = h * d;
            Ok(SecondOrder {
                m: Poly::monomial(2),
                rows: [
                    (p_phi.clone(), Poly::linear(-base - nf, c(-h * nf)), top),
                    (p_g.clone(), Poly::linear(-base, c(-ell * (nf / 2.0 + 1.0))), top),
                    (p_phi, Poly::linear(-base, c(-ell * (nf / 2.0 - 1.0))), bot),
                    (p_g, Poly::linear(-base + nf, c(-h * nf)), bot),
                ],
            })
        }
        Family::Jacobi { b } => {
            let p_phi = Poly::linear(1.0 - nf - b.conj(), nf - b - 2.0);
            let p_g = Poly::linear(1.0 + nf + b.conj(), b - nf - 2.0);
            Ok(SecondOrder {
                m: Poly::new(vec![z0, c(1.0), c(-1.0)]),
                rows: [
                    (p_phi.clone(), Poly::constant(nf * (1.0 + b)), z0),
                    (p_g.clone(), Poly::constant(b * (1.0 + nf)), z0),
                    (p_phi, Poly::constant(b * (nf - 1.0)), z0),
                    (p_g, Poly::constant(nf * (b - 1.0)), z0),
                ],
            })
        }
    }
}

/// Coefficientwise residuals of the second-order equations for
/// `Phi_n` and `Phi*_{n-1}` (hypergeometric equations for Jacobi).
pub fn second_order_poly_residuals(v: &VerblunskyTable, family: Family, n: usize) -> Result<[f64; 2]> {
    let s = second_order_coefficients(v, family, n)?;
    let u = phi_pair(v, n)?.phi;
    let w = phi_pair(v, n - 1)?.phistar;
    let apply = |row: &(Poly, Poly, Complex64), f: &Poly, partner: &Poly| -> f64 {
        let (p, q, r) = row;
        let d1 = f.derivative();
        let e = &(&(&s.m * &d1.derivative()) + &(p * &d1)) + &(&(q * f) + &partner.scale(*r));
        e.max_abs()
    };
    Ok([apply(&s.rows[0], &u, &w), apply(&s.rows[2], &w, &u)])
}

/// Pointwise residuals of the second-order equations for `G_n`, `G*_{n-1}`.
pub fn second_order_g_residuals(sys: &OpucSystem, family: Family, n: usize, z: Complex64) -> Result<[f64; 2]> {
    let s = second_order_coefficients(sys.table(), family, n)?;
    let e = cauchy_eval(sys, n, z, EvalOptions::standard(sys.rtol()))?;
    let m = s.m.eval(z);
    let row = |k: usize, f: (Complex64, Complex64, Complex64), partner: Complex64| -> f64 {
        let (p, q, r) = &s.rows[k];
        (m * f.2 + p.eval(z) * f.1 + q.eval(z) * f.0 + r * partner).norm()
    };
    Ok([row(1, (e.g, e.dg, e.d2g), e.gstar), row(3, (e.gstar, e.dgstar, e.d2gstar), e.g)])
}

pub fn second_order_residuals_bessel(sys: &OpucSystem, ell: f64, n: usize, z: Complex64) -> Result<[f64; 4]> {
    let family = Family::Bessel { ell };
    Ok(four(second_order_poly_residuals(sys.table(), family, n)?, second_order_g_residuals(sys, family, n, z)?))
}

pub fn hypergeometric_residuals_jacobi(sys: &OpucSystem, b: Complex64, n: usize, z: Complex64) -> Result<[f64; 4]> {
    let family = Family::Jacobi { b };
    Ok(four(second_order_poly_residuals(sys.table(), family, n)?, second_order_g_residuals(sys, family, n, z)?))
}

/// `M_n` at `z` together with `M_n' + M_n^2`; the derivative is a central
/// difference at `h` and `h/2` with one Richardson step, all evaluations on
/// the node count chosen at `z`.
pub fn structure_matrix_jet(sys: &OpucSystem, n: usize, z: Complex64) -> Result<(Matrix2C, Matrix2C, YJet)> {
    let (m, jet) = structure_matrix_with(sys, n, z, EvalOptions::standard(sys.rtol()))?;
    let opts = EvalOptions::fixed(jet.nodes);
    let h = 1e-4 * z.norm().max(1.0);
    let central = |step: f64| -> Result<Matrix2C> {
        let plus = structure_matrix_with(sys, n, z + step, opts)?.0;
        let minus = structure_matrix_with(sys, n, z - step, opts)?.0;
        Ok((plus - minus) * (0.5 / step))
    };
    let (d1, d2) = (central(h)?, central(h / 2.0)?);
    let dm = (d2 * 4.0 - d1) * (1.0 / 3.0);
    Ok((m, dm + m * m, jet))
}

/// `||Y'' + 2 Y' D + Y (D' + D^2) - (M' + M^2) Y||` at `z`, where
/// `D = diag(d, -d)` is the logarithmic derivative of the constant-jump factor.
pub fn generic_second_order_residual(sys: &OpucSystem, n: usize, z: Complex64) -> Result<f64> {
    let (_, p, jet) = structure_matrix_jet(sys, n, z)?;
    let (d, dp) = d_entry(sys, n, z)?;
    let dd = Matrix2C::diag(d, -d);
    let e = Matrix2C::diag(dp + d * d, -dp + d * d);
    Ok((jet.d2y + jet.dy * dd * 2.0 + jet.y * e - p * jet.y).frobenius_norm())
}

/// `||M_n + T_n(-z)^{-1} {z (P_{n+1} T_n - T_n P_n) + T_n' - (3/(4z)) T_n}||`
/// with `P_k = M_k' + M_k^2`.
pub fn traceback_residual(sys: &OpucSystem, n: usize, z: Complex64) -> Result<f64> {
    let (m0, p0, _) = structure_matrix_jet(sys, n, z)?;
    let (_, p1, _) = structure_matrix_jet(sys, n + 1, z)?;
    let t = transfer_matrix(sys.table(), n, z)?;
    let tm = transfer_matrix(sys.table(), n, -z)?;
    let brace = (p1 * t - t * p0) * z + transfer_matrix_prime() - t * (0.75 / z);
    Ok((m0 + tm.inverse()? * brace).frobenius_norm())
}
