//! The Riemann-Hilbert matrix `Y_n`, the transfer matrix `T_n` and the
//! numeric structure matrix `M_n`.
//!
//! ```text
//! Y_n = [[ Phi_n,                  G_n                  ],
//!        [ -b_{n-1} Phi*_{n-1},    -b_{n-1} G*_{n-1}     ]]
//! T_n = [[ z + conj(alpha_n) alpha_{n-1},   conj(alpha_n) / b_n ],
//!        [ alpha_{n-1} b_n,                 1                   ]]
//! M_n = Y_n' Y_n^{-1} + Y_n D_n Y_n^{-1},   D_n = diag(d, -d),
//! d   = -n/(2z) + nu'/(2 nu)
//! ```
//!
//! `D_n` is the logarithmic derivative of `diag(z^{-n/2} nu^{1/2}, z^{n/2} nu^{-1/2})`,
//! so no fractional power is ever formed.

use num_complex::Complex64;

use crate::cauchy::{cauchy_eval, cauchy_values, EvalOptions};
use crate::error::{OpucError, Result};
use crate::matrix::Matrix2C;
use crate::system::OpucSystem;
use crate::szego::VerblunskyTable;

/// `Y_n` with its first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YJet {
    pub y: Matrix2C,
    pub dy: Matrix2C,
    pub d2y: Matrix2C,
    pub nodes: usize,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn y_jet(sys: &OpucSystem, n: usize, z: Complex64, opts: EvalOptions) -> Result<YJet> {
    let e = cauchy_eval(sys, n, z, opts)?;
    let bm = -sys.table().b_at(n - 1)?;
    let p = &sys.pair(n)?.phi;
    let q = &sys.pair(n - 1)?.phistar;
    let (p0, p1, p2) = (p.eval(z), p.derivative().eval(z), p.derivative().derivative().eval(z));
    let (q0, q1, q2) = (q.eval(z), q.derivative().eval(z), q.derivative().derivative().eval(z));
    Ok(YJet {
        y: Matrix2C::new(p0, e.g, q0 * bm, e.gstar * bm),
        dy: Matrix2C::new(p1, e.dg, q1 * bm, e.dgstar * bm),
        d2y: Matrix2C::new(p2, e.d2g, q2 * bm, e.d2gstar * bm),
        nodes: e.quad_nodes,
    })
}

/// `Y_n(z)` with explicit quadrature options.
pub fn assemble_y_with(sys: &OpucSystem, n: usize, z: Complex64, opts: EvalOptions) -> Result<Matrix2C> {
    let (g, gs, _) = cauchy_values(sys, n, z, opts)?;
    let bm = -sys.table().b_at(n - 1)?;
    Ok(Matrix2C::new(sys.pair(n)?.phi.eval(z), g, sys.pair(n - 1)?.phistar.eval(z) * bm, gs * bm))
}

pub fn assemble_y(sys: &OpucSystem, n: usize, z: Complex64) -> Result<Matrix2C> {
    assemble_y_with(sys, n, z, EvalOptions::standard(sys.rtol()))
}

pub fn transfer_matrix(v: &VerblunskyTable, n: usize, z: Complex64) -> Result<Matrix2C> {
    if n == 0 {
        return Err(OpucError::InvalidParameter("the transfer matrix is defined for n >= 1".into()));
    }
    let a = v.alpha(n as i64)?;
    let am = v.alpha(n as i64 - 1)?;
    let b = v.b_at(n)?;
    Ok(Matrix2C::new(z + a.conj() * am, a.conj() / b, am * b, c(1.0)))
}

/// `T_n'(z)`, constant in `z`.
pub fn transfer_matrix_prime() -> Matrix2C {
    Matrix2C::diag(c(1.0), c(0.0))
}

fn transfer_defect(sys: &OpucSystem, n: usize, z: Complex64) -> Result<Matrix2C> {
    let y0 = assemble_y(sys, n, z)?;
    let y1 = assemble_y(sys, n + 1, z)?;
    let t = transfer_matrix(sys.table(), n, z)?;
    Ok(y1 * Matrix2C::diag(c(1.0), z) - t * y0)
}

/// `||Y_{n+1} diag(1, z) - T_n Y_n||_F`.
pub fn transfer_residual(sys: &OpucSystem, n: usize, z: Complex64) -> Result<f64> {
    Ok(transfer_defect(sys, n, z)?.frobenius_norm())
}

/// Entrywise forms of the transfer relation, in the order
/// `Phi_{n+1}`, `Phi*_n`, `z G_{n+1}`, `z G*_n`.
pub fn corollary_recurrence_residuals(sys: &OpucSystem, n: usize, z: Complex64) -> Result<[f64; 4]> {
    let r = transfer_defect(sys, n, z)?;
    let b = sys.table().b_at(n)?;
    Ok([r.a11.norm(), r.a21.norm() / b, r.a12.norm(), r.a22.norm() / b])
}

/// `[[1, nu(t)/t^n], [0, 1]]` for `|t| = 1`.
pub fn jump_matrix(sys: &OpucSystem, n: usize, t: Complex64) -> Result<Matrix2C> {
    let w = sys.weight().eval_weight(t.arg())?;
    Ok(Matrix2C::new(c(1.0), w * t.powi(-(n as i32)), c(0.0), c(1.0)))
}

/// Jump defect `Y(t(1-d)) - Y(t(1+d)) J(t)`, extrapolated to `d -> 0`
/// from `d`, `d/2`, `d/4` (two Richardson levels); returns its norm.
pub fn jump_residual(sys: &OpucSystem, n: usize, t: Complex64, delta: f64) -> Result<f64> {
    if (t.norm() - 1.0).abs() > 1e-12 {
        return Err(OpucError::InvalidParameter(format!("jump point {t} is not on the unit circle")));
    }
    if !(1e-5..=1e-2).contains(&delta) {
        return Err(OpucError::InvalidParameter(format!("delta must lie in [1e-5, 1e-2], got {delta}")));
    }
    for p in sys.weight().singular_points() {
        if (t - p).norm() < 1e-8 {
            return Err(OpucError::Pole { point: t, what: "the weight" });
        }
    }
    let j = jump_matrix(sys, n, t)?;
    let opts = EvalOptions::boundary(sys.rtol());
    let defect = |d: f64| -> Result<Matrix2C> {
        Ok(assemble_y_with(sys, n, t * (1.0 - d), opts)? - assemble_y_with(sys, n, t * (1.0 + d), opts)? * j)
    };
    let (r1, r2, r4) = (defect(delta)?, defect(delta / 2.0)?, defect(delta / 4.0)?);
    let e1 = r2 * 2.0 - r1;
    let e1h = r4 * 2.0 - r2;
    Ok(((e1h * 4.0 - e1) * (1.0 / 3.0)).frobenius_norm())
}

fn check_structure_point(sys: &OpucSystem, z: Complex64) -> Result<()> {
    if z.norm() == 0.0 {
        return Err(OpucError::Pole { point: z, what: "the structure matrix" });
    }
    for p in sys.weight().singular_points() {
        if z == p {
            return Err(OpucError::Pole { point: z, what: "the structure matrix" });
        }
    }
    Ok(())
}

/// `d = -n/(2z) + nu'/(2 nu)` and its derivative.
pub fn d_entry(sys: &OpucSystem, n: usize, z: Complex64) -> Result<(Complex64, Complex64)> {
    check_structure_point(sys, z)?;
    let w = sys.weight();
    let nf = n as f64;
    let d = -nf / (2.0 * z) + w.log_derivative(z)? / 2.0;
    let dp = nf / (2.0 * z * z) + w.log_derivative_prime(z)? / 2.0;
    Ok((d, dp))
}

/// `M_n` from a jet of `Y_n`.
pub fn structure_matrix_from_jet(sys: &OpucSystem, n: usize, z: Complex64, jet: &YJet) -> Result<Matrix2C> {
    let (d, _) = d_entry(sys, n, z)?;
    let inv = jet.y.inverse()?;
    Ok(jet.dy * inv + jet.y * Matrix2C::diag(d, -d) * inv)
}

pub fn structure_matrix_with(sys: &OpucSystem, n: usize, z: Complex64, opts: EvalOptions) -> Result<(Matrix2C, YJet)> {
    check_structure_point(sys, z)?;
    let jet = y_jet(sys, n, z, opts)?;
    Ok((structure_matrix_from_jet(sys, n, z, &jet)?, jet))
}

pub fn structure_matrix_numeric(sys: &OpucSystem, n: usize, z: Complex64) -> Result<Matrix2C> {
    Ok(structure_matrix_with(sys, n, z, EvalOptions::standard(sys.rtol()))?.0)
}

/// Exponent `p` in `||M_n(center + r u)|| ~ r^{-p}`, estimated from
/// `r = 1e-3` and `r = 1e-4`.
pub fn pole_order_estimate(sys: &OpucSystem, n: usize, center: Complex64, direction: Complex64) -> Result<f64> {
    let u = direction / direction.norm();
    let m1 = structure_matrix_numeric(sys, n, center + u * 1e-3)?.frobenius_norm();
    let m2 = structure_matrix_numeric(sys, n, center + u * 1e-4)?.frobenius_norm();
    Ok((m2 / m1).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightSpec;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lebesgue_y_is_explicit() {
        let sys = OpucSystem::new(WeightSpec::lebesgue(), 4).unwrap();
        let p = z(1.5, 0.5);
        let y = assemble_y(&sys, 1, p).unwrap();
        let want = Matrix2C::new(p, z(0.0, 0.0), z(-1.0, 0.0), p.inv());
        assert!((y - want).frobenius_norm() < 1e-14);
        assert!((y.det() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn transfer_matrix_examples() {
        let sys = OpucSystem::new(WeightSpec::lebesgue(), 4).unwrap();
        let t = transfer_matrix(sys.table(), 2, z(0.3, 0.2)).unwrap();
        assert_eq!(t, Matrix2C::diag(z(0.3, 0.2), z(1.0, 0.0)));
        let v = VerblunskyTable::from_alphas(vec![z(0.3, 0.1), z(-0.2, 0.4), z(0.1, 0.0)], 0.2).unwrap();
        let p = z(-0.7, 1.1);
        assert!((transfer_matrix(&v, 1, p).unwrap().det() - p).norm() < 1e-15);
        assert!(transfer_matrix(&v, 0, p).is_err());
        assert!(transfer_matrix(&v, 3, p).is_err());
    }

    #[test]
    fn transfer_and_det_for_bessel() {
        let sys = OpucSystem::new(WeightSpec::bessel(2.0).unwrap(), 10).unwrap();
        for n in 1..=8 {
            assert!(transfer_residual(&sys, n, z(2.0, 0.0)).unwrap() < 1e-8);
            let y = assemble_y(&sys, n, z(0.0, 0.4)).unwrap();
            assert!((y.det() - 1.0).norm() < 1e-10);
        }
        let r = corollary_recurrence_residuals(&sys, 5, z(3.0, 0.0)).unwrap();
        assert!(r.iter().all(|&x| x < 1e-9), "{r:?}");
    }

    #[test]
    fn structure_matrix_is_trace_free() {
        let sys = OpucSystem::new(WeightSpec::jacobi(1.0, 0.5).unwrap(), 8).unwrap();
        for p in [z(0.3, 0.1), z(2.0, 1.0), z(-0.4, 0.0)] {
            let m = structure_matrix_numeric(&sys, 4, p).unwrap();
            assert!(m.trace().norm() < 1e-9);
        }
        assert!(matches!(structure_matrix_numeric(&sys, 4, z(0.0, 0.0)), Err(OpucError::Pole { .. })));
    }

    #[test]
    fn lebesgue_jump() {
        let sys = OpucSystem::new(WeightSpec::lebesgue(), 4).unwrap();
        assert!(jump_residual(&sys, 1, z(0.0, 1.0), 1e-3).unwrap() < 1e-9);
        assert!(jump_residual(&sys, 1, z(0.0, 1.0), 0.5).is_err());
        let jac = OpucSystem::new(WeightSpec::jacobi(1.0, 0.0).unwrap(), 4).unwrap();
        assert!(matches!(jump_residual(&jac, 1, z(1.0, 0.0), 1e-3), Err(OpucError::Pole { .. })));
    }

    #[test]
    fn pole_orders_at_zero() {
        let sys = OpucSystem::new(WeightSpec::bessel(2.0).unwrap(), 6).unwrap();
        let p = pole_order_estimate(&sys, 3, z(0.0, 0.0), z(1.0, 1.0)).unwrap();
        assert!((p - 2.0).abs() < 0.05, "{p}");
        let sys = OpucSystem::new(WeightSpec::jacobi(1.0, 0.5).unwrap(), 6).unwrap();
        let p = pole_order_estimate(&sys, 3, z(0.0, 0.0), z(1.0, 1.0)).unwrap();
        assert!((p - 1.0).abs() < 0.05, "{p}");
    }
}
