//! Discrete Painlevé II for the Bessel Verblunsky coefficients:
//!
//! ```text
//! alpha_n + alpha_{n-2} = -(2n/ell) alpha_{n-1} / (1 - alpha_{n-1}^2),   n >= 2
//! ```
//!
//! Residuals are the primary use. Forward iteration is provided for
//! diagnostics only; it amplifies any error in the seeds.

use num_complex::Complex64;

use crate::error::{OpucError, Result};
use crate::structure::BESSEL_REAL_TOL;
use crate::szego::VerblunskyTable;

#[derive(Debug, Clone, PartialEq)]
pub struct DpiiOrbit {
    pub ell: f64,
    pub alphas: Vec<f64>,
    /// `None` for `n < 2`.
    pub residuals: Vec<Option<f64>>,
    /// First index with `|alpha_n| >= 1`; that value is the last one stored.
    pub diverged_at: Option<usize>,
}

fn check_ell(ell: f64) -> Result<()> {
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(OpucError::InvalidParameter(format!("dPII needs ell > 0, got {ell}")));
    }
    Ok(())
}

fn forcing(a: f64, ell: f64, n: usize) -> Result<f64> {
    if !(a.abs() < 1.0) {
        return Err(OpucError::Pole { point: Complex64::new(a, 0.0), what: "the dPII map" });
    }
    Ok(2.0 * n as f64 / ell * a / (1.0 - a * a))
}

/// `alpha_n + alpha_{n-2} + (2n/ell) alpha_{n-1} / (1 - alpha_{n-1}^2)`.
pub fn dpii_signed_residual(alphas: &[f64], ell: f64, n: usize) -> Result<f64> {
    check_ell(ell)?;
    if n < 2 || n >= alphas.len() {
        return Err(OpucError::OutOfRange { index: n as i64, available: format!("2..{}", alphas.len()) });
    }
    Ok(alphas[n] + alphas[n - 2] + forcing(alphas[n - 1], ell, n)?)
}

pub fn dpii_residual(alphas: &[f64], ell: f64, n: usize) -> Result<f64> {
    Ok(dpii_signed_residual(alphas, ell, n)?.abs())
}

/// `alpha_n` from `alpha_{n-2}`, `alpha_{n-1}`.
pub fn dpii_step(a_nm2: f64, a_nm1: f64, ell: f64, n: usize) -> Result<f64> {
    check_ell(ell)?;
    Ok(-a_nm2 - forcing(a_nm1, ell, n)?)
}

/// `alpha_0 .. alpha_{nmax-1}` by forward iteration, stopping at the
/// first coefficient outside the unit disc.
pub fn dpii_iterate(alpha0: f64, alpha1: f64, ell: f64, nmax: usize) -> Result<DpiiOrbit> {
    check_ell(ell)?;
    if !(alpha0.abs() < 1.0 && alpha1.abs() < 1.0) {
        return Err(OpucError::InvalidParameter(format!("seeds must lie in (-1, 1), got ({alpha0}, {alpha1})")));
    }
    let mut alphas: Vec<f64> = [alpha0, alpha1].into_iter().take(nmax).collect();
    let mut diverged_at = None;
    for n in 2..nmax {
        let next = dpii_step(alphas[n - 2], alphas[n - 1], ell, n)?;
        alphas.push(next);
        if !(next.abs() < 1.0) {
            diverged_at = Some(n);
            break;
        }
    }
    let residuals = (0..alphas.len()).map(|n| if n < 2 { None } else { dpii_residual(&alphas, ell, n).ok() }).collect();
    Ok(DpiiOrbit { ell, alphas, residuals, diverged_at })
}

/// Real parts of the table's coefficients; refuses complex ones.
pub fn real_alphas(v: &VerblunskyTable) -> Result<Vec<f64>> {
    v.alphas
        .iter()
        .enumerate()
        .map(|(k, a)| {
            if a.im.abs() < BESSEL_REAL_TOL {
                Ok(a.re)
            } else {
                Err(OpucError::Unsupported { op: "dPII", what: format!("complex Verblunsky coefficient alpha_{k}") })
            }
        })
        .collect()
}

/// The coefficients of a table as an orbit, with residuals for `n >= 2`.
pub fn orbit_from_table(v: &VerblunskyTable, ell: f64) -> Result<DpiiOrbit> {
    check_ell(ell)?;
    let alphas = real_alphas(v)?;
    let residuals =
        (0..alphas.len()).map(|n| if n < 2 { Ok(None) } else { dpii_residual(&alphas, ell, n).map(Some) }).collect::<Result<_>>()?;
    Ok(DpiiOrbit { ell, alphas, residuals, diverged_at: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::OpucSystem;
    use crate::weights::WeightSpec;
    use proptest::prelude::*;

    fn bessel_alphas(ell: f64, nmax: usize) -> Vec<f64> {
        let sys = OpucSystem::new(WeightSpec::bessel(ell).unwrap(), nmax).unwrap();
        real_alphas(sys.table()).unwrap()
    }

    #[test]
    fn zero_sequence() {
        let z = vec![0.0; 8];
        for n in 2..8 {
            assert_eq!(dpii_residual(&z, 1.3, n).unwrap(), 0.0);
        }
        let orbit = dpii_iterate(0.0, 0.0, 2.0, 10).unwrap();
        assert!(orbit.alphas.iter().all(|&a| a == 0.0));
        assert_eq!(orbit.diverged_at, None);
    }

    #[test]
    fn moment_coefficients_satisfy_dpii() {
        for ell in [0.5, 2.0] {
            let a = bessel_alphas(ell, 13);
            for n in 2..=12 {
                assert!(dpii_residual(&a, ell, n).unwrap() < 1e-7, "ell={ell} n={n}");
            }
        }
    }

    #[test]
    fn perturbation_is_visible() {
        let mut a = bessel_alphas(2.0, 13);
        a[5] += 1e-3;
        for n in 5..=7 {
            assert!(dpii_residual(&a, 2.0, n).unwrap() > 1e-4, "n={n}");
        }
    }

    #[test]
    fn forward_orbit_tracks_then_drifts() {
        let a = bessel_alphas(2.0, 13);
        let orbit = dpii_iterate(a[0], a[1], 2.0, 13).unwrap();
        for (n, (x, y)) in orbit.alphas.iter().zip(&a).take(5).enumerate() {
            assert!((x - y).abs() < 1e-4, "n={n}");
        }
        let blown = dpii_iterate(0.9, 0.9, 0.1, 50).unwrap();
        assert!(matches!(blown.diverged_at, Some(n) if n <= 3));
        assert!(blown.alphas.last().unwrap().abs() >= 1.0);
    }

    #[test]
    fn guards() {
        assert!(dpii_residual(&[0.0, 1.0, 0.0], 2.0, 2).is_err());
        assert!(dpii_residual(&[0.0, 0.1], 2.0, 2).is_err());
        assert!(dpii_residual(&[0.0, 0.1, 0.0], 0.0, 2).is_err());
        assert!(dpii_iterate(1.0, 0.0, 2.0, 5).is_err());
        let sys = OpucSystem::new(WeightSpec::jacobi(1.0, 0.5).unwrap(), 4).unwrap();
        assert!(real_alphas(sys.table()).is_err());
    }

    proptest! {
        #[test]
        fn odd_map(a in prop::collection::vec(-0.99f64..0.99, 3..12), ell in 0.1f64..10.0) {
            let neg: Vec<f64> = a.iter().map(|x| -x).collect();
            for n in 2..a.len() {
                prop_assert_eq!(dpii_residual(&a, ell, n).unwrap(), dpii_residual(&neg, ell, n).unwrap());
            }
        }

        #[test]
        fn step_matches_residual(a in prop::collection::vec(-0.99f64..0.99, 3..12), ell in 0.1f64..10.0) {
            for n in 2..a.len() {
                let step = dpii_step(a[n - 2], a[n - 1], ell, n).unwrap();
                let signed = dpii_signed_residual(&a, ell, n).unwrap();
                let scale = 1.0 + step.abs();
                prop_assert!((step - a[n] + signed).abs() <= 4.0 * f64::EPSILON * scale);
            }
        }
    }
}
