//! Second-kind functions
//!
//! ```text
//! G_n(z)       = (1/2 pi i) oint Phi_n(t)     nu(t) / (t^n (t - z)) dt
//! G*_{n-1}(z)  = (1/2 pi i) oint Phi*_{n-1}(t) nu(t) / (t^n (t - z)) dt
//! ```
//!
//! evaluated off the unit circle by the nested trapezoid rule, together
//! with their first two derivatives (powers of the Cauchy kernel).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{OpucError, Result};
use crate::poly::Poly;
use crate::quadrature::Refinement;
use crate::system::OpucSystem;

/// Points closer than this to the circle are refused in standard mode.
pub const BOUNDARY_EXCLUSION: f64 = 0.02;
/// Points this close to the circle count as lying on it.
pub const ON_CIRCLE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Inside,
    Outside,
    Boundary,
}

pub fn classify(z: Complex64) -> Region {
    let r = z.norm();
    if (r - 1.0).abs() <= ON_CIRCLE {
        Region::Boundary
    } else if r < 1.0 {
        Region::Inside
    } else {
        Region::Outside
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalMode {
    /// Adaptive, refusing the annulus `0.98 < |z| < 1.02`.
    Standard,
    /// Adaptive, accepting any point off the circle.
    Boundary,
    /// Exactly this many nodes, any point off the circle.
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub rtol: f64,
    pub mode: EvalMode,
}

impl EvalOptions {
    pub fn standard(rtol: f64) -> Self {
        EvalOptions { rtol, mode: EvalMode::Standard }
    }

    pub fn boundary(rtol: f64) -> Self {
        EvalOptions { rtol, mode: EvalMode::Boundary }
    }

    pub fn fixed(nodes: usize) -> Self {
        EvalOptions { rtol: 0.0, mode: EvalMode::Fixed(nodes) }
    }

    fn refinement(&self) -> Refinement {
        match self.mode {
            EvalMode::Fixed(nodes) => Refinement::Fixed { nodes },
            _ => Refinement::Adaptive { rtol: self.rtol },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CauchyEval {
    pub n: usize,
    pub z: Complex64,
    pub region: Region,
    pub g: Complex64,
    pub gstar: Complex64,
    pub dg: Complex64,
    pub dgstar: Complex64,
    pub d2g: Complex64,
    pub d2gstar: Complex64,
    pub quad_nodes: usize,
}

fn check_point(z: Complex64, mode: EvalMode) -> Result<Region> {
    let region = classify(z);
    let distance = (z.norm() - 1.0).abs();
    if region == Region::Boundary || (mode == EvalMode::Standard && distance < BOUNDARY_EXCLUSION) {
        return Err(OpucError::NearBoundary { z, distance });
    }
    if !z.is_finite() {
        return Err(OpucError::InvalidParameter(format!("evaluation point {z} is not finite")));
    }
    Ok(region)
}

/// For each polynomial `p`, the transforms of `p(t) nu(t) t^{1-n}` against
/// the kernels `1/(t-z)`, `1/(t-z)^2`, `2/(t-z)^3`. Without `derivatives`
/// only the first kernel is integrated and the other slots are zero.
fn transforms(
    sys: &OpucSystem,
    polys: &[&Poly],
    n: usize,
    z: Complex64,
    opts: EvalOptions,
    derivatives: bool,
) -> Result<(Vec<[Complex64; 3]>, usize)> {
    check_point(z, opts.mode)?;
    let rule = sys.rule()?;
    let m = polys.len();
    let per = if derivatives { 3 } else { 1 };
    let r = rule.integrate(per * m, opts.refinement(), |nd, out| {
        // |t| = 1, so t^{1-n} = conj(t)^{n-1}
        let base = nd.w * if n == 0 { nd.t } else { nd.t.conj().powi(n as i32 - 1) };
        let k = (nd.t - z).inv();
        for (i, p) in polys.iter().enumerate() {
            let f = p.eval(nd.t) * base * k;
            out[per * i] = f;
            if derivatives {
                out[per * i + 1] = f * k;
                out[per * i + 2] = f * k * k * 2.0;
            }
        }
    })?;
    let zero = Complex64::new(0.0, 0.0);
    let vals = (0..m)
        .map(|i| if derivatives { [r.values[3 * i], r.values[3 * i + 1], r.values[3 * i + 2]] } else { [r.values[i], zero, zero] })
        .collect();
    Ok((vals, r.nodes))
}

/// `G_n`, `G*_{n-1}` and their first two derivatives at `z` (`n >= 1`).
pub fn cauchy_eval(sys: &OpucSystem, n: usize, z: Complex64, opts: EvalOptions) -> Result<CauchyEval> {
    if n == 0 {
        return Err(OpucError::InvalidParameter("G*_{n-1} needs n >= 1".into()));
    }
    sys.require(n)?;
    let region = check_point(z, opts.mode)?;
    let (v, nodes) = transforms(sys, &[&sys.pair(n)?.phi, &sys.pair(n - 1)?.phistar], n, z, opts, true)?;
    Ok(CauchyEval {
        n,
        z,
        region,
        g: v[0][0],
        gstar: v[1][0],
        dg: v[0][1],
        dgstar: v[1][1],
        d2g: v[0][2],
        d2gstar: v[1][2],
        quad_nodes: nodes,
    })
}

/// `G_n(z)`; also defined for `n = 0`.
pub fn cauchy_g(sys: &OpucSystem, n: usize, z: Complex64, rtol: f64) -> Result<Complex64> {
    sys.require(n)?;
    let (v, _) = transforms(sys, &[&sys.pair(n)?.phi], n, z, EvalOptions::standard(rtol), false)?;
    Ok(v[0][0])
}

/// `G*_{n-1}(z)` for `n >= 1`.
pub fn cauchy_gstar(sys: &OpucSystem, n: usize, z: Complex64, rtol: f64) -> Result<Complex64> {
    if n == 0 {
        return Err(OpucError::InvalidParameter("G*_{n-1} needs n >= 1".into()));
    }
    sys.require(n)?;
    let (v, _) = transforms(sys, &[&sys.pair(n - 1)?.phistar], n, z, EvalOptions::standard(rtol), false)?;
    Ok(v[0][0])
}

/// `(G_n(z), G*_{n-1}(z), nodes)` without derivatives (`n >= 1`).
pub fn cauchy_values(sys: &OpucSystem, n: usize, z: Complex64, opts: EvalOptions) -> Result<(Complex64, Complex64, usize)> {
    if n == 0 {
        return Err(OpucError::InvalidParameter("G*_{n-1} needs n >= 1".into()));
    }
    sys.require(n)?;
    let (v, nodes) = transforms(sys, &[&sys.pair(n)?.phi, &sys.pair(n - 1)?.phistar], n, z, opts, false)?;
    Ok((v[0][0], v[1][0], nodes))
}

/// `(G_n'(z), G*_{n-1}'(z))`.
pub fn cauchy_derivatives(sys: &OpucSystem, n: usize, z: Complex64, rtol: f64) -> Result<(Complex64, Complex64)> {
    let e = cauchy_eval(sys, n, z, EvalOptions::standard(rtol))?;
    Ok((e.dg, e.dgstar))
}

/// Leading Laurent coefficients at infinity:
/// `g` holds the coefficients of `z^{-(n+1)}, z^{-(n+2)}` in `G_n`,
/// `gstar` those of `z^{-n}, z^{-(n+1)}, z^{-(n+2)}` in `G*_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentTail {
    pub n: usize,
    pub g: [Complex64; 2],
    pub gstar: [Complex64; 3],
    /// Change between `samples` and `2 samples` points (0 for closed forms).
    pub error_estimate: f64,
}

/// Samples `G_n`, `G*_{n-1}` on `|z| = radius` and extracts the tail by a
/// discrete Fourier sum.
pub fn laurent_tail(sys: &OpucSystem, n: usize, radius: f64, samples: usize) -> Result<LaurentTail> {
    if !(radius >= 2.0) {
        return Err(OpucError::InvalidParameter(format!("tail radius must be >= 2, got {radius}")));
    }
    if samples < 4 {
        return Err(OpucError::InvalidParameter("at least 4 samples are needed".into()));
    }
    let total = 2 * samples;
    let pts: Vec<Complex64> = (0..total).map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / total as f64)).collect();
    let vals: Vec<(Complex64, Complex64, usize)> =
        pts.iter().map(|&z| cauchy_values(sys, n, z, EvalOptions::standard(sys.rtol()))).collect::<Result<_>>()?;
    let coeff = |step: usize, m: usize, pick: &dyn Fn(&(Complex64, Complex64, usize)) -> Complex64| -> Complex64 {
        let idx: Vec<usize> = (0..total).step_by(step).collect();
        let s: Complex64 = idx.iter().map(|&k| pick(&vals[k]) * pts[k].powi(m as i32)).sum();
        s / idx.len() as f64
    };
    let g = |e: &(Complex64, Complex64, usize)| e.0;
    let gs = |e: &(Complex64, Complex64, usize)| e.1;
    let fine = LaurentTail {
        n,
        g: [coeff(1, n + 1, &g), coeff(1, n + 2, &g)],
        gstar: [coeff(1, n, &gs), coeff(1, n + 1, &gs), coeff(1, n + 2, &gs)],
        error_estimate: 0.0,
    };
    let coarse_g = [coeff(2, n + 1, &g), coeff(2, n + 2, &g)];
    let coarse_gs = [coeff(2, n, &gs), coeff(2, n + 1, &gs), coeff(2, n + 2, &gs)];
    let err = fine.g.iter().zip(&coarse_g).chain(fine.gstar.iter().zip(&coarse_gs)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(LaurentTail { error_estimate: err, ..fine })
}

/// The tail predicted by the coefficient table (needs `n + 2 <= nmax`).
pub fn laurent_tail_expected(sys: &OpucSystem, n: usize) -> Result<LaurentTail> {
    if n == 0 {
        return Err(OpucError::InvalidParameter("G*_{n-1} needs n >= 1".into()));
    }
    sys.require(n + 2)?;
    let v = sys.table();
    let (a, a1) = (v.alphas[n].conj(), v.alphas[n + 1].conj());
    let (bm, b, b1) = (v.b[n - 1], v.b[n], v.b[n + 1]);
    let p1n = v.phi1[n];
    let p1n1 = v.phi1[n + 1];
    let p2n1 = sys.pair(n + 1)?.phi.coeff(n - 1);
    Ok(LaurentTail {
        n,
        g: [-a / b, a / b * p1n1 - a1 / b1],
        gstar: [Complex64::new(-1.0 / bm, 0.0), p1n / bm, -(p1n * p1n1 - p2n1) / bm],
        error_estimate: 0.0,
    })
}

/// `(|G_n - G_{n-1} + conj(alpha_{n-1}) G*_{n-1}|, |z G*_n - G*_{n-1} + alpha_{n-1} G_{n-1}|)`.
pub fn g_recurrence_residuals(sys: &OpucSystem, n: usize, z: Complex64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(OpucError::InvalidParameter("the recurrences need n >= 1".into()));
    }
    let opts = EvalOptions::standard(sys.rtol());
    let cur = cauchy_eval(sys, n, z, opts)?;
    let next = cauchy_eval(sys, n + 1, z, opts)?;
    let g_prev = cauchy_g(sys, n - 1, z, sys.rtol())?;
    let a = sys.table().alphas[n - 1];
    let r1 = (cur.g - g_prev + a.conj() * cur.gstar).norm();
    let r2 = (z * next.gstar - cur.gstar + a * g_prev).norm();
    Ok((r1, r2))
}
