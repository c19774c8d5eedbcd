//! Trigonometric moments `c_j = int_0^{2 pi} e^{-i j theta} w(theta) d theta`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{OpucError, Result};
use crate::quadrature::{CircleRule, Refinement};
use crate::weights::{WeightKind, WeightSpec};

/// Upper bound on `ell` for which the analytic Bessel moments stay finite.
pub const BESSEL_ELL_MAX: f64 = 50.0;
pub const DEFAULT_MOMENT_NODES: usize = 4096;
pub const MAX_MOMENT_NODES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub enum MomentSource {
    Analytic,
    Quadrature { nodes: usize },
    User,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    jmin: i64,
    values: Vec<Complex64>,
    source: MomentSource,
}

impl MomentTable {
    /// `values[k]` holds `c_{jmin + k}`; the range must contain 0.
    pub fn new(jmin: i64, values: Vec<Complex64>, source: MomentSource) -> Result<Self> {
        let jmax = jmin + values.len() as i64 - 1;
        if jmin > 0 || jmax < 0 {
            return Err(OpucError::Moments(format!("index range [{jmin}, {jmax}] must contain 0")));
        }
        let t = MomentTable { jmin, values, source };
        let c0 = t.values[(-jmin) as usize];
        if !(c0.re > 0.0) || c0.im.abs() > 1e-12 * c0.re {
            return Err(OpucError::Moments(format!("c_0 must be real and positive, got {c0}")));
        }
        Ok(t)
    }

    /// Moments of `d theta`: `c_j = 2 pi delta_{j0}`.
    pub fn lebesgue(jmax: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); 2 * jmax + 1];
        v[jmax] = Complex64::new(2.0 * PI, 0.0);
        MomentTable { jmin: -(jmax as i64), values: v, source: MomentSource::Analytic }
    }

    pub fn jmin(&self) -> i64 {
        self.jmin
    }

    pub fn jmax(&self) -> i64 {
        self.jmin + self.values.len() as i64 - 1
    }

    pub fn source(&self) -> &MomentSource {
        &self.source
    }

    pub fn c0(&self) -> f64 {
        self.values[(-self.jmin) as usize].re
    }

    pub fn get(&self, j: i64) -> Result<Complex64> {
        if j < self.jmin || j > self.jmax() {
            return Err(OpucError::OutOfRange { index: j, available: format!("{}..={}", self.jmin, self.jmax()) });
        }
        Ok(self.values[(j - self.jmin) as usize])
    }

    /// `c_j`, falling back to `conj(c_{-j})` when only the mirror index is stored.
    pub fn get_hermitian(&self, j: i64) -> Result<Complex64> {
        self.get(j).or_else(|e| self.get(-j).map(|c| c.conj()).map_err(|_| e))
    }

    /// `max |c_{-j} - conj(c_j)|` over stored mirror pairs.
    pub fn hermitian_defect(&self) -> f64 {
        let m = self.jmax().min(-self.jmin);
        (0..=m).map(|j| (self.values[(-j - self.jmin) as usize] - self.values[(j - self.jmin) as usize].conj()).norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        MomentTable { jmin: self.jmin, values: self.values.iter().map(|c| c * s).collect(), source: self.source.clone() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values.iter().enumerate().map(move |(k, &c)| (self.jmin + k as i64, c))
    }

    /// Pivots `D_0..D_n` of the Hermitian Toeplitz matrix `[c_{j-k}]`
    /// (LDL* factorization). `D_k = 1/kappa_k^2`; a nonpositive pivot
    /// means the sequence is not a positive measure.
    pub fn toeplitz_pivots(&self, n: usize) -> Result<Vec<f64>> {
        let size = n + 1;
        let mut t = vec![vec![Complex64::new(0.0, 0.0); size]; size];
        for (j, row) in t.iter_mut().enumerate() {
            for (k, e) in row.iter_mut().enumerate() {
                *e = self.get_hermitian(j as i64 - k as i64)?;
            }
        }
        // Cholesky on the full matrix; size is small (desk scale).
        let mut l = vec![vec![Complex64::new(0.0, 0.0); size]; size];
        let mut pivots = Vec::with_capacity(size);
        for j in 0..size {
            let mut d = t[j][j];
            for k in 0..j {
                d -= l[j][k] * l[j][k].conj() * pivots[k];
            }
            if !(d.re > 0.0) {
                return Err(OpucError::Moments(format!("Toeplitz matrix is not positive definite at order {j}")));
            }
            pivots.push(d.re);
            l[j][j] = Complex64::new(1.0, 0.0);
            for i in j + 1..size {
                let mut s = t[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k].conj() * pivots[k];
                }
                l[i][j] = s / d.re;
            }
        }
        Ok(pivots)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["j", "re", "im"])?;
        for (j, c) in self.iter() {
            w.write_record([j.to_string(), format!("{:?}", c.re), format!("{:?}", c.im)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `j,re,im` rows. Missing negative indices are filled by
    /// Hermitian symmetry; the resulting range must be contiguous.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let headers = rd.headers()?.clone();
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        if names != ["j", "re", "im"] {
            return Err(OpucError::Moments(format!("expected header j,re,im, got {}", names.join(","))));
        }
        let mut entries = std::collections::BTreeMap::new();
        for rec in rd.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<&str> { rec.get(i).map(str::trim).ok_or_else(|| OpucError::Moments("short row".into())) };
            let j: i64 = parse(0)?.parse().map_err(|e| OpucError::Moments(format!("bad index: {e}")))?;
            let re: f64 = parse(1)?.parse().map_err(|e| OpucError::Moments(format!("bad value: {e}")))?;
            let im: f64 = parse(2)?.parse().map_err(|e| OpucError::Moments(format!("bad value: {e}")))?;
            if entries.insert(j, Complex64::new(re, im)).is_some() {
                return Err(OpucError::Moments(format!("duplicate index {j}")));
            }
        }
        let positive: Vec<(i64, Complex64)> = entries.iter().filter(|(j, _)| **j > 0).map(|(j, c)| (*j, *c)).collect();
        for (j, c) in positive {
            entries.entry(-j).or_insert(c.conj());
        }
        let (&jmin, _) = entries.iter().next().ok_or_else(|| OpucError::Moments("no rows".into()))?;
        let values: Vec<Complex64> = entries.values().copied().collect();
        let jmax = *entries.keys().next_back().unwrap();
        if (jmax - jmin + 1) as usize != values.len() {
            return Err(OpucError::Moments("moment indices are not contiguous".into()));
        }
        MomentTable::new(jmin, values, MomentSource::User)
    }
}

/// `I_j(x)` by its power series, for `0 <= x <= 50`.
pub fn bessel_i(j: u32, x: f64) -> f64 {
    let h = x / 2.0;
    let mut term = 1.0;
    for k in 1..=j {
        term *= h / k as f64;
    }
    let mut sum = term;
    let h2 = h * h;
    let mut m = 0.0;
    while term > 1e-17 * sum {
        m += 1.0;
        term *= h2 / (m * (m + j as f64));
        sum += term;
    }
    sum
}

/// Exact moments `c_j = 2 pi I_|j|(ell)` of the Bessel weight with `H = 1`.
pub fn bessel_moments_analytic(ell: f64, jmax: usize) -> Result<MomentTable> {
    if !(0.0..=BESSEL_ELL_MAX).contains(&ell) {
        return Err(OpucError::InvalidParameter(format!("analytic Bessel moments need 0 <= ell <= {BESSEL_ELL_MAX}, got {ell}")));
    }
    let half: Vec<f64> = (0..=jmax).map(|j| 2.0 * PI * bessel_i(j as u32, ell)).collect();
    let values = (-(jmax as i64)..=jmax as i64).map(|j| Complex64::new(half[j.unsigned_abs() as usize], 0.0)).collect();
    MomentTable::new(-(jmax as i64), values, MomentSource::Analytic)
}

/// Tolerance tried first when the default one is looser.
pub const PREFERRED_MOMENT_RTOL: f64 = 1e-12;

/// Default (loosest accepted) convergence tolerance for quadrature moments.
pub fn default_moment_rtol(w: &WeightSpec) -> f64 {
    match w.kind() {
        WeightKind::Jacobi { .. } => 1e-9,
        _ => 1e-12,
    }
}

/// Moments by the periodic trapezoid rule, starting from `nodes` points
/// and doubling up to [`MAX_MOMENT_NODES`].
pub fn moments_quadrature(w: &WeightSpec, jmax: usize, nodes: usize, rtol: f64) -> Result<MomentTable> {
    if nodes < 4 * jmax.max(1) || !nodes.is_power_of_two() {
        return Err(OpucError::InvalidParameter(format!("node count {nodes} must be a power of two >= 4 jmax")));
    }
    // Scale after summation so moments are exactly linear in it.
    let rule = CircleRule::new(w.unscaled(), nodes, MAX_MOMENT_NODES.max(nodes))?;
    Ok(moments_with_rule(&rule, jmax, rtol)?.scaled(w.scale()))
}

pub(crate) fn moments_with_rule(rule: &CircleRule, jmax: usize, rtol: f64) -> Result<MomentTable> {
    let width = 2 * jmax + 1;
    let r = rule.integrate(width, Refinement::Adaptive { rtol }, |nd, out| {
        // out[jmax + j] = w t^{-j}
        let tinv = nd.t.conj();
        out[jmax] = nd.w;
        let (mut up, mut down) = (nd.w, nd.w);
        for j in 1..=jmax {
            down *= tinv;
            up *= nd.t;
            out[jmax + j] = down;
            out[jmax - j] = up;
        }
    })?;
    let values = r.values.into_iter().map(|v| v * (2.0 * PI)).collect();
    MomentTable::new(-(jmax as i64), values, MomentSource::Quadrature { nodes: r.nodes })
}

/// Moments for any weight: analytic where available, quadrature otherwise.
pub fn moments_for(w: &WeightSpec, jmax: usize) -> Result<MomentTable> {
    match w.kind() {
        WeightKind::Custom { moments } => {
            if moments.jmax() < jmax as i64 && -moments.jmin() < jmax as i64 {
                return Err(OpucError::OutOfRange { index: jmax as i64, available: format!("{}..={}", moments.jmin(), moments.jmax()) });
            }
            Ok(moments.scaled(w.scale()))
        }
        WeightKind::Lebesgue if w.h_is_trivial() => Ok(MomentTable::lebesgue(jmax).scaled(w.scale() * w.h_series()[0].re)),
        WeightKind::Bessel { ell } if w.h_is_trivial() && w.h_series()[0].im == 0.0 && *ell <= BESSEL_ELL_MAX => {
            Ok(bessel_moments_analytic(*ell, jmax)?.scaled(w.scale() * w.h_series()[0].re))
        }
        _ => {
            let nodes = DEFAULT_MOMENT_NODES.max((4 * jmax).next_power_of_two());
            let rtol = default_moment_rtol(w);
            if rtol <= PREFERRED_MOMENT_RTOL {
                return moments_quadrature(w, jmax, nodes, rtol);
            }
            // Tighter target first; node values are cached, so the retry is cheap.
            let rule = CircleRule::new(w.unscaled(), nodes, MAX_MOMENT_NODES)?;
            match moments_with_rule(&rule, jmax, PREFERRED_MOMENT_RTOL) {
                Err(OpucError::Accuracy { .. }) => Ok(moments_with_rule(&rule, jmax, rtol)?.scaled(w.scale())),
                r => Ok(r?.scaled(w.scale())),
            }
        }
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // mpmath reference values of I_j(x).
    const I_REF: &[(f64, u32, f64)] = &[
        (0.5, 0, 1.0634833707413235193),
        (0.5, 1, 0.25789430539089631636),
        (0.5, 2, 0.031906149177738253813),
        (0.5, 5, 8.2231713131092639616e-6),
        (0.5, 24, 5.740374439697324591e-39),
        (2.0, 0, 2.2795853023360672674),
        (2.0, 1, 1.5906368546373290634),
        (2.0, 2, 0.68894844769873820405),
        (2.0, 5, 0.0098256793231317023208),
        (2.0, 24, 1.6774623158311572441e-24),
        (5.0, 0, 27.239871823604446895),
        (5.0, 1, 24.335642142450527199),
        (5.0, 2, 17.505614966624236015),
        (5.0, 5, 2.1579745473225464669),
        (5.0, 24, 7.3436590879774800579e-15),
        (50.0, 0, 2.9325537838493363267e20),
        (50.0, 1, 2.9030785901035567968e20),
        (50.0, 24, 972273934090131413.24),
    ];

    #[test]
    fn bessel_series_matches_reference() {
        for &(x, j, want) in I_REF {
            let got = bessel_i(j, x);
            assert!(((got - want) / want).abs() < 2e-15, "I_{j}({x}) = {got}, want {want}");
        }
        assert_eq!(bessel_i(0, 0.0), 1.0);
        assert_eq!(bessel_i(3, 0.0), 0.0);
    }

    #[test]
    fn analytic_bessel_examples() {
        let t = bessel_moments_analytic(2.0, 3).unwrap();
        assert!((t.get(1).unwrap().re - 2.0 * PI * 1.5906368546373290634).abs() < 1e-13);
        assert!((t.get(0).unwrap().re - 2.0 * PI * 2.2795853023360672674).abs() < 1e-13);
        assert_eq!(t.get(-2).unwrap(), t.get(2).unwrap());
        let z = bessel_moments_analytic(0.0, 4).unwrap();
        assert_eq!(z, MomentTable::lebesgue(4));
        assert!(bessel_moments_analytic(51.0, 2).is_err());
    }

    #[test]
    fn quadrature_lebesgue() {
        let t = moments_quadrature(&WeightSpec::lebesgue(), 3, 16, 1e-12).unwrap();
        assert!((t.c0() - 2.0 * PI).abs() < 1e-14);
        for j in [-3, -2, -1, 1, 2, 3] {
            assert!(t.get(j).unwrap().norm() < 1e-14);
        }
    }

    #[test]
    fn quadrature_matches_analytic_bessel() {
        for ell in [0.5, 2.0, 5.0] {
            let w = WeightSpec::bessel(ell).unwrap();
            let q = moments_quadrature(&w, 24, 4096, 1e-12).unwrap();
            let a = bessel_moments_analytic(ell, 24).unwrap();
            for j in -24..=24 {
                let d = (q.get(j).unwrap() - a.get(j).unwrap()).norm();
                assert!(d < 1e-10 * a.c0(), "ell={ell}, j={j}: {d}");
            }
        }
    }

    #[test]
    fn quadrature_jacobi_is_hermitian() {
        for (lam, eta, rtol) in [(1.0, 0.0, 1e-12), (1.0, 0.5, 1e-12), (0.75, 0.2, 1e-12), (0.3, -0.7, 1e-12), (-0.2, 0.3, 1e-9)] {
            let t = moments_quadrature(&WeightSpec::jacobi(lam, eta).unwrap(), 12, 4096, rtol).unwrap();
            assert!(t.hermitian_defect() < 1e-13 * t.c0());
        }
    }

    #[test]
    fn rough_jacobi_weight_reports_accuracy() {
        // |theta|^{-0.4} at the endpoint is still singular after the substitution.
        let r = moments_quadrature(&WeightSpec::jacobi(-0.2, 0.3).unwrap(), 4, 4096, 1e-12);
        assert!(matches!(r, Err(OpucError::Accuracy { .. })));
    }

    #[test]
    fn toeplitz_pivots_lebesgue() {
        let p = MomentTable::lebesgue(5).toeplitz_pivots(4).unwrap();
        assert!(p.iter().all(|&d| (d - 2.0 * PI).abs() < 1e-14));
    }

    #[test]
    fn non_positive_sequence_is_rejected() {
        let v = vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)];
        let t = MomentTable::new(-1, v, MomentSource::User).unwrap();
        assert!(t.toeplitz_pivots(1).is_ok());
        let v = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let t = MomentTable::new(-1, v, MomentSource::User).unwrap();
        assert!(t.toeplitz_pivots(1).is_err());
    }

    #[test]
    fn csv_round_trip_and_hermitian_fill() {
        let t = bessel_moments_analytic(2.0, 4).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = MomentTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.jmin(), -4);
        for j in -4..=4 {
            assert_eq!(back.get(j).unwrap(), t.get(j).unwrap());
        }
        let half = "j,re,im\n0,6.0,0\n1,1.0,0.5\n2,0.25,-0.1\n";
        let t = MomentTable::read_csv(half.as_bytes()).unwrap();
        assert_eq!(t.jmin(), -2);
        assert_eq!(t.get(-1).unwrap(), Complex64::new(1.0, -0.5));
        assert_eq!(*t.source(), MomentSource::User);
        assert!(MomentTable::read_csv("a,b,c\n".as_bytes()).is_err());
        assert!(MomentTable::read_csv("j,re,im\n0,1,0\n2,1,0\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn bessel_moments_are_hermitian(ell in 0.0f64..10.0) {
            let t = bessel_moments_analytic(ell, 16).unwrap();
            prop_assert!(t.hermitian_defect() < 1e-13 * t.c0());
        }

        #[test]
        fn quadrature_is_linear_in_scale(s in 0.01f64..100.0) {
            let w = WeightSpec::jacobi(1.0, 0.5).unwrap();
            let a = moments_quadrature(&w, 4, 4096, 1e-9).unwrap();
            let b = moments_quadrature(&w.with_scale(s).unwrap(), 4, 4096, 1e-9).unwrap();
            for j in -4..=4 {
                prop_assert_eq!(a.get(j).unwrap() * s, b.get(j).unwrap());
            }
        }
    }
}
