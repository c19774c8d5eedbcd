//! Weight functions on the unit circle.
//!
//! A weight is stored through its analytic factor `nu(z)`, with
//! `w(theta) = nu(e^{i theta})`:
//!
//! * Lebesgue: `nu = 1`;
//! * modified Bessel: `nu(z) = exp(ell (z + 1/z) / 2) H(z)`;
//! * modified Jacobi: `nu(z) = (-z)^{-conj(b)} (1 - z)^{b + conj(b)} H(z)`;
//! * custom: moments only, no pointwise values.
//!
//! `H` is an entire factor given by truncated Taylor coefficients. The
//! Jacobi powers use principal branches, which makes the weight continuous
//! on the circle minus `z = 1`. Off the circle only the single-valued
//! logarithmic derivative `nu'/nu` is exposed.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{OpucError, Result};
use crate::moments::MomentTable;
use crate::poly::Poly;

/// Default number of Taylor terms kept for `H'/H`.
pub const DEFAULT_SERIES_TRUNCATION: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Lebesgue,
    Bessel {
        ell: f64,
    },
    /// `b = lambda + i eta` with `lambda > -1/2`.
    Jacobi {
        b: Complex64,
    },
    Custom {
        moments: MomentTable,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    kind: WeightKind,
    h_series: Vec<Complex64>,
    scale: f64,
    // Taylor coefficients of H'/H, empty when H is constant.
    h_logder: Vec<Complex64>,
}

/// Pearson data `(A, q)` with `z A(z) nu'(z) = q(z) nu(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PearsonData {
    pub a: Poly,
    /// Truncated Taylor series of `q` about 0.
    pub q: Poly,
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl WeightSpec {
    fn with_kind(kind: WeightKind) -> Self {
        WeightSpec { kind, h_series: vec![one()], scale: 1.0, h_logder: Vec::new() }
    }

    pub fn lebesgue() -> Self {
        Self::with_kind(WeightKind::Lebesgue)
    }

    /// `ell = 0` is accepted and coincides with the Lebesgue weight.
    pub fn bessel(ell: f64) -> Result<Self> {
        if !(ell >= 0.0) || !ell.is_finite() {
            return Err(OpucError::InvalidParameter(format!("Bessel parameter ell must be >= 0, got {ell}")));
        }
        Ok(Self::with_kind(WeightKind::Bessel { ell }))
    }

    pub fn jacobi(lambda: f64, eta: f64) -> Result<Self> {
        if !(lambda > -0.5) || !lambda.is_finite() || !eta.is_finite() {
            return Err(OpucError::InvalidParameter(format!(
                "Jacobi parameter needs Re(b) = lambda > -1/2, got lambda = {lambda}, eta = {eta}"
            )));
        }
        Ok(Self::with_kind(WeightKind::Jacobi { b: Complex64::new(lambda, eta) }))
    }

    pub fn custom(moments: MomentTable) -> Self {
        Self::with_kind(WeightKind::Custom { moments })
    }

    /// Attaches the entire factor `H` with the default series truncation.
    pub fn with_h(self, h_series: Vec<Complex64>) -> Result<Self> {
        self.with_h_truncated(h_series, DEFAULT_SERIES_TRUNCATION)
    }

    pub fn with_h_truncated(mut self, h_series: Vec<Complex64>, truncation: usize) -> Result<Self> {
        if h_series.is_empty() || h_series[0].norm() == 0.0 {
            return Err(OpucError::InvalidParameter("H must satisfy H(0) != 0".into()));
        }
        self.h_logder = series_log_derivative(&h_series, truncation);
        self.h_series = h_series;
        Ok(self)
    }

    /// The same weight with scale 1.
    pub fn unscaled(&self) -> Self {
        WeightSpec { scale: 1.0, ..self.clone() }
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(OpucError::InvalidParameter(format!("scale must be positive, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn h_series(&self) -> &[Complex64] {
        &self.h_series
    }

    /// True when `H` is a constant, which is what the closed-form
    /// structure matrices assume.
    pub fn h_is_trivial(&self) -> bool {
        self.h_series.iter().skip(1).all(|c| c.norm() == 0.0)
    }

    pub fn is_pointwise(&self) -> bool {
        !matches!(self.kind, WeightKind::Custom { .. })
    }

    /// Finite singular points of `nu'/nu` (the zero set of `z A(z)`).
    pub fn singular_points(&self) -> Vec<Complex64> {
        match self.kind {
            WeightKind::Lebesgue => vec![],
            WeightKind::Bessel { ell: 0.0 } => vec![],
            WeightKind::Bessel { .. } => vec![Complex64::new(0.0, 0.0)],
            WeightKind::Jacobi { b } if b.norm() == 0.0 => vec![],
            WeightKind::Jacobi { .. } => vec![Complex64::new(0.0, 0.0), one()],
            WeightKind::Custom { .. } => vec![],
        }
    }

    pub fn describe(&self) -> String {
        let base = match &self.kind {
            WeightKind::Lebesgue => "lebesgue".to_string(),
            WeightKind::Bessel { ell } => format!("bessel(ell={ell})"),
            WeightKind::Jacobi { b } => format!("jacobi(lambda={}, eta={})", b.re, b.im),
            WeightKind::Custom { moments } => format!("custom(j={}..{})", moments.jmin(), moments.jmax()),
        };
        let mut s = base;
        if !self.h_is_trivial() {
            s.push_str(&format!(", h_terms={}", self.h_series.len()));
        }
        if self.scale != 1.0 {
            s.push_str(&format!(", scale={}", self.scale));
        }
        s
    }

    fn h_at(&self, z: Complex64) -> Complex64 {
        Poly::new(self.h_series.clone()).eval(z)
    }

    /// `w(theta) = scale * nu(e^{i theta})`.
    pub fn eval_weight(&self, theta: f64) -> Result<Complex64> {
        let z = Complex64::from_polar(1.0, theta);
        let base = match self.kind {
            WeightKind::Lebesgue => 1.0,
            WeightKind::Bessel { ell } => (ell * theta.cos()).exp(),
            WeightKind::Jacobi { b } => {
                // signed angle in (-pi, pi]
                let mut theta = theta;
                if !(theta > -PI && theta <= PI) {
                    theta = theta.rem_euclid(2.0 * PI);
                    if theta > PI {
                        theta -= 2.0 * PI;
                    }
                }
                if theta == 0.0 {
                    if b.re > 0.0 {
                        0.0
                    } else {
                        return Err(OpucError::Pole { point: one(), what: "the Jacobi weight" });
                    }
                } else {
                    jacobi_on_circle(b, theta)
                }
            }
            WeightKind::Custom { .. } => {
                return Err(OpucError::Unsupported { op: "eval_weight", what: "custom (moment-only) weights".into() })
            }
        };
        let h = if self.h_is_trivial() { self.h_series[0] } else { self.h_at(z) };
        Ok(h * base * self.scale)
    }

    /// Weight value used by quadrature nodes. Identical to [`eval_weight`]
    /// except at the Jacobi point `theta = 0`, where the symmetric limit is
    /// used (and an integrable singularity is dropped).
    ///
    /// [`eval_weight`]: WeightSpec::eval_weight
    pub(crate) fn node_value(&self, theta: f64) -> Result<Complex64> {
        if let WeightKind::Jacobi { b } = self.kind {
            if theta == 0.0 {
                let limit = if b.re > 0.0 {
                    0.0
                } else if b.re == 0.0 {
                    // one-sided limits e^{eta pi} and e^{-eta pi}
                    (b.im * PI).cosh()
                } else {
                    0.0
                };
                return Ok(self.h_series[0] * limit * self.scale);
            }
        }
        self.eval_weight(theta)
    }

    fn check_singular(&self, z: Complex64) -> Result<()> {
        for p in self.singular_points() {
            if z == p {
                return Err(OpucError::Pole { point: z, what: "the weight's logarithmic derivative" });
            }
        }
        Ok(())
    }

    /// `nu'(z)/nu(z)`, independent of the scale.
    pub fn log_derivative(&self, z: Complex64) -> Result<Complex64> {
        self.check_singular(z)?;
        let base = match self.kind {
            WeightKind::Lebesgue => Complex64::new(0.0, 0.0),
            WeightKind::Bessel { ell } => (one() - (z * z).inv()) * (ell / 2.0),
            WeightKind::Jacobi { b } => -b.conj() / z - (b + b.conj()) / (one() - z),
            WeightKind::Custom { .. } => {
                return Err(OpucError::Unsupported { op: "log_derivative", what: "custom (moment-only) weights".into() })
            }
        };
        Ok(base + Poly::new(self.h_logder.clone()).eval(z))
    }

    /// Derivative of [`log_derivative`](WeightSpec::log_derivative).
    pub fn log_derivative_prime(&self, z: Complex64) -> Result<Complex64> {
        self.check_singular(z)?;
        let base = match self.kind {
            WeightKind::Lebesgue => Complex64::new(0.0, 0.0),
            WeightKind::Bessel { ell } => (z * z * z).inv() * ell,
            WeightKind::Jacobi { b } => {
                let w = one() - z;
                b.conj() / (z * z) - (b + b.conj()) / (w * w)
            }
            WeightKind::Custom { .. } => {
                return Err(OpucError::Unsupported { op: "log_derivative_prime", what: "custom (moment-only) weights".into() })
            }
        };
        Ok(base + Poly::new(self.h_logder.clone()).derivative().eval(z))
    }

    /// Pearson pair `(A, q)`; `q` is truncated like `H'/H`.
    pub fn pearson_data(&self) -> Result<PearsonData> {
        let zero = Complex64::new(0.0, 0.0);
        let logder_h = Poly::new(self.h_logder.clone());
        let (a, q_base) = match self.kind {
            WeightKind::Lebesgue => (Poly::constant(one()), Poly::zero()),
            WeightKind::Bessel { ell } => {
                let h = ell / 2.0;
                (Poly::monomial(1), Poly::new(vec![Complex64::new(-h, 0.0), zero, Complex64::new(h, 0.0)]))
            }
            WeightKind::Jacobi { b } => (Poly::linear(one(), -one()), Poly::linear(-b.conj(), -b)),
            WeightKind::Custom { .. } => {
                return Err(OpucError::Unsupported { op: "pearson_data", what: "custom (moment-only) weights".into() })
            }
        };
        let za = a.shift();
        let mut q = &q_base + &(&za * &logder_h);
        if !self.h_logder.is_empty() {
            q.0.truncate(self.h_logder.len().max(q_base.0.len()));
        }
        while q.0.last().is_some_and(|c| c.norm() == 0.0) {
            q.0.pop();
        }
        Ok(PearsonData { a, q })
    }
}

// (2 sin(theta/2))^{2 lambda} e^{-eta (theta - pi)} for theta in (0, 2 pi):
// the principal-branch value of (-z)^{-conj b} (1 - z)^{b + conj b}.
/// Jacobi weight at `e^{i theta}` for a signed angle `theta != 0`; the
/// argument of `-z` is taken in `(-pi, pi)`, i.e. `theta - pi` for
/// `theta` in `(0, 2 pi)`.
fn jacobi_on_circle(b: Complex64, theta: f64) -> f64 {
    let s = 2.0 * (theta / 2.0).sin().abs();
    let phase = if theta > 0.0 { theta } else { theta + 2.0 * PI };
    s.powf(2.0 * b.re) * (-b.im * (phase - PI)).exp()
}

/// Taylor coefficients of `H'/H` up to `truncation` terms.
fn series_log_derivative(h: &[Complex64], truncation: usize) -> Vec<Complex64> {
    if h.iter().skip(1).all(|c| c.norm() == 0.0) {
        return Vec::new();
    }
    let dh: Vec<Complex64> = (0..truncation).map(|k| h.get(k + 1).map_or(Complex64::new(0.0, 0.0), |&c| c * (k + 1) as f64)).collect();
    let h0 = h[0];
    let mut r: Vec<Complex64> = Vec::with_capacity(truncation);
    for k in 0..truncation {
        let mut acc = dh[k];
        for j in 1..=k.min(h.len() - 1) {
            acc -= h[j] * r[k - j];
        }
        r.push(acc / h0);
    }
    r
}
