//! Nested periodic trapezoid rule on the unit circle.
//!
//! Level 0 uses the nodes `theta_j = 2 pi j / n0`; level `k >= 1` adds the
//! midpoints `2 pi (2j + 1) / (n0 2^k)`, so every level reuses all earlier
//! evaluations. Weight values are cached per level and shared by every
//! integral computed with the same rule. Sums run sequentially in node
//! order, which keeps results bit-identical across runs and thread counts.
//!
//! Jacobi weights are not smooth at `theta = 0`. For them the rule runs in
//! a variable `s` with `theta = s - sin s`, which is periodic, fixes `0` and
//! `2 pi`, and has `d theta/ds = 1 - cos s` vanishing to second order at
//! `s = 0`. The Jacobian is folded into the node weight, so integrands see
//! the same `Node` either way.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{OpucError, Result};
use crate::weights::{WeightKind, WeightSpec};

/// One quadrature node: angle, point on the circle, weight value there
/// (times the Jacobian of the substitution, if any).
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub theta: f64,
    pub t: Complex64,
    pub w: Complex64,
}

/// Result of an adaptive integration. `values` are node averages
/// `(1/N) sum f`, i.e. the integral over `[0, 2 pi)` divided by `2 pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub values: Vec<Complex64>,
    pub nodes: usize,
    /// Largest componentwise change over the last doubling.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Refinement {
    /// Double until two successive levels agree to `rtol`.
    Adaptive { rtol: f64 },
    /// Use exactly this many nodes (`n0 * 2^k`).
    Fixed { nodes: usize },
}

#[derive(Debug)]
pub struct CircleRule {
    weight: WeightSpec,
    n0: usize,
    max_nodes: usize,
    levels: Vec<OnceLock<Vec<Node>>>,
    substitute: bool,
}

/// `theta = s - sin s` and `d theta/ds` at `s = 2 pi m / denom`. Angles past
/// `pi` are returned as `theta - 2 pi`, so points next to `theta = 0` keep
/// full precision on both sides.
fn substitution(m: usize, denom: usize) -> (f64, f64) {
    let psi = |u: f64| {
        if u < 1.0 {
            // s - sin s = s^3/3! - s^5/5! + ..., ten terms reach u^21/21!
            let (mut term, mut sum) = (u * u * u / 6.0, 0.0f64);
            for k in (3..23).step_by(2) {
                sum += term;
                term *= -u * u / ((k + 1) * (k + 2)) as f64;
            }
            sum
        } else {
            u - u.sin()
        }
    };
    let (mirror, k) = if 2 * m <= denom { (false, m) } else { (true, denom - m) };
    let u = 2.0 * PI * k as f64 / denom as f64;
    let half = (u / 2.0).sin();
    let jac = 2.0 * half * half;
    if mirror {
        (-psi(u), jac)
    } else {
        (psi(u), jac)
    }
}

impl CircleRule {
    pub fn new(weight: WeightSpec, n0: usize, max_nodes: usize) -> Result<Self> {
        if !weight.is_pointwise() {
            return Err(OpucError::Unsupported { op: "quadrature", what: "custom (moment-only) weights".into() });
        }
        if n0 < 2 || !n0.is_power_of_two() || max_nodes < n0 || !max_nodes.is_power_of_two() {
            return Err(OpucError::InvalidParameter(format!(
                "node counts must be powers of two with 2 <= n0 <= max (got n0 = {n0}, max = {max_nodes})"
            )));
        }
        let count = (max_nodes / n0).trailing_zeros() as usize + 1;
        let substitute = matches!(weight.kind(), WeightKind::Jacobi { .. });
        Ok(CircleRule { weight, n0, max_nodes, levels: (0..count).map(|_| OnceLock::new()).collect(), substitute })
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    pub fn initial_nodes(&self) -> usize {
        self.n0
    }

    pub fn max_nodes(&self) -> usize {
        self.max_nodes
    }

    fn level(&self, k: usize) -> Result<&[Node]> {
        if let Some(v) = self.levels[k].get() {
            return Ok(v);
        }
        let (count, denom, odd) = if k == 0 { (self.n0, self.n0, false) } else { (self.n0 << (k - 1), self.n0 << k, true) };
        let mut nodes = Vec::with_capacity(count);
        for j in 0..count {
            let m = if odd { 2 * j + 1 } else { j };
            let s = 2.0 * PI * m as f64 / denom as f64;
            let (theta, jac) = if self.substitute { substitution(m, denom) } else { (s, 1.0) };
            let t = if m == 0 { Complex64::new(1.0, 0.0) } else { Complex64::from_polar(1.0, theta) };
            nodes.push(Node { theta, t, w: self.weight.node_value(theta)? * jac });
        }
        Ok(self.levels[k].get_or_init(|| nodes))
    }

    /// Integrates a vector-valued integrand of `width` components.
    ///
    /// `f(node, out)` adds nothing itself: it overwrites `out` with the
    /// integrand values at the node.
    pub fn integrate<F>(&self, width: usize, mode: Refinement, f: F) -> Result<Integral>
    where
        F: Fn(&Node, &mut [Complex64]),
    {
        let zero = Complex64::new(0.0, 0.0);
        let mut sum = vec![zero; width];
        let mut l1 = vec![0.0; width];
        let mut buf = vec![zero; width];
        let mut prev: Option<Vec<Complex64>> = None;
        let mut residual = f64::INFINITY;
        let target = match mode {
            Refinement::Fixed { nodes } => {
                if nodes < self.n0 || nodes > self.max_nodes || !nodes.is_power_of_two() {
                    return Err(OpucError::InvalidParameter(format!(
                        "fixed node count {nodes} must be a power of two in [{}, {}]",
                        self.n0, self.max_nodes
                    )));
                }
                Some((nodes / self.n0).trailing_zeros() as usize)
            }
            Refinement::Adaptive { .. } => None,
        };
        for k in 0..self.levels.len() {
            for node in self.level(k)? {
                f(node, &mut buf);
                for i in 0..width {
                    sum[i] += buf[i];
                    l1[i] += buf[i].norm();
                }
            }
            let n = (self.n0 << k) as f64;
            let current: Vec<Complex64> = sum.iter().map(|s| s / n).collect();
            if let Some(p) = &prev {
                residual = current.iter().zip(p).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                if let Refinement::Adaptive { rtol } = mode {
                    // Sequential sums carry roughly sqrt(N) eps relative noise.
                    let eff = rtol.max(4.0 * f64::EPSILON * n.sqrt());
                    let ok = current.iter().zip(p).zip(&l1).all(|((a, b), s)| (a - b).norm() <= eff * (s / n));
                    if ok {
                        return Ok(Integral { values: current, nodes: self.n0 << k, residual });
                    }
                }
            }
            if target == Some(k) {
                return Ok(Integral { values: current, nodes: self.n0 << k, residual });
            }
            prev = Some(current);
        }
        Err(OpucError::Accuracy { residual, nodes: self.max_nodes })
    }
}
