//! A weight together with everything derived from it.

use crate::error::{OpucError, Result};
use crate::moments::{moments_for, MomentTable};
use crate::quadrature::CircleRule;
use crate::szego::{phi_pairs, verblunsky_from_moments, PolyPair, VerblunskyTable};
use crate::weights::WeightSpec;

/// Initial and maximal node counts for Cauchy integrals.
pub const CAUCHY_INITIAL_NODES: usize = 64;
pub const CAUCHY_MAX_NODES: usize = 1 << 20;
/// Default relative tolerance for Cauchy integrals.
pub const CAUCHY_RTOL: f64 = 1e-13;

#[derive(Debug)]
pub struct OpucSystem {
    weight: WeightSpec,
    moments: MomentTable,
    table: VerblunskyTable,
    pairs: Vec<PolyPair>,
    rule: Option<CircleRule>,
    rtol: f64,
}

impl OpucSystem {
    /// Moments, coefficients `alpha_0..alpha_{nmax-1}` and polynomials up
    /// to degree `nmax`.
    pub fn new(weight: WeightSpec, nmax: usize) -> Result<Self> {
        let moments = moments_for(&weight, nmax + 1)?;
        let table = verblunsky_from_moments(&moments, nmax)?;
        Self::assemble(weight, moments, table)
    }

    /// Uses a given coefficient table (for example a perturbed one).
    pub fn from_table(weight: WeightSpec, moments: MomentTable, table: VerblunskyTable) -> Result<Self> {
        Self::assemble(weight, moments, table)
    }

    fn assemble(weight: WeightSpec, moments: MomentTable, table: VerblunskyTable) -> Result<Self> {
        let pairs = phi_pairs(&table, table.nmax())?;
        let rule =
            if weight.is_pointwise() { Some(CircleRule::new(weight.clone(), CAUCHY_INITIAL_NODES, CAUCHY_MAX_NODES)?) } else { None };
        Ok(OpucSystem { weight, moments, table, pairs, rule, rtol: CAUCHY_RTOL })
    }

    pub fn with_rtol(mut self, rtol: f64) -> Result<Self> {
        if !(rtol > 0.0 && rtol < 1.0) {
            return Err(OpucError::InvalidParameter(format!("rtol must lie in (0, 1), got {rtol}")));
        }
        self.rtol = rtol;
        Ok(self)
    }

    /// Same weight and moments, coefficient `alpha_n` shifted by `eps`.
    pub fn perturbed(&self, n: usize, eps: f64) -> Result<Self> {
        let table = self.table.perturbed(n, num_complex::Complex64::new(eps, 0.0))?;
        let mut s = Self::assemble(self.weight.clone(), self.moments.clone(), table)?;
        s.rtol = self.rtol;
        Ok(s)
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    pub fn moments(&self) -> &MomentTable {
        &self.moments
    }

    pub fn table(&self) -> &VerblunskyTable {
        &self.table
    }

    pub fn nmax(&self) -> usize {
        self.table.nmax()
    }

    pub fn rtol(&self) -> f64 {
        self.rtol
    }

    pub fn pair(&self, n: usize) -> Result<&PolyPair> {
        self.pairs.get(n).ok_or_else(|| OpucError::OutOfRange { index: n as i64, available: format!("0..={}", self.nmax()) })
    }

    pub fn rule(&self) -> Result<&CircleRule> {
        self.rule.as_ref().ok_or_else(|| OpucError::Unsupported { op: "Cauchy integrals", what: "custom (moment-only) weights".into() })
    }

    /// Fails unless indices up to `n` are available.
    pub fn require(&self, n: usize) -> Result<()> {
        if n > self.nmax() {
            return Err(OpucError::OutOfRange { index: n as i64, available: format!("0..={}", self.nmax()) });
        }
        Ok(())
    }
}
