//! Verification suites: every identity evaluated over a grid and compared
//! against a pinned tolerance.
//!
//! Checks run in parallel and are sorted afterwards by `(name, n, z)`, and
//! each residual is computed with a fixed summation order, so the output
//! does not depend on the thread count.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cauchy::{cauchy_g, g_recurrence_residuals, laurent_tail, laurent_tail_expected};
use crate::error::{OpucError, Result};
use crate::painleve::{dpii_residual, real_alphas};
use crate::rh::{
    assemble_y, corollary_recurrence_residuals, jump_residual, pole_order_estimate, structure_matrix_numeric, transfer_residual,
};
use crate::structure::{
    curvature_residual_closed, curvature_residual_generic, first_order_g_residuals, first_order_poly_residuals,
    generic_second_order_residual, jacobi_residue_display, mtilde, mtilde_numeric_residual, pre_liouville_discrepancy,
    second_curvature_residual, second_order_g_residuals, second_order_poly_residuals, structure_relation_residuals, traceback_residual,
    Family,
};
use crate::system::{OpucSystem, CAUCHY_INITIAL_NODES, CAUCHY_MAX_NODES};
use crate::szego::{alpha_ratio_jacobi, phi1_closed_jacobi};
use crate::weights::{WeightKind, WeightSpec};

/// Pinned tolerances.
pub mod tol {
    pub const DET: f64 = 1e-8;
    pub const TRANSFER: f64 = 1e-8;
    pub const COROLLARY: f64 = 1e-8;
    pub const JUMP: f64 = 1e-6;
    pub const JUMP_JACOBI: f64 = 1e-5;
    pub const TRACE: f64 = 1e-9;
    pub const G_AT_ZERO: f64 = 1e-9;
    pub const LAURENT_TAIL: f64 = 1e-6;
    pub const G_RECURRENCE: f64 = 1e-8;
    pub const POLE_ORDER: f64 = 0.05;
    pub const MTILDE: f64 = 1e-6;
    pub const CURVATURE_GENERIC: f64 = 1e-7;
    pub const CURVATURE_CLOSED: f64 = 1e-9;
    pub const SECOND_CURVATURE: f64 = 1e-6;
    pub const POLYNOMIAL: f64 = 1e-9;
    pub const G_FIRST_ORDER: f64 = 1e-7;
    pub const G_SECOND_ORDER: f64 = 1e-6;
    pub const OPERATOR: f64 = 1e-5;
    pub const JACOBI_CLOSED: f64 = 1e-9;
    pub const DPII: f64 = 1e-7;
}

/// Step for the jump check.
pub const JUMP_DELTA: f64 = 1e-3;
/// Radius and sample count for the Laurent tail.
pub const TAIL_RADIUS: f64 = 3.0;
pub const TAIL_SAMPLES: usize = 32;
/// Points closer than this to a weight singularity are dropped from grids.
pub const SINGULAR_EXCLUSION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Rh,
    Structure,
    Painleve,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rh" => Some(Suite::Rh),
            "structure" => Some(Suite::Structure),
            "painleve" => Some(Suite::Painleve),
            "all" => Some(Suite::All),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Rh => "rh",
            Suite::Structure => "structure",
            Suite::Painleve => "painleve",
            Suite::All => "all",
        }
    }

    fn includes(&self, other: Suite) -> bool {
        *self == Suite::All || *self == other
    }
}

/// Evaluation grid: the radii are combined with the angles `k pi/4`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub radii: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { radii: vec![0.4, 2.5] }
    }
}

impl Grid {
    /// `default` or a comma-separated list of radii.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "default" {
            return Ok(Grid::default());
        }
        let radii = s
            .split(',')
            .map(|r| {
                r.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| *x > 0.0 && x.is_finite())
                    .ok_or_else(|| OpucError::InvalidParameter(format!("bad grid radius `{r}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if radii.is_empty() {
            return Err(OpucError::InvalidParameter("empty grid".into()));
        }
        Ok(Grid { radii })
    }

    pub fn describe(&self) -> String {
        let r: Vec<String> = self.radii.iter().map(|r| r.to_string()).collect();
        format!("r in {{{}}} x angles k pi/4, k = 0..7", r.join(", "))
    }

    /// Grid points away from the weight's singular points.
    pub fn points(&self, w: &WeightSpec) -> Vec<Complex64> {
        let sing = w.singular_points();
        self.radii
            .iter()
            .flat_map(|&r| (0..8).map(move |k| Complex64::from_polar(r, k as f64 * PI / 4.0)))
            .filter(|z| sing.iter().all(|s| (z - s).norm() >= SINGULAR_EXCLUSION))
            .collect()
    }
}

/// `e^{i pi (2k+1)/8}`, `k = 0..7`.
pub fn circle_points() -> Vec<Complex64> {
    (0..8).map(|k| Complex64::from_polar(1.0, PI * (2 * k + 1) as f64 / 8.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub n: Option<usize>,
    pub z: Option<Complex64>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, n: Option<usize>, z: Option<Complex64>, residual: f64, tolerance: f64) -> Self {
        Check { name: name.into(), n, z, residual, tolerance, pass: residual <= tolerance }
    }
}

fn cmp_key(a: &Check, b: &Check) -> Ordering {
    let z = |c: &Check| c.z.map(|z| (z.re, z.im));
    a.name.cmp(&b.name).then(a.n.cmp(&b.n)).then_with(|| match (z(a), z(b)) {
        (Some(x), Some(y)) => x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)),
        (x, y) => x.is_some().cmp(&y.is_some()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub weight: WeightSpec,
    /// Largest degree checked.
    pub n: usize,
    pub grid: Grid,
    pub perturb: Option<(usize, f64)>,
    pub rtol: Option<f64>,
    /// Restricts the closed-form checks to `"bessel"` or `"jacobi"`.
    pub family: Option<String>,
}

impl VerifyConfig {
    pub fn new(weight: WeightSpec, n: usize) -> Self {
        VerifyConfig { weight, n, grid: Grid::default(), perturb: None, rtol: None, family: None }
    }

    fn families(&self) -> Vec<Family> {
        families(&self.weight).into_iter().filter(|f| self.family.as_deref().is_none_or(|name| f.name() == name)).collect()
    }

    /// Coefficients are needed three indices beyond the largest degree.
    pub fn table_size(&self) -> usize {
        self.n + 3
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Meta {
    pub suite: String,
    pub weight: String,
    pub n: usize,
    pub nmax: usize,
    pub grid: String,
    pub perturb: Option<(usize, f64)>,
    pub cauchy_rtol: f64,
    pub cauchy_nodes: (usize, usize),
    pub moment_source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub meta: Meta,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.checks.len() - self.passed()
    }

    pub fn all_pass(&self) -> bool {
        self.failed() == 0
    }
}

type Task<'a> = Box<dyn Fn(&OpucSystem) -> Result<Vec<Check>> + Send + Sync + 'a>;

fn one<'a>(name: &'a str, n: usize, z: Option<Complex64>, t: f64, f: impl Fn(&OpucSystem) -> Result<f64> + Send + Sync + 'a) -> Task<'a> {
    Box::new(move |s| Ok(vec![Check::new(name, Some(n), z, f(s)?, t)]))
}

/// Families whose closed forms apply; Lebesgue is the degenerate case of both.
pub fn families(w: &WeightSpec) -> Vec<Family> {
    if !w.h_is_trivial() {
        return Vec::new();
    }
    match w.kind() {
        WeightKind::Lebesgue => vec![Family::Bessel { ell: 0.0 }, Family::Jacobi { b: Complex64::new(0.0, 0.0) }],
        WeightKind::Bessel { ell } => vec![Family::Bessel { ell: *ell }],
        WeightKind::Jacobi { b } => vec![Family::Jacobi { b: *b }],
        WeightKind::Custom { .. } => Vec::new(),
    }
}

fn expected_pole_order(w: &WeightSpec) -> Option<f64> {
    match w.kind() {
        WeightKind::Bessel { ell } if *ell > 0.0 => Some(2.0),
        WeightKind::Bessel { .. } | WeightKind::Lebesgue | WeightKind::Jacobi { .. } => Some(1.0),
        WeightKind::Custom { .. } => None,
    }
}

fn rh_tasks<'a>(cfg: &'a VerifyConfig, pts: &'a [Complex64]) -> Vec<Task<'a>> {
    let w = &cfg.weight;
    let mut tasks: Vec<Task<'a>> = Vec::new();
    let jump_tol = if matches!(w.kind(), WeightKind::Jacobi { .. }) { tol::JUMP_JACOBI } else { tol::JUMP };
    let sing = w.singular_points();
    let circle: Vec<Complex64> = circle_points().into_iter().filter(|t| sing.iter().all(|s| (t - s).norm() >= 1e-8)).collect();
    for n in 1..=cfg.n {
        for &z in pts {
            tasks.push(one("det_Y", n, Some(z), tol::DET, move |s| Ok((assemble_y(s, n, z)?.det() - 1.0).norm())));
            tasks.push(one("transfer_residual", n, Some(z), tol::TRANSFER, move |s| transfer_residual(s, n, z)));
            tasks.push(Box::new(move |s| {
                let r = corollary_recurrence_residuals(s, n, z)?;
                let names = ["phi", "phistar", "z_g", "z_gstar"];
                Ok(names
                    .iter()
                    .zip(r)
                    .map(|(p, x)| Check::new(format!("corollary_recurrence_residuals.{p}"), Some(n), Some(z), x, tol::COROLLARY))
                    .collect())
            }));
            tasks.push(Box::new(move |s| {
                let (a, b) = g_recurrence_residuals(s, n, z)?;
                Ok(vec![
                    Check::new("g_recurrence.g", Some(n), Some(z), a, tol::G_RECURRENCE),
                    Check::new("g_recurrence.gstar", Some(n), Some(z), b, tol::G_RECURRENCE),
                ])
            }));
            tasks.push(one("structure_matrix_numeric.trace", n, Some(z), tol::TRACE, move |s| {
                Ok(structure_matrix_numeric(s, n, z)?.trace().norm())
            }));
        }
        for &t in &circle {
            tasks.push(one("jump_residual", n, Some(t), jump_tol, move |s| jump_residual(s, n, t, JUMP_DELTA)));
        }
        let zero = Complex64::new(0.0, 0.0);
        tasks.push(Box::new(move |s| {
            let g = cauchy_g(s, n, zero, s.rtol())?;
            let gs = crate::cauchy::cauchy_gstar(s, n, zero, s.rtol())?;
            let v = s.table();
            Ok(vec![
                Check::new("g_at_zero", Some(n), Some(zero), (g - 1.0 / v.b_at(n)?).norm(), tol::G_AT_ZERO),
                Check::new("gstar_at_zero", Some(n), Some(zero), (gs - v.alpha(n as i64 - 1)? / v.b_at(n - 1)?).norm(), tol::G_AT_ZERO),
            ])
        }));
        tasks.push(Box::new(move |s| {
            let got = laurent_tail(s, n, TAIL_RADIUS, TAIL_SAMPLES)?;
            let want = laurent_tail_expected(s, n)?;
            let dist = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            Ok(vec![
                Check::new("laurent_tail.g", Some(n), None, dist(&got.g, &want.g), tol::LAURENT_TAIL),
                Check::new("laurent_tail.gstar", Some(n), None, dist(&got.gstar, &want.gstar), tol::LAURENT_TAIL),
            ])
        }));
        if let Some(p) = expected_pole_order(w) {
            if n >= 2 {
                tasks.push(one("pole_order_at_zero", n, None, tol::POLE_ORDER, move |s| {
                    Ok((pole_order_estimate(s, n, zero, Complex64::new(1.0, 1.0))? - p).abs())
                }));
            }
        }
    }
    tasks
}

fn structure_tasks<'a>(cfg: &'a VerifyConfig, pts: &'a [Complex64]) -> Vec<Task<'a>> {
    let mut tasks: Vec<Task<'a>> = Vec::new();
    for n in 1..=cfg.n {
        for &z in pts {
            tasks.push(one("curvature_residual_generic", n, Some(z), tol::CURVATURE_GENERIC, move |s| curvature_residual_generic(s, n, z)));
            tasks.push(one("second_curvature_residual", n, Some(z), tol::SECOND_CURVATURE, move |s| second_curvature_residual(s, n, z)));
            tasks.push(one("generic_second_order_residual", n, Some(z), tol::OPERATOR, move |s| generic_second_order_residual(s, n, z)));
            tasks.push(one("traceback_residual", n, Some(z), tol::OPERATOR, move |s| traceback_residual(s, n, z)));
        }
    }
    for fam in cfg.families() {
        let (mt, curv, first, second) = match fam {
            Family::Bessel { .. } => {
                ("mtilde_bessel", "curvature_residual_bessel", "first_order_residuals_bessel", "second_order_residuals_bessel")
            }
            Family::Jacobi { .. } => {
                ("mtilde_jacobi", "curvature_residual_jacobi", "first_order_residuals_jacobi", "hypergeometric_residuals_jacobi")
            }
        };
        for n in fam.min_degree()..=cfg.n {
            for &z in pts {
                tasks.push(one(mt, n, Some(z), tol::MTILDE, move |s| mtilde_numeric_residual(s, fam, n, z)));
                tasks.push(one(curv, n, Some(z), tol::CURVATURE_CLOSED, move |s| curvature_residual_closed(s.table(), fam, n, z)));
                tasks.push(Box::new(move |s| {
                    let g1 = first_order_g_residuals(s, fam, n, z)?;
                    let g2 = second_order_g_residuals(s, fam, n, z)?;
                    Ok(vec![
                        Check::new(format!("{first}.g"), Some(n), Some(z), g1[0], tol::G_FIRST_ORDER),
                        Check::new(format!("{first}.gstar"), Some(n), Some(z), g1[1], tol::G_FIRST_ORDER),
                        Check::new(format!("{second}.g"), Some(n), Some(z), g2[0], tol::G_SECOND_ORDER),
                        Check::new(format!("{second}.gstar"), Some(n), Some(z), g2[1], tol::G_SECOND_ORDER),
                    ])
                }));
            }
            let zero = Complex64::new(0.0, 0.0);
            tasks.push(one(curv, n, Some(zero), tol::CURVATURE_CLOSED, move |s| curvature_residual_closed(s.table(), fam, n, zero)));
            tasks.push(Box::new(move |s| {
                let v = s.table();
                let p1 = first_order_poly_residuals(v, fam, n)?;
                let p2 = second_order_poly_residuals(v, fam, n)?;
                let sr = structure_relation_residuals(v, fam, n)?;
                let mut out = vec![
                    Check::new(format!("{first}.phi"), Some(n), None, p1[0], tol::POLYNOMIAL),
                    Check::new(format!("{first}.phistar"), Some(n), None, p1[1], tol::POLYNOMIAL),
                    Check::new(format!("{second}.phi"), Some(n), None, p2[0], tol::POLYNOMIAL),
                    Check::new(format!("{second}.phistar"), Some(n), None, p2[1], tol::POLYNOMIAL),
                ];
                let names: &[&str] = match fam {
                    Family::Bessel { .. } => {
                        &["structure_relation_residuals.bessel_derivative", "structure_relation_residuals.bessel_shifted"]
                    }
                    Family::Jacobi { .. } => &["structure_relation_residuals.jacobi"],
                };
                out.extend(names.iter().zip(sr).map(|(nm, r)| Check::new(*nm, Some(n), None, r, tol::POLYNOMIAL)));
                if let Family::Jacobi { b } = fam {
                    let at_one = mtilde(v, fam, n)?.eval(Complex64::new(1.0, 0.0));
                    let residue = (jacobi_residue_display(v, b, n)? + at_one).frobenius_norm();
                    let pre = pre_liouville_discrepancy(v, fam, n)?.into_iter().fold(0.0, f64::max);
                    out.push(Check::new("phi1_closed_jacobi", Some(n), None, phi1_closed_jacobi(v, b, n)?, tol::JACOBI_CLOSED));
                    out.push(Check::new("alpha_ratio_jacobi", Some(n), None, alpha_ratio_jacobi(v, b, n)?, tol::JACOBI_CLOSED));
                    out.push(Check::new("jacobi_residue_at_one", Some(n), None, residue, tol::JACOBI_CLOSED));
                    out.push(Check::new("jacobi_pre_liouville", Some(n), None, pre, tol::JACOBI_CLOSED));
                }
                Ok(out)
            }));
        }
    }
    tasks
}

fn painleve_tasks<'a>(cfg: &'a VerifyConfig) -> Vec<Task<'a>> {
    let ell = match cfg.weight.kind() {
        WeightKind::Bessel { ell } if *ell > 0.0 && cfg.weight.h_is_trivial() => *ell,
        _ => return Vec::new(),
    };
    (2..=cfg.n).map(|n| one("dpii_residual", n, None, tol::DPII, move |s| dpii_residual(&real_alphas(s.table())?, ell, n))).collect()
}

/// Builds the system described by `cfg`, with the perturbation applied.
pub fn build_system(cfg: &VerifyConfig) -> Result<OpucSystem> {
    let mut sys = OpucSystem::new(cfg.weight.clone(), cfg.table_size())?;
    if let Some(r) = cfg.rtol {
        sys = sys.with_rtol(r)?;
    }
    if let Some((n, eps)) = cfg.perturb {
        sys = sys.perturbed(n, eps)?;
    }
    Ok(sys)
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<Report> {
    if cfg.n == 0 {
        return Err(OpucError::InvalidParameter("--n must be at least 1".into()));
    }
    if suite == Suite::Painleve && painleve_tasks(cfg).is_empty() && cfg.n >= 2 {
        return Err(OpucError::Unsupported { op: "the painleve suite", what: cfg.weight.describe() });
    }
    if let Some(name) = &cfg.family {
        if cfg.families().is_empty() {
            return Err(OpucError::Unsupported { op: "closed forms", what: format!("family {name} with {}", cfg.weight.describe()) });
        }
    }
    let sys = build_system(cfg)?;
    let pts = cfg.grid.points(&cfg.weight);
    let mut tasks = Vec::new();
    if suite.includes(Suite::Rh) {
        tasks.extend(rh_tasks(cfg, &pts));
    }
    if suite.includes(Suite::Structure) {
        tasks.extend(structure_tasks(cfg, &pts));
    }
    if suite.includes(Suite::Painleve) {
        tasks.extend(painleve_tasks(cfg));
    }
    let results: Vec<Result<Vec<Check>>> = tasks.par_iter().map(|t| t(&sys)).collect();
    let mut checks = Vec::new();
    for r in results {
        checks.extend(r?);
    }
    checks.sort_by(cmp_key);
    let meta = Meta {
        suite: suite.name().into(),
        weight: cfg.weight.describe(),
        n: cfg.n,
        nmax: sys.nmax(),
        grid: cfg.grid.describe(),
        perturb: cfg.perturb,
        cauchy_rtol: sys.rtol(),
        cauchy_nodes: (CAUCHY_INITIAL_NODES, CAUCHY_MAX_NODES),
        moment_source: format!("{:?}", sys.moments().source()),
    };
    Ok(Report { meta, checks })
}
