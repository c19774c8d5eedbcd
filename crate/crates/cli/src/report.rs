//! JSON form of a verification report.

use opuc_core::verify::{Check, Report};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Point {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Serialize)]
pub struct Perturbation {
    pub n: usize,
    pub eps: f64,
}

#[derive(Debug, Serialize)]
pub struct Quadrature {
    pub cauchy_rtol: f64,
    pub cauchy_initial_nodes: usize,
    pub cauchy_max_nodes: usize,
    pub moment_source: String,
}

#[derive(Debug, Serialize)]
pub struct MetaJson {
    pub tool: &'static str,
    pub version: &'static str,
    pub suite: String,
    pub weight: String,
    pub family: Option<String>,
    pub n: usize,
    pub nmax: usize,
    pub grid: String,
    pub perturb: Option<Perturbation>,
    pub quadrature: Quadrature,
}

#[derive(Debug, Serialize)]
pub struct CheckJson {
    pub name: String,
    pub n: Option<usize>,
    pub z: Option<Point>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub meta: MetaJson,
    pub checks: Vec<CheckJson>,
    pub summary: Summary,
}

impl From<&Check> for CheckJson {
    fn from(c: &Check) -> Self {
        CheckJson {
            name: c.name.clone(),
            n: c.n,
            z: c.z.map(|z| Point { re: z.re, im: z.im }),
            residual: c.residual,
            tolerance: c.tolerance,
            pass: c.pass,
        }
    }
}

impl ReportJson {
    pub fn new(r: &Report, family: Option<String>) -> Self {
        let m = &r.meta;
        ReportJson {
            meta: MetaJson {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                suite: m.suite.clone(),
                weight: m.weight.clone(),
                family,
                n: m.n,
                nmax: m.nmax,
                grid: m.grid.clone(),
                perturb: m.perturb.map(|(n, eps)| Perturbation { n, eps }),
                quadrature: Quadrature {
                    cauchy_rtol: m.cauchy_rtol,
                    cauchy_initial_nodes: m.cauchy_nodes.0,
                    cauchy_max_nodes: m.cauchy_nodes.1,
                    moment_source: m.moment_source.clone(),
                },
            },
            checks: r.checks.iter().map(CheckJson::from).collect(),
            summary: Summary { total: r.checks.len(), passed: r.passed(), failed: r.failed() },
        }
    }

    pub fn to_string_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use opuc_core::verify::{run_suite, Suite, VerifyConfig};
    use opuc_core::WeightSpec;

    #[test]
    fn summary_matches_checks() {
        let r = run_suite(Suite::Rh, &VerifyConfig::new(WeightSpec::lebesgue(), 2)).unwrap();
        let j = ReportJson::new(&r, None);
        assert_eq!(j.summary.total, j.checks.len());
        assert_eq!(j.summary.passed, j.checks.iter().filter(|c| c.pass).count());
        let v: serde_json::Value = serde_json::from_str(&j.to_string_pretty()).unwrap();
        assert_eq!(v["summary"]["failed"], 0);
        assert!(v["checks"][0]["name"].is_string());
    }
}
