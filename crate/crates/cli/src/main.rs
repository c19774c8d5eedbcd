//! `opuc`: moment and coefficient tables, dPII orbits and verification
//! suites for orthogonal polynomials on the unit circle.

mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use opuc_core::moments::moments_for;
use opuc_core::painleve::{dpii_iterate, orbit_from_table, DpiiOrbit};
use opuc_core::szego::verblunsky_from_moments;
use opuc_core::verify::{run_suite, Grid, Suite, VerifyConfig};
use opuc_core::{MomentTable, OpucError, WeightKind, WeightSpec};

use report::ReportJson;

const EXIT_FAILURES: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "opuc", version, about = "Orthogonal polynomials on the unit circle: tables and identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trigonometric moments c_{-jmax} .. c_{jmax} as CSV (j,re,im).
    Moments {
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, default_value_t = 24)]
        jmax: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verblunsky coefficients, kappa_n^2, b_n and Phi_1^n as CSV.
    Verblunsky {
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, default_value_t = 24)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Real Bessel coefficients with their dPII residuals.
    Dpii {
        #[arg(long)]
        ell: f64,
        /// Number of coefficients, alpha_0 .. alpha_{n-1}.
        #[arg(long, default_value_t = 12)]
        n: usize,
        /// Take the coefficients from the weight's moments.
        #[arg(long, conflicts_with = "seeds", required_unless_present = "seeds")]
        from_moments: bool,
        /// Iterate forward from `alpha_0,alpha_1` instead.
        #[arg(long, value_parser = parse_seeds)]
        seeds: Option<(f64, f64)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a verification suite and writes a JSON report.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// `default` or comma-separated radii.
        #[arg(long, default_value = "default")]
        grid: String,
        /// Cauchy quadrature tolerance.
        #[arg(long)]
        rtol: Option<f64>,
        /// Shift alpha_n by eps before checking, as `n:eps`.
        #[arg(long, value_parser = parse_perturb)]
        perturb: Option<(usize, f64)>,
        /// Restricts closed-form checks to one family.
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        /// Report file; stdout when absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightName {
    Lebesgue,
    Bessel,
    Jacobi,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Rh,
    Structure,
    Painleve,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Bessel,
    Jacobi,
}

#[derive(Args)]
struct WeightArgs {
    #[arg(long, value_enum)]
    weight: WeightName,
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// Moment CSV for `--weight custom`.
    #[arg(long)]
    moments: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Core(OpucError),
    Verification,
}

impl From<OpucError> for Failure {
    fn from(e: OpucError) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(e.into())
    }
}

type CliResult<T> = Result<T, Failure>;

fn parse_seeds(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected alpha_0,alpha_1")?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x}: {e}"));
    Ok((p(a)?, p(b)?))
}

fn parse_perturb(s: &str) -> Result<(usize, f64), String> {
    let (n, eps) = s.split_once(':').ok_or("expected n:eps")?;
    let n = n.trim().parse::<usize>().map_err(|e| format!("{n}: {e}"))?;
    let eps = eps.trim().parse::<f64>().map_err(|e| format!("{eps}: {e}"))?;
    if !eps.is_finite() {
        return Err("eps must be finite".into());
    }
    Ok((n, eps))
}

impl WeightArgs {
    fn spec(&self) -> CliResult<WeightSpec> {
        match self.weight {
            WeightName::Lebesgue => Ok(WeightSpec::lebesgue()),
            WeightName::Bessel => {
                let ell = self.ell.ok_or_else(|| Failure::Usage("--weight bessel requires --ell".into()))?;
                Ok(WeightSpec::bessel(ell)?)
            }
            WeightName::Jacobi => {
                let lambda = self.lambda.ok_or_else(|| Failure::Usage("--weight jacobi requires --lambda".into()))?;
                Ok(WeightSpec::jacobi(lambda, self.eta)?)
            }
            WeightName::Custom => {
                let path = self.moments.as_ref().ok_or_else(|| Failure::Usage("--weight custom requires --moments".into()))?;
                let file = File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                Ok(WeightSpec::custom(MomentTable::read_csv(file)?))
            }
        }
    }
}

fn output(path: Option<&PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_moments(weight: &WeightArgs, jmax: usize, out: Option<&PathBuf>) -> CliResult<()> {
    let table = moments_for(&weight.spec()?, jmax)?;
    let mut w = output(out)?;
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_verblunsky(weight: &WeightArgs, n: usize, out: Option<&PathBuf>) -> CliResult<()> {
    let spec = weight.spec()?;
    let v = verblunsky_from_moments(&moments_for(&spec, n)?, n)?;
    let jacobi = matches!(spec.kind(), WeightKind::Jacobi { .. });
    let mut w = output(out)?;
    write!(w, "n,re_alpha,im_alpha,kappa2,b,re_phi1,im_phi1")?;
    if jacobi {
        write!(w, ",re_ratio,im_ratio")?;
    }
    writeln!(w)?;
    for (k, a) in v.alphas.iter().enumerate() {
        write!(w, "{k},{:?},{:?},{:?},{:?},{:?},{:?}", a.re, a.im, v.kappa2[k], v.b[k], v.phi1[k].re, v.phi1[k].im)?;
        if jacobi {
            match k.checked_sub(1).map(|p| a / v.alphas[p]) {
                Some(r) if r.is_finite() => write!(w, ",{:?},{:?}", r.re, r.im)?,
                _ => write!(w, ",,")?,
            }
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_dpii(ell: f64, n: usize, seeds: Option<(f64, f64)>, out: Option<&PathBuf>) -> CliResult<()> {
    let orbit: DpiiOrbit = match seeds {
        Some((a0, a1)) => dpii_iterate(a0, a1, ell, n)?,
        None => {
            let spec = WeightSpec::bessel(ell)?;
            orbit_from_table(&verblunsky_from_moments(&moments_for(&spec, n)?, n)?, ell)?
        }
    };
    if let Some(k) = orbit.diverged_at {
        eprintln!("orbit left the unit disc at n = {k}");
    }
    let mut w = output(out)?;
    writeln!(w, "n,alpha,residual")?;
    for (k, (a, r)) in orbit.alphas.iter().zip(&orbit.residuals).enumerate() {
        match r {
            Some(r) => writeln!(w, "{k},{a:?},{r:?}")?,
            None => writeln!(w, "{k},{a:?},")?,
        }
    }
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    suite: SuiteArg,
    weight: &WeightArgs,
    n: usize,
    grid: &str,
    rtol: Option<f64>,
    perturb: Option<(usize, f64)>,
    family: Option<FamilyArg>,
    report: Option<&PathBuf>,
) -> CliResult<()> {
    let suite = match suite {
        SuiteArg::Rh => Suite::Rh,
        SuiteArg::Structure => Suite::Structure,
        SuiteArg::Painleve => Suite::Painleve,
        SuiteArg::All => Suite::All,
    };
    let mut cfg = VerifyConfig::new(weight.spec()?, n);
    cfg.grid = Grid::parse(grid)?;
    cfg.rtol = rtol;
    cfg.perturb = perturb;
    cfg.family = family.map(|f| match f {
        FamilyArg::Bessel => "bessel".to_string(),
        FamilyArg::Jacobi => "jacobi".to_string(),
    });
    let r = run_suite(suite, &cfg)?;
    let json = ReportJson::new(&r, cfg.family.clone());
    let mut w = output(report)?;
    w.write_all(json.to_string_pretty().as_bytes())?;
    w.flush()?;
    eprintln!("{}: {} checks, {} passed, {} failed", suite.name(), json.summary.total, json.summary.passed, json.summary.failed);
    for c in r.checks.iter().filter(|c| !c.pass).take(20) {
        let z = c.z.map(|z: Complex64| format!(" z={z:.4}")).unwrap_or_default();
        let n = c.n.map(|n| format!(" n={n}")).unwrap_or_default();
        eprintln!("  FAIL {}{n}{z}: {:.3e} > {:.1e}", c.name, c.residual, c.tolerance);
    }
    if r.all_pass() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("OPUC_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("OPUC_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::Moments { weight, jmax, out } => cmd_moments(&weight, jmax, out.as_ref()),
        Command::Verblunsky { weight, n, out } => cmd_verblunsky(&weight, n, out.as_ref()),
        Command::Dpii { ell, n, from_moments: _, seeds, out } => cmd_dpii(ell, n, seeds, out.as_ref()),
        Command::Verify { suite, weight, n, grid, rtol, perturb, family, report } => {
            cmd_verify(suite, &weight, n, &grid, rtol, perturb, family, report.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(EXIT_FAILURES),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE })
        }
    }
}
