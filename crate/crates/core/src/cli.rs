//! Command-line front end. Data goes to stdout or files, diagnostics to stderr.
//! Exit codes: 0 success, 1 usage, configuration or domain errors, 2 internal
//! errors (including quadrature that fails to converge).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::criteria::classify;
use crate::error::{Error, Result};
use crate::generator::{verify_drift_bound, Direction, GridSpec, Mode, TestFunction};
use crate::ineqlab::{
    find_box_constant, find_delta0, kvz_bounds_check, large_exponent_scan, young_check, BoxExponents,
    BoxLemma, DeltaAux, DeltaLemma, KvzMode, YoungInputs, YoungVariant, DEFAULT_SPLIT_DELTA,
};
use crate::model::ModelParams;
use crate::montecarlo::{aggregate, run_paths, sweep, sweep_csv, Axis, McConfig};
use crate::rng::path_rng;
use crate::simulator::{csv_row, SimConfig, CSV_HEADER};
use crate::stablejump::{laplace_transform_check, CutoffScheme, StableMeasure};

#[derive(Parser)]
#[command(name = "csbp-lab", version, propagate_version = true)]
#[command(
    about = "Regime classification, simulation and generator checks for two-type mutually enhancing CSBPs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every result's hypotheses and report the extinction verdict.
    Classify(ClassifyArgs),
    /// Simulate paths, write one CSV row per path and print a summary.
    Simulate(SimulateArgs),
    /// Estimate extinction frequencies over a one- or two-axis parameter grid.
    Sweep(SweepArgs),
    /// Check a drift inequality for a test function on a grid of (0,c]².
    VerifyGenerator(VerifyArgs),
    /// Run one of the inequality checks and print its report.
    Ineq(IneqArgs),
    /// Compare the sampled jump increment's Laplace transform with the analytic one.
    StableCheck(StableCheckArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    params: PathBuf,
    /// Print the report as JSON.
    #[arg(long, conflicts_with_all = ["table", "echo_params"])]
    json: bool,
    /// Print the report as an aligned table (the default).
    #[arg(long, conflicts_with = "echo_params")]
    table: bool,
    /// Print the validated parameters as JSON instead of a report.
    #[arg(long)]
    echo_params: bool,
}

#[derive(Args)]
struct PathArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = 1.0)]
    y0: f64,
    #[arg(long, default_value_t = 1000)]
    paths: u64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    eps_extinct: f64,
    #[arg(long, default_value_t = 1e12)]
    cap_explode: f64,
    #[arg(long, default_value_t = 1e-3)]
    eps_jump: f64,
    /// Drop jumps below eps_jump instead of replacing them by a Gaussian.
    #[arg(long)]
    no_gaussian_smalljump: bool,
    /// Thread cap; all cores by default.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

impl PathArgs {
    fn config(&self) -> McConfig {
        McConfig {
            n_paths: self.paths,
            sim: SimConfig {
                dt: self.dt,
                t_max: self.t_max,
                eps_extinct: self.eps_extinct,
                cap_explode: self.cap_explode,
                cutoff: CutoffScheme {
                    eps_jump: self.eps_jump,
                    gaussian_smalljump: !self.no_gaussian_smalljump,
                },
                seed: self.seed,
            },
            workers: self.workers,
            x0: self.x0,
            y0: self.y0,
        }
    }
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    #[command(flatten)]
    common: PathArgs,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    #[command(flatten)]
    common: PathArgs,
    /// Axis `name=from:to:steps[:lin|log]`; give once or twice.
    #[arg(long, required = true)]
    vary: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Upper,
    Lower,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Closed,
    Numeric,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct VerifyArgs {
    #[arg(long)]
    params: PathBuf,
    /// Test function as a JSON file, or inline JSON such as
    /// '{"PowerInverse":{"rho1":1,"rho2":1}}'.
    #[arg(long)]
    test_function: String,
    /// Box edge: the grid covers [c·lo_factor, c]².
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, value_enum)]
    direction: DirectionArg,
    #[arg(long, value_enum, default_value = "numeric")]
    mode: ModeArg,
    #[arg(long, default_value_t = 64)]
    grid_n: usize,
    #[arg(long, default_value_t = 1e-6)]
    lo_factor: f64,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct IneqArgs {
    /// young, subadditive, power-mean, local-domination, cross-terms,
    /// powers-over-interaction, symmetric-critical, critical-extinction,
    /// critical-survival, kvz-split, kvz-large-exponent, kvz-large-exponent-scan
    #[arg(long)]
    lemma: String,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed exponent for the Young-type checks; drawn per trial otherwise.
    #[arg(long)]
    p: Option<f64>,
    /// Comma-separated exponents (local-domination: four values).
    #[arg(long, value_delimiter = ',')]
    exponents: Vec<f64>,
    /// Comma-separated coefficients.
    #[arg(long, value_delimiter = ',')]
    coefficients: Vec<f64>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    r2: Option<f64>,
    #[arg(long)]
    theta1: Option<f64>,
    #[arg(long)]
    theta2: Option<f64>,
    #[arg(long)]
    kappa1: Option<f64>,
    #[arg(long)]
    kappa2: Option<f64>,
    #[arg(long)]
    rho1: Option<f64>,
    #[arg(long)]
    rho2: Option<f64>,
    /// Model parameters for the weight checks.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Outer exponent (weight checks, kvz checks).
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_SPLIT_DELTA)]
    delta: f64,
    /// Comma-separated v values in [0,1]; ten points 0.1..1 by default.
    #[arg(long, value_delimiter = ',')]
    v_grid: Vec<f64>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct StableCheckArgs {
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    /// Transform arguments; repeat or separate with commas.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    u: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    #[arg(long)]
    no_gaussian_smalljump: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("csbp-lab: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Classify(a) => classify_cmd(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::VerifyGenerator(a) => verify_cmd(a),
        Command::Ineq(a) => ineq_cmd(a),
        Command::StableCheck(a) => stable_check_cmd(a),
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Internal(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}")?;
    Ok(())
}

fn load_params(path: &Path) -> Result<ModelParams> {
    ModelParams::load(path)?.validate()
}

/// Writes `contents` next to `path` and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn classify_cmd(a: ClassifyArgs) -> Result<()> {
    let p = load_params(&a.params)?;
    if a.echo_params {
        let mut out = std::io::stdout().lock();
        writeln!(out, "{}", p.to_json())?;
        return Ok(());
    }
    let report = classify(&p)?;
    let mut out = std::io::stdout().lock();
    if a.json {
        writeln!(out, "{}", report.to_json())?;
    } else {
        write!(out, "{}", report.table())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    params: &'a ModelParams,
    config: &'a McConfig,
    estimate: crate::montecarlo::McEstimate,
    out: String,
}

fn simulate_cmd(a: SimulateArgs) -> Result<()> {
    let p = load_params(&a.common.params)?;
    let cfg = a.common.config();
    let outcomes = run_paths(&p, &cfg)?;
    let mut csv = String::with_capacity(48 * outcomes.len() + 64);
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for (k, o) in outcomes.iter().enumerate() {
        csv.push_str(&csv_row(k as u64, o));
        csv.push('\n');
    }
    write_atomic(&a.common.out, &csv)?;
    print_json(&SimulateSummary {
        params: &p,
        config: &cfg,
        estimate: aggregate(&outcomes),
        out: a.common.out.display().to_string(),
    })
}

fn sweep_cmd(a: SweepArgs) -> Result<()> {
    let p = load_params(&a.common.params)?;
    let axes = a
        .vary
        .iter()
        .map(|s| s.parse::<Axis>())
        .collect::<Result<Vec<_>>>()?;
    let rows = sweep(&p, &axes, &a.common.config())?;
    for row in &rows {
        if let Some(why) = &row.invalid {
            eprintln!("csbp-lab: skipped grid point {:?}: {why}", row.values);
        }
    }
    write_atomic(&a.common.out, &sweep_csv(&axes, &rows))
}

fn verify_cmd(a: VerifyArgs) -> Result<()> {
    let p = load_params(&a.params)?;
    let text = if a.test_function.trim_start().starts_with('{') {
        a.test_function.clone()
    } else {
        std::fs::read_to_string(&a.test_function)
            .map_err(|e| Error::Load(format!("{}: {e}", a.test_function)))?
    };
    let tf: TestFunction =
        serde_json::from_str(&text).map_err(|e| Error::Load(format!("test function: {e}")))?;
    let direction = match a.direction {
        DirectionArg::Upper => Direction::Upper,
        DirectionArg::Lower => Direction::Lower,
    };
    let mode = match a.mode {
        ModeArg::Closed => Mode::Closed,
        ModeArg::Numeric => Mode::Numeric,
    };
    let grid = GridSpec {
        n: a.grid_n,
        lo_factor: a.lo_factor,
    };
    if !(a.c > 0.0 && a.lo_factor > 0.0 && a.lo_factor < 1.0 && a.grid_n >= 2) {
        return Err(Error::Config(
            "need c > 0, 0 < lo_factor < 1 and grid_n >= 2".into(),
        ));
    }
    print_json(&verify_drift_bound(&tf, &p, a.c, grid, direction, mode)?)
}

fn need(v: Option<f64>, flag: &str, lemma: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("--{flag} is required for {lemma}")))
}

fn ineq_cmd(a: IneqArgs) -> Result<()> {
    let mut rng = path_rng(a.seed, 0);
    let lemma = a.lemma.as_str();
    let v_grid: Vec<f64> = if a.v_grid.is_empty() {
        (1..=10).map(|i| i as f64 / 10.0).collect()
    } else {
        a.v_grid.clone()
    };
    let report = if let Ok(variant) = lemma.parse::<YoungVariant>() {
        let exponents = match a.exponents.as_slice() {
            [] => None,
            [p1, p2, p3, p4] => Some([*p1, *p2, *p3, *p4]),
            _ => return Err(Error::Config("--exponents takes four values".into())),
        };
        let coefficients = match a.coefficients.as_slice() {
            [] => None,
            [c1, c2, c3] => Some([*c1, *c2, *c3]),
            _ => return Err(Error::Config("--coefficients takes three values here".into())),
        };
        let inputs = YoungInputs {
            p: a.p,
            exponents,
            coefficients,
        };
        young_check(variant, &inputs, a.trials, &mut rng)?
    } else if let Ok(b) = lemma.parse::<BoxLemma>() {
        let e = BoxExponents {
            r1: need(a.r1, "r1", lemma)?,
            r2: need(a.r2, "r2", lemma)?,
            theta1: need(a.theta1, "theta1", lemma)?,
            theta2: need(a.theta2, "theta2", lemma)?,
            kappa1: need(a.kappa1, "kappa1", lemma)?,
            kappa2: need(a.kappa2, "kappa2", lemma)?,
            rho1: need(a.rho1, "rho1", lemma)?,
            rho2: a.rho2.unwrap_or(0.0),
        };
        find_box_constant(b, &e, &a.coefficients)?
    } else if let Ok(d) = lemma.parse::<DeltaLemma>() {
        let path = a
            .params
            .as_ref()
            .ok_or_else(|| Error::Config(format!("--params is required for {lemma}")))?;
        let p = load_params(path)?;
        let base = DeltaAux::default();
        let aux = DeltaAux {
            rho1: a.rho1.unwrap_or(base.rho1),
            rho: a.rho.unwrap_or(base.rho),
            eps0: a.eps0.unwrap_or(base.eps0),
        };
        find_delta0(d, &p, &aux, a.trials, &mut rng)?
    } else {
        let m = StableMeasure::new(a.alpha)?;
        match lemma {
            "kvz-split" => kvz_bounds_check(
                &m,
                need(a.rho1, "rho1", lemma)?,
                need(a.rho, "rho", lemma)?,
                &v_grid,
                KvzMode::Split { delta: a.delta },
            )?,
            "kvz-large-exponent" => kvz_bounds_check(
                &m,
                need(a.rho1, "rho1", lemma)?,
                need(a.rho, "rho", lemma)?,
                &v_grid,
                KvzMode::LargeExponent,
            )?,
            // `--rho` is the product ρ·ρ1 held fixed across the scan.
            "kvz-large-exponent-scan" => large_exponent_scan(&m, need(a.rho, "rho", lemma)?, &v_grid)?,
            other => return Err(Error::Config(format!("unknown lemma '{other}'"))),
        }
    };
    print_json(&report)
}

#[derive(Serialize)]
struct StableCheckReport {
    alpha: f64,
    lambda: f64,
    dt: f64,
    eps_jump: f64,
    gaussian_smalljump: bool,
    samples: usize,
    seed: u64,
    pass: bool,
    checks: Vec<crate::stablejump::LaplaceCheck>,
}

fn stable_check_cmd(a: StableCheckArgs) -> Result<()> {
    let m = StableMeasure::new(a.alpha)?;
    let scheme = CutoffScheme::new(a.eps, !a.no_gaussian_smalljump)?;
    let mut rng = path_rng(a.seed, 0);
    let checks = laplace_transform_check(&m, a.lambda, a.dt, scheme, &a.u, a.paths, &mut rng)?;
    print_json(&StableCheckReport {
        alpha: a.alpha,
        lambda: a.lambda,
        dt: a.dt,
        eps_jump: a.eps,
        gaussian_smalljump: scheme.gaussian_smalljump,
        samples: a.paths,
        seed: a.seed,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}
