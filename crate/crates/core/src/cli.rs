//! Command-line front end.
//!
//! Every command writes a JSON report containing the tool version, an echo
//! of its configuration, the seed, the active tolerances and the wall time.
//! Exit codes: 0 pass, 1 check failed, 2 parse or I/O error, 3 invariant
//! violation, 4 domain or precondition error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::calibration::Calibration;
use crate::error::{Error, Result};
use crate::nullspace::{default_null_sphere, mode_connect_perturb, verify_null, HarmonicNullTerm};
use crate::quadrature::{ball_grid, sphere_rule};
use crate::radon_measure::{alpha_from_spectrum, bound_check_2rcf, fit_affine, Rules};
use crate::sparsifier::{loglog_slope, ApproxReport, Convention, Experiment, TwoLayerNet};
use crate::spectrum::{SpectralMeasure, SpectrumFile};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "radonlab", version, about = "ReLU network representations on a ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Norm, Fourier constants and affine residual of a spectrum.
    Norm(NormArgs),
    /// Sample finite networks and record sup errors against the rate bound.
    Approximate(ApproxArgs),
    /// Check that a harmonic density represents zero on the ball.
    VerifyNull(NullArgs),
    /// Add a discretised null density to a network.
    Modeconnect(ModeArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Override a calibration constant, e.g. `mean_slack=1.2`.
    #[arg(long = "tol-override", value_name = "KEY=VALUE")]
    pub tol_override: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NormArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long = "R")]
    pub radius: f64,
    /// Points in the affine-fit grid.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long, default_value = "norm_report.json")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ApproxArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long = "R")]
    pub radius: f64,
    /// Comma-separated, strictly increasing widths.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    /// Points in the evaluation grid.
    #[arg(long, default_value_t = 500)]
    pub grid: usize,
    #[arg(long, default_value = "thm2")]
    pub convention: String,
    /// Network of the first trial at the largest width.
    #[arg(long, default_value = "network.json")]
    pub out: PathBuf,
    /// Decay curve `n, bound, mean_err, min_err, max_err`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Full JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NullArgs {
    /// `{"k", "j", "kprime", "coeff", "d", "R"}`.
    #[arg(long)]
    pub term: PathBuf,
    /// Number of test points.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sphere rule resolution; defaults depend on the dimension.
    #[arg(long)]
    pub sphere: Option<usize>,
    #[arg(long, default_value = "null_report.json")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModeArgs {
    /// Base network in `network.json` format.
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub term: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 500)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "modeconnect_report.json")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Serialize)]
struct Tool {
    name: &'static str,
    version: &'static str,
}

const TOOL: Tool = Tool {
    name: env!("CARGO_PKG_NAME"),
    version: env!("CARGO_PKG_VERSION"),
};

#[derive(Debug, Serialize)]
struct Report<'a, C: Serialize, R: Serialize> {
    tool: Tool,
    command: &'static str,
    config: &'a C,
    seed: u64,
    tolerances: &'a Calibration,
    overrides: &'a BTreeMap<String, f64>,
    result: R,
    pass: bool,
    wall_time_s: f64,
}

#[derive(Debug, Serialize)]
struct NormResult {
    d: usize,
    #[serde(rename = "R")]
    radius: f64,
    norm: f64,
    #[serde(rename = "C_f")]
    c_f: f64,
    #[serde(rename = "C_tilde")]
    c_tilde: f64,
    #[serde(rename = "bound_2RCf")]
    bound: f64,
    bound_ok: bool,
    residual_affine: f64,
    v: Vec<f64>,
    c: f64,
}

#[derive(Debug, Serialize)]
struct ApproxResult {
    d: usize,
    #[serde(rename = "R")]
    radius: f64,
    convention: Convention,
    norm: f64,
    kappa: f64,
    loglog_slope: Option<f64>,
    min_within_bound: bool,
    widths: Vec<ApproxReport>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) | Error::InvalidInput(_) => EXIT_PARSE,
        Error::InconsistentMeasure(_) | Error::NotEven(_) | Error::SingularFit(_) => EXIT_INVARIANT,
        Error::Domain(_)
        | Error::Precondition(_)
        | Error::UnsupportedDimension { .. }
        | Error::InvalidIndex { .. }
        | Error::DegenerateMeasure(_) => EXIT_DOMAIN,
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

fn write_report<C: Serialize, R: Serialize>(path: &Path, report: &Report<C, R>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    write_text(path, &text)
}

fn calibration(common: &CommonArgs) -> Result<(Calibration, BTreeMap<String, f64>)> {
    let mut cal = Calibration::default();
    let applied = cal.apply_overrides(&common.tol_override)?;
    Ok((cal, applied))
}

fn load_spectrum(path: &Path) -> Result<SpectralMeasure> {
    read_json::<SpectrumFile>(path)?.to_measure()
}

pub fn cmd_norm(args: &NormArgs) -> Result<bool> {
    let start = Instant::now();
    let (cal, overrides) = calibration(&args.common)?;
    let mu = load_spectrum(&args.spectrum)?;
    let d = mu.dim();
    let rules = Rules::default_for(d)?;
    let alpha = alpha_from_spectrum(&mu, args.radius)?;
    let check = bound_check_2rcf(&mu, args.radius, &rules)?;
    let grid = ball_grid(d, args.radius, args.grid, 0)?;
    let affine = fit_affine(&mu, &alpha, &grid, &rules)?;
    let bound_ok = check.norm <= check.bound + cal.bound_slack;
    let pass = bound_ok && affine.max_affine_residual <= cal.affine_tol;
    let result = NormResult {
        d,
        radius: args.radius,
        norm: check.norm,
        c_f: mu.second_moment(),
        c_tilde: mu.l1_second_moment(),
        bound: check.bound,
        bound_ok,
        residual_affine: affine.max_affine_residual,
        v: affine.v,
        c: affine.c,
    };
    write_report(
        &args.out,
        &Report {
            tool: TOOL,
            command: "norm",
            config: args,
            seed: 0,
            tolerances: &cal,
            overrides: &overrides,
            result,
            pass,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    )?;
    Ok(pass)
}

fn decay_csv(reports: &[ApproxReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "bound", "mean_err", "min_err", "max_err"])?;
    for r in reports {
        w.write_record([
            r.n.to_string(),
            r.bound.to_string(),
            r.mean_err.to_string(),
            r.min_err.to_string(),
            r.max_err.to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn cmd_approximate(args: &ApproxArgs) -> Result<bool> {
    let start = Instant::now();
    let (cal, overrides) = calibration(&args.common)?;
    let convention: Convention = args.convention.parse()?;
    if convention == Convention::Quadrature {
        return Err(Error::Parse("--convention must be thm2 or prop2".into()));
    }
    if convention == Convention::Prop2 && args.radius > 1.0 {
        return Err(Error::Domain(format!(
            "the prop2 convention needs R <= 1, got R = {}",
            args.radius
        )));
    }
    let mu = load_spectrum(&args.spectrum)?;
    let rules = Rules::default_for(mu.dim())?;
    let exp = Experiment::with_grid(&mu, args.radius, args.grid, &rules)?;
    let reports = exp.run(convention, &args.n, args.trials, args.seed)?;

    let last = args.n.len() - 1;
    let mut rng = crate::sparsifier::trial_rng(args.seed, last, args.trials, 0);
    let net = exp.network(convention, args.n[last], &mut rng)?;
    let mut text = serde_json::to_string_pretty(&net)?;
    text.push('\n');
    write_text(&args.out, &text)?;
    if let Some(p) = &args.csv {
        write_text(p, &decay_csv(&reports)?)?;
    }

    let min_within_bound = reports.iter().all(|r| r.min_err <= r.bound);
    let slope = (reports.len() >= 2).then(|| loglog_slope(&reports));
    let result = ApproxResult {
        d: mu.dim(),
        radius: args.radius,
        convention,
        norm: exp.sampler.norm(),
        kappa: reports[0].kappa,
        loglog_slope: slope,
        min_within_bound,
        widths: reports,
    };
    if let Some(p) = &args.report {
        write_report(
            p,
            &Report {
                tool: TOOL,
                command: "approximate",
                config: args,
                seed: args.seed,
                tolerances: &cal,
                overrides: &overrides,
                result,
                pass: min_within_bound,
                wall_time_s: start.elapsed().as_secs_f64(),
            },
        )?;
    }
    Ok(min_within_bound)
}

pub fn cmd_verify_null(args: &NullArgs) -> Result<bool> {
    let start = Instant::now();
    let (cal, overrides) = calibration(&args.common)?;
    let term: HarmonicNullTerm = read_json(&args.term)?;
    term.validate()?;
    let sphere = match args.sphere {
        Some(m) => sphere_rule(term.d, m)?,
        None => default_null_sphere(term.d)?,
    };
    let grid = ball_grid(term.d, term.radius, args.grid, args.seed)?;
    let report = verify_null(&term, &grid, &sphere, cal.null_tol)?;
    let pass = report.pass;
    write_report(
        &args.out,
        &Report {
            tool: TOOL,
            command: "verify-null",
            config: args,
            seed: args.seed,
            tolerances: &cal,
            overrides: &overrides,
            result: report,
            pass,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    )?;
    Ok(pass)
}

pub fn cmd_modeconnect(args: &ModeArgs) -> Result<bool> {
    let start = Instant::now();
    let (cal, overrides) = calibration(&args.common)?;
    let base: TwoLayerNet = read_json(&args.network)?;
    let term: HarmonicNullTerm = read_json(&args.term)?;
    term.validate()?;
    if !term.in_set_a() {
        return Err(Error::Precondition(format!(
            "(k, k') = ({}, {}) is not a null term",
            term.k, term.kprime
        )));
    }
    let grid = ball_grid(term.d, term.radius, args.grid, args.seed)?;
    let (_, report) = mode_connect_perturb(&base, &term, args.n, args.s, &grid, &cal)?;
    let pass = report.pass;
    write_report(
        &args.out,
        &Report {
            tool: TOOL,
            command: "modeconnect",
            config: args,
            seed: args.seed,
            tolerances: &cal,
            overrides: &overrides,
            result: report,
            pass,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    )?;
    Ok(pass)
}

/// Run a parsed command and map the outcome to an exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Norm(a) => cmd_norm(a),
        Command::Approximate(a) => cmd_approximate(a),
        Command::VerifyNull(a) => cmd_verify_null(a),
        Command::Modeconnect(a) => cmd_modeconnect(a),
    };
    match outcome {
        Ok(true) => EXIT_PASS,
        Ok(false) => {
            eprintln!("radonlab: check failed; see the report for details");
            EXIT_FAIL
        }
        Err(e) => {
            eprintln!("radonlab: {e}");
            exit_code(&e)
        }
    }
}
