//! The `dym` command line: argument parsing, file I/O and run manifests.
//!
//! Every command writes its outputs plus a `manifest.json` into `--out`.
//! `dym rerun --manifest FILE` replays the recorded command in deterministic
//! mode; its outputs are bitwise identical to the original run's.
//!
//! Exit codes: 0 success, 1 verification failure (or a solve that did not
//! converge), 2 usage or configuration error, 3 I/O or parse error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cochain::TorusGrid;
use crate::error::{Error, Result};
use crate::exterior::norm_sq;
use crate::matrix_form::{flatten, matrix_residual, torus_2x2_matrices, EdgeOrdering};
use crate::solver::{solve, InitSpec, SolverConfig, SolverStatus};
use crate::verify::{self, Fault, VerifyConfig};
use crate::yang_mills::{curvature, Connection, Equation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Tolerance for the matrix-form consistency flag.
pub const MATRIX_CONSISTENCY_TOL: f64 = 1e-13;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::Parse { .. } | Error::NotInSu2 { .. } | Error::DegreeMismatch { .. } => EXIT_IO,
        Error::Config(_) | Error::GridMismatch { .. } | Error::DegreeOverflow { .. } => EXIT_USAGE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "dym", version, about = "Discrete Yang-Mills on the combinatorial torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the randomized invariant suites.
    Verify(VerifyArgs),
    /// Curvature of a connection file.
    Curvature(InputArgs),
    /// Residual of a connection file for one equation.
    Residual(ResidualArgs),
    /// Block-matrix form on the 2×2 torus.
    MatrixForm(InputArgs),
    /// Minimize the residual norm.
    Solve(SolveArgs),
    /// Replay a run from its manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output directory.
    #[arg(long, default_value = "dym-out")]
    pub out: PathBuf,
    /// Force single-threaded evaluation.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Grid as NxM; repeat for several. Defaults to 1x1, 2x2, 3x5, 8x8.
    #[arg(long = "grid", value_parser = parse_grid)]
    pub grids: Vec<TorusGrid>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, hide = true, value_parser = parse_fault, default_value = "none")]
    pub fault: Fault,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Connection JSON.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ResidualArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "delta", value_parser = parse_equation)]
    pub equation: Equation,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Solver config JSON; flags given alongside override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<TorusGrid>,
    #[arg(long, value_parser = parse_equation)]
    pub equation: Option<Equation>,
    /// Seed of the random start.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Coordinate range of the random start.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Start from the zero connection.
    #[arg(long, conflicts_with_all = ["seed", "scale", "init_file"])]
    pub zero_init: bool,
    /// Start from a connection file.
    #[arg(long)]
    pub init_file: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "dym-rerun")]
    pub out: PathBuf,
}

fn parse_grid(s: &str) -> std::result::Result<TorusGrid, String> {
    TorusGrid::parse(s).map_err(|e| e.to_string())
}

fn parse_equation(s: &str) -> std::result::Result<Equation, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_fault(s: &str) -> std::result::Result<Fault, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|_| format!("unknown fault {s:?}"))
}

/// What a run did, enough to replay it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp: u64,
    pub deterministic: bool,
}

impl RunManifest {
    fn new(command: &str, config: Value, seed: Option<u64>, deterministic: bool) -> Self {
        RunManifest {
            command: command.to_string(),
            config,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            deterministic,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::from_json("manifest", e))
    }
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    write_out(dir, name, &text)
}

fn resolve(path: &Path) -> Result<PathBuf> {
    fs::canonicalize(path).map_err(|e| Error::io(path, e))
}

fn read_connection(path: &Path) -> Result<Connection> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Connection::from_json(&text)
}

fn form_value(f: &crate::cochain::DiscreteForm) -> Value {
    serde_json::from_str(&f.to_json().expect("degree 0..2")).expect("own output parses")
}

fn report(result: Result<i32>) -> i32 {
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}

/// Runs the invariant suites; exit 1 names every violated invariant.
pub fn cmd_verify(config: &VerifyConfig, out: &Path, deterministic: bool) -> i32 {
    report((|| {
        if config.trials == 0 {
            eprintln!("warning: no trials requested; nothing was checked");
        }
        let report = verify::run(config);
        print!("{}", report.summary());
        write_json(out, "verify_report.json", &report.checks)?;
        write_out(out, "diagnostics.csv", &report.diagnostics_csv())?;
        let manifest = RunManifest::new("verify", serde_json::to_value(config).expect("config"), Some(config.seed), deterministic);
        write_json(out, "manifest.json", &manifest)?;
        let failures = report.failures();
        for c in &failures {
            eprintln!("invariant violated: {} (max error {:e} > tol {:e})", c.name, c.max_error, c.tol);
        }
        Ok(if failures.is_empty() { EXIT_OK } else { EXIT_FAILED })
    })())
}

/// Writes `F` and its diagnostics for a connection file.
pub fn cmd_curvature(input: &Path, out: &Path, deterministic: bool) -> i32 {
    report((|| {
        let input = resolve(input)?;
        let a = read_connection(&input)?;
        let f = curvature(&a);
        let doc = json!({
            "curvature": form_value(&f.form),
            "norm_sq": norm_sq(&f.form),
            "su2_deviation_max": f.su2_deviation_max,
        });
        write_json(out, "curvature.json", &doc)?;
        let manifest = RunManifest::new("curvature", json!({ "input": input }), None, deterministic);
        write_json(out, "manifest.json", &manifest)?;
        println!("norm_sq={:e} su2_deviation_max={:e}", norm_sq(&f.form), f.su2_deviation_max);
        Ok(EXIT_OK)
    })())
}

/// Writes the residual 1-form of one equation for a connection file.
pub fn cmd_residual(input: &Path, eq: Equation, out: &Path, deterministic: bool) -> i32 {
    report((|| {
        let input = resolve(input)?;
        let a = read_connection(&input)?;
        let r = eq.residual(&a);
        let doc = json!({
            "equation": eq,
            "residual": form_value(&r),
            "max_abs": r.max_abs(),
            "norm_sq": norm_sq(&r),
        });
        write_json(out, "residual.json", &doc)?;
        let manifest = RunManifest::new("residual", json!({ "input": input, "equation": eq }), None, deterministic);
        write_json(out, "manifest.json", &manifest)?;
        println!("{}: max_abs={:e} norm_sq={:e}", eq.name(), r.max_abs(), norm_sq(&r));
        Ok(EXIT_OK)
    })())
}

/// Writes the constant matrices, the flattened cochains and both matrix
/// residuals, checked against the stencil residuals.
pub fn cmd_matrix_form(input: &Path, out: &Path, deterministic: bool) -> i32 {
    report((|| {
        let input = resolve(input)?;
        let a = read_connection(&input)?;
        let (av, fv, ssa) = flatten(&a)?;
        let order = EdgeOrdering::torus_2x2();
        let mut max_diff = 0.0f64;
        let mut residuals = serde_json::Map::new();
        for eq in [Equation::Dstar, Equation::Delta] {
            let m = matrix_residual(&a, eq)?;
            max_diff = max_diff.max(m.max_abs_diff(&order.flatten(&eq.residual(&a))));
            residuals.insert(eq.name().to_string(), json!(&m.entries));
        }
        let mats = torus_2x2_matrices();
        let consistent = max_diff <= MATRIX_CONSISTENCY_TOL;
        let doc = json!({
            "D": mats.d.entries,
            "S": mats.s.entries,
            "D1": mats.d1.entries,
            "D2": mats.d2.entries,
            "A": &av.entries,
            "F": &fv.entries,
            "star_star_A": &ssa.entries,
            "residual": residuals,
            "stencil_max_abs_diff": max_diff,
            "consistent": consistent,
        });
        write_json(out, "matrix_form.json", &doc)?;
        let manifest = RunManifest::new("matrix-form", json!({ "input": input }), None, deterministic);
        write_json(out, "manifest.json", &manifest)?;
        println!("{} (max difference to stencil {:e})", if consistent { "consistent" } else { "INCONSISTENT" }, max_diff);
        Ok(if consistent { EXIT_OK } else { EXIT_FAILED })
    })())
}

/// Runs the solver and writes `trace.csv`, `connection.json`, `manifest.json`.
pub fn cmd_solve(config: &SolverConfig, out: &Path, deterministic: bool) -> i32 {
    report((|| {
        let mut config = config.clone();
        if let InitSpec::File { path } = &config.init {
            config.init = InitSpec::File { path: resolve(path)? };
        }
        if deterministic {
            config.parallel = false;
        }
        let (a, trace) = solve(&config)?;
        write_out(out, "trace.csv", &trace.to_csv())?;
        write_out(out, "connection.json", &(a.to_json()? + "\n"))?;
        let seed = match config.init {
            InitSpec::Random { seed, .. } => Some(seed),
            _ => None,
        };
        let manifest = RunManifest::new("solve", serde_json::to_value(&config).expect("config"), seed, deterministic);
        write_json(out, "manifest.json", &manifest)?;
        println!(
            "{:?} after {} iterations, objective {:e}",
            trace.status,
            trace.iterations(),
            trace.final_objective()
        );
        Ok(if trace.status == SolverStatus::Converged { EXIT_OK } else { EXIT_FAILED })
    })())
}

fn config_error(msg: String) -> Error {
    Error::Config(msg)
}

fn field<T: serde::de::DeserializeOwned>(config: &Value, key: &str) -> Result<T> {
    let v = config.get(key).cloned().ok_or_else(|| config_error(format!("manifest config lacks {key:?}")))?;
    serde_json::from_value(v).map_err(|e| config_error(format!("manifest field {key:?}: {e}")))
}

/// Replays a manifest in deterministic mode.
pub fn cmd_rerun(manifest: &Path, out: &Path) -> i32 {
    let run = || -> Result<i32> {
        let m = RunManifest::read(manifest)?;
        let cfg = &m.config;
        Ok(match m.command.as_str() {
            "verify" => {
                let config: VerifyConfig =
                    serde_json::from_value(cfg.clone()).map_err(|e| config_error(format!("verify config: {e}")))?;
                cmd_verify(&config, out, true)
            }
            "solve" => {
                let config = SolverConfig::from_json(&cfg.to_string())?;
                cmd_solve(&config, out, true)
            }
            "curvature" => cmd_curvature(&field::<PathBuf>(cfg, "input")?, out, true),
            "residual" => cmd_residual(&field::<PathBuf>(cfg, "input")?, field(cfg, "equation")?, out, true),
            "matrix-form" => cmd_matrix_form(&field::<PathBuf>(cfg, "input")?, out, true),
            other => return Err(config_error(format!("unknown command {other:?} in manifest"))),
        })
    };
    report(run())
}

fn solve_config(args: &SolveArgs) -> Result<SolverConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            SolverConfig::from_json(&text)?
        }
        None => {
            let grid = args.grid.unwrap_or(TorusGrid::new(2, 2)?);
            SolverConfig::new(grid, InitSpec::Random { scale: 0.05, seed: 1 })
        }
    };
    if let Some(grid) = args.grid {
        cfg.grid = grid;
    }
    if let Some(eq) = args.equation {
        cfg.equation = eq;
    }
    if args.zero_init {
        cfg.init = InitSpec::Zero;
    } else if let Some(path) = &args.init_file {
        cfg.init = InitSpec::File { path: path.clone() };
    } else if args.seed.is_some() || args.scale.is_some() {
        let (scale, seed) = match cfg.init {
            InitSpec::Random { scale, seed } => (scale, seed),
            _ => (0.05, 1),
        };
        cfg.init = InitSpec::Random {
            scale: args.scale.unwrap_or(scale),
            seed: args.seed.unwrap_or(seed),
        };
    }
    if let Some(tol) = args.tol {
        cfg.tol_residual = tol;
    }
    if let Some(n) = args.max_iters {
        cfg.max_iters = n;
    }
    cfg.parallel = !args.common.deterministic;
    cfg.validate()?;
    Ok(cfg)
}

/// Dispatches parsed arguments.
pub fn execute(cli: Cli) -> i32 {
    match cli.command {
        Command::Verify(a) => {
            let mut config = VerifyConfig::standard(a.seed);
            if !a.grids.is_empty() {
                config.grids = a.grids;
            }
            config.trials = a.trials;
            config.fault = a.fault;
            cmd_verify(&config, &a.common.out, a.common.deterministic)
        }
        Command::Curvature(a) => cmd_curvature(&a.input, &a.common.out, a.common.deterministic),
        Command::Residual(a) => cmd_residual(&a.input, a.equation, &a.common.out, a.common.deterministic),
        Command::MatrixForm(a) => cmd_matrix_form(&a.input, &a.common.out, a.common.deterministic),
        Command::Solve(a) => match solve_config(&a) {
            Ok(cfg) => cmd_solve(&cfg, &a.common.out, a.common.deterministic),
            Err(e) => report(Err(e)),
        },
        Command::Rerun(a) => cmd_rerun(&a.manifest, &a.out),
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::parse("f", "m")), EXIT_IO);
        assert_eq!(run(["dym", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["dym", "--help"]), EXIT_OK);
        assert_eq!(run(["dym", "verify", "--grid", "0x3"]), EXIT_USAGE);
    }

    #[test]
    fn solve_flags_override() {
        let cli = Cli::try_parse_from(["dym", "solve", "--seed", "4", "--tol", "1e-8", "--equation", "dstar"]).unwrap();
        let Command::Solve(args) = cli.command else { panic!() };
        let cfg = solve_config(&args).unwrap();
        assert_eq!(cfg.init, InitSpec::Random { scale: 0.05, seed: 4 });
        assert_eq!(cfg.tol_residual, 1e-8);
        assert_eq!(cfg.equation, Equation::Dstar);
        assert!(cfg.parallel);
    }
}
