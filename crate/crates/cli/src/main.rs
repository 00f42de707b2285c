//! Command-line front end: solve, fit, estimate, verify and time QSVT angle
//! sets.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qsvt_angles::angle_estimator::{estimate_angles, EstimateRequest};
use qsvt_angles::cheb::DEFAULT_NA_CAP;
use qsvt_angles::io::{self, LoadedSystem, SystemSpec};
use qsvt_angles::meta_fit::{build_meta, DEFAULT_N_AMPL, DEFAULT_N_SH};
use qsvt_angles::phase_solver::{solve_angles, SolveConfig};
use qsvt_angles::target_fn::DEFAULT_ETA;
use qsvt_angles::verifier::{inversion_error, inversion_error_unchecked, sweep_error, xi_max_for_norm};
use rayon::prelude::*;
use serde_json::json;

const EXIT_INVALID: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;

#[derive(Parser)]
#[command(name = "qsvt-angles", version, about = "QSVT phase angles for matrix inversion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a high-precision angle set by loss minimization
    Solve(SolveArgs),
    /// Solve a bank of reference sets, one file per kappa
    Bank(BankArgs),
    /// Fit metaparameters to a bank of reference sets
    Fit(FitArgs),
    /// Estimate an angle set for a large condition number
    Estimate(EstimateArgs),
    /// Dense error sweep of an angle set against the scaled target
    Sweep(SweepArgs),
    /// Emulated inversion of a test system
    Invert(InvertArgs),
    /// Time the estimator over several condition numbers
    Bench(BenchArgs),
    /// Write a test system description
    #[command(subcommand)]
    System(SystemCommand),
}

#[derive(Args)]
struct SolverOpts {
    /// Target Chebyshev truncation error
    #[arg(long, default_value_t = 1e-7)]
    eps: f64,
    /// Normalization of the target function
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iterations: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    kappa: f64,
    /// Number of angles (even); derived from --eps when absent
    #[arg(long)]
    na: Option<usize>,
    #[command(flatten)]
    solver: SolverOpts,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BankArgs {
    /// Explicit list of kappa values
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["kappa_min", "kappa_max", "kappa_step"])]
    kappas: Vec<f64>,
    #[arg(long, default_value_t = 10.0)]
    kappa_min: f64,
    #[arg(long, default_value_t = 650.0)]
    kappa_max: f64,
    #[arg(long, default_value_t = 10.0)]
    kappa_step: f64,
    #[command(flatten)]
    solver: SolverOpts,
    /// Concurrent solves
    #[arg(long, env = "QPF_JOBS")]
    jobs: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Reference angle files or directories holding them
    #[arg(long, num_args = 1.., required = true)]
    refs: Vec<PathBuf>,
    /// Kappa of the envelope reference; the largest bank kappa by default
    #[arg(long)]
    env_kappa: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_N_AMPL)]
    n_ampl: usize,
    #[arg(long, default_value_t = DEFAULT_N_SH)]
    n_sh: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    meta: PathBuf,
    #[arg(long)]
    kappa0: f64,
    #[arg(long, default_value_t = DEFAULT_NA_CAP)]
    na_cap: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    angles: PathBuf,
    #[arg(long, default_value_t = 2001)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InvertArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long)]
    angles: PathBuf,
    /// Skip the kappa >= rho_A / ||A|| check
    #[arg(long)]
    unchecked: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    meta: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    kappas: Vec<f64>,
    /// Runs per kappa; the median is reported
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Also write the CSV here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SystemCommand {
    /// diag(sin xi_k) on a uniform xi grid
    Sine {
        #[arg(long)]
        n_x: u32,
        #[arg(long, conflicts_with = "norm")]
        xi_max: Option<f64>,
        /// Spectral norm; sets xi_max = asin(norm)
        #[arg(long)]
        norm: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// diag((eta_A / kappa) F(x_k)) on symmetric grids over [1/kappa, 1]
    InverseApprox {
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        eta_a: f64,
        #[arg(long)]
        n_x: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Solve(args) => solve(args),
        Command::Bank(args) => bank(args),
        Command::Fit(args) => fit(args).map(|_| 0),
        Command::Estimate(args) => estimate(args).map(|_| 0),
        Command::Sweep(args) => sweep(args).map(|_| 0),
        Command::Invert(args) => invert(args).map(|_| 0),
        Command::Bench(args) => bench(args).map(|_| 0),
        Command::System(cmd) => system(cmd).map(|_| 0),
    }
}

fn solve_config(kappa: f64, na: Option<usize>, opts: &SolverOpts) -> SolveConfig {
    SolveConfig {
        eta: opts.eta,
        eps_target: opts.eps,
        na_override: na,
        max_iterations: opts.max_iterations,
        ..SolveConfig::new(kappa)
    }
}

fn solve(args: SolveArgs) -> Result<u8> {
    let config = solve_config(args.kappa, args.na, &args.solver);
    let start = Instant::now();
    let result = solve_angles(&config)?;
    let seconds = start.elapsed().as_secs_f64();
    io::save_angles(&args.out, &result.angles)?;
    println!(
        "{}",
        json!({
            "kappa": args.kappa,
            "n_a": result.angles.num_angles(),
            "final_loss": result.final_loss,
            "iterations": result.iterations,
            "max_residual": result.max_residual,
            "converged": result.converged,
            "wall_seconds": seconds,
        })
    );
    Ok(if result.converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn bank_kappas(args: &BankArgs) -> Result<Vec<f64>> {
    if !args.kappas.is_empty() {
        return Ok(args.kappas.clone());
    }
    if !(args.kappa_step > 0.0 && args.kappa_min >= 1.0 && args.kappa_max >= args.kappa_min) {
        bail!("need 1 <= kappa-min <= kappa-max and kappa-step > 0");
    }
    let count = ((args.kappa_max - args.kappa_min) / args.kappa_step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| args.kappa_min + args.kappa_step * i as f64).collect())
}

fn bank(args: BankArgs) -> Result<u8> {
    let kappas = bank_kappas(&args)?;
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let jobs = args.jobs.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let outcomes: Vec<Result<bool>> = pool.install(|| {
        kappas
            .par_iter()
            .map(|&kappa| {
                let result = solve_angles(&solve_config(kappa, None, &args.solver))?;
                let path = args.out_dir.join(format!("ref_kappa_{kappa}.json"));
                io::save_angles(&path, &result.angles)?;
                eprintln!(
                    "kappa {kappa}: n_a {}, max residual {:e}, {} iterations",
                    result.angles.num_angles(),
                    result.max_residual,
                    result.iterations
                );
                Ok(result.converged)
            })
            .collect()
    });
    let mut all_converged = true;
    for outcome in outcomes {
        all_converged &= outcome?;
    }
    Ok(if all_converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn fit(args: FitArgs) -> Result<()> {
    let bank = io::load_bank(&args.refs)?;
    let env_kappa = match args.env_kappa {
        Some(k) => k,
        None => *bank.kappas().last().expect("bank is non-empty"),
    };
    let meta = build_meta(&bank, env_kappa, args.n_ampl, args.n_sh)?;
    io::save_meta(&args.out, &meta)?;
    println!(
        "{}",
        json!({
            "bank_size": bank.len(),
            "kappa_ref": meta.kappa_ref,
            "na_ref": meta.na_ref,
            "fit_residuals": meta.fit_residuals,
        })
    );
    Ok(())
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let meta = io::load_meta(&args.meta)?;
    let request = EstimateRequest {
        na_cap: args.na_cap,
        ..EstimateRequest::new(args.kappa0, &meta)
    };
    let start = Instant::now();
    let set = estimate_angles(&request)?;
    let seconds = start.elapsed().as_secs_f64();
    io::save_angles(&args.out, &set)?;
    println!(
        "{}",
        json!({ "kappa0": args.kappa0, "n_a": set.num_angles(), "theta_max": meta.theta_max(args.kappa0) })
    );
    eprintln!("estimated in {seconds:.6} s");
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let set = io::load_angles(&args.angles)?;
    let report = sweep_error(&set, args.points)?;
    io::write_sweep_csv(&args.out, &report)?;
    println!(
        "{}",
        json!({ "points": args.points, "max_err": report.max_err, "argmax_s": report.argmax_s })
    );
    Ok(())
}

fn invert(args: InvertArgs) -> Result<()> {
    let set = io::load_angles(&args.angles)?;
    let report = match io::load_system(&args.system)? {
        LoadedSystem::Diagonal(sys) if args.unchecked => inversion_error_unchecked(&sys, &set)?,
        LoadedSystem::Diagonal(sys) => inversion_error(&sys, &set)?,
        LoadedSystem::Svd(sys) => sys.inversion_error(&set)?,
    };
    io::write_inversion_report_csv(&args.out, &report)?;
    println!(
        "{}",
        json!({ "size": report.qsvt.len(), "max_abs_err": report.max_abs_err, "argmax": report.argmax })
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let meta = io::load_meta(&args.meta)?;
    let rows = io::bench_estimate(&meta, &args.kappas, args.repeats)?;
    let csv = io::bench_csv(&rows);
    print!("{csv}");
    if let Some(out) = &args.out {
        io::write_atomic(out, csv.as_bytes())?;
    }
    Ok(())
}

fn system(cmd: SystemCommand) -> Result<()> {
    let (spec, out): (SystemSpec, &Path) = match &cmd {
        SystemCommand::Sine { n_x, xi_max, norm, out } => {
            let xi_max = match (xi_max, norm) {
                (Some(x), _) => *x,
                (None, Some(n)) => xi_max_for_norm(*n)?,
                (None, None) => std::f64::consts::FRAC_PI_2,
            };
            (SystemSpec::Sine { n_x: *n_x, xi_max }, out)
        }
        SystemCommand::InverseApprox { kappa, eta_a, n_x, out } => (
            SystemSpec::InverseApprox {
                kappa: *kappa,
                eta_a: *eta_a,
                n_x: *n_x,
            },
            out,
        ),
    };
    // build once so that invalid parameters never reach the disk
    let summary = match spec.build()? {
        LoadedSystem::Diagonal(d) => json!({ "size": d.len(), "rho_a": d.rho_a(), "norm": d.norm() }),
        LoadedSystem::Svd(s) => json!({ "size": s.singular_values.len(), "rho_a": s.rho_a(), "norm": s.norm() }),
    };
    io::save_system(out, &spec)?;
    println!("{summary}");
    Ok(())
}
