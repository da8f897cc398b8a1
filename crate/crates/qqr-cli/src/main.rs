//! `qqr` — generate, solve, and benchmark quartically-regularized cubic
//! polynomial minimization problems.
//!
//! Exit codes: 0 on full completion, 2 when any solver stopped at its
//! iteration budget, 1 on usage or runtime errors.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use qqr_core::qqr::SolveStatus;
use qqr_core::{ar3_minimize, builtin_problem, Ar3Options, Ar3Subsolver};

use qqr_cli::bench::{self, BenchConfig, SolverKind};
use qqr_cli::gen::{generate_instance, Family, GenericParams, InstanceSpec};
use qqr_cli::{profile, qp3};

#[derive(Parser)]
#[command(
    name = "qqr",
    version,
    about = "Minimize quartically-regularized cubic polynomials and benchmark solvers"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded random instance and write it as a QP3 file.
    Gen(GenArgs),
    /// Solve a QP3 instance with one solver.
    Solve(SolveArgs),
    /// Run a benchmark suite described by a TOML config.
    Bench(BenchArgs),
    /// Compute performance profiles from a solver-costs CSV.
    Profile(ProfileArgs),
    /// Minimize a built-in smooth test problem with the AR3 outer loop.
    Ar3(Ar3Args),
}

#[derive(Args)]
struct GenArgs {
    /// Family: generic, custom, convex_h, locally_convex_h, concave_h,
    /// illcond_diag_h, illcond_diag_t, positive_diag_t.
    #[arg(long)]
    family: String,
    /// Dimension.
    #[arg(long)]
    n: usize,
    /// Instance seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (QP3 format).
    #[arg(long)]
    out: PathBuf,
    /// Gradient scale (generic/custom only).
    #[arg(long, default_value_t = 80.0)]
    a: f64,
    /// Hessian scale (generic/custom only).
    #[arg(long, default_value_t = 80.0)]
    b: f64,
    /// Tensor scale (generic/custom only).
    #[arg(long, default_value_t = 80.0)]
    c: f64,
    /// Quartic regularization weight (generic/custom only).
    #[arg(long, default_value_t = 80.0)]
    sigma: f64,
}

#[derive(Args)]
struct SolveArgs {
    /// Solver to run.
    #[arg(long, value_enum)]
    solver: SolverKind,
    /// Input QP3 file.
    #[arg(long = "in")]
    input: PathBuf,
    /// First-order tolerance on the gradient norm.
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    /// Iteration budget.
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Write the per-iteration trace as JSON lines to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML benchmark configuration.
    #[arg(long)]
    config: PathBuf,
    /// Write per-run records as CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the aggregate table as Markdown to this path.
    #[arg(long)]
    md: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Costs CSV: one row per solver, `name,c1,c2,...`, `inf` for unsolved.
    #[arg(long)]
    costs: PathBuf,
    /// Output CSV of `solver,tau,gamma` rows at all breakpoints.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Ar3Args {
    /// Problem: rosenbrock, quartic_well, scaled_exponential_like.
    #[arg(long)]
    problem: String,
    /// Dimension.
    #[arg(long)]
    n: usize,
    /// Inner solver for the AR3 subproblems.
    #[arg(long, value_enum, default_value_t = InnerSolver::QqrV2)]
    subsolver: InnerSolver,
    /// Starting point as comma-separated values (defaults per problem).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    x0: Option<Vec<f64>>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum InnerSolver {
    QqrV2,
    QqrV1,
    Arc,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Profile(args) => cmd_profile(args),
        Cmd::Ar3(args) => cmd_ar3(args),
    }
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let params = GenericParams { a: args.a, b: args.b, c: args.c, sigma: args.sigma };
    let family = Family::parse(&args.family, params)?;
    let spec = InstanceSpec { n: args.n, family, seed: args.seed };
    let p = generate_instance(&spec)?;
    qp3::save(&p, &args.out)?;
    println!(
        "wrote {} (family {}, n = {}, seed = {})",
        args.out.display(),
        family.label(),
        args.n,
        args.seed
    );
    Ok(0)
}

fn cmd_solve(args: SolveArgs) -> Result<i32> {
    let p = qp3::load(&args.input)?;
    let report = bench::run_solver(args.solver, &p, args.eps, args.max_iter)
        .with_context(|| format!("running {}", args.solver))?;
    if let Some(path) = &args.trace {
        let mut out = Vec::new();
        for rec in &report.trace {
            serde_json::to_writer(&mut out, rec)?;
            out.push(b'\n');
        }
        fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("solver: {}", args.solver);
    println!("status: {}", report.status);
    println!("min_value: {:.12e}", report.min_value);
    println!("final_grad_norm: {:.6e}", report.final_grad_norm);
    println!("iterations: {}", report.iterations);
    println!("evaluations: {}", report.evaluations);
    Ok(if report.status == SolveStatus::MaxIter { 2 } else { 0 })
}

fn cmd_bench(args: BenchArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let cfg = BenchConfig::from_toml(&text)?;
    let outcome = bench::run_suite(&cfg)?;
    if let Some(path) = &args.csv {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        bench::write_csv(&outcome.records, file)?;
    }
    let md = bench::render_markdown(&outcome.aggregates);
    if let Some(path) = &args.md {
        fs::write(path, &md).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{md}");
    std::io::stdout().flush()?;
    Ok(if outcome.any_max_iter() { 2 } else { 0 })
}

fn cmd_profile(args: ProfileArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.costs)
        .with_context(|| format!("reading {}", args.costs.display()))?;
    let (solvers, costs) = profile::read_costs_csv(&text)?;
    let curves = profile::performance_profile(&solvers, &costs, &[])?;
    let file =
        fs::File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    profile::write_profile_csv(&curves, file)?;
    for curve in &curves {
        let last = curve.points.last().map(|(_, g)| *g).unwrap_or(0.0);
        println!("{}: {} breakpoints, final gamma {:.4}", curve.solver, curve.points.len(), last);
    }
    Ok(0)
}

fn default_start(problem: &str, n: usize) -> Vec<f64> {
    match problem {
        // The classical start alternates -1.2 and 1.
        "rosenbrock" => (0..n).map(|i| if i % 2 == 0 { -1.2 } else { 1.0 }).collect(),
        "quartic_well" => vec![2.0; n],
        _ => vec![1.0; n],
    }
}

fn cmd_ar3(args: Ar3Args) -> Result<i32> {
    let obj = builtin_problem(&args.problem, args.n)?;
    let x0 = args.x0.unwrap_or_else(|| default_start(&args.problem, args.n));
    anyhow::ensure!(
        x0.len() == args.n,
        "starting point has {} entries for dimension {}",
        x0.len(),
        args.n
    );
    let subsolver = match args.subsolver {
        InnerSolver::QqrV2 => Ar3Subsolver::QqrV2,
        InnerSolver::QqrV1 => Ar3Subsolver::QqrV1,
        InnerSolver::Arc => Ar3Subsolver::Arc,
    };
    let report = ar3_minimize(
        obj.as_ref(),
        &DVector::from_vec(x0),
        subsolver,
        &Ar3Options::default(),
    )?;
    println!("problem: {} (n = {})", args.problem, args.n);
    println!("status: {}", report.status);
    println!("f_star: {:.12e}", report.f_star);
    println!("final_grad_norm: {:.6e}", report.final_grad_norm);
    println!("outer_iterations: {}", report.outer_iterations);
    println!("outer_evaluations: {}", report.outer_evaluations);
    println!("inner_iterations_mean: {:.3}", report.inner_iterations_mean);
    Ok(if report.status == SolveStatus::MaxIter { 2 } else { 0 })
}
