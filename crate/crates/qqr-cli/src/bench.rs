//! Benchmark harness: runs the four solvers over seeded instance families
//! and aggregates iteration counts, evaluation counts, and relative minima.

use std::fmt;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use qqr_core::qqr::{SolveReport, SolveStatus, SolverOptions};
use qqr_core::{solve_arc, solve_nesterov, ArcOptions, QuarticPolynomial};
use serde::{Deserialize, Serialize};

use crate::gen::{generate_instance, Family, GenericParams, InstanceSpec};

/// The solvers the harness can dispatch to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    QqrV1,
    QqrV2,
    Nesterov,
    Arc,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::QqrV1 => "qqr-v1",
            SolverKind::QqrV2 => "qqr-v2",
            SolverKind::Nesterov => "nesterov",
            SolverKind::Arc => "arc",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Options used for the QQR solvers and Nesterov's method in benchmark runs:
/// the table parameter profile (rho1 = 0.3, rho2 = 3, eta0 = 0.5, eta1 = 2,
/// gamma0 = 0.8, gamma1 = 1.2, gamma2 = 1.1) with the given tolerance.
pub fn bench_solver_options(epsilon: f64, max_iter: usize) -> SolverOptions {
    SolverOptions { epsilon, max_iter, ..SolverOptions::default() }
}

/// ARC options for benchmark runs, sharing the table acceptance thresholds.
pub fn bench_arc_options(epsilon: f64, max_iter: usize) -> ArcOptions {
    ArcOptions { rho1: 0.3, rho2: 3.0, epsilon, max_iter, ..ArcOptions::default() }
}

/// Runs one solver on one polynomial with the benchmark parameter profile.
pub fn run_solver(
    kind: SolverKind,
    p: &QuarticPolynomial,
    epsilon: f64,
    max_iter: usize,
) -> Result<SolveReport, qqr_core::CoreError> {
    let opts = bench_solver_options(epsilon, max_iter);
    match kind {
        SolverKind::QqrV1 => qqr_core::solve_v1(p, &opts),
        SolverKind::QqrV2 => qqr_core::solve_v2(p, &opts),
        SolverKind::Nesterov => solve_nesterov(p, &opts),
        SolverKind::Arc => {
            let x0 = nalgebra::DVector::zeros(p.dim());
            solve_arc(p, &x0, &bench_arc_options(epsilon, max_iter))
        }
    }
}

/// One solver × instance result row (the CSV schema).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub solver: String,
    pub family: String,
    pub n: usize,
    pub seed: u64,
    pub status: String,
    pub min_value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub wall_time_s: f64,
}

/// Per-(family, n, solver) aggregate over seeds.
#[derive(Clone, Debug, Serialize)]
pub struct AggregateRow {
    pub family: String,
    pub n: usize,
    pub solver: String,
    pub relative_min: Option<f64>,
    pub mean_min_value: f64,
    pub mean_iterations: f64,
    pub mean_evaluations: f64,
    pub mean_wall_time_s: f64,
}

/// A problem set in the benchmark configuration.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetConfig {
    pub family: String,
    pub n: Vec<usize>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub sigma: Option<f64>,
    /// Solvers for this set only; defaults to the global list.
    pub solvers: Option<Vec<SolverKind>>,
}

fn default_epsilon() -> f64 {
    1e-5
}
fn default_seeds() -> u64 {
    10
}
fn default_max_iter() -> usize {
    1000
}
fn default_solvers() -> Vec<SolverKind> {
    vec![SolverKind::QqrV1, SolverKind::QqrV2, SolverKind::Nesterov, SolverKind::Arc]
}

/// TOML benchmark configuration.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub base_seed: u64,
    /// Number of seeds per (family, n) set.
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_solvers")]
    pub solvers: Vec<SolverKind>,
    pub sets: Vec<SetConfig>,
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: BenchConfig = toml::from_str(text).context("parsing benchmark config")?;
        if cfg.sets.is_empty() {
            bail!("benchmark config declares no problem sets");
        }
        if cfg.seeds == 0 {
            bail!("benchmark config needs at least one seed per set");
        }
        Ok(cfg)
    }
}

/// All results of a benchmark run.
#[derive(Clone, Debug)]
pub struct BenchOutcome {
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<AggregateRow>,
}

impl BenchOutcome {
    /// True when any run hit its iteration budget (drives exit code 2).
    pub fn any_max_iter(&self) -> bool {
        self.records.iter().any(|r| r.status == "max_iter")
    }
}

/// Runs the configured suite. Individual solver failures are recorded in
/// the `status` column rather than aborting the suite.
pub fn run_suite(cfg: &BenchConfig) -> Result<BenchOutcome> {
    let mut records = Vec::new();
    for set in &cfg.sets {
        let params = GenericParams {
            a: set.a.unwrap_or(80.0),
            b: set.b.unwrap_or(80.0),
            c: set.c.unwrap_or(80.0),
            sigma: set.sigma.unwrap_or(80.0),
        };
        let family = Family::parse(&set.family, params)?;
        let solvers = set.solvers.as_deref().unwrap_or(&cfg.solvers);
        for &n in &set.n {
            for idx in 0..cfg.seeds {
                let spec = InstanceSpec { n, family, seed: cfg.base_seed + idx };
                let p = generate_instance(&spec)?;
                for &kind in solvers {
                    records.push(run_recorded(kind, &p, &spec, cfg.epsilon, cfg.max_iter));
                }
            }
        }
    }
    let aggregates = aggregate(&records);
    Ok(BenchOutcome { records, aggregates })
}

fn run_recorded(
    kind: SolverKind,
    p: &QuarticPolynomial,
    spec: &InstanceSpec,
    epsilon: f64,
    max_iter: usize,
) -> RunRecord {
    let start = Instant::now();
    let outcome = run_solver(kind, p, epsilon, max_iter);
    let wall_time_s = start.elapsed().as_secs_f64();
    let (status, min_value, iterations, evaluations) = match outcome {
        Ok(report) => (
            match report.status {
                SolveStatus::Converged => "converged".to_string(),
                SolveStatus::MaxIter => "max_iter".to_string(),
            },
            report.min_value,
            report.iterations,
            report.evaluations,
        ),
        Err(_) => ("error".to_string(), f64::NAN, 0, 0),
    };
    RunRecord {
        solver: kind.name().to_string(),
        family: spec.family.label(),
        n: spec.n,
        seed: spec.seed,
        status,
        min_value,
        iterations,
        evaluations,
        wall_time_s,
    }
}

/// Relative minima of a set of per-solver values: each value divided by the
/// mean of all values, keeping the sign of the literal ratio. A zero or
/// non-finite mean makes every entry degenerate (`None`).
pub fn relative_minima(values: &[f64]) -> Vec<Option<f64>> {
    if values.is_empty() {
        return Vec::new();
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean == 0.0 || !mean.is_finite() {
        return vec![None; values.len()];
    }
    values.iter().map(|v| Some(v / mean)).collect()
}

/// Groups records by (family, n) and averages each solver's columns across
/// seeds, attaching relative minima within the group.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateRow> {
    // Group keys in first-appearance order to keep output stable.
    let mut groups: Vec<(String, usize, Vec<&RunRecord>)> = Vec::new();
    for rec in records {
        match groups.iter_mut().find(|(f, n, _)| *f == rec.family && *n == rec.n) {
            Some((_, _, rows)) => rows.push(rec),
            None => groups.push((rec.family.clone(), rec.n, vec![rec])),
        }
    }

    let mut out = Vec::new();
    for (family, n, rows) in groups {
        let mut solvers: Vec<&str> = Vec::new();
        for rec in &rows {
            if !solvers.contains(&rec.solver.as_str()) {
                solvers.push(&rec.solver);
            }
        }
        let mut means = Vec::new();
        for solver in &solvers {
            let mine: Vec<&&RunRecord> = rows.iter().filter(|r| r.solver == *solver).collect();
            let len = mine.len() as f64;
            means.push((
                solver.to_string(),
                mine.iter().map(|r| r.min_value).sum::<f64>() / len,
                mine.iter().map(|r| r.iterations as f64).sum::<f64>() / len,
                mine.iter().map(|r| r.evaluations as f64).sum::<f64>() / len,
                mine.iter().map(|r| r.wall_time_s).sum::<f64>() / len,
            ));
        }
        let rel = relative_minima(&means.iter().map(|m| m.1).collect::<Vec<_>>());
        for ((solver, value, iters, evals, wall), rel) in means.into_iter().zip(rel) {
            out.push(AggregateRow {
                family: family.clone(),
                n,
                solver,
                relative_min: rel,
                mean_min_value: value,
                mean_iterations: iters,
                mean_evaluations: evals,
                mean_wall_time_s: wall,
            });
        }
    }
    out
}

/// Writes the per-run records as CSV.
pub fn write_csv(records: &[RunRecord], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for rec in records {
        w.serialize(rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Renders the aggregate table as Markdown.
pub fn render_markdown(aggregates: &[AggregateRow]) -> String {
    let mut s = String::new();
    s.push_str("| family | n | solver | relative min | mean iterations | mean evaluations | mean wall time (s) |\n");
    s.push_str("|---|---:|---|---:|---:|---:|---:|\n");
    for row in aggregates {
        let rel = match row.relative_min {
            Some(r) => format!("{r:.4}"),
            None => "degenerate".to_string(),
        };
        s.push_str(&format!(
            "| {} | {} | {} | {} | {:.2} | {:.2} | {:.5} |\n",
            row.family, row.n, row.solver, rel, row.mean_iterations, row.mean_evaluations,
            row.mean_wall_time_s,
        ));
    }
    s
}
