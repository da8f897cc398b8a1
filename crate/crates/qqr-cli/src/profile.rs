//! Performance profiles: for solver m with cost t[m][j] on problem j,
//! Γ_m(τ) is the fraction of all problems on which m's cost is within a
//! factor τ of the best solver's cost. Unsolved problems carry cost +∞;
//! problems no solver solves count toward no solver's numerator but remain
//! in the denominator.

use anyhow::{bail, Context, Result};
use serde::Serialize;

/// One solver's profile curve, sampled at shared τ breakpoints.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileCurve {
    pub solver: String,
    /// (τ, Γ(τ)) pairs in ascending τ.
    pub points: Vec<(f64, f64)>,
}

fn validate(costs: &[Vec<f64>]) -> Result<usize> {
    if costs.is_empty() {
        bail!("performance profile needs at least one solver");
    }
    let q = costs[0].len();
    if q == 0 {
        bail!("performance profile needs at least one problem");
    }
    for row in costs {
        if row.len() != q {
            bail!("cost rows have differing lengths ({} vs {q})", row.len());
        }
        if row.iter().any(|c| c.is_nan() || *c < 0.0) {
            bail!("costs must be nonnegative or +inf");
        }
    }
    Ok(q)
}

/// Best (smallest) cost per problem; +∞ when no solver solved it.
fn best_costs(costs: &[Vec<f64>]) -> Vec<f64> {
    let q = costs[0].len();
    (0..q)
        .map(|j| costs.iter().map(|row| row[j]).fold(f64::INFINITY, f64::min))
        .collect()
}

/// Γ_m(τ) for one solver row.
///
/// Inclusion is decided on the ratio `t / b` — the same expression
/// [`breakpoints`] emits — so a curve sampled at its own breakpoints is
/// exact; testing `t <= tau * b` instead can miss the defining problem by
/// one rounding error.
pub fn gamma_at(costs: &[Vec<f64>], m: usize, tau: f64) -> f64 {
    let best = best_costs(costs);
    let q = best.len() as f64;
    let hits = costs[m]
        .iter()
        .zip(&best)
        .filter(|(t, b)| {
            if !b.is_finite() {
                return false;
            }
            let r = if **t == **b { 1.0 } else { **t / **b };
            r <= tau
        })
        .count();
    hits as f64 / q
}

/// The τ values where some Γ_m can change: every finite ratio t[m][j]/best[j],
/// plus 1. Sampling the curves there captures them exactly.
pub fn breakpoints(costs: &[Vec<f64>]) -> Vec<f64> {
    let best = best_costs(costs);
    let mut taus = vec![1.0];
    for row in costs {
        for (t, b) in row.iter().zip(&best) {
            if b.is_finite() && t.is_finite() && *b > 0.0 {
                taus.push(t / b);
            }
        }
    }
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Exact dedup only: collapsing nearly-equal ratios could drop the one
    // value at which a solver's curve reaches its final level.
    taus.dedup();
    taus
}

/// Computes all solvers' curves at the given τ values (breakpoints when
/// `taus` is empty).
pub fn performance_profile(
    solvers: &[String],
    costs: &[Vec<f64>],
    taus: &[f64],
) -> Result<Vec<ProfileCurve>> {
    let _ = validate(costs)?;
    if solvers.len() != costs.len() {
        bail!("{} solver names for {} cost rows", solvers.len(), costs.len());
    }
    let taus: Vec<f64> = if taus.is_empty() { breakpoints(costs) } else { taus.to_vec() };
    if taus.iter().any(|t| !t.is_finite() || *t < 1.0) {
        bail!("τ values must be finite and at least 1");
    }
    Ok(solvers
        .iter()
        .enumerate()
        .map(|(m, name)| ProfileCurve {
            solver: name.clone(),
            points: taus.iter().map(|&tau| (tau, gamma_at(costs, m, tau))).collect(),
        })
        .collect())
}

/// Reads a costs CSV: each line is `solver,c1,c2,...` with `inf` (any case)
/// or an empty field for an unsolved problem. No header row.
pub fn read_costs_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut solvers = Vec::new();
    let mut costs = Vec::new();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_reader(text.as_bytes());
    for record in reader.records() {
        let record = record.context("reading costs CSV")?;
        let mut fields = record.iter();
        let name = fields.next().context("empty costs row")?;
        let row: Vec<f64> = fields
            .map(|f| {
                let f = f.trim();
                if f.is_empty() || f.eq_ignore_ascii_case("inf") {
                    Ok(f64::INFINITY)
                } else {
                    f.parse::<f64>().with_context(|| format!("bad cost `{f}`"))
                }
            })
            .collect::<Result<_>>()?;
        solvers.push(name.to_string());
        costs.push(row);
    }
    validate(&costs)?;
    Ok((solvers, costs))
}

/// Writes curves as CSV rows `solver,tau,gamma`.
pub fn write_profile_csv(curves: &[ProfileCurve], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["solver", "tau", "gamma"])?;
    for curve in curves {
        for (tau, gamma) in &curve.points {
            w.write_record([curve.solver.as_str(), &tau.to_string(), &gamma.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
