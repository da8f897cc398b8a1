//! The QP3 plain-text file format for quartically-regularized cubic
//! polynomials.
//!
//! Layout (whitespace-separated):
//!
//! ```text
//! QP3 <n> <sigma> <f0>
//! <g_1>
//! ...                         n gradient entries, one per line
//! <H_11> ... <H_1n>
//! ...                         n Hessian rows
//! <i> <j> <k> <T_ijk>
//! ...                         n(n+1)(n+2)/6 canonical tensor entries,
//!                             1-based indices with i <= j <= k
//! ```
//!
//! Numbers are written with 17 significant digits, so write → read
//! round-trips every `f64` exactly. The loader rejects wrong entry counts,
//! out-of-range or non-canonical tensor indices, duplicate triples, and
//! (via the polynomial constructor) asymmetric Hessians.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use qqr_core::{QuarticPolynomial, SymmetricTensor3};

/// Number of canonical entries of a symmetric order-3 tensor.
fn canonical_len(n: usize) -> usize {
    n * (n + 1) * (n + 2) / 6
}

/// Serializes `p` in QP3 format.
pub fn write_qp3(p: &QuarticPolynomial, out: &mut impl Write) -> Result<()> {
    let n = p.dim();
    writeln!(out, "QP3 {n} {:.16e} {:.16e}", p.sigma(), p.f0())?;
    for i in 0..n {
        writeln!(out, "{:.16e}", p.g()[i])?;
    }
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{:.16e}", p.h()[(i, j)])).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    for (i, j, k, v) in p.t().iter() {
        writeln!(out, "{} {} {} {:.16e}", i + 1, j + 1, k + 1, v)?;
    }
    Ok(())
}

/// Parses a QP3 document.
pub fn read_qp3(text: &str) -> Result<QuarticPolynomial> {
    let mut tokens = text.split_whitespace();
    let mut next = |what: &str| {
        tokens
            .next()
            .with_context(|| format!("unexpected end of file: expected {what}"))
    };

    let magic = next("the `QP3` header")?;
    if magic != "QP3" {
        bail!("not a QP3 file: header starts with `{magic}`");
    }
    let n: usize = next("the dimension")?.parse().context("bad dimension")?;
    if n == 0 {
        bail!("dimension must be at least 1");
    }
    let sigma: f64 = next("sigma")?.parse().context("bad sigma")?;
    let f0: f64 = next("f0")?.parse().context("bad f0")?;

    let mut g = DVector::zeros(n);
    for i in 0..n {
        g[i] = next("a gradient entry")?.parse().context("bad gradient entry")?;
    }
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = next("a Hessian entry")?.parse().context("bad Hessian entry")?;
        }
    }

    let mut t = SymmetricTensor3::zeros(n);
    let mut seen = vec![false; n * n * n];
    for _ in 0..canonical_len(n) {
        let i: usize = next("a tensor index")?.parse().context("bad tensor index")?;
        let j: usize = next("a tensor index")?.parse().context("bad tensor index")?;
        let k: usize = next("a tensor index")?.parse().context("bad tensor index")?;
        let v: f64 = next("a tensor value")?.parse().context("bad tensor value")?;
        if i == 0 || j == 0 || k == 0 || i > n || j > n || k > n {
            bail!("tensor index ({i}, {j}, {k}) out of range for dimension {n}");
        }
        if !(i <= j && j <= k) {
            bail!("tensor index ({i}, {j}, {k}) is not canonical (need i <= j <= k)");
        }
        let (i, j, k) = (i - 1, j - 1, k - 1);
        let flat = (i * n + j) * n + k;
        if seen[flat] {
            bail!("duplicate tensor entry ({}, {}, {})", i + 1, j + 1, k + 1);
        }
        seen[flat] = true;
        t.set(i, j, k, v);
    }
    if let Some(extra) = tokens.next() {
        bail!("trailing data after the tensor block: `{extra}`");
    }

    Ok(QuarticPolynomial::new(f0, g, h, t, sigma)?)
}

/// Writes `p` to a file at `path`.
pub fn save(p: &QuarticPolynomial, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_qp3(p, &mut buf)?;
    fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Reads a polynomial from a QP3 file at `path`.
pub fn load(path: &Path) -> Result<QuarticPolynomial> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_qp3(&text).with_context(|| format!("parsing {}", path.display()))
}
