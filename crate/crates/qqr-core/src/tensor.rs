//! Packed storage and contractions for symmetric third-order tensors.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::CoreError;

/// A symmetric third-order tensor `T` of dimension `n`.
///
/// The full tensor is invariant under every permutation of its three
/// indices, so only the canonical entries with `i <= j <= k` are stored:
/// exactly `n(n+1)(n+2)/6` values. Contractions account for the
/// multiplicity of each unordered index triple.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymmetricTensor3 {
    n: usize,
    /// Canonical entries ordered by `(k, j, i)` nesting, `i <= j <= k`.
    data: Vec<f64>,
}

/// Number of canonical entries for dimension `n`.
pub fn packed_len(n: usize) -> usize {
    n * (n + 1) * (n + 2) / 6
}

/// Position of the canonical triple `i <= j <= k` in packed storage.
#[inline]
fn packed_index(i: usize, j: usize, k: usize) -> usize {
    debug_assert!(i <= j && j <= k);
    i + j * (j + 1) / 2 + k * (k + 1) * (k + 2) / 6
}

/// Sorts three indices ascending.
#[inline]
fn sort3(mut i: usize, mut j: usize, mut k: usize) -> (usize, usize, usize) {
    if i > j {
        core::mem::swap(&mut i, &mut j);
    }
    if j > k {
        core::mem::swap(&mut j, &mut k);
    }
    if i > j {
        core::mem::swap(&mut i, &mut j);
    }
    (i, j, k)
}

/// All distinct ordered permutations of a sorted triple (1, 3, or 6).
#[inline]
fn distinct_permutations(i: usize, j: usize, k: usize) -> ([[usize; 3]; 6], usize) {
    let mut perms = [[0usize; 3]; 6];
    let count = if i == j && j == k {
        perms[0] = [i, i, i];
        1
    } else if i == j {
        perms[0] = [i, i, k];
        perms[1] = [i, k, i];
        perms[2] = [k, i, i];
        3
    } else if j == k {
        perms[0] = [i, j, j];
        perms[1] = [j, i, j];
        perms[2] = [j, j, i];
        3
    } else {
        perms[0] = [i, j, k];
        perms[1] = [i, k, j];
        perms[2] = [j, i, k];
        perms[3] = [j, k, i];
        perms[4] = [k, i, j];
        perms[5] = [k, j, i];
        6
    };
    (perms, count)
}

impl SymmetricTensor3 {
    /// The zero tensor of dimension `n`.
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; packed_len(n)],
        }
    }

    /// Builds a tensor by calling `f` once per canonical triple `i <= j <= k`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(packed_len(n));
        for k in 0..n {
            for j in 0..=k {
                for i in 0..=j {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { n, data }
    }

    /// Symmetrizes a full (possibly nonsymmetric) cube given in row-major
    /// layout `raw[(i*n + j)*n + k]`, by mirroring: the output entry at
    /// each canonical triple `i <= j <= k` is exactly `raw[i][j][k]`, copied
    /// to all permutations. Mirroring (rather than permutation-averaging)
    /// preserves the marginal distribution of the kept entries.
    pub fn symmetrize(n: usize, raw: &[f64]) -> Result<Self, CoreError> {
        if raw.len() != n * n * n {
            return Err(CoreError::DimensionMismatch {
                expected: n * n * n,
                got: raw.len(),
            });
        }
        Ok(Self::from_fn(n, |i, j, k| raw[(i * n + j) * n + k]))
    }

    /// Dimension `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry `T[i][j][k]` (any index order).
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        let (i, j, k) = sort3(i, j, k);
        self.data[packed_index(i, j, k)]
    }

    /// Sets the entry at the unordered triple `{i, j, k}`.
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let (i, j, k) = sort3(i, j, k);
        self.data[packed_index(i, j, k)] = value;
    }

    /// Adds `value` to the entry at the unordered triple `{i, j, k}`.
    pub fn add(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let (i, j, k) = sort3(i, j, k);
        self.data[packed_index(i, j, k)] += value;
    }

    /// Multiplies every entry by `c`.
    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    /// Iterates over canonical entries `(i, j, k, value)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |k| (0..=k).flat_map(move |j| (0..=j).map(move |i| (i, j, k))))
            .zip(self.data.iter())
            .map(|((i, j, k), &v)| (i, j, k, v))
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<(), CoreError> {
        if v.len() != self.n {
            return Err(CoreError::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Single contraction: the symmetric matrix `(T[s])_{jk} = sum_i T_{ijk} s_i`.
    pub fn contract_once(&self, s: &DVector<f64>) -> Result<DMatrix<f64>, CoreError> {
        self.check_dim(s)?;
        let n = self.n;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (i, j, k, t) in self.iter() {
            if t == 0.0 {
                continue;
            }
            let (perms, count) = distinct_permutations(i, j, k);
            for [p, q, r] in &perms[..count] {
                m[(*q, *r)] += t * s[*p];
            }
        }
        Ok(m)
    }

    /// Bilinear contraction: the vector `(T[u][v])_k = sum_{ij} T_{ijk} u_i v_j`.
    pub fn contract_bilinear(
        &self,
        u: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<DVector<f64>, CoreError> {
        self.check_dim(u)?;
        self.check_dim(v)?;
        let mut w = DVector::<f64>::zeros(self.n);
        for (i, j, k, t) in self.iter() {
            if t == 0.0 {
                continue;
            }
            let (perms, count) = distinct_permutations(i, j, k);
            for [p, q, r] in &perms[..count] {
                w[*r] += t * u[*p] * v[*q];
            }
        }
        Ok(w)
    }

    /// Double contraction with the same vector: `T[s]^2 = T[s][s]`.
    pub fn contract_twice(&self, s: &DVector<f64>) -> Result<DVector<f64>, CoreError> {
        self.contract_bilinear(s, s)
    }

    /// Triple contraction: the scalar `T[s]^3 = sum_{ijk} T_{ijk} s_i s_j s_k`.
    pub fn contract_thrice(&self, s: &DVector<f64>) -> Result<f64, CoreError> {
        self.check_dim(s)?;
        let mut acc = 0.0;
        for (i, j, k, t) in self.iter() {
            if t == 0.0 {
                continue;
            }
            // Multiplicity of the unordered triple: 1, 3, or 6.
            let (_, count) = distinct_permutations(i, j, k);
            acc += count as f64 * t * s[i] * s[j] * s[k];
        }
        Ok(acc)
    }
}
