//! Storage and contraction kernels for alternating trilinear forms.
//!
//! A form is held either as a dense `n³` array or as the list of its
//! canonical entries `(i, j, k, value)` with `i < j < k`; the other five
//! index orders follow from full antisymmetry. Every kernel sums in
//! ascending index order so results are reproducible bit-for-bit.

use serde::{Deserialize, Serialize};

use super::AlgebraError;

/// Dimensions up to this value are stored densely.
pub const DENSE_MAX_DIM: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

impl TripleEntry {
    pub fn new(i: usize, j: usize, k: usize, value: f64) -> Self {
        Self { i, j, k, value }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TripleTensor {
    /// Row-major `T[i][j][k]` at `(i * n + j) * n + k`.
    Dense { dim: usize, data: Vec<f64> },
    /// Canonical entries sorted by `(i, j, k)`, no duplicates, no zeros required.
    Sparse { dim: usize, entries: Vec<TripleEntry> },
}

impl TripleTensor {
    pub fn zeros(dim: usize) -> Self {
        if dim <= DENSE_MAX_DIM {
            TripleTensor::Dense { dim, data: vec![0.0; dim * dim * dim] }
        } else {
            TripleTensor::Sparse { dim, entries: Vec::new() }
        }
    }

    /// Wraps a dense array. The array is taken as-is; antisymmetry is a
    /// validation concern, not a construction one.
    pub fn dense(dim: usize, data: Vec<f64>) -> Result<Self, AlgebraError> {
        if data.len() != dim * dim * dim {
            return Err(AlgebraError::Shape(format!(
                "triple array has {} entries, expected {}",
                data.len(),
                dim * dim * dim
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(AlgebraError::NonFinite("triple"));
        }
        Ok(TripleTensor::Dense { dim, data })
    }

    /// Builds a sparse form from canonical entries. Entries are sorted;
    /// non-canonical index orders and duplicates are rejected.
    pub fn sparse(dim: usize, mut entries: Vec<TripleEntry>) -> Result<Self, AlgebraError> {
        for e in &entries {
            if !(e.i < e.j && e.j < e.k) {
                return Err(AlgebraError::NonCanonical { i: e.i, j: e.j, k: e.k });
            }
            if e.k >= dim {
                return Err(AlgebraError::Shape(format!(
                    "triple entry ({},{},{}) out of range for dim {dim}",
                    e.i, e.j, e.k
                )));
            }
            if !e.value.is_finite() {
                return Err(AlgebraError::NonFinite("triple"));
            }
        }
        entries.sort_by_key(|e| (e.i, e.j, e.k));
        if let Some(w) = entries.windows(2).find(|w| (w[0].i, w[0].j, w[0].k) == (w[1].i, w[1].j, w[1].k)) {
            return Err(AlgebraError::Duplicate { i: w[0].i, j: w[0].j, k: w[0].k });
        }
        Ok(TripleTensor::Sparse { dim, entries })
    }

    /// Builds the preferred storage for `dim` from canonical entries: dense
    /// up to [`DENSE_MAX_DIM`], sparse above.
    pub fn from_canonical(dim: usize, entries: Vec<TripleEntry>) -> Result<Self, AlgebraError> {
        let sparse = Self::sparse(dim, entries)?;
        if dim <= DENSE_MAX_DIM {
            Ok(sparse.to_dense())
        } else {
            Ok(sparse)
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TripleTensor::Dense { dim, .. } | TripleTensor::Sparse { dim, .. } => *dim,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, TripleTensor::Sparse { .. })
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        match self {
            TripleTensor::Dense { dim, data } => data[(i * dim + j) * dim + k],
            TripleTensor::Sparse { entries, .. } => {
                let (sign, key) = canonical_order(i, j, k);
                if sign == 0 {
                    return 0.0;
                }
                match entries.binary_search_by_key(&key, |e| (e.i, e.j, e.k)) {
                    Ok(pos) => sign as f64 * entries[pos].value,
                    Err(_) => 0.0,
                }
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            TripleTensor::Dense { data, .. } => data.iter().fold(0.0, |m, v| m.max(v.abs())),
            TripleTensor::Sparse { entries, .. } => entries.iter().fold(0.0, |m, e| m.max(e.value.abs())),
        }
    }

    pub fn to_dense(&self) -> TripleTensor {
        match self {
            TripleTensor::Dense { .. } => self.clone(),
            TripleTensor::Sparse { dim, entries } => {
                let n = *dim;
                let mut data = vec![0.0; n * n * n];
                for e in entries {
                    let v = e.value;
                    let (i, j, k) = (e.i, e.j, e.k);
                    data[(i * n + j) * n + k] = v;
                    data[(j * n + k) * n + i] = v;
                    data[(k * n + i) * n + j] = v;
                    data[(j * n + i) * n + k] = -v;
                    data[(i * n + k) * n + j] = -v;
                    data[(k * n + j) * n + i] = -v;
                }
                TripleTensor::Dense { dim: n, data }
            }
        }
    }

    /// Canonical entries (`i < j < k`, nonzero). For a dense array this reads
    /// the canonical slots only, so it is faithful only for antisymmetric data.
    pub fn canonical_entries(&self) -> Vec<TripleEntry> {
        match self {
            TripleTensor::Sparse { entries, .. } => entries.iter().copied().filter(|e| e.value != 0.0).collect(),
            TripleTensor::Dense { dim, data } => {
                let n = *dim;
                let mut out = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        for k in j + 1..n {
                            let v = data[(i * n + j) * n + k];
                            if v != 0.0 {
                                out.push(TripleEntry::new(i, j, k, v));
                            }
                        }
                    }
                }
                out
            }
        }
    }

    pub fn to_sparse(&self) -> TripleTensor {
        TripleTensor::Sparse { dim: self.dim(), entries: self.canonical_entries() }
    }

    /// Contracts the first two slots: `out[m] = Σ_{i,j} T[i][j][m] x_i y_j`.
    pub fn contract_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        match self {
            TripleTensor::Dense { dim, data } => {
                let n = *dim;
                for i in 0..n {
                    let xi = x[i];
                    if xi == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        let w = xi * y[j];
                        if w == 0.0 {
                            continue;
                        }
                        let row = &data[(i * n + j) * n..(i * n + j + 1) * n];
                        for (o, t) in out.iter_mut().zip(row) {
                            *o += t * w;
                        }
                    }
                }
            }
            TripleTensor::Sparse { entries, .. } => {
                for e in entries {
                    let (i, j, k, v) = (e.i, e.j, e.k, e.value);
                    out[k] += v * (x[i] * y[j] - x[j] * y[i]);
                    out[j] -= v * (x[i] * y[k] - x[k] * y[i]);
                    out[i] += v * (x[j] * y[k] - x[k] * y[j]);
                }
            }
        }
    }

    /// Evaluates `Σ T[i][j][k] x_i y_j z_k`.
    ///
    /// The sparse path averages the three cyclic cofactor expansions; each
    /// is negated exactly by swapping its last two arguments, so a repeated
    /// argument in any position gives exactly zero.
    pub fn eval(&self, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        match self {
            TripleTensor::Dense { dim, data } => {
                let n = *dim;
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let w = x[i] * y[j];
                        let row = &data[(i * n + j) * n..(i * n + j + 1) * n];
                        let mut s = 0.0;
                        for (t, zk) in row.iter().zip(z) {
                            s += t * zk;
                        }
                        acc += w * s;
                    }
                }
                acc
            }
            TripleTensor::Sparse { entries, .. } => {
                let a = cofactor_sum(entries, x, y, z);
                let b = cofactor_sum(entries, y, z, x);
                let c = cofactor_sum(entries, z, x, y);
                (a + b + c) / 3.0
            }
        }
    }
}

fn cofactor_sum(entries: &[TripleEntry], a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let minor = |p: usize, q: usize| b[p] * c[q] - b[q] * c[p];
    let mut acc = 0.0;
    for e in entries {
        let (i, j, k) = (e.i, e.j, e.k);
        acc += e.value * (a[i] * minor(j, k) - a[j] * minor(i, k) + a[k] * minor(i, j));
    }
    acc
}

/// Sorts an index triple; returns the permutation sign (0 on a repeat).
pub fn canonical_order(i: usize, j: usize, k: usize) -> (i8, (usize, usize, usize)) {
    if i == j || j == k || i == k {
        return (0, (i, j, k));
    }
    let mut idx = [i, j, k];
    let mut sign = 1i8;
    for a in 0..2 {
        for b in 0..2 - a {
            if idx[b] > idx[b + 1] {
                idx.swap(b, b + 1);
                sign = -sign;
            }
        }
    }
    (sign, (idx[0], idx[1], idx[2]))
}
