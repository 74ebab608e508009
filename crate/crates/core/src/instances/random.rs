//! Seeded random fluid algebras.

use nalgebra::DMatrix;

use super::InstanceError;
use crate::algebra::{FluidAlgebra, TripleEntry, TripleTensor, Vector};
use crate::rng::{derive_seed, PortableRng};

pub const RANDOM_RETRY_BUDGET: usize = 16;
pub const RANDOM_LINKING_MIN_EIGENVALUE: f64 = 0.1;

/// Deterministic random algebra of dimension `n`.
///
/// Draw order from the stream seeded with `seed`: `n³` normals for the raw
/// triple array (row-major), then `n²` normals for `A` (row-major). The
/// triple form is the full antisymmetrization of the raw array, the metric
/// is `AᵀA + nI`. The linking matrix `(B + Bᵀ)/2` is drawn from the
/// sub-stream `derive_seed(seed, r)` on attempt `r = 1, 2, …` and accepted
/// once every eigenvalue has magnitude at least 0.1.
pub fn random_algebra(seed: u64, n: usize) -> Result<FluidAlgebra, InstanceError> {
    if n == 0 {
        return Err(InstanceError::Invalid("random algebra needs n >= 1".into()));
    }
    let mut rng = PortableRng::new(seed);
    let raw = rng.normals(n * n * n);
    let at = |i: usize, j: usize, k: usize| raw[(i * n + j) * n + k];
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let v = (at(i, j, k) - at(j, i, k) + at(j, k, i) - at(k, j, i) + at(k, i, j) - at(i, k, j)) / 6.0;
                entries.push(TripleEntry::new(i, j, k, v));
            }
        }
    }
    let triple = TripleTensor::from_canonical(n, entries)?;

    let a = DMatrix::from_row_slice(n, n, &rng.normals(n * n));
    let metric = DMatrix::from_fn(n, n, |i, j| {
        let (p, q) = if i <= j { (i, j) } else { (j, i) };
        let mut s = 0.0;
        for k in 0..n {
            s += a[(k, p)] * a[(k, q)];
        }
        if p == q {
            s + n as f64
        } else {
            s
        }
    });

    for attempt in 1..=RANDOM_RETRY_BUDGET {
        let mut sub = PortableRng::new(derive_seed(seed, attempt as u64));
        let b = DMatrix::from_row_slice(n, n, &sub.normals(n * n));
        let linking = DMatrix::from_fn(n, n, |i, j| {
            let (p, q) = if i <= j { (i, j) } else { (j, i) };
            (b[(p, q)] + b[(q, p)]) / 2.0
        });
        let min_abs = linking.clone().symmetric_eigenvalues().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if min_abs >= RANDOM_LINKING_MIN_EIGENVALUE {
            return Ok(FluidAlgebra::new(triple, linking, metric)?);
        }
    }
    Err(InstanceError::RetriesExhausted(RANDOM_RETRY_BUDGET))
}

/// A seeded state with G-norm `norm` (direction from standard normals).
pub fn random_state(alg: &FluidAlgebra, seed: u64, norm: f64) -> Vector {
    let mut rng = PortableRng::new(seed);
    let v = Vector::from_vec(rng.normals(alg.dim()));
    let g = alg.g_norm(&v);
    if g > 0.0 {
        v * (norm / g)
    } else {
        v
    }
}
