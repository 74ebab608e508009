//! The fluid algebra: a finite-dimensional space carrying an alternating
//! trilinear form `{·,·,·}`, a symmetric nondegenerate linking form `⟨·,·⟩`
//! and a positive-definite metric `(·,·)`.
//!
//! The curl operator `D` is the unique map with `(DX, Y) = ⟨X, Y⟩`, i.e.
//! `D = G⁻¹L`. The metric is factorized once at construction and reused by
//! every solve.

pub mod triple;
mod validate;

use std::ops::Deref;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use triple::{TripleEntry, TripleTensor, DENSE_MAX_DIM};
pub use validate::{validate, CheckResult, ValidationReport};

pub type Vector = DVector<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("triple entry ({i},{j},{k}) violates i<j<k")]
    NonCanonical { i: usize, j: usize, k: usize },
    #[error("duplicate triple entry ({i},{j},{k})")]
    Duplicate { i: usize, j: usize, k: usize },
    #[error("{0} cannot be factorized")]
    Singular(&'static str),
    #[error("non-finite value produced by {0}")]
    Numerical(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Velocity,
    Vorticity,
    Probe,
}

/// An element of the algebra tagged with how it is being used.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    coords: Vector,
    role: Role,
}

impl StateVector {
    pub fn new(coords: Vector, role: Role) -> Result<Self, AlgebraError> {
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(AlgebraError::NonFinite("state"));
        }
        Ok(Self { coords, role })
    }

    pub fn velocity(coords: &[f64]) -> Result<Self, AlgebraError> {
        Self::new(Vector::from_column_slice(coords), Role::Velocity)
    }

    /// Like [`StateVector::new`] but also checks the length against `alg`.
    pub fn for_algebra(alg: &FluidAlgebra, coords: Vector, role: Role) -> Result<Self, AlgebraError> {
        alg.check(&coords)?;
        Self::new(coords, role)
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn coords(&self) -> &Vector {
        &self.coords
    }

    pub fn into_coords(self) -> Vector {
        self.coords
    }
}

impl Deref for StateVector {
    type Target = Vector;

    fn deref(&self) -> &Vector {
        &self.coords
    }
}

#[derive(Clone, Debug)]
pub struct FluidAlgebra {
    triple: TripleTensor,
    linking: DMatrix<f64>,
    metric: DMatrix<f64>,
    metric_chol: Option<Cholesky<f64, Dyn>>,
    linking_lu: LU<f64, Dyn, Dyn>,
    linking_invertible: bool,
    max_triple: f64,
}

impl FluidAlgebra {
    /// Checks shapes and finiteness and factorizes the metric and linking
    /// matrices. Whether the data actually forms a fluid algebra is decided
    /// by [`validate`].
    pub fn new(triple: TripleTensor, linking: DMatrix<f64>, metric: DMatrix<f64>) -> Result<Self, AlgebraError> {
        let n = triple.dim();
        for (name, m) in [("linking", &linking), ("metric", &metric)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(AlgebraError::Shape(format!(
                    "{name} matrix is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(AlgebraError::NonFinite(name));
            }
        }
        let metric_chol = Cholesky::new(metric.clone());
        let linking_lu = LU::new(linking.clone());
        let linking_invertible = n == 0 || linking_lu.is_invertible();
        let max_triple = triple.max_abs();
        Ok(Self { triple, linking, metric, metric_chol, linking_lu, linking_invertible, max_triple })
    }

    pub fn dim(&self) -> usize {
        self.triple.dim()
    }

    pub fn triple_tensor(&self) -> &TripleTensor {
        &self.triple
    }

    pub fn linking_matrix(&self) -> &DMatrix<f64> {
        &self.linking
    }

    pub fn metric_matrix(&self) -> &DMatrix<f64> {
        &self.metric
    }

    /// Largest absolute entry of the triple form.
    pub fn max_triple(&self) -> f64 {
        self.max_triple
    }

    pub fn check(&self, v: &Vector) -> Result<(), AlgebraError> {
        if v.len() != self.dim() {
            return Err(AlgebraError::Dimension { expected: self.dim(), got: v.len() });
        }
        Ok(())
    }

    /// `{X, Y, Z}`.
    pub fn triple(&self, x: &Vector, y: &Vector, z: &Vector) -> Result<f64, AlgebraError> {
        self.check(x)?;
        self.check(y)?;
        self.check(z)?;
        Ok(self.triple.eval(x.as_slice(), y.as_slice(), z.as_slice()))
    }

    /// `c[m] = Σ_{i,j} T[i][j][m] x_i y_j`, the covector `{x, y, ·}`.
    pub fn contract(&self, x: &Vector, y: &Vector) -> Result<Vector, AlgebraError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.contract_unchecked(x, y))
    }

    pub(crate) fn contract_unchecked(&self, x: &Vector, y: &Vector) -> Vector {
        let mut out = Vector::zeros(self.dim());
        self.triple.contract_into(x.as_slice(), y.as_slice(), out.as_mut_slice());
        out
    }

    /// `⟨X, Y⟩ = Xᵀ L Y`.
    pub fn linking(&self, x: &Vector, y: &Vector) -> Result<f64, AlgebraError> {
        self.check(x)?;
        self.check(y)?;
        Ok(bilinear(&self.linking, x, y))
    }

    /// `(X, Y) = Xᵀ G Y`.
    pub fn metric_inner(&self, x: &Vector, y: &Vector) -> Result<f64, AlgebraError> {
        self.check(x)?;
        self.check(y)?;
        Ok(bilinear(&self.metric, x, y))
    }

    /// `(X, X)`.
    pub fn energy(&self, x: &Vector) -> Result<f64, AlgebraError> {
        self.metric_inner(x, x)
    }

    /// `(X, DX)`, evaluated as `Xᵀ L X`.
    pub fn helicity(&self, x: &Vector) -> Result<f64, AlgebraError> {
        self.linking(x, x)
    }

    /// `√(vᵀ G v)`.
    pub fn g_norm(&self, v: &Vector) -> f64 {
        bilinear(&self.metric, v, v).max(0.0).sqrt()
    }

    /// Norm of a covector in the metric dual: `√(rᵀ G⁻¹ r)`.
    pub fn dual_norm(&self, r: &Vector) -> Result<f64, AlgebraError> {
        let s = self.solve_metric(r)?;
        Ok(dot(r, &s).max(0.0).sqrt())
    }

    /// Product of the G-norms of `vectors` times the largest triple entry.
    pub fn scale(&self, vectors: &[&Vector]) -> f64 {
        vectors.iter().map(|v| self.g_norm(v)).product::<f64>() * self.max_triple
    }

    /// `G⁻¹ v`, turning a covector into the vector it represents.
    pub fn solve_metric(&self, v: &Vector) -> Result<Vector, AlgebraError> {
        self.check(v)?;
        let chol = self.metric_chol.as_ref().ok_or(AlgebraError::Singular("metric"))?;
        finite(chol.solve(v), "metric solve")
    }

    /// `L⁻¹ v`.
    pub fn solve_linking(&self, v: &Vector) -> Result<Vector, AlgebraError> {
        self.check(v)?;
        if !self.linking_invertible {
            return Err(AlgebraError::Singular("linking"));
        }
        let sol = self.linking_lu.solve(v).ok_or(AlgebraError::Singular("linking"))?;
        finite(sol, "linking solve")
    }

    pub fn apply_linking(&self, v: &Vector) -> Result<Vector, AlgebraError> {
        self.check(v)?;
        Ok(mat_vec(&self.linking, v))
    }

    pub fn apply_metric(&self, v: &Vector) -> Result<Vector, AlgebraError> {
        self.check(v)?;
        Ok(mat_vec(&self.metric, v))
    }

    /// `DX = G⁻¹ L X`.
    pub fn curl(&self, x: &Vector) -> Result<Vector, AlgebraError> {
        self.check(x)?;
        self.solve_metric(&mat_vec(&self.linking, x))
    }

    /// `D′Y = L⁻¹ G Y`.
    pub fn inverse_curl(&self, y: &Vector) -> Result<Vector, AlgebraError> {
        self.check(y)?;
        self.solve_linking(&mat_vec(&self.metric, y))
    }

    /// Spectral condition number of the metric.
    pub fn metric_condition(&self) -> f64 {
        condition(&self.metric)
    }

    /// Ratio of extreme singular values of the linking matrix.
    pub fn linking_condition(&self) -> f64 {
        condition(&self.linking)
    }

    /// The matrix of `D = G⁻¹L`.
    pub fn curl_matrix(&self) -> Result<DMatrix<f64>, AlgebraError> {
        let chol = self.metric_chol.as_ref().ok_or(AlgebraError::Singular("metric"))?;
        Ok(chol.solve(&self.linking))
    }

    /// Eigenvalues of `D`, ascending. `D` is self-adjoint for the metric, so
    /// these are the eigenvalues of the symmetric `C⁻¹ L C⁻ᵀ` with `G = CCᵀ`.
    pub fn curl_eigenvalues(&self) -> Result<Vec<f64>, AlgebraError> {
        let chol = self.metric_chol.as_ref().ok_or(AlgebraError::Singular("metric"))?;
        let c = chol.l();
        let left = c
            .solve_lower_triangular(&self.linking)
            .ok_or(AlgebraError::Singular("metric"))?;
        let sym = c
            .solve_lower_triangular(&left.transpose())
            .ok_or(AlgebraError::Singular("metric"))?;
        let sym = (&sym + sym.transpose()) * 0.5;
        let mut eig: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        Ok(eig)
    }

    /// Operator norm of `D` in the metric, i.e. its largest |eigenvalue|.
    pub fn curl_norm(&self) -> Result<f64, AlgebraError> {
        Ok(self.curl_eigenvalues()?.iter().fold(0.0, |m, v| m.max(v.abs())))
    }
}

fn condition(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn finite(v: Vector, what: &'static str) -> Result<Vector, AlgebraError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(AlgebraError::Numerical(what))
    }
}

pub(crate) fn dot(x: &Vector, y: &Vector) -> f64 {
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        acc += a * b;
    }
    acc
}

/// `xᵀ M y`, summed row by row in ascending order.
pub(crate) fn bilinear(m: &DMatrix<f64>, x: &Vector, y: &Vector) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        if x[i] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * y[j];
        }
        acc += x[i] * row;
    }
    acc
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, x: &Vector) -> Vector {
    let n = m.nrows();
    Vector::from_fn(n, |i, _| {
        let mut acc = 0.0;
        for j in 0..m.ncols() {
            acc += m[(i, j)] * x[j];
        }
        acc
    })
}
