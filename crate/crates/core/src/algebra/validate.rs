use nalgebra::DMatrix;
use serde::Serialize;

use super::{FluidAlgebra, TripleTensor};

/// Validation fails when `σ_min(L) < LINKING_NONDEGENERACY · σ_max(L)`.
pub const LINKING_NONDEGENERACY: f64 = 1e-8;
/// Validation fails when `λ_min(G) < METRIC_POSITIVITY · λ_max(G)`.
pub const METRIC_POSITIVITY: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub defect: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub dim: usize,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Checks the three defining invariants of a fluid algebra.
///
/// `tol` bounds the antisymmetry and symmetry defects relative to the
/// largest entry of the respective array (absolute when the array is zero).
/// Nondegeneracy and positivity use the fixed ratios above.
pub fn validate(alg: &FluidAlgebra, tol: f64) -> ValidationReport {
    let mut checks = Vec::with_capacity(5);
    let mut push = |name, defect: f64, threshold: f64, passed: bool| {
        checks.push(CheckResult { name, defect, threshold, passed });
    };

    let t_scale = alg.max_triple().max(1.0);
    let anti = antisymmetry_defect(alg.triple_tensor());
    push("triple_antisymmetry", anti, tol * t_scale, anti <= tol * t_scale);

    let l = alg.linking_matrix();
    let l_scale = l.amax().max(1.0);
    let l_sym = symmetry_defect(l);
    push("linking_symmetry", l_sym, tol * l_scale, l_sym <= tol * l_scale);

    let ratio = if l.is_empty() {
        1.0
    } else {
        let sv = l.clone().singular_values();
        if sv.max() > 0.0 {
            sv.min() / sv.max()
        } else {
            0.0
        }
    };
    push("linking_nondegeneracy", ratio, LINKING_NONDEGENERACY, ratio >= LINKING_NONDEGENERACY);

    let g = alg.metric_matrix();
    let g_scale = g.amax().max(1.0);
    let g_sym = symmetry_defect(g);
    push("metric_symmetry", g_sym, tol * g_scale, g_sym <= tol * g_scale);

    let (min_eig, ratio) = if g.is_empty() {
        (1.0, 1.0)
    } else {
        let sym = (g + g.transpose()) * 0.5;
        let eig = sym.symmetric_eigenvalues();
        let (min, max) = (eig.min(), eig.max());
        (min, if max > 0.0 { min / max } else { f64::NEG_INFINITY })
    };
    push(
        "metric_positivity",
        ratio,
        METRIC_POSITIVITY,
        min_eig > 0.0 && ratio >= METRIC_POSITIVITY,
    );

    ValidationReport { dim: alg.dim(), checks }
}

/// Largest `|T[i][j][k] + T[τ(i,j,k)]| / 2` over the three transpositions τ.
/// A repeated index contributes `|T|` itself.
fn antisymmetry_defect(t: &TripleTensor) -> f64 {
    match t {
        // canonical entries are antisymmetric by construction
        TripleTensor::Sparse { .. } => 0.0,
        TripleTensor::Dense { dim, data } => {
            let n = *dim;
            let at = |i: usize, j: usize, k: usize| data[(i * n + j) * n + k];
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let v = at(i, j, k);
                        worst = worst
                            .max((v + at(j, i, k)).abs() / 2.0)
                            .max((v + at(i, k, j)).abs() / 2.0)
                            .max((v + at(k, j, i)).abs() / 2.0);
                    }
                }
            }
            worst
        }
    }
}

fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}
