//! Fluid algebras built from a Lie algebra with an invariant pairing:
//! `{X, Y, Z} = ⟨[X, Y], Z⟩`, linking form = the pairing.

use nalgebra::DMatrix;

use super::InstanceError;
use crate::algebra::{validate, FluidAlgebra, TripleTensor, Vector, DENSE_MAX_DIM};
use crate::rng::PortableRng;

const INVARIANCE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct LieAlgebraInput {
    pub dim: usize,
    /// `c[i][j][k]` at `(i * n + j) * n + k`, with `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
    pub structure_constants: Vec<f64>,
    pub pairing: DMatrix<f64>,
    pub metric: DMatrix<f64>,
}

impl LieAlgebraInput {
    pub fn bracket(&self, x: &Vector, y: &Vector) -> Vector {
        let n = self.dim;
        let mut out = Vector::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let w = x[i] * y[j];
                for k in 0..n {
                    out[k] += self.structure_constants[(i * n + j) * n + k] * w;
                }
            }
        }
        out
    }
}

pub fn from_lie_algebra(input: &LieAlgebraInput) -> Result<FluidAlgebra, InstanceError> {
    let n = input.dim;
    let c = &input.structure_constants;
    if c.len() != n * n * n {
        return Err(InstanceError::Invalid(format!("structure constants have {} entries, expected {}", c.len(), n * n * n)));
    }
    for (name, m) in [("pairing", &input.pairing), ("metric", &input.metric)] {
        if m.nrows() != n || m.ncols() != n {
            return Err(InstanceError::Invalid(format!("{name} must be {n}x{n}")));
        }
    }
    if c.iter().chain(input.pairing.iter()).any(|v| !v.is_finite()) {
        return Err(InstanceError::Invalid("non-finite structure constants or pairing".into()));
    }
    let at = |i: usize, j: usize, k: usize| c[(i * n + j) * n + k];
    let c_max = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let p = &input.pairing;
    let scale = (c_max * p.amax()).max(f64::MIN_POSITIVE);

    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let d = (at(i, j, k) + at(j, i, k)).abs();
                if d > INVARIANCE_TOL * c_max.max(1.0) {
                    return Err(InstanceError::Invalid(format!("bracket is not antisymmetric at ({i},{j},{k})")));
                }
            }
        }
    }
    if (p - p.transpose()).amax() > INVARIANCE_TOL * p.amax().max(1.0) {
        return Err(InstanceError::Invalid("pairing is not symmetric".into()));
    }
    if n > 0 {
        let sv = p.clone().singular_values();
        if sv.min() < 1e-8 * sv.max() {
            return Err(InstanceError::Invalid("pairing is degenerate".into()));
        }
    }

    // T[i][j][k] = Σ_m c[i][j][m] P[m][k]
    let mut t = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for m in 0..n {
                    s += at(i, j, m) * p[(m, k)];
                }
                t[(i * n + j) * n + k] = s;
            }
        }
    }

    // P([e_i,e_j], e_k) + P(e_j, [e_i,e_k]) = T[i][j][k] + T[i][k][j]
    let mut worst = (0, 0, 0, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let d = (t[(i * n + j) * n + k] + t[(i * n + k) * n + j]).abs();
                if d > worst.3 {
                    worst = (i, j, k, d);
                }
            }
        }
    }
    if worst.3 > INVARIANCE_TOL * scale {
        return Err(InstanceError::NotInvariant { i: worst.0, j: worst.1, k: worst.2, defect: worst.3 });
    }

    let dense = TripleTensor::dense(n, t)?;
    let triple = if n > DENSE_MAX_DIM { dense.to_sparse() } else { dense };
    let alg = FluidAlgebra::new(triple, input.pairing.clone(), input.metric.clone())?;
    let report = validate(&alg, INVARIANCE_TOL);
    if let Some(bad) = report.failures().next() {
        return Err(InstanceError::Invalid(format!("resulting algebra fails {} (defect {:e})", bad.name, bad.defect)));
    }
    Ok(alg)
}

fn levi_civita_constants() -> Vec<f64> {
    let mut c = vec![0.0; 27];
    for (i, j, k, s) in [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0), (1, 0, 2, -1.0), (0, 2, 1, -1.0), (2, 1, 0, -1.0)] {
        c[(i * 3 + j) * 3 + k] = s;
    }
    c
}

/// so(3) with the cross product, identity pairing and the given metric.
pub fn so3_input(metric: DMatrix<f64>) -> LieAlgebraInput {
    LieAlgebraInput { dim: 3, structure_constants: levi_civita_constants(), pairing: DMatrix::identity(3, 3), metric }
}

/// so(3) with identity metric: the triple form is the determinant.
pub fn so3() -> FluidAlgebra {
    from_lie_algebra(&so3_input(DMatrix::identity(3, 3))).expect("so(3) is a valid Lie input")
}

/// Free rigid body with principal moments `(I1, I2, I3)`: determinant triple
/// form, identity linking, metric `diag(I1, I2, I3)`.
pub fn rigid_body(moments: [f64; 3]) -> Result<FluidAlgebra, InstanceError> {
    if moments.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(InstanceError::Invalid(format!("moments of inertia must be positive, got {moments:?}")));
    }
    let g = DMatrix::from_diagonal(&Vector::from_column_slice(&moments));
    from_lie_algebra(&so3_input(g))
}

/// Zero bracket; every state is an equilibrium.
pub fn abelian(pairing: DMatrix<f64>, metric: DMatrix<f64>) -> Result<FluidAlgebra, InstanceError> {
    let n = pairing.nrows();
    from_lie_algebra(&LieAlgebraInput { dim: n, structure_constants: vec![0.0; n * n * n], pairing, metric })
}

/// `so(3) ⊕ so(3)` written in a seeded random basis, with a seeded
/// (possibly indefinite) invariant pairing and a seeded metric.
pub fn so3_direct_sum_input(seed: u64) -> LieAlgebraInput {
    let n = 6;
    let mut rng = PortableRng::new(seed);
    let eps = levi_civita_constants();
    let mut c = vec![0.0; n * n * n];
    for block in 0..2 {
        let o = 3 * block;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    c[((o + i) * n + o + j) * n + o + k] = eps[(i * 3 + j) * 3 + k];
                }
            }
        }
    }
    let w1 = 0.5 + rng.uniform();
    let w2 = -(0.5 + rng.uniform());
    let mut pairing = DMatrix::zeros(n, n);
    for i in 0..3 {
        pairing[(i, i)] = w1;
        pairing[(3 + i, 3 + i)] = w2;
    }

    // new basis f_i = Σ_a A[a][i] e_a with A = I + 0.3 N
    let a = DMatrix::from_fn(n, n, |r, s| if r == s { 1.0 } else { 0.0 }) + DMatrix::from_row_slice(n, n, &rng.normals(n * n)) * 0.3;
    let a_inv = a.clone().try_inverse().expect("perturbed identity is invertible");
    let mut c_new = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            // [f_i, f_j] = Σ_{a,b} A[a][i] A[b][j] [e_a, e_b], expressed in e
            let mut in_e = vec![0.0; n];
            for p in 0..n {
                for q in 0..n {
                    let w = a[(p, i)] * a[(q, j)];
                    if w == 0.0 {
                        continue;
                    }
                    for m in 0..n {
                        in_e[m] += w * c[(p * n + q) * n + m];
                    }
                }
            }
            for k in 0..n {
                let mut s = 0.0;
                for m in 0..n {
                    s += a_inv[(k, m)] * in_e[m];
                }
                c_new[(i * n + j) * n + k] = s;
            }
        }
    }
    let p_new = a.transpose() * &pairing * &a;
    let p_new = (&p_new + p_new.transpose()) * 0.5;
    let b = DMatrix::from_row_slice(n, n, &rng.normals(n * n));
    let metric = b.transpose() * &b + DMatrix::identity(n, n) * n as f64;
    let metric = (&metric + metric.transpose()) * 0.5;
    LieAlgebraInput { dim: n, structure_constants: c_new, pairing: p_new, metric }
}

pub fn so3_direct_sum(seed: u64) -> Result<FluidAlgebra, InstanceError> {
    from_lie_algebra(&so3_direct_sum_input(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TripleEntry;
    use crate::dynamics::{euler_rhs, induced_bracket};

    fn e(i: usize, n: usize) -> Vector {
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        v
    }

    #[test]
    fn so3_triple_is_determinant() {
        let alg = so3();
        assert_eq!(alg.triple_tensor().canonical_entries(), vec![TripleEntry::new(0, 1, 2, 1.0)]);
        assert_eq!(alg.triple(&e(0, 3), &e(1, 3), &e(2, 3)).unwrap(), 1.0);
        assert_eq!(alg.triple(&e(1, 3), &e(0, 3), &e(2, 3)).unwrap(), -1.0);
    }

    #[test]
    fn rigid_body_matches_so3_with_metric() {
        let rb = rigid_body([1.0, 2.0, 3.0]).unwrap();
        assert_eq!(rb.triple_tensor(), so3().triple_tensor());
        assert_eq!(rb.metric_matrix()[(2, 2)], 3.0);
        assert!(rigid_body([1.0, 0.0, 3.0]).is_err());
        assert!(rigid_body([1.0, -2.0, 3.0]).is_err());
    }

    #[test]
    fn isotropic_body_has_no_motion() {
        let rb = rigid_body([1.0, 1.0, 1.0]).unwrap();
        let x = Vector::from_column_slice(&[0.3, -1.2, 2.5]);
        assert_eq!(euler_rhs(&rb, &x).unwrap().amax(), 0.0);
    }

    #[test]
    fn principal_axes_are_equilibria() {
        let rb = rigid_body([1.0, 2.0, 3.0]).unwrap();
        for i in 0..3 {
            assert_eq!(euler_rhs(&rb, &e(i, 3)).unwrap().amax(), 0.0);
        }
    }

    #[test]
    fn abelian_gives_zero_triple() {
        let alg = abelian(DMatrix::identity(4, 4), DMatrix::identity(4, 4) * 2.0).unwrap();
        assert_eq!(alg.max_triple(), 0.0);
    }

    #[test]
    fn non_invariant_pairing_is_rejected() {
        let mut input = so3_input(DMatrix::identity(3, 3));
        input.pairing[(0, 0)] = 2.0;
        match from_lie_algebra(&input) {
            Err(InstanceError::NotInvariant { defect, .. }) => assert!(defect > 0.5),
            other => panic!("expected invariance failure, got {other:?}"),
        }
    }

    #[test]
    fn direct_sum_round_trips_bracket() {
        let input = so3_direct_sum_input(3);
        let alg = from_lie_algebra(&input).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = input.bracket(&e(i, 6), &e(j, 6));
                let got = induced_bracket(&alg, &e(i, 6), &e(j, 6)).unwrap();
                assert!((got - &want).amax() <= 1e-12 * want.amax().max(1.0));
            }
        }
    }

    #[test]
    fn direct_sum_is_seeded() {
        let a = so3_direct_sum_input(9);
        let b = so3_direct_sum_input(9);
        assert_eq!(a.structure_constants, b.structure_constants);
        assert_ne!(a.structure_constants, so3_direct_sum_input(10).structure_constants);
    }
}
