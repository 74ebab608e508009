//! Right-hand sides and derived operations of the Euler evolution.
//!
//! Everything here is defined weakly, by pairing against an arbitrary test
//! vector, and then solved in coordinates:
//!
//! | operation                | defining pairing                   | coordinates          |
//! |--------------------------|------------------------------------|----------------------|
//! | `euler_rhs(X)`           | `(V, Z) = {X, DX, Z}`              | `G⁻¹ c(X, DX)`       |
//! | `transport(X, Z)`        | `(T, W) = {X, Z, DW}`              | `G⁻¹ L G⁻¹ c(X, Z)`  |
//! | `vorticity_rhs(Y)`       | `(W, Z) = {D′Y, Y, DZ}`            | `transport(D′Y, Y)`  |
//! | `induced_bracket(X, Y)`  | `⟨[X,Y], Z⟩ = {X, Y, Z}`           | `L⁻¹ c(X, Y)`        |
//!
//! where `c(X, Y)_m = Σ T[i][j][m] X_i Y_j`.

use serde::Serialize;

use crate::algebra::{AlgebraError, FluidAlgebra, Vector};

/// Work done by one right-hand-side evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RhsStats {
    pub solves: u64,
    pub contractions: u64,
}

impl std::ops::AddAssign for RhsStats {
    fn add_assign(&mut self, rhs: Self) {
        self.solves += rhs.solves;
        self.contractions += rhs.contractions;
    }
}

#[derive(Clone, Debug)]
pub struct RhsEvaluation {
    pub value: Vector,
    pub stats: RhsStats,
}

/// `dX/dt`, with solve/contraction counts.
pub fn evaluate_euler_rhs(alg: &FluidAlgebra, x: &Vector) -> Result<RhsEvaluation, AlgebraError> {
    let dx = alg.curl(x)?;
    let c = alg.contract_unchecked(x, &dx);
    let value = alg.solve_metric(&c)?;
    if value.iter().any(|v| !v.is_finite()) {
        return Err(AlgebraError::Numerical("euler_rhs"));
    }
    Ok(RhsEvaluation { value, stats: RhsStats { solves: 2, contractions: 1 } })
}

/// The Euler vector field: the unique `V` with `(V, Z) = {X, DX, Z}` for all `Z`.
pub fn euler_rhs(alg: &FluidAlgebra, x: &Vector) -> Result<Vector, AlgebraError> {
    evaluate_euler_rhs(alg, x).map(|e| e.value)
}

/// Infinitesimal transport of `z` by `x`: `(T(X,Z), W) = {X, Z, DW}`.
pub fn transport(alg: &FluidAlgebra, x: &Vector, z: &Vector) -> Result<Vector, AlgebraError> {
    let b = alg.contract(x, z)?;
    // (t, W)_G = bᵀ D W  ⇒  t = G⁻¹ Dᵀ b = D (G⁻¹ b)
    let t = alg.curl(&alg.solve_metric(&b)?)?;
    if t.iter().any(|v| !v.is_finite()) {
        return Err(AlgebraError::Numerical("transport"));
    }
    Ok(t)
}

/// Evolution of the vorticity `Y = DX`: `(dY/dt, Z) = {D′Y, Y, DZ}`.
pub fn vorticity_rhs(alg: &FluidAlgebra, y: &Vector) -> Result<Vector, AlgebraError> {
    let x = alg.inverse_curl(y)?;
    transport(alg, &x, y)
}

/// The bracket recovered from the triple form through the linking form.
pub fn induced_bracket(alg: &FluidAlgebra, x: &Vector, y: &Vector) -> Result<Vector, AlgebraError> {
    let b = alg.contract(x, y)?;
    alg.solve_linking(&b)
}

/// `[[X,Y],Z] + [[Y,Z],X] + [[Z,X],Y]` for the induced bracket.
pub fn jacobiator(alg: &FluidAlgebra, x: &Vector, y: &Vector, z: &Vector) -> Result<Vector, AlgebraError> {
    let xy = induced_bracket(alg, x, y)?;
    let yz = induced_bracket(alg, y, z)?;
    let zx = induced_bracket(alg, z, x)?;
    let mut out = induced_bracket(alg, &xy, z)?;
    out += induced_bracket(alg, &yz, x)?;
    out += induced_bracket(alg, &zx, y)?;
    Ok(out)
}

/// Residual of a candidate velocity `f` at state `x` against the
/// circulation balance.
///
/// Returned as the covector `r` with
/// `r · Z = (F, DZ) − {X, DX, DZ}` for every `Z`, i.e. `r = Dᵀ G F − Dᵀ c(X, DX)`.
/// It vanishes exactly when `f` is the Euler vector field at `x`.
pub fn circulation_defect(alg: &FluidAlgebra, f: &Vector, x: &Vector) -> Result<Vector, AlgebraError> {
    alg.check(f)?;
    let dx = alg.curl(x)?;
    let c = alg.contract_unchecked(x, &dx);
    // Dᵀ G = L, and Dᵀ = L G⁻¹
    let pairing_term = alg.apply_linking(f)?;
    let triple_term = alg.apply_linking(&alg.solve_metric(&c)?)?;
    Ok(pairing_term - triple_term)
}
