//! Fixed-step time integration of the Euler evolution.
//!
//! `rk4` is the classical four-stage Runge–Kutta scheme. `rk4-projected`
//! follows every step with a Newton projection back onto the level set of
//! energy and helicity, correcting within `span{X, DX}`. A probe field `Z`
//! can ride along with `dZ/dt = D′ T(X, DZ)`, advanced by the same stages
//! as `X` so the linking `⟨X, Z⟩` can be monitored.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{bilinear, dot, mat_vec, AlgebraError, FluidAlgebra, Vector};
use crate::dynamics::{evaluate_euler_rhs, transport, RhsStats};

/// Newton systems with a larger condition number fall back to rescaling.
pub const PROJECTION_SINGULAR_CONDITION: f64 = 1e10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("invalid integrator spec: {0}")]
    InvalidSpec(String),
    #[error("non-finite value in {stage} at t = {t}")]
    NonFinite { stage: &'static str, t: f64 },
    #[error("projection did not converge in {iterations} iterations (energy residual {energy_residual:e}, helicity residual {helicity_residual:e})")]
    ProjectionFailed { iterations: usize, energy_residual: f64, helicity_residual: f64 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "rk4")]
    Rk4,
    #[serde(rename = "rk4-projected")]
    Rk4Projected,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionSettings {
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_projection_tol")]
    pub tol: f64,
}

fn default_max_iter() -> usize {
    10
}

fn default_projection_tol() -> f64 {
    1e-12
}

fn default_record_every() -> usize {
    1
}

impl Default for ProjectionSettings {
    fn default() -> Self {
        Self { max_iter: default_max_iter(), tol: default_projection_tol() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub method: Method,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub projection: ProjectionSettings,
}

impl IntegratorSpec {
    pub fn rk4(dt: f64, t_end: f64) -> Self {
        Self { method: Method::Rk4, dt, t_end, record_every: 1, projection: ProjectionSettings::default() }
    }

    pub fn rk4_projected(dt: f64, t_end: f64) -> Self {
        Self { method: Method::Rk4Projected, ..Self::rk4(dt, t_end) }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(IntegrateError::InvalidSpec(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(IntegrateError::InvalidSpec(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(IntegrateError::InvalidSpec("record_every must be at least 1".into()));
        }
        if self.projection.max_iter == 0 || !(self.projection.tol > 0.0) {
            return Err(IntegrateError::InvalidSpec("projection needs max_iter >= 1 and tol > 0".into()));
        }
        Ok(())
    }

    /// Number of steps needed to reach `t_end`; the last step is shortened
    /// when `t_end` is not a multiple of `dt`.
    pub fn step_count(&self) -> usize {
        if self.t_end == 0.0 {
            return 0;
        }
        let ratio = self.t_end / self.dt;
        let nearest = ratio.round();
        if nearest >= 1.0 && (ratio - nearest).abs() <= 1e-9 * ratio {
            nearest as usize
        } else {
            ratio.ceil() as usize
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub state: Vector,
    pub energy: f64,
    pub helicity: f64,
    pub probe_linking: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericalFailure {
    pub t: f64,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub steps: usize,
    /// Steps whose projection failed and were kept unprojected.
    pub projection_failures: usize,
    /// Steps where the Newton system was singular and energy-only
    /// rescaling was used.
    pub projection_fallbacks: usize,
    pub failure: Option<NumericalFailure>,
    pub stats: RhsStats,
}

impl Trace {
    fn max_drift(&self, f: impl Fn(&TraceRecord) -> Option<f64>) -> Option<f64> {
        let first = self.records.first().and_then(&f)?;
        self.records.iter().filter_map(f).map(|v| (v - first).abs()).reduce(f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        self.max_drift(|r| Some(r.energy)).unwrap_or(0.0)
    }

    pub fn max_helicity_drift(&self) -> f64 {
        self.max_drift(|r| Some(r.helicity)).unwrap_or(0.0)
    }

    pub fn max_probe_linking_drift(&self) -> Option<f64> {
        self.max_drift(|r| r.probe_linking)
    }

    /// Largest relative change of `‖X‖_G` along the trace.
    pub fn max_norm_drift(&self) -> f64 {
        let Some(first) = self.records.first() else { return 0.0 };
        let n0 = first.energy.sqrt();
        self.records.iter().map(|r| (r.energy.sqrt() - n0).abs() / n0).fold(0.0, f64::max)
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

fn check_finite(v: &Vector, stage: &'static str) -> Result<(), IntegrateError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(IntegrateError::NonFinite { stage, t: f64::NAN })
    }
}

fn velocity(alg: &FluidAlgebra, x: &Vector, stats: &mut RhsStats, stage: &'static str) -> Result<Vector, IntegrateError> {
    check_finite(x, stage)?;
    let e = evaluate_euler_rhs(alg, x).map_err(|err| match err {
        AlgebraError::Numerical(_) => IntegrateError::NonFinite { stage, t: f64::NAN },
        other => other.into(),
    })?;
    *stats += e.stats;
    Ok(e.value)
}

/// Right-hand side of the probe equation, `D′ T(X, DZ)`.
pub fn probe_rhs(alg: &FluidAlgebra, x: &Vector, z: &Vector) -> Result<Vector, AlgebraError> {
    let dz = alg.curl(z)?;
    alg.inverse_curl(&transport(alg, x, &dz)?)
}

fn probe_velocity(
    alg: &FluidAlgebra,
    x: &Vector,
    z: &Vector,
    stats: &mut RhsStats,
    stage: &'static str,
) -> Result<Vector, IntegrateError> {
    check_finite(z, stage)?;
    let v = probe_rhs(alg, x, z)?;
    check_finite(&v, stage)?;
    *stats += RhsStats { solves: 4, contractions: 1 };
    Ok(v)
}

/// One classical RK4 step of `dX/dt = euler_rhs(X)`.
pub fn rk4_step(alg: &FluidAlgebra, x: &Vector, dt: f64) -> Result<Vector, IntegrateError> {
    alg.check(x)?;
    rk4_step_counted(alg, x, dt, &mut RhsStats::default())
}

fn rk4_step_counted(alg: &FluidAlgebra, x: &Vector, dt: f64, stats: &mut RhsStats) -> Result<Vector, IntegrateError> {
    let h = dt / 2.0;
    let k1 = velocity(alg, x, stats, "stage 1")?;
    let k2 = velocity(alg, &(x + &k1 * h), stats, "stage 2")?;
    let k3 = velocity(alg, &(x + &k2 * h), stats, "stage 3")?;
    let k4 = velocity(alg, &(x + &k3 * dt), stats, "stage 4")?;
    let next = x + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
    check_finite(&next, "update")?;
    Ok(next)
}

/// One RK4 step of the coupled system `(X, Z)`, the probe using the
/// stage values of `X`.
pub fn rk4_step_with_probe(
    alg: &FluidAlgebra,
    x: &Vector,
    z: &Vector,
    dt: f64,
) -> Result<(Vector, Vector), IntegrateError> {
    alg.check(x)?;
    alg.check(z)?;
    rk4_pair_counted(alg, x, z, dt, &mut RhsStats::default())
}

fn rk4_pair_counted(
    alg: &FluidAlgebra,
    x: &Vector,
    z: &Vector,
    dt: f64,
    stats: &mut RhsStats,
) -> Result<(Vector, Vector), IntegrateError> {
    let h = dt / 2.0;
    let k1 = velocity(alg, x, stats, "stage 1")?;
    let m1 = probe_velocity(alg, x, z, stats, "probe stage 1")?;
    let x2 = x + &k1 * h;
    let z2 = z + &m1 * h;
    let k2 = velocity(alg, &x2, stats, "stage 2")?;
    let m2 = probe_velocity(alg, &x2, &z2, stats, "probe stage 2")?;
    let x3 = x + &k2 * h;
    let z3 = z + &m2 * h;
    let k3 = velocity(alg, &x3, stats, "stage 3")?;
    let m3 = probe_velocity(alg, &x3, &z3, stats, "probe stage 3")?;
    let x4 = x + &k3 * dt;
    let z4 = z + &m3 * dt;
    let k4 = velocity(alg, &x4, stats, "stage 4")?;
    let m4 = probe_velocity(alg, &x4, &z4, stats, "probe stage 4")?;
    let xn = x + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
    let zn = z + (m1 + (m2 + m3) * 2.0 + m4) * (dt / 6.0);
    check_finite(&xn, "update")?;
    check_finite(&zn, "probe update")?;
    Ok((xn, zn))
}

/// Advances the probe `Z` one step alongside `X` (whose own update is discarded).
pub fn co_evolve_probe(alg: &FluidAlgebra, x: &Vector, z: &Vector, dt: f64) -> Result<Vector, IntegrateError> {
    rk4_step_with_probe(alg, x, z, dt).map(|(_, z)| z)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub state: Vector,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    /// The Newton system was singular and only energy was restored.
    pub energy_only: bool,
}

/// Pulls `x` back onto `{energy = e0, helicity = h0}` along
/// `X′ = X + 2αX + 2βDX`, solving the two constraints for `(α, β)` by
/// Newton's method from `(0, 0)`.
pub fn project_to_invariants(
    alg: &FluidAlgebra,
    x: &Vector,
    e0: f64,
    h0: f64,
    settings: &ProjectionSettings,
) -> Result<Projection, IntegrateError> {
    alg.check(x)?;
    let g = alg.metric_matrix();
    let l = alg.linking_matrix();
    let u = x;
    let v = alg.curl(u)?;
    let (gu, gv, lu, lv) = (mat_vec(g, u), mat_vec(g, &v), mat_vec(l, u), mat_vec(l, &v));
    let e_tol = settings.tol * e0.abs();
    let h_tol = settings.tol * h0.abs().max(e0.abs());

    let (mut alpha, mut beta) = (0.0, 0.0);
    let mut candidate = u.clone();
    for iteration in 0..=settings.max_iter {
        let r_e = bilinear(g, &candidate, &candidate) - e0;
        let r_h = bilinear(l, &candidate, &candidate) - h0;
        if r_e.abs() <= e_tol && r_h.abs() <= h_tol {
            return Ok(Projection { state: candidate, alpha, beta, iterations: iteration, energy_only: false });
        }
        if iteration == settings.max_iter {
            return Err(IntegrateError::ProjectionFailed {
                iterations: iteration,
                energy_residual: r_e,
                helicity_residual: r_h,
            });
        }
        // ∂/∂α (X′,X′) = 4 (X′, X), ∂/∂β (X′,X′) = 4 (X′, DX); same with L
        let jac = nalgebra::Matrix2::new(
            4.0 * dot(&candidate, &gu),
            4.0 * dot(&candidate, &gv),
            4.0 * dot(&candidate, &lu),
            4.0 * dot(&candidate, &lv),
        );
        let sv = jac.singular_values();
        let cond = if sv.min() > 0.0 { sv.max() / sv.min() } else { f64::INFINITY };
        if !(cond <= PROJECTION_SINGULAR_CONDITION) {
            let e = bilinear(g, u, u);
            if !(e > 0.0) {
                return Err(IntegrateError::ProjectionFailed {
                    iterations: iteration,
                    energy_residual: r_e,
                    helicity_residual: r_h,
                });
            }
            let s = (e0 / e).sqrt();
            return Ok(Projection {
                state: u * s,
                alpha: (s - 1.0) / 2.0,
                beta: 0.0,
                iterations: iteration,
                energy_only: true,
            });
        }
        let step = jac
            .lu()
            .solve(&nalgebra::Vector2::new(-r_e, -r_h))
            .ok_or(IntegrateError::ProjectionFailed { iterations: iteration, energy_residual: r_e, helicity_residual: r_h })?;
        alpha += step[0];
        beta += step[1];
        candidate = u * (1.0 + 2.0 * alpha) + &v * (2.0 * beta);
        check_finite(&candidate, "projection")?;
    }
    unreachable!("loop returns on its final iteration")
}

/// Integrates from `x0` according to `spec`, optionally co-evolving `probe`.
///
/// A numerical failure does not discard the run: the returned trace holds
/// every record up to the failure and `failure` describes it.
pub fn integrate(
    alg: &FluidAlgebra,
    x0: &Vector,
    spec: &IntegratorSpec,
    probe: Option<&Vector>,
) -> Result<Trace, IntegrateError> {
    spec.validate()?;
    alg.check(x0)?;
    if let Some(z) = probe {
        alg.check(z)?;
    }
    let steps = spec.step_count();
    let e0 = alg.energy(x0)?;
    let h0 = alg.helicity(x0)?;

    let mut trace = Trace {
        records: Vec::with_capacity(steps / spec.record_every + 2),
        steps: 0,
        projection_failures: 0,
        projection_fallbacks: 0,
        failure: None,
        stats: RhsStats::default(),
    };
    let mut x = x0.clone();
    let mut z = probe.cloned();
    trace.records.push(record(alg, 0.0, &x, z.as_ref())?);

    for i in 1..=steps {
        let t_prev = (i - 1) as f64 * spec.dt;
        let t = if i == steps { spec.t_end } else { i as f64 * spec.dt };
        let h = t - t_prev;
        let advanced = match &z {
            Some(zv) => rk4_pair_counted(alg, &x, zv, h, &mut trace.stats).map(|(a, b)| (a, Some(b))),
            None => rk4_step_counted(alg, &x, h, &mut trace.stats).map(|a| (a, None)),
        };
        let (mut next, next_z) = match advanced {
            Ok(v) => v,
            Err(err) => {
                trace.failure = Some(NumericalFailure { t, message: with_time(err, t).to_string() });
                break;
            }
        };
        if spec.method == Method::Rk4Projected {
            match project_to_invariants(alg, &next, e0, h0, &spec.projection) {
                Ok(p) => {
                    if p.energy_only {
                        trace.projection_fallbacks += 1;
                    }
                    next = p.state;
                }
                Err(IntegrateError::ProjectionFailed { .. }) => trace.projection_failures += 1,
                Err(err) => {
                    trace.failure = Some(NumericalFailure { t, message: with_time(err, t).to_string() });
                    break;
                }
            }
        }
        x = next;
        z = next_z;
        trace.steps = i;
        if i % spec.record_every == 0 || i == steps {
            match record(alg, t, &x, z.as_ref()) {
                Ok(r) => trace.records.push(r),
                Err(err) => {
                    trace.failure = Some(NumericalFailure { t, message: err.to_string() });
                    break;
                }
            }
        }
    }
    Ok(trace)
}

fn with_time(err: IntegrateError, t: f64) -> IntegrateError {
    match err {
        IntegrateError::NonFinite { stage, .. } => IntegrateError::NonFinite { stage, t },
        other => other,
    }
}

fn record(alg: &FluidAlgebra, t: f64, x: &Vector, z: Option<&Vector>) -> Result<TraceRecord, IntegrateError> {
    let energy = alg.energy(x)?;
    let helicity = alg.helicity(x)?;
    let probe_linking = z.map(|z| alg.linking(x, z)).transpose()?;
    if !(energy.is_finite() && helicity.is_finite() && probe_linking.is_none_or(f64::is_finite)) {
        return Err(IntegrateError::NonFinite { stage: "record", t });
    }
    Ok(TraceRecord { t, state: x.clone(), energy, helicity, probe_linking })
}
