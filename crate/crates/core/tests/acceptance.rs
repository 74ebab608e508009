//! Acceptance criteria 1–9. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

use std::f64::consts::{SQRT_2, TAU};
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use fluidalg::algebra::Vector;
use fluidalg::diagnostics::{run_diagnostics, DiagnosticsSettings};
use fluidalg::dynamics::{circulation_defect, euler_rhs, jacobiator, transport, vorticity_rhs};
use fluidalg::instances::{abelian, build_torus_algebra, random_algebra, random_state, rigid_body, so3, so3_direct_sum, Phase};
use fluidalg::integrators::{integrate, IntegratorSpec, Trace};
use fluidalg::rng::derive_seed;
use fluidalg::FluidAlgebra;
use nalgebra::DMatrix;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn in_band(r: f64) -> bool {
    (8.0..=32.0).contains(&r)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn fmt_ratios(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ")
}

fn run_rk4(alg: &FluidAlgebra, x0: &Vector, dt: f64, t_end: f64, probe: Option<&Vector>) -> Trace {
    let trace = integrate(alg, x0, &IntegratorSpec::rk4(dt, t_end), probe).unwrap();
    assert!(trace.failure.is_none(), "{:?}", trace.failure);
    trace
}

/// Ratios of successive entries.
fn ratios(drifts: &[f64]) -> Vec<f64> {
    drifts.windows(2).map(|w| w[0] / w[1]).collect()
}

fn random_sample() -> Vec<(u64, usize)> {
    (1..=200u64).map(|seed| (seed, 3 + (seed as usize % 6))).collect()
}

fn criterion_1() -> Outcome {
    let mut worst_orth: f64 = 0.0;
    let mut worst_curl: f64 = 0.0;
    let mut ok = true;
    for (seed, n) in random_sample() {
        let alg = random_algebra(seed, n).unwrap();
        let report = run_diagnostics(&alg, &DiagnosticsSettings { samples: 20, seed, jacobi_tolerance: None }).unwrap();
        for name in ["triple_alternating_xxz", "triple_alternating_xzx", "triple_alternating_zxx", "energy_orthogonality", "helicity_orthogonality"] {
            let r = report.identity(name).unwrap();
            worst_orth = worst_orth.max(r.max_defect);
            ok &= r.max_defect <= 1e-12;
        }
        for name in ["curl_defining_relation", "curl_self_adjointness"] {
            let r = report.identity(name).unwrap();
            worst_curl = worst_curl.max(r.max_defect);
            ok &= r.max_defect <= 1e-11;
        }
    }
    outcome(ok, format!("200 algebras x 20 states: alternating/orthogonality max {worst_orth:.2e} (<= 1e-12), curl relations max {worst_curl:.2e} (<= 1e-11)"))
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for (seed, n) in random_sample() {
        let alg = random_algebra(seed, n).unwrap();
        for s in 0..20u64 {
            let x = random_state(&alg, derive_seed(seed, 3 * s + 1), 1.0);
            let dx = alg.curl(&x).unwrap();
            let a = alg.curl(&euler_rhs(&alg, &x).unwrap()).unwrap();
            let b = transport(&alg, &x, &dx).unwrap();
            let c = vorticity_rhs(&alg, &dx).unwrap();
            let size = alg.g_norm(&a).max(alg.g_norm(&b)).max(alg.g_norm(&c));
            let diff = alg.g_norm(&(&a - &b)).max(alg.g_norm(&(&b - &c))).max(alg.g_norm(&(&a - &c)));
            if diff > 0.0 {
                worst = worst.max(diff / size);
            }
        }
    }
    outcome(worst <= 1e-10, format!("max relative disagreement {worst:.2e} (<= 1e-10)"))
}

fn criterion_3() -> Outcome {
    let alg = rigid_body([1.0, 2.0, 3.0]).unwrap();
    let x0 = Vector::from_column_slice(&[0.0, 1.0, 1.0]);
    let steps = [1e-2, 5e-3, 2.5e-3];
    let traces: Vec<Trace> = steps.iter().map(|&dt| run_rk4(&alg, &x0, dt, 1.0, None)).collect();
    let e: Vec<f64> = traces.iter().map(Trace::max_energy_drift).collect();
    let h: Vec<f64> = traces.iter().map(Trace::max_helicity_drift).collect();
    let (re, rh) = (ratios(&e), ratios(&h));
    let order_ok = re.iter().chain(&rh).all(|r| in_band(*r));

    let (e0, h0) = (5.0, 2.0);
    let mut proj_worst: f64 = 0.0;
    for &dt in &steps[..2] {
        let t = integrate(&alg, &x0, &IntegratorSpec::rk4_projected(dt, 1.0), None).unwrap();
        assert!(t.failure.is_none());
        proj_worst = proj_worst.max(t.max_energy_drift() / e0).max(t.max_helicity_drift() / f64::max(h0, e0));
    }
    let proj_ok = proj_worst <= 1e-9;
    outcome(
        order_ok && proj_ok,
        format!(
            "rk4 dt=1e-2,5e-3,2.5e-3: energy drift [{}] ratios [{}], helicity drift [{}] ratios [{}] (want 8..32); projected max relative drift {proj_worst:.2e} (<= 1e-9)",
            fmt_list(&e),
            fmt_ratios(&re),
            fmt_list(&h),
            fmt_ratios(&rh)
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();

    let alg = random_algebra(5, 6).unwrap();
    let x0 = random_state(&alg, 1, 30.0);
    let z0 = random_state(&alg, 2, 1.0);
    let d: Vec<f64> = [2e-2, 1e-2, 5e-3]
        .iter()
        .map(|&dt| run_rk4(&alg, &x0, dt, 2.0, Some(&z0)).max_probe_linking_drift().unwrap())
        .collect();
    let r = ratios(&d);
    ok &= r.iter().all(|v| in_band(*v));
    parts.push(format!("random(5,6) dt=2e-2,1e-2,5e-3: drift [{}] ratios [{}]", fmt_list(&d), fmt_ratios(&r)));

    let rb = rigid_body([1.0, 2.0, 3.0]).unwrap();
    let x0 = Vector::from_column_slice(&[0.0, 1.0, 1.0]);
    let z0 = random_state(&rb, 2, 1.0);
    let d: Vec<f64> = [2e-2, 1e-2, 5e-3]
        .iter()
        .map(|&dt| run_rk4(&rb, &x0, dt, 10.0, Some(&z0)).max_probe_linking_drift().unwrap())
        .collect();
    let r = ratios(&d);
    ok &= r.iter().all(|v| in_band(*v));
    parts.push(format!("rigid_body dt=2e-2,1e-2,5e-3: drift [{}] ratios [{}]", fmt_list(&d), fmt_ratios(&r)));
    outcome(ok, parts.join("; "))
}

/// Scale of the circulation defect at `x`, as used by the diagnostics.
fn defect_scale(alg: &FluidAlgebra, x: &Vector) -> f64 {
    let dx = alg.curl(x).unwrap();
    alg.g_norm(x) * alg.g_norm(&dx) * alg.max_triple() * alg.curl_norm().unwrap()
}

fn criterion_5() -> Outcome {
    let (torus, _) = build_torus_algebra(1).unwrap();
    let algebras = vec![
        ("random(5,6)", random_algebra(5, 6).unwrap()),
        ("random(11,5)", random_algebra(11, 5).unwrap()),
        ("rigid_body", rigid_body([1.0, 2.0, 3.0]).unwrap()),
        ("torus", torus),
    ];
    let mut worst_zero: f64 = 0.0;
    let mut least_perturbed = f64::INFINITY;
    for (i, (_, alg)) in algebras.iter().enumerate() {
        let x = random_state(alg, 100 + i as u64, 1.0);
        let scale = defect_scale(alg, &x);
        let f = euler_rhs(alg, &x).unwrap();
        let r = circulation_defect(alg, &f, &x).unwrap();
        worst_zero = worst_zero.max(alg.dual_norm(&r).unwrap() / scale);
        // the residual as a functional: r·e_m = (F, D e_m) − {X, DX, D e_m}
        let dx = alg.curl(&x).unwrap();
        let oracle = Vector::from_fn(alg.dim(), |m, _| {
            let mut e = Vector::zeros(alg.dim());
            e[m] = 1.0;
            let de = alg.curl(&e).unwrap();
            alg.metric_inner(&f, &de).unwrap() - alg.triple(&x, &dx, &de).unwrap()
        });
        worst_zero = worst_zero.max(alg.dual_norm(&oracle).unwrap() / scale);
        for k in 0..50u64 {
            let v = random_state(alg, derive_seed(7 + i as u64, k + 1), 1.0);
            let r = circulation_defect(alg, &(&f + &v * 1e-3), &x).unwrap();
            least_perturbed = least_perturbed.min(alg.dual_norm(&r).unwrap() / scale);
        }
    }
    let names: Vec<&str> = algebras.iter().map(|(n, _)| *n).collect();
    outcome(
        worst_zero <= 1e-11 && least_perturbed >= 1e-6,
        format!(
            "{}: defect at euler_rhs max {worst_zero:.2e} (<= 1e-11), perturbed min {least_perturbed:.2e} (>= 1e-6), in units of scale",
            names.join(", ")
        ),
    )
}

fn jacobi_normalized(alg: &FluidAlgebra, seed: u64, count: u64) -> Vec<f64> {
    (0..count)
        .map(|s| {
            let [x, y, z] = [1, 2, 3].map(|k| random_state(alg, derive_seed(seed, 3 * s + k), 1.0));
            let j = alg.g_norm(&jacobiator(alg, &x, &y, &z).unwrap());
            let scale = alg.scale(&[&x, &y, &z]);
            if j == 0.0 {
                0.0
            } else {
                j / scale
            }
        })
        .collect()
}

fn criterion_6() -> Outcome {
    let pairing = DMatrix::from_diagonal(&Vector::from_column_slice(&[1.0, -2.0, 0.5, 3.0]));
    let metric = DMatrix::from_fn(4, 4, |i, j| if i == j { 2.0 } else { 0.25 });
    let lie = vec![
        ("so3", so3()),
        ("abelian", abelian(pairing, metric).unwrap()),
        ("so3+so3", so3_direct_sum(7).unwrap()),
        ("rigid_body", rigid_body([1.0, 2.0, 3.0]).unwrap()),
    ];
    let mut lie_worst: f64 = 0.0;
    for (_, alg) in &lie {
        lie_worst = lie_worst.max(jacobi_normalized(alg, 1, 100).into_iter().fold(0.0, f64::max));
    }
    let rnd = jacobi_normalized(&random_algebra(11, 5).unwrap(), 1, 200);
    let frac = rnd.iter().filter(|v| **v > 1e-3).count() as f64 / rnd.len() as f64;
    let median = {
        let mut s = rnd.clone();
        s.sort_by(f64::total_cmp);
        s[s.len() / 2]
    };
    outcome(
        lie_worst <= 1e-11 && frac >= 0.9,
        format!(
            "Lie instances (so3, abelian, so3+so3, rigid_body) max {lie_worst:.2e} (<= 1e-11); random(11,5): {:.1}% of 200 triples above 1e-3 (>= 90%), median {median:.2e}",
            100.0 * frac
        ),
    )
}

fn criterion_7() -> Outcome {
    let (alg, basis) = build_torus_algebra(1).unwrap();
    let mut ok = alg.dim() == 52;
    let mut parts = vec![format!("dim {}", alg.dim())];

    // spectrum ±2π|k| with two modes per sign and wavevector
    let eig = alg.curl_eigenvalues().unwrap();
    let mut want: Vec<f64> = basis
        .wavevectors
        .iter()
        .flat_map(|k| {
            let kappa = TAU * f64::from(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
            [kappa, kappa, -kappa, -kappa]
        })
        .collect();
    want.sort_by(f64::total_cmp);
    let spec_err = eig.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let unit = eig.iter().filter(|v| (v.abs() - TAU).abs() < 1e-9).count();
    ok &= spec_err <= 1e-9 && eig.len() == want.len() && unit == 12;
    parts.push(format!("spectrum error {spec_err:.2e} ({unit} eigenvalues at ±2π)"));

    // grid quadrature of ∫ f_i · (f_j × f_k) on the 8³ midpoint grid
    const N: usize = 8;
    let n = alg.dim();
    let pts: Vec<[f64; 3]> = (0..N * N * N)
        .map(|s| [s / (N * N), (s / N) % N, s % N].map(|a| (a as f64 + 0.5) / N as f64))
        .collect();
    let fields: Vec<Vec<[f64; 3]>> = (0..n)
        .map(|p| {
            let m = &basis.modes[p];
            let e = basis.polarization_vector(p);
            pts.iter()
                .map(|x| {
                    let arg = TAU * (m.k[0] as f64 * x[0] + m.k[1] as f64 * x[1] + m.k[2] as f64 * x[2]);
                    let v = SQRT_2 * if m.phase == Phase::Cos { arg.cos() } else { arg.sin() };
                    e.map(|c| v * c)
                })
                .collect()
        })
        .collect();
    let t = alg.triple_tensor();
    let mut quad_err: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let mut q = 0.0;
                for s in 0..pts.len() {
                    let (a, b, c) = (fields[i][s], fields[j][s], fields[k][s]);
                    q += a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
                }
                quad_err = quad_err.max((q / pts.len() as f64 - t.get(i, j, k)).abs());
            }
        }
    }
    ok &= quad_err <= 1e-10;
    parts.push(format!("quadrature error {quad_err:.2e}"));

    let xb = basis.beltrami_state(1.0);
    let steady = alg.g_norm(&euler_rhs(&alg, &xb).unwrap()) / defect_scale(&alg, &xb);
    ok &= steady <= 1e-12;
    parts.push(format!("Beltrami |rhs|/scale {steady:.2e}"));

    let x0 = random_state(&alg, 3, 1.0);
    let traces: Vec<Trace> = [1e-2, 5e-3, 2.5e-3].iter().map(|&dt| run_rk4(&alg, &x0, dt, 1.0, None)).collect();
    let re = ratios(&traces.iter().map(Trace::max_energy_drift).collect::<Vec<_>>());
    let rh = ratios(&traces.iter().map(Trace::max_helicity_drift).collect::<Vec<_>>());
    ok &= re.iter().chain(&rh).all(|r| in_band(*r));
    parts.push(format!("mixed state ratios energy [{}] helicity [{}]", fmt_ratios(&re), fmt_ratios(&rh)));
    outcome(ok, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let (torus, _) = build_torus_algebra(1).unwrap();
    let rb = rigid_body([1.0, 2.0, 3.0]).unwrap();
    let cases: Vec<(&str, FluidAlgebra, Vector)> = vec![
        ("rigid_body", rb, Vector::from_column_slice(&[0.0, 1.0, 1.0])),
        ("so3+so3", so3_direct_sum(7).unwrap(), Vector::zeros(0)),
        ("random(5,6)", random_algebra(5, 6).unwrap(), Vector::zeros(0)),
        ("torus", torus, Vector::zeros(0)),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, alg, x0) in cases {
        let x0 = if x0.is_empty() { random_state(&alg, 5, 3.0) } else { x0 };
        let trace = integrate(&alg, &x0, &IntegratorSpec::rk4_projected(1e-2, 100.0), None).unwrap();
        let finite = trace.failure.is_none() && trace.records.iter().all(|r| r.state.iter().all(|v| v.is_finite()));
        let drift = trace.max_norm_drift();
        ok &= finite && trace.steps == 10_000 && drift <= 1e-9;
        parts.push(format!("{name} {} steps drift {drift:.2e}", trace.steps));
    }
    outcome(ok, parts.join(", "))
}

fn criterion_9() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_fluidalg");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"instance": {"name": "random", "seed": 5, "n": 6}, "initial_state": {"seed": 1, "norm": 3},
            "probe": {"seed": 2}, "integrator": {"method": "rk4-projected", "dt": 0.01, "t_end": 2}}"#,
    )
    .unwrap();
    let run = |tag: &str, seed: Option<&str>| -> (Vec<u8>, Vec<u8>) {
        let out = dir.path().join(tag);
        let mut cmd = Command::new(bin);
        cmd.args(["simulate", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
        cmd.env_remove("FLUIDALG_SEED_OVERRIDE");
        if let Some(s) = seed {
            cmd.env("FLUIDALG_SEED_OVERRIDE", s);
        }
        let status = cmd.status().unwrap();
        assert!(status.success());
        (fs::read(out.join("trace.csv")).unwrap(), fs::read(out.join("state.csv")).unwrap())
    };
    let a = run("a", None);
    let b = run("b", None);
    let c = run("c", Some("123"));
    let d = run("d", Some("123"));
    let same = a == b;
    let override_repro = c == d;
    let override_changes = a.0 != c.0 && a.1 != c.1;
    outcome(
        same && override_repro && override_changes,
        format!("identical reruns {same}, override reproducible {override_repro}, override changes outputs {override_changes}"),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Outcome, Duration); 9] = [
        (1, criterion_1, Duration::from_secs(10)),
        (2, criterion_2, Duration::from_secs(5)),
        (3, criterion_3, Duration::from_secs(5)),
        (4, criterion_4, Duration::from_secs(10)),
        (5, criterion_5, Duration::from_secs(5)),
        (6, criterion_6, Duration::from_secs(5)),
        (7, criterion_7, Duration::from_secs(60)),
        (8, criterion_8, Duration::from_secs(30)),
        (9, criterion_9, Duration::from_secs(60)),
    ];
    let mut failed = Vec::new();
    for (id, f, limit) in criteria {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let passed = out.passed && elapsed <= limit;
        println!(
            "criterion {id}: {} | {} | {:.2}s (limit {}s)",
            if passed { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if !passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
