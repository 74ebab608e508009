//! Spectral Galerkin truncation of divergence-free, mean-zero fields on the
//! unit flat torus `[0, 1)³`.
//!
//! Basis: for every wavevector `k` in the half lattice (`k ≻ 0`
//! lexicographically, `0 < |k|∞ ≤ K`) and polarization `a ∈ {1, 2}`,
//!
//! ```text
//! √2 cos(2π k·x) e_a(k),   √2 sin(2π k·x) e_a(k)
//! ```
//!
//! which is L²-orthonormal, so the metric is the identity. The frame is
//! `e₁ = normalize(k × u)` with `u` the first coordinate axis not parallel
//! to `k`, and `e₂ = k̂ × e₁`. Mode `p` of wavevector index `w` sits at
//! `4w + 2(a − 1) + phase` with `phase = 0` for cosine, `1` for sine.
//!
//! The triple form is `∫ f_p · (f_q × f_r) dx`, the linking form
//! `∫ f_p · curl f_q dx`; both are assembled in closed form.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;
use serde::Serialize;

use super::InstanceError;
use crate::algebra::{FluidAlgebra, TripleEntry, TripleTensor, Vector};

pub const DEFAULT_TORUS_DIM_CAP: usize = 512;

/// Entries with smaller magnitude are rounding residue of vanishing
/// determinants and are not stored.
const ENTRY_FLOOR: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Cos,
    Sin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TorusMode {
    pub k: [i32; 3],
    pub polarization: u8,
    pub phase: Phase,
}

#[derive(Clone, Debug, Serialize)]
pub struct TorusBasis {
    pub cutoff: usize,
    pub wavevectors: Vec<[i32; 3]>,
    /// `[e₁(k), e₂(k)]` per wavevector.
    pub frames: Vec<[[f64; 3]; 2]>,
    pub modes: Vec<TorusMode>,
}

impl TorusBasis {
    pub fn new(cutoff: usize) -> Self {
        let kmax = cutoff as i32;
        let mut wavevectors = Vec::new();
        for x in 0..=kmax {
            for y in -kmax..=kmax {
                for z in -kmax..=kmax {
                    let k = [x, y, z];
                    if is_positive(k) {
                        wavevectors.push(k);
                    }
                }
            }
        }
        let frames = wavevectors.iter().map(|&k| frame(k)).collect();
        let modes = wavevectors
            .iter()
            .flat_map(|&k| {
                [(1, Phase::Cos), (1, Phase::Sin), (2, Phase::Cos), (2, Phase::Sin)]
                    .map(|(polarization, phase)| TorusMode { k, polarization, phase })
            })
            .collect();
        Self { cutoff, wavevectors, frames, modes }
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn mode_index(&self, wave: usize, polarization: u8, phase: Phase) -> usize {
        4 * wave + 2 * (polarization as usize - 1) + if phase == Phase::Sin { 1 } else { 0 }
    }

    /// `|k|²` of the wavevector behind mode `p`.
    pub fn shell(&self, p: usize) -> i32 {
        norm2(self.modes[p].k)
    }

    pub fn polarization_vector(&self, p: usize) -> [f64; 3] {
        let wave = p / 4;
        self.frames[wave][self.modes[p].polarization as usize - 1]
    }

    /// Value of basis field `p` at the point `x`.
    pub fn field_at(&self, p: usize, x: [f64; 3]) -> [f64; 3] {
        let m = &self.modes[p];
        let arg = std::f64::consts::TAU * (m.k[0] as f64 * x[0] + m.k[1] as f64 * x[1] + m.k[2] as f64 * x[2]);
        let s = std::f64::consts::SQRT_2 * if m.phase == Phase::Cos { arg.cos() } else { arg.sin() };
        let e = self.polarization_vector(p);
        [s * e[0], s * e[1], s * e[2]]
    }

    /// Analytic curl spectrum: `±2π|k|`, each sign twice per wavevector.
    pub fn curl_eigenvalues(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .wavevectors
            .iter()
            .flat_map(|&k| {
                let kappa = std::f64::consts::TAU * (norm2(k) as f64).sqrt();
                [kappa, kappa, -kappa, -kappa]
            })
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// Equal-amplitude curl eigenfield in the `|k| = 1` shell with
    /// eigenvalue `2π·sign`, normalized to unit energy (an ABC-type flow).
    pub fn beltrami_state(&self, sign: f64) -> Vector {
        let sign = if sign < 0.0 { -1.0 } else { 1.0 };
        let mut x = Vector::zeros(self.dim());
        for (w, &k) in self.wavevectors.iter().enumerate() {
            if norm2(k) != 1 {
                continue;
            }
            x[self.mode_index(w, 1, Phase::Cos)] = 1.0;
            x[self.mode_index(w, 2, Phase::Sin)] = -sign;
            x[self.mode_index(w, 2, Phase::Cos)] = 1.0;
            x[self.mode_index(w, 1, Phase::Sin)] = sign;
        }
        let norm = x.norm();
        x / norm
    }
}

fn is_positive(k: [i32; 3]) -> bool {
    k.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

fn norm2(k: [i32; 3]) -> i32 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let bc = cross(b, c);
    a[0] * bc[0] + a[1] * bc[1] + a[2] * bc[2]
}

fn frame(k: [i32; 3]) -> [[f64; 3]; 2] {
    let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
    let u = (0..3)
        .map(|axis| {
            let mut u = [0.0; 3];
            u[axis] = 1.0;
            u
        })
        .find(|&u| cross(kf, u) != [0.0; 3])
        .expect("nonzero wavevector is not parallel to every axis");
    let e1 = normalize(cross(kf, u));
    let e2 = cross(normalize(kf), e1);
    [e1, e2]
}

fn negate(k: [i32; 3]) -> [i32; 3] {
    [-k[0], -k[1], -k[2]]
}

fn add(a: [i32; 3], b: [i32; 3]) -> [i32; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// `∫ s_p s_q s_r dx` for `s = √2 cos` or `√2 sin` of `2π k·x`.
///
/// Expanding each factor into exponentials, only sign patterns with
/// `σ₁k₁ + σ₂k₂ + σ₃k₃ = 0` survive. A cosine contributes `1/2`, a sine
/// `σ/(2i)`; an odd number of sines integrates to zero.
fn trig_triple_integral(modes: [&TorusMode; 3]) -> f64 {
    let sines: Vec<usize> = (0..3).filter(|&l| modes[l].phase == Phase::Sin).collect();
    if sines.len() % 2 == 1 {
        return 0.0;
    }
    let mut total = 0.0;
    for pattern in 0..8u8 {
        let sigma = [0, 1, 2].map(|l| if pattern >> l & 1 == 1 { -1i32 } else { 1 });
        let sum = (0..3).fold([0i32; 3], |acc, l| add(acc, modes[l].k.map(|c| sigma[l] * c)));
        if sum != [0; 3] {
            continue;
        }
        total += match sines.as_slice() {
            [] => 1.0,
            [a, b] => -(sigma[*a] * sigma[*b]) as f64,
            _ => unreachable!(),
        };
    }
    // (√2)³ · (1/2)³
    total * std::f64::consts::SQRT_2 / 4.0
}

/// Builds the truncated torus algebra with the default dimension cap.
pub fn build_torus_algebra(cutoff: usize) -> Result<(FluidAlgebra, TorusBasis), InstanceError> {
    build_torus_algebra_with_cap(cutoff, DEFAULT_TORUS_DIM_CAP)
}

pub fn build_torus_algebra_with_cap(cutoff: usize, cap: usize) -> Result<(FluidAlgebra, TorusBasis), InstanceError> {
    if cutoff == 0 {
        return Err(InstanceError::Invalid("torus cutoff K must be at least 1".into()));
    }
    let side = 2 * cutoff + 1;
    let dim = 4 * ((side * side * side - 1) / 2);
    if dim > cap {
        return Err(InstanceError::TooLarge { cutoff, dim, cap });
    }
    let basis = TorusBasis::new(cutoff);
    debug_assert_eq!(basis.dim(), dim);

    let mut linking = DMatrix::zeros(dim, dim);
    for (w, &k) in basis.wavevectors.iter().enumerate() {
        let kappa = std::f64::consts::TAU * (norm2(k) as f64).sqrt();
        // curl(c e₁) = −κ s e₂, curl(c e₂) = κ s e₁, curl(s e₁) = κ c e₂, curl(s e₂) = −κ c e₁
        let c1 = basis.mode_index(w, 1, Phase::Cos);
        let s1 = basis.mode_index(w, 1, Phase::Sin);
        let c2 = basis.mode_index(w, 2, Phase::Cos);
        let s2 = basis.mode_index(w, 2, Phase::Sin);
        for (p, q, v) in [(c1, s2, -kappa), (s2, c1, -kappa), (c2, s1, kappa), (s1, c2, kappa)] {
            linking[(p, q)] = v;
        }
    }

    let index: HashMap<[i32; 3], usize> = basis.wavevectors.iter().enumerate().map(|(w, &k)| (k, w)).collect();
    let canonical = |k: [i32; 3]| if is_positive(k) { Some(k) } else if k == [0; 3] { None } else { Some(negate(k)) };

    // wavevector triples (a ≤ b ≤ c) admitting σ₁k_a + σ₂k_b + σ₃k_c = 0
    let mut interacting = BTreeSet::new();
    for (a, &ka) in basis.wavevectors.iter().enumerate() {
        for (b, &kb) in basis.wavevectors.iter().enumerate().skip(a) {
            for kc in [add(ka, kb), add(ka, negate(kb))] {
                if let Some(&c) = canonical(kc).and_then(|kc| index.get(&kc)) {
                    let mut t = [a, b, c];
                    t.sort_unstable();
                    interacting.insert(t);
                }
            }
        }
    }

    let mut entries = BTreeMap::new();
    for [a, b, c] in interacting {
        for p in 4 * a..4 * a + 4 {
            for q in 4 * b..4 * b + 4 {
                for r in 4 * c..4 * c + 4 {
                    if p >= q || q >= r {
                        continue;
                    }
                    let integral = trig_triple_integral([&basis.modes[p], &basis.modes[q], &basis.modes[r]]);
                    if integral == 0.0 {
                        continue;
                    }
                    let value = integral
                        * det3(basis.polarization_vector(p), basis.polarization_vector(q), basis.polarization_vector(r));
                    if value.abs() > ENTRY_FLOOR {
                        entries.insert((p, q, r), value);
                    }
                }
            }
        }
    }
    let entries = entries.into_iter().map(|((i, j, k), v)| TripleEntry::new(i, j, k, v)).collect();
    let triple = TripleTensor::from_canonical(dim, entries)?;
    let alg = FluidAlgebra::new(triple, linking, DMatrix::identity(dim, dim))?;
    Ok((alg, basis))
}
