use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::algebra::{validate, FluidAlgebra, Vector};
use crate::instances::{build_torus_algebra, random_algebra, random_state, rigid_body, so3, InstanceError, TorusBasis};
use crate::integrators::IntegratorSpec;
use crate::io::load_algebra;

/// Tolerance for the structural checks run on every instance before use.
pub const VALIDATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceConfig {
    RigidBody {
        #[serde(default = "default_moments")]
        moments: [f64; 3],
    },
    So3 {},
    Torus {
        #[serde(default = "default_cutoff")]
        cutoff: usize,
    },
    Random {
        seed: u64,
        n: usize,
    },
    Custom {
        path: PathBuf,
    },
}

fn default_moments() -> [f64; 3] {
    [1.0, 2.0, 3.0]
}

fn default_cutoff() -> usize {
    1
}

impl InstanceConfig {
    /// Algebras built from a Lie algebra, for which the Jacobi identity is
    /// an expected property rather than a measurement.
    pub fn is_lie(&self) -> bool {
        matches!(self, InstanceConfig::RigidBody { .. } | InstanceConfig::So3 {})
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateConfig {
    Coords(Vec<f64>),
    Preset(String),
    Seeded {
        seed: u64,
        #[serde(default = "default_norm")]
        norm: f64,
    },
}

fn default_norm() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    20
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self { samples: default_samples(), seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub instance: InstanceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<StateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<StateConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

/// Reads a config, applies `key=value` overrides and the seed override.
/// Relative custom-instance paths are resolved against the config's
/// directory.
pub fn load_config(path: &Path, overrides: &[String], seed_override: Option<&str>) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for item in overrides {
        apply_override(&mut value, item)?;
    }
    let mut config: RunConfig =
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(raw) = seed_override {
        let seed = raw
            .trim()
            .parse::<u64>()
            .map_err(|_| CliError::Config(format!("FLUIDALG_SEED_OVERRIDE must be an unsigned integer, got {raw:?}")))?;
        config.override_seeds(seed);
    }
    if let InstanceConfig::Custom { path: p } = &mut config.instance {
        if p.is_relative() {
            if let Some(dir) = path.parent() {
                *p = dir.join(&*p);
            }
        }
    }
    Ok(config)
}

/// Sets the dotted `key` of `root` to `value`, parsed as JSON when possible
/// and kept as a string otherwise. Missing objects along the path are
/// created; numeric segments index into arrays.
pub fn apply_override(root: &mut Value, item: &str) -> Result<(), CliError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {item:?} is not of the form key=value")))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Config(format!("override {item:?} has an empty key segment")));
    }
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    for seg in key.split('.') {
        node = match node {
            Value::Object(map) => map.entry(seg).or_insert(Value::Null),
            Value::Array(items) => {
                let len = items.len();
                seg.parse::<usize>()
                    .ok()
                    .and_then(|i| items.get_mut(i))
                    .ok_or_else(|| CliError::Config(format!("override {key}: index {seg} out of range for length {len}")))?
            }
            Value::Null => {
                *node = Value::Object(Default::default());
                let Value::Object(map) = node else { unreachable!() };
                map.entry(seg).or_insert(Value::Null)
            }
            _ => return Err(CliError::Config(format!("override {key}: {seg:?} is inside a scalar"))),
        };
    }
    *node = parsed;
    Ok(())
}

impl RunConfig {
    pub fn override_seeds(&mut self, seed: u64) {
        if let InstanceConfig::Random { seed: s, .. } = &mut self.instance {
            *s = seed;
        }
        for state in [&mut self.initial_state, &mut self.probe].into_iter().flatten() {
            if let StateConfig::Seeded { seed: s, .. } = state {
                *s = seed;
            }
        }
        self.diagnostics.seed = seed;
    }
}

/// An instance ready for use, with the torus basis kept for presets.
pub struct BuiltInstance {
    pub algebra: FluidAlgebra,
    pub torus: Option<TorusBasis>,
}

pub fn build_instance(config: &InstanceConfig) -> Result<BuiltInstance, CliError> {
    let instance_err = |e: InstanceError| match e {
        InstanceError::NotInvariant { .. } | InstanceError::Algebra(_) => CliError::Validation(e.to_string()),
        _ => CliError::Config(e.to_string()),
    };
    let (algebra, torus) = match config {
        InstanceConfig::RigidBody { moments } => (rigid_body(*moments).map_err(instance_err)?, None),
        InstanceConfig::So3 {} => (so3(), None),
        InstanceConfig::Torus { cutoff } => {
            let (alg, basis) = build_torus_algebra(*cutoff).map_err(instance_err)?;
            (alg, Some(basis))
        }
        InstanceConfig::Random { seed, n } => {
            if *n == 0 {
                return Err(CliError::Config("random instance needs n >= 1".into()));
            }
            (random_algebra(*seed, *n).map_err(instance_err)?, None)
        }
        InstanceConfig::Custom { path } => {
            let alg = load_algebra(path).map_err(|e| {
                if e.is_validation() {
                    CliError::Validation(format!("{}: {e}", path.display()))
                } else {
                    CliError::Config(format!("{}: {e}", path.display()))
                }
            })?;
            (alg, None)
        }
    };
    let report = validate(&algebra, VALIDATION_TOL);
    if !report.passed() {
        let failed: Vec<String> = report
            .failures()
            .map(|c| format!("{} (defect {:e}, threshold {:e})", c.name, c.defect, c.threshold))
            .collect();
        return Err(CliError::Validation(format!("algebra fails validation: {}", failed.join(", "))));
    }
    Ok(BuiltInstance { algebra, torus })
}

pub fn build_state(inst: &BuiltInstance, state: &StateConfig, what: &str) -> Result<Vector, CliError> {
    let n = inst.algebra.dim();
    let v = match state {
        StateConfig::Coords(c) => {
            if c.len() != n {
                return Err(CliError::Config(format!("{what} has {} coordinates, the algebra has dimension {n}", c.len())));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(CliError::Config(format!("{what} has non-finite coordinates")));
            }
            Vector::from_column_slice(c)
        }
        StateConfig::Preset(name) => match (name.as_str(), &inst.torus) {
            ("axis1" | "axis2" | "axis3", _) => {
                let axis = name[4..].parse::<usize>().unwrap() - 1;
                if axis >= n {
                    return Err(CliError::Config(format!("{what}: preset {name} needs dimension at least {}", axis + 1)));
                }
                let mut v = Vector::zeros(n);
                v[axis] = 1.0;
                v
            }
            ("beltrami", Some(basis)) => basis.beltrami_state(1.0),
            ("beltrami", None) => return Err(CliError::Config(format!("{what}: preset beltrami needs a torus instance"))),
            _ => return Err(CliError::Config(format!("{what}: unknown preset {name:?} (axis1, axis2, axis3, beltrami)"))),
        },
        StateConfig::Seeded { seed, norm } => {
            if !(norm.is_finite() && *norm >= 0.0) {
                return Err(CliError::Config(format!("{what}: norm must be finite and non-negative")));
            }
            random_state(&inst.algebra, *seed, *norm)
        }
    };
    Ok(v)
}
