//! JSON file format for custom algebras.
//!
//! ```json
//! {
//!   "dim": 3,
//!   "triple": [[0, 1, 2, 1.0]],
//!   "linking": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
//!   "metric": [[1, 0, 0], [0, 2, 0], [0, 0, 3]]
//! }
//! ```
//!
//! `triple` lists canonical entries `[i, j, k, value]` with `i < j < k`
//! (zero-based). Matrices are row-major, either as nested rows or as one
//! flat list of `n²` numbers. Files are written with keys in the order
//! above and nested rows.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, FluidAlgebra, TripleEntry, TripleTensor};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed algebra file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl LoadError {
    /// True when the file parsed but its content violates the algebra's
    /// structural rules (non-canonical or duplicate triple entries).
    pub fn is_validation(&self) -> bool {
        matches!(self, LoadError::Algebra(AlgebraError::NonCanonical { .. } | AlgebraError::Duplicate { .. }))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixRepr {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraFileIn {
    dim: usize,
    triple: Vec<(usize, usize, usize, f64)>,
    linking: MatrixRepr,
    metric: MatrixRepr,
}

#[derive(Serialize)]
struct AlgebraFileOut {
    dim: usize,
    triple: Vec<(usize, usize, usize, f64)>,
    linking: Vec<Vec<f64>>,
    metric: Vec<Vec<f64>>,
}

fn to_matrix(name: &str, n: usize, repr: MatrixRepr) -> Result<DMatrix<f64>, LoadError> {
    match repr {
        MatrixRepr::Flat(v) if v.len() == n * n => Ok(DMatrix::from_row_slice(n, n, &v)),
        MatrixRepr::Rows(rows) if rows.len() == n && rows.iter().all(|r| r.len() == n) => {
            Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
        }
        // an empty list parses as rows
        MatrixRepr::Rows(rows) if n == 0 && rows.is_empty() => Ok(DMatrix::zeros(0, 0)),
        _ => Err(LoadError::Shape(format!("{name} must be a row-major {n}x{n} matrix"))),
    }
}

pub fn algebra_from_json(text: &str) -> Result<FluidAlgebra, LoadError> {
    let file: AlgebraFileIn = serde_json::from_str(text)?;
    let n = file.dim;
    let entries = file.triple.into_iter().map(|(i, j, k, v)| TripleEntry::new(i, j, k, v)).collect();
    let triple = TripleTensor::from_canonical(n, entries)?;
    let linking = to_matrix("linking", n, file.linking)?;
    let metric = to_matrix("metric", n, file.metric)?;
    Ok(FluidAlgebra::new(triple, linking, metric)?)
}

pub fn load_algebra(path: &Path) -> Result<FluidAlgebra, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    algebra_from_json(&text)
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn algebra_to_json(alg: &FluidAlgebra) -> String {
    let out = AlgebraFileOut {
        dim: alg.dim(),
        triple: alg.triple_tensor().canonical_entries().into_iter().map(|e| (e.i, e.j, e.k, e.value)).collect(),
        linking: rows(alg.linking_matrix()),
        metric: rows(alg.metric_matrix()),
    };
    serde_json::to_string_pretty(&out).expect("algebra serializes") + "\n"
}

pub fn save_algebra(alg: &FluidAlgebra, path: &Path) -> std::io::Result<()> {
    fs::write(path, algebra_to_json(alg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{random_algebra, rigid_body};

    #[test]
    fn reads_documented_example() {
        let text = r#"{"dim": 3, "triple": [[0, 1, 2, 1.0]],
            "linking": [[1,0,0],[0,1,0],[0,0,1]], "metric": [1,0,0,0,2,0,0,0,3]}"#;
        let alg = algebra_from_json(text).unwrap();
        let rb = rigid_body([1.0, 2.0, 3.0]).unwrap();
        assert_eq!(alg.triple_tensor(), rb.triple_tensor());
        assert_eq!(alg.metric_matrix(), rb.metric_matrix());
    }

    #[test]
    fn rejects_non_canonical_entry_as_validation_error() {
        let text = r#"{"dim": 3, "triple": [[0, 0, 1, 1.0]], "linking": [1,0,0,0,1,0,0,0,1], "metric": [1,0,0,0,1,0,0,0,1]}"#;
        let err = algebra_from_json(text).unwrap_err();
        assert!(err.is_validation(), "{err}");
        let text = r#"{"dim": 3, "triple": [[1, 0, 2, 1.0]], "linking": [1,0,0,0,1,0,0,0,1], "metric": [1,0,0,0,1,0,0,0,1]}"#;
        assert!(algebra_from_json(text).unwrap_err().is_validation());
    }

    #[test]
    fn rejects_bad_shapes() {
        let text = r#"{"dim": 3, "triple": [], "linking": [1,0,0,1], "metric": [1,0,0,0,1,0,0,0,1]}"#;
        let err = algebra_from_json(text).unwrap_err();
        assert!(matches!(err, LoadError::Shape(_)));
        assert!(!err.is_validation());
        assert!(matches!(algebra_from_json("{"), Err(LoadError::Parse(_))));
    }

    #[test]
    fn writer_key_order_and_round_trip() {
        let alg = random_algebra(3, 5).unwrap();
        let text = algebra_to_json(&alg);
        let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("dim") < pos("triple") && pos("triple") < pos("linking") && pos("linking") < pos("metric"));
        let back = algebra_from_json(&text).unwrap();
        assert_eq!(back.triple_tensor(), alg.triple_tensor());
        assert_eq!(back.linking_matrix(), alg.linking_matrix());
        assert_eq!(back.metric_matrix(), alg.metric_matrix());
    }
}
