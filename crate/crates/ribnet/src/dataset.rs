//! Dataset files: loading, the shipped example family, provenance hashes.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::curve::{CurveError, SpectralCurveData};

pub const DS_N2_L1: &str = include_str!("../datasets/ds-n2-l1.json");
pub const DS_N3_L2: &str = include_str!("../datasets/ds-n3-l2.json");
pub const DS_N1_L1: &str = include_str!("../datasets/ds-n1-l1.json");

/// Shipped example datasets by name.
pub fn builtin(name: &str) -> Option<SpectralCurveData> {
    let json = match name {
        "ds-n2-l1" => DS_N2_L1,
        "ds-n3-l2" => DS_N3_L2,
        "ds-n1-l1" => DS_N1_L1,
        _ => return None,
    };
    Some(SpectralCurveData::from_json_str(json).expect("shipped dataset must parse"))
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Loads a dataset from a file path, or a shipped dataset when the path
/// matches a builtin name.
pub fn load(path: &str) -> Result<SpectralCurveData, DatasetError> {
    if let Some(s) = builtin(path) {
        return Ok(s);
    }
    let text = std::fs::read_to_string(Path::new(path)).map_err(|e| DatasetError::Io {
        path: path.to_string(),
        source: e,
    })?;
    Ok(SpectralCurveData::from_json_str(&text)?)
}

/// SHA-256 of the canonical serialization, used to stamp reports.
pub fn data_hash(data: &SpectralCurveData) -> String {
    let mut h = Sha256::new();
    h.update(data.to_json_string().as_bytes());
    format!("{:x}", h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_parse_and_validate() {
        for name in ["ds-n2-l1", "ds-n3-l2", "ds-n1-l1"] {
            let s = builtin(name).unwrap();
            let rep = s.validate();
            assert!(rep.is_admissible(), "{name}: {:?}", rep.violations);
        }
    }

    #[test]
    fn hash_is_stable_and_input_sensitive() {
        let a = builtin("ds-n2-l1").unwrap();
        let mut b = a.clone();
        assert_eq!(data_hash(&a), data_hash(&b));
        b.d[0] = 2.0;
        assert_ne!(data_hash(&a), data_hash(&b));
    }

    #[test]
    fn load_unknown_path_errors() {
        assert!(load("/nonexistent/ds.json").is_err());
    }
}
