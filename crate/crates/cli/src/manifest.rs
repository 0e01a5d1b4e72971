use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::Shape;

/// Every resolved parameter of a `solve` run, plus its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub problem: String,
    pub rtol: f64,
    pub max_steps: usize,
    pub initial: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_file: Option<PathBuf>,
    pub cg_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cg_max_iterations: Option<usize>,
    pub mesh: MeshRecord,
    pub boundary: BoundaryRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<RunResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub converged: bool,
    pub steps: usize,
    pub lambda: f64,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest fields are all serializable")
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Absolute form of `path` so a manifest can be replayed from elsewhere.
pub fn absolute(path: &Path) -> PathBuf {
    std::fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunManifest {
        RunManifest {
            tool_version: "0.1.0".into(),
            problem: "robin".into(),
            rtol: 1e-10,
            max_steps: 500,
            initial: "constant-one".into(),
            init_file: None,
            cg_tolerance: 1e-12,
            cg_max_iterations: None,
            mesh: MeshRecord {
                path: None,
                shape: Some(Shape::Square),
                n: Some(8),
                r0: None,
            },
            boundary: BoundaryRecord {
                h: Some(0.1 + 0.2),
                ..BoundaryRecord::default()
            },
            result: Some(RunResult {
                converged: true,
                steps: 5,
                lambda: 3.423_860_770_617,
                wall_clock_seconds: 0.01,
            }),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let m = sample();
        let text = m.to_toml();
        assert!(text.contains("shape = \"square\""), "{text}");
        let back = RunManifest::from_toml(&text, Path::new("m.toml")).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.boundary.h.unwrap().to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn malformed_manifest_names_file() {
        let err = RunManifest::from_toml("rtol = \"x\"", Path::new("bad.toml")).unwrap_err();
        assert!(err.starts_with("bad.toml"), "{err}");
    }
}
