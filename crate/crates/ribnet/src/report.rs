//! Aggregated machine-readable reports stamped with the tool version and
//! the dataset hash, so a stored report pins down exactly what was run.

use serde::Serialize;

use crate::curve::ValidationReport;
use crate::net::{ConjugacyReport, OrthogonalityReport};
use crate::omega::ResidueTable;
use crate::ribaucour::{ClosedFormReport, CubeReport, LemmaReport, RibaucourReport};

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool_version: String,
    pub dataset_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residues: Option<ResidueTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orthogonality: Option<OrthogonalityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conjugacy: Option<ConjugacyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_imag: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub ribaucour: Vec<RibaucourReport>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub lemmas: Vec<LemmaReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cube: Option<CubeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<ClosedFormReport>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(dataset_hash: String) -> Self {
        RunReport {
            tool_version: crate::VERSION.to_string(),
            dataset_hash,
            validation: None,
            residues: None,
            orthogonality: None,
            conjugacy: None,
            max_imag: None,
            ribaucour: vec![],
            lemmas: vec![],
            cube: None,
            closed_form: None,
            pass: true,
        }
    }

    /// Recomputes the overall verdict from every populated section.
    pub fn finalize(&mut self, realness_tol: f64) {
        let mut ok = true;
        if let Some(v) = &self.validation {
            ok &= v.is_admissible();
        }
        if let Some(o) = &self.orthogonality {
            ok &= o.pass;
        }
        if let Some(c) = &self.conjugacy {
            ok &= c.pass;
        }
        if let Some(m) = self.max_imag {
            ok &= m <= realness_tol;
        }
        ok &= self.ribaucour.iter().all(|r| r.stats.pass);
        ok &= self.lemmas.iter().all(|l| l.pass);
        if let Some(c) = &self.cube {
            ok &= c.pass;
        }
        if let Some(c) = &self.closed_form {
            ok &= c.pass;
        }
        self.pass = ok;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_passes_and_serializes() {
        let mut r = RunReport::new("abc".to_string());
        r.finalize(1e-10);
        assert!(r.pass);
        let json = r.to_json();
        assert!(json.contains("\"dataset_hash\": \"abc\""));
        assert!(!json.contains("orthogonality"));
    }

    #[test]
    fn realness_failure_flips_verdict() {
        let mut r = RunReport::new("abc".to_string());
        r.max_imag = Some(1e-3);
        r.finalize(1e-10);
        assert!(!r.pass);
    }
}
