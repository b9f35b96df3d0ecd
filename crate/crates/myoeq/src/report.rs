//! Machine-readable run reports: every certificate, residual, seed and
//! tolerance a run used, plus the full input source, so any certificate can
//! be recomputed from the report alone.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One checked quantity with its threshold.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Certificate {
    /// `value <= threshold` certificates (residuals, gaps, distances).
    pub fn upper(name: &str, value: f64, threshold: f64) -> Certificate {
        Certificate {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    /// `value >= threshold` certificates (margins).
    pub fn lower(name: &str, value: f64, threshold: f64) -> Certificate {
        Certificate {
            name: name.into(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    /// The input document text, verbatim, for self-contained recomputation.
    pub input_source: Option<String>,
    pub input_path: Option<String>,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub results: serde_json::Value,
    pub certificates: Vec<Certificate>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            schema: REPORT_SCHEMA_VERSION,
            command: command.into(),
            input_source: None,
            input_path: None,
            seed: None,
            tolerances: BTreeMap::new(),
            results: serde_json::Value::Null,
            certificates: Vec::new(),
        }
    }

    pub fn with_input(mut self, path: &str, source: &str) -> Report {
        self.input_path = Some(path.into());
        self.input_source = Some(source.into());
        self
    }

    pub fn tolerance(&mut self, name: &str, value: f64) -> &mut Self {
        self.tolerances.insert(name.into(), value);
        self
    }

    pub fn push(&mut self, c: Certificate) -> &mut Self {
        self.certificates.push(c);
        self
    }

    pub fn all_pass(&self) -> bool {
        self.certificates.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| crate::error::Error::Config(format!("report serialization failed: {e}")))
    }

    pub fn write_to(&self, path: &str) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Human-readable certificate lines.
    pub fn summary_lines(&self) -> Vec<String> {
        self.certificates
            .iter()
            .map(|c| {
                format!(
                    "{} {}: {:.6e} (threshold {:.1e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.threshold
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trip_and_flags() {
        let mut r = Report::new("solve");
        r.tolerance("residual", 1e-6);
        r.push(Certificate::upper("residual", 3e-9, 1e-6));
        r.push(Certificate::lower("margin", 0.2, 0.0));
        assert!(r.all_pass());
        r.push(Certificate::upper("gap", 1.0, 1e-6));
        assert!(!r.all_pass());
        let json = r.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["certificates"][2]["pass"], false);
        assert_eq!(r.summary_lines().len(), 3);
    }
}
