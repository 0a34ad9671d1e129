//! Machine-readable verification reports.

use std::collections::BTreeMap;

use dilatrix::Certificate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(rename = "N")]
    pub degree: Option<usize>,
    #[serde(rename = "M")]
    pub grid: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub command: String,
    pub inputs_digest: String,
    pub residuals: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub pass: bool,
    pub parameters: Parameters,
    /// Quantities without a verdict: ranks, tail bounds, norms.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub info: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl ReportFile {
    pub fn new(command: &str, inputs_digest: String, parameters: Parameters) -> Self {
        Self {
            command: command.to_string(),
            inputs_digest,
            residuals: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            pass: true,
            parameters,
            info: BTreeMap::new(),
            error: None,
            details: None,
        }
    }

    /// Copies every residual and note; the verdict becomes the conjunction
    /// of the residual verdicts.
    pub fn absorb(&mut self, prefix: &str, cert: &Certificate) {
        for r in &cert.entries {
            let name = self.unique_name(format!("{prefix}{}", r.name));
            self.residuals.insert(name.clone(), r.value);
            self.tolerances.insert(name, r.tolerance);
            self.pass &= r.pass;
        }
        for (n, v) in &cert.info {
            self.info.insert(format!("{prefix}{n}"), *v);
        }
    }

    pub fn fail(&mut self, message: String) {
        self.pass = false;
        self.error = Some(message);
    }

    fn unique_name(&self, name: String) -> String {
        if !self.residuals.contains_key(&name) {
            return name;
        }
        (2..)
            .map(|k| format!("{name}#{k}"))
            .find(|n| !self.residuals.contains_key(n))
            .expect("unbounded range")
    }

    /// One line per residual, failures marked.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{}: {}\n",
            self.command,
            if self.pass { "PASS" } else { "FAIL" }
        );
        if let Some(e) = &self.error {
            out += &format!("  error: {e}\n");
        }
        for (name, value) in &self.residuals {
            let tol = self.tolerances[name];
            let mark = if value.is_finite() && *value <= tol { " " } else { "!" };
            out += &format!("{mark} {name:<32} {value:>12.3e}  (tol {tol:.1e})\n");
        }
        for (name, value) in &self.info {
            out += &format!("  {name:<32} {value:>12.6}\n");
        }
        out
    }
}

/// SHA-256 over length-prefixed canonical input blobs.
pub fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_separates_parts() {
        assert_ne!(digest(&[b"ab", b"c"]), digest(&[b"a", b"bc"]));
        assert_eq!(digest(&[b"x"]).len(), 64);
    }

    #[test]
    fn verdict_is_conjunction() {
        let mut cert = Certificate::new();
        cert.record("a", 1e-12, 1e-8);
        let mut r = ReportFile::new("check", String::new(), Parameters::default());
        r.absorb("", &cert);
        assert!(r.pass);
        cert.record("a", 1.0, 1e-8);
        r.absorb("", &cert);
        assert!(!r.pass);
        assert!(r.residuals.contains_key("a#2"));
    }
}
