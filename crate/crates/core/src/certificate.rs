//! Residual reports emitted by every verification routine.

use serde::{Deserialize, Serialize};

/// One named residual together with the tolerance it was judged against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// A collection of residual checks plus informational quantities
/// (truncation degree, tail bounds, ranks) that carry no pass/fail verdict.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub entries: Vec<Residual>,
    pub info: Vec<(String, f64)>,
}

impl Certificate {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `value <= tolerance` under `name` and returns the verdict.
    /// Non-finite values always fail.
    pub fn record(&mut self, name: impl Into<String>, value: f64, tolerance: f64) -> bool {
        let pass = value.is_finite() && value <= tolerance;
        self.entries.push(Residual {
            name: name.into(),
            value,
            tolerance,
            pass,
        });
        pass
    }

    pub fn note(&mut self, name: impl Into<String>, value: f64) {
        self.info.push((name.into(), value));
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|r| r.pass)
    }

    /// Verdict restricted to entries whose name starts with `prefix`.
    pub fn passed_with_prefix(&self, prefix: &str) -> bool {
        self.entries
            .iter()
            .filter(|r| r.name.starts_with(prefix))
            .all(|r| r.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Residual> {
        self.entries.iter().find(|r| r.name == name)
    }

    pub fn info_value(&self, name: &str) -> Option<f64> {
        self.info.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Residual> {
        self.entries.iter().filter(|r| !r.pass)
    }

    /// Largest residual among entries whose name starts with `prefix`,
    /// or 0 when there are none.
    pub fn max_with_prefix(&self, prefix: &str) -> f64 {
        self.entries
            .iter()
            .filter(|r| r.name.starts_with(prefix))
            .map(|r| r.value)
            .fold(0.0, f64::max)
    }

    /// Appends all entries of `other`, prefixing their names.
    pub fn absorb(&mut self, prefix: &str, other: &Certificate) {
        for r in &other.entries {
            self.entries.push(Residual {
                name: format!("{prefix}{}", r.name),
                ..r.clone()
            });
        }
        for (n, v) in &other.info {
            self.info.push((format!("{prefix}{n}"), *v));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_and_prefixes() {
        let mut c = Certificate::new();
        assert!(c.record("a.x", 1e-12, 1e-10));
        assert!(!c.record("b.y", 1e-3, 1e-10));
        assert!(!c.record("a.nan", f64::NAN, 1.0));
        assert!(!c.passed());
        assert!(c.passed_with_prefix("a.x"));
        assert!(!c.passed_with_prefix("a."));
        assert_eq!(c.failures().count(), 2);
        assert_eq!(c.max_with_prefix("b."), 1e-3);

        let mut outer = Certificate::new();
        outer.absorb("inner.", &c);
        assert!(outer.get("inner.b.y").is_some());
    }
}
