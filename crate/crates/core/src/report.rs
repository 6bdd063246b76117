use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One named verification: a violation measure compared against a tolerance.
///
/// `passed` is always `value <= tolerance`; NaN values fail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    /// Statement being checked, in words.
    pub anchor: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_s: Option<f64>,
}

impl CheckReport {
    pub fn new(id: impl Into<String>, anchor: impl Into<String>, value: f64, tolerance: f64) -> Self {
        let anchor = anchor.into();
        debug_assert!(!anchor.is_empty());
        Self {
            id: id.into(),
            anchor,
            value,
            tolerance,
            passed: value <= tolerance,
            metrics: BTreeMap::new(),
            note: String::new(),
            runtime_s: None,
        }
    }

    /// A check that could not be evaluated.
    pub fn failed(id: impl Into<String>, anchor: impl Into<String>, note: impl Into<String>) -> Self {
        let mut r = Self::new(id, anchor, f64::NAN, 0.0);
        r.note = note.into();
        r
    }

    pub fn metric(mut self, key: impl Into<String>, value: f64) -> Self {
        self.metrics.insert(key.into(), value);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn timed(mut self, seconds: f64) -> Self {
        self.runtime_s = Some(seconds);
        self
    }

    /// Re-derive `passed` after the value or tolerance was edited.
    pub fn refresh(&mut self) {
        self.passed = self.value <= self.tolerance;
    }
}

pub fn all_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

/// Relative residual |a - b| / max(|a|, |b|, floor).
pub fn relative_residual(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_within_tolerance() {
        assert!(CheckReport::new("a", "x", 1e-7, 1e-6).passed);
        assert!(!CheckReport::new("a", "x", 2e-6, 1e-6).passed);
        assert!(!CheckReport::new("a", "x", f64::NAN, 1.0).passed);
        assert!(!CheckReport::failed("a", "x", "boom").passed);
    }

    #[test]
    fn json_roundtrip_omits_empty_fields() {
        let r = CheckReport::new("id", "anchor", 0.5, 1.0).metric("k", 2.0);
        let s = serde_json::to_string(&r).unwrap();
        assert!(!s.contains("runtime_s") && !s.contains("note"));
        let back: CheckReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
