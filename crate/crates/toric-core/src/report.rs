//! Structured results for functional evaluations and inequality checks.
//!
//! Reports are plain serde structs with a fixed field order and no
//! timestamps, so identical inputs produce byte-identical JSON.

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportInputs {
    /// Metric spec digest (JSON for declarative specs, a label otherwise).
    pub metric: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selector: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct QuadratureMeta {
    /// Human-readable description of the schemes involved.
    pub scheme: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
}

/// Result of a functional evaluation or inequality verification.
/// `margin` is always `bound - value` when a bound is present. For
/// functionals that are sums (vfun, berman-f) the breakdown entries add up
/// to `value`; inequality reports use the breakdown for named diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub functional: String,
    pub inputs: ReportInputs,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub breakdown: Vec<(String, f64)>,
    pub quadrature: QuadratureMeta,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub flags: Vec<String>,
    pub notes: Vec<String>,
}

impl FunctionalReport {
    pub fn new(functional: impl Into<String>, inputs: ReportInputs, value: f64) -> Self {
        Self {
            functional: functional.into(),
            inputs,
            value,
            bound: None,
            margin: None,
            breakdown: Vec::new(),
            quadrature: QuadratureMeta::default(),
            seed: None,
            flags: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self.margin = Some(bound - self.value);
        self
    }

    pub fn push_term(&mut self, name: impl Into<String>, value: f64) {
        self.breakdown.push((name.into(), value));
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
