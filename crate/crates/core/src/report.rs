//! Structured validation results shared by observables, channels and instruments.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Shape,
    NonHermitian,
    NotPsd,
    Incomplete,
    NotTracePreserving,
    NotCompletelyPositive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Size of the defect in the natural norm for `kind`.
    pub magnitude: f64,
    /// Zero-based outcome (or Kraus/branch) index when the defect is local.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn push(
        &mut self,
        kind: ViolationKind,
        magnitude: f64,
        index: Option<usize>,
        detail: impl Into<String>,
    ) {
        self.violations.push(Violation {
            kind,
            magnitude,
            index,
            detail: detail.into(),
        });
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} ({:.3e})", v.detail, v.magnitude)?;
        }
        Ok(())
    }
}
