//! Pre-flight checks on landmark sets, domains and objectives.

use std::fmt;

use crate::lp::max_slack_point;
use crate::types::{dist_sq, ConvexDomain, LandmarkSet, Objective, ToleranceConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Finding {
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    DuplicateLandmarks {
        first: usize,
        second: usize,
    },
    EmptyDomain {
        slack: f64,
    },
    InvalidTolerance(String),
}

impl Finding {
    /// Every current finding stops the pipeline.
    pub fn is_fatal(&self) -> bool {
        true
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "{what} has dimension {found}, expected {expected}"),
            Finding::DuplicateLandmarks { first, second } => {
                write!(f, "duplicate landmark: {first} and {second} coincide")
            }
            Finding::EmptyDomain { slack } => {
                write!(f, "empty domain (best slack {slack:.3e})")
            }
            Finding::InvalidTolerance(msg) => write!(f, "invalid tolerance: {msg}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        !self.findings.iter().any(Finding::is_fatal)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.findings.is_empty() {
            return writeln!(f, "validation: OK");
        }
        for finding in &self.findings {
            let tag = if finding.is_fatal() { "fatal" } else { "warning" };
            writeln!(f, "{tag}: {finding}")?;
        }
        Ok(())
    }
}

pub fn validate(
    landmarks: &LandmarkSet,
    domain: &ConvexDomain,
    objective: &dyn Objective,
    tol: &ToleranceConfig,
) -> ValidationReport {
    let mut findings = Vec::new();
    if let Err(e) = tol.check() {
        findings.push(Finding::InvalidTolerance(e.to_string()));
    }
    let d = landmarks.dim();
    if domain.dim() != d {
        findings.push(Finding::DimensionMismatch {
            what: "domain",
            expected: d,
            found: domain.dim(),
        });
    }
    if objective.dim() != d {
        findings.push(Finding::DimensionMismatch {
            what: "objective",
            expected: d,
            found: objective.dim(),
        });
    }
    let thresh = tol.tol_dup * tol.tol_dup;
    for i in 0..landmarks.len() {
        for j in i + 1..landmarks.len() {
            if dist_sq(landmarks.get(i), landmarks.get(j)) <= thresh {
                findings.push(Finding::DuplicateLandmarks {
                    first: i,
                    second: j,
                });
            }
        }
    }
    match max_slack_point(&domain.to_system()) {
        Ok(r) => {
            let slack = r.value.unwrap_or(f64::NEG_INFINITY);
            if r.point.is_none() || slack < -tol.tol_feas {
                findings.push(Finding::EmptyDomain { slack });
            }
        }
        Err(_) => findings.push(Finding::EmptyDomain {
            slack: f64::NEG_INFINITY,
        }),
    }
    ValidationReport { findings }
}
