//! Verification reports: the machine-readable verdict on one candidate.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::intent::IntentClass;

/// Closed catalogue of verification error codes. Every failure a report can
/// carry is one of these; refine prompts and tests match on them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorCode {
    /// The candidate text does not parse.
    #[serde(rename = "SYNTAX")]
    Syntax,
    /// A section addresses a device that is not in the model.
    #[serde(rename = "UNKNOWN_DEVICE")]
    UnknownDevice,
    /// An interface ends up administratively up/down contrary to the intent.
    #[serde(rename = "IF_STATE_MISMATCH")]
    IfStateMismatch,
    /// The access list filters differently from what the intent asks.
    #[serde(rename = "ACL_SEMANTICS")]
    AclSemantics,
    /// A requested network statement is missing from the OSPF process.
    #[serde(rename = "OSPF_COVERAGE")]
    OspfCoverage,
    /// The two sides of a link disagree about OSPF participation or area.
    #[serde(rename = "OSPF_ADJACENCY")]
    OspfAdjacency,
    /// The two tunnel endpoints do not mirror each other.
    #[serde(rename = "TUNNEL_ASYMMETRY")]
    TunnelAsymmetry,
    /// The configuration parses and applies but does not realise the goal.
    #[serde(rename = "GOAL_UNMET")]
    GoalUnmet,
}

impl ErrorCode {
    pub fn name(self) -> &'static str {
        match self {
            ErrorCode::Syntax => "SYNTAX",
            ErrorCode::UnknownDevice => "UNKNOWN_DEVICE",
            ErrorCode::IfStateMismatch => "IF_STATE_MISMATCH",
            ErrorCode::AclSemantics => "ACL_SEMANTICS",
            ErrorCode::OspfCoverage => "OSPF_COVERAGE",
            ErrorCode::OspfAdjacency => "OSPF_ADJACENCY",
            ErrorCode::TunnelAsymmetry => "TUNNEL_ASYMMETRY",
            ErrorCode::GoalUnmet => "GOAL_UNMET",
        }
    }
}

impl std::fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// One verification failure, tied to a device and (where possible) a
/// location inside its configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationError {
    pub code: ErrorCode,
    pub device: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    pub message: String,
}

impl std::fmt::Display for VerificationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.code, self.device)?;
        if let Some(loc) = &self.location {
            write!(f, " {loc}")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Verdict on one candidate bundle. `passed` is true exactly when `errors`
/// is empty; the constructor enforces this, and suggestions are derived from
/// the errors one-to-one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub intent_id: String,
    pub class: IntentClass,
    pub errors: Vec<VerificationError>,
    pub suggestions: Vec<String>,
    pub checked_at: DateTime<Utc>,
}

impl VerificationReport {
    pub fn new(
        intent_id: impl Into<String>,
        class: IntentClass,
        errors: Vec<VerificationError>,
        checked_at: DateTime<Utc>,
    ) -> Self {
        let suggestions = super::suggest(&errors);
        Self {
            passed: errors.is_empty(),
            intent_id: intent_id.into(),
            class,
            errors,
            suggestions,
            checked_at,
        }
    }

    /// Error codes present in this report, deduplicated and sorted.
    pub fn codes(&self) -> Vec<ErrorCode> {
        let mut codes: Vec<ErrorCode> = self.errors.iter().map(|e| e.code).collect();
        codes.sort();
        codes.dedup();
        codes
    }
}
