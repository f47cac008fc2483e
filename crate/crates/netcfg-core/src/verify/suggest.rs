//! Deterministic suggestion strings for verification errors.
//!
//! Refine prompts quote these back to the backend. Each error code has one
//! template, parameterised only by fields of the error itself, so the same
//! report always produces the same suggestions.

use regex::Regex;

use crate::model::parse::closest_directive;

use super::report::{ErrorCode, VerificationError};

fn quoted_token(message: &str) -> Option<&str> {
    let start = message.find('\'')? + 1;
    let end = start + message[start..].find('\'')?;
    Some(&message[start..end])
}

fn location(error: &VerificationError) -> &str {
    error.location.as_deref().unwrap_or("the configuration")
}

fn syntax_suggestion(error: &VerificationError) -> String {
    if error.message.starts_with("unknown directive") {
        if let Some(best) = quoted_token(&error.message).and_then(closest_directive) {
            return format!(
                "replace the unknown directive with '{best}' in the {} section",
                error.device
            );
        }
    }
    format!("correct the configuration syntax for {} at {}: {}", error.device, location(error), error.message)
}

fn if_state_suggestion(error: &VerificationError) -> String {
    let iface = location(error).trim_start_matches("interface ").to_string();
    if error.message.contains("expected down") {
        format!("add 'shutdown' under 'interface {iface}' on {}", error.device)
    } else {
        format!("add 'no shutdown' under 'interface {iface}' on {}", error.device)
    }
}

fn ospf_coverage_suggestion(error: &VerificationError) -> String {
    let pattern = Regex::new(
        r"network (\S+ \S+ area \d+) is not advertised by ospf process (\d+)",
    )
    .expect("static pattern compiles");
    if let Some(caps) = pattern.captures(&error.message) {
        return format!(
            "add 'network {}' under 'router ospf {}' on {}",
            &caps[1], &caps[2], error.device
        );
    }
    format!("configure '{}' on {} and advertise the requested networks", location(error), error.device)
}

/// One suggestion per error, in error order.
pub fn suggest(errors: &[VerificationError]) -> Vec<String> {
    errors
        .iter()
        .map(|e| match e.code {
            ErrorCode::Syntax => syntax_suggestion(e),
            ErrorCode::UnknownDevice => format!(
                "remove the section for '{}': only devices from the inventory can be configured",
                e.device
            ),
            ErrorCode::IfStateMismatch => if_state_suggestion(e),
            ErrorCode::AclSemantics => format!(
                "adjust the entries of {} on {} so that {}; entries match first to last and an implicit deny ends the list",
                location(e), e.device, e.message
            ),
            ErrorCode::OspfCoverage => ospf_coverage_suggestion(e),
            ErrorCode::OspfAdjacency => format!(
                "advertise the subnet of {} in the same area on both routers",
                location(e)
            ),
            ErrorCode::TunnelAsymmetry => format!(
                "mirror the tunnel configuration on both endpoints ({} at {}: {})",
                e.device, location(e), e.message
            ),
            ErrorCode::GoalUnmet => format!(
                "update {} on {} to satisfy the intent: {}",
                location(e), e.device, e.message
            ),
        })
        .collect()
}
