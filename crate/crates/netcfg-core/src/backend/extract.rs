//! Extraction of structured answers from raw backend text.
//!
//! Models wrap answers in prose, so extraction is deliberately lenient about
//! the surroundings and strict about the payload: the first balanced JSON
//! object is taken as the low-level description, device sections are split
//! on `~~~` marker lines, and a classification answer is whatever the first
//! non-blank line says — anything unrecognisable lands in `Other`, which is
//! what makes invented classes terminal instead of contagious.

use thiserror::Error;

use crate::intent::{IntentClass, LowLevelDescription};
use crate::model::{ConfigBundle, DeviceSection};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractionError {
    #[error("the answer contains no JSON object")]
    NoJsonObject,
    #[error("the answer's JSON does not match the expected schema: {0}")]
    SchemaMismatch(String),
    #[error("the answer contains no device sections")]
    NoSections,
    #[error("malformed device section: {0}")]
    MalformedSection(String),
}

/// Classify from the first non-blank line of an answer. Total: unknown
/// tokens (including invented classes) map to `Other`.
pub fn extract_class(raw: &str) -> IntentClass {
    let Some(line) = raw.lines().find(|l| !l.trim().is_empty()) else {
        return IntentClass::Other;
    };
    let Some(token) = line.split_whitespace().next() else {
        return IntentClass::Other;
    };
    let token = token.trim_matches(|c: char| !c.is_ascii_alphanumeric());
    match token.to_ascii_uppercase().as_str() {
        "CP" => IntentClass::Cp,
        "RP" => IntentClass::Rp,
        "ACL" => IntentClass::Acl,
        "TN" => IntentClass::Tn,
        _ => IntentClass::Other,
    }
}

/// The first balanced top-level JSON object in `raw`, honouring strings and
/// escapes.
pub fn first_json_object(raw: &str) -> Option<&str> {
    let start = raw.find('{')?;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (offset, ch) in raw[start..].char_indices() {
        if in_string {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_string = false;
            }
            continue;
        }
        match ch {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&raw[start..start + offset + ch.len_utf8()]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Extract the low-level description from a translation answer and check it
/// declares the class the pipeline asked for.
pub fn extract_lld(raw: &str, class: IntentClass) -> Result<LowLevelDescription, ExtractionError> {
    let json = first_json_object(raw).ok_or(ExtractionError::NoJsonObject)?;
    let lld: LowLevelDescription =
        serde_json::from_str(json).map_err(|e| ExtractionError::SchemaMismatch(e.to_string()))?;
    if lld.class != class {
        return Err(ExtractionError::SchemaMismatch(format!(
            "declares class {}, expected {class}",
            lld.class
        )));
    }
    Ok(lld)
}

fn is_separator(line: &str) -> bool {
    line.trim() == "~~~"
}

fn valid_device_name(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= 64
        && name.chars().next().is_some_and(|c| c.is_ascii_alphanumeric())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '/'))
}

/// Split a generation answer into device sections. Sections are separated
/// by lines consisting of `~~~` (whitespace padding allowed); the first
/// non-blank line of each section names the device (one token, an optional
/// trailing colon is tolerated), the rest is its configuration.
pub fn split_config_bundle(raw: &str) -> Result<ConfigBundle, ExtractionError> {
    let mut sections = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut chunks: Vec<Vec<&str>> = Vec::new();
    for line in raw.lines() {
        if is_separator(line) {
            chunks.push(std::mem::take(&mut current));
        } else {
            current.push(line);
        }
    }
    chunks.push(current);

    for chunk in chunks {
        let mut lines = chunk.iter().skip_while(|l| l.trim().is_empty()).peekable();
        let Some(header) = lines.next() else {
            continue; // blank chunk, e.g. after a trailing separator
        };
        let header = header.trim();
        let device = header.strip_suffix(':').unwrap_or(header);
        if !valid_device_name(device) {
            return Err(ExtractionError::MalformedSection(format!(
                "'{header}' is not a device name"
            )));
        }
        let body: Vec<&str> = lines.map(|l| l.trim_end()).collect();
        let text = body.join("\n").trim_matches('\n').to_string();
        if text.trim().is_empty() {
            return Err(ExtractionError::MalformedSection(format!(
                "section for device {device} has no configuration"
            )));
        }
        sections.push(DeviceSection { device: device.to_string(), text });
    }

    if sections.is_empty() {
        return Err(ExtractionError::NoSections);
    }
    Ok(ConfigBundle::new(sections))
}
