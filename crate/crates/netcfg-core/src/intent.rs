//! Intent records and their structured low-level descriptions.
//!
//! An [`Intent`] is one natural-language requirement. Classification maps it
//! to an [`IntentClass`]; translation turns it into a
//! [`LowLevelDescription`] — a JSON document with a per-class parameter
//! schema that the generation stage can render into device configurations
//! and the verifier can check goals against.

use std::fmt;
use std::io::BufRead;
use std::net::Ipv4Addr;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AclAction, AdminState, Direction, NetworkModel, Protocol, TunnelMode};

/// The requirement classes the pipeline understands, plus `Other` for
/// anything outside them. `Other` intents are rejected before translation;
/// the class also absorbs classifier answers that name no known class at
/// all, so invented categories cannot enter the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IntentClass {
    /// Interface configuration properties: addresses, state, descriptions.
    #[serde(rename = "CP")]
    Cp,
    /// Routing protocol configuration (OSPF).
    #[serde(rename = "RP")]
    Rp,
    /// Packet filtering with access control lists.
    #[serde(rename = "ACL")]
    Acl,
    /// GRE tunnels between devices.
    #[serde(rename = "TN")]
    Tn,
    /// Outside the supported scope; terminal.
    Other,
}

/// The classes an intent can be translated into, in presentation order.
pub const TRANSLATABLE_CLASSES: [IntentClass; 4] =
    [IntentClass::Cp, IntentClass::Rp, IntentClass::Acl, IntentClass::Tn];

impl IntentClass {
    pub fn is_translatable(self) -> bool {
        self != IntentClass::Other
    }

    pub fn name(self) -> &'static str {
        match self {
            IntentClass::Cp => "CP",
            IntentClass::Rp => "RP",
            IntentClass::Acl => "ACL",
            IntentClass::Tn => "TN",
            IntentClass::Other => "Other",
        }
    }

    /// One-line definition used in classification prompts.
    pub fn definition(self) -> &'static str {
        match self {
            IntentClass::Cp => "configuration of interface properties such as addresses, administrative state, and descriptions",
            IntentClass::Rp => "configuration of routing protocols such as OSPF",
            IntentClass::Acl => "configuration of access control lists that permit or deny traffic",
            IntentClass::Tn => "configuration of tunnels between devices",
            IntentClass::Other => "anything that does not fit the classes above",
        }
    }
}

impl fmt::Display for IntentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl FromStr for IntentClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "CP" => Ok(IntentClass::Cp),
            "RP" => Ok(IntentClass::Rp),
            "ACL" => Ok(IntentClass::Acl),
            "TN" => Ok(IntentClass::Tn),
            "OTHER" => Ok(IntentClass::Other),
            other => Err(format!("unknown intent class '{other}'")),
        }
    }
}

/// How many distinct goals an intent carries; used only to bucket metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Complexity {
    #[default]
    Simple,
    Complex,
}

impl Complexity {
    pub fn name(self) -> &'static str {
        match self {
            Complexity::Simple => "simple",
            Complexity::Complex => "complex",
        }
    }
}

fn is_default_complexity(c: &Complexity) -> bool {
    *c == Complexity::Simple
}

/// One natural-language requirement, optionally labelled with the class it
/// is expected to be filed under (used for accuracy metrics).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intent {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_class: Option<IntentClass>,
    #[serde(default, skip_serializing_if = "is_default_complexity")]
    pub complexity: Complexity,
}

#[derive(Debug, Error)]
pub enum IntentError {
    #[error("cannot read dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed intent record: {source}")]
    Format { line: usize, source: serde_json::Error },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

fn validate_intent(intent: &Intent) -> Result<(), String> {
    if intent.id.trim().is_empty() {
        return Err("intent id must not be empty".into());
    }
    if intent.text.trim().is_empty() {
        return Err("intent text must not be empty".into());
    }
    if intent.expected_class == Some(IntentClass::Other) {
        return Err("expected_class must be one of the translatable classes".into());
    }
    Ok(())
}

/// Parse one JSON intent record (one dataset line).
pub fn parse_intent_record(line: &str) -> Result<Intent, IntentError> {
    let intent: Intent =
        serde_json::from_str(line).map_err(|source| IntentError::Format { line: 1, source })?;
    validate_intent(&intent).map_err(|message| IntentError::Invalid { line: 1, message })?;
    Ok(intent)
}

/// Load a JSONL dataset: one intent per line, blank lines skipped.
/// Errors carry the 1-based line number of the offending record.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<Intent>, IntentError> {
    let file = std::fs::File::open(path)?;
    let mut intents = Vec::new();
    for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let intent: Intent = serde_json::from_str(&line)
            .map_err(|source| IntentError::Format { line: idx + 1, source })?;
        validate_intent(&intent)
            .map_err(|message| IntentError::Invalid { line: idx + 1, message })?;
        intents.push(intent);
    }
    Ok(intents)
}

/// Parameters for a CP (interface properties) intent. Only the fields the
/// intent actually pins are present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpParams {
    pub device: String,
    pub interface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ip_address: Option<Ipv4Addr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Ipv4Addr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admin_state: Option<AdminState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

/// Parameters for an ACL (packet filtering) intent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AclParams {
    pub device: String,
    pub acl_id: u32,
    pub action: AclAction,
    pub protocol: Protocol,
    pub src_prefix: Ipv4Addr,
    pub src_wildcard: Ipv4Addr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dst_prefix: Option<Ipv4Addr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dst_wildcard: Option<Ipv4Addr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dst_port: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apply_to_interface: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
}

/// One network to advertise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub prefix: Ipv4Addr,
    pub wildcard: Ipv4Addr,
}

/// Parameters for an RP (routing) intent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RpParams {
    pub device: String,
    pub ospf_process_id: u32,
    pub area: u32,
    pub networks: Vec<NetworkSpec>,
}

/// One side of a tunnel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TunnelEndpoint {
    pub device: String,
    pub tunnel_if: String,
    pub source_if: String,
    pub destination_ip: Ipv4Addr,
    pub tunnel_ip: Ipv4Addr,
    pub tunnel_mask: Ipv4Addr,
}

/// Parameters for a TN (tunnel) intent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TnParams {
    pub endpoint_a: TunnelEndpoint,
    pub endpoint_b: TunnelEndpoint,
    pub mode: TunnelMode,
}

/// Class-specific parameters of a low-level description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum LldParams {
    Cp(CpParams),
    Acl(AclParams),
    Rp(RpParams),
    Tn(TnParams),
}

impl LldParams {
    /// The class this parameter payload belongs to.
    pub fn class(&self) -> IntentClass {
        match self {
            LldParams::Cp(_) => IntentClass::Cp,
            LldParams::Acl(_) => IntentClass::Acl,
            LldParams::Rp(_) => IntentClass::Rp,
            LldParams::Tn(_) => IntentClass::Tn,
        }
    }
}

/// The structured form of an intent: the contract between translation,
/// generation, and verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LowLevelDescription {
    pub intent_id: String,
    pub class: IntentClass,
    /// Devices the configuration will touch.
    pub targets: Vec<String>,
    pub params: LldParams,
}

impl<'de> Deserialize<'de> for LowLevelDescription {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        use serde::de::Error;

        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            intent_id: String,
            class: IntentClass,
            targets: Vec<String>,
            params: serde_json::Value,
        }

        let raw = Raw::deserialize(deserializer)?;
        let params = match raw.class {
            IntentClass::Cp => LldParams::Cp(
                serde_json::from_value(raw.params).map_err(|e| Error::custom(format!("CP params: {e}")))?,
            ),
            IntentClass::Acl => LldParams::Acl(
                serde_json::from_value(raw.params).map_err(|e| Error::custom(format!("ACL params: {e}")))?,
            ),
            IntentClass::Rp => LldParams::Rp(
                serde_json::from_value(raw.params).map_err(|e| Error::custom(format!("RP params: {e}")))?,
            ),
            IntentClass::Tn => LldParams::Tn(
                serde_json::from_value(raw.params).map_err(|e| Error::custom(format!("TN params: {e}")))?,
            ),
            IntentClass::Other => {
                return Err(Error::custom("class 'Other' has no low-level description"))
            }
        };
        Ok(LowLevelDescription { intent_id: raw.intent_id, class: raw.class, targets: raw.targets, params })
    }
}

impl LowLevelDescription {
    /// Canonical JSON encoding: compact, keys lexically sorted.
    pub fn to_canonical_json(&self) -> String {
        crate::json::canonical(self)
    }
}

/// One reason a low-level description cannot be realised as written.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    /// Dotted path of the offending field, e.g. `params.dst_port`.
    pub field: String,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn issue(field: &str, message: impl Into<String>) -> ValidationIssue {
    ValidationIssue { field: field.into(), message: message.into() }
}

/// Check a low-level description against the model: referenced devices and
/// interfaces must exist, and the parameters must be internally coherent.
/// Returns an empty list when the description is realisable.
pub fn validate_lld(lld: &LowLevelDescription, model: &NetworkModel) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();

    if lld.intent_id.trim().is_empty() {
        issues.push(issue("intent_id", "intent id must not be empty"));
    }
    if lld.targets.is_empty() {
        issues.push(issue("targets", "at least one target device is required"));
    }
    for target in &lld.targets {
        if model.device(target).is_none() {
            issues.push(issue("targets", format!("unknown device {target}")));
        }
    }
    if lld.params.class() != lld.class {
        issues.push(issue(
            "params",
            format!("params do not match class {} ", lld.class).trim_end().to_string(),
        ));
        return issues;
    }

    let check_device = |issues: &mut Vec<ValidationIssue>, field: &str, device: &str| {
        if model.device(device).is_none() {
            issues.push(issue(field, format!("unknown device {device}")));
            return false;
        }
        if !lld.targets.iter().any(|t| t == device) {
            issues.push(issue(field, format!("device {device} is not listed in targets")));
        }
        true
    };

    match &lld.params {
        LldParams::Cp(p) => {
            if check_device(&mut issues, "params.device", &p.device) {
                let ast = model.device(&p.device).expect("checked above");
                if !ast.has_interface(&p.interface) {
                    issues.push(issue(
                        "params.interface",
                        format!("unknown interface {} on {}", p.interface, p.device),
                    ));
                }
            }
            if p.ip_address.is_some() != p.mask.is_some() {
                issues.push(issue("params.mask", "ip_address and mask must be set together"));
            }
            if p.ip_address.is_none() && p.admin_state.is_none() && p.description.is_none() {
                issues.push(issue("params", "at least one property to configure is required"));
            }
        }
        LldParams::Acl(p) => {
            if check_device(&mut issues, "params.device", &p.device) {
                if let Some(iface) = &p.apply_to_interface {
                    let ast = model.device(&p.device).expect("checked above");
                    if !ast.has_interface(iface) {
                        issues.push(issue(
                            "params.apply_to_interface",
                            format!("unknown interface {iface} on {}", p.device),
                        ));
                    }
                }
            }
            if !(1..=199).contains(&p.acl_id) {
                issues.push(issue("params.acl_id", "access list id out of range (1-199)"));
            } else if p.acl_id < 100
                && (p.protocol != Protocol::Ip || p.dst_prefix.is_some() || p.dst_port.is_some())
            {
                issues.push(issue(
                    "params.acl_id",
                    "protocol, destination, and port filters require an extended access list id (100-199)",
                ));
            }
            if p.dst_port.is_some() && !p.protocol.is_port_capable() {
                issues.push(issue("params.dst_port", "port requires tcp/udp"));
            }
            if p.dst_prefix.is_some() != p.dst_wildcard.is_some() {
                issues.push(issue(
                    "params.dst_wildcard",
                    "dst_prefix and dst_wildcard must be set together",
                ));
            }
            if p.direction.is_some() && p.apply_to_interface.is_none() {
                issues.push(issue(
                    "params.direction",
                    "direction requires apply_to_interface",
                ));
            }
        }
        LldParams::Rp(p) => {
            check_device(&mut issues, "params.device", &p.device);
            if p.ospf_process_id < 1 {
                issues.push(issue("params.ospf_process_id", "ospf process id must be at least 1"));
            }
            if p.networks.is_empty() {
                issues.push(issue("params.networks", "at least one network is required"));
            }
        }
        LldParams::Tn(p) => {
            for (field, ep) in [("params.endpoint_a", &p.endpoint_a), ("params.endpoint_b", &p.endpoint_b)] {
                if check_device(&mut issues, &format!("{field}.device"), &ep.device) {
                    let ast = model.device(&ep.device).expect("checked above");
                    if !ast.has_interface(&ep.source_if) {
                        issues.push(issue(
                            &format!("{field}.source_if"),
                            format!("unknown interface {} on {}", ep.source_if, ep.device),
                        ));
                    }
                }
            }
            if p.endpoint_a.device == p.endpoint_b.device {
                issues.push(issue(
                    "params.endpoint_b.device",
                    "tunnel endpoints must be on distinct devices",
                ));
            }
        }
    }

    issues
}
