//! The network model: devices with parsed baseline configurations, physical
//! links, and attached hosts, loaded from a topology description file.
//!
//! The model is the verifier's ground truth. Candidate configurations are
//! never applied in place; [`NetworkModel::apply_candidate`] returns a new
//! model so the baseline and the candidate can be compared side by side.

use std::collections::BTreeMap;
use std::net::Ipv4Addr;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use super::ast::{AclStanza, DeviceConfigAst, OspfStanza, Stanza};
use super::bundle::ConfigBundle;
use super::parse::{parse_config, SyntaxIssue};

/// A point-to-point link between two device interfaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub device_a: String,
    pub if_a: String,
    pub device_b: String,
    pub if_b: String,
}

impl Link {
    /// `"R1:GigabitEthernet0/0"` form of endpoint `a`.
    pub fn endpoint_a(&self) -> String {
        format!("{}:{}", self.device_a, self.if_a)
    }

    pub fn endpoint_b(&self) -> String {
        format!("{}:{}", self.device_b, self.if_b)
    }
}

/// A host attached to a device interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Host {
    pub name: String,
    pub device: String,
    pub iface: String,
    pub ip: Ipv4Addr,
}

/// Devices (with parsed configurations), links, and hosts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkModel {
    pub devices: BTreeMap<String, DeviceConfigAst>,
    pub links: Vec<Link>,
    pub hosts: Vec<Host>,
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("cannot read topology file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed topology document: {0}")]
    Format(#[from] serde_json::Error),
    #[error("duplicate device '{0}'")]
    DuplicateDevice(String),
    #[error("configuration of device '{device}' has syntax errors: {}",
            .issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Config { device: String, issues: Vec<SyntaxIssue> },
    #[error("malformed link endpoint '{0}' (expected device:interface)")]
    MalformedEndpoint(String),
    #[error("link endpoint '{0}' names an unknown device")]
    UnknownLinkDevice(String),
    #[error("link endpoint '{0}' names an interface missing from the device configuration")]
    UnknownLinkInterface(String),
    #[error("host '{name}' references unknown device '{device}'")]
    UnknownHostDevice { name: String, device: String },
    #[error("host '{name}' references unknown interface '{device}:{iface}'")]
    UnknownHostInterface { name: String, device: String, iface: String },
}

#[derive(Debug, Deserialize)]
struct RawTopology {
    devices: Vec<RawDevice>,
    #[serde(default)]
    links: Vec<RawLink>,
    #[serde(default)]
    hosts: Vec<RawHost>,
}

#[derive(Debug, Deserialize)]
struct RawDevice {
    name: String,
    configs: String,
}

#[derive(Debug, Deserialize)]
struct RawLink {
    a: String,
    b: String,
}

#[derive(Debug, Deserialize)]
struct RawHost {
    name: String,
    device: String,
    #[serde(rename = "if")]
    iface: String,
    ip: Ipv4Addr,
}

fn split_endpoint(ep: &str) -> Result<(String, String), TopologyError> {
    match ep.split_once(':') {
        Some((device, iface)) if !device.is_empty() && !iface.is_empty() => {
            Ok((device.to_string(), iface.to_string()))
        }
        _ => Err(TopologyError::MalformedEndpoint(ep.to_string())),
    }
}

impl NetworkModel {
    /// Build a model from the JSON topology document. Baseline
    /// configurations must parse without syntax errors, and every link and
    /// host endpoint must resolve to a configured interface.
    pub fn from_json(json: &str) -> Result<Self, TopologyError> {
        let raw: RawTopology = serde_json::from_str(json)?;
        let mut devices = BTreeMap::new();
        for dev in raw.devices {
            let outcome = parse_config(&dev.name, &dev.configs);
            if outcome.has_errors() {
                return Err(TopologyError::Config {
                    device: dev.name,
                    issues: outcome.errors().cloned().collect(),
                });
            }
            if devices.insert(dev.name.clone(), outcome.ast).is_some() {
                return Err(TopologyError::DuplicateDevice(dev.name));
            }
        }
        let mut links = Vec::new();
        for raw_link in raw.links {
            let (device_a, if_a) = split_endpoint(&raw_link.a)?;
            let (device_b, if_b) = split_endpoint(&raw_link.b)?;
            for (dev, iface, ep) in
                [(&device_a, &if_a, &raw_link.a), (&device_b, &if_b, &raw_link.b)]
            {
                let ast = devices
                    .get(dev)
                    .ok_or_else(|| TopologyError::UnknownLinkDevice(ep.clone()))?;
                if !ast.has_interface(iface) {
                    return Err(TopologyError::UnknownLinkInterface(ep.clone()));
                }
            }
            links.push(Link { device_a, if_a, device_b, if_b });
        }
        let mut hosts = Vec::new();
        for raw_host in raw.hosts {
            let ast = devices.get(&raw_host.device).ok_or_else(|| {
                TopologyError::UnknownHostDevice {
                    name: raw_host.name.clone(),
                    device: raw_host.device.clone(),
                }
            })?;
            if !ast.has_interface(&raw_host.iface) {
                return Err(TopologyError::UnknownHostInterface {
                    name: raw_host.name,
                    device: raw_host.device,
                    iface: raw_host.iface,
                });
            }
            hosts.push(Host {
                name: raw_host.name,
                device: raw_host.device,
                iface: raw_host.iface,
                ip: raw_host.ip,
            });
        }
        Ok(Self { devices, links, hosts })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, TopologyError> {
        let json = std::fs::read_to_string(path)?;
        Self::from_json(&json)
    }

    pub fn device(&self, name: &str) -> Option<&DeviceConfigAst> {
        self.devices.get(name)
    }

    pub fn device_names(&self) -> impl Iterator<Item = &str> {
        self.devices.keys().map(String::as_str)
    }

    /// Links that have `device` as one endpoint, with that endpoint first.
    pub fn links_of(&self, device: &str) -> Vec<(&Link, &str, &str)> {
        self.links
            .iter()
            .filter_map(|l| {
                if l.device_a == device {
                    Some((l, l.if_a.as_str(), l.device_b.as_str()))
                } else if l.device_b == device {
                    Some((l, l.if_b.as_str(), l.device_a.as_str()))
                } else {
                    None
                }
            })
            .collect()
    }

    /// The direct link between two devices, if one exists.
    pub fn link_between(&self, a: &str, b: &str) -> Option<&Link> {
        self.links.iter().find(|l| {
            (l.device_a == a && l.device_b == b) || (l.device_a == b && l.device_b == a)
        })
    }

    /// Apply a candidate bundle on top of this model, returning the merged
    /// model and leaving `self` untouched.
    ///
    /// Merge semantics follow the device: configuration lines overlay the
    /// running state rather than replacing it. Interface and tunnel fields
    /// the candidate mentions overwrite the existing value, unmentioned
    /// fields survive; access-group bindings and ACL entries append to their
    /// lists (exact duplicates are dropped with a warning); OSPF network
    /// statements are unioned into the same process.
    ///
    /// The caller is expected to have run syntax checks already; sections
    /// with syntax errors are rejected here as a safety net.
    pub fn apply_candidate(&self, bundle: &ConfigBundle) -> Result<ApplyOutcome, ApplyError> {
        let mut model = self.clone();
        let mut warnings = Vec::new();
        for section in &bundle.sections {
            let target = model
                .devices
                .get_mut(&section.device)
                .ok_or_else(|| ApplyError::UnknownDevice(section.device.clone()))?;
            let outcome = parse_config(&section.device, &section.text);
            if outcome.has_errors() {
                return Err(ApplyError::Syntax {
                    device: section.device.clone(),
                    issues: outcome.errors().cloned().collect(),
                });
            }
            for stanza in outcome.ast.stanzas {
                merge_stanza(target, stanza, &section.device, &mut warnings);
            }
        }
        Ok(ApplyOutcome { model, warnings })
    }
}

fn merge_stanza(
    target: &mut DeviceConfigAst,
    stanza: Stanza,
    device: &str,
    warnings: &mut Vec<String>,
) {
    match stanza {
        Stanza::Interface(new) => {
            let existing = target.stanzas.iter_mut().find_map(|s| match s {
                Stanza::Interface(i) if i.name == new.name => Some(i),
                _ => None,
            });
            match existing {
                Some(slot) => {
                    if new.ip_address.is_some() {
                        slot.ip_address = new.ip_address;
                        slot.mask = new.mask;
                    }
                    if new.admin_state.is_some() {
                        slot.admin_state = new.admin_state;
                    }
                    if new.description.is_some() {
                        slot.description = new.description;
                    }
                    for binding in new.acl_bindings {
                        if slot.acl_bindings.contains(&binding) {
                            warnings.push(format!(
                                "{device}: duplicate access-group {} {} on interface {} dropped",
                                binding.acl_id, binding.direction, new.name
                            ));
                        } else {
                            slot.acl_bindings.push(binding);
                        }
                    }
                }
                None => target.stanzas.push(Stanza::Interface(new)),
            }
        }
        Stanza::Tunnel(new) => {
            let existing = target.stanzas.iter_mut().find_map(|s| match s {
                Stanza::Tunnel(t) if t.tunnel_if == new.tunnel_if => Some(t),
                _ => None,
            });
            match existing {
                Some(slot) => {
                    if new.tunnel_ip.is_some() {
                        slot.tunnel_ip = new.tunnel_ip;
                        slot.tunnel_mask = new.tunnel_mask;
                    }
                    if new.source_if.is_some() {
                        slot.source_if = new.source_if;
                    }
                    if new.destination_ip.is_some() {
                        slot.destination_ip = new.destination_ip;
                    }
                    if new.admin_state.is_some() {
                        slot.admin_state = new.admin_state;
                    }
                    slot.mode = new.mode;
                }
                None => target.stanzas.push(Stanza::Tunnel(new)),
            }
        }
        Stanza::Acl(new) => {
            // Find-or-insert, then append entry by entry so duplicates inside
            // the candidate itself are caught too, not just reapplied ones.
            let idx = target
                .stanzas
                .iter()
                .position(|s| matches!(s, Stanza::Acl(a) if a.acl_id == new.acl_id))
                .unwrap_or_else(|| {
                    target
                        .stanzas
                        .push(Stanza::Acl(AclStanza { acl_id: new.acl_id, entries: Vec::new() }));
                    target.stanzas.len() - 1
                });
            if let Stanza::Acl(slot) = &mut target.stanzas[idx] {
                for entry in new.entries {
                    if slot.entries.contains(&entry) {
                        warnings.push(format!(
                            "{device}: duplicate entry in access-list {} dropped",
                            new.acl_id
                        ));
                    } else {
                        slot.entries.push(entry);
                    }
                }
            }
        }
        Stanza::Ospf(new) => {
            let idx = target
                .stanzas
                .iter()
                .position(|s| matches!(s, Stanza::Ospf(o) if o.process_id == new.process_id))
                .unwrap_or_else(|| {
                    target.stanzas.push(Stanza::Ospf(OspfStanza {
                        process_id: new.process_id,
                        networks: Vec::new(),
                    }));
                    target.stanzas.len() - 1
                });
            if let Stanza::Ospf(slot) = &mut target.stanzas[idx] {
                for network in new.networks {
                    if !slot.networks.contains(&network) {
                        slot.networks.push(network);
                    }
                }
            }
        }
    }
}

/// Result of applying a candidate bundle.
#[derive(Debug, Clone)]
pub struct ApplyOutcome {
    pub model: NetworkModel,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ApplyError {
    #[error("candidate addresses unknown device '{0}'")]
    UnknownDevice(String),
    #[error("candidate section for '{device}' has syntax errors")]
    Syntax { device: String, issues: Vec<SyntaxIssue> },
}
