//! Typed representation of the supported configuration subset.
//!
//! A device configuration is a flat list of stanzas: interfaces, GRE tunnel
//! interfaces, numbered access lists, and OSPF processes. The AST keeps the
//! order of entries *inside* a stanza (ACL entries and OSPF network
//! statements match first to last), while the order of the stanzas
//! themselves carries no meaning and is normalised by
//! [`DeviceConfigAst::canonicalized`].

use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Administrative state of an interface. Parsed configurations default to
/// `Up`, matching a device that has never been told to `shutdown`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdminState {
    #[default]
    Up,
    Down,
}

impl fmt::Display for AdminState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdminState::Up => write!(f, "up"),
            AdminState::Down => write!(f, "down"),
        }
    }
}

impl FromStr for AdminState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "up" => Ok(AdminState::Up),
            "down" => Ok(AdminState::Down),
            other => Err(format!("unknown admin state '{other}'")),
        }
    }
}

/// Verdict of an access-list entry, and of the simulator built on top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AclAction {
    Permit,
    Deny,
}

impl fmt::Display for AclAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AclAction::Permit => write!(f, "permit"),
            AclAction::Deny => write!(f, "deny"),
        }
    }
}

impl FromStr for AclAction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "permit" => Ok(AclAction::Permit),
            "deny" => Ok(AclAction::Deny),
            other => Err(format!("unknown action '{other}'")),
        }
    }
}

/// Protocol field of an extended access-list entry. `Ip` matches any
/// protocol; only `Tcp` and `Udp` may carry a destination port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Ip,
    Tcp,
    Udp,
    Icmp,
}

impl Protocol {
    /// Whether entries for this protocol may specify a destination port.
    pub fn is_port_capable(self) -> bool {
        matches!(self, Protocol::Tcp | Protocol::Udp)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Protocol::Ip => "ip",
            Protocol::Tcp => "tcp",
            Protocol::Udp => "udp",
            Protocol::Icmp => "icmp",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ip" => Ok(Protocol::Ip),
            "tcp" => Ok(Protocol::Tcp),
            "udp" => Ok(Protocol::Udp),
            "icmp" => Ok(Protocol::Icmp),
            other => Err(format!("unknown protocol '{other}'")),
        }
    }
}

/// Direction of an access-group binding on an interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::In => write!(f, "in"),
            Direction::Out => write!(f, "out"),
        }
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "in" => Ok(Direction::In),
            "out" => Ok(Direction::Out),
            other => Err(format!("unknown direction '{other}'")),
        }
    }
}

/// Address matcher in wildcard-mask form: a set bit in `wildcard` means
/// "don't care". `host A` desugars to wildcard `0.0.0.0`, `any` to prefix
/// `0.0.0.0` with wildcard `255.255.255.255`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddrMatch {
    pub prefix: Ipv4Addr,
    pub wildcard: Ipv4Addr,
}

impl AddrMatch {
    pub fn host(addr: Ipv4Addr) -> Self {
        Self { prefix: addr, wildcard: Ipv4Addr::new(0, 0, 0, 0) }
    }

    pub fn any() -> Self {
        Self { prefix: Ipv4Addr::new(0, 0, 0, 0), wildcard: Ipv4Addr::new(255, 255, 255, 255) }
    }

    /// Whether `addr` falls inside this matcher: every bit not masked out by
    /// the wildcard must equal the corresponding prefix bit.
    pub fn matches(&self, addr: Ipv4Addr) -> bool {
        let care = !u32::from(self.wildcard);
        (u32::from(addr) & care) == (u32::from(self.prefix) & care)
    }
}

/// One line of a numbered access list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AclEntry {
    pub action: AclAction,
    pub protocol: Protocol,
    pub src: AddrMatch,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dst: Option<AddrMatch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dst_port: Option<u16>,
}

/// A numbered access list: standard (1-99) or extended (100-199).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AclStanza {
    pub acl_id: u32,
    pub entries: Vec<AclEntry>,
}

impl AclStanza {
    pub fn is_extended(&self) -> bool {
        (100..=199).contains(&self.acl_id)
    }
}

/// An `ip access-group` binding attached to an interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AclBinding {
    pub acl_id: u32,
    pub direction: Direction,
}

/// A physical or logical (non-tunnel) interface.
///
/// Every field other than the name is optional: a stanza only records what
/// the configuration text actually said, so merging a candidate stanza onto
/// a running configuration can distinguish "set this" from "left alone".
/// An interface whose `admin_state` was never mentioned is operationally up
/// ([`InterfaceStanza::effective_state`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceStanza {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ip_address: Option<Ipv4Addr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Ipv4Addr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admin_state: Option<AdminState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub acl_bindings: Vec<AclBinding>,
}

impl InterfaceStanza {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ip_address: None,
            mask: None,
            admin_state: None,
            description: None,
            acl_bindings: Vec::new(),
        }
    }

    /// Operational state: explicitly configured, or `Up` when unmentioned.
    pub fn effective_state(&self) -> AdminState {
        self.admin_state.unwrap_or_default()
    }
}

/// Encapsulation of a tunnel interface. GRE is the only supported mode and
/// also the device default, so a tunnel block without a `tunnel mode` line
/// still ends up as `Gre`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TunnelMode {
    #[default]
    Gre,
}

impl fmt::Display for TunnelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TunnelMode::Gre => write!(f, "gre"),
        }
    }
}

/// A tunnel interface (`interface Tunnel<N>`). Fields are optional because a
/// parsed block may be incomplete; the verifier reports missing pieces as
/// tunnel asymmetry rather than the parser rejecting the block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TunnelStanza {
    pub tunnel_if: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_if: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub destination_ip: Option<Ipv4Addr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tunnel_ip: Option<Ipv4Addr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tunnel_mask: Option<Ipv4Addr>,
    #[serde(default)]
    pub mode: TunnelMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admin_state: Option<AdminState>,
}

impl TunnelStanza {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            tunnel_if: name.into(),
            source_if: None,
            destination_ip: None,
            tunnel_ip: None,
            tunnel_mask: None,
            mode: TunnelMode::Gre,
            admin_state: None,
        }
    }

    /// Operational state: explicitly configured, or `Up` when unmentioned.
    pub fn effective_state(&self) -> AdminState {
        self.admin_state.unwrap_or_default()
    }
}

/// One OSPF `network` statement. Statements are evaluated first to last when
/// deciding which area an interface address belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OspfNetwork {
    pub prefix: Ipv4Addr,
    pub wildcard: Ipv4Addr,
    pub area: u32,
}

impl OspfNetwork {
    pub fn covers(&self, addr: Ipv4Addr) -> bool {
        AddrMatch { prefix: self.prefix, wildcard: self.wildcard }.matches(addr)
    }
}

/// A `router ospf <process-id>` block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OspfStanza {
    pub process_id: u32,
    pub networks: Vec<OspfNetwork>,
}

/// A top-level configuration block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Stanza {
    Acl(AclStanza),
    Interface(InterfaceStanza),
    Ospf(OspfStanza),
    Tunnel(TunnelStanza),
}

impl Stanza {
    /// Sort key for canonical ordering: stanza kinds in lexical order
    /// (`acl`, `interface`, `ospf`, `tunnel`), then the stanza name.
    /// Numeric names are zero-padded so that e.g. ACL 2 sorts before 101.
    fn sort_key(&self) -> (u8, String) {
        match self {
            Stanza::Acl(a) => (0, format!("{:010}", a.acl_id)),
            Stanza::Interface(i) => (1, i.name.clone()),
            Stanza::Ospf(o) => (2, format!("{:010}", o.process_id)),
            Stanza::Tunnel(t) => (3, t.tunnel_if.clone()),
        }
    }
}

/// Parsed configuration of a single device.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceConfigAst {
    pub device: String,
    pub stanzas: Vec<Stanza>,
}

impl DeviceConfigAst {
    pub fn new(device: impl Into<String>) -> Self {
        Self { device: device.into(), stanzas: Vec::new() }
    }

    /// The same configuration with stanzas in canonical order. Entry order
    /// inside ACL and OSPF stanzas is semantic and left untouched.
    pub fn canonicalized(&self) -> Self {
        let mut out = self.clone();
        out.stanzas.sort_by_cached_key(|s| s.sort_key());
        out
    }

    pub fn interface(&self, name: &str) -> Option<&InterfaceStanza> {
        self.stanzas.iter().find_map(|s| match s {
            Stanza::Interface(i) if i.name == name => Some(i),
            _ => None,
        })
    }

    pub fn tunnel(&self, name: &str) -> Option<&TunnelStanza> {
        self.stanzas.iter().find_map(|s| match s {
            Stanza::Tunnel(t) if t.tunnel_if == name => Some(t),
            _ => None,
        })
    }

    pub fn acl(&self, acl_id: u32) -> Option<&AclStanza> {
        self.stanzas.iter().find_map(|s| match s {
            Stanza::Acl(a) if a.acl_id == acl_id => Some(a),
            _ => None,
        })
    }

    pub fn ospf(&self, process_id: u32) -> Option<&OspfStanza> {
        self.stanzas.iter().find_map(|s| match s {
            Stanza::Ospf(o) if o.process_id == process_id => Some(o),
            _ => None,
        })
    }

    pub fn ospf_stanzas(&self) -> impl Iterator<Item = &OspfStanza> {
        self.stanzas.iter().filter_map(|s| match s {
            Stanza::Ospf(o) => Some(o),
            _ => None,
        })
    }

    pub fn interfaces(&self) -> impl Iterator<Item = &InterfaceStanza> {
        self.stanzas.iter().filter_map(|s| match s {
            Stanza::Interface(i) => Some(i),
            _ => None,
        })
    }

    pub fn tunnels(&self) -> impl Iterator<Item = &TunnelStanza> {
        self.stanzas.iter().filter_map(|s| match s {
            Stanza::Tunnel(t) => Some(t),
            _ => None,
        })
    }

    /// Whether `name` names an interface or tunnel present in this config.
    pub fn has_interface(&self, name: &str) -> bool {
        self.interface(name).is_some() || self.tunnel(name).is_some()
    }

    /// IPv4 address assigned to a (regular or tunnel) interface, if any.
    pub fn interface_ip(&self, name: &str) -> Option<Ipv4Addr> {
        if let Some(i) = self.interface(name) {
            return i.ip_address;
        }
        self.tunnel(name).and_then(|t| t.tunnel_ip)
    }
}

/// Dotted-quad network mask to the all-ones-inverted wildcard form used by
/// access lists and OSPF network statements.
pub fn mask_to_wildcard(mask: Ipv4Addr) -> Ipv4Addr {
    Ipv4Addr::from(!u32::from(mask))
}

/// Prefix length (0-32) to a dotted-quad network mask.
pub fn prefix_len_to_mask(len: u8) -> Option<Ipv4Addr> {
    if len > 32 {
        return None;
    }
    let mask = if len == 0 { 0 } else { u32::MAX << (32 - u32::from(len)) };
    Some(Ipv4Addr::from(mask))
}
