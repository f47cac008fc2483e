//! First-match access-list simulation.
//!
//! The simulator answers "what would the device do with this packet": scan
//! the entries top to bottom, return the action of the first one that
//! matches, and fall through to the implicit deny-all at the end.

use std::net::Ipv4Addr;

use crate::model::{AclAction, AclEntry, Protocol};

/// A packet abstraction sufficient for access-list evaluation. The port is
/// meaningful only for tcp/udp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub protocol: Protocol,
    pub src_ip: Ipv4Addr,
    pub dst_ip: Ipv4Addr,
    pub dst_port: Option<u16>,
}

impl Packet {
    pub fn new(protocol: Protocol, src_ip: Ipv4Addr, dst_ip: Ipv4Addr, dst_port: Option<u16>) -> Self {
        debug_assert!(
            dst_port.is_none() || protocol.is_port_capable(),
            "only tcp/udp packets carry a port"
        );
        Self { protocol, src_ip, dst_ip, dst_port }
    }
}

fn entry_matches(entry: &AclEntry, packet: &Packet) -> bool {
    if entry.protocol != Protocol::Ip && entry.protocol != packet.protocol {
        return false;
    }
    if !entry.src.matches(packet.src_ip) {
        return false;
    }
    if let Some(dst) = &entry.dst {
        if !dst.matches(packet.dst_ip) {
            return false;
        }
    }
    if let Some(port) = entry.dst_port {
        if packet.dst_port != Some(port) {
            return false;
        }
    }
    true
}

/// Evaluate `packet` against `entries` with first-match-wins semantics and
/// the implicit trailing deny.
pub fn simulate_acl(entries: &[AclEntry], packet: &Packet) -> AclAction {
    entries
        .iter()
        .find(|e| entry_matches(e, packet))
        .map_or(AclAction::Deny, |e| e.action)
}
