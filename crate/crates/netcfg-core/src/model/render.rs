//! Canonical rendering of a parsed configuration.
//!
//! `canonical_text` is the inverse of the parser on well-formed input: the
//! rendered text re-parses to the same AST (after canonical stanza ordering).
//! Address matchers are rendered in their explicit prefix/wildcard form, so
//! sugar like `host 10.0.3.5` or `any` comes back as `10.0.3.5 0.0.0.0` and
//! `0.0.0.0 255.255.255.255`.

use std::fmt::Write;

use super::ast::{
    AclEntry, AclStanza, AddrMatch, AdminState, DeviceConfigAst, InterfaceStanza, OspfStanza,
    Stanza, TunnelStanza,
};

/// Render a device configuration in canonical form: a `hostname` line
/// followed by stanzas in canonical order, sub-commands indented one space.
pub fn canonical_text(ast: &DeviceConfigAst) -> String {
    let canon = ast.canonicalized();
    let mut out = String::new();
    let _ = writeln!(out, "hostname {}", canon.device);
    for stanza in &canon.stanzas {
        match stanza {
            Stanza::Acl(a) => render_acl(&mut out, a),
            Stanza::Interface(i) => render_interface(&mut out, i),
            Stanza::Ospf(o) => render_ospf(&mut out, o),
            Stanza::Tunnel(t) => render_tunnel(&mut out, t),
        }
    }
    out
}

fn render_addr(m: &AddrMatch) -> String {
    format!("{} {}", m.prefix, m.wildcard)
}

fn render_acl(out: &mut String, acl: &AclStanza) {
    for entry in &acl.entries {
        render_acl_entry(out, acl, entry);
    }
}

fn render_acl_entry(out: &mut String, acl: &AclStanza, entry: &AclEntry) {
    let mut line = format!("access-list {} {}", acl.acl_id, entry.action);
    if acl.is_extended() {
        let _ = write!(line, " {} {}", entry.protocol, render_addr(&entry.src));
        if let Some(dst) = &entry.dst {
            let _ = write!(line, " {}", render_addr(dst));
        }
        if let Some(port) = entry.dst_port {
            let _ = write!(line, " eq {port}");
        }
    } else {
        let _ = write!(line, " {}", render_addr(&entry.src));
    }
    let _ = writeln!(out, "{line}");
}

fn render_interface(out: &mut String, i: &InterfaceStanza) {
    let _ = writeln!(out, "interface {}", i.name);
    if let Some(d) = &i.description {
        let _ = writeln!(out, " description {d}");
    }
    if let (Some(ip), Some(mask)) = (i.ip_address, i.mask) {
        let _ = writeln!(out, " ip address {ip} {mask}");
    }
    for b in &i.acl_bindings {
        let _ = writeln!(out, " ip access-group {} {}", b.acl_id, b.direction);
    }
    render_admin(out, i.admin_state);
}

/// An explicitly configured state renders as its line; an unmentioned state
/// stays unmentioned, so rendering cannot invent a `no shutdown`.
fn render_admin(out: &mut String, state: Option<AdminState>) {
    match state {
        Some(AdminState::Up) => {
            let _ = writeln!(out, " no shutdown");
        }
        Some(AdminState::Down) => {
            let _ = writeln!(out, " shutdown");
        }
        None => {}
    }
}

fn render_ospf(out: &mut String, o: &OspfStanza) {
    let _ = writeln!(out, "router ospf {}", o.process_id);
    for n in &o.networks {
        let _ = writeln!(out, " network {} {} area {}", n.prefix, n.wildcard, n.area);
    }
}

fn render_tunnel(out: &mut String, t: &TunnelStanza) {
    let _ = writeln!(out, "interface {}", t.tunnel_if);
    if let (Some(ip), Some(mask)) = (t.tunnel_ip, t.tunnel_mask) {
        let _ = writeln!(out, " ip address {ip} {mask}");
    }
    if let Some(src) = &t.source_if {
        let _ = writeln!(out, " tunnel source {src}");
    }
    if let Some(dst) = t.destination_ip {
        let _ = writeln!(out, " tunnel destination {dst}");
    }
    let _ = writeln!(out, " tunnel mode gre ip");
    render_admin(out, t.admin_state);
}
