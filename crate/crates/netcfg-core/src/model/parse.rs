//! Total parser for the supported configuration subset.
//!
//! The parser never fails: it always produces an AST for the lines it could
//! understand plus a list of [`SyntaxIssue`]s for the lines it could not.
//! Lines that are close to a known directive (edit distance ≤ 2, e.g.
//! `ip addres`) are reported as errors — they almost certainly carry intent —
//! while lines that resemble nothing in the subset (e.g. `banner motd ...`)
//! are downgraded to warnings and skipped.
//!
//! Block structure follows the configuration text rather than indentation:
//! a sub-command is recognised by its directive, so both indented and flat
//! configurations parse identically. `!`, `exit`, and `end` close the open
//! block.

use std::fmt;
use std::net::Ipv4Addr;

use super::ast::{
    AclAction, AclBinding, AclEntry, AclStanza, AddrMatch, AdminState, DeviceConfigAst, Direction,
    InterfaceStanza, OspfNetwork, OspfStanza, Protocol, Stanza, TunnelMode, TunnelStanza,
};

/// How severe a syntax finding is. Only `Error` issues make a bundle fail
/// syntax verification; warnings are informational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

/// A single parser finding, positioned at the 1-based line and column of the
/// directive it refers to.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SyntaxIssue {
    pub line: usize,
    pub column: usize,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for SyntaxIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {} col {}: {}: {}", self.line, self.column, self.severity, self.message)
    }
}

/// Result of parsing one device configuration.
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub ast: DeviceConfigAst,
    pub issues: Vec<SyntaxIssue>,
}

impl ParseOutcome {
    pub fn errors(&self) -> impl Iterator<Item = &SyntaxIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }
}

/// Every directive of the subset with the block context it belongs to.
/// Used both for dispatch and for near-miss detection on unknown lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Context {
    Top,
    Interface,
    Tunnel,
    Ospf,
}

const DIRECTIVES: &[(&str, &[Context])] = &[
    ("hostname", &[Context::Top]),
    ("interface", &[Context::Top]),
    ("access-list", &[Context::Top]),
    ("router ospf", &[Context::Top]),
    ("ip address", &[Context::Interface, Context::Tunnel]),
    ("ip access-group", &[Context::Interface]),
    ("shutdown", &[Context::Interface, Context::Tunnel]),
    ("no shutdown", &[Context::Interface, Context::Tunnel]),
    ("description", &[Context::Interface, Context::Tunnel]),
    ("tunnel source", &[Context::Tunnel]),
    ("tunnel destination", &[Context::Tunnel]),
    ("tunnel mode", &[Context::Tunnel]),
    ("network", &[Context::Ospf]),
];

/// The known directive closest to `head` (edit distance ≤ 2), if any.
/// Shared with the suggestion engine so "did you mean" hints match the
/// parser's own notion of closeness.
pub fn closest_directive(head: &str) -> Option<&'static str> {
    let head = head.to_ascii_lowercase();
    let mut best: Option<(usize, &'static str)> = None;
    for (dir, _) in DIRECTIVES {
        let d = levenshtein(&head, dir);
        if best.map_or(true, |(b, _)| d < b) {
            best = Some((d, dir));
        }
    }
    best.filter(|(d, _)| (1..=2).contains(d)).map(|(_, dir)| dir)
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            cur[j + 1] = (prev[j + 1] + 1).min(cur[j] + 1).min(prev[j] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Open block the parser is currently filling. Values index into the stanza
/// list of the AST under construction.
#[derive(Debug, Clone, Copy)]
enum Block {
    None,
    Interface(usize),
    Tunnel(usize),
    Ospf(usize),
}

impl Block {
    fn context(self) -> Context {
        match self {
            Block::None => Context::Top,
            Block::Interface(_) => Context::Interface,
            Block::Tunnel(_) => Context::Tunnel,
            Block::Ospf(_) => Context::Ospf,
        }
    }
}

struct Parser {
    ast: DeviceConfigAst,
    issues: Vec<SyntaxIssue>,
    block: Block,
    line_no: usize,
    column: usize,
}

/// Parse one device configuration. `device` is the section or inventory name
/// the text was attributed to; a differing `hostname` line inside the text is
/// reported as a warning and does not override it.
pub fn parse_config(device: &str, text: &str) -> ParseOutcome {
    let mut p = Parser {
        ast: DeviceConfigAst::new(device),
        issues: Vec::new(),
        block: Block::None,
        line_no: 0,
        column: 1,
    };
    for (idx, raw) in text.lines().enumerate() {
        p.line_no = idx + 1;
        let trimmed = raw.trim_end();
        let content = trimmed.trim_start();
        p.column = trimmed.len() - content.len() + 1;
        if content.is_empty() || content.starts_with('!') {
            p.block = Block::None;
            continue;
        }
        if content == "exit" || content == "end" {
            p.block = Block::None;
            continue;
        }
        p.line(content);
    }
    ParseOutcome { ast: p.ast, issues: p.issues }
}

impl Parser {
    fn error(&mut self, message: impl Into<String>) {
        self.issues.push(SyntaxIssue {
            line: self.line_no,
            column: self.column,
            severity: Severity::Error,
            message: message.into(),
        });
    }

    fn warning(&mut self, message: impl Into<String>) {
        self.issues.push(SyntaxIssue {
            line: self.line_no,
            column: self.column,
            severity: Severity::Warning,
            message: message.into(),
        });
    }

    fn line(&mut self, content: &str) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let head1 = tokens[0].to_ascii_lowercase();
        let head2 = tokens.get(1).map(|t| format!("{head1} {}", t.to_ascii_lowercase()));
        let head3 = tokens
            .get(2)
            .and_then(|t| head2.as_ref().map(|h2| format!("{h2} {}", t.to_ascii_lowercase())));

        // Sub-commands of the open block take precedence so that free text
        // (e.g. a description mentioning "interface") stays in the block.
        match self.block.context() {
            Context::Interface | Context::Tunnel => {
                match head2.as_deref() {
                    Some("ip address") => return self.ip_address(&tokens, content),
                    Some("no shutdown") => return self.admin(&tokens, AdminState::Up),
                    Some("ip access-group") if matches!(self.block, Block::Interface(_)) => {
                        return self.access_group(&tokens)
                    }
                    Some("tunnel source") if matches!(self.block, Block::Tunnel(_)) => {
                        return self.tunnel_source(&tokens)
                    }
                    Some("tunnel destination") if matches!(self.block, Block::Tunnel(_)) => {
                        return self.tunnel_destination(&tokens)
                    }
                    Some("tunnel mode") if matches!(self.block, Block::Tunnel(_)) => {
                        return self.tunnel_mode(&tokens)
                    }
                    _ => {}
                }
                match head1.as_str() {
                    "shutdown" => return self.admin(&tokens, AdminState::Down),
                    "description" => return self.description(content),
                    _ => {}
                }
            }
            Context::Ospf => {
                if head1 == "network" {
                    return self.ospf_network(&tokens);
                }
            }
            Context::Top => {}
        }

        // Top-level openers close whatever block is open.
        if head2.as_deref() == Some("router ospf") {
            return self.router_ospf(&tokens);
        }
        match head1.as_str() {
            "hostname" => return self.hostname(&tokens),
            "interface" => return self.interface(&tokens),
            "access-list" => return self.access_list(&tokens),
            _ => {}
        }

        self.unknown(&tokens, head1, head2, head3);
    }

    /// A line that matched no directive in context: either a directive that
    /// exists elsewhere in the grammar (structural error), a near-miss of a
    /// known directive (almost certainly a typo, error), or free text the
    /// subset does not model (warning, skipped).
    fn unknown(
        &mut self,
        tokens: &[&str],
        head1: String,
        head2: Option<String>,
        head3: Option<String>,
    ) {
        let heads = [Some(head1), head2, head3];
        for head in heads.iter().flatten() {
            if DIRECTIVES.iter().any(|(dir, _)| dir == head) {
                let msg = format!("directive '{head}' is not valid in this context");
                return self.error(msg);
            }
        }
        for head in heads.iter().flatten() {
            if let Some(best) = closest_directive(head) {
                // Only flag a typo when the token count matches the directive
                // it resembles, so e.g. `network` alone is not blamed on
                // `interface`.
                if best.split_whitespace().count() == head.split_whitespace().count() {
                    return self.error(format!("unknown directive '{head}'"));
                }
            }
        }
        let snippet = tokens.join(" ");
        self.warning(format!("unrecognized line '{snippet}' ignored"));
    }

    fn hostname(&mut self, tokens: &[&str]) {
        self.block = Block::None;
        match tokens {
            [_, name] => {
                if self.ast.device != *name {
                    let device = self.ast.device.clone();
                    self.warning(format!(
                        "hostname '{name}' differs from the device name '{device}' this section is attributed to"
                    ));
                }
            }
            _ => self.error("hostname requires exactly one name"),
        }
    }

    fn interface(&mut self, tokens: &[&str]) {
        self.block = Block::None;
        let name = match tokens {
            [_, name] => (*name).to_string(),
            _ => return self.error("interface requires exactly one name"),
        };
        if name.to_ascii_lowercase().starts_with("tunnel") {
            let idx = self.ast.stanzas.iter().position(
                |s| matches!(s, Stanza::Tunnel(t) if t.tunnel_if == name),
            );
            let idx = idx.unwrap_or_else(|| {
                self.ast.stanzas.push(Stanza::Tunnel(TunnelStanza::new(&name)));
                self.ast.stanzas.len() - 1
            });
            self.block = Block::Tunnel(idx);
        } else {
            let idx = self.ast.stanzas.iter().position(
                |s| matches!(s, Stanza::Interface(i) if i.name == name),
            );
            let idx = idx.unwrap_or_else(|| {
                self.ast.stanzas.push(Stanza::Interface(InterfaceStanza::new(&name)));
                self.ast.stanzas.len() - 1
            });
            self.block = Block::Interface(idx);
        }
    }

    fn current_interface(&mut self) -> Option<&mut InterfaceStanza> {
        match self.block {
            Block::Interface(idx) => match &mut self.ast.stanzas[idx] {
                Stanza::Interface(i) => Some(i),
                _ => None,
            },
            _ => None,
        }
    }

    fn current_tunnel(&mut self) -> Option<&mut TunnelStanza> {
        match self.block {
            Block::Tunnel(idx) => match &mut self.ast.stanzas[idx] {
                Stanza::Tunnel(t) => Some(t),
                _ => None,
            },
            _ => None,
        }
    }

    fn quad(&mut self, token: &str) -> Option<Ipv4Addr> {
        match token.parse::<Ipv4Addr>() {
            Ok(a) => Some(a),
            Err(_) => {
                self.error(format!("invalid IPv4 address '{token}'"));
                None
            }
        }
    }

    fn ip_address(&mut self, tokens: &[&str], _content: &str) {
        let (addr_tok, mask_tok) = match tokens {
            [_, _, a, m] => (*a, *m),
            _ => return self.error("ip address requires an address and a mask"),
        };
        let Some(addr) = self.quad(addr_tok) else { return };
        let Some(mask) = self.quad(mask_tok) else { return };
        if let Some(i) = self.current_interface() {
            i.ip_address = Some(addr);
            i.mask = Some(mask);
        } else if let Some(t) = self.current_tunnel() {
            t.tunnel_ip = Some(addr);
            t.tunnel_mask = Some(mask);
        }
    }

    fn admin(&mut self, tokens: &[&str], state: AdminState) {
        let expected = match state {
            AdminState::Down => 1,
            AdminState::Up => 2,
        };
        if tokens.len() != expected {
            let directive = if state == AdminState::Up { "no shutdown" } else { "shutdown" };
            return self.error(format!("unexpected token after '{directive}'"));
        }
        if let Some(i) = self.current_interface() {
            i.admin_state = Some(state);
        } else if let Some(t) = self.current_tunnel() {
            t.admin_state = Some(state);
        }
    }

    fn description(&mut self, content: &str) {
        let text = content["description".len()..].trim().to_string();
        if text.is_empty() {
            return self.error("description requires text");
        }
        if let Some(i) = self.current_interface() {
            i.description = Some(text);
        } else if let Some(t) = self.current_tunnel() {
            // Tunnel descriptions are accepted and dropped: the tunnel stanza
            // models connectivity fields only.
            let _ = t;
            self.warning("description on a tunnel interface is ignored");
        }
    }

    fn access_group(&mut self, tokens: &[&str]) {
        let (id_tok, dir_tok) = match tokens {
            [_, _, id, dir] => (*id, *dir),
            _ => return self.error("ip access-group requires an access list number and a direction"),
        };
        let Ok(acl_id) = id_tok.parse::<u32>() else {
            return self.error(format!("invalid access list number '{id_tok}'"));
        };
        let Ok(direction) = dir_tok.parse::<Direction>() else {
            return self.error(format!("invalid direction '{dir_tok}' (expected in or out)"));
        };
        if let Some(i) = self.current_interface() {
            i.acl_bindings.push(AclBinding { acl_id, direction });
        }
    }

    fn tunnel_source(&mut self, tokens: &[&str]) {
        let src = match tokens {
            [_, _, src] => (*src).to_string(),
            _ => return self.error("tunnel source requires an interface name"),
        };
        if src.parse::<Ipv4Addr>().is_ok() {
            return self.error("tunnel source must name an interface");
        }
        if let Some(t) = self.current_tunnel() {
            t.source_if = Some(src);
        }
    }

    fn tunnel_destination(&mut self, tokens: &[&str]) {
        let dst = match tokens {
            [_, _, dst] => *dst,
            _ => return self.error("tunnel destination requires an IPv4 address"),
        };
        let Some(addr) = self.quad(dst) else { return };
        if let Some(t) = self.current_tunnel() {
            t.destination_ip = Some(addr);
        }
    }

    fn tunnel_mode(&mut self, tokens: &[&str]) {
        let rest: Vec<String> = tokens[2..].iter().map(|t| t.to_ascii_lowercase()).collect();
        let mode = match rest.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["gre"] | ["gre", "ip"] => TunnelMode::Gre,
            _ => {
                let rest = rest.join(" ");
                return self.error(format!("unsupported tunnel mode '{rest}'"));
            }
        };
        if let Some(t) = self.current_tunnel() {
            t.mode = mode;
        }
    }

    fn router_ospf(&mut self, tokens: &[&str]) {
        self.block = Block::None;
        let pid_tok = match tokens {
            [_, _, pid] => *pid,
            _ => return self.error("router ospf requires a process id"),
        };
        let pid = match pid_tok.parse::<u32>() {
            Ok(p) if p >= 1 => p,
            _ => return self.error(format!("invalid ospf process id '{pid_tok}'")),
        };
        let idx = self.ast.stanzas.iter().position(
            |s| matches!(s, Stanza::Ospf(o) if o.process_id == pid),
        );
        let idx = idx.unwrap_or_else(|| {
            self.ast.stanzas.push(Stanza::Ospf(OspfStanza { process_id: pid, networks: Vec::new() }));
            self.ast.stanzas.len() - 1
        });
        self.block = Block::Ospf(idx);
    }

    fn ospf_network(&mut self, tokens: &[&str]) {
        let (p_tok, w_tok, kw, a_tok) = match tokens {
            [_, p, w, kw, a] => (*p, *w, *kw, *a),
            _ => return self.error("network requires a prefix, a wildcard, and an area"),
        };
        if !kw.eq_ignore_ascii_case("area") {
            return self.error(format!("expected 'area', found '{kw}'"));
        }
        let Some(prefix) = self.quad(p_tok) else { return };
        let Some(wildcard) = self.quad(w_tok) else { return };
        let area = match a_tok.parse::<u32>() {
            Ok(a) => a,
            Err(_) => return self.error(format!("invalid ospf area '{a_tok}'")),
        };
        if let Block::Ospf(idx) = self.block {
            if let Stanza::Ospf(o) = &mut self.ast.stanzas[idx] {
                o.networks.push(OspfNetwork { prefix, wildcard, area });
            }
        }
    }

    fn access_list(&mut self, tokens: &[&str]) {
        self.block = Block::None;
        let (id_tok, rest) = match tokens {
            [_, id, rest @ ..] if !rest.is_empty() => (*id, rest),
            _ => return self.error("access-list requires a number and an entry"),
        };
        let Ok(acl_id) = id_tok.parse::<u32>() else {
            return self.error(format!("invalid access list number '{id_tok}'"));
        };
        let extended = match acl_id {
            1..=99 => false,
            100..=199 => true,
            _ => {
                return self.error(format!("access list number '{acl_id}' out of range (1-199)"))
            }
        };
        let Ok(action) = rest[0].parse::<AclAction>() else {
            return self.error(format!("invalid access list action '{}'", rest[0]));
        };
        let entry = if extended {
            self.extended_entry(action, &rest[1..])
        } else {
            self.standard_entry(action, &rest[1..])
        };
        let Some(entry) = entry else { return };
        let idx = self.ast.stanzas.iter().position(
            |s| matches!(s, Stanza::Acl(a) if a.acl_id == acl_id),
        );
        let idx = idx.unwrap_or_else(|| {
            self.ast.stanzas.push(Stanza::Acl(AclStanza { acl_id, entries: Vec::new() }));
            self.ast.stanzas.len() - 1
        });
        if let Stanza::Acl(a) = &mut self.ast.stanzas[idx] {
            a.entries.push(entry);
        }
    }

    fn standard_entry(&mut self, action: AclAction, rest: &[&str]) -> Option<AclEntry> {
        let (src, consumed) = self.addr_spec(rest, false)?;
        if consumed < rest.len() {
            self.error(format!("unexpected token '{}' in standard access list entry", rest[consumed]));
            return None;
        }
        Some(AclEntry { action, protocol: Protocol::Ip, src, dst: None, dst_port: None })
    }

    fn extended_entry(&mut self, action: AclAction, rest: &[&str]) -> Option<AclEntry> {
        let Some(proto_tok) = rest.first() else {
            self.error("extended access list entry requires a protocol");
            return None;
        };
        let Ok(protocol) = proto_tok.parse::<Protocol>() else {
            self.error(format!("unknown protocol '{proto_tok}'"));
            return None;
        };
        let rest = &rest[1..];
        let (src, consumed) = self.addr_spec(rest, true)?;
        let mut rest = &rest[consumed..];
        let mut dst = None;
        if !rest.is_empty() && !rest[0].eq_ignore_ascii_case("eq") {
            let (d, consumed) = self.addr_spec(rest, true)?;
            dst = Some(d);
            rest = &rest[consumed..];
        }
        let mut dst_port = None;
        if !rest.is_empty() {
            if !rest[0].eq_ignore_ascii_case("eq") {
                self.error(format!("unexpected token '{}' in access list entry", rest[0]));
                return None;
            }
            if dst.is_none() {
                self.error("a destination is required before a port match");
                return None;
            }
            let Some(port_tok) = rest.get(1) else {
                self.error("eq requires a port number");
                return None;
            };
            let Ok(port) = port_tok.parse::<u16>() else {
                self.error(format!("invalid port '{port_tok}'"));
                return None;
            };
            if !protocol.is_port_capable() {
                self.error("a destination port requires protocol tcp or udp");
                return None;
            }
            dst_port = Some(port);
            rest = &rest[2..];
        }
        if !rest.is_empty() {
            self.error(format!("unexpected token '{}' in access list entry", rest[0]));
            return None;
        }
        Some(AclEntry { action, protocol, src, dst, dst_port })
    }

    /// Parse an address matcher (`any`, `host A`, or `A W`; a bare `A` is
    /// allowed in standard entries and means `host A`). Returns the matcher
    /// and the number of tokens consumed.
    fn addr_spec(&mut self, tokens: &[&str], require_wildcard: bool) -> Option<(AddrMatch, usize)> {
        let Some(first) = tokens.first() else {
            self.error("expected an address (any, host A, or A W)");
            return None;
        };
        if first.eq_ignore_ascii_case("any") {
            return Some((AddrMatch::any(), 1));
        }
        if first.eq_ignore_ascii_case("host") {
            let Some(addr_tok) = tokens.get(1) else {
                self.error("host requires an address");
                return None;
            };
            let addr = self.quad(addr_tok)?;
            return Some((AddrMatch::host(addr), 2));
        }
        if first.eq_ignore_ascii_case("eq") {
            self.error("a destination is required before a port match");
            return None;
        }
        let prefix = self.quad(first)?;
        match tokens.get(1) {
            Some(w) if w.parse::<Ipv4Addr>().is_ok() => {
                let wildcard = self.quad(w)?;
                Some((AddrMatch { prefix, wildcard }, 2))
            }
            _ if require_wildcard => {
                self.error(format!("address '{first}' requires a wildcard mask"));
                None
            }
            _ => Some((AddrMatch::host(prefix), 1)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ParseOutcome {
        parse_config("R1", text)
    }

    #[test]
    fn parses_interface_block() {
        let out = parse(
            "interface GigabitEthernet0/0\n description uplink to R2\n ip address 10.0.12.1 255.255.255.252\n no shutdown\n",
        );
        assert!(out.issues.is_empty(), "{:?}", out.issues);
        let i = out.ast.interface("GigabitEthernet0/0").unwrap();
        assert_eq!(i.ip_address, Some("10.0.12.1".parse().unwrap()));
        assert_eq!(i.mask, Some("255.255.255.252".parse().unwrap()));
        assert_eq!(i.admin_state, Some(AdminState::Up));
        assert_eq!(i.description.as_deref(), Some("uplink to R2"));
    }

    #[test]
    fn indentation_is_cosmetic() {
        let indented = parse("interface GigabitEthernet0/0\n shutdown\n");
        let flat = parse("interface GigabitEthernet0/0\nshutdown\n");
        assert_eq!(indented.ast, flat.ast);
        assert_eq!(
            flat.ast.interface("GigabitEthernet0/0").unwrap().admin_state,
            Some(AdminState::Down)
        );
    }

    #[test]
    fn reopened_interface_blocks_merge() {
        let out = parse(
            "interface GigabitEthernet0/0\n ip address 10.0.0.1 255.255.255.0\ninterface GigabitEthernet0/1\n shutdown\ninterface GigabitEthernet0/0\n description merged\n",
        );
        assert!(out.issues.is_empty());
        let i = out.ast.interface("GigabitEthernet0/0").unwrap();
        assert_eq!(i.ip_address, Some("10.0.0.1".parse().unwrap()));
        assert_eq!(i.description.as_deref(), Some("merged"));
        assert_eq!(out.ast.stanzas.len(), 2);
    }

    #[test]
    fn parses_extended_acl_forms() {
        let out = parse(
            "access-list 101 permit tcp 10.0.1.0 0.0.0.255 host 10.0.3.5 eq 22\naccess-list 101 deny ip any any\n",
        );
        assert!(out.issues.is_empty(), "{:?}", out.issues);
        let acl = out.ast.acl(101).unwrap();
        assert_eq!(acl.entries.len(), 2);
        assert_eq!(acl.entries[0].dst, Some(AddrMatch::host("10.0.3.5".parse().unwrap())));
        assert_eq!(acl.entries[0].dst_port, Some(22));
        assert_eq!(acl.entries[1].src, AddrMatch::any());
        assert_eq!(acl.entries[1].dst, Some(AddrMatch::any()));
    }

    #[test]
    fn parses_standard_acl_with_bare_address_as_host() {
        let out = parse("access-list 10 permit 10.0.1.7\naccess-list 10 deny 10.0.2.0 0.0.0.255\n");
        assert!(out.issues.is_empty());
        let acl = out.ast.acl(10).unwrap();
        assert_eq!(acl.entries[0].src, AddrMatch::host("10.0.1.7".parse().unwrap()));
        assert_eq!(acl.entries[0].protocol, Protocol::Ip);
        assert_eq!(acl.entries[1].src.wildcard, "0.0.0.255".parse::<Ipv4Addr>().unwrap());
    }

    #[test]
    fn parses_ospf_and_tunnel() {
        let out = parse(
            "router ospf 1\n network 10.0.12.0 0.0.0.3 area 0\ninterface Tunnel0\n ip address 172.16.0.1 255.255.255.252\n tunnel source GigabitEthernet0/2\n tunnel destination 10.0.13.2\n tunnel mode gre ip\n",
        );
        assert!(out.issues.is_empty(), "{:?}", out.issues);
        let ospf = out.ast.ospf(1).unwrap();
        assert_eq!(ospf.networks.len(), 1);
        assert_eq!(ospf.networks[0].area, 0);
        let t = out.ast.tunnel("Tunnel0").unwrap();
        assert_eq!(t.source_if.as_deref(), Some("GigabitEthernet0/2"));
        assert_eq!(t.destination_ip, Some("10.0.13.2".parse().unwrap()));
        assert_eq!(t.mode, TunnelMode::Gre);
    }

    #[test]
    fn misspelled_directive_is_an_error() {
        let out = parse("interface GigabitEthernet0/0\n ip addres 10.0.0.1 255.255.255.0\n");
        let errors: Vec<_> = out.errors().collect();
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].line, 2);
        assert_eq!(errors[0].message, "unknown directive 'ip addres'");
        assert!(out.ast.interface("GigabitEthernet0/0").unwrap().ip_address.is_none());
    }

    #[test]
    fn unrelated_line_is_a_warning() {
        let out = parse("banner motd welcome\n");
        assert_eq!(out.issues.len(), 1);
        assert_eq!(out.issues[0].severity, Severity::Warning);
        assert!(!out.has_errors());
    }

    #[test]
    fn directive_outside_its_context_is_an_error() {
        let out = parse("ip address 10.0.0.1 255.255.255.0\n");
        let errors: Vec<_> = out.errors().collect();
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].message, "directive 'ip address' is not valid in this context");
    }

    #[test]
    fn port_on_icmp_is_an_error() {
        let out = parse("access-list 102 permit icmp any any eq 22\n");
        assert!(out.has_errors());
        assert_eq!(
            out.errors().next().unwrap().message,
            "a destination port requires protocol tcp or udp"
        );
    }

    #[test]
    fn bad_quads_and_areas_are_errors() {
        let out = parse(
            "interface GigabitEthernet0/0\n ip address 10.0.0.300 255.255.255.0\nrouter ospf 1\n network 10.0.0.0 0.0.0.255 area x\n",
        );
        let msgs: Vec<&str> = out.errors().map(|i| i.message.as_str()).collect();
        assert_eq!(msgs, vec!["invalid IPv4 address '10.0.0.300'", "invalid ospf area 'x'"]);
    }

    #[test]
    fn closest_directive_finds_near_misses() {
        assert_eq!(closest_directive("ip addres"), Some("ip address"));
        assert_eq!(closest_directive("acces-list"), Some("access-list"));
        assert_eq!(closest_directive("shutdwon"), Some("shutdown"));
        assert_eq!(closest_directive("banner"), None);
        // Exact matches are not near misses.
        assert_eq!(closest_directive("ip address"), None);
    }

    #[test]
    fn exit_and_bang_close_blocks() {
        let out = parse("interface GigabitEthernet0/0\nexit\nshutdown\n");
        assert!(out.has_errors());
        assert_eq!(
            out.errors().next().unwrap().message,
            "directive 'shutdown' is not valid in this context"
        );
        assert_eq!(out.ast.interface("GigabitEthernet0/0").unwrap().admin_state, None);
    }

    #[test]
    fn address_removal_is_outside_the_subset() {
        let out = parse("interface GigabitEthernet0/0\n no ip address\n");
        assert_eq!(out.issues.len(), 1);
        assert_eq!(out.issues[0].severity, Severity::Warning);
        assert!(out.issues[0].message.contains("no ip address"));
    }
}
