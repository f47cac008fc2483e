//! Deterministic rule-driven backend.
//!
//! [`RulesBackend`] answers the pipeline's prompts the way an obedient model
//! would — keyword classification, regular-expression slot filling for the
//! low-level description, and literal rendering of configuration sections —
//! but as a pure function of the prompt text, so runs are reproducible and
//! CI needs no model endpoint. A [`FaultPlan`] can sabotage selected answers
//! to exercise the recovery paths on purpose.
//!
//! The backend is strict: an intent phrasing its rules cannot parse is a
//! [`BackendError::RuleMiss`], never a guess.

use std::collections::HashMap;
use std::net::Ipv4Addr;
use std::sync::Mutex;

use regex::Regex;

use crate::intent::{
    AclParams, CpParams, IntentClass, LldParams, LowLevelDescription, NetworkSpec, RpParams,
    TnParams, TunnelEndpoint,
};
use crate::model::{
    mask_to_wildcard, prefix_len_to_mask, AclAction, AddrMatch, AdminState, Direction,
    NetworkStatusSnapshot, Protocol, TunnelMode,
};
use crate::prompt::{PromptBundle, PromptPurpose};

use super::extract::first_json_object;
use super::faults::{FaultKind, FaultPlan};
use super::{Backend, BackendError, DecodingParams};

/// Stage key for attempt counting. Generation and refinement produce the
/// same artefact, so they share a counter: the refine attempt for an intent
/// is attempt 2 of its configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Stage {
    Classify,
    Translate,
    Config,
}

/// The slot-filling patterns, compiled once per backend.
struct Patterns {
    device: Regex,
    interface: Regex,
    addr_mask: Regex,
    cidr: Regex,
    description: Regex,
    acl_id: Regex,
    binding: Regex,
    from_clause: Regex,
    to_clause: Regex,
    port: Regex,
    area: Regex,
    process: Regex,
    between: Regex,
    tunnel_if: Regex,
    tunnel_net: Regex,
}

impl Patterns {
    fn compile() -> Self {
        let rx = |pattern: &str| Regex::new(pattern).expect("pattern compiles");
        let addr_clause = r"(any\b|host \d+\.\d+\.\d+\.\d+|\d+\.\d+\.\d+\.\d+(?:/\d+)?)";
        Self {
            device: rx(r"\bon (R\d+)\b"),
            interface: rx(r"\binterface ([A-Za-z][A-Za-z0-9/]*)"),
            addr_mask: rx(r"\baddress (\d+\.\d+\.\d+\.\d+) (\d+\.\d+\.\d+\.\d+)\b"),
            cidr: rx(r"\b(\d+\.\d+\.\d+\.\d+)/(\d+)\b"),
            description: rx(r"description '([^']*)'"),
            acl_id: rx(r"\baccess[ -]list (\d+)\b"),
            binding: rx(r"\bapplied (inbound|outbound) on interface ([A-Za-z][A-Za-z0-9/]*)"),
            from_clause: rx(&format!(r"\bfrom {addr_clause}")),
            to_clause: rx(&format!(r"\bto {addr_clause}")),
            port: rx(r"\bport (\d+)\b"),
            area: rx(r"\barea (\d+)\b"),
            process: rx(r"\bprocess (\d+)\b"),
            between: rx(r"\bbetween (R\d+) and (R\d+)\b"),
            tunnel_if: rx(r"\b(Tunnel\d+)\b"),
            tunnel_net: rx(r"\baddressed (\d+\.\d+\.\d+\.\d+)/(\d+)\b"),
        }
    }
}

fn rule_miss(message: impl Into<String>) -> BackendError {
    BackendError::RuleMiss(message.into())
}

/// The value of a `Prefix: value` line in a prompt's user message.
fn field<'a>(user: &'a str, prefix: &str) -> Result<&'a str, BackendError> {
    user.lines()
        .find_map(|l| l.strip_prefix(prefix))
        .map(str::trim)
        .ok_or_else(|| rule_miss(format!("prompt is missing a '{prefix}' line")))
}

/// Deterministic backend: rule tables over the prompt text.
pub struct RulesBackend {
    plan: FaultPlan,
    attempts: Mutex<HashMap<(String, Stage), u32>>,
    rx: Patterns,
}

impl Default for RulesBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl RulesBackend {
    /// A backend that answers every prompt cleanly.
    pub fn new() -> Self {
        Self::with_plan(FaultPlan::none())
    }

    /// A backend that sabotages the completions selected by `plan`.
    pub fn with_plan(plan: FaultPlan) -> Self {
        Self { plan, attempts: Mutex::new(HashMap::new()), rx: Patterns::compile() }
    }

    /// Count this completion and return the 1-based attempt number for the
    /// intent at this stage.
    fn bump(&self, intent_id: &str, stage: Stage) -> u32 {
        let mut map = self.attempts.lock().expect("attempt counter lock");
        let n = map.entry((intent_id.to_string(), stage)).or_insert(0);
        *n += 1;
        *n
    }

    fn user_text<'a>(&self, prompt: &'a PromptBundle) -> Result<&'a str, BackendError> {
        prompt.user().ok_or_else(|| rule_miss("prompt has no user message"))
    }

    fn classify(&self, prompt: &PromptBundle) -> Result<String, BackendError> {
        let user = self.user_text(prompt)?;
        let intent_id = field(user, "Intent id: ")?;
        let text = field(user, "Intent: ")?;
        let attempt = self.bump(intent_id, Stage::Classify);
        if self.plan.is_active(intent_id, FaultKind::Class, prompt.purpose, attempt) {
            // The characteristic failure: a class that is not on the menu.
            return Ok("SNMP\nThe intent concerns SNMP monitoring.".into());
        }
        Ok(self.classify_answer(text))
    }

    /// Keyword classification, most specific class first.
    fn classify_answer(&self, text: &str) -> String {
        let t = text.to_ascii_lowercase();
        let any = |words: &[&str]| words.iter().any(|w| t.contains(w));
        if any(&["snmp"]) {
            // Deliberately off-menu, mirroring how a model names the topic
            // rather than picking Other; extraction maps it to Other.
            return "SNMP\nThe intent concerns SNMP monitoring.".into();
        }
        if any(&["tunnel", "gre"]) {
            return "TN\nThe intent sets up a tunnel between devices.".into();
        }
        if any(&["ospf", "advertise", "routing"]) {
            return "RP\nThe intent configures routing protocol advertisement.".into();
        }
        if any(&[
            "access list",
            "access-list",
            "permit",
            "deny",
            "block",
            "allow",
            "reject",
            "filter",
            "traffic",
        ]) {
            return "ACL\nThe intent filters traffic with an access control list.".into();
        }
        if any(&["interface", "shut", "address", "description", "enable", "bring up"]) {
            return "CP\nThe intent configures interface properties.".into();
        }
        "Other\nThe intent does not match any defined type.".into()
    }

    fn translate(&self, prompt: &PromptBundle) -> Result<String, BackendError> {
        let user = self.user_text(prompt)?;
        let intent_id = field(user, "Intent id: ")?;
        let text = field(user, "Intent: ")?;
        let exemplar = prompt
            .assistant()
            .ok_or_else(|| rule_miss("translation prompt has no exemplar"))?;
        let class = serde_json::from_str::<LowLevelDescription>(exemplar.trim())
            .map_err(|e| rule_miss(format!("unparsable exemplar in the prompt: {e}")))?
            .class;
        let attempt = self.bump(intent_id, Stage::Translate);
        if self.plan.is_active(intent_id, FaultKind::Json, prompt.purpose, attempt) {
            // Truncated JSON: an opening brace that never closes.
            return Ok(format!(
                "Here is the low-level description of the intent.\n{{\"intent_id\": \"{intent_id}\", \"class\": \"{class}\", \"targets\": [\"R1\""
            ));
        }
        let (targets, params) = match class {
            IntentClass::Cp => self.translate_cp(text)?,
            IntentClass::Acl => self.translate_acl(text)?,
            IntentClass::Rp => self.translate_rp(text)?,
            IntentClass::Tn => {
                let status_json = first_json_object(user)
                    .ok_or_else(|| rule_miss("no network status in the prompt"))?;
                let status: NetworkStatusSnapshot = serde_json::from_str(status_json)
                    .map_err(|e| rule_miss(format!("unparsable network status: {e}")))?;
                self.translate_tn(text, &status)?
            }
            IntentClass::Other => return Err(rule_miss("class Other cannot be translated")),
        };
        let lld = LowLevelDescription { intent_id: intent_id.to_string(), class, targets, params };
        Ok(format!(
            "Here is the low-level description of the intent.\n{}",
            lld.to_canonical_json()
        ))
    }

    fn last_device(&self, text: &str) -> Result<String, BackendError> {
        self.rx
            .device
            .captures_iter(text)
            .last()
            .map(|c| c[1].to_string())
            .ok_or_else(|| rule_miss("no target device (expected 'on R<n>')"))
    }

    fn translate_cp(&self, text: &str) -> Result<(Vec<String>, LldParams), BackendError> {
        let description = self.rx.description.captures(text).map(|c| c[1].to_string());
        // Quoted description text must not leak into the slot scan.
        let scan = self.rx.description.replace(text, "description");
        let device = self.last_device(&scan)?;
        let interface = self
            .rx
            .interface
            .captures(&scan)
            .map(|c| c[1].to_string())
            .ok_or_else(|| rule_miss("no interface named in the intent"))?;
        let lower = scan.to_ascii_lowercase();
        let admin_state = if ["shut down", "shutdown", "disable"].iter().any(|w| lower.contains(w))
        {
            Some(AdminState::Down)
        } else if ["enable", "bring up", "turn on"].iter().any(|w| lower.contains(w)) {
            Some(AdminState::Up)
        } else {
            None
        };
        let (ip_address, mask) = if let Some(c) = self.rx.addr_mask.captures(&scan) {
            (Some(self.quad(&c[1])?), Some(self.quad(&c[2])?))
        } else if let Some(c) = self.rx.cidr.captures(&scan) {
            (Some(self.quad(&c[1])?), Some(self.prefix_mask(&c[2])?))
        } else {
            (None, None)
        };
        if admin_state.is_none() && ip_address.is_none() && description.is_none() {
            return Err(rule_miss("the intent names nothing to configure on the interface"));
        }
        let params =
            CpParams { device: device.clone(), interface, ip_address, mask, admin_state, description };
        Ok((vec![device], LldParams::Cp(params)))
    }

    fn translate_acl(&self, text: &str) -> Result<(Vec<String>, LldParams), BackendError> {
        let device = self.last_device(text)?;
        let acl_id: u32 = self
            .rx
            .acl_id
            .captures(text)
            .ok_or_else(|| rule_miss("no access list number in the intent"))?[1]
            .parse()
            .map_err(|_| rule_miss("unparsable access list number"))?;
        let lower = text.to_ascii_lowercase();
        let action = if ["block", "deny", "reject", "drop"].iter().any(|w| lower.contains(w)) {
            AclAction::Deny
        } else if ["permit", "allow", "accept"].iter().any(|w| lower.contains(w)) {
            AclAction::Permit
        } else {
            return Err(rule_miss("no filtering action in the intent"));
        };
        let (protocol, service_port) = self.service(&lower);
        let dst_port = self
            .rx
            .port
            .captures(text)
            .map(|c| c[1].parse::<u16>().map_err(|_| rule_miss("unparsable port")))
            .transpose()?
            .or(service_port);
        let (src_prefix, src_wildcard) = match self.rx.from_clause.captures(text) {
            Some(c) => self.addr_clause(&c[1])?,
            None => (Ipv4Addr::new(0, 0, 0, 0), Ipv4Addr::new(255, 255, 255, 255)),
        };
        let (dst_prefix, dst_wildcard) = match self.rx.to_clause.captures(text) {
            Some(c) => {
                let (p, w) = self.addr_clause(&c[1])?;
                (Some(p), Some(w))
            }
            None => (None, None),
        };
        let (direction, apply_to_interface) = match self.rx.binding.captures(text) {
            Some(c) => {
                let direction = if &c[1] == "inbound" { Direction::In } else { Direction::Out };
                (Some(direction), Some(c[2].to_string()))
            }
            None => (None, None),
        };
        let params = AclParams {
            device: device.clone(),
            acl_id,
            action,
            protocol,
            src_prefix,
            src_wildcard,
            dst_prefix,
            dst_wildcard,
            dst_port,
            apply_to_interface,
            direction,
        };
        Ok((vec![device], LldParams::Acl(params)))
    }

    /// Service keyword to (protocol, well-known port). First match wins;
    /// `https` is listed before `http` so the longer keyword is not shadowed.
    fn service(&self, lower: &str) -> (Protocol, Option<u16>) {
        const SERVICES: &[(&str, Protocol, Option<u16>)] = &[
            ("https", Protocol::Tcp, Some(443)),
            ("http", Protocol::Tcp, Some(80)),
            ("ssh", Protocol::Tcp, Some(22)),
            ("telnet", Protocol::Tcp, Some(23)),
            ("dns", Protocol::Udp, Some(53)),
            ("icmp", Protocol::Icmp, None),
            ("ping", Protocol::Icmp, None),
            ("udp", Protocol::Udp, None),
            ("tcp", Protocol::Tcp, None),
        ];
        for (word, protocol, port) in SERVICES {
            if lower.contains(word) {
                return (*protocol, *port);
            }
        }
        (Protocol::Ip, None)
    }

    fn translate_rp(&self, text: &str) -> Result<(Vec<String>, LldParams), BackendError> {
        let device = self.last_device(text)?;
        let mut networks = Vec::new();
        for c in self.rx.cidr.captures_iter(text) {
            let prefix = self.quad(&c[1])?;
            let wildcard = mask_to_wildcard(self.prefix_mask(&c[2])?);
            networks.push(NetworkSpec { prefix, wildcard });
        }
        if networks.is_empty() {
            return Err(rule_miss("no network to advertise in the intent"));
        }
        let area = match self.rx.area.captures(text) {
            Some(c) => c[1].parse().map_err(|_| rule_miss("unparsable area"))?,
            None => 0,
        };
        let ospf_process_id = match self.rx.process.captures(text) {
            Some(c) => c[1].parse().map_err(|_| rule_miss("unparsable process id"))?,
            None => 1,
        };
        let params = RpParams { device: device.clone(), ospf_process_id, area, networks };
        Ok((vec![device], LldParams::Rp(params)))
    }

    fn translate_tn(
        &self,
        text: &str,
        status: &NetworkStatusSnapshot,
    ) -> Result<(Vec<String>, LldParams), BackendError> {
        let caps = self
            .rx
            .between
            .captures(text)
            .ok_or_else(|| rule_miss("no device pair (expected 'between R<n> and R<m>')"))?;
        let (dev_a, dev_b) = (caps[1].to_string(), caps[2].to_string());
        let tunnel_if = self
            .rx
            .tunnel_if
            .captures(text)
            .map(|c| c[1].to_string())
            .unwrap_or_else(|| "Tunnel0".to_string());
        let net = self
            .rx
            .tunnel_net
            .captures(text)
            .ok_or_else(|| rule_miss("no tunnel subnet (expected 'addressed A.B.C.D/len')"))?;
        let base = u32::from(self.quad(&net[1])?);
        let tunnel_mask = self.prefix_mask(&net[2])?;
        let (ip_a, ip_b) = (Ipv4Addr::from(base + 1), Ipv4Addr::from(base + 2));

        // The underlay comes from the reported status: the direct link
        // between the two devices provides each side's source interface, and
        // the peer's address on that link is the tunnel destination.
        let split = |endpoint: &str| -> (String, String) {
            match endpoint.split_once(':') {
                Some((d, i)) => (d.to_string(), i.to_string()),
                None => (endpoint.to_string(), String::new()),
            }
        };
        let link = status
            .links
            .iter()
            .map(|l| (split(&l.a), split(&l.b)))
            .find_map(|((da, ia), (db, ib))| {
                if da == dev_a && db == dev_b {
                    Some((ia, ib))
                } else if da == dev_b && db == dev_a {
                    Some((ib, ia))
                } else {
                    None
                }
            });
        let (if_a, if_b) =
            link.ok_or_else(|| rule_miss(format!("no direct link between {dev_a} and {dev_b}")))?;
        let addr_of = |device: &str, iface: &str| -> Result<Ipv4Addr, BackendError> {
            status
                .devices
                .iter()
                .find(|d| d.name == device)
                .and_then(|d| d.interfaces.iter().find(|i| i.name == iface))
                .and_then(|i| i.ip.as_deref())
                .ok_or_else(|| rule_miss(format!("{device}:{iface} has no address in the status")))?
                .parse()
                .map_err(|_| rule_miss(format!("unparsable address on {device}:{iface}")))
        };
        let endpoint = |device: &str, source_if: &str, destination_ip, tunnel_ip| TunnelEndpoint {
            device: device.to_string(),
            tunnel_if: tunnel_if.clone(),
            source_if: source_if.to_string(),
            destination_ip,
            tunnel_ip,
            tunnel_mask,
        };
        let params = TnParams {
            endpoint_a: endpoint(&dev_a, &if_a, addr_of(&dev_b, &if_b)?, ip_a),
            endpoint_b: endpoint(&dev_b, &if_b, addr_of(&dev_a, &if_a)?, ip_b),
            mode: TunnelMode::Gre,
        };
        Ok((vec![dev_a, dev_b], LldParams::Tn(params)))
    }

    fn generate(&self, prompt: &PromptBundle) -> Result<String, BackendError> {
        let user = self.user_text(prompt)?;
        let json = first_json_object(user)
            .ok_or_else(|| rule_miss("no low-level description JSON in the prompt"))?;
        let lld: LowLevelDescription = serde_json::from_str(json)
            .map_err(|e| rule_miss(format!("unparsable low-level description: {e}")))?;
        let attempt = self.bump(&lld.intent_id, Stage::Config);
        let mut sections = render_sections(&lld);
        if self.plan.is_active(&lld.intent_id, FaultKind::Syntax, prompt.purpose, attempt) {
            sabotage(&mut sections);
        }
        Ok(sections_to_text(&sections))
    }

    fn quad(&self, token: &str) -> Result<Ipv4Addr, BackendError> {
        token.parse().map_err(|_| rule_miss(format!("unparsable IPv4 address '{token}'")))
    }

    fn prefix_mask(&self, len_token: &str) -> Result<Ipv4Addr, BackendError> {
        let len: u8 =
            len_token.parse().map_err(|_| rule_miss(format!("unparsable prefix length '{len_token}'")))?;
        prefix_len_to_mask(len).ok_or_else(|| rule_miss(format!("prefix length {len} out of range")))
    }

    /// Parse `any`, `host A.B.C.D`, `A.B.C.D/len`, or a bare address into a
    /// (prefix, wildcard) pair.
    fn addr_clause(&self, clause: &str) -> Result<(Ipv4Addr, Ipv4Addr), BackendError> {
        if clause == "any" {
            let m = AddrMatch::any();
            return Ok((m.prefix, m.wildcard));
        }
        if let Some(rest) = clause.strip_prefix("host ") {
            return Ok((self.quad(rest)?, Ipv4Addr::new(0, 0, 0, 0)));
        }
        if let Some((addr, len)) = clause.split_once('/') {
            return Ok((self.quad(addr)?, mask_to_wildcard(self.prefix_mask(len)?)));
        }
        Ok((self.quad(clause)?, Ipv4Addr::new(0, 0, 0, 0)))
    }
}

impl Backend for RulesBackend {
    fn complete(
        &self,
        prompt: &PromptBundle,
        _params: &DecodingParams,
    ) -> Result<String, BackendError> {
        match prompt.purpose {
            PromptPurpose::Classify => self.classify(prompt),
            PromptPurpose::Translate => self.translate(prompt),
            PromptPurpose::Generate | PromptPurpose::Refine => self.generate(prompt),
        }
    }
}

/// One rendered device section: header device name plus configuration lines.
type Section = (String, Vec<String>);

/// Render the configuration a low-level description asks for, one section
/// per target device, nothing beyond what the description pins.
fn render_sections(lld: &LowLevelDescription) -> Vec<Section> {
    match &lld.params {
        LldParams::Cp(p) => {
            let mut lines = vec![format!("interface {}", p.interface)];
            if let (Some(ip), Some(mask)) = (p.ip_address, p.mask) {
                lines.push(format!(" ip address {ip} {mask}"));
            }
            if let Some(d) = &p.description {
                lines.push(format!(" description {d}"));
            }
            match p.admin_state {
                Some(AdminState::Up) => lines.push(" no shutdown".into()),
                Some(AdminState::Down) => lines.push(" shutdown".into()),
                None => {}
            }
            vec![(p.device.clone(), lines)]
        }
        LldParams::Acl(p) => {
            let mut lines = vec![acl_entry_line(p)];
            if let Some(iface) = &p.apply_to_interface {
                let direction = p.direction.unwrap_or(Direction::In);
                lines.push(format!("interface {iface}"));
                lines.push(format!(" ip access-group {} {direction}", p.acl_id));
            }
            vec![(p.device.clone(), lines)]
        }
        LldParams::Rp(p) => {
            let mut lines = vec![format!("router ospf {}", p.ospf_process_id)];
            for n in &p.networks {
                lines.push(format!(" network {} {} area {}", n.prefix, n.wildcard, p.area));
            }
            vec![(p.device.clone(), lines)]
        }
        LldParams::Tn(p) => [&p.endpoint_a, &p.endpoint_b]
            .into_iter()
            .map(|ep| {
                let lines = vec![
                    format!("interface {}", ep.tunnel_if),
                    format!(" ip address {} {}", ep.tunnel_ip, ep.tunnel_mask),
                    format!(" tunnel source {}", ep.source_if),
                    format!(" tunnel destination {}", ep.destination_ip),
                    " tunnel mode gre ip".to_string(),
                    " no shutdown".to_string(),
                ];
                (ep.device.clone(), lines)
            })
            .collect(),
    }
}

fn acl_entry_line(p: &AclParams) -> String {
    if p.acl_id >= 100 {
        let src = extended_addr(p.src_prefix, p.src_wildcard);
        let dst = match (p.dst_prefix, p.dst_wildcard) {
            (Some(prefix), Some(wildcard)) => extended_addr(prefix, wildcard),
            _ => "any".to_string(),
        };
        let mut line =
            format!("access-list {} {} {} {src} {dst}", p.acl_id, p.action, p.protocol);
        if let Some(port) = p.dst_port {
            line.push_str(&format!(" eq {port}"));
        }
        line
    } else {
        let src = if u32::from(p.src_wildcard) == 0 {
            p.src_prefix.to_string()
        } else {
            format!("{} {}", p.src_prefix, p.src_wildcard)
        };
        format!("access-list {} {} {src}", p.acl_id, p.action)
    }
}

fn extended_addr(prefix: Ipv4Addr, wildcard: Ipv4Addr) -> String {
    if u32::from(wildcard) == 0 {
        format!("host {prefix}")
    } else if wildcard == Ipv4Addr::new(255, 255, 255, 255) {
        "any".to_string()
    } else {
        format!("{prefix} {wildcard}")
    }
}

/// Misspell the first `ip address` line, or plant one when the rendering has
/// none: either way the bundle carries exactly one syntax error.
fn sabotage(sections: &mut [Section]) {
    for (_, lines) in sections.iter_mut() {
        if let Some(line) = lines.iter_mut().find(|l| l.contains(" ip address ")) {
            *line = line.replacen(" ip address ", " ip addres ", 1);
            return;
        }
    }
    if let Some((_, lines)) = sections.first_mut() {
        lines.push(" ip addres 192.0.2.1 255.255.255.0".into());
    }
}

fn sections_to_text(sections: &[Section]) -> String {
    let mut out = String::new();
    for (device, lines) in sections {
        out.push_str(device);
        out.push('\n');
        for line in lines {
            out.push_str(line);
            out.push('\n');
        }
        out.push_str("~~~\n");
    }
    out
}
