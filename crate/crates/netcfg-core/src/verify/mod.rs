//! Syntactic and semantic verification of candidate configurations.
//!
//! [`check_syntax`] runs the parser over every section of a bundle and
//! reports error-severity findings. [`verify`] assumes a syntactically clean
//! candidate that has already been applied to the baseline model and checks
//! that the intent's goal is realised and that the change did not break
//! network-wide consistency (OSPF adjacencies, tunnel symmetry). Consistency
//! findings already present in the baseline are not charged to the
//! candidate: the verifier gates the change, not the inherited state.

pub mod acl;
pub mod ospf;
pub mod report;
pub mod suggest;
pub mod tunnel;

use chrono::{DateTime, Utc};

pub use acl::{simulate_acl, Packet};
pub use report::{ErrorCode, VerificationError, VerificationReport};
pub use suggest::suggest;

use crate::intent::{AclParams, CpParams, LldParams, LowLevelDescription};
use crate::model::{AclAction, AddrMatch, AdminState, ConfigBundle, NetworkModel};
use ospf::{check_ospf_adjacency, check_ospf_coverage};
use tunnel::check_tunnel;

/// Parse every section of a bundle and report error-severity syntax
/// findings, in section order and line order.
pub fn check_syntax(bundle: &ConfigBundle) -> Vec<VerificationError> {
    let mut errors = Vec::new();
    for section in &bundle.sections {
        let outcome = crate::model::parse_config(&section.device, &section.text);
        for issue in outcome.errors() {
            errors.push(VerificationError {
                code: ErrorCode::Syntax,
                device: section.device.clone(),
                location: Some(format!("line {}", issue.line)),
                message: issue.message.clone(),
            });
        }
    }
    errors
}

/// Interface facts shared by regular and tunnel interfaces, for CP checks.
struct IfaceView {
    ip: Option<std::net::Ipv4Addr>,
    mask: Option<std::net::Ipv4Addr>,
    admin_state: AdminState,
    description: Option<String>,
}

fn iface_view(model: &NetworkModel, device: &str, name: &str) -> Option<IfaceView> {
    let ast = model.device(device)?;
    if let Some(i) = ast.interface(name) {
        return Some(IfaceView {
            ip: i.ip_address,
            mask: i.mask,
            admin_state: i.effective_state(),
            description: i.description.clone(),
        });
    }
    ast.tunnel(name).map(|t| IfaceView {
        ip: t.tunnel_ip,
        mask: t.tunnel_mask,
        admin_state: t.effective_state(),
        description: None,
    })
}

fn check_cp(candidate: &NetworkModel, p: &CpParams) -> Vec<VerificationError> {
    let mut errors = Vec::new();
    let location = format!("interface {}", p.interface);
    let Some(view) = iface_view(candidate, &p.device, &p.interface) else {
        errors.push(VerificationError {
            code: ErrorCode::GoalUnmet,
            device: p.device.clone(),
            location: Some(location),
            message: format!("interface {} is not configured", p.interface),
        });
        return errors;
    };
    if let Some(expected) = p.admin_state {
        if view.admin_state != expected {
            errors.push(VerificationError {
                code: ErrorCode::IfStateMismatch,
                device: p.device.clone(),
                location: Some(location.clone()),
                message: format!(
                    "interface {} is {}, expected {expected}",
                    p.interface, view.admin_state
                ),
            });
        }
    }
    if let (Some(ip), Some(mask)) = (p.ip_address, p.mask) {
        if view.ip != Some(ip) || view.mask != Some(mask) {
            errors.push(VerificationError {
                code: ErrorCode::GoalUnmet,
                device: p.device.clone(),
                location: Some(location.clone()),
                message: format!("interface {} should have address {ip} {mask}", p.interface),
            });
        }
    }
    if let Some(expected) = &p.description {
        if view.description.as_deref() != Some(expected.as_str()) {
            errors.push(VerificationError {
                code: ErrorCode::GoalUnmet,
                device: p.device.clone(),
                location: Some(location),
                message: format!("interface {} should have description '{expected}'", p.interface),
            });
        }
    }
    errors
}

/// The two extreme addresses a matcher admits: all wildcard bits clear and
/// all wildcard bits set. For a host matcher both collapse to the address.
fn representative_addrs(m: &AddrMatch) -> Vec<std::net::Ipv4Addr> {
    let base = u32::from(m.prefix) & !u32::from(m.wildcard);
    let top = base | u32::from(m.wildcard);
    let mut reps = vec![std::net::Ipv4Addr::from(base)];
    if top != base {
        reps.push(std::net::Ipv4Addr::from(top));
    }
    reps
}

/// Representative packets for an ACL intent: the cross product of extreme
/// source and destination addresses and, for port-capable protocols, the
/// requested port or the port range extremes.
fn representative_packets(p: &AclParams) -> Vec<Packet> {
    let src = AddrMatch { prefix: p.src_prefix, wildcard: p.src_wildcard };
    let dst = match (p.dst_prefix, p.dst_wildcard) {
        (Some(prefix), Some(wildcard)) => AddrMatch { prefix, wildcard },
        _ => AddrMatch::any(),
    };
    let ports: Vec<Option<u16>> = if p.protocol.is_port_capable() {
        match p.dst_port {
            Some(port) => vec![Some(port)],
            None => vec![Some(1), Some(65535)],
        }
    } else {
        vec![None]
    };
    let mut packets = Vec::new();
    for src_ip in representative_addrs(&src) {
        for dst_ip in representative_addrs(&dst) {
            for port in &ports {
                packets.push(Packet::new(p.protocol, src_ip, dst_ip, *port));
            }
        }
    }
    packets
}

fn check_acl_goal(candidate: &NetworkModel, p: &AclParams) -> Vec<VerificationError> {
    let mut errors = Vec::new();
    let Some(ast) = candidate.device(&p.device) else {
        return errors;
    };
    let location = format!("access-list {}", p.acl_id);
    let Some(acl) = ast.acl(p.acl_id) else {
        errors.push(VerificationError {
            code: ErrorCode::GoalUnmet,
            device: p.device.clone(),
            location: Some(location),
            message: format!("access-list {} is not configured", p.acl_id),
        });
        return errors;
    };
    for packet in representative_packets(p) {
        let verdict = simulate_acl(&acl.entries, &packet);
        if verdict != p.action {
            let port_part = packet.dst_port.map(|port| format!(" port {port}")).unwrap_or_default();
            errors.push(VerificationError {
                code: ErrorCode::AclSemantics,
                device: p.device.clone(),
                location: Some(location.clone()),
                message: format!(
                    "{} packet {} -> {}{port_part} was {}ed, expected {}",
                    packet.protocol,
                    packet.src_ip,
                    packet.dst_ip,
                    match verdict {
                        AclAction::Permit => "permitt",
                        AclAction::Deny => "deni",
                    },
                    p.action
                ),
            });
        }
    }
    if let Some(iface) = &p.apply_to_interface {
        let direction = p.direction.unwrap_or(crate::model::Direction::In);
        let bound = ast
            .interface(iface)
            .map(|i| i.acl_bindings.iter().any(|b| b.acl_id == p.acl_id && b.direction == direction))
            .unwrap_or(false);
        if !bound {
            errors.push(VerificationError {
                code: ErrorCode::GoalUnmet,
                device: p.device.clone(),
                location: Some(format!("interface {iface}")),
                message: format!(
                    "missing 'ip access-group {} {direction}' on interface {iface}",
                    p.acl_id
                ),
            });
        }
    }
    errors
}

/// Consistency findings of `current` that are not explained by an identical
/// finding in `baseline`.
fn delta(
    current: Vec<VerificationError>,
    baseline: &[VerificationError],
) -> Vec<VerificationError> {
    current
        .into_iter()
        .filter(|e| {
            !baseline
                .iter()
                .any(|b| b.code == e.code && b.device == e.device && b.location == e.location)
        })
        .collect()
}

/// Verify a candidate model against the intent's low-level description.
///
/// `candidate` is expected to be `baseline` with the bundle applied (see
/// [`NetworkModel::apply_candidate`]) and syntactically clean; this function
/// performs the semantic half of verification.
pub fn verify(
    baseline: &NetworkModel,
    candidate: &NetworkModel,
    lld: &LowLevelDescription,
    checked_at: DateTime<Utc>,
) -> VerificationReport {
    let mut errors = Vec::new();
    for target in &lld.targets {
        if candidate.device(target).is_none() {
            errors.push(VerificationError {
                code: ErrorCode::UnknownDevice,
                device: target.clone(),
                location: None,
                message: format!("device {target} does not exist in the network"),
            });
        }
    }

    if errors.is_empty() {
        match &lld.params {
            LldParams::Cp(p) => errors.extend(check_cp(candidate, p)),
            LldParams::Acl(p) => errors.extend(check_acl_goal(candidate, p)),
            LldParams::Rp(p) => errors.extend(check_ospf_coverage(candidate, p)),
            LldParams::Tn(p) => errors.extend(check_tunnel(candidate, p)),
        }
        // Every change, whatever its class, must leave link-level consistency
        // no worse than it found it.
        errors.extend(delta(check_ospf_adjacency(candidate), &check_ospf_adjacency(baseline)));
    }

    VerificationReport::new(lld.intent_id.clone(), lld.class, errors, checked_at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intent::{IntentClass, NetworkSpec, RpParams};
    use crate::model::{DeviceSection, Direction, Protocol};
    use chrono::TimeZone;

    fn at() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap()
    }

    fn baseline() -> NetworkModel {
        let json = r#"{
            "devices": [
                {"name": "R1", "configs": "interface GigabitEthernet0/0\n ip address 10.0.12.1 255.255.255.252\n no shutdown\ninterface GigabitEthernet0/3\n ip address 10.0.1.1 255.255.255.0\n no shutdown\nrouter ospf 1\n network 10.0.12.0 0.0.0.3 area 0\n network 10.0.1.0 0.0.0.255 area 0\n"},
                {"name": "R2", "configs": "interface GigabitEthernet0/0\n ip address 10.0.12.2 255.255.255.252\n no shutdown\ninterface GigabitEthernet0/2\n no shutdown\nrouter ospf 1\n network 10.0.12.0 0.0.0.3 area 0\n"}
            ],
            "links": [{"a": "R1:GigabitEthernet0/0", "b": "R2:GigabitEthernet0/0"}]
        }"#;
        NetworkModel::from_json(json).unwrap()
    }

    fn bundle(device: &str, text: &str) -> ConfigBundle {
        ConfigBundle::new(vec![DeviceSection { device: device.into(), text: text.into() }])
    }

    #[test]
    fn check_syntax_reports_per_line_errors() {
        let b = bundle("R1", "interface GigabitEthernet0/0\n ip addres 10.0.0.1 255.255.255.0");
        let errors = check_syntax(&b);
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].code, ErrorCode::Syntax);
        assert_eq!(errors[0].location.as_deref(), Some("line 2"));
        assert!(check_syntax(&bundle("R1", "interface GigabitEthernet0/0\n shutdown")).is_empty());
    }

    #[test]
    fn cp_goal_passes_and_fails_on_state() {
        let base = baseline();
        let lld = LowLevelDescription {
            intent_id: "i-1".into(),
            class: IntentClass::Cp,
            targets: vec!["R2".into()],
            params: LldParams::Cp(CpParams {
                device: "R2".into(),
                interface: "GigabitEthernet0/2".into(),
                ip_address: None,
                mask: None,
                admin_state: Some(AdminState::Down),
                description: None,
            }),
        };
        let good = base
            .apply_candidate(&bundle("R2", "interface GigabitEthernet0/2\n shutdown"))
            .unwrap()
            .model;
        assert!(verify(&base, &good, &lld, at()).passed);

        let bad = base
            .apply_candidate(&bundle("R2", "interface GigabitEthernet0/2\n no shutdown"))
            .unwrap()
            .model;
        let report = verify(&base, &bad, &lld, at());
        assert!(!report.passed);
        assert_eq!(report.codes(), vec![ErrorCode::IfStateMismatch]);
        assert_eq!(report.errors[0].message, "interface GigabitEthernet0/2 is up, expected down");
    }

    #[test]
    fn acl_goal_checks_filtering_and_binding() {
        let base = baseline();
        let lld = LowLevelDescription {
            intent_id: "i-2".into(),
            class: IntentClass::Acl,
            targets: vec!["R1".into()],
            params: LldParams::Acl(AclParams {
                device: "R1".into(),
                acl_id: 101,
                action: AclAction::Permit,
                protocol: Protocol::Tcp,
                src_prefix: "10.0.1.0".parse().unwrap(),
                src_wildcard: "0.0.0.255".parse().unwrap(),
                dst_prefix: Some("10.0.3.5".parse().unwrap()),
                dst_wildcard: Some("0.0.0.0".parse().unwrap()),
                dst_port: Some(22),
                apply_to_interface: Some("GigabitEthernet0/3".into()),
                direction: Some(Direction::In),
            }),
        };
        let good = base
            .apply_candidate(&bundle(
                "R1",
                "access-list 101 permit tcp 10.0.1.0 0.0.0.255 host 10.0.3.5 eq 22\ninterface GigabitEthernet0/3\n ip address 10.0.1.1 255.255.255.0\n ip access-group 101 in\n no shutdown",
            ))
            .unwrap()
            .model;
        assert!(verify(&base, &good, &lld, at()).passed);

        let wrong_action = base
            .apply_candidate(&bundle(
                "R1",
                "access-list 101 deny tcp 10.0.1.0 0.0.0.255 host 10.0.3.5 eq 22\ninterface GigabitEthernet0/3\n ip address 10.0.1.1 255.255.255.0\n ip access-group 101 in\n no shutdown",
            ))
            .unwrap()
            .model;
        let report = verify(&base, &wrong_action, &lld, at());
        assert_eq!(report.codes(), vec![ErrorCode::AclSemantics]);
        assert!(report.errors[0].message.contains("expected permit"));

        let unbound = base
            .apply_candidate(&bundle(
                "R1",
                "access-list 101 permit tcp 10.0.1.0 0.0.0.255 host 10.0.3.5 eq 22",
            ))
            .unwrap()
            .model;
        let report = verify(&base, &unbound, &lld, at());
        assert_eq!(report.codes(), vec![ErrorCode::GoalUnmet]);
        assert!(report.errors[0].message.contains("ip access-group 101 in"));
    }

    #[test]
    fn rp_goal_covers_networks_and_charges_only_new_adjacency_breaks() {
        let base = baseline();
        let lld = LowLevelDescription {
            intent_id: "i-3".into(),
            class: IntentClass::Rp,
            targets: vec!["R2".into()],
            params: LldParams::Rp(RpParams {
                device: "R2".into(),
                ospf_process_id: 1,
                area: 0,
                networks: vec![NetworkSpec {
                    prefix: "10.0.2.0".parse().unwrap(),
                    wildcard: "0.0.0.255".parse().unwrap(),
                }],
            }),
        };
        let good = base
            .apply_candidate(&bundle("R2", "router ospf 1\n network 10.0.2.0 0.0.0.255 area 0"))
            .unwrap()
            .model;
        assert!(verify(&base, &good, &lld, at()).passed);

        let missing = base
            .apply_candidate(&bundle("R2", "router ospf 1\n network 10.0.9.0 0.0.0.255 area 0"))
            .unwrap()
            .model;
        let report = verify(&base, &missing, &lld, at());
        assert_eq!(report.codes(), vec![ErrorCode::OspfCoverage]);
    }

    #[test]
    fn unknown_target_shortcuts_goal_checks() {
        let base = baseline();
        let candidate = base.clone();
        let lld = LowLevelDescription {
            intent_id: "i-4".into(),
            class: IntentClass::Cp,
            targets: vec!["R9".into()],
            params: LldParams::Cp(CpParams {
                device: "R9".into(),
                interface: "GigabitEthernet0/0".into(),
                ip_address: None,
                mask: None,
                admin_state: Some(AdminState::Down),
                description: None,
            }),
        };
        let report = verify(&base, &candidate, &lld, at());
        assert_eq!(report.codes(), vec![ErrorCode::UnknownDevice]);
    }

    #[test]
    fn representative_packets_cover_matcher_extremes() {
        let p = AclParams {
            device: "R1".into(),
            acl_id: 101,
            action: AclAction::Permit,
            protocol: Protocol::Tcp,
            src_prefix: "10.0.1.0".parse().unwrap(),
            src_wildcard: "0.0.0.255".parse().unwrap(),
            dst_prefix: None,
            dst_wildcard: None,
            dst_port: None,
            apply_to_interface: None,
            direction: None,
        };
        let packets = representative_packets(&p);
        // 2 src extremes x 2 dst extremes (any) x 2 port extremes.
        assert_eq!(packets.len(), 8);
        assert!(packets.iter().any(|pk| pk.src_ip.to_string() == "10.0.1.0"));
        assert!(packets.iter().any(|pk| pk.src_ip.to_string() == "10.0.1.255"));
        assert!(packets.iter().any(|pk| pk.dst_port == Some(65535)));
    }
}
