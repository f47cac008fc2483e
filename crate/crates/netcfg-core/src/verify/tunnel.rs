//! Tunnel goal and symmetry checks.
//!
//! A GRE tunnel works only when both sides mirror each other: each side's
//! `tunnel destination` must be an address owned by the peer's source
//! interface, the two tunnel addresses must share one subnet, and the modes
//! must agree. Divergence from the intent's endpoint parameters is reported
//! as an unmet goal; a broken mirror is reported as tunnel asymmetry.

use crate::intent::{TnParams, TunnelEndpoint};
use crate::model::{AdminState, NetworkModel, TunnelStanza};

use super::report::{ErrorCode, VerificationError};

fn asymmetry(device: &str, location: String, message: String) -> VerificationError {
    VerificationError { code: ErrorCode::TunnelAsymmetry, device: device.into(), location: Some(location), message }
}

fn goal_unmet(device: &str, location: String, message: String) -> VerificationError {
    VerificationError { code: ErrorCode::GoalUnmet, device: device.into(), location: Some(location), message }
}

/// Compare one configured tunnel stanza against the endpoint the intent
/// asked for.
fn check_endpoint_goal(ep: &TunnelEndpoint, stanza: &TunnelStanza) -> Vec<VerificationError> {
    let mut errors = Vec::new();
    let loc = format!("interface {}", ep.tunnel_if);
    if stanza.source_if.as_deref() != Some(ep.source_if.as_str()) {
        errors.push(goal_unmet(
            &ep.device,
            loc.clone(),
            format!("tunnel source should be {}", ep.source_if),
        ));
    }
    if stanza.destination_ip != Some(ep.destination_ip) {
        errors.push(goal_unmet(
            &ep.device,
            loc.clone(),
            format!("tunnel destination should be {}", ep.destination_ip),
        ));
    }
    if stanza.tunnel_ip != Some(ep.tunnel_ip) || stanza.tunnel_mask != Some(ep.tunnel_mask) {
        errors.push(goal_unmet(
            &ep.device,
            loc.clone(),
            format!("tunnel address should be {} {}", ep.tunnel_ip, ep.tunnel_mask),
        ));
    }
    if stanza.effective_state() == AdminState::Down {
        errors.push(goal_unmet(&ep.device, loc, "tunnel interface is shut down".into()));
    }
    errors
}

/// Verify a tunnel intent against the candidate model.
pub fn check_tunnel(candidate: &NetworkModel, params: &TnParams) -> Vec<VerificationError> {
    let mut errors = Vec::new();
    let a = &params.endpoint_a;
    let b = &params.endpoint_b;

    let stanza_of = |ep: &TunnelEndpoint| -> Option<TunnelStanza> {
        candidate.device(&ep.device).and_then(|ast| ast.tunnel(&ep.tunnel_if)).cloned()
    };
    let (stanza_a, stanza_b) = (stanza_of(a), stanza_of(b));

    for (ep, stanza) in [(a, &stanza_a), (b, &stanza_b)] {
        match stanza {
            None => errors.push(asymmetry(
                &ep.device,
                format!("interface {}", ep.tunnel_if),
                format!("tunnel interface {} is not configured on {}", ep.tunnel_if, ep.device),
            )),
            Some(stanza) => errors.extend(check_endpoint_goal(ep, stanza)),
        }
    }

    let (Some(stanza_a), Some(stanza_b)) = (stanza_a, stanza_b) else {
        return errors;
    };

    // Cross destinations: each side must point at an address owned by the
    // peer's source interface.
    for (ep, stanza, peer_ep, peer_stanza) in
        [(a, &stanza_a, b, &stanza_b), (b, &stanza_b, a, &stanza_a)]
    {
        let loc = format!("interface {}", ep.tunnel_if);
        let Some(dst) = stanza.destination_ip else {
            errors.push(asymmetry(&ep.device, loc, "tunnel destination is missing".into()));
            continue;
        };
        let Some(peer_src_if) = &peer_stanza.source_if else {
            errors.push(asymmetry(
                &peer_ep.device,
                format!("interface {}", peer_ep.tunnel_if),
                "tunnel source is missing".into(),
            ));
            continue;
        };
        let peer_src_ip = candidate
            .device(&peer_ep.device)
            .and_then(|ast| ast.interface_ip(peer_src_if));
        if peer_src_ip != Some(dst) {
            errors.push(asymmetry(
                &ep.device,
                loc,
                format!(
                    "tunnel destination {dst} is not an address of {}:{peer_src_if}",
                    peer_ep.device
                ),
            ));
        }
    }

    // Shared tunnel subnet with distinct addresses.
    match (stanza_a.tunnel_ip, stanza_a.tunnel_mask, stanza_b.tunnel_ip, stanza_b.tunnel_mask) {
        (Some(ip_a), Some(mask_a), Some(ip_b), Some(mask_b)) => {
            let same_subnet = mask_a == mask_b
                && (u32::from(ip_a) & u32::from(mask_a)) == (u32::from(ip_b) & u32::from(mask_b));
            if !same_subnet || ip_a == ip_b {
                errors.push(asymmetry(
                    &a.device,
                    format!("interface {}", a.tunnel_if),
                    format!(
                        "tunnel addresses {ip_a} and {ip_b} do not form a point-to-point subnet"
                    ),
                ));
            }
        }
        _ => errors.push(asymmetry(
            &a.device,
            format!("interface {}", a.tunnel_if),
            "both tunnel interfaces need an address in a shared subnet".into(),
        )),
    }

    if stanza_a.mode != stanza_b.mode {
        errors.push(asymmetry(
            &a.device,
            format!("interface {}", a.tunnel_if),
            "tunnel modes differ between the endpoints".into(),
        ));
    }

    errors
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TunnelMode;

    fn model(r1_extra: &str, r3_extra: &str) -> NetworkModel {
        // The extras carry real newlines; JSON strings need them escaped.
        let r1_extra = r1_extra.replace('\n', "\\n");
        let r3_extra = r3_extra.replace('\n', "\\n");
        let json = format!(
            r#"{{
            "devices": [
                {{"name": "R1", "configs": "interface GigabitEthernet0/2\n ip address 10.0.13.1 255.255.255.252\n no shutdown\n{r1_extra}"}},
                {{"name": "R3", "configs": "interface GigabitEthernet0/2\n ip address 10.0.13.2 255.255.255.252\n no shutdown\n{r3_extra}"}}
            ],
            "links": [{{"a": "R1:GigabitEthernet0/2", "b": "R3:GigabitEthernet0/2"}}]
        }}"#
        );
        NetworkModel::from_json(&json).unwrap()
    }

    fn params() -> TnParams {
        TnParams {
            endpoint_a: TunnelEndpoint {
                device: "R1".into(),
                tunnel_if: "Tunnel0".into(),
                source_if: "GigabitEthernet0/2".into(),
                destination_ip: "10.0.13.2".parse().unwrap(),
                tunnel_ip: "172.16.0.1".parse().unwrap(),
                tunnel_mask: "255.255.255.252".parse().unwrap(),
            },
            endpoint_b: TunnelEndpoint {
                device: "R3".into(),
                tunnel_if: "Tunnel0".into(),
                source_if: "GigabitEthernet0/2".into(),
                destination_ip: "10.0.13.1".parse().unwrap(),
                tunnel_ip: "172.16.0.2".parse().unwrap(),
                tunnel_mask: "255.255.255.252".parse().unwrap(),
            },
            mode: TunnelMode::Gre,
        }
    }

    fn tunnel_cfg(ip: &str, dst: &str) -> String {
        format!(
            "interface Tunnel0\n ip address {ip} 255.255.255.252\n tunnel source GigabitEthernet0/2\n tunnel destination {dst}\n tunnel mode gre ip\n"
        )
    }

    #[test]
    fn mirrored_tunnel_passes() {
        let model = model(&tunnel_cfg("172.16.0.1", "10.0.13.2"), &tunnel_cfg("172.16.0.2", "10.0.13.1"));
        assert!(check_tunnel(&model, &params()).is_empty());
    }

    #[test]
    fn missing_endpoint_is_asymmetry() {
        let model = model(&tunnel_cfg("172.16.0.1", "10.0.13.2"), "");
        let errors = check_tunnel(&model, &params());
        assert!(errors.iter().any(|e| {
            e.code == ErrorCode::TunnelAsymmetry
                && e.message == "tunnel interface Tunnel0 is not configured on R3"
        }));
    }

    #[test]
    fn wrong_destination_is_asymmetry_and_goal_unmet() {
        let model = model(&tunnel_cfg("172.16.0.1", "10.0.13.9"), &tunnel_cfg("172.16.0.2", "10.0.13.1"));
        let errors = check_tunnel(&model, &params());
        assert!(errors.iter().any(|e| e.code == ErrorCode::GoalUnmet
            && e.message == "tunnel destination should be 10.0.13.2"));
        assert!(errors.iter().any(|e| e.code == ErrorCode::TunnelAsymmetry
            && e.message.contains("10.0.13.9 is not an address of R3:GigabitEthernet0/2")));
    }

    #[test]
    fn disjoint_tunnel_subnets_are_asymmetry() {
        let model = model(&tunnel_cfg("172.16.0.1", "10.0.13.2"), &tunnel_cfg("172.16.9.2", "10.0.13.1"));
        let errors = check_tunnel(&model, &params());
        assert!(errors
            .iter()
            .any(|e| e.code == ErrorCode::TunnelAsymmetry
                && e.message.contains("do not form a point-to-point subnet")));
    }

    #[test]
    fn shut_down_tunnel_fails_the_goal() {
        let cfg = format!("{} shutdown\n", tunnel_cfg("172.16.0.1", "10.0.13.2"));
        let model = model(&cfg, &tunnel_cfg("172.16.0.2", "10.0.13.1"));
        let errors = check_tunnel(&model, &params());
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].code, ErrorCode::GoalUnmet);
        assert_eq!(errors[0].message, "tunnel interface is shut down");
    }
}
