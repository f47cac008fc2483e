//! OSPF goal and consistency checks.
//!
//! Coverage: every network statement requested by the intent must appear in
//! the target process with the requested area. Adjacency: for every physical
//! link between two OSPF-speaking devices, either both sides advertise the
//! link subnet in the same area or neither side does — a one-sided or
//! cross-area advertisement would leave the adjacency dead on a real device.

use std::net::Ipv4Addr;

use crate::intent::RpParams;
use crate::model::{DeviceConfigAst, NetworkModel};

use super::report::{ErrorCode, VerificationError};

/// The area a device would run `addr` in: the first covering network
/// statement wins, scanning processes and statements in configuration order.
fn advertised_area(ast: &DeviceConfigAst, addr: Ipv4Addr) -> Option<u32> {
    ast.ospf_stanzas()
        .flat_map(|o| o.networks.iter())
        .find(|n| n.covers(addr))
        .map(|n| n.area)
}

/// Goal check for a routing intent: the requested networks must be
/// advertised by the requested process with the requested area.
pub fn check_ospf_coverage(candidate: &NetworkModel, params: &RpParams) -> Vec<VerificationError> {
    let mut errors = Vec::new();
    let Some(ast) = candidate.device(&params.device) else {
        return errors;
    };
    let location = format!("router ospf {}", params.ospf_process_id);
    let Some(process) = ast.ospf(params.ospf_process_id) else {
        errors.push(VerificationError {
            code: ErrorCode::OspfCoverage,
            device: params.device.clone(),
            location: Some(location),
            message: format!("ospf process {} is not configured", params.ospf_process_id),
        });
        return errors;
    };
    for net in &params.networks {
        let present = process
            .networks
            .iter()
            .any(|n| n.prefix == net.prefix && n.wildcard == net.wildcard && n.area == params.area);
        if !present {
            errors.push(VerificationError {
                code: ErrorCode::OspfCoverage,
                device: params.device.clone(),
                location: Some(location.clone()),
                message: format!(
                    "network {} {} area {} is not advertised by ospf process {}",
                    net.prefix, net.wildcard, params.area, params.ospf_process_id
                ),
            });
        }
    }
    errors
}

/// Consistency check over every link of the candidate model.
pub fn check_ospf_adjacency(candidate: &NetworkModel) -> Vec<VerificationError> {
    let mut errors = Vec::new();
    for link in &candidate.links {
        let (Some(ast_a), Some(ast_b)) =
            (candidate.device(&link.device_a), candidate.device(&link.device_b))
        else {
            continue;
        };
        // Only meaningful between devices that run OSPF at all.
        if ast_a.ospf_stanzas().next().is_none() || ast_b.ospf_stanzas().next().is_none() {
            continue;
        }
        let (Some(ip_a), Some(ip_b)) =
            (ast_a.interface_ip(&link.if_a), ast_b.interface_ip(&link.if_b))
        else {
            continue;
        };
        let location = format!("link {} - {}", link.endpoint_a(), link.endpoint_b());
        match (advertised_area(ast_a, ip_a), advertised_area(ast_b, ip_b)) {
            (Some(a), Some(b)) if a != b => errors.push(VerificationError {
                code: ErrorCode::OspfAdjacency,
                device: link.device_a.clone(),
                location: Some(location),
                message: format!(
                    "{} advertises the link in area {a} but {} advertises it in area {b}",
                    link.device_a, link.device_b
                ),
            }),
            (Some(_), None) => errors.push(VerificationError {
                code: ErrorCode::OspfAdjacency,
                device: link.device_b.clone(),
                location: Some(location),
                message: format!(
                    "{} advertises the link subnet but {} does not",
                    link.device_a, link.device_b
                ),
            }),
            (None, Some(_)) => errors.push(VerificationError {
                code: ErrorCode::OspfAdjacency,
                device: link.device_a.clone(),
                location: Some(location),
                message: format!(
                    "{} advertises the link subnet but {} does not",
                    link.device_b, link.device_a
                ),
            }),
            _ => {}
        }
    }
    errors
}
