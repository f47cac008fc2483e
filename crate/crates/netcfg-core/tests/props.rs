//! Property-based checks of the structural invariants the pipeline leans on:
//! the canonical renderer inverts the parser, the ACL simulator agrees with a
//! bit-by-bit re-derivation, candidate application is idempotent, fault plans
//! are deterministic, and the `~~~` wire format round-trips.

use std::collections::BTreeMap;
use std::net::Ipv4Addr;

use proptest::prelude::*;

use netcfg_core::backend::{FaultKind, FaultSchedule, FaultSpec};
use netcfg_core::backend::split_config_bundle;
use netcfg_core::model::{
    canonical_text, parse_config, AclAction, AclBinding, AclEntry, AclStanza, AddrMatch,
    AdminState, ConfigBundle, DeviceConfigAst, DeviceSection, Direction, InterfaceStanza,
    NetworkModel, OspfNetwork, OspfStanza, Protocol, Stanza, TunnelStanza,
};
use netcfg_core::verify::{simulate_acl, Packet};

// --- generators -----------------------------------------------------------

/// Octets biased toward boundary values so wildcard masks actually match.
fn octet() -> impl Strategy<Value = u8> {
    prop_oneof![3 => prop_oneof![Just(0u8), Just(1), Just(10), Just(128), Just(255)], 1 => any::<u8>()]
}

fn ipv4() -> impl Strategy<Value = Ipv4Addr> {
    (octet(), octet(), octet(), octet()).prop_map(|(a, b, c, d)| Ipv4Addr::new(a, b, c, d))
}

fn wildcard() -> impl Strategy<Value = Ipv4Addr> {
    prop_oneof![
        3 => prop_oneof![
            Just(Ipv4Addr::new(0, 0, 0, 0)),
            Just(Ipv4Addr::new(0, 0, 0, 3)),
            Just(Ipv4Addr::new(0, 0, 0, 255)),
            Just(Ipv4Addr::new(0, 0, 255, 255)),
            Just(Ipv4Addr::new(255, 255, 255, 255)),
        ],
        1 => ipv4(),
    ]
}

fn addr_match() -> impl Strategy<Value = AddrMatch> {
    (ipv4(), wildcard()).prop_map(|(prefix, wildcard)| AddrMatch { prefix, wildcard })
}

fn action() -> impl Strategy<Value = AclAction> {
    prop_oneof![Just(AclAction::Permit), Just(AclAction::Deny)]
}

fn protocol() -> impl Strategy<Value = Protocol> {
    prop_oneof![Just(Protocol::Ip), Just(Protocol::Tcp), Just(Protocol::Udp), Just(Protocol::Icmp)]
}

fn admin_state() -> impl Strategy<Value = Option<AdminState>> {
    proptest::option::of(prop_oneof![Just(AdminState::Up), Just(AdminState::Down)])
}

fn iface_name() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u8..4, 0u8..4).prop_map(|(a, b)| format!("GigabitEthernet{a}/{b}")),
        (0u8..4, 0u8..4).prop_map(|(a, b)| format!("FastEthernet{a}/{b}")),
        (0u8..8).prop_map(|n| format!("Loopback{n}")),
    ]
}

fn description() -> impl Strategy<Value = String> {
    "[a-z]{1,8}( [a-z0-9]{1,8}){0,3}".prop_map(|s| s)
}

/// The body of an interface stanza, applied to a generated name later.
/// Bindings are deduplicated: re-listing the same access-group is the
/// parser's job to accept once, not the generator's job to produce.
fn interface_body() -> impl Strategy<Value = InterfaceStanza> {
    (
        proptest::option::of((ipv4(), wildcard())),
        admin_state(),
        proptest::option::of(description()),
        proptest::collection::btree_map(1u32..=199, prop_oneof![Just(Direction::In), Just(Direction::Out)], 0..3),
    )
        .prop_map(|(addr, admin, description, bindings)| InterfaceStanza {
            name: String::new(),
            ip_address: addr.map(|(ip, _)| ip),
            mask: addr.map(|(_, mask)| mask),
            admin_state: admin,
            description,
            acl_bindings: bindings
                .into_iter()
                .map(|(acl_id, direction)| AclBinding { acl_id, direction })
                .collect(),
        })
}

fn standard_entry() -> impl Strategy<Value = AclEntry> {
    (action(), addr_match()).prop_map(|(action, src)| AclEntry {
        action,
        protocol: Protocol::Ip,
        src,
        dst: None,
        dst_port: None,
    })
}

fn extended_entry() -> impl Strategy<Value = AclEntry> {
    (action(), protocol(), addr_match(), proptest::option::of(addr_match()), proptest::option::of(1u16..=65535))
        .prop_map(|(action, protocol, src, dst, port)| {
            // A port match needs a destination and a port-capable protocol;
            // anything else is not expressible in the configuration text.
            let dst_port = if dst.is_some() && protocol.is_port_capable() { port } else { None };
            AclEntry { action, protocol, src, dst, dst_port }
        })
}

fn tunnel_body() -> impl Strategy<Value = TunnelStanza> {
    (
        proptest::option::of((ipv4(), wildcard())),
        proptest::option::of(iface_name()),
        proptest::option::of(ipv4()),
        admin_state(),
    )
        .prop_map(|(addr, source_if, destination_ip, admin)| TunnelStanza {
            tunnel_if: String::new(),
            source_if,
            destination_ip,
            tunnel_ip: addr.map(|(ip, _)| ip),
            tunnel_mask: addr.map(|(_, mask)| mask),
            mode: Default::default(),
            admin_state: admin,
        })
}

fn ospf_network() -> impl Strategy<Value = OspfNetwork> {
    (ipv4(), wildcard(), 0u32..=100).prop_map(|(prefix, wildcard, area)| OspfNetwork {
        prefix,
        wildcard,
        area,
    })
}

/// A well-formed device configuration: unique stanza names per kind (the
/// parser merges re-opened blocks, so duplicates could never round-trip),
/// stanzas shuffled to exercise canonical reordering.
fn device_ast() -> impl Strategy<Value = DeviceConfigAst> {
    let acls = proptest::collection::btree_map(
        prop_oneof![1u32..=99, 100u32..=199],
        proptest::collection::vec(standard_entry(), 1..4),
        0..3,
    )
    .prop_map(|by_id| {
        by_id
            .into_iter()
            .map(|(acl_id, entries)| Stanza::Acl(AclStanza { acl_id, entries }))
            .collect::<Vec<_>>()
    });
    // Extended lists get their own pool of ids so entry shape matches range.
    let extended = proptest::collection::btree_map(
        100u32..=199,
        proptest::collection::vec(extended_entry(), 1..4),
        0..3,
    )
    .prop_map(|by_id| {
        by_id
            .into_iter()
            .map(|(acl_id, entries)| Stanza::Acl(AclStanza { acl_id, entries }))
            .collect::<Vec<_>>()
    });
    let interfaces =
        proptest::collection::btree_map(iface_name(), interface_body(), 0..3).prop_map(|by_name| {
            by_name
                .into_iter()
                .map(|(name, body)| Stanza::Interface(InterfaceStanza { name, ..body }))
                .collect::<Vec<_>>()
        });
    let tunnels =
        proptest::collection::btree_map(0u8..6, tunnel_body(), 0..2).prop_map(|by_n| {
            by_n.into_iter()
                .map(|(n, body)| {
                    Stanza::Tunnel(TunnelStanza { tunnel_if: format!("Tunnel{n}"), ..body })
                })
                .collect::<Vec<_>>()
        });
    let ospf = proptest::collection::btree_map(
        1u32..=10,
        proptest::collection::vec(ospf_network(), 0..3),
        0..2,
    )
    .prop_map(|by_pid| {
        by_pid
            .into_iter()
            .map(|(process_id, networks)| Stanza::Ospf(OspfStanza { process_id, networks }))
            .collect::<Vec<_>>()
    });

    (acls, extended, interfaces, tunnels, ospf, "R[1-9][0-9]?")
        .prop_map(|(mut a, mut e, mut i, mut t, mut o, device)| {
            let mut stanzas = Vec::new();
            stanzas.append(&mut a);
            // Standard and extended pools can collide on 100-199; keep the
            // first occurrence of each id.
            for stanza in e.drain(..) {
                let Stanza::Acl(ref acl) = stanza else { unreachable!() };
                let taken = stanzas
                    .iter()
                    .any(|s| matches!(s, Stanza::Acl(x) if x.acl_id == acl.acl_id));
                if !taken {
                    stanzas.push(stanza);
                }
            }
            stanzas.append(&mut i);
            stanzas.append(&mut t);
            stanzas.append(&mut o);
            (stanzas, device)
        })
        .prop_flat_map(|(stanzas, device)| {
            Just(stanzas).prop_shuffle().prop_map(move |stanzas| DeviceConfigAst {
                device: device.clone(),
                stanzas,
            })
        })
}

fn packet() -> impl Strategy<Value = Packet> {
    (protocol(), ipv4(), ipv4(), proptest::option::of(prop_oneof![Just(22u16), Just(443), 1u16..=65535]))
        .prop_map(|(protocol, src_ip, dst_ip, dst_port)| Packet { protocol, src_ip, dst_ip, dst_port })
}

// --- the oracle matcher, re-derived bit by bit ----------------------------

fn naive_bits_match(prefix: Ipv4Addr, wildcard: Ipv4Addr, addr: Ipv4Addr) -> bool {
    let (p, w, a) = (prefix.octets(), wildcard.octets(), addr.octets());
    (0..4).all(|i| (0..8).all(|bit| {
        let mask = 1u8 << bit;
        w[i] & mask != 0 || p[i] & mask == a[i] & mask
    }))
}

fn naive_verdict(entries: &[AclEntry], packet: &Packet) -> AclAction {
    for entry in entries {
        let protocol_ok = entry.protocol == Protocol::Ip || entry.protocol == packet.protocol;
        let src_ok = naive_bits_match(entry.src.prefix, entry.src.wildcard, packet.src_ip);
        let dst_ok = entry
            .dst
            .map_or(true, |d| naive_bits_match(d.prefix, d.wildcard, packet.dst_ip));
        let port_ok = entry.dst_port.map_or(true, |p| packet.dst_port == Some(p));
        if protocol_ok && src_ok && dst_ok && port_ok {
            return entry.action;
        }
    }
    AclAction::Deny
}

// --- properties ------------------------------------------------------------

fn two_router_baseline() -> NetworkModel {
    NetworkModel::from_json(
        r#"{
        "devices": [
            {"name": "R1", "configs": "interface GigabitEthernet0/0\n ip address 10.0.12.1 255.255.255.252\n no shutdown\n"},
            {"name": "R2", "configs": "interface GigabitEthernet0/0\n ip address 10.0.12.2 255.255.255.252\n no shutdown\n"}
        ],
        "links": [{"a": "R1:GigabitEthernet0/0", "b": "R2:GigabitEthernet0/0"}]
    }"#,
    )
    .expect("baseline loads")
}

proptest! {
    /// Rendering and re-parsing any well-formed configuration is the
    /// identity up to canonical stanza order, and rendering is a fixed
    /// point after one pass.
    #[test]
    fn canonical_text_reparses_to_the_canonical_ast(ast in device_ast()) {
        let rendered = canonical_text(&ast);
        let outcome = parse_config(&ast.device, &rendered);
        prop_assert!(outcome.issues.is_empty(), "{:?}\n--- rendered ---\n{rendered}", outcome.issues);
        prop_assert_eq!(&outcome.ast, &ast.canonicalized());
        prop_assert_eq!(canonical_text(&outcome.ast), rendered);
    }

    /// The first-match-wins simulator agrees with an independent bit-level
    /// re-derivation on arbitrary entry lists and packets.
    #[test]
    fn acl_simulation_matches_the_naive_matcher(
        entries in proptest::collection::vec(extended_entry(), 0..6),
        packet in packet(),
    ) {
        prop_assert_eq!(simulate_acl(&entries, &packet), naive_verdict(&entries, &packet));
    }

    /// Applying the same candidate twice yields the model the first
    /// application produced: overwrites land on their own values and list
    /// merges drop exact duplicates.
    #[test]
    fn applying_a_candidate_twice_changes_nothing_more(
        first in device_ast(),
        second in proptest::option::of(device_ast()),
    ) {
        let baseline = two_router_baseline();
        let mut sections = vec![DeviceSection {
            device: "R1".into(),
            text: canonical_text(&DeviceConfigAst { device: "R1".into(), ..first }),
        }];
        if let Some(ast) = second {
            sections.push(DeviceSection {
                device: "R2".into(),
                text: canonical_text(&DeviceConfigAst { device: "R2".into(), ..ast }),
            });
        }
        let bundle = ConfigBundle::new(sections);
        let once = baseline.apply_candidate(&bundle).expect("candidate applies");
        let twice = once.model.apply_candidate(&bundle).expect("candidate re-applies");
        prop_assert_eq!(&twice.model, &once.model);
    }

    /// Fault plans pick round(p·n) of n intents, always the same ones for
    /// the same seed, reported in sorted order.
    #[test]
    fn fault_plans_are_deterministic_and_proportional(
        n in 1usize..60,
        prob in 0.0f64..=1.0,
        seed in any::<u64>(),
        kind in prop_oneof![Just(FaultKind::Class), Just(FaultKind::Json), Just(FaultKind::Syntax)],
    ) {
        let ids: Vec<String> = (0..n).map(|i| format!("intent-{i:02}")).collect();
        let spec = FaultSpec::new(BTreeMap::from([(kind, prob)]), FaultSchedule::Always, seed);
        let faulted = spec.resolve(&ids).faulted_ids(kind);
        prop_assert_eq!(faulted.len(), (prob * n as f64).round() as usize);
        prop_assert_eq!(&faulted, &spec.resolve(&ids).faulted_ids(kind));
        prop_assert!(faulted.iter().all(|id| ids.contains(id)));
        prop_assert!(faulted.windows(2).all(|w| w[0] < w[1]));
    }

    /// The `~~~` wire format parses back to the bundle that produced it.
    #[test]
    fn bundle_wire_format_round_trips(
        sections in proptest::collection::vec(
            (
                "[A-Za-z][A-Za-z0-9_.-]{0,8}",
                proptest::collection::vec("[a-z][a-z0-9 ./-]{0,16}[a-z0-9]", 1..4),
            ),
            1..4,
        )
    ) {
        let bundle = ConfigBundle::new(
            sections
                .into_iter()
                .map(|(device, lines)| DeviceSection { device, text: lines.join("\n") })
                .collect(),
        );
        let reparsed = split_config_bundle(&bundle.to_text()).expect("wire format splits");
        prop_assert_eq!(reparsed, bundle);
    }
}
