//! Configuration grammar and network model.
//!
//! This module owns the Cisco-IOS-style configuration subset the pipeline
//! speaks: an AST ([`ast`]), a total line parser ([`parse`]), a canonical
//! renderer ([`render`]), multi-device bundles ([`bundle`]), and the network
//! model built from a topology file ([`topology`]) together with its
//! serialisable status view ([`status`]).

pub mod ast;
pub mod bundle;
pub mod parse;
pub mod render;
pub mod status;
pub mod topology;

pub use ast::{
    mask_to_wildcard, prefix_len_to_mask, AclAction, AclBinding, AclEntry, AclStanza, AddrMatch,
    AdminState, DeviceConfigAst, Direction, InterfaceStanza, OspfNetwork, OspfStanza, Protocol,
    Stanza, TunnelMode, TunnelStanza,
};
pub use bundle::{ConfigBundle, DeviceSection};
pub use parse::{parse_config, ParseOutcome, Severity, SyntaxIssue};
pub use render::canonical_text;
pub use status::{DeviceInventory, NetworkStatusSnapshot};
pub use topology::{ApplyError, ApplyOutcome, Host, Link, NetworkModel, TopologyError};
