//! Serialisable views of the network model for prompt embedding.
//!
//! [`NetworkStatusSnapshot`] is the operational picture (devices, interface
//! addresses and states, links) injected into translation prompts;
//! [`DeviceInventory`] is the hardware picture (vendor, platform, interface
//! names) injected into generation prompts.

use serde::{Deserialize, Serialize};

use super::ast::AdminState;
use super::topology::NetworkModel;

/// Interface state as seen by the snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceStatus {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ip: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
    pub state: String,
}

/// One device with its interfaces (tunnels included).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceStatus {
    pub name: String,
    pub interfaces: Vec<InterfaceStatus>,
}

/// A link in `device:interface` endpoint form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkStatus {
    pub a: String,
    pub b: String,
}

/// Snapshot of the current network state: devices with interface addresses
/// and administrative states, plus the physical links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkStatusSnapshot {
    pub devices: Vec<DeviceStatus>,
    pub links: Vec<LinkStatus>,
}

fn state_str(state: AdminState) -> String {
    state.to_string()
}

impl NetworkStatusSnapshot {
    /// Capture the state of a model. Devices and interfaces are emitted in
    /// sorted order so the same model always yields the same snapshot.
    pub fn capture(model: &NetworkModel) -> Self {
        let devices = model
            .devices
            .iter()
            .map(|(name, ast)| {
                let mut interfaces: Vec<InterfaceStatus> = ast
                    .interfaces()
                    .map(|i| InterfaceStatus {
                        name: i.name.clone(),
                        ip: i.ip_address.map(|a| a.to_string()),
                        mask: i.mask.map(|m| m.to_string()),
                        state: state_str(i.effective_state()),
                    })
                    .chain(ast.tunnels().map(|t| InterfaceStatus {
                        name: t.tunnel_if.clone(),
                        ip: t.tunnel_ip.map(|a| a.to_string()),
                        mask: t.tunnel_mask.map(|m| m.to_string()),
                        state: state_str(t.effective_state()),
                    }))
                    .collect();
                interfaces.sort_by(|a, b| a.name.cmp(&b.name));
                DeviceStatus { name: name.clone(), interfaces }
            })
            .collect();
        let links = model
            .links
            .iter()
            .map(|l| LinkStatus { a: l.endpoint_a(), b: l.endpoint_b() })
            .collect();
        Self { devices, links }
    }

    /// Compact JSON with lexically sorted keys: the embedding format for
    /// prompts, and the output of the status CLI command.
    pub fn to_json(&self) -> String {
        crate::json::canonical(self)
    }

    /// Reduce the snapshot to `keep` devices plus their one-hop link
    /// neighbours; links survive only if both endpoints survive. Used when a
    /// full snapshot would blow the prompt byte budget.
    pub fn restricted_to(&self, keep: &[String]) -> Self {
        let mut kept: Vec<String> = Vec::new();
        for device in keep {
            if !kept.contains(device) {
                kept.push(device.clone());
            }
        }
        for link in &self.links {
            let (da, db) = (device_of(&link.a), device_of(&link.b));
            if keep.iter().any(|k| k == da) && !kept.iter().any(|k| k == db) {
                kept.push(db.to_string());
            }
            if keep.iter().any(|k| k == db) && !kept.iter().any(|k| k == da) {
                kept.push(da.to_string());
            }
        }
        let devices: Vec<DeviceStatus> =
            self.devices.iter().filter(|d| kept.iter().any(|k| *k == d.name)).cloned().collect();
        let links = self
            .links
            .iter()
            .filter(|l| {
                devices.iter().any(|d| d.name == device_of(&l.a))
                    && devices.iter().any(|d| d.name == device_of(&l.b))
            })
            .cloned()
            .collect();
        Self { devices, links }
    }
}

fn device_of(endpoint: &str) -> &str {
    endpoint.split_once(':').map_or(endpoint, |(d, _)| d)
}

/// One device as presented to the generation prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InventoryDevice {
    pub name: String,
    pub platform: String,
    pub interfaces: Vec<String>,
}

/// The hardware inventory: device platforms and their interface names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceInventory {
    pub devices: Vec<InventoryDevice>,
}

impl DeviceInventory {
    /// Derive the inventory from a model. All modelled devices are Cisco IOS
    /// routers; interface lists come from the parsed configurations.
    pub fn from_model(model: &NetworkModel) -> Self {
        let devices = model
            .devices
            .iter()
            .map(|(name, ast)| {
                let mut interfaces: Vec<String> = ast
                    .interfaces()
                    .map(|i| i.name.clone())
                    .chain(ast.tunnels().map(|t| t.tunnel_if.clone()))
                    .collect();
                interfaces.sort();
                InventoryDevice { name: name.clone(), platform: "Cisco IOS router".into(), interfaces }
            })
            .collect();
        Self { devices }
    }

    /// Render as one line per device for prompt embedding.
    pub fn to_prompt_lines(&self) -> String {
        self.devices
            .iter()
            .map(|d| format!("{}: {}; interfaces: {}", d.name, d.platform, d.interfaces.join(", ")))
            .collect::<Vec<_>>()
            .join("\n")
    }
}
