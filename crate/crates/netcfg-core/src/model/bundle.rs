//! Multi-device configuration bundles.
//!
//! A backend answers a generation prompt with one section per device,
//! separated by lines containing the marker `~~~`; the first non-blank line
//! of each section names the device. [`ConfigBundle`] is the parsed form of
//! that layout and can be rendered back to the canonical wire text.

use serde::{Deserialize, Serialize};

/// Configuration text addressed to one device.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceSection {
    pub device: String,
    pub text: String,
}

/// An ordered set of per-device configuration sections.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigBundle {
    pub sections: Vec<DeviceSection>,
}

impl ConfigBundle {
    pub fn new(sections: Vec<DeviceSection>) -> Self {
        Self { sections }
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    /// Device names in section order.
    pub fn devices(&self) -> impl Iterator<Item = &str> {
        self.sections.iter().map(|s| s.device.as_str())
    }

    pub fn section(&self, device: &str) -> Option<&DeviceSection> {
        self.sections.iter().find(|s| s.device == device)
    }

    /// Render the bundle in the wire layout: device name, configuration
    /// lines, and a `~~~` line between consecutive sections.
    pub fn to_text(&self) -> String {
        self.sections
            .iter()
            .map(|s| format!("{}\n{}", s.device, s.text.trim_matches('\n')))
            .collect::<Vec<_>>()
            .join("\n~~~\n")
    }
}
