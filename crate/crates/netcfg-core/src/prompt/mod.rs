//! Prompt construction.
//!
//! Every prompt is assembled from the template files under
//! `src/prompt/templates/` — versioned text, not string constants — with
//! `{name}` placeholders; literal braces are escaped by doubling. A prompt
//! is an ordered list of chat messages: a pinned system message, a pinned
//! assistant exemplar showing the expected answer shape, and one user
//! message carrying the runtime inputs.
//!
//! Two invariants matter to the bundle-splitting contract downstream: the
//! `~~~` device separator appears exactly once in a system message (the
//! instruction that defines it) and otherwise only inside assistant
//! exemplars — never in user messages.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intent::{Intent, IntentClass, LowLevelDescription, TRANSLATABLE_CLASSES};
use crate::model::{ConfigBundle, DeviceInventory, NetworkStatusSnapshot};
use crate::verify::VerificationReport;

const CLASSIFY_SYSTEM: &str = include_str!("templates/classify_system.txt");
const CLASSIFY_ASSISTANT: &str = include_str!("templates/classify_assistant.txt");
const CLASSIFY_USER: &str = include_str!("templates/classify_user.txt");
const TRANSLATE_SYSTEM: &str = include_str!("templates/translate_system.txt");
const TRANSLATE_USER: &str = include_str!("templates/translate_user.txt");
const GENERATE_SYSTEM: &str = include_str!("templates/generate_system.txt");
const GENERATE_USER: &str = include_str!("templates/generate_user.txt");
const REFINE_USER: &str = include_str!("templates/refine_user.txt");
const EXAMPLE_LLD_CP: &str = include_str!("templates/example_lld_cp.txt");
const EXAMPLE_LLD_RP: &str = include_str!("templates/example_lld_rp.txt");
const EXAMPLE_LLD_ACL: &str = include_str!("templates/example_lld_acl.txt");
const EXAMPLE_LLD_TN: &str = include_str!("templates/example_lld_tn.txt");
const EXAMPLE_CONFIG_CP: &str = include_str!("templates/example_config_cp.txt");
const EXAMPLE_CONFIG_RP: &str = include_str!("templates/example_config_rp.txt");
const EXAMPLE_CONFIG_ACL: &str = include_str!("templates/example_config_acl.txt");
const EXAMPLE_CONFIG_TN: &str = include_str!("templates/example_config_tn.txt");

/// Chat role of one prompt message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::System => write!(f, "system"),
            Role::User => write!(f, "user"),
            Role::Assistant => write!(f, "assistant"),
        }
    }
}

/// One chat message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptMessage {
    pub role: Role,
    pub content: String,
}

/// Which pipeline stage a prompt belongs to. Backends may branch on this;
/// fault schedules do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PromptPurpose {
    Classify,
    Translate,
    Generate,
    Refine,
}

/// An ordered prompt: system first, then exemplars, then the single user
/// message with the runtime inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub purpose: PromptPurpose,
    pub messages: Vec<PromptMessage>,
}

impl PromptBundle {
    pub fn system(&self) -> Option<&str> {
        self.messages.iter().find(|m| m.role == Role::System).map(|m| m.content.as_str())
    }

    pub fn user(&self) -> Option<&str> {
        self.messages.iter().find(|m| m.role == Role::User).map(|m| m.content.as_str())
    }

    pub fn assistant(&self) -> Option<&str> {
        self.messages.iter().find(|m| m.role == Role::Assistant).map(|m| m.content.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template references unknown placeholder '{{{0}}}'")]
    UnknownPlaceholder(String),
    #[error("unbalanced brace at byte {0}")]
    UnbalancedBrace(usize),
    #[error("malformed placeholder at byte {0}")]
    MalformedPlaceholder(usize),
}

/// A prompt could not be built: either a template failed to render, or the
/// request itself makes no sense for the pipeline stage.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("class Other is terminal: no prompt exists for it")]
    UntranslatableClass,
    #[error("the report already passed: there is nothing to refine")]
    NothingToRefine,
}

/// Substitute `{name}` placeholders from `vars`. `{{` and `}}` are literal
/// braces. Unknown placeholders and unbalanced braces are errors: a template
/// typo must fail loudly, not ship a malformed prompt.
pub fn render(template: &str, vars: &BTreeMap<&str, String>) -> Result<String, TemplateError> {
    let bytes = template.as_bytes();
    let mut out = String::with_capacity(template.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' if bytes.get(i + 1) == Some(&b'{') => {
                out.push('{');
                i += 2;
            }
            b'}' if bytes.get(i + 1) == Some(&b'}') => {
                out.push('}');
                i += 2;
            }
            b'{' => {
                let rest = &template[i + 1..];
                let end = rest.find('}').ok_or(TemplateError::UnbalancedBrace(i))?;
                let name = &rest[..end];
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    return Err(TemplateError::MalformedPlaceholder(i));
                }
                let value =
                    vars.get(name).ok_or_else(|| TemplateError::UnknownPlaceholder(name.into()))?;
                out.push_str(value);
                i += name.len() + 2;
            }
            b'}' => return Err(TemplateError::UnbalancedBrace(i)),
            _ => {
                // Advance over one UTF-8 scalar.
                let ch = template[i..].chars().next().expect("in-bounds char");
                out.push(ch);
                i += ch.len_utf8();
            }
        }
    }
    Ok(out)
}

fn example_lld(class: IntentClass) -> &'static str {
    match class {
        IntentClass::Cp => EXAMPLE_LLD_CP,
        IntentClass::Rp => EXAMPLE_LLD_RP,
        IntentClass::Acl => EXAMPLE_LLD_ACL,
        IntentClass::Tn => EXAMPLE_LLD_TN,
        IntentClass::Other => unreachable!("class Other is terminal and has no prompts"),
    }
}

fn example_config(class: IntentClass) -> &'static str {
    match class {
        IntentClass::Cp => EXAMPLE_CONFIG_CP,
        IntentClass::Rp => EXAMPLE_CONFIG_RP,
        IntentClass::Acl => EXAMPLE_CONFIG_ACL,
        IntentClass::Tn => EXAMPLE_CONFIG_TN,
        IntentClass::Other => unreachable!("class Other is terminal and has no prompts"),
    }
}

/// True when `name` occurs in `text` as a standalone word.
fn mentions_word(text: &str, name: &str) -> bool {
    let mut start = 0;
    while let Some(pos) = text[start..].find(name) {
        let abs = start + pos;
        let before_ok = abs == 0
            || !text[..abs].chars().next_back().is_some_and(|c| c.is_ascii_alphanumeric());
        let after = abs + name.len();
        let after_ok =
            after >= text.len() || !text[after..].chars().next().is_some_and(|c| c.is_ascii_alphanumeric());
        if before_ok && after_ok {
            return true;
        }
        start = abs + name.len().max(1);
    }
    false
}

/// Prompt builder with a byte budget for the embedded network status.
#[derive(Debug, Clone)]
pub struct Prompts {
    /// When the serialised status exceeds this many bytes, it is restricted
    /// to the devices named in the intent plus their one-hop neighbours.
    pub status_budget: usize,
}

impl Default for Prompts {
    fn default() -> Self {
        Self { status_budget: 8 * 1024 }
    }
}

impl Prompts {
    /// Classification prompt: class menu plus the intent text.
    pub fn classification(&self, intent: &Intent) -> Result<PromptBundle, PromptError> {
        let menu: String = TRANSLATABLE_CLASSES
            .iter()
            .chain(std::iter::once(&IntentClass::Other))
            .map(|c| format!("{}: {}", c.name(), c.definition()))
            .collect::<Vec<_>>()
            .join("\n");
        let vars = BTreeMap::from([
            ("intent_id", intent.id.clone()),
            ("Intent", intent.text.clone()),
            ("type_menu", menu),
        ]);
        Ok(PromptBundle {
            purpose: PromptPurpose::Classify,
            messages: vec![
                PromptMessage { role: Role::System, content: render(CLASSIFY_SYSTEM, &BTreeMap::new())? },
                PromptMessage { role: Role::Assistant, content: render(CLASSIFY_ASSISTANT, &BTreeMap::new())? },
                PromptMessage { role: Role::User, content: render(CLASSIFY_USER, &vars)? },
            ],
        })
    }

    /// Translation prompt: class-specific JSON exemplar plus the intent and
    /// the (possibly restricted) network status.
    pub fn translation(
        &self,
        intent: &Intent,
        class: IntentClass,
        status: &NetworkStatusSnapshot,
    ) -> Result<PromptBundle, PromptError> {
        if class == IntentClass::Other {
            return Err(PromptError::UntranslatableClass);
        }
        let mut status_json = status.to_json();
        if status_json.len() > self.status_budget {
            let mentioned: Vec<String> = status
                .devices
                .iter()
                .filter(|d| mentions_word(&intent.text, &d.name))
                .map(|d| d.name.clone())
                .collect();
            status_json = status.restricted_to(&mentioned).to_json();
        }
        let vars = BTreeMap::from([
            ("intent_id", intent.id.clone()),
            ("Intent", intent.text.clone()),
            ("network_status", status_json),
        ]);
        Ok(PromptBundle {
            purpose: PromptPurpose::Translate,
            messages: vec![
                PromptMessage { role: Role::System, content: render(TRANSLATE_SYSTEM, &BTreeMap::new())? },
                PromptMessage { role: Role::Assistant, content: render(example_lld(class), &BTreeMap::new())? },
                PromptMessage { role: Role::User, content: render(TRANSLATE_USER, &vars)? },
            ],
        })
    }

    /// Configuration exemplar for `lld`: the class exemplar instantiated
    /// once per target device.
    fn config_exemplar(&self, lld: &LowLevelDescription) -> Result<String, TemplateError> {
        if lld.class == IntentClass::Tn {
            let (a, b) = match lld.targets.as_slice() {
                [a, b, ..] => (a.clone(), b.clone()),
                [a] => (a.clone(), a.clone()),
                [] => ("R7".into(), "R8".into()),
            };
            let vars = BTreeMap::from([("device_a", a), ("device_b", b)]);
            return render(EXAMPLE_CONFIG_TN, &vars);
        }
        let mut sections = String::new();
        for target in &lld.targets {
            let vars = BTreeMap::from([("device", target.clone())]);
            sections.push_str(&render(example_config(lld.class), &vars)?);
        }
        Ok(sections)
    }

    /// Generation prompt: device inventory plus the canonical low-level
    /// description JSON.
    pub fn generation(
        &self,
        lld: &LowLevelDescription,
        inventory: &DeviceInventory,
    ) -> Result<PromptBundle, PromptError> {
        if lld.class == IntentClass::Other {
            return Err(PromptError::UntranslatableClass);
        }
        let vars = BTreeMap::from([
            ("device_inventory", inventory.to_prompt_lines()),
            ("low_level_description", lld.to_canonical_json()),
        ]);
        Ok(PromptBundle {
            purpose: PromptPurpose::Generate,
            messages: vec![
                PromptMessage { role: Role::System, content: render(GENERATE_SYSTEM, &BTreeMap::new())? },
                PromptMessage { role: Role::Assistant, content: self.config_exemplar(lld)? },
                PromptMessage { role: Role::User, content: render(GENERATE_USER, &vars)? },
            ],
        })
    }

    /// Refine prompt: the failed configuration quoted back (one `Device X:`
    /// block per section — the `~~~` separator stays out of user messages),
    /// with the verifier's errors and suggestions.
    pub fn refine(
        &self,
        previous: &ConfigBundle,
        report: &VerificationReport,
        lld: &LowLevelDescription,
    ) -> Result<PromptBundle, PromptError> {
        if report.passed {
            return Err(PromptError::NothingToRefine);
        }
        if lld.class == IntentClass::Other {
            return Err(PromptError::UntranslatableClass);
        }
        let previous_text = if previous.is_empty() {
            "(no parsable configuration was produced)".to_string()
        } else {
            previous
                .sections
                .iter()
                .map(|s| format!("Device {}:\n{}", s.device, s.text.trim_matches('\n')))
                .collect::<Vec<_>>()
                .join("\n\n")
        };
        let error_list = if report.errors.is_empty() {
            "- none".to_string()
        } else {
            report
                .errors
                .iter()
                .map(|e| format!("- {e}"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        let suggestion_list = if report.suggestions.is_empty() {
            "- none".to_string()
        } else {
            report
                .suggestions
                .iter()
                .map(|s| format!("- {s}"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        let vars = BTreeMap::from([
            ("low_level_description", lld.to_canonical_json()),
            ("previous_configuration", previous_text),
            ("error_list", error_list),
            ("suggestion_list", suggestion_list),
        ]);
        Ok(PromptBundle {
            purpose: PromptPurpose::Refine,
            messages: vec![
                PromptMessage { role: Role::System, content: render(GENERATE_SYSTEM, &BTreeMap::new())? },
                PromptMessage { role: Role::Assistant, content: self.config_exemplar(lld)? },
                PromptMessage { role: Role::User, content: render(REFINE_USER, &vars)? },
            ],
        })
    }
}
